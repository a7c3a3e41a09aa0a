#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "errors.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name)
      : path(fs::temp_directory_path() / name) {}
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  void write(const std::string& text) const {
    std::ofstream out(path);
    out << text;
  }
};

qhuber::Dataset tiny_dataset() {
  qhuber::Dataset ds;
  ds.features = qhuber::Matrix(3, 2);
  ds.features(0, 0) = 1.0 / 3.0;
  ds.features(0, 1) = -2.5e-8;
  ds.features(1, 0) = 2.0;
  ds.features(1, 1) = 1.0e15;
  ds.features(2, 0) = -0.1;
  ds.features(2, 1) = 7.0;
  ds.response = {0.25, -1.75, 3.0};
  ds.feature_names = {"a", "b"};
  ds.response_name = "y";
  return ds;
}

}  // namespace

TEST_CASE("csv round trip preserves exact doubles and names") {
  const qhuber::Dataset ds = tiny_dataset();
  TempFile f("qh_test_roundtrip.csv");
  qhuber::save_csv(ds, f.path.string());
  const qhuber::Dataset back = qhuber::load_csv(f.path.string());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(back.features(i, j) == ds.features(i, j));
    CHECK(back.response[i] == ds.response[i]);
  }
  CHECK(back.feature_names == ds.feature_names);
  CHECK(back.response_name == ds.response_name);
}

TEST_CASE("csv loader rejects malformed input with located errors") {
  TempFile f("qh_test_bad.csv");

  f.write("a,b,y\n1,2\n");
  try {
    qhuber::load_csv(f.path.string());
    FAIL("expected ParseError");
  } catch (const qhuber::ParseError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  f.write("a,b,y\n1,2,3\n4,oops,6\n");
  try {
    qhuber::load_csv(f.path.string());
    FAIL("expected ParseError");
  } catch (const qhuber::ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }

  f.write("a,b,y\n1,nan,3\n");
  CHECK_THROWS_AS(qhuber::load_csv(f.path.string()), qhuber::ParseError);

  f.write("a,b,y\n1,inf,3\n");
  CHECK_THROWS_AS(qhuber::load_csv(f.path.string()), qhuber::ParseError);

  f.write("y\n1\n");
  CHECK_THROWS_AS(qhuber::load_csv(f.path.string()), qhuber::ParseError);

  f.write("a,b,y\n");
  CHECK_THROWS_AS(qhuber::load_csv(f.path.string()), qhuber::ParseError);

  CHECK_THROWS_AS(qhuber::load_csv("/nonexistent/file.csv"), qhuber::IoError);
}

TEST_CASE("csv loader accepts CRLF line endings") {
  TempFile f("qh_test_crlf.csv");
  f.write("a,y\r\n1.5,2\r\n");
  const qhuber::Dataset ds = qhuber::load_csv(f.path.string());
  CHECK(ds.rows() == 1);
  CHECK(ds.features(0, 0) == 1.5);
  CHECK(ds.response[0] == 2.0);
}

TEST_CASE("rescale maps every column onto [-1, 1]") {
  qhuber::Dataset ds;
  ds.features = qhuber::Matrix(3, 2);
  ds.features(0, 0) = 1.0;
  ds.features(1, 0) = 3.0;
  ds.features(2, 0) = 5.0;
  ds.features(0, 1) = 7.0;  // constant column
  ds.features(1, 1) = 7.0;
  ds.features(2, 1) = 7.0;
  ds.response = {0.0, 10.0, 5.0};
  ds.feature_names = {"a", "b"};
  ds.response_name = "y";

  const qhuber::RescaledDataset r = qhuber::rescale(ds);
  CHECK(r.feature_maps[0].scale == doctest::Approx(0.5));
  CHECK(r.feature_maps[0].offset == doctest::Approx(-1.5));
  CHECK(r.data.features(0, 0) == doctest::Approx(-1.0));
  CHECK(r.data.features(1, 0) == doctest::Approx(0.0));
  CHECK(r.data.features(2, 0) == doctest::Approx(1.0));
  CHECK(r.feature_maps[1].scale == 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.data.features(i, 1) == 0.0);
  CHECK(r.data.response[0] == doctest::Approx(-1.0));
  CHECK(r.data.response[1] == doctest::Approx(1.0));
  CHECK(r.data.response[2] == doctest::Approx(0.0));
  CHECK(qhuber::apply(r.response_map, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("split shuffles, partitions, and reproduces") {
  qhuber::Dataset ds;
  ds.features = qhuber::Matrix(10, 1);
  for (std::size_t i = 0; i < 10; ++i) {
    ds.features(i, 0) = static_cast<double>(i);
    ds.response.push_back(static_cast<double>(i) * 10.0);
  }
  ds.feature_names = {"a"};
  ds.response_name = "y";

  qhuber::Rng rng(2);
  const qhuber::SplitResult sp = qhuber::split(ds, 0.75, rng);
  CHECK(sp.train.rows() == 7);
  CHECK(sp.validation.rows() == 3);

  std::vector<double> seen;
  for (std::size_t i = 0; i < 7; ++i) seen.push_back(sp.train.response[i]);
  for (std::size_t i = 0; i < 3; ++i) seen.push_back(sp.validation.response[i]);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(seen[i] == doctest::Approx(static_cast<double>(i) * 10.0));

  qhuber::Rng rng2(2);
  const qhuber::SplitResult again = qhuber::split(ds, 0.75, rng2);
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(again.train.response[i] == sp.train.response[i]);

  qhuber::Rng rng3(2);
  CHECK_THROWS_AS(qhuber::split(ds, 0.05, rng3), std::domain_error);
}

TEST_CASE("laplace inverse cdf pinned values") {
  CHECK(qhuber::laplace_inverse_cdf(0.5, 2.0) == 0.0);
  CHECK(qhuber::laplace_inverse_cdf(0.75, 2.0) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(qhuber::laplace_inverse_cdf(0.25, 2.0) ==
        doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(qhuber::laplace_inverse_cdf(0.9, 1.0) >
        qhuber::laplace_inverse_cdf(0.8, 1.0));
  CHECK_THROWS_AS(qhuber::laplace_inverse_cdf(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(qhuber::laplace_inverse_cdf(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(qhuber::laplace_inverse_cdf(0.5, -1.0), std::domain_error);
}

TEST_CASE("sign-mixed noise hits the requested positive count exactly") {
  for (double pf : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    qhuber::Rng rng(77);
    const std::vector<double> eps =
        qhuber::sample_sign_mixed_laplace(rng, 101, {1.5, pf});
    std::size_t pos = 0;
    for (double v : eps) {
      REQUIRE(v != 0.0);
      if (v > 0.0) ++pos;
    }
    CHECK(pos == static_cast<std::size_t>(std::llround(101 * pf)));
  }
}

TEST_CASE("noise magnitudes follow the exponential law") {
  qhuber::Rng rng(13);
  const double sigma = 2.0;
  std::vector<double> mags;
  for (double v : qhuber::sample_sign_mixed_laplace(rng, 2000, {sigma, 0.5}))
    mags.push_back(std::fabs(v));
  const double d = oracles::ks_statistic(mags, [&](double x) {
    return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / sigma);
  });
  CHECK(d < 1.63 / std::sqrt(2000.0));
}

TEST_CASE("zero sigma produces exact zeros") {
  qhuber::Rng rng(1);
  const std::vector<double> eps =
      qhuber::sample_sign_mixed_laplace(rng, 16, {0.0, 0.3});
  for (double v : eps) CHECK(v == 0.0);
}

TEST_CASE("linear demo wiring") {
  qhuber::Rng rng(4);
  const std::vector<double> x_true{2.0, 5.0};
  const qhuber::LinearDemo demo =
      qhuber::gen_linear_demo(rng, 50, x_true, {1.0, 0.3});
  CHECK(demo.model.design.rows == 50);
  CHECK(demo.model.design.cols == 2);
  CHECK(demo.model.response.size() == 50);
  // Residuals against the true coefficients carry the planted sign counts.
  std::vector<double> ax(50);
  qhuber::matvec(demo.model.design, x_true, ax);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 50; ++i)
    if (demo.model.response[i] - ax[i] > 0.0) ++pos;
  CHECK(pos == 15);

  qhuber::Rng rng2(4);
  const qhuber::LinearDemo again =
      qhuber::gen_linear_demo(rng2, 50, x_true, {1.0, 0.3});
  CHECK(again.model.response == demo.model.response);
  CHECK(again.model.design.data == demo.model.design.data);
}

TEST_CASE("noise spec validation") {
  qhuber::Rng rng(1);
  CHECK_THROWS_AS(qhuber::sample_sign_mixed_laplace(rng, 5, {-1.0, 0.5}),
                  std::domain_error);
  CHECK_THROWS_AS(qhuber::sample_sign_mixed_laplace(rng, 5, {1.0, 1.5}),
                  std::domain_error);
  CHECK_THROWS_AS(qhuber::sample_sign_mixed_laplace(rng, 0, {1.0, 0.5}),
                  std::domain_error);
}
