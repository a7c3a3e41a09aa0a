#include "datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace qhuber {

void validate_noise_spec(const NoiseSpec& spec) {
  if (!std::isfinite(spec.sigma) || spec.sigma < 0.0)
    throw std::domain_error("noise sigma must be finite and >= 0");
  if (!std::isfinite(spec.pos_fraction) || spec.pos_fraction < 0.0 ||
      spec.pos_fraction > 1.0)
    throw std::domain_error("pos_fraction must lie in [0, 1]");
}

double laplace_inverse_cdf(double u, double sigma) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("laplace_inverse_cdf needs u in (0, 1)");
  if (!std::isfinite(sigma) || sigma < 0.0)
    throw std::domain_error("sigma must be finite and >= 0");
  const double centered = u - 0.5;
  const double sign = centered < 0.0 ? -1.0 : 1.0;
  return -sigma * sign * std::log(1.0 - 2.0 * std::fabs(centered));
}

std::vector<double> sample_sign_mixed_laplace(Rng& rng, std::size_t n,
                                              const NoiseSpec& spec) {
  validate_noise_spec(spec);
  if (n == 0) throw std::domain_error("sample count must be positive");
  std::vector<double> out(n, 0.0);
  if (spec.sigma == 0.0) return out;

  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::fabs(laplace_inverse_cdf(rng.uniform01(), spec.sigma));

  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.pos_fraction));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.bounded(i + 1)]);
  for (std::size_t i = n_pos; i < n; ++i) out[idx[i]] = -out[idx[i]];
  return out;
}

LinearDemo gen_linear_demo(Rng& rng, std::size_t n,
                           std::span<const double> x_true,
                           const NoiseSpec& noise) {
  validate_noise_spec(noise);
  const std::size_t p = x_true.size();
  if (p == 0) throw std::domain_error("x_true must be nonempty");
  if (n < p) throw std::domain_error("need at least as many rows as parameters");

  LinearDemo demo;
  demo.x_true.assign(x_true.begin(), x_true.end());
  demo.model.design = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) demo.model.design(i, j) = rng.normal();

  demo.model.response.resize(n);
  matvec(demo.model.design, demo.x_true, demo.model.response);
  const std::vector<double> eps = sample_sign_mixed_laplace(rng, n, noise);
  for (std::size_t i = 0; i < n; ++i) demo.model.response[i] += eps[i];
  return demo;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  std::ostringstream msg;
  if (ec != std::errc{} || ptr != end) {
    msg << "row " << row << ", column " << col << ": cannot parse '" << cell
        << "' as a number";
    throw ParseError(msg.str());
  }
  if (!std::isfinite(value)) {
    msg << "row " << row << ", column " << col << ": non-finite value '" << cell
        << "'";
    throw ParseError(msg.str());
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2)
    throw ParseError(path + ": need a header row and at least one data row");

  const std::vector<std::string> header = split_fields(lines[0]);
  const std::size_t ncol = header.size();
  if (ncol < 2)
    throw ParseError(path + ": need at least one feature column plus response");

  Dataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  ds.response_name = header.back();
  const std::size_t nrow = lines.size() - 1;
  ds.features = Matrix(nrow, ncol - 1);
  ds.response.resize(nrow);

  for (std::size_t r = 0; r < nrow; ++r) {
    const std::vector<std::string> fields = split_fields(lines[r + 1]);
    if (fields.size() != ncol) {
      std::ostringstream msg;
      msg << "row " << r + 2 << ": has " << fields.size()
          << " fields, expected " << ncol;
      throw ParseError(msg.str());
    }
    for (std::size_t c = 0; c < ncol; ++c) {
      const double v = parse_cell(fields[c], r + 2, c + 1);
      if (c + 1 == ncol)
        ds.response[r] = v;
      else
        ds.features(r, c) = v;
    }
  }
  return ds;
}

static std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_csv(const Dataset& ds, const std::string& path) {
  if (ds.feature_names.size() != ds.cols())
    throw std::domain_error("feature name count does not match columns");
  if (ds.response.size() != ds.rows())
    throw std::domain_error("response length does not match rows");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const std::string& name : ds.feature_names) out << name << ',';
  out << ds.response_name << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j)
      out << format_double(ds.features(i, j)) << ',';
    out << format_double(ds.response[i]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

double apply(const AffineMap& m, double v) { return m.scale * v + m.offset; }

namespace {

AffineMap column_map(std::span<const double> values) {
  double mn = values[0], mx = values[0];
  for (double v : values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mx == mn) return {0.0, 0.0};
  return {2.0 / (mx - mn), -(mx + mn) / (mx - mn)};
}

}  // namespace

RescaledDataset rescale(const Dataset& ds) {
  if (ds.rows() == 0) throw std::domain_error("dataset is empty");
  RescaledDataset out;
  out.data = ds;
  out.feature_maps.resize(ds.cols());
  std::vector<double> column(ds.rows());
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    for (std::size_t i = 0; i < ds.rows(); ++i) column[i] = ds.features(i, j);
    out.feature_maps[j] = column_map(column);
    for (std::size_t i = 0; i < ds.rows(); ++i)
      out.data.features(i, j) = apply(out.feature_maps[j], column[i]);
  }
  out.response_map = column_map(ds.response);
  for (std::size_t i = 0; i < ds.rows(); ++i)
    out.data.response[i] = apply(out.response_map, ds.response[i]);
  return out;
}

namespace {

Dataset take_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.response_name = ds.response_name;
  out.features = Matrix(rows.size(), ds.cols());
  out.response.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j)
      out.features(i, j) = ds.features(rows[i], j);
    out.response[i] = ds.response[rows[i]];
  }
  return out;
}

}  // namespace

SplitResult split(const Dataset& ds, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::domain_error("train_fraction must lie in (0, 1)");
  const std::size_t n = ds.rows();
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n)
    throw std::domain_error("split leaves an empty part");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.bounded(i + 1)]);

  SplitResult out;
  out.train = take_rows(ds, std::span<const std::size_t>(idx).first(n_train));
  out.validation =
      take_rows(ds, std::span<const std::size_t>(idx).subspan(n_train));
  return out;
}

}  // namespace qhuber
