// Experiment runner for the quantile Huber regression library.
//
// Subcommands: demo (joint inference vs least squares on synthetic linear
// data), gridscan (loss curves over a tau grid), gbm (boosted trees on a CSV
// dataset), certificate (convexity lower bounds per kappa).  Results go to
// CSV files plus a meta.json sidecar with the resolved configuration; with a
// fixed seed every output file is byte-identical across runs.

#include <CLI11.hpp>
#include <json.hpp>
#include <qhuber/qhuber.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CliError {
  int code;
  std::string message;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void require_ok(qh_status st, const std::string& what) {
  if (st != QH_OK) throw CliError{1, what + ": " + qh_last_error()};
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw CliError{1, "cannot write " + p.string()};
  return f;
}

std::vector<double> tau_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(0.0 < lo) || !(lo < hi) || !(hi < 1.0))
    throw CliError{1, "invalid tau grid"};
  std::vector<double> grid;
  const double slack = step * 1e-9;
  for (size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + slack) break;
    grid.push_back(v);
  }
  if (grid.empty() || grid.back() < hi - slack) grid.push_back(hi);
  return grid;
}

double param_mse(const std::vector<double>& x, const std::vector<double>& ref) {
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += (x[j] - ref[j]) * (x[j] - ref[j]);
  return s / static_cast<double>(x.size());
}

void write_meta(const fs::path& dir, const std::string& command,
                const json& config, long long failures) {
  json meta;
  meta["command"] = command;
  meta["config"] = config;
  meta["config_hash"] = hex64(fnv1a64(config.dump()));
  meta["failures"] = failures;
  meta["library_version"] = qh_version();
  auto f = open_out(dir / "meta.json");
  f << meta.dump(2) << "\n";
}

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream f(path);
  if (!f) throw CliError{1, "cannot read config " + path};
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw CliError{1, std::string("config parse error: ") + e.what()};
  }
  if (!cfg.is_object()) throw CliError{1, "config must be a JSON object"};
  for (const auto& item : cfg.items())
    if (!allowed.count(item.key()))
      throw CliError{1, "unknown config key: " + item.key()};
  return cfg;
}

template <typename T>
void from_config(const json& cfg, const char* key, T& var) {
  if (!cfg.contains(key)) return;
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw CliError{1, std::string("config key has the wrong type: ") + key};
  }
}

/* ---------- demo ---------- */

struct DemoOpts {
  uint64_t seed = 42;
  std::string out = "out";
  int reps = 100;
  double kappa = 1.0;
  size_t n = 100;
  double sigma = 2.5;
  std::vector<double> x_true{2.0, 5.0};
  std::vector<double> pos_fractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.0};
  long long max_failures = 0;
};

json demo_config(const DemoOpts& o) {
  json c;
  c["seed"] = o.seed;
  c["out"] = o.out;
  c["reps"] = o.reps;
  c["kappa"] = o.kappa;
  c["n"] = o.n;
  c["sigma"] = o.sigma;
  c["x-true"] = o.x_true;
  c["pos-fractions"] = o.pos_fractions;
  c["max-failures"] = o.max_failures;
  return c;
}

long long run_demo(const DemoOpts& o) {
  if (o.reps < 1) throw CliError{1, "reps must be >= 1"};
  if (o.x_true.empty()) throw CliError{1, "x-true must be nonempty"};
  if (o.pos_fractions.empty()) throw CliError{1, "pos-fractions must be nonempty"};
  const size_t p = o.x_true.size();
  if (o.n < p) throw CliError{1, "n must be >= the length of x-true"};
  fs::create_directories(o.out);
  auto reps_csv = open_out(fs::path(o.out) / "demo_reps.csv");
  reps_csv << "rep,pos_fraction,mse_ls,mse_proposed,tau,converged\n";
  auto table_csv = open_out(fs::path(o.out) / "demo_table.csv");
  table_csv << "pos_fraction,mse_least_squares,mse_proposed,mean_tau\n";

  qh_solver_config scfg = qh_solver_config_default();
  scfg.kappa = o.kappa;
  long long failures = 0;
  std::vector<double> design(o.n * p), response(o.n), x_ls(p), x_joint(p);
  for (size_t row = 0; row < o.pos_fractions.size(); ++row) {
    const double pf = o.pos_fractions[row];
    double sum_ls = 0.0, sum_prop = 0.0, sum_tau = 0.0;
    long long kept = 0;
    for (int rep = 0; rep < o.reps; ++rep) {
      const uint64_t stream =
          row * static_cast<uint64_t>(o.reps) + static_cast<uint64_t>(rep);
      require_ok(qh_gen_linear_demo(o.seed, stream, o.n, p, o.x_true.data(),
                                    o.sigma, pf, design.data(), response.data()),
                 "gen_linear_demo");
      bool ok = true;
      double mse_ls = kNan, mse_prop = kNan, tau = kNan;
      if (qh_least_squares(design.data(), o.n, p, response.data(),
                           x_ls.data()) == QH_OK)
        mse_ls = param_mse(x_ls, o.x_true);
      else
        ok = false;
      qh_solve_info info;
      const qh_status st = qh_solve_joint(design.data(), o.n, p, response.data(),
                                          &scfg, x_joint.data(), &info);
      if (st == QH_OK || st == QH_ERR_CONVERGENCE) {
        mse_prop = param_mse(x_joint, o.x_true);
        tau = info.tau;
      }
      if (st != QH_OK || !info.converged) ok = false;
      if (ok) {
        sum_ls += mse_ls;
        sum_prop += mse_prop;
        sum_tau += tau;
        ++kept;
      } else {
        ++failures;
      }
      reps_csv << rep << ',' << fmt17(pf) << ',' << fmt17(mse_ls) << ','
               << fmt17(mse_prop) << ',' << fmt17(tau) << ',' << (ok ? 1 : 0)
               << "\n";
    }
    const double m_ls = kept ? sum_ls / static_cast<double>(kept) : kNan;
    const double m_prop = kept ? sum_prop / static_cast<double>(kept) : kNan;
    const double m_tau = kept ? sum_tau / static_cast<double>(kept) : kNan;
    table_csv << fmt17(pf) << ',' << fmt17(m_ls) << ',' << fmt17(m_prop) << ','
              << fmt17(m_tau) << "\n";
    std::printf("pos_fraction %.2f: mse_ls %.4f  mse_proposed %.4f  mean_tau %.4f  (%lld/%d reps kept)\n",
                pf, m_ls, m_prop, m_tau, kept, o.reps);
  }
  return failures;
}

/* ---------- gridscan ---------- */

struct GridscanOpts {
  uint64_t seed = 42;
  std::string out = "out";
  std::string mode = "both";
  double kappa = 1.0;
  double tau_lo = 0.01;
  double tau_hi = 0.99;
  double tau_step = 0.01;
  size_t n = 1000;
  double residual_scale = 1.0;
  std::vector<double> residual_pos_fractions{0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> fit_pos_fractions{1.0, 0.8, 0.6, 0.4, 0.2, 0.0};
  double sigma = 2.5;
  int reps = 100;
  size_t fit_n = 100;
  std::vector<double> x_true{2.0, 5.0};
  long long max_failures = 0;
};

json gridscan_config(const GridscanOpts& o) {
  json c;
  c["seed"] = o.seed;
  c["out"] = o.out;
  c["mode"] = o.mode;
  c["kappa"] = o.kappa;
  c["tau-lo"] = o.tau_lo;
  c["tau-hi"] = o.tau_hi;
  c["tau-step"] = o.tau_step;
  c["n"] = o.n;
  c["residual-scale"] = o.residual_scale;
  c["residual-pos-fractions"] = o.residual_pos_fractions;
  c["fit-pos-fractions"] = o.fit_pos_fractions;
  c["sigma"] = o.sigma;
  c["reps"] = o.reps;
  c["fit-n"] = o.fit_n;
  c["x-true"] = o.x_true;
  c["max-failures"] = o.max_failures;
  return c;
}

long long run_gridscan(const GridscanOpts& o) {
  const bool do_residual = o.mode == "residual" || o.mode == "both";
  const bool do_fit = o.mode == "fit" || o.mode == "both";
  if (!do_residual && !do_fit)
    throw CliError{1, "mode must be residual, fit, or both"};
  if (o.reps < 1) throw CliError{1, "reps must be >= 1"};
  const std::vector<double> grid = tau_grid(o.tau_lo, o.tau_hi, o.tau_step);
  fs::create_directories(o.out);
  auto argmin_csv = open_out(fs::path(o.out) / "gridscan_argmin.csv");
  argmin_csv << "mode,pos_fraction,tau_argmin,value\n";
  long long failures = 0;

  if (do_residual) {
    auto curves = open_out(fs::path(o.out) / "gridscan_residual_curves.csv");
    curves << "pos_fraction,tau,unnormalized_loss,normalized_loss\n";
    std::vector<double> r(o.n);
    for (size_t row = 0; row < o.residual_pos_fractions.size(); ++row) {
      const double pf = o.residual_pos_fractions[row];
      require_ok(qh_sample_sign_mixed_laplace(o.seed, 5000 + row, o.n,
                                              o.residual_scale, pf, r.data()),
                 "sample residuals");
      double best = std::numeric_limits<double>::infinity();
      double best_tau = grid.front();
      for (double t : grid) {
        double raw, d1, d2, normed;
        require_ok(qh_total_loss(r.data(), o.n, t, o.kappa, &raw, &d1, &d2),
                   "total loss");
        require_ok(
            qh_normalized_loss(r.data(), o.n, t, o.kappa, &normed, &d1, &d2),
            "normalized loss");
        curves << fmt17(pf) << ',' << fmt17(t) << ',' << fmt17(raw) << ','
               << fmt17(normed) << "\n";
        if (normed < best) {
          best = normed;
          best_tau = t;
        }
      }
      argmin_csv << "residual," << fmt17(pf) << ',' << fmt17(best_tau) << ','
                 << fmt17(best) << "\n";
      std::printf("residual pos_fraction %.2f: argmin tau %.3f\n", pf, best_tau);
    }
  }

  if (do_fit) {
    auto curves = open_out(fs::path(o.out) / "gridscan_fit_curves.csv");
    curves << "pos_fraction,tau,mean_normalized_penalty\n";
    const size_t p = o.x_true.size();
    if (o.fit_n < p) throw CliError{1, "fit-n must be >= the length of x-true"};
    qh_solver_config scfg = qh_solver_config_default();
    scfg.kappa = o.kappa;
    std::vector<double> design(o.fit_n * p), response(o.fit_n), x(p);
    for (size_t row = 0; row < o.fit_pos_fractions.size(); ++row) {
      const double pf = o.fit_pos_fractions[row];
      std::vector<double> sum(grid.size(), 0.0);
      std::vector<long long> kept(grid.size(), 0);
      for (int rep = 0; rep < o.reps; ++rep) {
        const uint64_t stream =
            row * static_cast<uint64_t>(o.reps) + static_cast<uint64_t>(rep);
        require_ok(qh_gen_linear_demo(o.seed, stream, o.fit_n, p,
                                      o.x_true.data(), o.sigma, pf,
                                      design.data(), response.data()),
                   "gen_linear_demo");
        for (size_t k = 0; k < grid.size(); ++k) {
          qh_solve_info info;
          const qh_status st =
              qh_solve_fixed_tau(design.data(), o.fit_n, p, response.data(),
                                 grid[k], &scfg, x.data(), &info);
          if (st == QH_OK && info.converged) {
            sum[k] += info.objective;
            ++kept[k];
          } else {
            ++failures;
          }
        }
      }
      double best = std::numeric_limits<double>::infinity();
      double best_tau = grid.front();
      for (size_t k = 0; k < grid.size(); ++k) {
        const double m = kept[k] ? sum[k] / static_cast<double>(kept[k]) : kNan;
        curves << fmt17(pf) << ',' << fmt17(grid[k]) << ',' << fmt17(m) << "\n";
        if (kept[k] && m < best) {
          best = m;
          best_tau = grid[k];
        }
      }
      argmin_csv << "fit," << fmt17(pf) << ',' << fmt17(best_tau) << ','
                 << fmt17(best) << "\n";
      std::printf("fit pos_fraction %.2f: argmin tau %.3f\n", pf, best_tau);
    }
  }
  return failures;
}

/* ---------- gbm ---------- */

struct GbmOpts {
  uint64_t seed = 42;
  std::string out = "out";
  std::string data;
  double sigma = 0.0;
  double pos_fraction = 0.5;
  int stages = 200;
  double kappa = 0.05;
  int depth = 3;
  size_t min_leaf = 5;
  int runs = 10;
  double train_fraction = 0.75;
  long long max_failures = 0;
};

json gbm_config(const GbmOpts& o) {
  json c;
  c["seed"] = o.seed;
  c["out"] = o.out;
  c["data"] = o.data;
  c["sigma"] = o.sigma;
  c["pos-fraction"] = o.pos_fraction;
  c["stages"] = o.stages;
  c["kappa"] = o.kappa;
  c["depth"] = o.depth;
  c["min-leaf"] = o.min_leaf;
  c["runs"] = o.runs;
  c["train-fraction"] = o.train_fraction;
  c["max-failures"] = o.max_failures;
  return c;
}

double model_mse(const qh_gbm_model* model, const qh_dataset* ds) {
  const size_t rows = qh_dataset_rows(ds);
  const size_t cols = qh_dataset_cols(ds);
  std::vector<double> features(rows * cols), response(rows), pred(rows);
  require_ok(qh_dataset_features(ds, features.data()), "dataset features");
  require_ok(qh_dataset_response(ds, response.data()), "dataset response");
  require_ok(qh_gbm_predict(model, features.data(), rows, cols, pred.data()),
             "predict");
  double s = 0.0;
  for (size_t i = 0; i < rows; ++i)
    s += (pred[i] - response[i]) * (pred[i] - response[i]);
  return s / static_cast<double>(rows);
}

long long run_gbm(const GbmOpts& o) {
  if (o.runs < 1) throw CliError{1, "runs must be >= 1"};
  fs::create_directories(o.out);
  qh_dataset* raw = nullptr;
  require_ok(qh_dataset_load_csv(o.data.c_str(), &raw), "load " + o.data);
  qh_dataset* scaled = nullptr;
  const qh_status sc = qh_dataset_rescale(raw, &scaled, nullptr, nullptr);
  qh_dataset_free(raw);
  require_ok(sc, "rescale");
  const size_t rows = qh_dataset_rows(scaled);
  const size_t cols = qh_dataset_cols(scaled);
  std::vector<double> features(rows * cols), response(rows), noise(rows),
      noisy(rows);
  require_ok(qh_dataset_features(scaled, features.data()), "dataset features");
  require_ok(qh_dataset_response(scaled, response.data()), "dataset response");
  qh_dataset_free(scaled);

  auto runs_csv = open_out(fs::path(o.out) / "gbm_runs.csv");
  runs_csv << "run,n_train,n_validation,stages_completed,validation_mse,train_mse\n";
  auto traj_csv = open_out(fs::path(o.out) / "gbm_tau_trajectory.csv");
  traj_csv << "run,stage,tau,beta,train_loss\n";

  qh_gbm_config gcfg = qh_gbm_config_default();
  gcfg.n_stages = o.stages;
  gcfg.max_depth = o.depth;
  gcfg.min_leaf = o.min_leaf;
  gcfg.kappa = o.kappa;

  long long failures = 0;
  std::vector<double> val_mses, train_mses;
  for (int r = 0; r < o.runs; ++r) {
    require_ok(qh_sample_sign_mixed_laplace(o.seed, 1000 + static_cast<uint64_t>(r),
                                            rows, o.sigma, o.pos_fraction,
                                            noise.data()),
               "sample noise");
    for (size_t i = 0; i < rows; ++i) noisy[i] = response[i] + noise[i];
    qh_dataset* full = nullptr;
    require_ok(qh_dataset_create(features.data(), rows, cols, noisy.data(), &full),
               "dataset");
    qh_dataset* train = nullptr;
    qh_dataset* valid = nullptr;
    const qh_status sp = qh_dataset_split(full, o.train_fraction, o.seed,
                                          2000 + static_cast<uint64_t>(r),
                                          &train, &valid);
    qh_dataset_free(full);
    require_ok(sp, "split");
    int completed = 0;
    qh_gbm_model* model = nullptr;
    require_ok(qh_gbm_fit(train, &gcfg, &model, &completed), "gbm fit");
    if (!completed)
      std::fprintf(stderr, "run %d stopped early: %s\n", r, qh_last_error());

    const double tmse = model_mse(model, train);
    const double vmse = model_mse(model, valid);
    const size_t done = qh_gbm_num_stages(model);
    runs_csv << r << ',' << qh_dataset_rows(train) << ','
             << qh_dataset_rows(valid) << ',' << done << ',' << fmt17(vmse)
             << ',' << fmt17(tmse) << "\n";
    for (size_t s = 0; s < done; ++s) {
      double beta, tau, loss;
      require_ok(qh_gbm_stage_info(model, s, &beta, &tau, &loss), "stage info");
      traj_csv << r << ',' << s << ',' << fmt17(tau) << ',' << fmt17(beta)
               << ',' << fmt17(loss) << "\n";
    }
    if (completed) {
      val_mses.push_back(vmse);
      train_mses.push_back(tmse);
    } else {
      ++failures;
    }
    std::printf("run %d: %zu stages, validation mse %.4f, train mse %.4f\n", r,
                done, vmse, tmse);
    qh_gbm_free(model);
    qh_dataset_free(train);
    qh_dataset_free(valid);
  }

  const auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return kNan;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto std_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  auto summary_csv = open_out(fs::path(o.out) / "gbm_summary.csv");
  summary_csv << "mean_validation_mse,std_validation_mse,mean_train_mse,std_train_mse,runs\n";
  summary_csv << fmt17(mean_of(val_mses)) << ',' << fmt17(std_of(val_mses))
              << ',' << fmt17(mean_of(train_mses)) << ','
              << fmt17(std_of(train_mses)) << ',' << val_mses.size() << "\n";
  std::printf("mean validation mse %.4f over %zu completed runs\n",
              mean_of(val_mses), val_mses.size());
  return failures;
}

/* ---------- certificate ---------- */

struct CertOpts {
  std::string out = "out";
  std::vector<double> kappas{0.0, 0.25, 0.5, 0.75, 1.0};
  double tau_lo = 0.01;
  double tau_hi = 0.99;
  double tau_step = 0.001;
};

json cert_config(const CertOpts& o) {
  json c;
  c["out"] = o.out;
  c["kappas"] = o.kappas;
  c["tau-lo"] = o.tau_lo;
  c["tau-hi"] = o.tau_hi;
  c["tau-step"] = o.tau_step;
  return c;
}

long long run_certificate(const CertOpts& o) {
  if (o.kappas.empty()) throw CliError{1, "kappas must be nonempty"};
  fs::create_directories(o.out);
  auto csv = open_out(fs::path(o.out) / "certificate.csv");
  csv << "kappa,min_second_partial,convex\n";
  for (double k : o.kappas) {
    double v = 0.0;
    require_ok(qh_convexity_certificate(k, o.tau_lo, o.tau_hi, o.tau_step, &v),
               "certificate");
    csv << fmt17(k) << ',' << fmt17(v) << ',' << (v > 0.0 ? 1 : 0) << "\n";
    std::printf("kappa %.3f: min second partial %.6f -> %s\n", k, v,
                v > 0.0 ? "convex" : "not convex");
  }
  return 0;
}

/* ---------- wiring ---------- */

std::set<std::string> allowed_keys(const std::string& sub) {
  if (sub == "demo")
    return {"seed", "out", "reps", "kappa", "n", "sigma", "x-true",
            "pos-fractions", "max-failures"};
  if (sub == "gridscan")
    return {"seed", "out", "mode", "kappa", "tau-lo", "tau-hi", "tau-step",
            "n", "residual-scale", "residual-pos-fractions",
            "fit-pos-fractions", "sigma", "reps", "fit-n", "x-true",
            "max-failures"};
  if (sub == "gbm")
    return {"seed", "out", "data", "sigma", "pos-fraction", "stages", "kappa",
            "depth", "min-leaf", "runs", "train-fraction", "max-failures"};
  return {"out", "kappas", "tau-lo", "tau-hi", "tau-step"};
}

int dispatch(int argc, char** argv) {
  std::string config_path;
  std::string sub;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    if (sub.empty() && (a == "demo" || a == "gridscan" || a == "gbm" ||
                        a == "certificate"))
      sub = a;
  }
  json cfg = json::object();
  if (!config_path.empty()) {
    if (sub.empty()) throw CliError{1, "--config requires a subcommand"};
    cfg = load_config(config_path, allowed_keys(sub));
  }

  DemoOpts d;
  GridscanOpts g;
  GbmOpts b;
  CertOpts c;
  if (sub == "demo") {
    from_config(cfg, "seed", d.seed);
    from_config(cfg, "out", d.out);
    from_config(cfg, "reps", d.reps);
    from_config(cfg, "kappa", d.kappa);
    from_config(cfg, "n", d.n);
    from_config(cfg, "sigma", d.sigma);
    from_config(cfg, "x-true", d.x_true);
    from_config(cfg, "pos-fractions", d.pos_fractions);
    from_config(cfg, "max-failures", d.max_failures);
  } else if (sub == "gridscan") {
    from_config(cfg, "seed", g.seed);
    from_config(cfg, "out", g.out);
    from_config(cfg, "mode", g.mode);
    from_config(cfg, "kappa", g.kappa);
    from_config(cfg, "tau-lo", g.tau_lo);
    from_config(cfg, "tau-hi", g.tau_hi);
    from_config(cfg, "tau-step", g.tau_step);
    from_config(cfg, "n", g.n);
    from_config(cfg, "residual-scale", g.residual_scale);
    from_config(cfg, "residual-pos-fractions", g.residual_pos_fractions);
    from_config(cfg, "fit-pos-fractions", g.fit_pos_fractions);
    from_config(cfg, "sigma", g.sigma);
    from_config(cfg, "reps", g.reps);
    from_config(cfg, "fit-n", g.fit_n);
    from_config(cfg, "x-true", g.x_true);
    from_config(cfg, "max-failures", g.max_failures);
  } else if (sub == "gbm") {
    from_config(cfg, "seed", b.seed);
    from_config(cfg, "out", b.out);
    from_config(cfg, "data", b.data);
    from_config(cfg, "sigma", b.sigma);
    from_config(cfg, "pos-fraction", b.pos_fraction);
    from_config(cfg, "stages", b.stages);
    from_config(cfg, "kappa", b.kappa);
    from_config(cfg, "depth", b.depth);
    from_config(cfg, "min-leaf", b.min_leaf);
    from_config(cfg, "runs", b.runs);
    from_config(cfg, "train-fraction", b.train_fraction);
    from_config(cfg, "max-failures", b.max_failures);
  } else if (sub == "certificate") {
    from_config(cfg, "out", c.out);
    from_config(cfg, "kappas", c.kappas);
    from_config(cfg, "tau-lo", c.tau_lo);
    from_config(cfg, "tau-hi", c.tau_hi);
    from_config(cfg, "tau-step", c.tau_step);
  }

  CLI::App app{"quantile Huber regression experiments"};
  app.require_subcommand(1);
  std::string config_flag;
  app.add_option("--config", config_flag, "JSON config file (flags override)");

  CLI::App* demo = app.add_subcommand(
      "demo", "joint inference vs least squares on synthetic linear data");
  demo->add_option("--config", config_flag, "JSON config file");
  demo->add_option("--seed", d.seed, "RNG seed");
  demo->add_option("--out", d.out, "output directory");
  demo->add_option("--reps", d.reps, "repetitions per noise mix");
  demo->add_option("--kappa", d.kappa, "smoothing width");
  demo->add_option("--n", d.n, "samples per repetition");
  demo->add_option("--sigma", d.sigma, "Laplace noise scale");
  demo->add_option("--x-true", d.x_true, "true coefficients")->delimiter(',');
  demo->add_option("--pos-fractions", d.pos_fractions,
                   "positive-noise fractions")->delimiter(',');
  demo->add_option("--max-failures", d.max_failures,
                   "tolerated solver failures");

  CLI::App* gridscan =
      app.add_subcommand("gridscan", "loss curves over a tau grid");
  gridscan->add_option("--config", config_flag, "JSON config file");
  gridscan->add_option("--seed", g.seed, "RNG seed");
  gridscan->add_option("--out", g.out, "output directory");
  gridscan->add_option("--mode", g.mode, "residual, fit, or both");
  gridscan->add_option("--kappa", g.kappa, "smoothing width");
  gridscan->add_option("--tau-lo", g.tau_lo, "grid start");
  gridscan->add_option("--tau-hi", g.tau_hi, "grid end");
  gridscan->add_option("--tau-step", g.tau_step, "grid step");
  gridscan->add_option("--n", g.n, "residual draw size");
  gridscan->add_option("--residual-scale", g.residual_scale,
                       "residual Laplace scale");
  gridscan->add_option("--residual-pos-fractions", g.residual_pos_fractions,
                       "noise mixes for residual curves")->delimiter(',');
  gridscan->add_option("--fit-pos-fractions", g.fit_pos_fractions,
                       "noise mixes for fit curves")->delimiter(',');
  gridscan->add_option("--sigma", g.sigma, "fit-mode noise scale");
  gridscan->add_option("--reps", g.reps, "fit-mode repetitions");
  gridscan->add_option("--fit-n", g.fit_n, "fit-mode samples per repetition");
  gridscan->add_option("--x-true", g.x_true, "fit-mode true coefficients")
      ->delimiter(',');
  gridscan->add_option("--max-failures", g.max_failures,
                       "tolerated solver failures");

  CLI::App* gbm = app.add_subcommand("gbm", "boosted trees on a CSV dataset");
  gbm->add_option("--config", config_flag, "JSON config file");
  gbm->add_option("--seed", b.seed, "RNG seed");
  gbm->add_option("--out", b.out, "output directory");
  gbm->add_option("--data", b.data, "CSV dataset, last column is the response");
  gbm->add_option("--sigma", b.sigma, "injected Laplace noise scale");
  gbm->add_option("--pos-fraction", b.pos_fraction,
                  "positive fraction of injected noise");
  gbm->add_option("--stages", b.stages, "boosting stages");
  gbm->add_option("--kappa", b.kappa, "smoothing width");
  gbm->add_option("--depth", b.depth, "tree depth");
  gbm->add_option("--min-leaf", b.min_leaf, "minimum samples per leaf");
  gbm->add_option("--runs", b.runs, "independent runs");
  gbm->add_option("--train-fraction", b.train_fraction, "train split fraction");
  gbm->add_option("--max-failures", b.max_failures, "tolerated failed runs");

  CLI::App* cert =
      app.add_subcommand("certificate", "convexity lower bounds per kappa");
  cert->add_option("--config", config_flag, "JSON config file");
  cert->add_option("--out", c.out, "output directory");
  cert->add_option("--kappas", c.kappas, "kappa values")->delimiter(',');
  cert->add_option("--tau-lo", c.tau_lo, "grid start");
  cert->add_option("--tau-hi", c.tau_hi, "grid end");
  cert->add_option("--tau-step", c.tau_step, "grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  // gbm needs a dataset; checked here so --help works without one
  if (gbm->parsed() && b.data.empty())
    throw CliError{1, "gbm requires --data (or the data config key)"};

  const auto t0 = std::chrono::steady_clock::now();
  long long failures = 0;
  long long budget = 0;
  if (demo->parsed()) {
    failures = run_demo(d);
    write_meta(d.out, "demo", demo_config(d), failures);
    budget = d.max_failures;
  } else if (gridscan->parsed()) {
    failures = run_gridscan(g);
    write_meta(g.out, "gridscan", gridscan_config(g), failures);
    budget = g.max_failures;
  } else if (gbm->parsed()) {
    failures = run_gbm(b);
    write_meta(b.out, "gbm", gbm_config(b), failures);
    budget = b.max_failures;
  } else if (cert->parsed()) {
    failures = run_certificate(c);
    write_meta(c.out, "certificate", cert_config(c), failures);
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - t0;
  std::printf("elapsed_seconds: %.3f\n", elapsed.count());

  if (failures > budget) {
    std::fprintf(stderr, "%lld solver failures exceed the budget of %lld\n",
                 failures, budget);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
