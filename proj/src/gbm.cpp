#include "gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"
#include "tau_inference.hpp"

namespace qhuber {

using nlohmann::json;

double RegressionTree::predict_row(std::span<const double> x) const {
  if (nodes.empty()) throw std::domain_error("empty tree");
  int id = 0;
  while (nodes[id].feature >= 0) {
    const TreeNode& nd = nodes[id];
    if (static_cast<std::size_t>(nd.feature) >= x.size())
      throw std::domain_error("tree references a missing feature");
    id = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[id].value;
}

std::vector<double> RegressionTree::predict(const Matrix& x) const {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_row(x.row(i));
  return out;
}

namespace {

struct TreeBuilder {
  const Matrix& x;
  std::span<const double> targets;
  int max_depth;
  std::size_t min_leaf;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t>& idx, int depth) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : idx) {
      sum += targets[i];
      sq += targets[i] * targets[i];
    }
    const double count = static_cast<double>(idx.size());
    const double mean = sum / count;
    const double sse_parent = sq - sum * sum / count;

    const int id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, mean});
    if (depth >= max_depth || idx.size() < 2 * min_leaf || sse_parent <= 0.0)
      return id;

    double best_sse = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, std::size_t>> order(idx.size());
    for (std::size_t j = 0; j < x.cols; ++j) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        order[k] = {x(idx[k], j), idx[k]};
      std::sort(order.begin(), order.end());
      double lsum = 0.0, lsq = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const double t = targets[order[k].second];
        lsum += t;
        lsq += t * t;
        if (k + 1 < min_leaf) continue;
        if (order.size() - (k + 1) < min_leaf) break;
        if (order[k].first == order[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = count - nl;
        const double rsum = sum - lsum;
        const double rsq = sq - lsq;
        const double sse =
            (lsq - lsum * lsum / nl) + (rsq - rsum * rsum / nr);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = static_cast<int>(j);
          best_threshold = 0.5 * (order[k].first + order[k + 1].first);
        }
      }
    }
    if (best_feature < 0 || !(best_sse < sse_parent)) return id;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    const int left_id = build(left_idx, depth + 1);
    const int right_id = build(right_idx, depth + 1);
    nodes[id] = TreeNode{best_feature, best_threshold, left_id, right_id, mean};
    return id;
  }
};

}  // namespace

RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        int max_depth, std::size_t min_leaf) {
  if (x.rows == 0 || x.cols == 0) throw std::domain_error("empty design");
  if (targets.size() != x.rows)
    throw std::domain_error("target length does not match rows");
  if (max_depth < 0) throw std::domain_error("max_depth must be >= 0");
  if (min_leaf < 1) throw std::domain_error("min_leaf must be >= 1");
  for (double t : targets)
    if (!std::isfinite(t)) throw std::domain_error("target not finite");

  TreeBuilder builder{x, targets, max_depth, min_leaf, {}};
  std::vector<std::size_t> idx(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) idx[i] = i;
  builder.build(idx, 0);
  RegressionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

std::vector<double> negative_gradient(std::span<const double> y,
                                      std::span<const double> f,
                                      const LossParams& p) {
  if (y.empty() || y.size() != f.size())
    throw std::domain_error("y and f must be nonempty and equal length");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = quantile_huber_dr(y[i] - f[i], p);
  return out;
}

static void validate_gbm_config(const GbmConfig& cfg) {
  if (cfg.n_stages < 1) throw std::domain_error("n_stages must be >= 1");
  if (cfg.max_depth < 1) throw std::domain_error("max_depth must be >= 1");
  if (cfg.min_leaf < 1) throw std::domain_error("min_leaf must be >= 1");
  if (!std::isfinite(cfg.kappa) || cfg.kappa <= 0.0)
    throw std::domain_error("gbm kappa must be > 0");
  if (!std::isfinite(cfg.tau0) || cfg.tau0 <= 0.0 || cfg.tau0 >= 1.0)
    throw std::domain_error("tau0 must lie strictly inside (0, 1)");
  if (!std::isfinite(cfg.beta_cap) || cfg.beta_cap <= 0.0)
    throw std::domain_error("beta_cap must be > 0");
}

GbmStage fit_stage(std::span<const double> y, std::span<const double> f_prev,
                   const RegressionTree& tree, const Matrix& x,
                   const GbmConfig& cfg) {
  validate_gbm_config(cfg);
  if (y.size() != f_prev.size() || y.size() != x.rows)
    throw std::domain_error("stage input sizes disagree");

  AffineModel m;
  m.design = Matrix(x.rows, 1);
  const std::vector<double> psi = tree.predict(x);
  for (std::size_t i = 0; i < x.rows; ++i) m.design(i, 0) = psi[i];
  m.response.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    m.response[i] = y[i] - f_prev[i];

  SolverConfig sc = cfg.solver;
  sc.kappa = cfg.kappa;
  const JointSolution sol = solve_joint(m, sc);
  if (!sol.converged)
    throw ConvergenceError("stage coefficient solve did not converge");

  GbmStage stage;
  stage.tree = tree;
  stage.beta = sol.x[0];
  stage.tau = sol.tau;
  stage.train_loss = sol.objective;
  if (std::fabs(stage.beta) > cfg.beta_cap) {
    stage.beta = stage.beta > 0.0 ? cfg.beta_cap : -cfg.beta_cap;
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      r[i] = m.response[i] - stage.beta * psi[i];
    const TauSolveResult ts = solve_tau(r, cfg.kappa, sc.tau_cfg);
    if (!ts.converged)
      throw ConvergenceError("tau solve after coefficient clamp failed");
    stage.tau = ts.tau;
    stage.train_loss = ts.value;
  }
  return stage;
}

static double median(std::span<const double> y) {
  std::vector<double> v(y.begin(), y.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GbmModel fit_gbm(const Matrix& x, std::span<const double> y,
                 const GbmConfig& cfg, FitReport* report) {
  validate_gbm_config(cfg);
  if (x.rows == 0 || x.cols == 0) throw std::domain_error("empty design");
  if (y.size() != x.rows)
    throw std::domain_error("response length does not match rows");
  for (double v : x.data)
    if (!std::isfinite(v)) throw std::domain_error("design entry not finite");
  for (double v : y)
    if (!std::isfinite(v)) throw std::domain_error("response entry not finite");

  GbmModel model;
  model.intercept = median(y);
  model.n_features = x.cols;
  model.kappa = cfg.kappa;

  if (report) {
    report->completed = true;
    report->stages_requested = cfg.n_stages;
    report->message.clear();
  }

  std::vector<double> f(y.size(), model.intercept);
  double tau_prev = cfg.tau0;
  for (int j = 0; j < cfg.n_stages; ++j) {
    const std::vector<double> targets =
        negative_gradient(y, f, {tau_prev, cfg.kappa});
    const RegressionTree tree = fit_tree(x, targets, cfg.max_depth, cfg.min_leaf);
    GbmStage stage;
    try {
      stage = fit_stage(y, f, tree, x, cfg);
    } catch (const ConvergenceError& e) {
      if (report) {
        report->completed = false;
        std::ostringstream msg;
        msg << "stage " << j + 1 << ": " << e.what();
        report->message = msg.str();
      }
      break;
    }
    const std::vector<double> psi = stage.tree.predict(x);
    for (std::size_t i = 0; i < y.size(); ++i) f[i] += stage.beta * psi[i];
    tau_prev = stage.tau;
    model.stages.push_back(std::move(stage));
  }
  return model;
}

double GbmModel::predict_row(std::span<const double> x) const {
  if (x.size() != n_features)
    throw std::domain_error("feature count does not match the trained model");
  double acc = intercept;
  for (const GbmStage& st : stages) acc += st.beta * st.tree.predict_row(x);
  return acc;
}

std::vector<double> GbmModel::predict(const Matrix& x) const {
  if (x.cols != n_features)
    throw std::domain_error("feature count does not match the trained model");
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_row(x.row(i));
  return out;
}

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, int id) {
  const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
  if (nd.feature < 0) return json{{"value", nd.value}};
  return json{{"feature", nd.feature},
              {"threshold", nd.threshold},
              {"left", node_to_json(nodes, nd.left)},
              {"right", node_to_json(nodes, nd.right)}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.push_back(TreeNode{});
  if (j.contains("feature")) {
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    if (feature < 0) throw ParseError("tree node has negative feature index");
    const int left = node_from_json(j.at("left"), nodes);
    const int right = node_from_json(j.at("right"), nodes);
    nodes[static_cast<std::size_t>(id)] =
        TreeNode{feature, threshold, left, right, 0.0};
  } else {
    nodes[static_cast<std::size_t>(id)].value = j.at("value").get<double>();
  }
  return id;
}

}  // namespace

std::string gbm_to_json(const GbmModel& model) {
  json stages = json::array();
  for (const GbmStage& st : model.stages) {
    stages.push_back(json{{"beta", st.beta},
                          {"tau", st.tau},
                          {"train_loss", st.train_loss},
                          {"tree", node_to_json(st.tree.nodes, 0)}});
  }
  const json root{{"format", "qhuber-gbm"},
                  {"version", 1},
                  {"intercept", model.intercept},
                  {"n_features", model.n_features},
                  {"kappa", model.kappa},
                  {"stages", stages}};
  return root.dump(2);
}

GbmModel gbm_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    if (root.value("format", std::string{}) != "qhuber-gbm")
      throw ParseError("not a qhuber-gbm model file");
    if (root.value("version", 0) != 1)
      throw ParseError("unsupported model version");
    GbmModel model;
    model.intercept = root.at("intercept").get<double>();
    model.n_features = root.at("n_features").get<std::size_t>();
    model.kappa = root.at("kappa").get<double>();
    for (const json& st : root.at("stages")) {
      GbmStage stage;
      stage.beta = st.at("beta").get<double>();
      stage.tau = st.at("tau").get<double>();
      stage.train_loss = st.at("train_loss").get<double>();
      node_from_json(st.at("tree"), stage.tree.nodes);
      model.stages.push_back(std::move(stage));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model parse failed: ") + e.what());
  }
}

void save_gbm(const GbmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << gbm_to_json(model) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

GbmModel load_gbm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return gbm_from_json(buf.str());
}

}  // namespace qhuber
