#include <kinprim/classifier.hpp>

#include <kinprim/error.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinprim {

namespace {

Eigen::MatrixXd stack_codes(std::span<const SparseCode> a, std::span<const SparseCode> b) {
  const std::size_t n = a.size() + b.size();
  const Eigen::Index K = a.empty() ? b.front().weights.size() : a.front().weights.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), K);
  Eigen::Index row = 0;
  for (auto part : {a, b}) {
    for (const auto& c : part) {
      if (c.weights.size() != K) throw ParameterError("code dimension mismatch in training set");
      x.row(row++) = c.weights.transpose();
    }
  }
  return x;
}

// Solves the regularized system for every right-hand side column, with one
// step of iterative refinement.
Eigen::MatrixXd solve_dual(const Eigen::MatrixXd& system, const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw Error("kernel RLS: regularized Gram matrix is not positive definite");
  Eigen::MatrixXd x = llt.solve(rhs);
  x += llt.solve(rhs - system * x);
  return x;
}

}  // namespace

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  double sigma) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& inputs, double sigma) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd g(n, n);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::exp(scale * (inputs.row(i) - inputs.row(j)).squaredNorm());
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

double BinaryRLS::score(const Eigen::Ref<const Eigen::VectorXd>& code) const {
  if (static_cast<std::size_t>(code.size()) != dimension())
    throw ParameterError("score: code length " + std::to_string(code.size()) + " != classifier dimension " +
                         std::to_string(dimension()));
  const double scale = -1.0 / (2.0 * sigma * sigma);
  double s = 0.0;
  for (Eigen::Index i = 0; i < inputs->rows(); ++i)
    s += alpha[i] * std::exp(scale * (inputs->row(i).transpose() - code).squaredNorm());
  return s;
}

BinaryRLS train_binary(std::span<const SparseCode> pos, std::span<const SparseCode> neg, double sigma, double lambda,
                       std::string action_label) {
  if (!(sigma > 0.0)) throw ParameterError("train_binary: sigma must be > 0");
  if (!(lambda > 0.0)) throw ParameterError("train_binary: lambda must be > 0");
  if (pos.empty() && neg.empty()) throw ParameterError("train_binary: empty training set");
  auto inputs = std::make_shared<const Eigen::MatrixXd>(stack_codes(pos, neg));
  const Eigen::Index n = inputs->rows();
  Eigen::VectorXd y(n);
  y.head(static_cast<Eigen::Index>(pos.size())).setOnes();
  y.tail(static_cast<Eigen::Index>(neg.size())).setConstant(-1.0);

  Eigen::MatrixXd system = rbf_gram(*inputs, sigma);
  system.diagonal().array() += lambda * static_cast<double>(n);
  BinaryRLS clf;
  clf.action_label = std::move(action_label);
  clf.inputs = inputs;
  clf.alpha = solve_dual(system, y);
  clf.sigma = sigma;
  clf.lambda = lambda;
  clf.dual_residual = (system * clf.alpha - y).norm();
  return clf;
}

double median_pairwise_distance(const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.rows();
  if (n < 2) return 0.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) d.push_back((inputs.row(i) - inputs.row(j)).norm());
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double m = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

const BinaryRLS& OneVsAllModel::at(const std::string& label) const {
  auto it = classifiers.find(label);
  if (it == classifiers.end()) throw ParameterError("model has no classifier for action '" + label + "'");
  return it->second;
}

std::size_t OneVsAllModel::dimension() const {
  return classifiers.empty() ? 0 : classifiers.begin()->second.dimension();
}

OneVsAllModel train_one_vs_all(const TrainingSet& dataset, const OneVsAllParams& params,
                               std::string dictionary_fingerprint) {
  if (dataset.size() < 2) throw ParameterError("train_one_vs_all: need at least 2 actions (one-vs-all has no negatives)");
  if (!(params.lambda > 0.0)) throw ParameterError("train_one_vs_all: lambda must be > 0");
  std::vector<SparseCode> codes;
  std::vector<std::size_t> owner;
  std::vector<std::string> labels;
  for (const auto& [label, reps] : dataset) {
    if (reps.empty()) throw ParameterError("train_one_vs_all: action '" + label + "' has no representations");
    const std::size_t before = codes.size();
    for (const auto& r : reps)
      for (const auto& c : r.codes) {
        codes.push_back(c);
        owner.push_back(labels.size());
      }
    if (codes.size() == before) throw ParameterError("train_one_vs_all: action '" + label + "' has no codes");
    labels.push_back(label);
  }
  auto inputs = std::make_shared<const Eigen::MatrixXd>(stack_codes(codes, {}));
  const Eigen::Index n = inputs->rows();

  double sigma = params.sigma.value_or(0.0);
  if (!params.sigma) {
    sigma = median_pairwise_distance(*inputs);
    if (!(sigma > 0.0)) throw InsufficientDataError("train_one_vs_all: all training codes coincide; cannot pick sigma");
  }
  if (!(sigma > 0.0)) throw ParameterError("train_one_vs_all: sigma must be > 0");

  Eigen::MatrixXd system = rbf_gram(*inputs, sigma);
  system.diagonal().array() += params.lambda * static_cast<double>(n);
  Eigen::MatrixXd y = -Eigen::MatrixXd::Ones(n, static_cast<Eigen::Index>(labels.size()));
  for (Eigen::Index i = 0; i < n; ++i) y(i, static_cast<Eigen::Index>(owner[static_cast<std::size_t>(i)])) = 1.0;
  const Eigen::MatrixXd alpha = solve_dual(system, y);

  OneVsAllModel model;
  model.labels = labels;
  model.dictionary_fingerprint = std::move(dictionary_fingerprint);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    BinaryRLS clf;
    clf.action_label = labels[k];
    clf.inputs = inputs;
    clf.alpha = alpha.col(static_cast<Eigen::Index>(k));
    clf.sigma = sigma;
    clf.lambda = params.lambda;
    clf.dual_residual = (system * clf.alpha - y.col(static_cast<Eigen::Index>(k))).norm();
    model.classifiers.emplace(labels[k], std::move(clf));
  }
  return model;
}

double select_lambda(const TrainingSet& train, const TrainingSet& validation, std::span<const double> grid,
                     std::optional<double> sigma) {
  if (grid.empty()) throw ParameterError("select_lambda: empty grid");
  double best_lambda = grid.front();
  double best_acc = -1.0;
  for (double lambda : grid) {
    const auto model = train_one_vs_all(train, {sigma, lambda});
    std::size_t hits = 0, total = 0;
    for (const auto& [label, reps] : validation) {
      for (const auto& r : reps) {
        for (const auto& c : r.codes) {
          std::string arg;
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& l : model.labels) {
            const double s = model.at(l).score(c);
            if (s > best) {
              best = s;
              arg = l;
            }
          }
          hits += arg == label;
          ++total;
        }
      }
    }
    const double acc = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    if (acc > best_acc || (acc == best_acc && lambda > best_lambda)) {
      best_acc = acc;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

// --- JSON -------------------------------------------------------------------
//
// The training inputs are shared by every classifier of a one-vs-all model and
// are stored once under "inputs".

nlohmann::json model_to_json(const OneVsAllModel& model) {
  nlohmann::json doc;
  doc["dictionary_fingerprint"] = model.dictionary_fingerprint;
  doc["labels"] = model.labels;
  if (model.classifiers.empty()) return doc;
  const auto& inputs = *model.classifiers.begin()->second.inputs;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(inputs.cols()));
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) r[static_cast<std::size_t>(j)] = inputs(i, j);
    rows.push_back(std::move(r));
  }
  doc["K"] = inputs.cols();
  doc["inputs"] = std::move(rows);
  auto clfs = nlohmann::json::array();
  for (const auto& label : model.labels) {
    const auto& c = model.at(label);
    if (c.inputs.get() != &inputs) throw Error("model_to_json: classifiers do not share training inputs");
    clfs.push_back({{"action", label},
                    {"sigma", c.sigma},
                    {"lambda", c.lambda},
                    {"alpha", std::vector<double>(c.alpha.data(), c.alpha.data() + c.alpha.size())}});
  }
  doc["classifiers"] = std::move(clfs);
  return doc;
}

OneVsAllModel model_from_json(const nlohmann::json& doc) {
  OneVsAllModel model;
  try {
    model.dictionary_fingerprint = doc.at("dictionary_fingerprint").get<std::string>();
    model.labels = doc.at("labels").get<std::vector<std::string>>();
    const auto K = doc.at("K").get<Eigen::Index>();
    const auto& rows = doc.at("inputs");
    auto inputs = std::make_shared<Eigen::MatrixXd>(static_cast<Eigen::Index>(rows.size()), K);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows[i].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(r.size()) != K) throw SchemaError("model: input row " + std::to_string(i) + " length != K");
      for (Eigen::Index j = 0; j < K; ++j) (*inputs)(static_cast<Eigen::Index>(i), j) = r[static_cast<std::size_t>(j)];
    }
    std::shared_ptr<const Eigen::MatrixXd> shared = inputs;
    for (const auto& c : doc.at("classifiers")) {
      BinaryRLS clf;
      clf.action_label = c.at("action").get<std::string>();
      clf.sigma = c.at("sigma").get<double>();
      clf.lambda = c.at("lambda").get<double>();
      const auto a = c.at("alpha").get<std::vector<double>>();
      if (a.size() != rows.size()) throw SchemaError("model: classifier '" + clf.action_label + "' alpha length != N");
      clf.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
      clf.inputs = shared;
      model.classifiers.emplace(clf.action_label, std::move(clf));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model bundle: ") + e.what());
  }
  for (const auto& l : model.labels)
    if (!model.classifiers.count(l)) throw SchemaError("model bundle: no classifier for label '" + l + "'");
  return model;
}

OneVsAllModel model_from_json(const nlohmann::json& doc, const Dictionary& dict) {
  auto model = model_from_json(doc);
  if (model.dictionary_fingerprint != dict.fingerprint)
    throw FingerprintError("model bundle was trained against dictionary " + model.dictionary_fingerprint +
                           ", but dictionary " + dict.fingerprint + " was supplied");
  if (model.dimension() != dict.K()) throw FingerprintError("model bundle dimension does not match dictionary K");
  return model;
}

}  // namespace kinprim
