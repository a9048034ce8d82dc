#pragma once

#include <kinprim/primitives.hpp>

#include <Eigen/Core>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

// Binary kernel regularized-least-squares classifier with an RBF kernel.
// The dual coefficients solve (G + lambda * N * I) alpha = y with
// y = +1 for positives and -1 for negatives.
struct BinaryRLS {
  std::string action_label;
  std::shared_ptr<const Eigen::MatrixXd> inputs;  // N x K, shared across a one-vs-all model
  Eigen::VectorXd alpha;
  double sigma = 1.0;
  double lambda = 1e-3;
  double dual_residual = 0.0;  // |(G + lambda N I) alpha - y|

  std::size_t dimension() const { return static_cast<std::size_t>(inputs->cols()); }

  // sum_i alpha_i exp(-|x_i - code|^2 / (2 sigma^2))
  double score(const Eigen::Ref<const Eigen::VectorXd>& code) const;
  double score(const SparseCode& code) const { return score(code.weights); }
};

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  double sigma);

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& inputs, double sigma);

BinaryRLS train_binary(std::span<const SparseCode> pos, std::span<const SparseCode> neg, double sigma,
                       double lambda, std::string action_label = "");

// Median Euclidean distance over all distinct pairs of rows.
double median_pairwise_distance(const Eigen::MatrixXd& inputs);

struct OneVsAllParams {
  std::optional<double> sigma;  // empty: median pairwise distance heuristic
  double lambda = 1e-3;
};

struct OneVsAllModel {
  std::vector<std::string> labels;  // sorted
  std::map<std::string, BinaryRLS> classifiers;
  std::string dictionary_fingerprint;

  const BinaryRLS& at(const std::string& label) const;
  std::size_t dimension() const;
};

using TrainingSet = std::map<std::string, std::vector<ActionRepresentation>>;

// One classifier per action: positives are that action's codes, negatives
// every other action's codes. All classifiers share the training inputs and
// a single factorization of the regularized Gram matrix.
OneVsAllModel train_one_vs_all(const TrainingSet& dataset, const OneVsAllParams& params,
                               std::string dictionary_fingerprint = "");

// Picks lambda from `grid` by per-code one-vs-all accuracy on `validation`
// (argmax over classifiers must equal the code's action). Ties keep the
// larger lambda.
double select_lambda(const TrainingSet& train, const TrainingSet& validation, std::span<const double> grid,
                     std::optional<double> sigma);

nlohmann::json model_to_json(const OneVsAllModel& model);
// Verifies the stored fingerprint against `dict` (throws FingerprintError).
OneVsAllModel model_from_json(const nlohmann::json& doc, const Dictionary& dict);
OneVsAllModel model_from_json(const nlohmann::json& doc);

}  // namespace kinprim
