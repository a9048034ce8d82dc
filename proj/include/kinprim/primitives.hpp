#pragma once

#include <kinprim/segmentation.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

// K learned velocity primitives, one atom per row (K x L).
struct Dictionary {
  Eigen::MatrixXd atoms;
  std::string fingerprint;

  std::size_t K() const { return static_cast<std::size_t>(atoms.rows()); }
  std::size_t L() const { return static_cast<std::size_t>(atoms.cols()); }

  // No all-zero atom, no duplicate atoms, all entries finite.
  void validate() const;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;           // K x D
  std::vector<std::size_t> assignment;  // per input row
  // Sum of squared distances to the assigned centroid, recorded after every
  // assignment step (initial seeding included). Non-increasing.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm with distance-weighted (k-means++) seeding. Points are
// rows. Empty clusters are re-seeded at the point farthest from its nearest
// centroid. Deterministic in (row order, K, seed).
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t K, std::uint64_t seed, std::size_t max_iters);

Dictionary learn_dictionary(std::span<const SubMovement> subs, std::size_t K, std::uint64_t seed,
                            std::size_t max_iters = 300);

struct SparseCode {
  Eigen::VectorXd weights;  // length K, zero outside the selected atoms
  std::size_t nnz = 0;
  double residual_norm = 0.0;
};

// Orthogonal matching pursuit with sparsity budget S. Atom selection uses the
// normalized correlation |<atom, residual>| / |atom|, lowest index on ties;
// coefficients of the selected atoms are refit by least squares after every
// selection. Stops at S atoms or once the residual norm drops below 1e-10.
SparseCode encode(std::span<const double> profile, const Dictionary& dict, std::size_t S);
SparseCode encode(const SubMovement& sub, const Dictionary& dict, std::size_t S);

struct ActionRepresentation {
  std::string recording_id;
  std::string action_label;
  std::vector<SparseCode> codes;  // temporal order
};

ActionRepresentation encode_action(std::span<const SubMovement> subs, const Dictionary& dict, std::size_t S);

nlohmann::json dictionary_to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const nlohmann::json& doc);

nlohmann::json sparse_code_to_json(const SparseCode& code);
SparseCode sparse_code_from_json(const nlohmann::json& doc, std::size_t K);

nlohmann::json representation_to_json(const ActionRepresentation& rep);
ActionRepresentation representation_from_json(const nlohmann::json& doc);

}  // namespace kinprim
