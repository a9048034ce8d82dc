#include <kinprim/primitives.hpp>

#include <kinprim/error.hpp>
#include <kinprim/seed.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace kinprim {

void Dictionary::validate() const {
  if (atoms.rows() == 0 || atoms.cols() == 0) throw ValidationError("dictionary is empty");
  if (!atoms.allFinite()) throw ValidationError("dictionary has non-finite entries");
  for (Eigen::Index k = 0; k < atoms.rows(); ++k) {
    if (atoms.row(k).squaredNorm() == 0.0) throw ValidationError("dictionary atom " + std::to_string(k) + " is all-zero");
    for (Eigen::Index j = 0; j < k; ++j)
      if (atoms.row(k) == atoms.row(j))
        throw ValidationError("dictionary atoms " + std::to_string(j) + " and " + std::to_string(k) + " are identical");
  }
}

// --- k-means ------------------------------------------------------------------

namespace {

struct Assignment {
  std::vector<std::size_t> label;
  std::vector<double> dist2;
  double objective = 0.0;
};

Assignment assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids) {
  const auto n = static_cast<std::size_t>(points.rows());
  Assignment a;
  a.label.resize(n);
  a.dist2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
      const double d = (points.row(i) - centroids.row(k)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<std::size_t>(k);
      }
    }
    a.label[i] = arg;
    a.dist2[i] = best;
    a.objective += best;
  }
  return a;
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, std::size_t K, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd c(K, points.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  c.row(0) = points.row(first(rng));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points.row(i) - c.row(0)).squaredNorm();
  for (std::size_t k = 1; k < K; ++k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (!(total > 0.0))
      throw InsufficientDataError("k-means: fewer than K=" + std::to_string(K) + " distinct input profiles");
    std::uniform_real_distribution<double> pick(0.0, total);
    const double r = pick(rng);
    double acc = 0.0;
    std::size_t chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      chosen = i;
      if (acc > r) break;
    }
    c.row(k) = points.row(chosen);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - c.row(k)).squaredNorm());
  }
  return c;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t K, std::uint64_t seed, std::size_t max_iters) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (K == 0) throw ParameterError("k-means: K must be >= 1");
  if (n < K)
    throw InsufficientDataError("k-means: " + std::to_string(n) + " inputs for K=" + std::to_string(K) +
                                " clusters (need at least K)");
  if (!points.allFinite()) throw ValidationError("k-means: non-finite input");

  KMeansResult r;
  r.centroids = seed_centroids(points, K, seed);
  Assignment cur = assign(points, r.centroids);
  r.objective.push_back(cur.objective);

  std::vector<std::size_t> counts(K);
  while (r.iterations < max_iters) {
    // Update step.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), points.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(cur.label[i]) += points.row(i);
      ++counts[cur.label[i]];
    }
    for (std::size_t k = 0; k < K; ++k)
      if (counts[k] > 0) r.centroids.row(k) = sums.row(k) / static_cast<double>(counts[k]);
    for (std::size_t k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      // Empty cluster: move it onto the point farthest from every other centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < K; ++j) {
          if (j == k) continue;
          d = std::min(d, (points.row(i) - r.centroids.row(j)).squaredNorm());
        }
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.centroids.row(k) = points.row(far);
      counts[k] = 1;
    }

    Assignment next = assign(points, r.centroids);
    r.objective.push_back(next.objective);
    ++r.iterations;
    const bool unchanged = next.label == cur.label;
    cur = std::move(next);
    if (unchanged) {
      r.converged = true;
      break;
    }
  }
  r.assignment = std::move(cur.label);
  return r;
}

Dictionary learn_dictionary(std::span<const SubMovement> subs, std::size_t K, std::uint64_t seed,
                            std::size_t max_iters) {
  if (subs.size() < K)
    throw InsufficientDataError("learn_dictionary: " + std::to_string(subs.size()) + " sub-movements for K=" +
                                std::to_string(K) + " atoms (need at least K)");
  if (subs.empty()) throw InsufficientDataError("learn_dictionary: no sub-movements");
  const std::size_t L = subs.front().profile.size();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(subs.size()), static_cast<Eigen::Index>(L));
  Fingerprint fp;
  fp.add(std::string_view("dictionary")).add(static_cast<std::uint64_t>(K)).add(seed).add(
      static_cast<std::uint64_t>(max_iters));
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i].profile.size() != L)
      throw ParameterError("learn_dictionary: sub-movement " + std::to_string(i) + " has length " +
                           std::to_string(subs[i].profile.size()) + ", expected " + std::to_string(L));
    for (std::size_t j = 0; j < L; ++j) points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = subs[i].profile[j];
    fp.add(std::span<const double>(subs[i].profile));
  }
  auto km = kmeans(points, K, seed, max_iters);
  Dictionary d{std::move(km.centroids), fp.hex()};
  try {
    d.validate();
  } catch (const ValidationError& e) {
    throw InsufficientDataError(std::string("learn_dictionary: degenerate dictionary: ") + e.what());
  }
  return d;
}

// --- sparse coding --------------------------------------------------------------

SparseCode encode(std::span<const double> profile, const Dictionary& dict, std::size_t S) {
  const std::size_t K = dict.K();
  if (S < 1 || S > K) throw ParameterError("encode: sparsity budget S=" + std::to_string(S) + " outside [1, K=" +
                                           std::to_string(K) + "]");
  if (profile.size() != dict.L())
    throw ParameterError("encode: profile length " + std::to_string(profile.size()) + " != dictionary L=" +
                         std::to_string(dict.L()));
  const Eigen::Map<const Eigen::VectorXd> x(profile.data(), static_cast<Eigen::Index>(profile.size()));
  SparseCode code;
  code.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  if (x.squaredNorm() == 0.0) return code;

  const Eigen::VectorXd atom_norms = dict.atoms.rowwise().norm();
  std::vector<Eigen::Index> selected;
  std::vector<char> used(K, 0);
  Eigen::VectorXd residual = x;
  Eigen::VectorXd coef;
  while (selected.size() < S && residual.norm() >= 1e-10) {
    const Eigen::VectorXd corr = (dict.atoms * residual).cwiseAbs().cwiseQuotient(atom_norms);
    Eigen::Index best = -1;
    double best_c = 0.0;
    for (Eigen::Index k = 0; k < corr.size(); ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      if (best < 0 || corr[k] > best_c) {
        best = k;
        best_c = corr[k];
      }
    }
    // Residual orthogonal to every remaining atom: nothing left to gain.
    if (best < 0 || best_c <= 1e-14 * residual.norm()) break;
    used[static_cast<std::size_t>(best)] = 1;
    selected.push_back(best);

    Eigen::MatrixXd sub(x.size(), static_cast<Eigen::Index>(selected.size()));
    for (std::size_t j = 0; j < selected.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = dict.atoms.row(selected[j]).transpose();
    coef = sub.colPivHouseholderQr().solve(x);
    residual = x - sub * coef;
  }
  for (std::size_t j = 0; j < selected.size(); ++j) code.weights[selected[j]] = coef[static_cast<Eigen::Index>(j)];
  code.nnz = static_cast<std::size_t>((code.weights.array() != 0.0).count());
  code.residual_norm = (x - dict.atoms.transpose() * code.weights).norm();
  return code;
}

SparseCode encode(const SubMovement& sub, const Dictionary& dict, std::size_t S) {
  return encode(std::span<const double>(sub.profile), dict, S);
}

ActionRepresentation encode_action(std::span<const SubMovement> subs, const Dictionary& dict, std::size_t S) {
  if (subs.empty()) throw ParameterError("encode_action: no sub-movements");
  for (const auto& s : subs)
    if (s.recording_id != subs.front().recording_id)
      throw ParameterError("encode_action: sub-movements from more than one recording ('" + subs.front().recording_id +
                           "', '" + s.recording_id + "')");
  std::vector<const SubMovement*> ordered;
  for (const auto& s : subs) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SubMovement* a, const SubMovement* b) { return a->start_idx < b->start_idx; });
  ActionRepresentation rep;
  rep.recording_id = subs.front().recording_id;
  rep.action_label = subs.front().action_label;
  for (const auto* s : ordered) rep.codes.push_back(encode(*s, dict, S));
  return rep;
}

// --- JSON -----------------------------------------------------------------------

nlohmann::json dictionary_to_json(const Dictionary& dict) {
  auto atoms = nlohmann::json::array();
  for (Eigen::Index k = 0; k < dict.atoms.rows(); ++k) {
    std::vector<double> row(dict.atoms.cols());
    for (Eigen::Index j = 0; j < dict.atoms.cols(); ++j) row[static_cast<std::size_t>(j)] = dict.atoms(k, j);
    atoms.push_back(row);
  }
  return {{"K", dict.K()}, {"L", dict.L()}, {"atoms", atoms}, {"fingerprint", dict.fingerprint}};
}

Dictionary dictionary_from_json(const nlohmann::json& doc) {
  Dictionary d;
  try {
    const auto K = doc.at("K").get<std::size_t>();
    const auto L = doc.at("L").get<std::size_t>();
    const auto& atoms = doc.at("atoms");
    if (!atoms.is_array() || atoms.size() != K) throw SchemaError("dictionary: 'atoms' must hold K rows");
    d.atoms.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));
    for (std::size_t k = 0; k < K; ++k) {
      const auto row = atoms[k].get<std::vector<double>>();
      if (row.size() != L) throw SchemaError("dictionary: atom " + std::to_string(k) + " length != L");
      for (std::size_t j = 0; j < L; ++j) d.atoms(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row[j];
    }
    d.fingerprint = doc.at("fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("dictionary: ") + e.what());
  }
  d.validate();
  return d;
}

nlohmann::json sparse_code_to_json(const SparseCode& code) {
  nlohmann::json weights = nlohmann::json::object();
  for (Eigen::Index k = 0; k < code.weights.size(); ++k)
    if (code.weights[k] != 0.0) weights[std::to_string(k)] = code.weights[k];
  return {{"weights", weights}, {"nnz", code.nnz}, {"residual", code.residual_norm}};
}

SparseCode sparse_code_from_json(const nlohmann::json& doc, std::size_t K) {
  SparseCode c;
  c.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  try {
    for (const auto& [key, value] : doc.at("weights").items()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw SchemaError("sparse code: weight key '" + key + "' is not an index");
      }
      if (idx >= K) throw SchemaError("sparse code: weight index " + key + " >= K");
      c.weights[static_cast<Eigen::Index>(idx)] = value.get<double>();
    }
    c.nnz = doc.at("nnz").get<std::size_t>();
    c.residual_norm = doc.at("residual").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("sparse code: ") + e.what());
  }
  return c;
}

nlohmann::json representation_to_json(const ActionRepresentation& rep) {
  auto codes = nlohmann::json::array();
  for (const auto& c : rep.codes) codes.push_back(sparse_code_to_json(c));
  const std::size_t K = rep.codes.empty() ? 0 : static_cast<std::size_t>(rep.codes.front().weights.size());
  return {{"recording_id", rep.recording_id}, {"action", rep.action_label}, {"K", K}, {"codes", codes}};
}

ActionRepresentation representation_from_json(const nlohmann::json& doc) {
  ActionRepresentation rep;
  try {
    rep.recording_id = doc.at("recording_id").get<std::string>();
    rep.action_label = doc.at("action").get<std::string>();
    const auto K = doc.at("K").get<std::size_t>();
    for (const auto& c : doc.at("codes")) rep.codes.push_back(sparse_code_from_json(c, K));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("action representation: ") + e.what());
  }
  if (rep.codes.empty()) throw SchemaError("action representation '" + rep.recording_id + "' has no codes");
  return rep;
}

}  // namespace kinprim
