#include <kinprim/classifier.hpp>
#include <kinprim/error.hpp>

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace kinprim;

namespace {

SparseCode code_of(const Eigen::VectorXd& w) {
  SparseCode c;
  c.weights = w;
  c.nnz = static_cast<std::size_t>((w.array() != 0.0).count());
  return c;
}

std::vector<SparseCode> blob(std::mt19937_64& rng, const Eigen::VectorXd& center, double sd, std::size_t n) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<SparseCode> out;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd w = center;
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) += g(rng);
    out.push_back(code_of(w));
  }
  return out;
}

ActionRepresentation rep_of(const std::string& label, std::vector<SparseCode> codes, std::size_t idx) {
  ActionRepresentation r;
  r.action_label = label;
  r.recording_id = label + "_" + std::to_string(idx);
  r.codes = std::move(codes);
  return r;
}

void check_alpha_bound(const BinaryRLS& m) {
  const double N = static_cast<double>(m.alpha.size());
  CHECK(m.alpha.norm() <= std::sqrt(N) / (m.lambda * N) * (1.0 + 1e-12));
}

TrainingSet blob_training_set(std::size_t classes, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrainingSet set;
  for (std::size_t c = 0; c < classes; ++c) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    center(static_cast<Eigen::Index>(c % dim)) = 1.0 + static_cast<double>(c / dim);
    const std::string label = "action_" + std::string(1, static_cast<char>('a' + c));
    for (std::size_t r = 0; r < 3; ++r) set[label].push_back(rep_of(label, blob(rng, center, 0.05, 4), r));
  }
  return set;
}

}  // namespace

TEST_CASE("two-point problem matches the hand-solved dual system") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(5), n = Eigen::VectorXd::Zero(5);
  p(0) = 1.0;
  n(0) = -1.0;
  const std::vector<SparseCode> pos{code_of(p)}, neg{code_of(n)};
  const double lambda = 0.01;
  const auto m = train_binary(pos, neg, 1.0, lambda, "p");
  // G = [[1, e], [e, 1]] with e = exp(-|p - n|^2 / 2); (G + 2 lambda I) alpha = (1, -1).
  const double e = std::exp(-2.0);
  const double a = 1.0 / (1.0 + 2.0 * lambda - e);
  CHECK(m.alpha(0) == doctest::Approx(a).epsilon(1e-12));
  CHECK(m.alpha(1) == doctest::Approx(-a).epsilon(1e-12));
  CHECK(m.score(p) == doctest::Approx(a * (1.0 - e)).epsilon(1e-12));
  CHECK(m.score(p) > 0.0);
  CHECK(m.score(n) < 0.0);
  CHECK(m.dual_residual < 1e-8);
  check_alpha_bound(m);
}

TEST_CASE("one training point scores 1/(1+lambda) on itself") {
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, 0.0, 1.0);
  const std::vector<SparseCode> pos{code_of(p)};
  const auto m = train_binary(pos, {}, 0.7, 1e-6);
  CHECK(std::abs(m.score(p) - 1.0) < 0.01);
  CHECK(m.alpha(0) == doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));
}

TEST_CASE("identical positive and negative sets cancel") {
  std::mt19937_64 rng(1);
  const auto codes = blob(rng, Eigen::VectorXd::Zero(4), 1.0, 5);
  const auto m = train_binary(codes, codes, 1.0, 1e-2);
  std::mt19937_64 probe(2);
  for (const auto& c : blob(probe, Eigen::VectorXd::Zero(4), 2.0, 20)) CHECK(std::abs(m.score(c)) < 1e-6);
}

TEST_CASE("zero coefficients score zero and scoring ignores training order") {
  std::mt19937_64 rng(3);
  const auto pos = blob(rng, Eigen::VectorXd::Ones(3), 0.3, 4);
  const auto neg = blob(rng, -Eigen::VectorXd::Ones(3), 0.3, 4);
  const auto m = train_binary(pos, neg, 1.0, 1e-3);

  auto zero = m;
  zero.alpha.setZero();
  CHECK(zero.score(pos[0]) == 0.0);

  // Reverse the training points and their coefficients together.
  auto permuted = m;
  const Eigen::Index N = m.alpha.size();
  Eigen::MatrixXd inputs = m.inputs->colwise().reverse();
  permuted.inputs = std::make_shared<const Eigen::MatrixXd>(m.inputs->colwise().reverse());
  permuted.alpha = m.alpha.reverse();
  REQUIRE(inputs.rows() == N);
  std::mt19937_64 probe(4);
  for (const auto& c : blob(probe, Eigen::VectorXd::Zero(3), 1.0, 10))
    CHECK(permuted.score(c) == doctest::Approx(m.score(c)).epsilon(1e-12));
}

TEST_CASE("six-sigma separated blobs are classified perfectly") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(15);
    c(0) = 3.0;
    const auto pos = blob(rng, c, 0.5, 25);
    const auto neg = blob(rng, -c, 0.5, 25);
    const auto m = train_binary(pos, neg, 1.0, 1e-3);
    CHECK(m.dual_residual < 1e-8);
    check_alpha_bound(m);
    for (const auto& p : pos) CHECK(m.score(p) > 0.0);
    for (const auto& n : neg) CHECK(m.score(n) < 0.0);
  }
}

TEST_CASE("property: Gram matrix is symmetric PSD and every solve meets the residual and norm bounds") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const auto pos = blob(rng, Eigen::VectorXd::Zero(6), 1.0, 5 + seed % 7);
    const auto neg = blob(rng, Eigen::VectorXd::Constant(6, 0.5), 1.0, 3 + seed % 5);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(pos.size() + neg.size()), 6);
    Eigen::Index r = 0;
    for (const auto* set : {&pos, &neg})
      for (const auto& c : *set) X.row(r++) = c.weights.transpose();
    const double sigma = 0.5 + 0.1 * static_cast<double>(seed % 10);
    const Eigen::MatrixXd G = rbf_gram(X, sigma);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff() > -1e-10);
    CHECK(G(0, 1) == doctest::Approx(rbf_kernel(X.row(0).transpose(), X.row(1).transpose(), sigma)));
    for (double lambda : {1e-5, 1e-3, 1e-1, 1.0}) {
      const auto m = train_binary(pos, neg, sigma, lambda);
      CHECK(m.dual_residual < 1e-8);
      check_alpha_bound(m);
    }
  }
}

TEST_CASE("median pairwise distance") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 1.0, 3.0;  // distances 1, 2, 3
  CHECK(median_pairwise_distance(X) == doctest::Approx(2.0));
}

TEST_CASE("one-vs-all on separable clouds") {
  const auto set = blob_training_set(2, 4, 5);
  const auto model = train_one_vs_all(set, {});
  CHECK(model.labels == std::vector<std::string>{"action_a", "action_b"});
  for (const auto& [label, reps] : set)
    for (const auto& rep : reps)
      for (const auto& code : rep.codes)
        for (const auto& other : model.labels)
          if (other != label) CHECK(model.at(label).score(code) > model.at(other).score(code));
  for (const auto& [label, clf] : model.classifiers) {
    CHECK(clf.dual_residual < 1e-8);
    check_alpha_bound(clf);
  }
}

TEST_CASE("nineteen actions give nineteen classifiers sharing one input matrix") {
  const auto set = blob_training_set(19, 8, 6);
  const auto model = train_one_vs_all(set, {std::nullopt, 1e-3});
  CHECK(model.classifiers.size() == 19);
  const auto* shared = model.classifiers.begin()->second.inputs.get();
  for (const auto& [label, clf] : model.classifiers) {
    CHECK(clf.inputs.get() == shared);
    CHECK(clf.dual_residual < 1e-8);
  }
  const auto again = train_one_vs_all(set, {std::nullopt, 1e-3});
  for (const auto& label : model.labels) CHECK(again.at(label).alpha == model.at(label).alpha);
}

TEST_CASE("model JSON round trip and fingerprint check") {
  const auto set = blob_training_set(3, 4, 7);
  const auto model = train_one_vs_all(set, {0.8, 1e-2}, "abc123");
  const auto doc = model_to_json(model);
  const auto back = model_from_json(doc);
  CHECK(back.labels == model.labels);
  std::mt19937_64 rng(1);
  for (const auto& c : blob(rng, Eigen::VectorXd::Zero(4), 1.0, 5))
    for (const auto& label : model.labels) CHECK(back.at(label).score(c) == model.at(label).score(c));

  Dictionary dict;
  dict.atoms = Eigen::MatrixXd::Identity(4, 10);
  dict.fingerprint = "abc123";
  CHECK_NOTHROW(model_from_json(doc, dict));
  dict.fingerprint = "other";
  CHECK_THROWS_AS(model_from_json(doc, dict), FingerprintError);
  CHECK_THROWS_AS(model.at("missing"), ParameterError);
}

TEST_CASE("lambda selection returns a grid value") {
  const auto train = blob_training_set(3, 4, 8);
  const auto validation = blob_training_set(3, 4, 9);
  const std::vector<double> grid{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  const double chosen = select_lambda(train, validation, grid, std::nullopt);
  CHECK(std::find(grid.begin(), grid.end(), chosen) != grid.end());
}

TEST_CASE("training preconditions") {
  const std::vector<SparseCode> none;
  CHECK_THROWS_AS(train_binary(none, none, 1.0, 1e-3), ParameterError);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
  const std::vector<SparseCode> one{code_of(p)};
  CHECK_THROWS_AS(train_binary(one, none, 0.0, 1e-3), ParameterError);
  CHECK_THROWS_AS(train_binary(one, none, 1.0, 0.0), ParameterError);
}
