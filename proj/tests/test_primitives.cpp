#include "support.hpp"

#include <kinprim/error.hpp>
#include <kinprim/primitives.hpp>

#include <doctest.h>

#include <Eigen/QR>

#include <algorithm>
#include <random>
#include <set>

using namespace kinprim;

namespace {

Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = g(rng);
  return X;
}

Dictionary orthonormal_dictionary(std::size_t K, std::size_t L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd A = random_points(rng, static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(K));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  Dictionary d;
  d.atoms = Q.transpose();
  d.fingerprint = "ortho";
  return d;
}

Dictionary random_dictionary(std::size_t K, std::size_t L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dictionary d;
  d.atoms = random_points(rng, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));
  d.fingerprint = "random";
  return d;
}

SubMovement sub_of(const Eigen::VectorXd& profile, std::size_t start, const std::string& rec = "r") {
  SubMovement s;
  s.recording_id = rec;
  s.action_label = "a";
  s.start_idx = start;
  s.end_idx = start + 10;
  s.profile.assign(profile.data(), profile.data() + profile.size());
  return s;
}

double reconstruction_gap(std::span<const double> x, const Dictionary& d, const SparseCode& c) {
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const double direct = (v - d.atoms.transpose() * c.weights).norm();
  return std::abs(direct - c.residual_norm);
}

}  // namespace

TEST_CASE("k-means with one point per cluster returns the points") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd X = random_points(rng, 6, 4);
  const auto r = kmeans(X, 6, 99, 50);
  CHECK(r.objective.back() == 0.0);
  std::set<std::size_t> used(r.assignment.begin(), r.assignment.end());
  CHECK(used.size() == 6);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    CHECK((r.centroids.row(static_cast<Eigen::Index>(r.assignment[static_cast<std::size_t>(i)])) - X.row(i)).norm() == 0.0);
}

TEST_CASE("two separated blobs are recovered at their means") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.1);
    Eigen::MatrixXd X(20, 50);
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(50), c1 = Eigen::VectorXd::Constant(50, 1.0 / std::sqrt(50.0));
    for (Eigen::Index i = 0; i < 20; ++i) {
      const Eigen::VectorXd& c = i % 2 == 0 ? c0 : c1;
      for (Eigen::Index j = 0; j < 50; ++j) X(i, j) = c(j) + g(rng) / std::sqrt(50.0);
    }
    Eigen::VectorXd m0 = Eigen::VectorXd::Zero(50), m1 = Eigen::VectorXd::Zero(50);
    for (Eigen::Index i = 0; i < 20; ++i) (i % 2 == 0 ? m0 : m1) += X.row(i).transpose() / 10.0;

    const auto r = kmeans(X, 2, seed, 100);
    CHECK(r.converged);
    const std::size_t k0 = r.assignment[0];
    for (Eigen::Index i = 0; i < 20; ++i) CHECK((r.assignment[static_cast<std::size_t>(i)] == k0) == (i % 2 == 0));
    CHECK((r.centroids.row(static_cast<Eigen::Index>(k0)).transpose() - m0).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r.centroids.row(static_cast<Eigen::Index>(1 - k0)).transpose() - m1).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("property: k-means objective never increases and runs are deterministic") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 1);
    const auto n = static_cast<Eigen::Index>(20 + seed % 40);
    const auto K = static_cast<std::size_t>(2 + seed % 8);
    const Eigen::MatrixXd X = random_points(rng, n, 5 + static_cast<Eigen::Index>(seed % 3));
    const auto r = kmeans(X, K, seed, 200);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] <= r.objective[i - 1]);
    const auto again = kmeans(X, K, seed, 200);
    CHECK(again.centroids == r.centroids);
    CHECK(again.assignment == r.assignment);
  }
}

TEST_CASE("k-means preconditions") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 3);
  CHECK_THROWS_AS(kmeans(X, 2, 0, 10), InsufficientDataError);
  CHECK_THROWS_AS(kmeans(X, 6, 0, 10), InsufficientDataError);
  CHECK_THROWS_AS(kmeans(X, 0, 0, 10), ParameterError);
}

TEST_CASE("dictionary learning is deterministic and fingerprinted") {
  std::mt19937_64 rng(4);
  std::vector<SubMovement> subs;
  for (std::size_t i = 0; i < 40; ++i) subs.push_back(sub_of(random_points(rng, 1, 50).row(0).transpose(), i * 10));
  const auto a = learn_dictionary(subs, 5, 17);
  const auto b = learn_dictionary(subs, 5, 17);
  CHECK(a.atoms == b.atoms);
  CHECK(a.fingerprint == b.fingerprint);
  CHECK(a.K() == 5);
  CHECK(a.L() == 50);
  CHECK_NOTHROW(a.validate());
  CHECK(learn_dictionary(subs, 5, 18).fingerprint != a.fingerprint);
  CHECK_THROWS_AS(learn_dictionary(std::span(subs).first(4), 5, 17), InsufficientDataError);

  const auto back = dictionary_from_json(dictionary_to_json(a));
  CHECK(back.atoms == a.atoms);
  CHECK(back.fingerprint == a.fingerprint);
}

TEST_CASE("OMP recovers a scaled atom exactly") {
  const auto d = orthonormal_dictionary(8, 50, 1);
  const Eigen::VectorXd x = 0.7 * d.atoms.row(3).transpose();
  const auto c = encode(std::span<const double>(x.data(), 50), d, 1);
  CHECK(c.nnz == 1);
  CHECK(c.residual_norm < 1e-9);
  CHECK(c.weights(3) == doctest::Approx(0.7).epsilon(1e-12));
  for (Eigen::Index k = 0; k < 8; ++k)
    if (k != 3) CHECK(c.weights(k) == 0.0);
}

TEST_CASE("OMP on a two-atom mixture matches least squares on those atoms") {
  const auto d = orthonormal_dictionary(8, 50, 2);
  const Eigen::VectorXd x = 0.5 * d.atoms.row(1).transpose() + 0.5 * d.atoms.row(2).transpose();
  const auto c = encode(std::span<const double>(x.data(), 50), d, 2);
  Eigen::MatrixXd A(50, 2);
  A.col(0) = d.atoms.row(1).transpose();
  A.col(1) = d.atoms.row(2).transpose();
  const Eigen::VectorXd w = (A.transpose() * A).ldlt().solve(A.transpose() * x);
  CHECK(c.nnz == 2);
  CHECK(c.residual_norm < 1e-9);
  CHECK(c.weights(1) == doctest::Approx(w(0)).epsilon(1e-12));
  CHECK(c.weights(2) == doctest::Approx(w(1)).epsilon(1e-12));
  CHECK(w(0) == doctest::Approx(0.5));
}

TEST_CASE("property: OMP residual is non-increasing in S and bounded by full least squares") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t K = 6 + seed % 10;
    const auto d = random_dictionary(K, 50, seed);
    std::mt19937_64 rng(seed + 1000);
    const auto x = test_support::uniform_vector(rng, 50);
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), 50);
    const Eigen::MatrixXd A = d.atoms.transpose();
    const Eigen::VectorXd full = A.colPivHouseholderQr().solve(v);
    const double full_residual = (v - A * full).norm();

    double previous = v.norm();
    for (std::size_t S = 1; S <= K; ++S) {
      const auto c = encode(x, d, S);
      CHECK(c.nnz <= S);
      CHECK(c.residual_norm <= previous + 1e-12);
      CHECK(reconstruction_gap(x, d, c) < 1e-9);
      CHECK(c.residual_norm >= full_residual - 1e-9);
      previous = c.residual_norm;
    }
    CHECK(std::abs(previous - full_residual) < 1e-8);
  }
}

TEST_CASE("OMP preconditions") {
  const auto d = random_dictionary(5, 10, 0);
  const std::vector<double> x(10, 1.0), wrong(9, 1.0);
  CHECK_THROWS_AS(encode(x, d, 0), ParameterError);
  CHECK_THROWS_AS(encode(x, d, 6), ParameterError);
  CHECK_THROWS_AS(encode(wrong, d, 2), ParameterError);
}

TEST_CASE("action representation keeps temporal order") {
  const auto d = random_dictionary(6, 50, 9);
  std::mt19937_64 rng(2);
  std::vector<SubMovement> subs;
  for (std::size_t i = 0; i < 3; ++i) subs.push_back(sub_of(random_points(rng, 1, 50).row(0).transpose(), i * 10));

  const auto one = encode_action(std::span(subs).first(1), d, 3);
  REQUIRE(one.codes.size() == 1);
  CHECK(one.codes[0].weights == encode(subs[0], d, 3).weights);

  const auto in_order = encode_action(subs, d, 3);
  CHECK(in_order.codes.size() == 3);
  std::vector<SubMovement> shuffled{subs[2], subs[0], subs[1]};
  const auto permuted = encode_action(shuffled, d, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(permuted.codes[i].weights == in_order.codes[i].weights);
    CHECK(permuted.codes[i].weights == encode(subs[i], d, 3).weights);
  }
  CHECK(in_order.recording_id == "r");

  const auto back = representation_from_json(representation_to_json(in_order));
  REQUIRE(back.codes.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.codes[i].weights == in_order.codes[i].weights);
    CHECK(back.codes[i].nnz == in_order.codes[i].nnz);
  }

  subs[1].recording_id = "other";
  CHECK_THROWS_AS(encode_action(subs, d, 3), ParameterError);
}
