#pragma once

#include <kinprim/classifier.hpp>
#include <kinprim/counts.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace kinprim {

// One two-alternative trial: which of classifiers A and B matches target T.
// Valid iff (T == A or T == B) and A != B.
struct Triad {
  std::string target;
  std::string a;
  std::string b;

  bool valid() const { return (target == a || target == b) && a != b; }
  const std::string& distractor() const { return target == a ? b : a; }
  auto operator<=>(const Triad&) const = default;
};

enum class TieRule { coin_flip_seeded, prefer_a };

TieRule parse_tie_rule(const std::string& name);
std::string to_string(TieRule rule);

struct ASTConfig {
  std::size_t repetitions = 24;
  std::size_t instances_per_trial = 10;
  std::uint64_t seed = 0;
  TieRule tie_rule = TieRule::coin_flip_seeded;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct TrialOutcome {
  std::size_t trial_idx = 0;
  Triad triad;
  std::string winner;
  double score_a = 0.0;
  double score_b = 0.0;
  bool correct = false;
};

// Sub-movement codes available as trial instances, per action.
using CodePool = std::map<std::string, std::vector<SparseCode>>;

CodePool make_pool(std::span<const ActionRepresentation> reps);

// Source of classifier scores for trial instances.
class Scorer {
public:
  virtual ~Scorer() = default;
  virtual double score(const std::string& classifier, const SparseCode& code) const = 0;
};

class ModelScorer final : public Scorer {
public:
  explicit ModelScorer(const OneVsAllModel& model) : model_(model) {}
  double score(const std::string& classifier, const SparseCode& code) const override {
    return model_.at(classifier).score(code);
  }

private:
  const OneVsAllModel& model_;
};

// All 2n(n-1) triads over `actions`, sorted lexicographically by
// (target, a, b) position in `actions`.
std::vector<Triad> enumerate_triads(std::span<const std::string> actions);

// Draws instances_per_trial target codes uniformly with replacement; each
// side scores the mean of its classifier over the drawn codes.
TrialOutcome run_trial(const Scorer& scorer, const Triad& triad, const CodePool& pool, const ASTConfig& cfg,
                       std::mt19937_64& rng);

struct ExperimentResult {
  CountMatrix counts;
  std::vector<TrialOutcome> log;  // schedule order
};

// repetitions x |triads| trials in a seeded shuffled order. Trial k draws from
// its own generator derived from (seed, k), so results do not depend on the
// worker count.
ExperimentResult run_experiment(const Scorer& scorer, const CodePool& pool, std::span<const std::string> actions,
                                const ASTConfig& cfg);

std::string trial_log_csv(std::span<const TrialOutcome> log);

}  // namespace kinprim
