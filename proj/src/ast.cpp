#include <kinprim/ast.hpp>

#include <kinprim/error.hpp>
#include <kinprim/seed.hpp>

#include <algorithm>
#include <exception>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

namespace kinprim {

// --- counts -------------------------------------------------------------------

CountMatrix CountMatrix::zeros(std::vector<std::string> actions) {
  CountMatrix m;
  const std::size_t n = actions.size();
  m.actions = std::move(actions);
  m.selected_cells.assign(n * n, 0);
  m.presented_cells.assign(n * n, 0);
  return m;
}

std::size_t CountMatrix::index_of(const std::string& action) const {
  auto it = std::find(actions.begin(), actions.end(), action);
  if (it == actions.end()) throw ParameterError("unknown action '" + action + "'");
  return static_cast<std::size_t>(it - actions.begin());
}

std::int64_t CountMatrix::row_sum(std::size_t i) const {
  std::int64_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += selected(i, j);
  return s;
}

CountMatrix& CountMatrix::operator+=(const CountMatrix& other) {
  if (other.actions != actions) throw ParameterError("cannot merge count matrices over different actions");
  for (std::size_t i = 0; i < selected_cells.size(); ++i) {
    selected_cells[i] += other.selected_cells[i];
    presented_cells[i] += other.presented_cells[i];
  }
  timeouts += other.timeouts;
  return *this;
}

namespace {

nlohmann::json as_rows(const std::vector<std::int64_t>& cells, std::size_t n) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i)
    rows.push_back(std::vector<std::int64_t>(cells.begin() + static_cast<std::ptrdiff_t>(i * n),
                                             cells.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
  return rows;
}

std::vector<std::int64_t> from_rows(const nlohmann::json& rows, std::size_t n, const char* what) {
  if (!rows.is_array() || rows.size() != n) throw SchemaError(std::string("count matrix: '") + what + "' must have n rows");
  std::vector<std::int64_t> out;
  for (const auto& r : rows) {
    auto v = r.get<std::vector<std::int64_t>>();
    if (v.size() != n) throw SchemaError(std::string("count matrix: '") + what + "' rows must have n entries");
    for (auto x : v)
      if (x < 0) throw SchemaError(std::string("count matrix: negative count in '") + what + "'");
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

nlohmann::json counts_to_json(const CountMatrix& m) {
  return {{"actions", m.actions},
          {"counts", as_rows(m.selected_cells, m.size())},
          {"presented", as_rows(m.presented_cells, m.size())},
          {"timeouts", m.timeouts}};
}

CountMatrix counts_from_json(const nlohmann::json& doc) {
  CountMatrix m;
  try {
    m.actions = doc.at("actions").get<std::vector<std::string>>();
    m.selected_cells = from_rows(doc.at("counts"), m.size(), "counts");
    m.presented_cells = from_rows(doc.at("presented"), m.size(), "presented");
    m.timeouts = doc.value("timeouts", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("count matrix: ") + e.what());
  }
  return m;
}

// --- triads -------------------------------------------------------------------

TieRule parse_tie_rule(const std::string& name) {
  if (name == "coin_flip_seeded") return TieRule::coin_flip_seeded;
  if (name == "prefer_a") return TieRule::prefer_a;
  throw ParameterError("unknown tie_rule '" + name + "'");
}

std::string to_string(TieRule rule) { return rule == TieRule::prefer_a ? "prefer_a" : "coin_flip_seeded"; }

void ASTConfig::validate() const {
  if (repetitions < 1) throw ParameterError("AST: repetitions must be >= 1");
  if (instances_per_trial < 1) throw ParameterError("AST: instances_per_trial must be >= 1");
}

std::vector<Triad> enumerate_triads(std::span<const std::string> actions) {
  const std::size_t n = actions.size();
  if (n < 2) throw ParameterError("enumerate_triads: need at least 2 actions");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (actions[i] == actions[j]) throw ParameterError("enumerate_triads: duplicate action '" + actions[i] + "'");
  std::vector<Triad> out;
  out.reserve(2 * n * (n - 1));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if ((t == a || t == b) && a != b) out.push_back({actions[t], actions[a], actions[b]});
  return out;
}

CodePool make_pool(std::span<const ActionRepresentation> reps) {
  CodePool pool;
  for (const auto& r : reps)
    for (const auto& c : r.codes) pool[r.action_label].push_back(c);
  return pool;
}

namespace {

// side_score(side, code_idx): side 0 = classifier A, 1 = classifier B.
template <class SideScore>
TrialOutcome trial_impl(const Triad& triad, std::size_t pool_size, const ASTConfig& cfg, std::mt19937_64& rng,
                        SideScore&& side_score) {
  if (!triad.valid()) throw ParameterError("invalid triad (" + triad.target + ", " + triad.a + ", " + triad.b + ")");
  if (pool_size == 0) throw ParameterError("no instances in the pool for target action '" + triad.target + "'");
  std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t k = 0; k < cfg.instances_per_trial; ++k) {
    const std::size_t idx = pick(rng);
    sum_a += side_score(0, idx);
    sum_b += side_score(1, idx);
  }
  TrialOutcome out;
  out.triad = triad;
  out.score_a = sum_a / static_cast<double>(cfg.instances_per_trial);
  out.score_b = sum_b / static_cast<double>(cfg.instances_per_trial);
  bool a_wins = out.score_a > out.score_b;
  if (out.score_a == out.score_b) {
    if (cfg.tie_rule == TieRule::prefer_a) a_wins = true;
    else a_wins = std::bernoulli_distribution(0.5)(rng);
  }
  out.winner = a_wins ? triad.a : triad.b;
  out.correct = out.winner == triad.target;
  return out;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(0u, i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(w, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

unsigned worker_count(unsigned threads, std::size_t n) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
}

}  // namespace

TrialOutcome run_trial(const Scorer& scorer, const Triad& triad, const CodePool& pool, const ASTConfig& cfg,
                       std::mt19937_64& rng) {
  cfg.validate();
  auto it = pool.find(triad.target);
  const std::size_t size = it == pool.end() ? 0 : it->second.size();
  return trial_impl(triad, size, cfg, rng, [&](int side, std::size_t idx) {
    return scorer.score(side == 0 ? triad.a : triad.b, it->second[idx]);
  });
}

ExperimentResult run_experiment(const Scorer& scorer, const CodePool& pool, std::span<const std::string> actions,
                                const ASTConfig& cfg) {
  cfg.validate();
  const auto triads = enumerate_triads(actions);
  const std::size_t n = actions.size();
  for (const auto& a : actions) {
    auto it = pool.find(a);
    if (it == pool.end() || it->second.empty())
      throw ParameterError("run_experiment: pool has no instances for action '" + a + "'");
  }

  // Every trial draws target instances from the pool, so all the scores a
  // trial can need are tabulated once: table[t][code * n + classifier].
  std::vector<std::vector<double>> table(n);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& codes = pool.at(actions[t]);
    table[t].resize(codes.size() * n);
    for (std::size_t c = 0; c < codes.size(); ++c) jobs.emplace_back(t, c);
  }
  parallel_for(jobs.size(), cfg.threads, [&](unsigned, std::size_t j) {
    const auto [t, c] = jobs[j];
    const auto& code = pool.at(actions[t])[c];
    for (std::size_t k = 0; k < n; ++k) table[t][c * n + k] = scorer.score(actions[k], code);
  });

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) position[actions[i]] = i;

  std::vector<std::size_t> schedule(cfg.repetitions * triads.size());
  std::iota(schedule.begin(), schedule.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "ast.schedule"));
  std::shuffle(schedule.begin(), schedule.end(), shuffle_rng);

  ExperimentResult result;
  result.log.resize(schedule.size());
  const unsigned workers = worker_count(cfg.threads, schedule.size());
  std::vector<CountMatrix> partial(workers, CountMatrix::zeros({actions.begin(), actions.end()}));
  parallel_for(schedule.size(), workers, [&](unsigned w, std::size_t k) {
    const Triad& triad = triads[schedule[k] % triads.size()];
    const std::size_t t = position.at(triad.target), a = position.at(triad.a), b = position.at(triad.b);
    std::mt19937_64 rng(derive_seed(cfg.seed, "ast.trial", k));
    TrialOutcome out = trial_impl(triad, pool.at(triad.target).size(), cfg, rng, [&](int side, std::size_t idx) {
      return table[t][idx * n + (side == 0 ? a : b)];
    });
    out.trial_idx = k;
    auto& counts = partial[w];
    const std::size_t d = position.at(triad.distractor());
    counts.selected(t, position.at(out.winner)) += 1;
    counts.presented(t, t) += 1;
    counts.presented(t, d) += 1;
    result.log[k] = std::move(out);
  });
  result.counts = CountMatrix::zeros({actions.begin(), actions.end()});
  for (const auto& p : partial) result.counts += p;
  return result;
}

std::string trial_log_csv(std::span<const TrialOutcome> log) {
  std::ostringstream os;
  os << "trial_idx,target,a,b,score_a,score_b,winner,correct\n";
  os << std::setprecision(17);
  for (const auto& t : log)
    os << t.trial_idx << ',' << t.triad.target << ',' << t.triad.a << ',' << t.triad.b << ',' << t.score_a << ','
       << t.score_b << ',' << t.winner << ',' << (t.correct ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace kinprim
