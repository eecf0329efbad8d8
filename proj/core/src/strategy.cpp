#include "ctmg/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ctmg/model_io.hpp"

namespace ctmg {

TimedPositionalStrategy extract_strategy(const SolveResult& result, Player player) {
  return player == Player::Reach ? result.reach_strategy : result.safe_strategy;
}

SwitchPointReport count_switch_points(const TimedPositionalStrategy& s) {
  SwitchPointReport report;
  for (const auto& [loc, pieces] : s.pieces) {
    int count = 0;
    for (size_t i = 1; i < pieces.size(); ++i) {
      if (pieces[i].action == pieces[i - 1].action) continue;
      report.points.push_back({loc, pieces[i].t_start, pieces[i - 1].action, pieces[i].action});
      ++count;
    }
    report.per_location[loc] = count;
    report.total += count;
  }
  return report;
}

EvaluationReport evaluate_best_response(const MarkovGame& normed_game,
                                        const TimedPositionalStrategy& fixed,
                                        const NetLevel& level, double precision,
                                        const TimedPositionalStrategy* opponent) {
  if (opponent && opponent->player == fixed.player)
    throw std::invalid_argument("evaluate_best_response: both strategies are for the same player");
  check_strategy_total(fixed);
  if (opponent) check_strategy_total(*opponent);

  SolverConfig cfg;
  cfg.level = level.k;
  cfg.horizon = fixed.horizon;
  cfg.precision = precision;
  cfg.record_value_function = false;

  const TimedPositionalStrategy* fr = nullptr;
  const TimedPositionalStrategy* fs = nullptr;
  (fixed.player == Player::Reach ? fr : fs) = &fixed;
  if (opponent) (opponent->player == Player::Reach ? fr : fs) = opponent;

  SolveResult res = solve_restricted(normed_game, cfg, fr, fs);
  EvaluationReport report;
  report.location_names = std::move(res.location_names);
  report.values0 = std::move(res.values0);
  report.method = "best-response-nets";
  report.bound = res.value_bound;
  return report;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Stream {
  std::uint64_t state;
  explicit Stream(std::uint64_t seed) : state(seed) {}
  double uniform() {  // in [0, 1)
    state = splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }
};

// Per-location strategy table: -1 marks "use the single enabled action".
struct SimTable {
  std::vector<const std::vector<StrategyPiece>*> pieces;
  std::vector<int> single_action;
};

SimTable sim_table(const MarkovGame& game, const TimedPositionalStrategy& s_reach,
                   const TimedPositionalStrategy& s_safe) {
  SimTable table;
  table.pieces.assign(game.locations.size(), nullptr);
  table.single_action.assign(game.locations.size(), -1);
  for (const TimedPositionalStrategy* s : {&s_reach, &s_safe}) {
    for (const auto& [name, pieces] : s->pieces) {
      int l = game.index_of(name);
      if (l < 0) throw std::invalid_argument("strategy references unknown location '" + name + "'");
      if (game.locations[l].owner != s->player)
        throw std::invalid_argument("strategy covers location '" + name +
                                    "' owned by the other player");
      table.pieces[l] = &pieces;
    }
  }
  for (int l = 0; l < game.num_locations(); ++l) {
    if (table.pieces[l]) continue;
    int only = -1, enabled = 0;
    const auto& actions = game.locations[l].actions;
    for (size_t a = 0; a < actions.size(); ++a)
      if (actions[a].implicit_absorbing || actions[a].exit_mass() > Rational(0)) {
        ++enabled;
        only = static_cast<int>(a);
      }
    if (enabled != 1)
      throw std::invalid_argument("no strategy covers location '" + game.locations[l].name + "'");
    table.single_action[l] = only;
  }
  return table;
}

}  // namespace

SimulationResult simulate(const MarkovGame& game, const TimedPositionalStrategy& s_reach,
                          const TimedPositionalStrategy& s_safe, double horizon, long long n,
                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (horizon < 0.0) throw std::invalid_argument("simulate: horizon must be >= 0");

  Rational lambda;
  MarkovGame u = uniformise(game, &lambda);
  double lam = lambda.to_double();
  DerivedMatrices dm = derive(u);
  SimTable table = sim_table(u, s_reach, s_safe);

  // cumulative initial distribution
  std::vector<std::pair<double, int>> init;
  double mass = 0.0;
  for (int l = 0; l < u.num_locations(); ++l) {
    double p = u.locations[l].initial.to_double();
    if (p <= 0.0) continue;
    mass += p;
    init.emplace_back(mass, l);
  }
  if (init.empty()) throw std::invalid_argument("simulate: empty initial distribution");

  auto pick = [](const std::vector<std::pair<double, int>>& cum, double x) {
    for (const auto& [c, idx] : cum)
      if (x < c) return idx;
    return cum.back().second;
  };

  auto action_at = [&](int l, double t) {
    if (table.single_action[l] >= 0) return table.single_action[l];
    const StrategyPiece* p = strategy_piece_at(*table.pieces[l], t);
    if (!p)
      throw std::invalid_argument("strategy for '" + u.locations[l].name +
                                  "' does not cover time " + std::to_string(t));
    const auto& actions = u.locations[l].actions;
    for (size_t a = 0; a < actions.size(); ++a)
      if (actions[a].name == p->action) return static_cast<int>(a);
    throw std::invalid_argument("strategy action '" + p->action + "' is not enabled at '" +
                                u.locations[l].name + "'");
  };

  long long hits = 0;
  for (long long i = 0; i < n; ++i) {
    Stream rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    int l = pick(init, rng.uniform());
    double t = 0.0;
    while (true) {
      double dt = -std::log1p(-rng.uniform()) / lam;
      t += dt;
      if (t > horizon) break;
      const auto& row = dm.rows[l][static_cast<size_t>(action_at(l, t))].p;
      double x = rng.uniform(), cum = 0.0;
      int next = row.back().first;
      for (const auto& [dst, p] : row) {
        cum += p;
        if (x < cum) {
          next = dst;
          break;
        }
      }
      l = next;
    }
    if (u.locations[l].goal) ++hits;
  }

  SimulationResult res;
  res.n = n;
  res.estimate = static_cast<double>(hits) / static_cast<double>(n);
  res.std_error = std::sqrt(res.estimate * (1.0 - res.estimate) / static_cast<double>(n));
  res.ci_low = res.estimate - 1.96 * res.std_error;
  res.ci_high = res.estimate + 1.96 * res.std_error;
  return res;
}

std::string print_strategy(const TimedPositionalStrategy& s) {
  std::ostringstream os;
  os << "strategy " << player_name(s.player) << '\n';
  os << std::setprecision(15);
  for (const auto& [loc, pieces] : s.pieces)
    for (const auto& p : pieces)
      os << "piece " << loc << ' ' << p.t_start << ' ' << p.t_end << ' ' << p.action << '\n';
  return os.str();
}

std::vector<TimedPositionalStrategy> parse_strategies(std::istream& in) {
  std::vector<TimedPositionalStrategy> out;
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    std::istringstream is(raw.substr(0, raw.find('#')));
    std::vector<std::string> toks;
    std::string t;
    while (is >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks[0] == "strategy") {
      if (toks.size() != 2 || (toks[1] != "reach" && toks[1] != "safe"))
        throw ParseError(no, "expected 'strategy reach' or 'strategy safe'");
      TimedPositionalStrategy s;
      s.player = toks[1] == "reach" ? Player::Reach : Player::Safe;
      out.push_back(std::move(s));
    } else if (toks[0] == "piece") {
      if (out.empty()) throw ParseError(no, "piece before any strategy header");
      if (toks.size() != 5) throw ParseError(no, "piece takes <location> <t_start> <t_end> <action>");
      StrategyPiece p;
      try {
        size_t pos = 0;
        p.t_start = std::stod(toks[2], &pos);
        if (pos != toks[2].size()) throw std::invalid_argument(toks[2]);
        p.t_end = std::stod(toks[3], &pos);
        if (pos != toks[3].size()) throw std::invalid_argument(toks[3]);
      } catch (const std::exception&) {
        throw ParseError(no, "bad time in piece");
      }
      if (!(p.t_end >= p.t_start)) throw ParseError(no, "piece end before start");
      p.action = toks[4];
      auto& s = out.back();
      s.pieces[toks[1]].push_back(std::move(p));
      s.horizon = std::max(s.horizon, s.pieces[toks[1]].back().t_end);
    } else {
      throw ParseError(no, "unknown directive '" + toks[0] + "'");
    }
  }
  for (auto& s : out)
    for (auto& [loc, pieces] : s.pieces)
      std::sort(pieces.begin(), pieces.end(),
                [](const StrategyPiece& a, const StrategyPiece& b) { return a.t_start < b.t_start; });
  return out;
}

std::vector<TimedPositionalStrategy> parse_strategies_string(const std::string& text) {
  std::istringstream is(text);
  return parse_strategies(is);
}

std::vector<TimedPositionalStrategy> load_strategies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open strategy file '" + path + "'");
  return parse_strategies(in);
}

TimedPositionalStrategy scale_strategy(const TimedPositionalStrategy& s, double factor) {
  TimedPositionalStrategy out = s;
  out.horizon *= factor;
  for (auto& [loc, pieces] : out.pieces)
    for (auto& p : pieces) {
      p.t_start *= factor;
      p.t_end *= factor;
    }
  return out;
}

void check_strategy_total(const TimedPositionalStrategy& s) {
  double tol = 1e-9 * std::max(1.0, s.horizon);
  for (const auto& [loc, pieces] : s.pieces) {
    if (pieces.empty()) throw std::invalid_argument("strategy has no pieces for '" + loc + "'");
    if (std::abs(pieces.front().t_start) > tol)
      throw std::invalid_argument("strategy for '" + loc + "' does not start at 0");
    for (size_t i = 1; i < pieces.size(); ++i)
      if (std::abs(pieces[i].t_start - pieces[i - 1].t_end) > tol)
        throw std::invalid_argument("strategy for '" + loc + "' has a gap at t = " +
                                    std::to_string(pieces[i].t_start));
    if (std::abs(pieces.back().t_end - s.horizon) > tol)
      throw std::invalid_argument("strategy for '" + loc + "' does not reach the horizon");
  }
}

}  // namespace ctmg
