// Acceptance suite: one pass/fail line per criterion, each with its stated
// tolerance and runtime limit. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctmg/model.hpp"
#include "ctmg/nets.hpp"
#include "ctmg/oracle.hpp"
#include "ctmg/poly.hpp"
#include "ctmg/strategy.hpp"

using namespace ctmg;

namespace {

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;                          // 0 = no limit
  std::function<bool(std::string&)> body;       // fills a detail string
};

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<double> running_anchor(const MarkovGame& g) {
  std::vector<double> v(g.num_locations(), 0.0);
  v[g.index_of("lS")] = 0.075;
  v[g.index_of("lR")] = 0.107;
  v[g.index_of("l")] = 0.244;
  v[g.index_of("G")] = 1.0;
  return v;
}

// ---------------------------------------------------------------- criterion 1
bool worked_example(std::string& detail) {
  MarkovGame g = build_running_example();
  auto anchor = running_anchor(g);
  int lR = g.index_of("lR"), lS = g.index_of("lS");

  bool ok = true;
  auto [v1, rep] = step_single(g, anchor, 0.1);
  ok &= approx(rep.gradient[lR], 0.0286, 1e-12) && rep.chosen_action[lR] == "a";
  ok &= approx(rep.gradient[lS], 0.032, 1e-12) && rep.chosen_action[lS] == "a";

  IntervalResult ir = step_level(g, 2, anchor, 0.1);
  const TauPieces& p = ir.values[lR];
  double z = 5.0 / 63.0;
  ok &= p.polys.size() == 2 && p.breaks.size() == 3;
  if (ok) {
    ok &= approx(p.breaks[1], z, 1e-12);
    ok &= approx(p.polys[0].c[0], 0.107, 1e-12);
    ok &= approx(p.polys[0].c[1], 0.0286, 1e-12);
    ok &= approx(p.polys[0].c[2], -0.00286, 1e-12);
    ok &= approx(p.polys[1].c[0], 0.107 + 1.0 / 21000.0, 1e-12);
    ok &= approx(p.polys[1].c[1], 0.0274, 1e-12);
    ok &= approx(p.polys[1].c[2], 0.0047, 1e-12);
  }
  detail = "gradients 0.0286/0.032, crossing 5/63, both quadratics to 1e-12";
  return ok;
}

// ---------------------------------------------------------------- criterion 2
bool budget_table(std::string& detail) {
  auto rows = step_budget_table(10.0, {1e-7, 1e-9, 1e-11});
  bool ok = rows.size() == 3;
  if (ok) {
    ok &= rows[0].intervals == std::array<long long, 4>{1000000000LL, 81650, 3219, 605};
    ok &= rows[1].intervals == std::array<long long, 4>{100000000000LL, 816497, 14939, 1911};
    ok &= rows[2].intervals == std::array<long long, 4>{10000000000000LL, 8164966, 69337, 6043};
  }
  detail = "all 12 reference interval counts exact";
  return ok;
}

// ---------------------------------------------------------------- criterion 3
bool switch_times(std::string& detail) {
  MarkovGame g = build_running_example();
  SolverConfig cfg;
  cfg.level = 2;
  cfg.horizon = 4.0;
  cfg.precision = 1e-6;
  cfg.record_value_function = false;
  SolveResult res = solve(g, cfg);

  SwitchPointReport rep = count_switch_points(extract_strategy(res, Player::Reach));
  SwitchPointReport sep = count_switch_points(extract_strategy(res, Player::Safe));
  double t1 = -1.0, t2 = -1.0;
  for (const auto& sp : rep.points)
    if (sp.location == "lR") t1 = sp.time;
  for (const auto& sp : sep.points)
    if (sp.location == "lS") t2 = sp.time;

  std::ostringstream os;
  os << "switch times " << t1 << " / " << t2 << " vs 1.123 / 0.609 (tol 5e-3)";
  detail = os.str();
  return approx(t1, 1.123, 5e-3) && approx(t2, 0.609, 5e-3);
}

// ---------------------------------------------------------------- criterion 4
bool convergence(std::string& detail) {
  MarkovGame g = build_running_example();
  ConvergenceStudy study =
      convergence_study(g, 2.0, {1, 2, 3}, {0.1, 0.05, 0.025, 0.0125}, 1e-7);
  bool ok = true;
  std::ostringstream os;
  os << "orders";
  for (size_t i = 0; i < study.levels.size(); ++i) {
    os << " L" << study.levels[i] << "=" << study.fitted_order[i];
    ok &= approx(study.fitted_order[i], study.levels[i], 0.4);
  }

  SolverConfig cfg;
  cfg.level = 4;
  cfg.horizon = 2.0;
  cfg.epsilon = 0.1;
  cfg.record_value_function = false;
  SolveResult res = solve(g, cfg);
  std::vector<double> ref = fine_single_net(g, 2.0, 1e-7);
  double err = 0.0;
  for (size_t l = 0; l < ref.size(); ++l) err = std::max(err, std::abs(ref[l] - res.values0[l]));
  double limit = (2.0 / 15.0) * std::pow(0.1, 4) * 2.0 + 1e-7 * 2.0;
  os << "; level-4 err " << err << " < " << limit;
  ok &= err < limit;
  detail = os.str() + " (order tol +/-0.4)";
  return ok;
}

// ---------------------------------------------------------------- criterion 5
bool erlang_oracle(std::string& detail) {
  NormaliseResult nr = normalise(build_erlang(), 7.0);  // lambda = 10, horizon 70
  std::vector<double> ref = fine_single_net(nr.game, nr.horizon, 1e-5);
  double ref_bound = 1e-5 * nr.horizon;

  bool ok = true;
  long long n2 = 0, n3 = 0;
  std::ostringstream os;
  for (int k : {2, 3}) {
    SolverConfig cfg;
    cfg.level = k;
    cfg.horizon = nr.horizon;
    cfg.precision = 1e-6;
    cfg.record_value_function = false;
    SolveResult res = solve(nr.game, cfg);
    (k == 2 ? n2 : n3) = res.intervals;
    double err = 0.0;
    for (size_t l = 0; l < ref.size(); ++l)
      err = std::max(err, std::abs(ref[l] - res.values0[l]));
    os << "L" << k << " err " << err << " <= " << res.value_bound + ref_bound << "; ";
    ok &= err <= res.value_bound + ref_bound;
  }
  ok &= n3 < n2;
  for (double pi : {1e-4, 1e-6, 1e-8, 1e-10}) {
    auto row = step_budget_table(nr.horizon, {pi})[0];
    ok &= row.intervals[2] < row.intervals[1];  // level 3 < level 2
  }
  os << "intervals L3 " << n3 << " < L2 " << n2;
  detail = os.str();
  return ok;
}

// ---------------------------------------------------------------- criterion 6
bool strategy_quality(std::string& detail) {
  MarkovGame g = build_running_example();
  bool ok = true;
  std::ostringstream os;
  SolveResult last;
  for (int k : {2, 3}) {
    SolverConfig cfg;
    cfg.level = k;
    cfg.horizon = 4.0;
    cfg.precision = 1e-6;
    cfg.record_value_function = false;
    SolveResult res = solve(g, cfg);
    TimedPositionalStrategy reach = extract_strategy(res, Player::Reach);
    EvaluationReport eval = evaluate_best_response(g, reach, NetLevel::get(k), 1e-8);

    NetLevel lev = NetLevel::get(k);
    double tol = (lev.value_constant.to_double() + lev.strategy_constant.to_double()) *
                     std::pow(res.epsilon, k) * 4.0 +
                 eval.bound;
    double gap = 0.0;
    for (size_t l = 0; l < res.values0.size(); ++l)
      gap = std::max(gap, std::abs(eval.values0[l] - res.values0[l]));
    os << "L" << k << " best-response gap " << gap << " <= " << tol << "; ";
    ok &= gap <= tol;
    last = res;
  }

  TimedPositionalStrategy sr = extract_strategy(last, Player::Reach);
  TimedPositionalStrategy ss = extract_strategy(last, Player::Safe);
  SimulationResult sim = simulate(g, sr, ss, 4.0, 1'000'000, 2026);
  double target = 0.0;
  for (int l = 0; l < g.num_locations(); ++l)
    target += g.locations[l].initial.to_double() * last.values0[l];
  double tol = std::max(3.0 * sim.std_error, last.value_bound + 2.0 * last.strategy_bound);
  os << "simulate " << sim.estimate << " vs " << target << " (tol " << tol << ")";
  detail = os.str();
  return ok && std::abs(sim.estimate - target) <= tol;
}

// ---------------------------------------------------------------- criterion 7
bool constant_identities(std::string& detail) {
  bool ok = NetLevel::get(1).value_constant == Rational(1) &&
            NetLevel::get(2).value_constant == Rational(2, 3) &&
            NetLevel::get(3).value_constant == Rational(1, 3) &&
            NetLevel::get(4).value_constant == Rational(2, 15) &&
            NetLevel::get(2).strategy_constant == Rational(2) &&
            NetLevel::get(3).strategy_constant == Rational(17, 6) &&
            NetLevel::get(4).strategy_constant == Rational(67, 30);
  for (int k = 2; k <= 3; ++k) {
    NetLevel cur = NetLevel::get(k), next = NetLevel::get(k + 1);
    ok &= next.value_constant == Rational(2) * cur.value_constant / Rational(k + 2);
    ok &= next.strategy_constant ==
          (Rational(8) * cur.value_constant + Rational(3) * cur.strategy_constant) /
              Rational(k + 2);
  }
  detail = "recurrences hold exactly in rational arithmetic";
  return ok;
}

// ---------------------------------------------------------------- criterion 8
bool envelope_suite(std::string& detail) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> count(2, 6);
  const double eps = 0.3;
  const int samples = 10'000;
  bool ok = true;

  auto check_set = [&](const std::vector<ActionQuality>& qs, bool maximise, bool linear) {
    Envelope env = linear ? envelope_linear(qs, eps, maximise) : envelope_poly(qs, eps, maximise);
    if (linear && env.pieces.size() > qs.size()) return false;
    for (int s = 0; s <= samples; ++s) {
      double tau = eps * s / samples;
      size_t pi = 0;
      while (pi + 1 < env.pieces.size() && env.pieces[pi + 1].tau_start <= tau) ++pi;
      const std::string& act = env.pieces[pi].action;
      double chosen = 0.0, best = maximise ? -1e300 : 1e300;
      for (const auto& q : qs) {
        double v = q.q(tau);
        if (q.action == act) chosen = v;
        best = maximise ? std::max(best, v) : std::min(best, v);
      }
      if (std::abs(chosen - best) > 1e-10) return false;
    }
    return true;
  };

  for (int trial = 0; trial < 1000 && ok; ++trial) {
    int n = count(rng);
    std::vector<ActionQuality> lin, quad;
    for (int i = 0; i < n; ++i) {
      Polynomial pl = Polynomial::linear(coeff(rng), coeff(rng));
      lin.push_back({"a" + std::to_string(i), pl});
      Polynomial pq = pl;
      pq.c[2] = coeff(rng);
      pq.refresh_degree();
      quad.push_back({"a" + std::to_string(i), pq});
    }
    bool maximise = trial % 2 == 0;
    ok &= check_set(lin, maximise, true);
    ok &= check_set(quad, maximise, false);
  }
  detail = "1000 linear + 1000 quadratic sets vs dense argopt at 1e4 points (tol 1e-10)";
  return ok;
}

// ---------------------------------------------------------------- criterion 9
bool switch_frugality(std::string& detail) {
  NormaliseResult nr = normalise(build_erlang(), 7.0);
  std::map<std::string, int> counts[2];
  int which = 0;
  for (double pi : {1e-6, 1e-8}) {
    SolverConfig cfg;
    cfg.level = 3;
    cfg.horizon = nr.horizon;
    cfg.precision = pi;
    cfg.record_value_function = false;
    SolveResult res = solve(nr.game, cfg);
    auto merge = [&](Player p) {
      SwitchPointReport rep = count_switch_points(extract_strategy(res, p));
      for (const auto& [loc, c] : rep.per_location) counts[which][loc] += c;
    };
    merge(Player::Reach);
    merge(Player::Safe);
    ++which;
  }
  bool stable = counts[0] == counts[1];

  NormaliseResult cg = normalise(build_chain_game({}), 10.0);
  SolverConfig cfg;
  cfg.level = 3;
  cfg.horizon = cg.horizon;
  cfg.precision = 1e-4;
  cfg.record_value_function = false;
  SolveResult res = solve(cg.game, cfg);
  int total = count_switch_points(extract_strategy(res, Player::Reach)).total +
              count_switch_points(extract_strategy(res, Player::Safe)).total;

  std::ostringstream os;
  os << "per-location counts " << (stable ? "stable" : "UNSTABLE")
     << " across refinement; chain-game total switches " << total << " >= 50";
  detail = os.str();
  return stable && total >= 50;
}

// --------------------------------------------------------------- criterion 10
bool uniformisation_consistency(std::string& detail) {
  // running example with all rates doubled: uniform lambda = 2
  MarkovGame g2 = build_running_example();
  g2.normed = false;
  for (auto& loc : g2.locations)
    for (auto& act : loc.actions)
      for (auto& tr : act.transitions) tr.rate = tr.rate * Rational(2);

  const double T = 2.0;
  NormaliseResult nr = normalise(g2, T);  // horizon 2T on the normed game
  bool ok = std::abs(nr.horizon - 2.0 * T) < 1e-12 && nr.lambda == Rational(2);

  SolverConfig cfg;
  cfg.level = 3;
  cfg.horizon = nr.horizon;
  cfg.precision = 1e-7;
  cfg.record_value_function = true;
  SolveResult res = solve(nr.game, cfg);

  TimedPositionalStrategy sr = scale_strategy(extract_strategy(res, Player::Reach), 0.5);
  TimedPositionalStrategy ss = scale_strategy(extract_strategy(res, Player::Safe), 0.5);
  std::vector<double> exact = transient_fixed(g2, sr, ss, T);

  double gap = 0.0;
  for (size_t l = 0; l < exact.size(); ++l)
    gap = std::max(gap, std::abs(exact[l] - res.values0[l]));
  double tol = res.value_bound + 2.0 * res.strategy_bound + 1e-9;
  ok &= gap <= tol;

  // argopt decisions of the original game coincide at corresponding times:
  // at original time t, the normed strategy's action at 2t optimises the
  // original generator applied to the value function at 2t (clear optima only)
  DerivedMatrices dm = derive(uniformise(g2));
  int agreements = 0, decisions = 0;
  for (int s = 1; s < 40; ++s) {
    double t = T * s / 40.0;
    std::vector<double> v(g2.num_locations());
    for (int l = 0; l < g2.num_locations(); ++l) v[l] = res.value_functions[l].eval(2.0 * t);
    for (int l = 0; l < g2.num_locations(); ++l) {
      const Location& loc = nr.game.locations[l];
      if (loc.actions.size() < 2) continue;
      bool maximise = loc.owner == Player::Reach;
      double best = maximise ? -1e300 : 1e300, second = best;
      int best_a = -1;
      for (size_t a = 0; a < dm.rows[l].size(); ++a) {
        double q = 0.0;
        for (const auto& [dst, w] : dm.rows[l][a].q) q += w * v[dst];
        bool better = maximise ? q > best : q < best;
        if (better) {
          second = best;
          best = q;
          best_a = static_cast<int>(a);
        } else if (maximise ? q > second : q < second) {
          second = q;
        }
      }
      if (std::abs(best - second) < 1e-5) continue;  // skip near-ties
      const auto& pieces = res.reach_strategy.pieces.count(loc.name)
                               ? res.reach_strategy.pieces.at(loc.name)
                               : res.safe_strategy.pieces.at(loc.name);
      const StrategyPiece* piece = strategy_piece_at(pieces, 2.0 * t);
      if (!piece) continue;
      ++decisions;
      if (piece->action == loc.actions[best_a].name) ++agreements;
    }
  }
  ok &= decisions > 0 && agreements == decisions;

  std::ostringstream os;
  os << "fixed-strategy gap " << gap << " <= " << tol << "; argopt agreement " << agreements
     << "/" << decisions;
  detail = os.str();
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "worked single-interval example", 0.1, worked_example},
      {2, "interval budget table", 0.01, budget_table},
      {3, "running-example switch times", 5.0, switch_times},
      {4, "empirical convergence orders", 60.0, convergence},
      {5, "phase-type model vs fine reference", 600.0, erlang_oracle},
      {6, "extracted strategy quality", 120.0, strategy_quality},
      {7, "error-constant identities", 0.0, constant_identities},
      {8, "envelope property suite", 0.0, envelope_suite},
      {9, "switch-point frugality", 0.0, switch_frugality},
      {10, "uniformisation consistency", 0.0, uniformisation_consistency},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = c.time_limit_s == 0.0 || secs < c.time_limit_s;
    bool pass = ok && in_time;
    if (!pass) ++failures;
    std::printf("[%2d] %s  %s — %s (%.3f s", c.id, pass ? "PASS" : "FAIL", c.title.c_str(),
                detail.c_str(), secs);
    if (c.time_limit_s > 0.0) std::printf(" < %g s limit", c.time_limit_s);
    std::printf(")\n");
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all 10 criteria PASSED\n");
  return failures == 0 ? 0 : 1;
}
