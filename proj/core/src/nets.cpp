#include "ctmg/nets.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>
#include <sstream>

namespace ctmg {

namespace {

constexpr double kTieTol = 1e-14;
constexpr double kBreakTol = 1e-12;

struct CompiledAction {
  int orig_index = -1;
  const std::string* name = nullptr;
  std::vector<std::pair<int, double>> offdiag;  // self-loops cancel in qualities
  double offmass = 0.0;
};

struct CompiledLoc {
  Player owner = Player::Reach;
  std::vector<CompiledAction> actions;
};

struct Compiled {
  std::vector<CompiledLoc> locs;
};

Compiled compile(const MarkovGame& game) {
  Compiled c;
  c.locs.resize(game.locations.size());
  for (int l = 0; l < game.num_locations(); ++l) {
    const Location& loc = game.locations[l];
    c.locs[l].owner = loc.owner;
    for (size_t a = 0; a < loc.actions.size(); ++a) {
      const ModelAction& act = loc.actions[a];
      if (!act.implicit_absorbing && act.exit_mass() == Rational(0)) continue;  // disabled
      CompiledAction ca;
      ca.orig_index = static_cast<int>(a);
      ca.name = &act.name;
      for (const auto& t : act.transitions) {
        if (t.dst == l) continue;
        double r = t.rate.to_double();
        ca.offdiag.emplace_back(t.dst, r);
        ca.offmass += r;
      }
      c.locs[l].actions.push_back(std::move(ca));
    }
  }
  return c;
}

// Level-1 argopt: best generator-row inner product per location; ties go to
// the lexicographically smaller action (actions are sorted by name).
void argopt(const Compiled& c, const std::vector<double>& v, const ActionRestriction* restr,
            std::vector<double>& grad, std::vector<int>& chosen) {
  int L = static_cast<int>(c.locs.size());
  grad.assign(L, 0.0);
  chosen.assign(L, -1);
  for (int l = 0; l < L; ++l) {
    const CompiledLoc& loc = c.locs[l];
    bool maximise = loc.owner == Player::Reach;
    int only = restr ? (*restr)[l] : -1;
    bool found = false;
    double best = 0.0;
    for (size_t ci = 0; ci < loc.actions.size(); ++ci) {
      const CompiledAction& ca = loc.actions[ci];
      if (only >= 0 && ca.orig_index != only) continue;
      double q = -ca.offmass * v[l];
      for (const auto& [d, r] : ca.offdiag) q += r * v[d];
      if (!maximise) q = -q;
      if (!found || q > best + kTieTol) {
        found = true;
        best = q;
        chosen[l] = static_cast<int>(ci);
      }
    }
    if (!found) throw NumericFailure("no enabled action at location index " + std::to_string(l));
    grad[l] = maximise ? best : -best;
  }
}

void fill_report(const Compiled& c, const std::vector<double>& grad, const std::vector<int>& chosen,
                 StepReport& report) {
  int L = static_cast<int>(c.locs.size());
  report.chosen_action.resize(L);
  report.gradient = grad;
  for (int l = 0; l < L; ++l) report.chosen_action[l] = *c.locs[l].actions[chosen[l]].name;
}

void append_env(Envelope& env, const std::string& action, double tau) {
  if (!env.pieces.empty() && env.pieces.back().action == action) return;
  env.pieces.push_back({action, tau});
}

IntervalResult step_level_impl(const Compiled& c, int k, const std::vector<double>& anchor,
                               double eps, const ActionRestriction* restr) {
  int L = static_cast<int>(c.locs.size());
  IntervalResult res;
  res.report.t_left = 0.0;
  res.report.t_right = eps;

  std::vector<double> grad;
  std::vector<int> chosen;
  argopt(c, anchor, restr, grad, chosen);
  fill_report(c, grad, chosen, res.report);
  res.report.envelopes.resize(L);

  std::vector<TauPieces> prev(L);
  for (int l = 0; l < L; ++l) {
    prev[l].breaks = {0.0, eps};
    prev[l].polys = {Polynomial::linear(anchor[l], grad[l])};
  }
  if (k == 1) {
    for (int l = 0; l < L; ++l)
      res.report.envelopes[l].pieces.push_back({res.report.chosen_action[l], 0.0});
    res.values = std::move(prev);
    return res;
  }

  std::vector<ActionQuality> qualities;
  std::vector<double> cuts;
  for (int j = 2; j <= k; ++j) {
    bool final_level = (j == k);
    cuts.clear();
    for (int l = 0; l < L; ++l)
      cuts.insert(cuts.end(), prev[l].breaks.begin(), prev[l].breaks.end());
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> cells;
    for (double x : cuts)
      if (cells.empty() || x - cells.back() > kBreakTol) cells.push_back(x);
    cells.front() = 0.0;
    cells.back() = eps;

    std::vector<TauPieces> next(L);
    for (int l = 0; l < L; ++l) {
      const CompiledLoc& loc = c.locs[l];
      bool maximise = loc.owner == Player::Reach;
      int only = restr ? (*restr)[l] : -1;
      TauPieces& out = next[l];
      out.breaks.push_back(0.0);
      double running = anchor[l];
      Envelope& env_out = res.report.envelopes[l];
      if (final_level) env_out.pieces.clear();

      auto integrate = [&](const Polynomial& q, double s, double e) {
        Polynomial F = q.antiderivative(0.0);
        F.c[0] += running - F(s);
        F.refresh_degree();
        out.breaks.push_back(e);
        out.polys.push_back(F);
        running = F(e);
      };

      for (size_t ci = 0; ci + 1 < cells.size(); ++ci) {
        double u = cells[ci], w = cells[ci + 1];
        if (w - u <= kBreakTol) continue;
        double mid = 0.5 * (u + w);
        qualities.clear();
        for (const CompiledAction& ca : loc.actions) {
          if (only >= 0 && ca.orig_index != only) continue;
          Polynomial q = prev[l].poly_at(mid) * (-ca.offmass);
          for (const auto& [d, r] : ca.offdiag) q = q + prev[d].poly_at(mid) * r;
          qualities.push_back({*ca.name, q});
        }
        if (qualities.empty())
          throw NumericFailure("no enabled action at location index " + std::to_string(l));
        if (qualities.size() == 1) {
          integrate(qualities[0].q, u, w);
          if (final_level) append_env(env_out, qualities[0].action, u);
          continue;
        }
        Envelope env = detail::envelope_range(qualities, u, w, maximise);
        for (size_t pi = 0; pi < env.pieces.size(); ++pi) {
          double s = env.pieces[pi].tau_start;
          double e = (pi + 1 < env.pieces.size()) ? env.pieces[pi + 1].tau_start : w;
          const Polynomial* qp = nullptr;
          for (const auto& aq : qualities)
            if (aq.action == env.pieces[pi].action) {
              qp = &aq.q;
              break;
            }
          if (!qp) throw NumericFailure("envelope action not among qualities");
          integrate(*qp, s, e);
          if (final_level) append_env(env_out, env.pieces[pi].action, s);
        }
      }
      out.breaks.back() = eps;
    }
    prev = std::move(next);
  }
  res.values = std::move(prev);
  return res;
}

}  // namespace

NetLevel NetLevel::get(int k) {
  switch (k) {
    case 1:
      return {1, Rational(1), Rational(2)};
    case 2:
      return {2, Rational(2, 3), Rational(2)};
    case 3:
      return {3, Rational(1, 3), Rational(17, 6)};
    case 4:
      return {4, Rational(2, 15), Rational(67, 30)};
    default:
      throw std::invalid_argument("NetLevel: k must be in {1,2,3,4}");
  }
}

double TauPieces::eval(double tau) const { return poly_at(tau)(tau); }

const Polynomial& TauPieces::poly_at(double tau) const {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), tau);
  long i = (it - breaks.begin()) - 1;
  if (i < 0) i = 0;
  if (i >= static_cast<long>(polys.size())) i = static_cast<long>(polys.size()) - 1;
  return polys[static_cast<size_t>(i)];
}

static long long intervals_for(const NetLevel& level, double T, double pi) {
  long double c = static_cast<long double>(level.value_constant.num()) /
                  static_cast<long double>(level.value_constant.den());
  long double x = static_cast<long double>(T) *
                  powl(c * static_cast<long double>(T) / static_cast<long double>(pi),
                       1.0L / level.k);
  long double r = roundl(x);
  long long n;
  if (fabsl(x - r) <= 1e-9L * fmaxl(1.0L, fabsl(x)))
    n = static_cast<long long>(r);
  else
    n = static_cast<long long>(ceill(x));
  if (n < 1) n = 1;
  // the error bounds require eps <= 1
  long long min_n = static_cast<long long>(ceill(static_cast<long double>(T)));
  if (n < min_n) n = min_n;
  // nudge up if rounding left the bound violated
  auto bound = [&](long long m) {
    long double e = static_cast<long double>(T) / static_cast<long double>(m);
    return c * powl(e, level.k) * static_cast<long double>(T);
  };
  int iters = 0;
  while (bound(n) > static_cast<long double>(pi) * (1.0L + 1e-12L) && iters++ < 64) ++n;
  return n;
}

EpsilonChoice choose_epsilon(const NetLevel& level, double horizon, double precision,
                             long long guard) {
  if (!(horizon > 0.0)) throw std::invalid_argument("choose_epsilon: horizon must be > 0");
  if (!(precision > 0.0 && precision < 1.0))
    throw std::invalid_argument("choose_epsilon: precision must be in (0,1)");
  long long n = intervals_for(level, horizon, precision);
  if (n > guard)
    throw GuardExceeded("interval count " + std::to_string(n) + " exceeds guard " +
                        std::to_string(guard));
  return {horizon / static_cast<double>(n), n};
}

std::vector<BudgetRow> step_budget_table(double horizon, const std::vector<double>& precisions) {
  std::vector<BudgetRow> rows;
  for (double pi : precisions) {
    BudgetRow row;
    row.precision = pi;
    for (int k = 1; k <= 4; ++k) row.intervals[k - 1] = intervals_for(NetLevel::get(k), horizon, pi);
    rows.push_back(row);
  }
  return rows;
}

std::string format_budget_table(const std::vector<BudgetRow>& rows) {
  std::ostringstream os;
  os << "precision,level1,level2,level3,level4\n";
  for (const auto& row : rows) {
    os << row.precision;
    for (long long n : row.intervals) os << ',' << n;
    os << '\n';
  }
  return os.str();
}

std::pair<std::vector<double>, StepReport> step_single(const MarkovGame& game,
                                                       const std::vector<double>& values,
                                                       double eps,
                                                       const ActionRestriction* restriction) {
  Compiled c = compile(game);
  std::vector<double> grad;
  std::vector<int> chosen;
  argopt(c, values, restriction, grad, chosen);
  StepReport report;
  report.t_left = 0.0;
  report.t_right = eps;
  fill_report(c, grad, chosen, report);
  report.envelopes.resize(c.locs.size());
  std::vector<double> out(values);
  for (size_t l = 0; l < out.size(); ++l) {
    out[l] += eps * grad[l];
    report.envelopes[l].pieces.push_back({report.chosen_action[l], 0.0});
  }
  return {std::move(out), std::move(report)};
}

IntervalResult step_level(const MarkovGame& game, int level, const std::vector<double>& anchor,
                          double eps, const ActionRestriction* restriction) {
  if (level < 1 || level > 4) throw std::invalid_argument("step_level: level must be in {1..4}");
  Compiled c = compile(game);
  return step_level_impl(c, level, anchor, eps, restriction);
}

const StrategyPiece* strategy_piece_at(const std::vector<StrategyPiece>& pieces, double t) {
  if (pieces.empty()) return nullptr;
  // half-open pieces, the last one closed at its end
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                             [](double x, const StrategyPiece& p) { return x < p.t_end; });
  if (it == pieces.end()) {
    const StrategyPiece& last = pieces.back();
    return (t <= last.t_end + 1e-9) ? &last : nullptr;
  }
  return (t >= it->t_start - 1e-9) ? &*it : nullptr;
}

namespace {

// Per-subinterval action restriction derived from a fixed strategy.
struct FixedOverlay {
  const TimedPositionalStrategy* strategy = nullptr;
  // location index -> (pieces, per-piece original action index)
  std::vector<const std::vector<StrategyPiece>*> pieces_by_loc;
  std::vector<std::vector<int>> action_by_loc;
};

FixedOverlay prepare_overlay(const MarkovGame& game, const TimedPositionalStrategy& s) {
  FixedOverlay ov;
  ov.strategy = &s;
  ov.pieces_by_loc.assign(game.locations.size(), nullptr);
  ov.action_by_loc.resize(game.locations.size());
  for (const auto& [name, pieces] : s.pieces) {
    int l = game.index_of(name);
    if (l < 0) throw std::invalid_argument("strategy references unknown location '" + name + "'");
    const Location& loc = game.locations[l];
    if (loc.owner != s.player)
      throw std::invalid_argument("strategy for player '" + std::string(player_name(s.player)) +
                                  "' covers location '" + name + "' owned by the other player");
    std::vector<int> acts;
    for (const auto& piece : pieces) {
      int a = -1;
      for (size_t i = 0; i < loc.actions.size(); ++i)
        if (loc.actions[i].name == piece.action) {
          a = static_cast<int>(i);
          break;
        }
      if (a < 0)
        throw std::invalid_argument("strategy action '" + piece.action +
                                    "' is not enabled at location '" + name + "'");
      acts.push_back(a);
    }
    ov.pieces_by_loc[l] = &pieces;
    ov.action_by_loc[l] = std::move(acts);
  }
  // every owned location with a real choice must be covered
  for (int l = 0; l < game.num_locations(); ++l) {
    const Location& loc = game.locations[l];
    if (loc.owner != s.player || ov.pieces_by_loc[l]) continue;
    int enabled = 0;
    for (const auto& act : loc.actions)
      if (act.implicit_absorbing || act.exit_mass() > Rational(0)) ++enabled;
    if (enabled > 1)
      throw std::invalid_argument("strategy does not cover location '" + loc.name + "'");
  }
  return ov;
}

void apply_overlay(const FixedOverlay& ov, double t_mid, ActionRestriction& restr) {
  for (size_t l = 0; l < ov.pieces_by_loc.size(); ++l) {
    const auto* pieces = ov.pieces_by_loc[l];
    if (!pieces) continue;
    const StrategyPiece* p = strategy_piece_at(*pieces, t_mid);
    if (!p)
      throw std::invalid_argument("strategy does not cover time " + std::to_string(t_mid) +
                                  " at location index " + std::to_string(l));
    restr[static_cast<int>(l)] = ov.action_by_loc[l][p - pieces->data()];
  }
}

SolveResult solve_core(const MarkovGame& game, const SolverConfig& config, long long n,
                       double eps, const TimedPositionalStrategy* fixed_reach,
                       const TimedPositionalStrategy* fixed_safe) {
  const double T = config.horizon;
  const int L = game.num_locations();
  const NetLevel level = NetLevel::get(config.level);

  Compiled c = compile(game);

  // Subinterval boundaries, descending from T to 0: the uniform grid, plus
  // any fixed-strategy switch times so pinned choices are honoured exactly.
  std::vector<double> bounds;
  bounds.reserve(static_cast<size_t>(n) + 1);
  for (long long i = n; i >= 0; --i)
    bounds.push_back(T * static_cast<double>(i) / static_cast<double>(n));
  std::optional<FixedOverlay> ov_reach, ov_safe;
  if (fixed_reach) ov_reach = prepare_overlay(game, *fixed_reach);
  if (fixed_safe) ov_safe = prepare_overlay(game, *fixed_safe);
  if (fixed_reach || fixed_safe) {
    std::vector<double> extra;
    for (const TimedPositionalStrategy* s : {fixed_reach, fixed_safe}) {
      if (!s) continue;
      for (const auto& [name, pieces] : s->pieces)
        for (size_t i = 1; i < pieces.size(); ++i)
          if (pieces[i].t_start > 0.0 && pieces[i].t_start < T) extra.push_back(pieces[i].t_start);
    }
    bounds.insert(bounds.end(), extra.begin(), extra.end());
    std::sort(bounds.begin(), bounds.end(), std::greater<double>());
    std::vector<double> merged;
    for (double x : bounds)
      if (merged.empty() || merged.back() - x > kBreakTol) merged.push_back(x);
    merged.front() = T;
    merged.back() = 0.0;
    bounds = std::move(merged);
  }

  std::vector<double> v = game.goal_indicator();
  std::vector<std::vector<StrategyPiece>> acc(L);  // per location, descending in time
  std::vector<PiecewiseFunction> vf;
  if (config.record_value_function) {
    vf.resize(L);
    for (auto& f : vf) f.breaks.push_back(T);
  }

  const double merge_tol = 1e-9 * std::max(1.0, T);
  auto push_piece = [&](int l, double a, double b, const std::string& act) {
    auto& ps = acc[l];
    if (!ps.empty() && ps.back().action == act && std::abs(ps.back().t_start - b) <= merge_tol) {
      ps.back().t_start = a;
      return;
    }
    ps.push_back({a, b, act});
  };

  ActionRestriction restr(L, -1);
  bool have_restr = fixed_reach || fixed_safe;
  std::vector<double> grad;
  std::vector<int> chosen;

  for (size_t step = 0; step + 1 < bounds.size(); ++step) {
    double t_r = bounds[step], t_l = bounds[step + 1];
    double h = t_r - t_l;
    if (h <= kBreakTol) continue;
    try {
      if (have_restr) {
        std::fill(restr.begin(), restr.end(), -1);
        double mid = 0.5 * (t_l + t_r);
        if (ov_reach) apply_overlay(*ov_reach, mid, restr);
        if (ov_safe) apply_overlay(*ov_safe, mid, restr);
      }
      if (config.level == 1) {
        argopt(c, v, have_restr ? &restr : nullptr, grad, chosen);
        for (int l = 0; l < L; ++l) {
          push_piece(l, t_l, t_r, *c.locs[l].actions[chosen[l]].name);
          if (config.record_value_function) {
            vf[l].breaks.push_back(t_l);
            vf[l].pieces.push_back(Polynomial::linear(v[l], grad[l]));
          }
          v[l] += h * grad[l];
        }
      } else {
        IntervalResult ir = step_level_impl(c, config.level, v, h, have_restr ? &restr : nullptr);
        for (int l = 0; l < L; ++l) {
          const Envelope& env = ir.report.envelopes[l];
          for (size_t pi = 0; pi < env.pieces.size(); ++pi) {
            double s = env.pieces[pi].tau_start;
            double e = (pi + 1 < env.pieces.size()) ? env.pieces[pi + 1].tau_start : h;
            push_piece(l, t_r - e, t_r - s, env.pieces[pi].action);
          }
          if (config.record_value_function) {
            const TauPieces& tp = ir.values[l];
            for (size_t j = 0; j < tp.polys.size(); ++j) {
              vf[l].breaks.push_back(t_r - tp.breaks[j + 1]);
              vf[l].pieces.push_back(tp.polys[j].shifted(tp.breaks[j]));
            }
          }
          v[l] = ir.values[l].eval(h);
        }
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericFailure("interval " + std::to_string(step) + " [" + std::to_string(t_l) + ", " +
                           std::to_string(t_r) + "]: " + e.what());
    }
  }

  SolveResult result;
  result.level = config.level;
  result.epsilon = eps;
  result.intervals = n;
  double epk = std::pow(eps, config.level);
  result.value_bound = level.value_constant.to_double() * epk * T;
  result.strategy_bound = level.strategy_constant.to_double() * epk * T;
  result.values0 = v;
  result.location_names.resize(L);
  for (int l = 0; l < L; ++l) result.location_names[l] = game.locations[l].name;
  if (config.record_value_function) {
    for (auto& f : vf)
      if (!f.breaks.empty()) f.breaks.back() = 0.0;
    result.value_functions = std::move(vf);
  }
  result.reach_strategy.player = Player::Reach;
  result.safe_strategy.player = Player::Safe;
  result.reach_strategy.horizon = result.safe_strategy.horizon = T;
  for (int l = 0; l < L; ++l) {
    auto& ps = acc[l];
    if (ps.empty()) continue;
    std::reverse(ps.begin(), ps.end());
    ps.front().t_start = 0.0;
    ps.back().t_end = T;
    auto& target = game.locations[l].owner == Player::Reach ? result.reach_strategy
                                                            : result.safe_strategy;
    target.pieces[game.locations[l].name] = std::move(ps);
  }
  return result;
}

std::pair<long long, double> grid_from_config(const SolverConfig& config, const NetLevel& level) {
  const double T = config.horizon;
  if (!(T > 0.0)) throw std::invalid_argument("solve: horizon must be > 0");
  if (config.precision.has_value() == config.epsilon.has_value())
    throw std::invalid_argument("solve: supply exactly one of precision and epsilon");
  long long n;
  if (config.precision) {
    EpsilonChoice ch = choose_epsilon(level, T, *config.precision, config.guard);
    n = ch.intervals;
  } else {
    double e = *config.epsilon;
    if (!(e > 0.0)) throw std::invalid_argument("solve: epsilon must be > 0");
    if (e > 1.0) e = 1.0;
    n = static_cast<long long>(std::ceil(T / e - 1e-9));
    if (n < 1) n = 1;
    if (n > config.guard)
      throw GuardExceeded("interval count " + std::to_string(n) + " exceeds guard " +
                          std::to_string(config.guard));
  }
  return {n, T / static_cast<double>(n)};
}

}  // namespace

SolveResult solve(const MarkovGame& normed_game, const SolverConfig& config) {
  if (!normed_game.normed) throw std::invalid_argument("solve: game must be normed");
  auto [n, eps] = grid_from_config(config, NetLevel::get(config.level));
  return solve_core(normed_game, config, n, eps, nullptr, nullptr);
}

SolveResult solve_restricted(const MarkovGame& normed_game, const SolverConfig& config,
                             const TimedPositionalStrategy* fixed_reach,
                             const TimedPositionalStrategy* fixed_safe) {
  if (!normed_game.normed) throw std::invalid_argument("solve: game must be normed");
  auto [n, eps] = grid_from_config(config, NetLevel::get(config.level));
  return solve_core(normed_game, config, n, eps, fixed_reach, fixed_safe);
}

}  // namespace ctmg
