#include "ctmg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ctmg {

namespace {

// Plain off-diagonal rate rows, the only model data the reference loop uses.
struct PlainRows {
  struct Action {
    std::vector<std::pair<int, double>> offdiag;
    double offmass = 0.0;
  };
  std::vector<std::vector<Action>> rows;
  std::vector<bool> maximise;
};

PlainRows plain_rows(const MarkovGame& game) {
  PlainRows pr;
  pr.rows.resize(game.locations.size());
  pr.maximise.resize(game.locations.size());
  for (int l = 0; l < game.num_locations(); ++l) {
    pr.maximise[l] = game.locations[l].owner == Player::Reach;
    for (const auto& act : game.locations[l].actions) {
      if (!act.implicit_absorbing && act.exit_mass() == Rational(0)) continue;
      PlainRows::Action a;
      for (const auto& t : act.transitions) {
        if (t.dst == l) continue;
        a.offdiag.emplace_back(t.dst, t.rate.to_double());
        a.offmass += t.rate.to_double();
      }
      pr.rows[l].push_back(std::move(a));
    }
  }
  return pr;
}

}  // namespace

std::vector<double> fine_single_net(const MarkovGame& normed_game, double horizon, double eps,
                                    long long guard) {
  if (!normed_game.normed) throw std::invalid_argument("fine_single_net: game must be normed");
  if (horizon < 0.0) throw std::invalid_argument("fine_single_net: horizon must be >= 0");
  std::vector<double> v = normed_game.goal_indicator();
  if (horizon == 0.0) return v;
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("fine_single_net: eps must be in (0, 1]");

  long long n = static_cast<long long>(std::ceil(horizon / eps - 1e-9));
  if (n < 1) n = 1;
  if (n > guard)
    throw GuardExceeded("fine_single_net: " + std::to_string(n) + " steps exceed guard");
  double h = horizon / static_cast<double>(n);

  PlainRows pr = plain_rows(normed_game);
  size_t L = v.size();
  std::vector<double> next(L);
  for (long long i = 0; i < n; ++i) {
    for (size_t l = 0; l < L; ++l) {
      bool first = true;
      double best = 0.0;
      for (const auto& a : pr.rows[l]) {
        double q = -a.offmass * v[l];
        for (const auto& [d, r] : a.offdiag) q += r * v[d];
        if (first || (pr.maximise[l] ? q > best : q < best)) {
          best = q;
          first = false;
        }
      }
      next[l] = v[l] + h * best;
    }
    v.swap(next);
  }
  return v;
}

namespace {

// Poisson(mu) weights 0..N covering mass >= 1 - tolerance, computed by
// upward/downward recurrence from the mode and renormalised.
std::vector<double> poisson_weights(double mu, double tolerance, int max_terms) {
  if (mu <= 0.0) return {1.0};
  int mode = static_cast<int>(mu);
  std::vector<double> up;  // weights from mode upward (unnormalised)
  up.push_back(1.0);
  double w = 1.0;
  for (int j = mode + 1; w > 1e-30 || j < mu; ++j) {
    if (static_cast<int>(up.size()) > max_terms)
      throw GuardExceeded("transient_fixed: Poisson term guard exceeded");
    w *= mu / static_cast<double>(j);
    up.push_back(w);
  }
  std::vector<double> down;  // weights from mode-1 downward
  w = 1.0;
  for (int j = mode; j >= 1; --j) {
    w *= static_cast<double>(j) / mu;
    down.push_back(w);
    if (w < 1e-30) break;
  }
  std::vector<double> all(down.rbegin(), down.rend());
  int offset = mode - static_cast<int>(down.size());
  all.insert(all.end(), up.begin(), up.end());
  double total = 0.0;
  for (double x : all) total += x;
  std::vector<double> weights(static_cast<size_t>(offset), 0.0);
  weights.reserve(offset + all.size());
  for (double x : all) weights.push_back(x / total);
  // truncate once cumulative mass reaches 1 - tolerance
  double cum = 0.0;
  for (size_t j = 0; j < weights.size(); ++j) {
    cum += weights[j];
    if (cum >= 1.0 - tolerance) {
      weights.resize(j + 1);
      break;
    }
  }
  return weights;
}

}  // namespace

std::vector<double> transient_fixed(const MarkovGame& game, const TimedPositionalStrategy& s_reach,
                                    const TimedPositionalStrategy& s_safe, double horizon,
                                    const TransientConfig& cfg) {
  if (!(cfg.tolerance > 0.0 && cfg.tolerance < 1.0))
    throw std::invalid_argument("transient_fixed: tolerance must be in (0,1)");
  if (horizon < 0.0) throw std::invalid_argument("transient_fixed: horizon must be >= 0");

  Rational lambda;
  MarkovGame u = uniformise(game, &lambda);
  double lam = lambda.to_double();
  DerivedMatrices dm = derive(u);
  const int L = u.num_locations();

  std::vector<double> v = u.goal_indicator();
  if (horizon == 0.0) return v;

  // segment boundaries: 0, T, and all interior switch times
  std::vector<double> cuts{0.0, horizon};
  for (const TimedPositionalStrategy* s : {&s_reach, &s_safe})
    for (const auto& [name, pieces] : s->pieces)
      for (size_t i = 1; i < pieces.size(); ++i)
        if (pieces[i].t_start > 0.0 && pieces[i].t_start < horizon)
          cuts.push_back(pieces[i].t_start);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             cuts.end());

  // per-location strategy lookup (single-action fallback)
  std::vector<const std::vector<StrategyPiece>*> pieces_by_loc(L, nullptr);
  std::vector<int> single(L, -1);
  for (const TimedPositionalStrategy* s : {&s_reach, &s_safe})
    for (const auto& [name, pieces] : s->pieces) {
      int l = u.index_of(name);
      if (l < 0) throw std::invalid_argument("strategy references unknown location '" + name + "'");
      if (u.locations[l].owner != s->player)
        throw std::invalid_argument("strategy covers location '" + name +
                                    "' owned by the other player");
      pieces_by_loc[l] = &pieces;
    }
  for (int l = 0; l < L; ++l) {
    if (pieces_by_loc[l]) continue;
    int only = -1, enabled = 0;
    const auto& actions = u.locations[l].actions;
    for (size_t a = 0; a < actions.size(); ++a)
      if (actions[a].implicit_absorbing || actions[a].exit_mass() > Rational(0)) {
        ++enabled;
        only = static_cast<int>(a);
      }
    if (enabled != 1)
      throw std::invalid_argument("no strategy covers location '" + u.locations[l].name + "'");
    single[l] = only;
  }

  std::vector<double> term(L), acc(L), tmp(L);
  for (size_t seg = cuts.size() - 1; seg >= 1; --seg) {
    double t_l = cuts[seg - 1], t_r = cuts[seg];
    double h = t_r - t_l;
    double mid = 0.5 * (t_l + t_r);

    // pin the transition matrix for this homogeneous piece
    std::vector<const std::vector<std::pair<int, double>>*> row(L);
    for (int l = 0; l < L; ++l) {
      int a = single[l];
      if (a < 0) {
        const StrategyPiece* p = strategy_piece_at(*pieces_by_loc[l], mid);
        if (!p)
          throw std::invalid_argument("strategy does not cover time " + std::to_string(mid) +
                                      " at '" + u.locations[l].name + "'");
        a = -1;
        for (size_t i = 0; i < u.locations[l].actions.size(); ++i)
          if (u.locations[l].actions[i].name == p->action) {
            a = static_cast<int>(i);
            break;
          }
        if (a < 0)
          throw std::invalid_argument("strategy action '" + p->action + "' is not enabled at '" +
                                      u.locations[l].name + "'");
      }
      row[l] = &dm.rows[l][static_cast<size_t>(a)].p;
      // probability conservation of the pinned row
      double sum = 0.0;
      for (const auto& [dst, p] : *row[l]) sum += p;
      if (std::abs(sum - 1.0) > 1e-12)
        throw NumericFailure("pinned transition row does not conserve probability");
    }

    std::vector<double> weights = poisson_weights(lam * h, cfg.tolerance, cfg.max_terms);
    term = v;
    for (int l = 0; l < L; ++l) acc[l] = weights[0] * term[l];
    for (size_t j = 1; j < weights.size(); ++j) {
      for (int l = 0; l < L; ++l) {
        double s = 0.0;
        for (const auto& [dst, p] : *row[l]) s += p * term[dst];
        tmp[l] = s;
      }
      term.swap(tmp);
      for (int l = 0; l < L; ++l) acc[l] += weights[j] * term[l];
    }
    v = acc;
  }
  return v;
}

ConvergenceStudy convergence_study(const MarkovGame& normed_game, double horizon,
                                   const std::vector<int>& levels,
                                   const std::vector<double>& eps_list, double eps_ref) {
  if (eps_list.empty()) throw std::invalid_argument("convergence_study: empty epsilon list");
  double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  if (eps_ref <= 0.0) eps_ref = std::min(eps_min * eps_min, 1e-7);
  if (eps_ref > eps_min * eps_min + 1e-15)
    throw std::invalid_argument("convergence_study: eps_ref must be <= min(eps)^2");

  ConvergenceStudy study;
  study.levels = levels;
  study.epsilons = eps_list;
  study.eps_ref = eps_ref;

  std::vector<double> ref = fine_single_net(normed_game, horizon, eps_ref);

  for (int k : levels) {
    std::vector<double> errs;
    for (double eps : eps_list) {
      SolverConfig cfg;
      cfg.level = k;
      cfg.horizon = horizon;
      cfg.epsilon = eps;
      cfg.record_value_function = false;
      SolveResult res = solve(normed_game, cfg);
      double err = 0.0;
      for (size_t l = 0; l < ref.size(); ++l) err = std::max(err, std::abs(res.values0[l] - ref[l]));
      errs.push_back(err);
    }
    // least-squares slope of log(error) vs log(eps)
    double order = std::numeric_limits<double>::quiet_NaN(), resid = 0.0;
    size_t m = errs.size();
    if (m >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (size_t i = 0; i < m; ++i) {
        double x = std::log(eps_list[i]), y = std::log(std::max(errs[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      double dm = m * sxx - sx * sx;
      order = (m * sxy - sx * sy) / dm;
      double b = (sy - order * sx) / m;
      for (size_t i = 0; i < m; ++i) {
        double d = std::log(std::max(errs[i], 1e-300)) - (order * std::log(eps_list[i]) + b);
        resid += d * d;
      }
      resid = std::sqrt(resid / m);
    }
    study.errors.push_back(std::move(errs));
    study.fitted_order.push_back(order);
    study.residual.push_back(resid);
  }
  return study;
}

std::string study_csv(const ConvergenceStudy& study) {
  std::ostringstream os;
  os.precision(12);
  os << "level,epsilon,error\n";
  for (size_t i = 0; i < study.levels.size(); ++i)
    for (size_t j = 0; j < study.epsilons.size(); ++j)
      os << study.levels[i] << ',' << study.epsilons[j] << ',' << study.errors[i][j] << '\n';
  return os.str();
}

}  // namespace ctmg
