#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmg/model.hpp"
#include "ctmg/poly.hpp"

namespace ctmg {

/// Approximation level k with its per-step error constants: the value
/// approximation satisfies a step error of c_k * eps^(k+1) and the derived
/// strategies d_k * eps^(k+1). The constants obey
///   c_{k+1} = 2 c_k / (k+2)   and   d_{k+1} = (8 c_k + 3 d_k) / (k+2).
struct NetLevel {
  int k = 1;
  Rational value_constant;
  Rational strategy_constant;

  static NetLevel get(int k);
};

struct GuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EpsilonChoice {
  double epsilon = 0.0;
  long long intervals = 0;
};

/// Smallest uniform interval count n with c_k * (T/n)^k * T <= pi, capped so
/// that epsilon <= 1. Throws GuardExceeded when n exceeds the guard.
EpsilonChoice choose_epsilon(const NetLevel& level, double horizon, double precision,
                             long long guard = 100'000'000LL);

struct BudgetRow {
  double precision = 0.0;
  std::array<long long, 4> intervals{};  // levels 1..4
};
/// Interval counts per level and precision (analytic, no guard).
std::vector<BudgetRow> step_budget_table(double horizon, const std::vector<double>& precisions);
std::string format_budget_table(const std::vector<BudgetRow>& rows);

/// Piecewise polynomial over one interval, in the interval-local variable
/// tau in [0, eps] (tau = 0 at the right endpoint). Breaks ascend.
struct TauPieces {
  std::vector<double> breaks;
  std::vector<Polynomial> polys;

  double eval(double tau) const;
  const Polynomial& poly_at(double tau) const;
};

/// Optional restriction to a single action per location (-1 = all enabled).
using ActionRestriction = std::vector<int>;

struct StepReport {
  long long interval_index = 0;
  double t_left = 0.0, t_right = 0.0;
  std::vector<std::string> chosen_action;  // level-1 argopt per location
  std::vector<double> gradient;            // level-1 descent per location
  std::vector<Envelope> envelopes;         // level-k envelopes per location
};

std::pair<std::vector<double>, StepReport> step_single(
    const MarkovGame& game, const std::vector<double>& values, double eps,
    const ActionRestriction* restriction = nullptr);

struct IntervalResult {
  std::vector<TauPieces> values;  // p_k per location over [0, eps]
  StepReport report;
};

/// One backward interval of the level-k net: the helper tower p_1 .. p_k is
/// re-anchored at the shared right-endpoint vector.
IntervalResult step_level(const MarkovGame& game, int level, const std::vector<double>& anchor,
                          double eps, const ActionRestriction* restriction = nullptr);

struct StrategyPiece {
  double t_start = 0.0, t_end = 0.0;
  std::string action;
};

/// Piecewise-constant timed-positional strategy. Pieces per location tile
/// [0, T]; each piece is half-open [t_start, t_end) except the last, which
/// is closed at T.
struct TimedPositionalStrategy {
  Player player = Player::Reach;
  double horizon = 0.0;
  std::map<std::string, std::vector<StrategyPiece>> pieces;
};

struct SolverConfig {
  int level = 2;
  double horizon = 0.0;
  std::optional<double> precision;  // exactly one of precision/epsilon
  std::optional<double> epsilon;
  long long guard = 100'000'000LL;
  bool record_value_function = true;  // disable for very large runs
};

struct SolveResult {
  std::vector<std::string> location_names;
  std::vector<double> values0;
  std::vector<PiecewiseFunction> value_functions;  // per location if recorded
  TimedPositionalStrategy reach_strategy;
  TimedPositionalStrategy safe_strategy;
  int level = 1;
  double epsilon = 0.0;
  long long intervals = 0;
  double value_bound = 0.0;     // c_k * eps^k * T
  double strategy_bound = 0.0;  // d_k * eps^k * T
};

SolveResult solve(const MarkovGame& normed_game, const SolverConfig& config);

/// As solve(), but with one or both players pinned to a fixed strategy. The
/// fixed strategies' switch times are overlaid onto the solver grid so the
/// fixed choices are honoured exactly.
SolveResult solve_restricted(const MarkovGame& normed_game, const SolverConfig& config,
                             const TimedPositionalStrategy* fixed_reach,
                             const TimedPositionalStrategy* fixed_safe);

/// Action prescribed at (pieces, t); half-open pieces, last closed.
const StrategyPiece* strategy_piece_at(const std::vector<StrategyPiece>& pieces, double t);

}  // namespace ctmg
