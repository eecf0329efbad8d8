#pragma once

#include <cstdint>
#include <iosfwd>

#include "ctmg/nets.hpp"

namespace ctmg {

struct SwitchPoint {
  std::string location;
  double time = 0.0;
  std::string action_before;  // action used at earlier times
  std::string action_after;
};

struct SwitchPointReport {
  std::vector<SwitchPoint> points;
  std::map<std::string, int> per_location;
  int total = 0;
};

TimedPositionalStrategy extract_strategy(const SolveResult& result, Player player);

SwitchPointReport count_switch_points(const TimedPositionalStrategy& s);

struct EvaluationReport {
  std::vector<std::string> location_names;
  std::vector<double> values0;
  std::string method;  // "best-response-nets" or "simulation"
  double bound = 0.0;  // solver error bound, or CI half-width
};

/// Value of `fixed` against an optimal opponent, via the restricted solver.
/// When `opponent` is supplied (other player), both players are pinned.
EvaluationReport evaluate_best_response(const MarkovGame& normed_game,
                                        const TimedPositionalStrategy& fixed,
                                        const NetLevel& level, double precision,
                                        const TimedPositionalStrategy* opponent = nullptr);

struct SimulationResult {
  double estimate = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% normal approximation
  double std_error = 0.0;
  long long n = 0;
};

/// Monte Carlo estimate of the reachability probability under a fixed
/// strategy pair, on a uniform (or normed) game; one deterministic RNG
/// stream per trajectory index.
SimulationResult simulate(const MarkovGame& game, const TimedPositionalStrategy& s_reach,
                          const TimedPositionalStrategy& s_safe, double horizon, long long n,
                          std::uint64_t seed);

/// Strategy file format: `strategy <reach|safe>` header, then
/// `piece <location> <t_start> <t_end> <action>` lines, >= 12 significant
/// digits on times. A file may hold one section per player.
std::string print_strategy(const TimedPositionalStrategy& s);
std::vector<TimedPositionalStrategy> parse_strategies(std::istream& in);
std::vector<TimedPositionalStrategy> parse_strategies_string(const std::string& text);
std::vector<TimedPositionalStrategy> load_strategies(const std::string& path);

/// Scales all piece times and the horizon by `factor` (time compression
/// between a model and its normed version).
TimedPositionalStrategy scale_strategy(const TimedPositionalStrategy& s, double factor);

/// Checks pieces tile [0, horizon] contiguously; throws std::invalid_argument.
void check_strategy_total(const TimedPositionalStrategy& s);

}  // namespace ctmg
