#pragma once

#include "ctmg/nets.hpp"
#include "ctmg/strategy.hpp"

namespace ctmg {

/// Fine-grid single-step reference: a deliberately plain forward loop kept
/// independent of the solver's envelope machinery. Global error bound
/// eps * T.
std::vector<double> fine_single_net(const MarkovGame& normed_game, double horizon, double eps,
                                    long long guard = 2'000'000'000LL);

struct TransientConfig {
  double tolerance = 1e-12;   // Poisson tail truncation
  int max_terms = 1'000'000;  // guard against pathological lambda * h
};

/// Exact-to-tolerance reachability value under a fully fixed strategy pair,
/// via the Poisson-weighted power series of the pinned transition matrix on
/// each homogeneous piece, composed backward from the goal indicator.
std::vector<double> transient_fixed(const MarkovGame& game, const TimedPositionalStrategy& s_reach,
                                    const TimedPositionalStrategy& s_safe, double horizon,
                                    const TransientConfig& cfg = {});

struct ConvergenceStudy {
  std::vector<int> levels;
  std::vector<double> epsilons;
  std::vector<std::vector<double>> errors;  // [level][epsilon], max-norm at t = 0
  std::vector<double> fitted_order;         // least-squares log-log slope per level
  std::vector<double> residual;             // RMS residual of the fit
  double eps_ref = 0.0;
};

/// Errors of solve() against a fine_single_net reference, with fitted
/// empirical convergence orders. eps_ref <= min(eps_list)^2 is required;
/// pass 0 for the default min(min(eps_list)^2, 1e-7).
ConvergenceStudy convergence_study(const MarkovGame& normed_game, double horizon,
                                   const std::vector<int>& levels,
                                   const std::vector<double>& eps_list, double eps_ref = 0.0);

/// CSV rendering (header: level,epsilon,error).
std::string study_csv(const ConvergenceStudy& study);

}  // namespace ctmg
