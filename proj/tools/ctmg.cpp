#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctmg/model.hpp"
#include "ctmg/model_io.hpp"
#include "ctmg/nets.hpp"
#include "ctmg/oracle.hpp"
#include "ctmg/strategy.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int digits = 12) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

void write_output(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << text;
}

ctmg::MarkovGame load_valid_model(const std::string& path) {
  ctmg::MarkovGame game = ctmg::load_model(path);
  ctmg::ValidationReport report = ctmg::validate(game);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "model violation: " << v << '\n';
    throw std::invalid_argument("model '" + path + "' is invalid");
  }
  return game;
}

std::string value_csv(const std::vector<std::string>& names, const std::vector<double>& values,
                      double bound, bool clamp) {
  std::ostringstream os;
  os << "location,value,lower,upper\n";
  for (size_t l = 0; l < names.size(); ++l) {
    double raw = values[l];
    double shown = clamp ? clamp01(raw) : raw;
    os << names[l] << ',' << fmt(shown) << ',' << fmt(clamp01(raw - bound)) << ','
       << fmt(clamp01(raw + bound)) << '\n';
  }
  return os.str();
}

struct SolveArgs {
  std::string model, out, strategy_out, format = "csv";
  double horizon = 0.0;
  double precision = -1.0, epsilon = -1.0;
  int level = 2;
  long long guard = 100'000'000LL;
  bool switch_points = false, clamp = false;
};

int cmd_solve(const SolveArgs& args) {
  ctmg::MarkovGame game = load_valid_model(args.model);
  ctmg::NormaliseResult nr = ctmg::normalise(game, args.horizon);
  double lam = nr.lambda.to_double();
  if (nr.lambda != ctmg::Rational(1))
    std::cerr << "lambda = " << nr.lambda.str() << ", scaled horizon = " << nr.horizon << '\n';

  ctmg::SolverConfig cfg;
  cfg.level = args.level;
  cfg.horizon = nr.horizon;
  if (args.precision > 0.0) cfg.precision = args.precision;
  if (args.epsilon > 0.0) cfg.epsilon = args.epsilon * lam;  // flag is in model time units
  cfg.guard = args.guard;
  cfg.record_value_function = false;

  auto start = std::chrono::steady_clock::now();
  ctmg::SolveResult res = ctmg::solve(nr.game, cfg);
  double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  ctmg::TimedPositionalStrategy reach = ctmg::scale_strategy(res.reach_strategy, 1.0 / lam);
  ctmg::TimedPositionalStrategy safe = ctmg::scale_strategy(res.safe_strategy, 1.0 / lam);
  ctmg::SwitchPointReport sw_reach = ctmg::count_switch_points(reach);
  ctmg::SwitchPointReport sw_safe = ctmg::count_switch_points(safe);

  if (!args.strategy_out.empty())
    write_output(args.strategy_out, ctmg::print_strategy(reach) + ctmg::print_strategy(safe));

  if (args.format == "json") {
    json j;
    j["model"] = args.model;
    j["level"] = res.level;
    j["epsilon"] = res.epsilon / lam;
    j["intervals"] = res.intervals;
    j["bound"] = res.value_bound;
    json values = json::object();
    for (size_t l = 0; l < res.location_names.size(); ++l)
      values[res.location_names[l]] = args.clamp ? clamp01(res.values0[l]) : res.values0[l];
    j["values"] = std::move(values);
    json sw = json::object();
    for (const auto* rep : {&sw_reach, &sw_safe})
      for (const auto& p : rep->points)
        sw[p.location].push_back(
            {{"time", p.time}, {"action_before", p.action_before}, {"action_after", p.action_after}});
    j["switch_points"] = std::move(sw);
    j["wall_time_ms"] = wall_ms;
    write_output(args.out, j.dump(2) + "\n");
  } else {
    std::string text = value_csv(res.location_names, res.values0, res.value_bound, args.clamp);
    if (args.switch_points) {
      std::ostringstream os;
      for (const auto* rep : {&sw_reach, &sw_safe})
        for (const auto& p : rep->points)
          os << "switch," << p.location << ',' << fmt(p.time) << ',' << p.action_before << ','
             << p.action_after << '\n';
      text += os.str();
    }
    write_output(args.out, text);
  }
  return 0;
}

struct EvaluateArgs {
  std::string model, strategy, out, format = "csv";
  double horizon = 0.0, precision = 1e-6;
  int level = 2;
  bool clamp = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  ctmg::MarkovGame game = load_valid_model(args.model);
  ctmg::NormaliseResult nr = ctmg::normalise(game, args.horizon);
  double lam = nr.lambda.to_double();

  auto strategies = ctmg::load_strategies(args.strategy);
  if (strategies.size() != 1)
    throw std::invalid_argument("strategy file must contain exactly one strategy section");
  ctmg::TimedPositionalStrategy fixed = ctmg::scale_strategy(strategies[0], lam);
  fixed.horizon = nr.horizon;
  ctmg::check_strategy_total(fixed);

  ctmg::EvaluationReport report = ctmg::evaluate_best_response(
      nr.game, fixed, ctmg::NetLevel::get(args.level), args.precision);

  if (args.format == "json") {
    json j;
    j["model"] = args.model;
    j["method"] = report.method;
    j["bound"] = report.bound;
    json values = json::object();
    for (size_t l = 0; l < report.location_names.size(); ++l)
      values[report.location_names[l]] =
          args.clamp ? clamp01(report.values0[l]) : report.values0[l];
    j["values"] = std::move(values);
    write_output(args.out, j.dump(2) + "\n");
  } else {
    write_output(args.out,
                 value_csv(report.location_names, report.values0, report.bound, args.clamp));
  }
  return 0;
}

struct SimulateArgs {
  std::string model, strategy_r, strategy_s, out;
  double horizon = 0.0;
  long long n = 100000;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& args) {
  ctmg::MarkovGame game = load_valid_model(args.model);

  auto pick_player = [](const std::string& path, ctmg::Player player) {
    for (auto& s : ctmg::load_strategies(path))
      if (s.player == player) return s;
    throw std::invalid_argument("no strategy for player '" +
                                std::string(ctmg::player_name(player)) + "' in '" + path + "'");
  };
  ctmg::TimedPositionalStrategy sr = pick_player(args.strategy_r, ctmg::Player::Reach);
  ctmg::TimedPositionalStrategy ss = pick_player(args.strategy_s, ctmg::Player::Safe);

  ctmg::SimulationResult res = ctmg::simulate(game, sr, ss, args.horizon, args.n, args.seed);
  std::ostringstream os;
  os << "estimate,lower,upper,n\n"
     << fmt(res.estimate) << ',' << fmt(res.ci_low) << ',' << fmt(res.ci_high) << ',' << res.n
     << '\n';
  write_output(args.out, os.str());
  return 0;
}

struct GenArgs {
  std::string benchmark, out;
  int stages = 30;
  std::string stage_rate = "10";
  int n = 100;
  std::string fast = "5", slow = "1", cross = "3", split_goal = "2", split_sink = "2";
};

int cmd_gen(const GenArgs& args) {
  ctmg::MarkovGame game;
  if (args.benchmark == "running-example") {
    game = ctmg::build_running_example();
  } else if (args.benchmark == "erlang") {
    game = ctmg::build_erlang(args.stages, ctmg::Rational::parse(args.stage_rate));
  } else if (args.benchmark == "chain-game") {
    ctmg::ChainGameParams params;
    params.n = args.n;
    params.fast = ctmg::Rational::parse(args.fast);
    params.slow = ctmg::Rational::parse(args.slow);
    params.cross = ctmg::Rational::parse(args.cross);
    params.split_goal = ctmg::Rational::parse(args.split_goal);
    params.split_sink = ctmg::Rational::parse(args.split_sink);
    game = ctmg::build_chain_game(params);
  } else {
    throw UsageError("unknown benchmark '" + args.benchmark + "'");
  }
  write_output(args.out, ctmg::print_model(game));
  return 0;
}

struct TableArgs {
  double horizon = 10.0;
  std::vector<double> precisions;
  std::string out;
};

int cmd_table(const TableArgs& args) {
  write_output(args.out,
               ctmg::format_budget_table(ctmg::step_budget_table(args.horizon, args.precisions)));
  return 0;
}

struct OracleArgs {
  std::string model, out;
  double horizon = 0.0, epsilon = 1e-5;
  bool clamp = false;
};

int cmd_oracle(const OracleArgs& args) {
  ctmg::MarkovGame game = load_valid_model(args.model);
  ctmg::NormaliseResult nr = ctmg::normalise(game, args.horizon);
  double eps = args.epsilon * nr.lambda.to_double();
  std::vector<double> values = ctmg::fine_single_net(nr.game, nr.horizon, eps);
  std::vector<std::string> names;
  for (const auto& loc : nr.game.locations) names.push_back(loc.name);
  write_output(args.out, value_csv(names, values, eps * nr.horizon, args.clamp));
  return 0;
}

struct NormaliseArgs {
  std::string model, out;
  double horizon = -1.0;
};

int cmd_normalise(const NormaliseArgs& args) {
  ctmg::MarkovGame game = load_valid_model(args.model);
  ctmg::NormaliseResult nr = ctmg::normalise(game, args.horizon > 0 ? args.horizon : 0.0);
  std::ostringstream os;
  os << "# lambda " << nr.lambda.str() << '\n';
  if (args.horizon > 0) os << "# scaled_horizon " << fmt(nr.horizon) << '\n';
  os << ctmg::print_model(nr.game);
  write_output(args.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-bounded reachability for continuous-time Markov games"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve a model");
  solve->add_option("--model", solve_args.model)->required();
  solve->add_option("--horizon", solve_args.horizon)->required();
  solve->add_option("--precision", solve_args.precision);
  solve->add_option("--epsilon", solve_args.epsilon);
  solve->add_option("--level", solve_args.level)->check(CLI::Range(1, 4));
  solve->add_option("--format", solve_args.format)->check(CLI::IsMember({"csv", "json"}));
  solve->add_option("--out", solve_args.out);
  solve->add_option("--strategy-out", solve_args.strategy_out);
  solve->add_option("--guard", solve_args.guard);
  solve->add_flag("--switch-points", solve_args.switch_points);
  solve->add_flag("--clamp", solve_args.clamp);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "best-response value of a fixed strategy");
  evaluate->add_option("--model", eval_args.model)->required();
  evaluate->add_option("--horizon", eval_args.horizon)->required();
  evaluate->add_option("--strategy", eval_args.strategy)->required();
  evaluate->add_option("--precision", eval_args.precision);
  evaluate->add_option("--level", eval_args.level)->check(CLI::Range(1, 4));
  evaluate->add_option("--format", eval_args.format)->check(CLI::IsMember({"csv", "json"}));
  evaluate->add_option("--out", eval_args.out);
  evaluate->add_flag("--clamp", eval_args.clamp);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate under fixed strategies");
  simulate->add_option("--model", sim_args.model)->required();
  simulate->add_option("--horizon", sim_args.horizon)->required();
  simulate->add_option("--strategy-r", sim_args.strategy_r)->required();
  simulate->add_option("--strategy-s", sim_args.strategy_s)->required();
  simulate->add_option("--n", sim_args.n);
  simulate->add_option("--seed", sim_args.seed);
  simulate->add_option("--out", sim_args.out);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "emit a benchmark model");
  gen->add_option("--benchmark", gen_args.benchmark)->required();
  gen->add_option("--stages", gen_args.stages);
  gen->add_option("--stage-rate", gen_args.stage_rate);
  gen->add_option("--n", gen_args.n);
  gen->add_option("--fast", gen_args.fast);
  gen->add_option("--slow", gen_args.slow);
  gen->add_option("--cross", gen_args.cross);
  gen->add_option("--split-goal", gen_args.split_goal);
  gen->add_option("--split-sink", gen_args.split_sink);
  gen->add_option("--out", gen_args.out);

  TableArgs table_args;
  auto* table = app.add_subcommand("table", "interval-count budget table");
  table->add_option("--horizon", table_args.horizon);
  table->add_option("--precisions", table_args.precisions)->required()->delimiter(',');
  table->add_option("--out", table_args.out);

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "fine-grid reference values");
  oracle->add_option("--model", oracle_args.model)->required();
  oracle->add_option("--horizon", oracle_args.horizon)->required();
  oracle->add_option("--epsilon", oracle_args.epsilon);
  oracle->add_option("--out", oracle_args.out);
  oracle->add_flag("--clamp", oracle_args.clamp);

  NormaliseArgs norm_args;
  auto* normalise = app.add_subcommand("normalise", "print the normed model");
  normalise->add_option("--model", norm_args.model)->required();
  normalise->add_option("--horizon", norm_args.horizon);
  normalise->add_option("--out", norm_args.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) {
      if ((solve_args.precision > 0.0) == (solve_args.epsilon > 0.0))
        throw UsageError("supply exactly one of --precision and --epsilon");
      return cmd_solve(solve_args);
    }
    if (*evaluate) return cmd_evaluate(eval_args);
    if (*simulate) return cmd_simulate(sim_args);
    if (*gen) return cmd_gen(gen_args);
    if (*table) return cmd_table(table_args);
    if (*oracle) return cmd_oracle(oracle_args);
    if (*normalise) return cmd_normalise(norm_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ctmg::GuardExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ctmg::NumericFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ctmg::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  }
  return 0;
}
