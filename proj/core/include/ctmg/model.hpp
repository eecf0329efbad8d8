#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctmg/rational.hpp"

namespace ctmg {

enum class Player { Reach, Safe };

inline const char* player_name(Player p) { return p == Player::Reach ? "reach" : "safe"; }

struct Transition {
  int dst = -1;
  Rational rate;
};

struct ModelAction {
  std::string name;
  std::vector<Transition> transitions;
  /// Absorbing placeholder: a self-loop whose rate is fixed to the uniform
  /// rate by uniformise(). Counts as enabled during validation.
  bool implicit_absorbing = false;

  Rational exit_mass() const;
  Rational offdiagonal_mass(int self) const;
};

struct Location {
  std::string name;
  Player owner = Player::Reach;
  bool goal = false;
  Rational initial;
  std::vector<ModelAction> actions;  // kept sorted by action name

  const ModelAction* find_action(const std::string& a) const;
};

struct MarkovGame {
  std::vector<Location> locations;
  /// Set only after norm certification (every enabled row sums to 1).
  bool normed = false;

  int index_of(std::string_view name) const;
  int num_locations() const { return static_cast<int>(locations.size()); }
  std::vector<double> goal_indicator() const;
  void sort_actions();
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Sparse P (embedded transition probabilities) and Q (generator) rows,
/// indexed [location][action] in model order. Diagonal entries included.
struct DerivedMatrices {
  struct Row {
    std::vector<std::pair<int, double>> p;
    std::vector<std::pair<int, double>> q;
  };
  std::vector<std::vector<Row>> rows;
};

ValidationReport validate(const MarkovGame& game);
DerivedMatrices derive(const MarkovGame& game);

/// Uniform exit rate of the game, if it has one.
std::optional<Rational> uniform_rate(const MarkovGame& game);

/// Adds self-loop mass so that every enabled action has the maximal exit
/// rate. Off-diagonal rates are untouched; values and optimal actions are
/// preserved.
MarkovGame uniformise(const MarkovGame& game, Rational* lambda_out = nullptr);

struct NormaliseResult {
  MarkovGame game;       // normed: uniform rate 1
  double horizon = 0.0;  // lambda * T
  Rational lambda;
};

/// Uniformise, rescale rates to uniform rate 1, and compress time by lambda.
NormaliseResult normalise(const MarkovGame& game, double horizon);

/// Certifies an already-normed game (throws std::invalid_argument if rows
/// do not sum to 1).
MarkovGame as_normed(MarkovGame game);

// Benchmark model builders.
MarkovGame build_running_example();
MarkovGame build_erlang(int stages = 30, Rational stage_rate = Rational(10));

struct ChainGameParams {
  int n = 100;
  Rational fast{5};
  Rational slow{1};
  Rational cross{3};
  Rational split_goal{2};
  Rational split_sink{2};
};
MarkovGame build_chain_game(const ChainGameParams& params = {});

}  // namespace ctmg
