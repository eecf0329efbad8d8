#include "ctmg/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctmg {

Rational ModelAction::exit_mass() const {
  Rational m;
  for (const auto& t : transitions) m += t.rate;
  return m;
}

Rational ModelAction::offdiagonal_mass(int self) const {
  Rational m;
  for (const auto& t : transitions)
    if (t.dst != self) m += t.rate;
  return m;
}

const ModelAction* Location::find_action(const std::string& a) const {
  for (const auto& act : actions)
    if (act.name == a) return &act;
  return nullptr;
}

int MarkovGame::index_of(std::string_view name) const {
  for (int i = 0; i < num_locations(); ++i)
    if (locations[i].name == name) return i;
  return -1;
}

std::vector<double> MarkovGame::goal_indicator() const {
  std::vector<double> v(locations.size(), 0.0);
  for (size_t i = 0; i < locations.size(); ++i)
    if (locations[i].goal) v[i] = 1.0;
  return v;
}

void MarkovGame::sort_actions() {
  for (auto& loc : locations)
    std::sort(loc.actions.begin(), loc.actions.end(),
              [](const ModelAction& a, const ModelAction& b) { return a.name < b.name; });
}

ValidationReport validate(const MarkovGame& game) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  if (game.locations.empty()) {
    fail("model has no locations");
    return report;
  }

  Rational init_sum;
  for (int i = 0; i < game.num_locations(); ++i) {
    const Location& loc = game.locations[i];
    init_sum += loc.initial;
    if (loc.initial < Rational(0) || loc.initial > Rational(1))
      fail("initial probability of '" + loc.name + "' outside [0,1]");

    if (loc.actions.empty()) {
      fail("location '" + loc.name + "' has no actions");
      continue;
    }
    bool enabled = false;
    for (const auto& act : loc.actions) {
      for (const auto& t : act.transitions) {
        if (t.dst < 0 || t.dst >= game.num_locations())
          fail("rate from '" + loc.name + "' targets unknown location");
        if (t.rate < Rational(0))
          fail("negative rate at '" + loc.name + "' action '" + act.name + "'");
      }
      if (act.implicit_absorbing || act.exit_mass() > Rational(0)) enabled = true;
    }
    if (!enabled) fail("location '" + loc.name + "' has no enabled action");
  }

  double init_err = std::abs(init_sum.to_double() - 1.0);
  if (init_err > 1e-12) fail("initial distribution sums to " + init_sum.str() + ", not 1");

  if (!report.ok()) return report;

  // P rows must sum to 1 and Q rows to 0 for enabled actions.
  DerivedMatrices dm = derive(game);
  for (int l = 0; l < game.num_locations(); ++l) {
    for (size_t a = 0; a < game.locations[l].actions.size(); ++a) {
      const auto& row = dm.rows[l][a];
      if (row.p.empty()) continue;  // disabled action
      double psum = 0.0, qsum = 0.0;
      for (auto& [dst, v] : row.p) psum += v;
      for (auto& [dst, v] : row.q) qsum += v;
      if (std::abs(psum - 1.0) > 1e-12)
        fail("P row of '" + game.locations[l].name + "' action '" +
             game.locations[l].actions[a].name + "' does not sum to 1");
      if (std::abs(qsum) > 1e-12)
        fail("Q row of '" + game.locations[l].name + "' action '" +
             game.locations[l].actions[a].name + "' does not sum to 0");
    }
  }
  return report;
}

DerivedMatrices derive(const MarkovGame& game) {
  DerivedMatrices dm;
  dm.rows.resize(game.num_locations());
  for (int l = 0; l < game.num_locations(); ++l) {
    const Location& loc = game.locations[l];
    dm.rows[l].resize(loc.actions.size());
    for (size_t a = 0; a < loc.actions.size(); ++a) {
      const ModelAction& act = loc.actions[a];
      auto& row = dm.rows[l][a];
      Rational mass = act.exit_mass();
      if (act.implicit_absorbing) {
        row.p.emplace_back(l, 1.0);
        row.q.emplace_back(l, 0.0);
        continue;
      }
      if (mass == Rational(0)) continue;  // not enabled: P row stays 0
      double diag_q = 0.0;
      bool has_self = false;
      for (const auto& t : act.transitions) {
        row.p.emplace_back(t.dst, (t.rate / mass).to_double());
        if (t.dst == l) {
          has_self = true;
        } else {
          row.q.emplace_back(t.dst, t.rate.to_double());
          diag_q -= t.rate.to_double();
        }
      }
      (void)has_self;
      row.q.emplace_back(l, diag_q);
    }
  }
  return dm;
}

std::optional<Rational> uniform_rate(const MarkovGame& game) {
  std::optional<Rational> rate;
  for (const auto& loc : game.locations) {
    for (const auto& act : loc.actions) {
      if (act.implicit_absorbing) continue;  // follows the uniform rate
      Rational mass = act.exit_mass();
      if (mass == Rational(0)) continue;
      if (!rate)
        rate = mass;
      else if (*rate != mass)
        return std::nullopt;
    }
  }
  return rate;
}

MarkovGame uniformise(const MarkovGame& game, Rational* lambda_out) {
  ValidationReport report = validate(game);
  if (!report.ok())
    throw std::invalid_argument("uniformise: invalid game: " + report.violations.front());

  Rational lambda(0);
  for (const auto& loc : game.locations)
    for (const auto& act : loc.actions) {
      if (act.implicit_absorbing) continue;
      Rational mass = act.exit_mass();
      if (mass > Rational(0) && mass > lambda) lambda = mass;
    }
  if (lambda == Rational(0)) lambda = Rational(1);

  MarkovGame out = game;
  for (int l = 0; l < out.num_locations(); ++l) {
    for (auto& act : out.locations[l].actions) {
      if (act.implicit_absorbing) {
        act.transitions = {{l, lambda}};
        act.implicit_absorbing = false;
        continue;
      }
      if (act.exit_mass() == Rational(0)) continue;  // disabled stays disabled
      Rational offdiag = act.offdiagonal_mass(l);
      Rational self = lambda - offdiag;
      act.transitions.erase(
          std::remove_if(act.transitions.begin(), act.transitions.end(),
                         [&](const Transition& t) { return t.dst == l; }),
          act.transitions.end());
      if (self > Rational(0)) act.transitions.push_back({l, self});
    }
  }
  out.normed = (lambda == Rational(1));
  if (lambda_out) *lambda_out = lambda;
  return out;
}

NormaliseResult normalise(const MarkovGame& game, double horizon) {
  NormaliseResult result;
  result.game = uniformise(game, &result.lambda);
  if (result.lambda != Rational(1)) {
    for (auto& loc : result.game.locations)
      for (auto& act : loc.actions)
        for (auto& t : act.transitions) t.rate /= result.lambda;
  }
  result.game.normed = true;
  result.horizon = horizon * result.lambda.to_double();
  return result;
}

MarkovGame as_normed(MarkovGame game) {
  ValidationReport report = validate(game);
  if (!report.ok())
    throw std::invalid_argument("as_normed: invalid game: " + report.violations.front());
  for (const auto& loc : game.locations)
    for (const auto& act : loc.actions) {
      if (act.implicit_absorbing) continue;
      Rational mass = act.exit_mass();
      if (mass == Rational(0)) continue;
      if (std::abs(mass.to_double() - 1.0) > 1e-12)
        throw std::invalid_argument("as_normed: row sum of '" + loc.name + "' action '" +
                                    act.name + "' is " + mass.str() + ", not 1");
    }
  game.normed = true;
  return game;
}

}  // namespace ctmg
