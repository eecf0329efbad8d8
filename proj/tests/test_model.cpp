#include "doctest.h"

#include <cmath>

#include "ctmg/model.hpp"
#include "ctmg/nets.hpp"

using namespace ctmg;

namespace {

MarkovGame two_rate_game() {
  // one choice location with exit masses 2 and 3, plus an absorbing target
  MarkovGame g;
  Location x;
  x.name = "x";
  x.initial = Rational(1);
  ModelAction a;
  a.name = "a";
  a.transitions.push_back({1, Rational(2)});
  ModelAction b;
  b.name = "b";
  b.transitions.push_back({1, Rational(3)});
  x.actions = {a, b};
  Location y;
  y.name = "y";
  y.goal = true;
  ModelAction ya;
  ya.name = "a";
  ya.implicit_absorbing = true;
  y.actions = {ya};
  g.locations = {x, y};
  return g;
}

}  // namespace

TEST_CASE("running example structure") {
  MarkovGame g = build_running_example();
  REQUIRE(g.num_locations() == 5);
  CHECK(g.normed);
  CHECK(validate(g).ok());

  int lR = g.index_of("lR");
  const ModelAction* b = g.locations[lR].find_action("b");
  REQUIRE(b != nullptr);
  CHECK(b->offdiagonal_mass(lR) == Rational(1, 5));
  for (const auto& loc : g.locations)
    for (const auto& act : loc.actions) CHECK(act.exit_mass() == Rational(1));

  auto ind = g.goal_indicator();
  CHECK(ind[g.index_of("G")] == 1.0);
  CHECK(ind[g.index_of("lS")] == 0.0);
}

TEST_CASE("derived matrices: P rows sum to 1, Q rows to 0, P*mass = R") {
  MarkovGame g = build_erlang();
  DerivedMatrices dm = derive(g);
  for (int l = 0; l < g.num_locations(); ++l) {
    for (size_t a = 0; a < g.locations[l].actions.size(); ++a) {
      const auto& act = g.locations[l].actions[a];
      const auto& row = dm.rows[l][a];
      if (row.p.empty()) continue;
      double psum = 0.0, qsum = 0.0;
      for (auto& [d, v] : row.p) psum += v;
      for (auto& [d, v] : row.q) qsum += v;
      CHECK(std::abs(psum - 1.0) < 1e-12);
      CHECK(std::abs(qsum) < 1e-12);
      if (act.implicit_absorbing) continue;
      double mass = act.exit_mass().to_double();
      for (auto& [d, p] : row.p) {
        Rational r;
        for (const auto& t : act.transitions)
          if (t.dst == d) r += t.rate;
        CHECK(std::abs(p * mass - r.to_double()) < 1e-12);
      }
    }
  }
}

TEST_CASE("validation catches broken models") {
  MarkovGame g = build_running_example();
  g.locations[0].initial = Rational(1, 2);  // sums to 1/2
  CHECK_FALSE(validate(g).ok());

  MarkovGame g2 = build_running_example();
  g2.locations[1].actions[0].transitions[0].rate = Rational(-1, 20);
  CHECK_FALSE(validate(g2).ok());

  MarkovGame g3 = build_running_example();
  g3.locations[2].actions.clear();
  CHECK_FALSE(validate(g3).ok());
}

TEST_CASE("uniformise: max exit mass becomes the uniform rate") {
  MarkovGame g = two_rate_game();
  REQUIRE(validate(g).ok());
  CHECK_FALSE(uniform_rate(g).has_value());

  Rational lambda;
  MarkovGame u = uniformise(g, &lambda);
  CHECK(lambda == Rational(3));
  CHECK(uniform_rate(u) == Rational(3));

  const ModelAction* a = u.locations[0].find_action("a");
  Rational self;
  for (const auto& t : a->transitions)
    if (t.dst == 0) self += t.rate;
  CHECK(self == Rational(1));  // 3 - 2
  // off-diagonal rates untouched
  CHECK(a->offdiagonal_mass(0) == Rational(2));
  // the absorbing placeholder became an explicit self-loop of rate lambda
  const ModelAction* ya = u.locations[1].find_action("a");
  CHECK_FALSE(ya->implicit_absorbing);
  CHECK(ya->exit_mass() == Rational(3));
}

TEST_CASE("uniformise on an already-uniform rate-1 game is the identity up to self-loops") {
  MarkovGame g = build_running_example();
  Rational lambda;
  MarkovGame u = uniformise(g, &lambda);
  CHECK(lambda == Rational(1));
  CHECK(u.normed);
  for (int l = 0; l < g.num_locations(); ++l)
    for (size_t a = 0; a < g.locations[l].actions.size(); ++a)
      CHECK(g.locations[l].actions[a].offdiagonal_mass(l) ==
            u.locations[l].actions[a].offdiagonal_mass(l));
}

TEST_CASE("erlang model: shape, uniform rate, normalisation") {
  MarkovGame g = build_erlang();
  CHECK(g.num_locations() == 35);
  CHECK(g.locations[g.index_of("l1")].actions.size() == 2);

  int transitions = 0;
  for (const auto& loc : g.locations)
    for (const auto& act : loc.actions)
      if (!act.implicit_absorbing) transitions += static_cast<int>(act.transitions.size());
  CHECK(transitions == 35);  // stages + 5

  Rational lambda;
  uniformise(g, &lambda);
  CHECK(lambda == Rational(10));

  NormaliseResult nr = normalise(g, 7.0);
  CHECK(nr.lambda == Rational(10));
  CHECK(nr.horizon == doctest::Approx(70.0));
  CHECK(validate(nr.game).ok());
  CHECK(nr.game.normed);
  const ModelAction* chain = nr.game.locations[nr.game.index_of("s1")].find_action("a");
  CHECK(chain->offdiagonal_mass(nr.game.index_of("s1")) == Rational(1));

  CHECK(build_erlang(1).num_locations() == 6);
  CHECK_THROWS_AS(build_erlang(0), std::invalid_argument);
}

TEST_CASE("normalise scales the horizon by lambda") {
  MarkovGame g = two_rate_game();
  // make it uniform with rate 2 first: single action of mass 2
  g.locations[0].actions.pop_back();
  NormaliseResult nr = normalise(g, 3.0);
  CHECK(nr.lambda == Rational(2));
  CHECK(nr.horizon == doctest::Approx(6.0));
}

TEST_CASE("chain game: shape and uniform rate") {
  MarkovGame g = build_chain_game();
  CHECK(g.num_locations() == 202);
  CHECK(validate(g).ok());
  Rational lambda;
  uniformise(g, &lambda);
  CHECK(lambda == Rational(5));
  for (int i = 1; i <= 100; ++i) {
    const Location& loc = g.locations[g.index_of("l" + std::to_string(i))];
    CHECK(loc.owner == Player::Reach);
    CHECK(loc.actions.size() == 2);
  }
  CHECK_THROWS_AS(build_chain_game({.n = 1}), std::invalid_argument);
}

TEST_CASE("argopt is invariant under norming") {
  MarkovGame g = two_rate_game();
  NormaliseResult nr = normalise(g, 1.0);
  std::vector<double> v{0.3, 1.0};
  auto [v1, rep1] = step_single(g, v, 0.0);
  auto [v2, rep2] = step_single(nr.game, v, 0.0);
  CHECK(rep1.chosen_action == rep2.chosen_action);
  // rates divide by lambda, so gradients scale accordingly
  CHECK(rep1.gradient[0] == doctest::Approx(rep2.gradient[0] * nr.lambda.to_double()));
}
