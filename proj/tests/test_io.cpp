#include "doctest.h"

#include "ctmg/model.hpp"
#include "ctmg/model_io.hpp"
#include "ctmg/rational.hpp"

using namespace ctmg;

TEST_CASE("rational arithmetic and parsing") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3).to_double() == doctest::Approx(1.0 / 3.0));

  CHECK(Rational::parse("1/3") == Rational(1, 3));
  CHECK(Rational::parse("-2/4") == Rational(-1, 2));
  CHECK(Rational::parse("0.125") == Rational(1, 8));
  CHECK(Rational::parse("7") == Rational(7));
  CHECK(Rational::parse(" 10 ") == Rational(10));
  CHECK(Rational::parse("-0.5") == Rational(-1, 2));
  CHECK(Rational::parse("2.") == Rational(2));

  CHECK(Rational(1, 3).str() == "1/3");
  CHECK(Rational(4).str() == "4");
  CHECK(Rational::parse(Rational(-7, 12).str()) == Rational(-7, 12));

  CHECK_THROWS_AS(Rational::parse("abc"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("1e-3"), std::invalid_argument);
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("model files round-trip through print and parse") {
  for (MarkovGame g : {build_running_example(), build_erlang(5), build_chain_game({.n = 4})}) {
    std::string text = print_model(g);
    MarkovGame back = parse_model_string(text);
    CHECK(validate(back).ok());
    CHECK(print_model(back) == text);

    REQUIRE(back.num_locations() == g.num_locations());
    for (int l = 0; l < g.num_locations(); ++l) {
      CHECK(back.locations[l].name == g.locations[l].name);
      CHECK(back.locations[l].owner == g.locations[l].owner);
      CHECK(back.locations[l].goal == g.locations[l].goal);
      CHECK(back.locations[l].initial == g.locations[l].initial);
      // off-diagonal rates compare as exact rationals
      for (const auto& act : g.locations[l].actions) {
        if (act.implicit_absorbing || act.offdiagonal_mass(l) == Rational(0)) continue;
        const ModelAction* other = back.locations[l].find_action(act.name);
        REQUIRE(other != nullptr);
        CHECK(other->offdiagonal_mass(l) == act.offdiagonal_mass(l));
      }
    }
  }
}

TEST_CASE("parser accepts comments, blank lines, and any directive order") {
  std::string text =
      "# a comment\n"
      "\n"
      "ctmg 1\n"
      "rate x a G 1/2   # trailing comment\n"
      "goal G\n"
      "init x 1\n"
      "location x R\n"
      "location G R\n"
      "rate x a x2 0.5\n"
      "location x2 S\n";
  MarkovGame g = parse_model_string(text);
  CHECK(g.num_locations() == 3);
  CHECK(validate(g).ok());
  CHECK(g.locations[g.index_of("G")].goal);
  CHECK(g.locations[g.index_of("x")].find_action("a")->exit_mass() == Rational(1));
  // rate-less locations become absorbing
  CHECK(g.locations[g.index_of("G")].actions.size() == 1);
  CHECK(g.locations[g.index_of("G")].actions[0].implicit_absorbing);
  CHECK(g.locations[g.index_of("x2")].owner == Player::Safe);
}

TEST_CASE("parser rejects malformed input with the offending line number") {
  auto expect_error = [](const std::string& text, int line) {
    try {
      parse_model_string(text);
      FAIL("expected a parse error for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
    }
  };

  expect_error("nonsense 1\n", 1);                                           // bad header
  expect_error("ctmg 2\n", 1);                                               // bad version
  expect_error("ctmg 1\nlocation x R\nlocation x S\n", 3);                   // duplicate location
  expect_error("ctmg 1\nlocation x R\ngoal y\n", 3);                         // undeclared id
  expect_error("ctmg 1\nlocation x R\nrate x a x 1\nrate x a x 2\n", 4);     // duplicate rate
  expect_error("ctmg 1\nlocation x R\nfrobnicate x\n", 3);                   // unknown directive
  expect_error("ctmg 1\nlocation x R\nlocation y R\nrate x a y oops\n", 4);  // bad number
  expect_error("ctmg 1\nlocation x-y R\n", 2);                               // bad identifier
  expect_error("ctmg 1\nlocation x R\ninit x\n", 3);                         // missing argument
}

TEST_CASE("printing omits self-loops and implicit absorbing actions") {
  MarkovGame g = build_running_example();  // has explicit self-loops
  std::string text = print_model(g);
  CHECK(text.find("lR a lR") == std::string::npos);
  CHECK(text.find("rate G") == std::string::npos);

  MarkovGame back = parse_model_string(text);
  // norming restores the self-loop mass
  Rational lambda;
  MarkovGame u = uniformise(back, &lambda);
  CHECK(lambda == Rational(1));
  const ModelAction* a = u.locations[u.index_of("lR")].find_action("a");
  CHECK(a->exit_mass() == Rational(1));
}

TEST_CASE("fractions survive the file format exactly") {
  std::string text = print_model(build_running_example());
  CHECK(text.find("1/8") != std::string::npos);
  MarkovGame g = parse_model_string(text);
  int lS = g.index_of("lS");
  const ModelAction* b = g.locations[lS].find_action("b");
  Rational to_goal;
  for (const auto& t : b->transitions)
    if (t.dst == g.index_of("G")) to_goal = t.rate;
  CHECK(to_goal == Rational(1, 8));
}
