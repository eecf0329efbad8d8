#include <stdexcept>
#include <string>

#include "ctmg/model.hpp"

namespace ctmg {

namespace {

struct Builder {
  MarkovGame game;

  int location(const std::string& name, Player owner) {
    int idx = game.index_of(name);
    if (idx >= 0) return idx;
    Location loc;
    loc.name = name;
    loc.owner = owner;
    game.locations.push_back(std::move(loc));
    return game.num_locations() - 1;
  }

  void rate(int src, const std::string& action, int dst, Rational r) {
    auto& actions = game.locations[src].actions;
    for (auto& act : actions) {
      if (act.name == action) {
        act.transitions.push_back({dst, r});
        return;
      }
    }
    ModelAction act;
    act.name = action;
    act.transitions.push_back({dst, r});
    actions.push_back(std::move(act));
  }

  void absorbing(int loc) {
    ModelAction act;
    act.name = "a";
    act.implicit_absorbing = true;
    game.locations[loc].actions.push_back(std::move(act));
  }

  MarkovGame finish() {
    game.sort_actions();
    return std::move(game);
  }
};

}  // namespace

MarkovGame build_running_example() {
  Builder b;
  int lS = b.location("lS", Player::Safe);
  int lR = b.location("lR", Player::Reach);
  int l = b.location("l", Player::Reach);
  int goal = b.location("G", Player::Reach);
  int bot = b.location("bot", Player::Safe);

  b.rate(lS, "a", lR, Rational(1));
  b.rate(lS, "b", goal, Rational(1, 8));
  b.rate(lS, "b", bot, Rational(7, 8));

  b.rate(lR, "a", goal, Rational(1, 20));
  b.rate(lR, "a", bot, Rational(3, 20));
  b.rate(lR, "a", lR, Rational(16, 20));
  b.rate(lR, "b", l, Rational(1, 5));
  b.rate(lR, "b", lR, Rational(4, 5));

  b.rate(l, "a", goal, Rational(1, 10));
  b.rate(l, "a", l, Rational(9, 10));

  b.rate(goal, "a", goal, Rational(1));
  b.rate(bot, "a", bot, Rational(1));

  b.game.locations[goal].goal = true;
  b.game.locations[lS].initial = Rational(1);
  MarkovGame game = b.finish();
  game.normed = true;
  return game;
}

MarkovGame build_erlang(int stages, Rational stage_rate) {
  if (stages < 1) throw std::invalid_argument("build_erlang: stages must be >= 1");
  if (stage_rate <= Rational(0)) throw std::invalid_argument("build_erlang: stage_rate must be > 0");

  Builder b;
  int l1 = b.location("l1", Player::Reach);
  // Erlang chain of stages+1 locations between l1 and the goal; the chain
  // contributes stages+1 transitions of rate stage_rate.
  std::vector<int> chain;
  for (int i = 0; i <= stages; ++i)
    chain.push_back(b.location("s" + std::to_string(i + 1), Player::Reach));
  int l3 = b.location("l3", Player::Reach);
  int l4 = b.location("l4", Player::Reach);
  int l5 = b.location("l5", Player::Reach);

  b.rate(l1, "a", chain.front(), Rational(1));
  b.rate(l1, "b", l3, Rational(1));
  for (size_t i = 0; i + 1 < chain.size(); ++i) b.rate(chain[i], "a", chain[i + 1], stage_rate);
  b.rate(chain.back(), "a", l4, stage_rate);
  b.rate(l3, "a", l4, Rational(1, 2));
  b.rate(l3, "a", l5, Rational(1, 2));
  b.absorbing(l4);
  b.absorbing(l5);

  b.game.locations[l4].goal = true;
  b.game.locations[l1].initial = Rational(1);
  return b.finish();
}

MarkovGame build_chain_game(const ChainGameParams& params) {
  if (params.n < 2) throw std::invalid_argument("build_chain_game: n must be >= 2");
  for (const Rational* r : {&params.fast, &params.slow, &params.cross,
                            &params.split_goal, &params.split_sink})
    if (*r <= Rational(0)) throw std::invalid_argument("build_chain_game: rates must be > 0");

  Builder b;
  std::vector<int> reach(params.n), safe(params.n);
  for (int i = 0; i < params.n; ++i)
    reach[i] = b.location("l" + std::to_string(i + 1), Player::Reach);
  for (int i = 0; i < params.n; ++i)
    safe[i] = b.location("m" + std::to_string(i + 1), Player::Safe);
  int goal = b.location("G", Player::Reach);
  int bot = b.location("bot", Player::Safe);

  for (int i = 0; i < params.n; ++i) {
    int next = (i + 1 < params.n) ? reach[i + 1] : goal;
    b.rate(reach[i], "slow", next, params.slow);
    b.rate(reach[i], "cross", safe[i], params.cross);
  }
  for (int i = 0; i + 1 < params.n; ++i) {
    b.rate(safe[i], "fast", safe[i + 1], params.fast);
    b.rate(safe[i], "cross", reach[i + 1], params.cross);
  }
  b.rate(safe[params.n - 1], "cross", goal, params.cross);
  b.rate(safe[params.n - 1], "fast", goal, params.split_goal);
  b.rate(safe[params.n - 1], "fast", bot, params.split_sink);
  b.absorbing(goal);
  b.absorbing(bot);

  b.game.locations[goal].goal = true;
  b.game.locations[reach[0]].initial = Rational(1);
  return b.finish();
}

}  // namespace ctmg
