#include "ctmg/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <tuple>

namespace ctmg {

namespace {

bool valid_id(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  return true;
}

std::vector<std::string> tokens_of(const std::string& raw) {
  std::string line = raw.substr(0, raw.find('#'));
  std::istringstream is(line);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

Rational parse_number(const std::string& s, int line) {
  try {
    return Rational::parse(s);
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

MarkovGame parse_model(std::istream& in) {
  struct Line {
    int no;
    std::vector<std::string> toks;
  };
  std::vector<Line> lines;
  std::string raw;
  int no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++no;
    auto toks = tokens_of(raw);
    if (toks.empty()) continue;
    if (!header_seen) {
      if (toks.size() != 2 || toks[0] != "ctmg" || toks[1] != "1")
        throw ParseError(no, "expected header 'ctmg 1'");
      header_seen = true;
      continue;
    }
    lines.push_back({no, std::move(toks)});
  }
  if (!header_seen) throw ParseError(no == 0 ? 1 : no, "expected header 'ctmg 1'");

  MarkovGame game;
  // first pass: declarations
  for (const auto& [ln, toks] : lines) {
    if (toks[0] != "location") continue;
    if (toks.size() != 3) throw ParseError(ln, "location takes <id> <R|S>");
    if (!valid_id(toks[1])) throw ParseError(ln, "bad identifier '" + toks[1] + "'");
    if (toks[2] != "R" && toks[2] != "S") throw ParseError(ln, "owner must be R or S");
    if (game.index_of(toks[1]) >= 0) throw ParseError(ln, "duplicate location '" + toks[1] + "'");
    Location loc;
    loc.name = toks[1];
    loc.owner = toks[2] == "R" ? Player::Reach : Player::Safe;
    game.locations.push_back(std::move(loc));
  }

  auto lookup = [&](const std::string& id, int ln) {
    int idx = game.index_of(id);
    if (idx < 0) throw ParseError(ln, "undeclared location '" + id + "'");
    return idx;
  };

  std::vector<std::tuple<int, std::string, int>> seen_rates;  // (src, action, dst)
  for (const auto& [ln, toks] : lines) {
    if (toks[0] == "location") continue;
    if (toks[0] == "goal") {
      if (toks.size() != 2) throw ParseError(ln, "goal takes <id>");
      game.locations[lookup(toks[1], ln)].goal = true;
    } else if (toks[0] == "init") {
      if (toks.size() != 3) throw ParseError(ln, "init takes <id> <number>");
      game.locations[lookup(toks[1], ln)].initial = parse_number(toks[2], ln);
    } else if (toks[0] == "rate") {
      if (toks.size() != 5) throw ParseError(ln, "rate takes <src> <action> <dst> <number>");
      if (!valid_id(toks[2])) throw ParseError(ln, "bad action identifier '" + toks[2] + "'");
      int src = lookup(toks[1], ln), dst = lookup(toks[3], ln);
      std::tuple<int, std::string, int> key{src, toks[2], dst};
      if (std::find(seen_rates.begin(), seen_rates.end(), key) != seen_rates.end())
        throw ParseError(ln, "duplicate rate " + toks[1] + " " + toks[2] + " " + toks[3]);
      seen_rates.push_back(std::move(key));
      Rational r = parse_number(toks[4], ln);
      auto& actions = game.locations[src].actions;
      auto it = std::find_if(actions.begin(), actions.end(),
                             [&](const ModelAction& a) { return a.name == toks[2]; });
      if (it == actions.end()) {
        ModelAction act;
        act.name = toks[2];
        act.transitions.push_back({dst, r});
        actions.push_back(std::move(act));
      } else {
        it->transitions.push_back({dst, r});
      }
    } else {
      throw ParseError(ln, "unknown directive '" + toks[0] + "'");
    }
  }

  for (auto& loc : game.locations) {
    if (!loc.actions.empty()) continue;
    ModelAction act;
    act.name = "a";
    act.implicit_absorbing = true;
    loc.actions.push_back(std::move(act));
  }
  game.sort_actions();
  return game;
}

MarkovGame parse_model_string(const std::string& text) {
  std::istringstream is(text);
  return parse_model(is);
}

MarkovGame load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  return parse_model(in);
}

std::string print_model(const MarkovGame& game) {
  std::ostringstream os;
  os << "ctmg 1\n";
  for (const auto& loc : game.locations)
    os << "location " << loc.name << ' ' << (loc.owner == Player::Reach ? 'R' : 'S') << '\n';
  for (const auto& loc : game.locations)
    if (loc.goal) os << "goal " << loc.name << '\n';
  for (const auto& loc : game.locations)
    if (loc.initial != Rational(0)) os << "init " << loc.name << ' ' << loc.initial.str() << '\n';
  for (int l = 0; l < game.num_locations(); ++l) {
    const Location& loc = game.locations[l];
    for (const auto& act : loc.actions) {
      if (act.implicit_absorbing) continue;
      for (const auto& t : act.transitions) {
        if (t.dst == l) continue;  // self-loops are an internal device
        os << "rate " << loc.name << ' ' << act.name << ' ' << game.locations[t.dst].name << ' '
           << t.rate.str() << '\n';
      }
    }
  }
  return os.str();
}

void save_model(const std::string& path, const MarkovGame& game) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
  out << print_model(game);
}

}  // namespace ctmg
