#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ctmg/model.hpp"

namespace ctmg {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

/// Line-oriented model format. Header `ctmg 1`, then in any order:
///   location <id> <R|S>
///   goal <id>
///   init <id> <number>
///   rate <src> <action> <dst> <number>
/// Numbers are decimals or exact fractions p/q; `#` starts a comment.
/// Self-loops are never written; locations without rate lines become
/// absorbing.
MarkovGame parse_model(std::istream& in);
MarkovGame parse_model_string(const std::string& text);
MarkovGame load_model(const std::string& path);

std::string print_model(const MarkovGame& game);
void save_model(const std::string& path, const MarkovGame& game);

}  // namespace ctmg
