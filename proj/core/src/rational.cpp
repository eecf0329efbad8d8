#include "ctmg/rational.hpp"

#include <cctype>

namespace ctmg {

namespace {

long long parse_int(std::string_view s, std::string_view whole) {
  if (s.empty()) throw std::invalid_argument("bad number '" + std::string(whole) + "'");
  bool neg = false;
  size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw std::invalid_argument("bad number '" + std::string(whole) + "'");
  long long v = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      throw std::invalid_argument("bad number '" + std::string(whole) + "'");
    if (v > (INT64_MAX - 9) / 10) throw std::overflow_error("number too large: " + std::string(whole));
    v = v * 10 + (s[i] - '0');
  }
  return neg ? -v : v;
}

}  // namespace

Rational Rational::parse(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw std::invalid_argument("empty number");

  if (size_t slash = s.find('/'); slash != std::string_view::npos) {
    long long p = parse_int(s.substr(0, slash), s);
    long long q = parse_int(s.substr(slash + 1), s);
    if (q == 0) throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
    return Rational(p, q);
  }

  size_t dot = s.find('.');
  if (dot == std::string_view::npos) return Rational(parse_int(s, s));

  std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
  bool neg = !ip.empty() && ip[0] == '-';
  if (!ip.empty() && (ip[0] == '+' || ip[0] == '-')) ip.remove_prefix(1);
  if (ip.empty() && fp.empty()) throw std::invalid_argument("bad number '" + std::string(s) + "'");
  long long whole = ip.empty() ? 0 : parse_int(ip, s);
  long long frac = 0, den = 1;
  for (char ch : fp) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::invalid_argument("bad number '" + std::string(s) + "'");
    if (den > INT64_MAX / 10) throw std::overflow_error("too many digits in '" + std::string(s) + "'");
    frac = frac * 10 + (ch - '0');
    den *= 10;
  }
  Rational r = Rational(whole) + Rational(frac, den);
  return neg ? -r : r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace ctmg
