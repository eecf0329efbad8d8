#include "ctmg/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ctmg {

namespace {
constexpr double kParallelTol = 1e-14;
constexpr double kQualityTieTol = 1e-14;
constexpr double kMinPiece = 1e-12;
}  // namespace

void Polynomial::refresh_degree() {
  deg = 4;
  while (deg > 0 && c[deg] == 0.0) --deg;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  for (int i = 1; i <= deg; ++i) d.c[i - 1] = c[i] * i;
  d.deg = deg > 0 ? deg - 1 : 0;
  d.refresh_degree();
  return d;
}

Polynomial Polynomial::antiderivative(double anchor) const {
  if (deg > 3) throw std::invalid_argument("antiderivative: degree > 3");
  Polynomial f;
  f.c[0] = anchor;
  for (int i = 0; i <= deg; ++i) f.c[i + 1] = c[i] / (i + 1);
  f.deg = deg + 1;
  f.refresh_degree();
  return f;
}

Polynomial Polynomial::shifted(double s) const {
  // Horner-style composition with (tau + s).
  Polynomial r;
  r.c[0] = c[deg];
  r.deg = 0;
  for (int i = deg - 1; i >= 0; --i) {
    double carry = 0.0;
    for (int j = 0; j <= r.deg; ++j) {
      double nv = r.c[j] * s + carry;
      carry = r.c[j];
      r.c[j] = nv;
    }
    r.c[r.deg + 1] = carry;
    r.deg += 1;
    r.c[0] += c[i];
  }
  r.refresh_degree();
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r;
  r.deg = std::max(deg, o.deg);
  for (int i = 0; i <= r.deg; ++i) r.c[i] = c[i] + o.c[i];
  r.refresh_degree();
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r;
  r.deg = std::max(deg, o.deg);
  for (int i = 0; i <= r.deg; ++i) r.c[i] = c[i] - o.c[i];
  r.refresh_degree();
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r = *this;
  for (int i = 0; i <= deg; ++i) r.c[i] *= s;
  r.refresh_degree();
  return r;
}

double Polynomial::max_coeff_magnitude() const {
  double m = 0.0;
  for (int i = 0; i <= deg; ++i) m = std::max(m, std::abs(c[i]));
  return m;
}

double PiecewiseFunction::eval(double t) const {
  if (breaks.size() < 2) throw std::out_of_range("piecewise function has no pieces");
  const double hi = breaks.front(), lo = breaks.back();
  if (t > hi + 1e-12 || t < lo - 1e-12)
    throw std::out_of_range("piecewise eval outside domain");
  t = std::min(hi, std::max(lo, t));
  // Breaks descend; find the piece whose half-open interval (left, right]
  // contains t, giving the later piece at interior breakpoints.
  size_t lo_i = 0, hi_i = pieces.size() - 1;
  while (lo_i < hi_i) {
    size_t mid = (lo_i + hi_i) / 2;
    if (t >= breaks[mid + 1])
      hi_i = mid;
    else
      lo_i = mid + 1;
  }
  return pieces[lo_i](breaks[lo_i] - t);
}

namespace {

// Safeguarded Newton/bisection on a bracket with p(a) and p(b) of opposite
// sign (or zero at an endpoint).
double refine_root(const Polynomial& p, const Polynomial& dp, double a, double b) {
  double fa = p(a), fb = p(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    double fx = p(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    double d = dp(x);
    double step = d != 0.0 ? fx / d : 0.0;
    double xn = x - step;
    if (d == 0.0 || xn <= a || xn >= b) xn = 0.5 * (a + b);
    double tol = std::max(1e-15, 1e-13 * std::abs(xn));
    if (std::abs(xn - x) < tol && std::abs(b - a) < 4 * tol) return xn;
    x = xn;
  }
  return x;
}

void push_if_in(std::vector<double>& roots, double r, double lo, double hi) {
  double slack = std::max(1e-15, 1e-12 * std::max(std::abs(lo), std::abs(hi)));
  if (r >= lo - slack && r <= hi + slack) roots.push_back(std::min(hi, std::max(lo, r)));
}

}  // namespace

std::vector<double> roots_in_interval(const Polynomial& p, double lo, double hi) {
  if (p.deg > 3) throw std::invalid_argument("roots_in_interval: degree > 3");
  if (!(lo < hi)) throw std::invalid_argument("roots_in_interval: lo must be < hi");

  // Work on a normalised copy so the discriminant thresholds are scale-free.
  Polynomial q = p;
  double scale = q.max_coeff_magnitude();
  if (scale > 0.0)
    for (int i = 0; i <= q.deg; ++i) q.c[i] /= scale;
  q.refresh_degree();

  std::vector<double> roots;
  switch (q.deg) {
    case 0:
      break;
    case 1:
      push_if_in(roots, -q.c[0] / q.c[1], lo, hi);
      break;
    case 2: {
      double a = q.c[2], b = q.c[1], c0 = q.c[0];
      double disc = b * b - 4 * a * c0;
      if (disc < -1e-14) break;
      if (std::abs(disc) <= 1e-14) {
        push_if_in(roots, -b / (2 * a), lo, hi);
        break;
      }
      double sq = std::sqrt(disc);
      double u = -0.5 * (b + (b >= 0 ? sq : -sq));
      push_if_in(roots, u / a, lo, hi);
      push_if_in(roots, c0 / u, lo, hi);
      break;
    }
    case 3: {
      // Split at the extrema, then bracketed Newton/bisection per
      // monotone subinterval.
      Polynomial dq = q.derivative();
      std::vector<double> knots{lo};
      double da = dq.c[2], db = dq.c[1], dc = dq.c[0];
      double disc = db * db - 4 * da * dc;
      if (disc > 0) {
        double sq = std::sqrt(disc);
        double u = -0.5 * (db + (db >= 0 ? sq : -sq));
        for (double r : {u / da, dc / u})
          if (r > lo && r < hi) knots.push_back(r);
      }
      knots.push_back(hi);
      std::sort(knots.begin(), knots.end());
      for (size_t i = 0; i + 1 < knots.size(); ++i) {
        double a = knots[i], b = knots[i + 1];
        double fa = q(a), fb = q(b);
        double ftol = 1e-14;
        if (std::abs(fa) <= ftol) {
          push_if_in(roots, a, lo, hi);
          continue;
        }
        if (std::abs(fb) <= ftol) {
          if (i + 2 == knots.size()) push_if_in(roots, b, lo, hi);
          continue;
        }
        if ((fa > 0) != (fb > 0)) push_if_in(roots, refine_root(q, dq, a, b), lo, hi);
      }
      break;
    }
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) {
                            return std::abs(a - b) <= std::max(1e-14, 1e-12 * std::abs(a));
                          }),
              roots.end());
  return roots;
}

namespace {

Envelope envelope_linear_local(const std::vector<ActionQuality>& qualities, double eps,
                               bool maximise) {
  struct Line {
    const ActionQuality* aq;
    double q0, slope;
  };
  std::vector<Line> lines;
  lines.reserve(qualities.size());
  double sign = maximise ? 1.0 : -1.0;
  for (const auto& aq : qualities) {
    if (aq.q.deg > 1) throw std::invalid_argument("envelope_linear: quality degree > 1");
    lines.push_back({&aq, sign * aq.q.c[0], sign * aq.q.c[1]});
  }
  // Best at tau = 0 first; ties fall to the lexicographically smaller action.
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.q0 != b.q0) return a.q0 > b.q0;
    return a.aq->action < b.aq->action;
  });

  struct StackEntry {
    const Line* line;
    double tau_start;
  };
  std::vector<StackEntry> stack{{&lines[0], 0.0}};
  for (size_t i = 1; i < lines.size(); ++i) {
    const Line& cand = lines[i];
    while (true) {
      const StackEntry& top = stack.back();
      double dslope = cand.slope - top.line->slope;
      if (dslope <= kParallelTol) break;  // parallel or diverging below: never overtakes
      double x = (top.line->q0 - cand.q0) / dslope;
      if (x >= eps - kMinPiece) break;
      if (x > top.tau_start + kMinPiece) {
        stack.push_back({&cand, std::max(x, 0.0)});
        break;
      }
      stack.pop_back();
      if (stack.empty()) {
        stack.push_back({&cand, 0.0});
        break;
      }
    }
  }

  Envelope env;
  for (const auto& e : stack) env.pieces.push_back({e.line->aq->action, e.tau_start});
  return env;
}

Envelope envelope_poly_local(const std::vector<ActionQuality>& qualities, double eps,
                             bool maximise) {
  std::vector<double> cuts{0.0, eps};
  for (size_t i = 0; i < qualities.size(); ++i) {
    if (qualities[i].q.deg > 3) throw std::invalid_argument("envelope_poly: quality degree > 3");
    for (size_t j = i + 1; j < qualities.size(); ++j) {
      Polynomial diff = qualities[i].q - qualities[j].q;
      if (diff.max_coeff_magnitude() <= kParallelTol) continue;
      for (double r : roots_in_interval(diff, 0.0, eps)) cuts.push_back(r);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < kMinPiece; }),
             cuts.end());
  if (cuts.back() < eps) cuts.back() = eps;

  double sign = maximise ? 1.0 : -1.0;
  Envelope env;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const ActionQuality* best = nullptr;
    double best_v = 0.0;
    for (const auto& aq : qualities) {
      double v = sign * aq.q(mid);
      if (!best || v > best_v + kQualityTieTol) {
        best = &aq;
        best_v = v;
      } else if (v >= best_v - kQualityTieTol && aq.action < best->action) {
        // Tie within tolerance: keep the lexicographically smaller action.
        best = &aq;
        best_v = std::max(best_v, v);
      }
    }
    if (env.pieces.empty() || env.pieces.back().action != best->action)
      env.pieces.push_back({best->action, cuts[i]});
  }
  return env;
}

}  // namespace

Envelope envelope_linear(const std::vector<ActionQuality>& qualities, double eps, bool maximise) {
  if (qualities.empty()) throw std::invalid_argument("envelope: no actions");
  if (!(eps > 0)) throw std::invalid_argument("envelope: eps must be > 0");
  return envelope_linear_local(qualities, eps, maximise);
}

Envelope envelope_poly(const std::vector<ActionQuality>& qualities, double eps, bool maximise) {
  if (qualities.empty()) throw std::invalid_argument("envelope: no actions");
  if (!(eps > 0)) throw std::invalid_argument("envelope: eps must be > 0");
  int max_deg = 0;
  for (const auto& aq : qualities) max_deg = std::max(max_deg, aq.q.deg);
  if (max_deg <= 1) return envelope_linear_local(qualities, eps, maximise);
  return envelope_poly_local(qualities, eps, maximise);
}

namespace detail {

Envelope envelope_range(const std::vector<ActionQuality>& qualities, double lo, double hi,
                        bool maximise) {
  std::vector<ActionQuality> local;
  local.reserve(qualities.size());
  for (const auto& aq : qualities) local.push_back({aq.action, aq.q.shifted(lo)});
  Envelope env = envelope_poly(local, hi - lo, maximise);
  for (auto& piece : env.pieces) piece.tau_start += lo;
  return env;
}

}  // namespace detail

}  // namespace ctmg
