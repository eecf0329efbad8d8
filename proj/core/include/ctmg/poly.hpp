#pragma once

#include <array>
#include <string>
#include <vector>

namespace ctmg {

/// Polynomial of degree <= 4 in the local variable tau, with tau = 0 at the
/// later (right) end of the piece it describes.
struct Polynomial {
  std::array<double, 5> c{};
  int deg = 0;

  static Polynomial constant(double v) {
    Polynomial p;
    p.c[0] = v;
    return p;
  }
  static Polynomial linear(double c0, double c1) {
    Polynomial p;
    p.c[0] = c0;
    p.c[1] = c1;
    p.deg = c1 != 0.0 ? 1 : 0;
    return p;
  }

  double operator()(double tau) const {
    double v = c[deg];
    for (int i = deg - 1; i >= 0; --i) v = v * tau + c[i];
    return v;
  }

  Polynomial derivative() const;
  /// F with F(0) = anchor and F' = this (in tau; equivalently -dF/dt under
  /// the backwards-time convention).
  Polynomial antiderivative(double anchor) const;
  /// q(tau) = p(tau + s).
  Polynomial shifted(double s) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(double s) const;

  double max_coeff_magnitude() const;
  void refresh_degree();
};

/// All real roots of p (degree <= 3) in [lo, hi], ascending.
std::vector<double> roots_in_interval(const Polynomial& p, double lo, double hi);

/// Piecewise polynomial over an absolute-time domain. Breakpoints descend
/// from t_hi to t_lo; piece i covers [breaks[i+1], breaks[i]] with its
/// polynomial in local tau = breaks[i] - t.
struct PiecewiseFunction {
  std::vector<double> breaks;
  std::vector<Polynomial> pieces;

  double t_hi() const { return breaks.front(); }
  double t_lo() const { return breaks.back(); }
  double eval(double t) const;  // at a breakpoint the later (right) piece wins
};

struct ActionQuality {
  std::string action;
  Polynomial q;
};

/// Optimal-action decomposition of [0, eps]: the listed action attains the
/// optimum from its tau_start until the next entry's tau_start.
struct Envelope {
  struct Piece {
    std::string action;
    double tau_start;
  };
  std::vector<Piece> pieces;
};

/// Upper (maximise) or lower envelope of linear qualities via the sorted
/// sweep; O(n log n), at most one piece per action.
Envelope envelope_linear(const std::vector<ActionQuality>& qualities, double eps, bool maximise);

/// Envelope for qualities of degree <= 3 via the candidate-breakpoint sweep
/// (pairwise crossings + midpoint selection).
Envelope envelope_poly(const std::vector<ActionQuality>& qualities, double eps, bool maximise);

namespace detail {
/// Envelope over an arbitrary subrange [lo, hi]; tau_start values absolute.
Envelope envelope_range(const std::vector<ActionQuality>& qualities, double lo, double hi,
                        bool maximise);
}  // namespace detail

}  // namespace ctmg
