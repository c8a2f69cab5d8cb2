#pragma once

// Closed algebra of isotropic complex-Gaussian phase-space functions.
//
// A single-mode factor is  exp(quad*|a|^2 + lin_a*a + lin_astar*conj(a)),
// with the three coefficients complex and independent of each other. A term
// over N modes is a complex coefficient times a product of N such factors, and
// a GaussianSum is a finite list of terms. Every operation below maps terms to
// terms, so the analytic solutions never leave this family.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qme {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

class NonIntegrable : public std::domain_error {
public:
  explicit NonIntegrable(const std::string& what) : std::domain_error(what) {}
};

/// Exponent of one mode factor.
struct Exponent {
  cplx quad{0.0};
  cplx lin_a{0.0};
  cplx lin_astar{0.0};

  cplx at(cplx a) const {
    return quad * std::norm(a) + lin_a * a + lin_astar * std::conj(a);
  }
  bool integrable() const { return quad.real() < 0.0; }
};

template <std::size_t N>
struct GaussianTerm {
  cplx coeff{0.0};
  std::array<Exponent, N> exps{};
  cplx log_scale{0.0};  // extra factor exp(log_scale); keeps large shifts from underflowing coeff

  cplx operator()(const std::array<cplx, N>& point) const {
    cplx e = log_scale;
    for (std::size_t k = 0; k < N; ++k) e += exps[k].at(point[k]);
    return coeff * std::exp(e);
  }

  /// Largest modulus of the term over the whole plane (log scale). Only
  /// meaningful for integrable terms.
  double log_peak() const {
    double lp = std::log(std::abs(coeff)) + log_scale.real();
    for (const auto& x : exps) {
      // Re(u a + w a*) = Re(u+w) x - Im(u-w) y
      const double ax = (x.lin_a + x.lin_astar).real();
      const double ay = -(x.lin_a - x.lin_astar).imag();
      lp += -(ax * ax + ay * ay) / (4.0 * x.quad.real());
    }
    return lp;
  }
};

/// The single-mode form c*exp(q|a|^2 + u a + w a*).
using GaussianForm = GaussianTerm<1>;

inline GaussianForm make_form(cplx coeff, cplx quad, cplx lin_a = 0.0, cplx lin_astar = 0.0) {
  return GaussianForm{coeff, {Exponent{quad, lin_a, lin_astar}}};
}

/// Thermal Wigner function 1/(pi*Delta) exp(-|a|^2/Delta).
inline GaussianForm thermal_form(double delta) {
  return make_form(1.0 / (pi * delta), -1.0 / delta);
}

template <std::size_t N>
class GaussianSum {
public:
  using Term = GaussianTerm<N>;
  using Point = std::array<cplx, N>;

  GaussianSum() = default;
  explicit GaussianSum(std::vector<Term> terms) : terms_(std::move(terms)) {}
  GaussianSum(std::initializer_list<Term> terms) : terms_(terms) {}

  /// Constant function (only sensible for N == 0, where it is the value).
  static GaussianSum constant(cplx c) {
    static_assert(N == 0, "constant GaussianSum only exists without modes");
    return GaussianSum{Term{c, {}}};
  }

  const std::vector<Term>& terms() const { return terms_; }
  std::vector<Term>& terms() { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  void add(const Term& t) {
    if (t.coeff != cplx{0.0}) terms_.push_back(t);
  }

  cplx operator()(const Point& point) const {
    cplx s{0.0};
    for (const auto& t : terms_) s += t(point);
    return s;
  }

  GaussianSum& operator+=(const GaussianSum& o) {
    for (const auto& t : o.terms_) add(t);
    return *this;
  }
  GaussianSum& operator*=(cplx s) {
    if (s == cplx{0.0}) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.coeff *= s;
    return *this;
  }
  friend GaussianSum operator+(GaussianSum a, const GaussianSum& b) { return a += b; }
  friend GaussianSum operator*(cplx s, GaussianSum a) { return a *= s; }
  friend GaussianSum operator*(GaussianSum a, cplx s) { return a *= s; }

  /// Drops terms whose peak modulus is below eps relative to the largest peak.
  /// Non-integrable terms are always kept.
  GaussianSum& prune(double eps = 1e-14) {
    double top = -INFINITY;
    for (const auto& t : terms_) {
      if (all_integrable(t)) top = std::max(top, t.log_peak());
    }
    if (!std::isfinite(top)) return *this;
    const double cut = top + std::log(eps);
    std::erase_if(terms_, [&](const Term& t) {
      return t.coeff == cplx{0.0} || (all_integrable(t) && t.log_peak() < cut);
    });
    return *this;
  }

private:
  static bool all_integrable(const Term& t) {
    return std::all_of(t.exps.begin(), t.exps.end(), [](const Exponent& e) { return e.integrable(); });
  }

  std::vector<Term> terms_;
};

template <std::size_t N>
cplx evaluate(const GaussianSum<N>& f, const std::array<cplx, N>& point) {
  return f(point);
}

inline cplx evaluate(const GaussianSum<1>& f, cplx a) { return f({a}); }

/// Pointwise product of a one-mode sum per mode: (f0 x f1 x ...)(a0, a1, ...).
inline GaussianSum<2> outer(const GaussianSum<1>& fa, const GaussianSum<1>& fb) {
  GaussianSum<2> out;
  for (const auto& ta : fa.terms())
    for (const auto& tb : fb.terms()) out.add({ta.coeff * tb.coeff, {ta.exps[0], tb.exps[0]}, ta.log_scale + tb.log_scale});
  return out;
}

template <std::size_t N>
GaussianSum<N> product(const GaussianSum<N>& f, const GaussianSum<N>& g) {
  GaussianSum<N> out;
  for (const auto& a : f.terms()) {
    for (const auto& b : g.terms()) {
      GaussianTerm<N> t{a.coeff * b.coeff, {}, a.log_scale + b.log_scale};
      for (std::size_t k = 0; k < N; ++k) {
        t.exps[k] = {a.exps[k].quad + b.exps[k].quad, a.exps[k].lin_a + b.exps[k].lin_a,
                     a.exps[k].lin_astar + b.exps[k].lin_astar};
      }
      out.add(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-factor primitives. Each returns the log of the scalar pulled out into
// the coefficient together with the new exponent.

namespace detail {

/// f(a) -> f(a + shift)
inline std::pair<cplx, Exponent> shift(const Exponent& e, cplx s) {
  const cplx sc = std::conj(s);
  const cplx log_c = e.quad * std::norm(s) + e.lin_a * s + e.lin_astar * sc;
  return {log_c, Exponent{e.quad, e.lin_a + e.quad * sc, e.lin_astar + e.quad * s}};
}

/// Plane integral of exp(q|z|^2 + u z + w z*) = pi/(-q) exp(-u w / q).
inline cplx log_plane_integral(const Exponent& e) {
  if (!e.integrable()) throw NonIntegrable("plane integral needs Re(quad) < 0");
  return std::log(pi / (-e.quad)) - e.lin_a * e.lin_astar / e.quad;
}

/// Convolution with the thermal relaxation kernel
///   K0(a, a0) = 1/(pi s) exp(-|a - d a0|^2 / s),
/// where d = exp(-kappa t/2) and s = Delta (1 - exp(-kappa t)).
inline std::pair<cplx, Exponent> relax(const Exponent& e, double d, double s) {
  const cplx den = d * d - s * e.quad;
  if (!(den.real() > 0.0)) throw NonIntegrable("kernel convolution diverges (Re(d^2 - s*quad) <= 0)");
  const cplx log_c = -std::log(den) + s * e.lin_a * e.lin_astar / den;
  return {log_c, Exponent{e.quad / den, e.lin_a * d / den, e.lin_astar * d / den}};
}

}  // namespace detail

/// f(a_k) -> f(a_k + s_k) on every mode.
template <std::size_t N>
GaussianSum<N> shift(const GaussianSum<N>& f, const std::array<cplx, N>& s) {
  GaussianSum<N> out;
  for (auto t : f.terms()) {
    cplx log_c{0.0};
    for (std::size_t k = 0; k < N; ++k) {
      auto [lc, e] = detail::shift(t.exps[k], s[k]);
      log_c += lc;
      t.exps[k] = e;
    }
    t.log_scale += log_c;
    out.add(t);
  }
  return out;
}

inline GaussianSum<1> shift(const GaussianSum<1>& f, cplx s) { return shift<1>(f, {s}); }

/// Multiplies every term by c * exp(u a_k + v a_k*) on one mode.
template <std::size_t N>
GaussianSum<N> multiply_exponential(const GaussianSum<N>& f, std::size_t mode, cplx u, cplx v, cplx c = 1.0) {
  GaussianSum<N> out;
  for (auto t : f.terms()) {
    t.coeff *= c;
    t.exps[mode].lin_a += u;
    t.exps[mode].lin_astar += v;
    out.add(t);
  }
  return out;
}

inline GaussianSum<1> multiply_exponential(const GaussianSum<1>& f, cplx u, cplx v, cplx c = 1.0) {
  return multiply_exponential<1>(f, 0, u, v, c);
}

/// Integrates mode k over the whole plane, leaving a function of the others.
template <std::size_t N>
GaussianSum<N - 1> integrate_mode(const GaussianSum<N>& f, std::size_t mode) {
  static_assert(N >= 1);
  GaussianSum<N - 1> out;
  for (const auto& t : f.terms()) {
    GaussianTerm<N - 1> r{t.coeff, {}, t.log_scale + detail::log_plane_integral(t.exps[mode])};
    for (std::size_t k = 0, j = 0; k < N; ++k)
      if (k != mode) r.exps[j++] = t.exps[k];
    out.add(r);
  }
  return out;
}

/// Fixes mode k at a point, leaving a function of the others.
template <std::size_t N>
GaussianSum<N - 1> evaluate_mode(const GaussianSum<N>& f, std::size_t mode, cplx a) {
  static_assert(N >= 1);
  GaussianSum<N - 1> out;
  for (const auto& t : f.terms()) {
    GaussianTerm<N - 1> r{t.coeff, {}, t.log_scale + t.exps[mode].at(a)};
    for (std::size_t k = 0, j = 0; k < N; ++k)
      if (k != mode) r.exps[j++] = t.exps[k];
    out.add(r);
  }
  return out;
}

/// Exact integral over all modes.
template <std::size_t N>
cplx integrate_full(const GaussianSum<N>& f) {
  cplx s{0.0};
  for (const auto& t : f.terms()) {
    cplx log_c = t.log_scale;
    for (const auto& e : t.exps) log_c += detail::log_plane_integral(e);
    s += t.coeff * std::exp(log_c);
  }
  return s;
}

/// Convolves mode k with the thermal relaxation kernel K0 over time t.
template <std::size_t N>
GaussianSum<N> relax_mode(const GaussianSum<N>& f, std::size_t mode, double kappa, double delta, double t) {
  if (t == 0.0 || kappa == 0.0) return f;
  const double d = std::exp(-0.5 * kappa * t);
  const double s = -delta * std::expm1(-kappa * t);
  GaussianSum<N> out;
  for (auto term : f.terms()) {
    auto [lc, e] = detail::relax(term.exps[mode], d, s);
    term.log_scale += lc;
    term.exps[mode] = e;
    out.add(term);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Momentum marginals: with a = x + i p, integrate every mode over x.

/// exp(quad p^2 + lin p)
struct LineExponent {
  cplx quad{0.0};
  cplx lin{0.0};
};

template <std::size_t N>
struct MarginalTerm {
  cplx coeff{0.0};
  std::array<LineExponent, N> exps{};
  cplx log_scale{0.0};
};

template <std::size_t N>
class MarginalSum {
public:
  std::vector<MarginalTerm<N>> terms;

  cplx operator()(const std::array<double, N>& p) const {
    cplx s{0.0};
    for (const auto& t : terms) {
      cplx e = t.log_scale;
      for (std::size_t k = 0; k < N; ++k) e += t.exps[k].quad * p[k] * p[k] + t.exps[k].lin * p[k];
      s += t.coeff * std::exp(e);
    }
    return s;
  }

  /// Integral over all p; equals integrate_full of the source sum.
  cplx integral() const {
    cplx s{0.0};
    for (const auto& t : terms) {
      cplx log_c = t.log_scale;
      for (const auto& e : t.exps) {
        if (!(e.quad.real() < 0.0)) throw NonIntegrable("marginal integral needs Re(quad) < 0");
        log_c += 0.5 * std::log(pi / (-e.quad)) - e.lin * e.lin / (4.0 * e.quad);
      }
      s += t.coeff * std::exp(log_c);
    }
    return s;
  }
};

template <std::size_t N>
MarginalSum<N> integrate_marginal_x(const GaussianSum<N>& f) {
  MarginalSum<N> out;
  out.terms.reserve(f.size());
  for (const auto& t : f.terms()) {
    MarginalTerm<N> m{t.coeff, {}};
    cplx log_c = t.log_scale;
    for (std::size_t k = 0; k < N; ++k) {
      const auto& e = t.exps[k];
      if (!e.integrable()) throw NonIntegrable("x-marginal needs Re(quad) < 0");
      // q x^2 + (u+w) x  +  q p^2 + i(u-w) p
      const cplx b = e.lin_a + e.lin_astar;
      log_c += 0.5 * std::log(pi / (-e.quad)) - b * b / (4.0 * e.quad);
      m.exps[k] = {e.quad, I * (e.lin_a - e.lin_astar)};
    }
    m.log_scale = log_c;
    out.terms.push_back(m);
  }
  return out;
}

}  // namespace qme
