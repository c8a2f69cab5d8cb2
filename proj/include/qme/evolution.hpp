#pragma once

// Closed-form open-system dynamics of qubit-oscillator pairs coupled by
// H = s1 (a + a^dagger), with amplitude damping of the oscillator at rate
// kappa into a bath of occupation n(T) and s1-dephasing of the qubit at rate
// gamma.
//
// In the normal-mode basis the four components obey decoupled equations
//   d_t v1 = -i (d_a* - d_a) v1 + L v1
//   d_t v2 = +i (d_a* - d_a) v2 + L v2
//   d_t v3 = +2i (a + a*) v3 + L v3 - gamma v3
//   d_t v4 = -2i (a + a*) v4 + L v4 - gamma v4
// (the drift in v1, v2 carries the factor {s1, 1 +- s1} = +-2 (1 +- s1)).
// Thermal initial data give
//   v1 = W_T(a + lambda), v2 = W_T(a - lambda),
//   v3 = +i W_T(a) exp(+mu (a + a*) + nu), v4 = -i W_T(a) exp(-mu (a + a*) + nu)
// with lambda = (2i/kappa)(1 - e^{-kappa t/2}), mu = 2 lambda,
// nu = kappa Delta int_0^t mu^2 - gamma t.
// Generic initial data are propagated with the Green's functions V1..V4,
// built from the thermal relaxation kernel K0.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "qme/gaussian.hpp"
#include "qme/params.hpp"
#include "qme/pauli_wigner.hpp"

namespace qme {

namespace detail {

// 2x - 4(1 - e^{-x}) + (1 - e^{-2x}) without cancellation for small x.
inline double decoherence_integral(double x) {
  if (x < 0.1) {
    double term = x * x / 2.0;  // x^n / n!
    double sum = 0.0;
    for (int n = 3; n < 25; ++n) {
      term *= x / n;
      const double c = std::ldexp(1.0, n) - 4.0;
      sum += (n % 2 == 1 ? c : -c) * term;
    }
    return sum;
  }
  return 2.0 * x + 4.0 * std::expm1(-x) - std::expm1(-2.0 * x);
}

// y - tanh(y) without cancellation for small y.
inline double tanh_defect(double y) {
  if (y < 0.1) {
    const double y2 = y * y;
    return y * y2 * (1.0 / 3.0 + y2 * (-2.0 / 15.0 + y2 * (17.0 / 315.0 + y2 * (-62.0 / 2835.0 + y2 * 1382.0 / 155925.0))));
  }
  return y - std::tanh(y);
}

}  // namespace detail

/// (2/kappa)(1 - e^{-kappa t/2}): the displacement magnitude reached at time t,
/// equal to t when kappa = 0.
inline double effective_time(double kappa, double t) {
  if (kappa == 0.0) return t;
  return -2.0 / kappa * std::expm1(-0.5 * kappa * t);
}

/// Scalar functions of the thermal-initial solution.
struct EvolutionFunctions {
  cplx lambda{0.0};
  cplx mu{0.0};
  cplx nu_mode{0.0};    // kappa Delta int_0^t mu^2, per oscillator
  double dephasing = 0; // gamma t, once per qubit

  /// Single-mode nu(t) including dephasing.
  cplx nu() const { return nu_mode - dephasing; }
};

inline EvolutionFunctions evolution_functions(double kappa, double gamma, double delta, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  EvolutionFunctions f;
  const double teff = effective_time(kappa, t);
  f.lambda = I * teff;
  f.mu = 2.0 * I * teff;
  if (kappa > 0.0) f.nu_mode = -16.0 * delta / (kappa * kappa) * detail::decoherence_integral(0.5 * kappa * t);
  f.dephasing = gamma * t;
  return f;
}

inline EvolutionFunctions evolution_functions(const SystemParams& p, double t) {
  return evolution_functions(p.kappa, p.gamma, delta_of(p), t);
}

/// Parameters of the Green's functions V1..V4 at time t.
struct KernelFunctions {
  double kappa = 0;
  double delta = 0.5;
  double t = 0;
  cplx lambda{0.0};   // V1, V2 shift
  cplx mu{0.0};       // V3, V4: (4i/kappa) tanh(kappa t/4)
  cplx nu_mode{0.0};  // kappa Delta int_0^t mu^2
  double dephasing = 0;

  double decay() const { return std::exp(-0.5 * kappa * t); }
  double spread() const { return -delta * std::expm1(-kappa * t); }
};

inline KernelFunctions kernel_functions(double kappa, double gamma, double delta, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  KernelFunctions k;
  k.kappa = kappa;
  k.delta = delta;
  k.t = t;
  k.lambda = I * effective_time(kappa, t);
  k.dephasing = gamma * t;
  if (kappa == 0.0) {
    k.mu = I * t;
  } else {
    const double y = 0.25 * kappa * t;
    k.mu = I * (4.0 / kappa) * std::tanh(y);
    k.nu_mode = -64.0 * delta / (kappa * kappa) * detail::tanh_defect(y);
  }
  return k;
}

inline KernelFunctions kernel_functions(const SystemParams& p, double t) {
  return kernel_functions(p.kappa, p.gamma, delta_of(p), t);
}

/// K0(a, a0, t), the relaxation kernel of the thermal Lindbladian (t > 0).
inline double relaxation_kernel(const KernelFunctions& k, cplx a, cplx a0) {
  const double s = k.spread();
  if (!(s > 0.0)) throw std::invalid_argument("relaxation kernel is a delta distribution at t = 0 or kappa = 0");
  return std::exp(-std::norm(a - k.decay() * a0) / s) / (pi * s);
}

/// V_j(a, a0, t), j = 1..4, without the qubit dephasing factor (t > 0, kappa > 0).
inline cplx kernel_value(const KernelFunctions& k, int j, cplx a, cplx a0) {
  switch (j) {
    case 1: return relaxation_kernel(k, a + k.lambda, a0);
    case 2: return relaxation_kernel(k, a - k.lambda, a0);
    case 3:
    case 4: {
      const double sgn = j == 3 ? 1.0 : -1.0;
      const cplx s = a + a0 + std::conj(a) + std::conj(a0);
      return relaxation_kernel(k, a, a0) * std::exp(sgn * k.mu * s + k.nu_mode);
    }
    default: throw std::invalid_argument("kernel id must be 1..4");
  }
}

/// Convolves one mode of f with kernel V_j (j = 1..4). The qubit dephasing
/// factor e^{-gamma t} of V3, V4 is not included; it belongs to the qubit.
template <std::size_t N>
GaussianSum<N> convolve_kernel(const GaussianSum<N>& f, std::size_t mode, int j, const KernelFunctions& k) {
  if (k.t == 0.0) return f;
  switch (j) {
    case 1:
    case 2: {
      std::array<cplx, N> s{};
      s[mode] = j == 1 ? k.lambda : -k.lambda;
      return shift(relax_mode(f, mode, k.kappa, k.delta, k.t), s);
    }
    case 3:
    case 4: {
      const cplx m = j == 3 ? k.mu : -k.mu;
      auto g = multiply_exponential(f, mode, m, m);
      g = relax_mode(g, mode, k.kappa, k.delta, k.t);
      return multiply_exponential(g, mode, m, m, std::exp(k.nu_mode));
    }
    default: throw std::invalid_argument("kernel id must be 1..4");
  }
}

inline GaussianSum<1> convolve_kernel(const GaussianSum<1>& f, int j, const SystemParams& p, double t) {
  return convolve_kernel<1>(f, 0, j, kernel_functions(p, t));
}

/// e^{-gamma t} on the coherence labels B3, B4, 1 otherwise.
inline double qubit_factor(int j, const KernelFunctions& k) {
  return j >= 3 ? std::exp(-k.dephasing) : 1.0;
}

// ---------------------------------------------------------------------------

/// One qubit, one oscillator: |g><g| (x) thermal evolved for time t.
inline WignerMatrix<1, 1> evolve_single(const SystemParams& p, double t) {
  p.validate();
  const double delta = delta_of(p);
  const auto f = evolution_functions(p, t);
  const GaussianSum<1> wt{thermal_form(delta)};
  NormalModeVector<1> n;
  n.v[0] = shift(wt, f.lambda);
  n.v[1] = shift(wt, -f.lambda);
  n.v[2] = multiply_exponential(wt, f.mu, f.mu, I * std::exp(f.nu()));
  n.v[3] = multiply_exponential(wt, -f.mu, -f.mu, -I * std::exp(f.nu()));
  return to_pauli(n);
}

/// One qubit coupled to two identical oscillators: |g><g| (x) thermal (x) thermal.
inline WignerMatrix<1, 2> evolve_two_mode(const SystemParams& p, double t) {
  p.validate();
  const double delta = delta_of(p);
  const auto f = evolution_functions(entangling_kappa(p), p.gamma, delta, t);
  const GaussianSum<1> wt{thermal_form(delta)};
  const GaussianSum<2> wt2 = outer(wt, wt);
  const cplx coh = std::exp(2.0 * f.nu_mode - f.dephasing);
  NormalModeVector<2> n;
  n.v[0] = shift(wt2, {f.lambda, f.lambda});
  n.v[1] = shift(wt2, {-f.lambda, -f.lambda});
  n.v[2] = multiply_exponential(multiply_exponential(wt2, 0, f.mu, f.mu), 1, f.mu, f.mu, I * coh);
  n.v[3] = multiply_exponential(multiply_exponential(wt2, 0, -f.mu, -f.mu), 1, -f.mu, -f.mu, -I * coh);
  return to_pauli(n);
}

/// Kernel-route evolution of arbitrary normal-mode data for one qubit coupled
/// to every mode of the sum.
template <std::size_t M>
NormalModeVector<M> evolve_generic(const NormalModeVector<M>& initial, const KernelFunctions& k) {
  NormalModeVector<M> out;
  for (int j = 1; j <= 4; ++j) {
    GaussianSum<M> g = initial.v[j - 1];
    for (std::size_t m = 0; m < M; ++m) g = convolve_kernel(g, m, j, k);
    out.v[j - 1] = qubit_factor(j, k) * g;
  }
  return out;
}

template <std::size_t M>
NormalModeVector<M> evolve_generic(const NormalModeVector<M>& initial, const SystemParams& p, double t) {
  p.validate();
  const double kappa = M > 1 ? entangling_kappa(p) : p.kappa;
  return evolve_generic(initial, kernel_functions(kappa, p.gamma, delta_of(p), t));
}

/// Second protocol stage: qubits A and B start in |gg>, the oscillators in
/// the conditional two-mode state wf; qubit A couples to mode a and B to b,
/// and the pairs evolve independently for time t.
inline WignerMatrix<2, 2> reciprocation_evolve(const GaussianSum<2>& wf, const SystemParams& p, double t) {
  p.validate();
  const auto k = kernel_functions(p, t);
  // |g><g| = 1/4 (B1 + B2 + i B3 - i B4)
  constexpr std::array<cplx, 4> ground{1.0, 1.0, I, -I};
  std::array<GaussianSum<2>, 4> along_a;
  for (int j = 1; j <= 4; ++j) along_a[j - 1] = convolve_kernel(wf, 0, j, k);
  NormalModeTensor<2, 2> n;
  for (int j = 1; j <= 4; ++j)
    for (int l = 1; l <= 4; ++l) {
      const cplx c = ground[j - 1] * ground[l - 1] * qubit_factor(j, k) * qubit_factor(l, k);
      n.v[4 * (j - 1) + (l - 1)] = c * convolve_kernel(along_a[j - 1], 1, l, k);
    }
  auto w = to_pauli(n);
  w.prune();
  return w;
}

}  // namespace qme
