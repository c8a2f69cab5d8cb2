#pragma once

// Everything downstream of the evolved states: displaced-parity correlations
// and the CHSH functional, conditional two-qubit states after momentum or
// parity measurements of the oscillators, and entanglement figures of merit.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qme/evolution.hpp"
#include "qme/gaussian.hpp"
#include "qme/nelder_mead.hpp"
#include "qme/parallel.hpp"
#include "qme/params.hpp"
#include "qme/pauli_wigner.hpp"

namespace qme {

inline const double tsirelson_bound = 2.0 * std::sqrt(2.0);

/// Normalized two-oscillator state after the entangling qubit is measured,
/// together with the outcome probability.
inline std::pair<GaussianSum<2>, double> conditional_oscillator_state(const SystemParams& p, double t, Outcome f) {
  return project_qubit(evolve_two_mode(p, t), f);
}

// ---------------------------------------------------------------------------
// Bell test with displaced parities

/// P_same - P_diff for parities measured after displacements by -alpha, -beta.
inline double delta_p(const GaussianSum<2>& wf, cplx alpha, cplx beta) {
  return 0.25 * pi * pi * wf({alpha, beta}).real();
}

struct BellSettings {
  cplx alpha{0.0};
  cplx beta{0.0};
  cplx alpha_p{0.0};
  cplx beta_p{0.0};
  double value = 0.0;

  std::array<double, 8> packed() const {
    return {alpha.real(), alpha.imag(), beta.real(), beta.imag(),
            alpha_p.real(), alpha_p.imag(), beta_p.real(), beta_p.imag()};
  }
  static BellSettings unpack(const std::vector<double>& x) {
    return {{x[0], x[1]}, {x[2], x[3]}, {x[4], x[5]}, {x[6], x[7]}, 0.0};
  }
};

inline double bell_value(const GaussianSum<2>& wf, const BellSettings& s) {
  return delta_p(wf, s.alpha, s.beta) + delta_p(wf, s.alpha_p, s.beta) + delta_p(wf, s.alpha, s.beta_p) -
         delta_p(wf, s.alpha_p, s.beta_p);
}

struct BellStrategy {
  std::size_t starts = 32;
  double radius = 0.5;  // starts drawn from [-radius, radius]^8
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
};

namespace detail {

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * double(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Halton points in [0,1)^8 with a seeded Cranley-Patterson rotation.
inline std::vector<std::array<double, 8>> quasi_random_starts(std::size_t n, std::uint64_t seed) {
  static constexpr std::array<unsigned, 8> primes{2, 3, 5, 7, 11, 13, 17, 19};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 8> shift{};
  for (auto& s : shift) s = u(rng);
  std::vector<std::array<double, 8>> pts(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 8; ++d) {
      const double v = radical_inverse(i + 1, primes[d]) + shift[d];
      pts[i][d] = v - std::floor(v);
    }
  return pts;
}

}  // namespace detail

/// Maximizes the CHSH value over the four complex displacements with a
/// multi-start simplex search. Deterministic for a given strategy.
inline BellSettings bell_optimize(const GaussianSum<2>& wf, const BellStrategy& strategy = {}) {
  const auto starts = detail::quasi_random_starts(strategy.starts, strategy.seed);
  auto objective = [&](const std::vector<double>& x) { return -bell_value(wf, BellSettings::unpack(x)); };
  SimplexOptions opt;
  opt.initial_step = 0.25 * strategy.radius;
  opt.ftol = strategy.tolerance * 1e-2;
  opt.xtol = 1e-9 * strategy.radius;
  std::vector<SimplexResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    std::vector<double> x0(8);
    for (std::size_t d = 0; d < 8; ++d) x0[d] = strategy.radius * (2.0 * starts[i][d] - 1.0);
    results[i] = nelder_mead_polish(objective, x0, opt);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value < results[best].value) best = i;
  BellSettings s = BellSettings::unpack(results.at(best).x);
  s.value = -results[best].value;
  return s;
}

/// Settings expressed as displacement times the time they were optimized at;
/// the ideal optimum scales as 1/t, so these transfer across times.
struct FrozenSettings {
  std::array<cplx, 4> scaled{};
};

inline FrozenSettings freeze(const BellSettings& s, double t_ref) {
  return {{s.alpha * t_ref, s.beta * t_ref, s.alpha_p * t_ref, s.beta_p * t_ref}};
}

inline BellSettings thaw(const FrozenSettings& f, double t) {
  const double inv = 1.0 / std::max(t, 1e-9);
  return {f.scaled[0] * inv, f.scaled[1] * inv, f.scaled[2] * inv, f.scaled[3] * inv, 0.0};
}

/// Interaction time standing in for the t -> infinity limit; the ideal optimum
/// approaches 2 sqrt(2) / (1 + 2n)^2 with a deficit falling off as 1/t^2.
inline constexpr double large_time_reference = 64.0;

/// Search radius matched to the ideal optimum, whose displacements scale as 1/t.
inline BellStrategy ideal_strategy(double t, BellStrategy strategy = {}) {
  strategy.radius = std::min(strategy.radius, 0.5 * pi / t);
  return strategy;
}

/// Optimized CHSH value of the decoherence-free conditional state at time t.
inline BellSettings ideal_bell_optimum(Outcome f, double temperature, double t = large_time_reference,
                                       const BellStrategy& strategy = {}) {
  SystemParams ideal;
  ideal.temperature = temperature;
  return bell_optimize(conditional_oscillator_state(ideal, t, f).first, ideal_strategy(t, strategy));
}

/// Optimal settings of the decoherence-free state at a long reference time.
inline FrozenSettings ideal_reference_settings(Outcome f, double t_ref = large_time_reference, double temperature = 0.0,
                                               BellStrategy strategy = {}) {
  return freeze(ideal_bell_optimum(f, temperature, t_ref, strategy), t_ref);
}

/// CHSH value of the decohered conditional state at the ideal-limit settings,
/// with the ideal time replaced by the effective time (2/kappa)(1 - e^{-kappa t/2}).
/// A lower bound on the attainable maximum.
inline double bell_lower_bound(const SystemParams& p, double t, const FrozenSettings& frozen, Outcome f) {
  const double teff = effective_time(entangling_kappa(p), t);
  const auto wf = conditional_oscillator_state(p, t, f).first;
  return bell_value(wf, thaw(frozen, teff));
}

/// Large-time, decoherence-free maximum 2 sqrt(2) / (1 + 2 n(T))^2.
inline double bell_max_formula(double temperature) {
  const double n = thermal_occupation(temperature);
  return tsirelson_bound / ((1.0 + 2.0 * n) * (1.0 + 2.0 * n));
}

/// Temperature at which bell_max_formula drops to 2, by bisection.
inline double critical_temperature(double tol = 1e-9) {
  double lo = 0.05;
  double hi = 2.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (bell_max_formula(mid) > 2.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Two-qubit figures of merit

/// <psi+|rho|psi+>, psi+ = (|ge> + |eg>)/sqrt(2).
inline double fidelity_psi_plus(const TwoQubitState& s) {
  const auto& r = s.rho;
  return 0.5 * (r(1, 1) + r(2, 2) + r(1, 2) + r(2, 1)).real();
}

inline Eigen::Matrix4cd partial_transpose_b(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + b, 2 * c + d) = rho(2 * a + d, 2 * c + b);
  return out;
}

/// Sum of |negative eigenvalues| of the partial transpose (0.5 for a Bell state).
inline double negativity(const TwoQubitState& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(partial_transpose_b(s.rho));
  double neg = 0.0;
  for (int i = 0; i < 4; ++i) neg += std::max(0.0, -es.eigenvalues()(i));
  return neg;
}

struct EntanglementReport {
  double fidelity_psi_plus = 0.0;
  double negativity = 0.0;
  double outcome_probability = 0.0;
};

inline EntanglementReport report(const TwoQubitState& s, double probability) {
  return {fidelity_psi_plus(s), negativity(s), probability};
}

// ---------------------------------------------------------------------------
// Reciprocation read-out

/// Conditioning on momentum outcomes (p_a, p_b), with p = Im(alpha).
class MomentumConditioner {
public:
  explicit MomentumConditioner(const WignerMatrix<2, 2>& w4) {
    for (std::size_t l = 0; l < 16; ++l) marginals_[l] = integrate_marginal_x(w4.components[l]);
  }

  /// Joint momentum probability density at (p_a, p_b).
  double density(double pa, double pb) const { return 4.0 * marginals_[0]({pa, pb}).real(); }

  std::pair<TwoQubitState, double> operator()(double pa, double pb) const {
    std::array<cplx, 16> c{};
    for (std::size_t l = 0; l < 16; ++l) c[l] = marginals_[l]({pa, pb});
    const double dens = 4.0 * c[0].real();
    if (!(dens >= zero_probability_cutoff)) throw ZeroProbability("momentum outcome has vanishing density");
    return {qubit_density_matrix(c), dens};
  }

private:
  std::array<MarginalSum<2>, 16> marginals_;
};

inline std::pair<TwoQubitState, double> reciprocate_momentum(const WignerMatrix<2, 2>& w4, double pa, double pb) {
  return MomentumConditioner(w4)(pa, pb);
}

struct ParitySector {
  int parity_a = 1;
  int parity_b = 1;
  double probability = 0.0;
  std::optional<TwoQubitState> state;  // empty when the sector has zero probability
};

/// All four parity sectors. Per Pauli label the sector coefficient is
/// 1/4 [ int W + Pa (pi/2) int W(0, b) + Pb (pi/2) int W(a, 0) + Pa Pb (pi^2/4) W(0, 0) ].
inline std::array<ParitySector, 4> reciprocate_parity_all(const WignerMatrix<2, 2>& w4) {
  std::array<cplx, 16> full{}, at_a0{}, at_b0{}, origin{};
  for (std::size_t l = 0; l < 16; ++l) {
    const auto& c = w4.components[l];
    if (c.empty()) continue;
    full[l] = integrate_full(c);
    at_a0[l] = 0.5 * pi * integrate_full(evaluate_mode(c, 0, 0.0));
    at_b0[l] = 0.5 * pi * integrate_full(evaluate_mode(c, 1, 0.0));
    origin[l] = 0.25 * pi * pi * c({0.0, 0.0});
  }
  std::array<ParitySector, 4> out;
  std::size_t k = 0;
  for (int pa : {1, -1})
    for (int pb : {1, -1}) {
      std::array<cplx, 16> n{};
      for (std::size_t l = 0; l < 16; ++l)
        n[l] = 0.25 * (full[l] + double(pa) * at_a0[l] + double(pb) * at_b0[l] + double(pa * pb) * origin[l]);
      ParitySector s{pa, pb, 4.0 * n[0].real(), std::nullopt};
      if (s.probability >= zero_probability_cutoff) s.state = qubit_density_matrix(n);
      out[k++] = s;
    }
  return out;
}

inline std::pair<TwoQubitState, double> reciprocate_parity(const WignerMatrix<2, 2>& w4, int pa, int pb) {
  if ((pa != 1 && pa != -1) || (pb != 1 && pb != -1)) throw std::invalid_argument("parities must be +1 or -1");
  for (const auto& s : reciprocate_parity_all(w4)) {
    if (s.parity_a != pa || s.parity_b != pb) continue;
    if (!s.state) throw ZeroProbability("parity sector has zero probability");
    return {*s.state, s.probability};
  }
  throw std::logic_error("unreachable");
}

enum class SectorWeighting { Probability, Uniform };

/// Negativity averaged over the parity sectors.
inline double averaged_negativity(const std::array<ParitySector, 4>& sectors,
                                  SectorWeighting weighting = SectorWeighting::Probability) {
  double acc = 0.0;
  for (const auto& s : sectors) {
    if (!s.state) continue;
    const double w = weighting == SectorWeighting::Probability ? s.probability : 0.25;
    acc += w * negativity(*s.state);
  }
  return acc;
}

/// Full protocol: entangle for t1, measure the entangling qubit, then
/// reciprocate onto qubits A, B for t2.
inline std::pair<WignerMatrix<2, 2>, double> reciprocation_state(const SystemParams& p, double t1, double t2, Outcome f) {
  auto [wf, prob] = conditional_oscillator_state(p, t1, f);
  return {reciprocation_evolve(wf, p, t2), prob};
}

}  // namespace qme
