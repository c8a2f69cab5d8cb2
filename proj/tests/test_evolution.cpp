#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qme/evolution.hpp"
#include "qme/fock_oracle.hpp"

using namespace qme;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double p_excited(const SystemParams& p, double t) {
  const auto w = evolve_two_mode(p, t);
  return integrate_full(w.components[0] + (-1.0) * w.components[3]).real();
}

}  // namespace

TEST(Evolution, ScalarFunctionLimits) {
  const auto f0 = evolution_functions(0.0, 0.0, 0.5, 1.7);
  EXPECT_NEAR(f0.lambda.imag(), 1.7, 1e-15);
  EXPECT_NEAR(f0.mu.imag(), 3.4, 1e-15);
  EXPECT_EQ(f0.nu(), cplx(0.0));

  // small kappa approaches the unitary values
  const auto f = evolution_functions(1e-7, 0.0, 0.5, 2.0);
  EXPECT_NEAR(f.lambda.imag(), 2.0, 1e-6);
  // nu ~ -(16 Delta / kappa^2) (2 x^3 / 3) = -(4/3) kappa Delta t^3 for small x = kappa t / 2
  EXPECT_NEAR(f.nu_mode.real(), -(4.0 / 3.0) * 1e-7 * 0.5 * 8.0, 1e-12);

  // series and closed form agree where they hand over
  EXPECT_NEAR(detail::decoherence_integral(0.1 - 1e-12), detail::decoherence_integral(0.1 + 1e-12), 1e-13);
  EXPECT_NEAR(detail::tanh_defect(0.1 - 1e-12), detail::tanh_defect(0.1 + 1e-12), 1e-13);
  EXPECT_THROW(evolution_functions(0.1, 0.0, 0.5, -1.0), std::invalid_argument);
}

TEST(Evolution, NoInteractionMeansGround) {
  SystemParams p{0.01, 0.02, 0.7};
  EXPECT_NEAR(p_excited(p, 0.0), 0.0, 1e-15);
}

TEST(Evolution, IdealExcitationProbability) {
  // coherent-state overlap: P(e) = (1 - exp(-8 Delta t^2)) / 2 for two modes at kappa = gamma = 0
  for (double temp : {0.0, 0.5}) {
    SystemParams p;
    p.temperature = temp;
    const double delta = delta_of(p);
    for (double t : {0.1, 0.3, 2.0}) EXPECT_NEAR(p_excited(p, t), 0.5 * (1.0 - std::exp(-8.0 * delta * t * t)), 1e-13);
  }
  SystemParams vac;
  EXPECT_NEAR(p_excited(vac, 2.0), 0.49999994373241264, 1e-13);  // (1 - e^{-16}) / 2
}

TEST(Evolution, SequentialIsDoubledDamping) {
  const SystemParams seq{0.01, 0.004, 0.4, Interaction::Sequential};
  const SystemParams sim{0.02, 0.004, 0.4, Interaction::Simultaneous};
  const auto a = evolve_two_mode(seq, 1.3);
  const auto b = evolve_two_mode(sim, 1.3);
  const std::array<cplx, 2> pt{cplx(0.2, -0.5), cplx(-0.3, 0.1)};
  EXPECT_LT(max_abs(a.at(pt) - b.at(pt)), 1e-15);
}

TEST(Evolution, KernelRouteEqualsClosedForm) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const SystemParams p : {SystemParams{0.01, 0.01, 1.0}, SystemParams{0.3, 0.1, 0.2}, SystemParams{2.0, 0.5, 0.0}}) {
    for (double t : {0.4, 2.5}) {
      const auto initial = to_normal_modes(ground_state_times(GaussianSum<1>{thermal_form(delta_of(p))}));
      const auto routed = to_pauli(evolve_generic(initial, p, t));
      const auto closed = evolve_single(p, t);
      for (int k = 0; k < 10; ++k) {
        const cplx a(u(rng), u(rng));
        EXPECT_LT(max_abs(routed.at({a}) - closed.at({a})), 1e-10);
      }
    }
  }
}

TEST(Evolution, KernelsAgreeWithQuadrature) {
  // direct numerical convolution int d^2 a0 V_j(a, a0) f(a0) for each label
  const auto k = kernel_functions(0.4, 0.0, 0.9, 1.5);
  const GaussianSum<1> f{make_form(0.5, -1.2, cplx(0.3, 0.1), cplx(0.3, -0.1))};
  for (int j = 1; j <= 4; ++j) {
    const auto g = convolve_kernel<1>(f, 0, j, k);
    for (cplx a : {cplx(0.1, 0.2), cplx(-0.6, 0.4)}) {
      cplx num{0.0};
      const double half = 6.0, h = 2.0 * half / 300;
      for (int x = 0; x <= 300; ++x)
        for (int y = 0; y <= 300; ++y) {
          const cplx a0(-half + x * h, -half + y * h);
          num += kernel_value(k, j, a, a0) * f({a0});
        }
      EXPECT_LT(std::abs(g({a}) - num * h * h), 1e-8) << "kernel " << j;
    }
  }
}

TEST(Evolution, UnitarySemigroup) {
  // two evolutions by t/2 through the kernels equal one by t when kappa = gamma = 0
  SystemParams p;
  p.temperature = 0.3;
  const double t = 1.4;
  const auto half = to_normal_modes(evolve_single(p, 0.5 * t));
  const auto twice = to_pauli(evolve_generic(half, p, 0.5 * t));
  const auto once = evolve_single(p, t);
  for (cplx a : {cplx(0.0), cplx(0.5, 1.0), cplx(-1.2, -0.3)}) EXPECT_LT(max_abs(twice.at({a}) - once.at({a})), 1e-12);
}

TEST(Evolution, DampedSemigroupThroughKernels) {
  const SystemParams p{0.2, 0.05, 0.5};
  const auto half = to_normal_modes(evolve_single(p, 0.8));
  const auto twice = to_pauli(evolve_generic(half, p, 0.8));
  const auto once = evolve_single(p, 1.6);
  for (cplx a : {cplx(0.0), cplx(0.5, 1.0)}) EXPECT_LT(max_abs(twice.at({a}) - once.at({a})), 1e-12);
}

TEST(Evolution, MatchesFockMasterEquation) {
  const SystemParams p{0.05, 0.03, 0.3};
  const fock::Layout l{1, 1, 30};
  const auto rho = fock::integrate(fock::ground_thermal_state(l, thermal_occupation(p.temperature)),
                                   fock::model_for(l, {{0, 0}}, p), 1.0);
  const auto w = evolve_single(p, 1.0);
  for (cplx a : {cplx(0.0), cplx(0.3, -0.9), cplx(-0.4, 1.2)})
    EXPECT_LT(max_abs(fock::wigner_point(rho, l, {a}) - w.at({a})), 1e-8);
}

TEST(Evolution, TwoModeNormalization) {
  for (const SystemParams p : {SystemParams{0.01, 0.01, 1.0}, SystemParams{0.5, 0.5, 0.1, Interaction::Sequential}}) {
    const auto w = evolve_two_mode(p, 2.0);
    EXPECT_NEAR(w.trace_integral().real(), 1.0, 1e-13);
    EXPECT_NEAR(w.trace_integral().imag(), 0.0, 1e-13);
  }
}

TEST(Evolution, RelaxationKernelIsNormalized) {
  const auto k = kernel_functions(0.1, 0.0, 1.2, 3.0);
  const cplx a0(0.4, -0.2);
  const cplx c = k.decay() * a0;
  const double half = 12.0 * std::sqrt(k.spread()), h = 2.0 * half / 200;
  double s = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) s += relaxation_kernel(k, c + cplx(-half + i * h, -half + j * h), a0);
  EXPECT_NEAR(s * h * h, 1.0, 1e-10);
  EXPECT_THROW(relaxation_kernel(kernel_functions(0.0, 0.0, 0.5, 1.0), 0.0, 0.0), std::invalid_argument);
}
