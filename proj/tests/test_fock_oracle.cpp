#include <cmath>

#include <gtest/gtest.h>

#include "qme/fock_oracle.hpp"

using namespace qme;
using fock::Dense;

namespace {

Dense mode_thermal(int cutoff, double n) {
  return fock::thermal_populations(cutoff, n).cast<cplx>().asDiagonal();
}

}  // namespace

TEST(FockOracle, ThermalStateIsStationary) {
  const fock::Layout l{1, 1, 40};
  const SystemParams p{0.7, 0.0, 0.5};
  fock::Model m = fock::model_for(l, {}, p);
  const Dense rho = fock::ground_thermal_state(l, thermal_occupation(p.temperature));
  const fock::Liouvillian lv(m);
  EXPECT_LT(lv(rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FockOracle, RelaxesToBathOccupation) {
  const fock::Layout l{1, 1, 30};
  const SystemParams p{1.0, 0.0, 0.8};
  const Dense rho = fock::integrate(fock::ground_thermal_state(l, 0.0), fock::model_for(l, {}, p), 12.0, 1e-2);
  const double target = thermal_occupation(p.temperature);
  double n = 0.0;
  for (int k = 0; k < l.cutoff; ++k) n += k * rho(k, k).real();
  // <n>(t) = n_T (1 - e^{-kappa t})
  EXPECT_NEAR(n, target * (1.0 - std::exp(-12.0)), 1e-8);
}

TEST(FockOracle, VacuumWigner) {
  const fock::Layout l{0, 1, 20};
  Dense vac = Dense::Zero(20, 20);
  vac(0, 0) = 1.0;
  for (cplx a : {cplx(0.0), cplx(0.5, -0.3), cplx(1.5, 1.0)})
    EXPECT_NEAR(fock::wigner_of_block(vac, l, {a}).real(), 2.0 / pi * std::exp(-2.0 * std::norm(a)), 1e-14);
}

TEST(FockOracle, ParityOfThermalState) {
  // n = 1: P(even) = sum_k (1/2)^{2k+1} = 2/3
  const Dense rho = mode_thermal(80, 1.0);
  EXPECT_NEAR(fock::parity_probability(rho, +1), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(fock::parity_probability(rho, -1), 1.0 / 3.0, 1e-12);
}

TEST(FockOracle, DisplacedParityIsExact) {
  // against the exponential of the generator on a much larger space
  const int n = 10, big = 160;
  const cplx alpha(0.9, -1.4);
  const Dense a = Dense(fock::annihilation(big));
  const Dense d = Dense(alpha * a.adjoint() - std::conj(alpha) * a).exp();
  Eigen::VectorXcd par(big);
  for (int k = 0; k < big; ++k) par(k) = k % 2 == 0 ? 1.0 : -1.0;
  const Dense ref = (d * par.asDiagonal() * d.adjoint()).topLeftCorner(n, n);
  EXPECT_LT((fock::displaced_parity(n, alpha) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FockOracle, UnitaryMatchesIntegrator) {
  const fock::Layout l{1, 1, 30};
  const Dense rho0 = fock::ground_thermal_state(l, 0.1);
  const Dense u = fock::unitary_single(30, 0.8);
  const Dense exact = u * rho0 * u.adjoint();
  const Dense rk = fock::integrate(rho0, fock::model_for(l, {{0, 0}}, SystemParams{}), 0.8, 1e-3);
  EXPECT_LT((exact - rk).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FockOracle, IntegratorPreservesTraceAndHermiticity) {
  const fock::Layout l{1, 1, 25};
  const SystemParams p{0.3, 0.2, 0.6};
  const Dense rho = fock::integrate(fock::ground_thermal_state(l, thermal_occupation(p.temperature)),
                                    fock::model_for(l, {{0, 0}}, p), 1.0);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  const auto [rg, pg] = fock::measure_qubit(rho, l, 0, Outcome::g);
  const auto [re, pe] = fock::measure_qubit(rho, l, 0, Outcome::e);
  EXPECT_NEAR(pg + pe, 1.0, 1e-12);
  EXPECT_NEAR(rg.trace().real(), 1.0, 1e-12);
}

TEST(FockOracle, TruncationOverflowIsReported) {
  const fock::Layout l{1, 1, 8};
  EXPECT_THROW(fock::integrate(fock::ground_thermal_state(l, 0.0), fock::model_for(l, {{0, 0}}, SystemParams{}), 2.0),
               fock::TruncationOverflow);
}

TEST(FockOracle, MomentumEigenvectors) {
  // vacuum momentum density sqrt(2/pi) exp(-2 y^2)
  Dense vac = Dense::Zero(30, 30);
  vac(0, 0) = 1.0;
  for (double y : {0.0, 0.4, -1.1}) EXPECT_NEAR(fock::momentum_density(vac, y), std::sqrt(2.0 / pi) * std::exp(-2.0 * y * y), 1e-13);
  // a thermal density integrates to one
  const auto pdf = fock::momentum_pdf(mode_thermal(40, 0.6), -8.0, 8.0, 1601);
  double s = 0.0;
  for (double v : pdf) s += v * 0.01;
  EXPECT_NEAR(s, 1.0, 1e-9);
}
