#pragma once

// Qubit-operator-valued Wigner functions.
//
// Qubit basis ordering is (g, e), so sigma_3 = diag(1, -1) and |g> is the +1
// eigenvector. A WignerMatrix stores one GaussianSum per Pauli tensor label;
// label index for two qubits is 4*p_A + p_B with p in {1, s1, s2, s3}.
//
// Normal-mode basis for one qubit:
//   B1 = 1 + s1,  B2 = 1 - s1,  B3 = s2 - i s3,  B4 = s2 + i s3,
//   W = 1/4 sum_j v_j B_j.
// For two qubits W = 1/16 sum_jk v_jk B_j (x) B_k.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qme/gaussian.hpp"

namespace qme {

class ZeroProbability : public std::runtime_error {
public:
  explicit ZeroProbability(const std::string& what) : std::runtime_error(what) {}
};

class NonPositive : public std::runtime_error {
public:
  explicit NonPositive(const std::string& what) : std::runtime_error(what) {}
};

enum class Outcome { g, e };

inline int sigma3_sign(Outcome f) { return f == Outcome::g ? +1 : -1; }

inline std::string to_string(Outcome f) { return f == Outcome::g ? "g" : "e"; }

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "g") return Outcome::g;
  if (s == "e") return Outcome::e;
  throw std::invalid_argument("outcome must be 'g' or 'e', got '" + s + "'");
}

inline constexpr double zero_probability_cutoff = 1e-12;
inline constexpr double positivity_tolerance = 1e-9;

/// sigma_p for p = 0..3 (identity first).
inline Eigen::Matrix2cd pauli(int p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -I, I, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli index");
  }
  return m;
}

/// B_j for j = 0..3 (B1..B4 above).
inline Eigen::Matrix2cd normal_mode_basis(int j) {
  switch (j) {
    case 0: return pauli(0) + pauli(1);
    case 1: return pauli(0) - pauli(1);
    case 2: return pauli(2) - I * pauli(3);
    case 3: return pauli(2) + I * pauli(3);
    default: throw std::out_of_range("normal mode index");
  }
}

namespace detail {

inline constexpr std::size_t labels_for(std::size_t qubits) { return qubits == 1 ? 4 : 16; }

// Pauli coefficient p of 1/4 sum_j v_j B_j.
inline const std::array<std::array<cplx, 4>, 4>& normal_to_pauli() {
  static const std::array<std::array<cplx, 4>, 4> m{{
      {0.25, 0.25, 0.0, 0.0},
      {0.25, -0.25, 0.0, 0.0},
      {0.0, 0.0, 0.25, 0.25},
      {0.0, 0.0, -0.25 * I, 0.25 * I},
  }};
  return m;
}

// Inverse of normal_to_pauli.
inline const std::array<std::array<cplx, 4>, 4>& pauli_to_normal() {
  static const std::array<std::array<cplx, 4>, 4> m{{
      {2.0, 2.0, 0.0, 0.0},
      {2.0, -2.0, 0.0, 0.0},
      {0.0, 0.0, 2.0, 2.0 * I},
      {0.0, 0.0, 2.0, -2.0 * I},
  }};
  return m;
}

template <std::size_t Q, std::size_t M>
std::array<GaussianSum<M>, labels_for(Q)> apply_tensor_map(const std::array<std::array<cplx, 4>, 4>& m,
                                                           const std::array<GaussianSum<M>, labels_for(Q)>& in) {
  std::array<GaussianSum<M>, labels_for(Q)> out;
  if constexpr (Q == 1) {
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        if (m[r][c] != cplx{0.0}) out[r] += m[r][c] * in[c];
  } else {
    for (std::size_t r1 = 0; r1 < 4; ++r1)
      for (std::size_t r2 = 0; r2 < 4; ++r2)
        for (std::size_t c1 = 0; c1 < 4; ++c1)
          for (std::size_t c2 = 0; c2 < 4; ++c2) {
            const cplx f = m[r1][c1] * m[r2][c2];
            if (f != cplx{0.0}) out[4 * r1 + r2] += f * in[4 * c1 + c2];
          }
  }
  return out;
}

}  // namespace detail

/// Wigner matrix of Q qubits (1 or 2) and M modes, in the Pauli tensor basis.
template <std::size_t Q, std::size_t M>
struct WignerMatrix {
  static_assert(Q == 1 || Q == 2, "one or two qubits");
  static constexpr std::size_t qubits = Q;
  static constexpr std::size_t modes = M;
  static constexpr std::size_t labels = detail::labels_for(Q);
  static constexpr int dim = Q == 1 ? 2 : 4;
  using Matrix = Eigen::Matrix<cplx, dim, dim>;

  std::array<GaussianSum<M>, labels> components;

  /// Qubit-space matrix at one phase-space point.
  Matrix at(const std::array<cplx, M>& point) const {
    Matrix w = Matrix::Zero();
    for (std::size_t l = 0; l < labels; ++l) {
      if (components[l].empty()) continue;
      w += components[l](point) * label_matrix(l);
    }
    return w;
  }

  /// Integral of the qubit trace over all of phase space.
  cplx trace_integral() const { return double(dim) * integrate_full(components[0]); }

  WignerMatrix& prune(double eps = 1e-14) {
    for (auto& c : components) c.prune(eps);
    return *this;
  }

  static Matrix label_matrix(std::size_t label) {
    if constexpr (Q == 1) {
      return pauli(static_cast<int>(label));
    } else {
      const Eigen::Matrix2cd a = pauli(static_cast<int>(label / 4));
      const Eigen::Matrix2cd b = pauli(static_cast<int>(label % 4));
      Matrix k;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.template block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      return k;
    }
  }
};

/// Normal-mode components v_j (one qubit) or v_jk (two qubits, index 4j+k).
template <std::size_t Q, std::size_t M>
struct NormalModeTensor {
  std::array<GaussianSum<M>, detail::labels_for(Q)> v;
};

template <std::size_t M>
using NormalModeVector = NormalModeTensor<1, M>;

template <std::size_t Q, std::size_t M>
NormalModeTensor<Q, M> to_normal_modes(const WignerMatrix<Q, M>& w) {
  return {detail::apply_tensor_map<Q, M>(detail::pauli_to_normal(), w.components)};
}

template <std::size_t Q, std::size_t M>
WignerMatrix<Q, M> to_pauli(const NormalModeTensor<Q, M>& n) {
  return {detail::apply_tensor_map<Q, M>(detail::normal_to_pauli(), n.v)};
}

/// |g><g| (x) f  for one qubit.
template <std::size_t M>
WignerMatrix<1, M> ground_state_times(const GaussianSum<M>& f) {
  WignerMatrix<1, M> w;
  w.components[0] = 0.5 * f;
  w.components[3] = 0.5 * f;
  return w;
}

/// Conditional oscillator state <f|W|f> / N and the probability N.
template <std::size_t M>
std::pair<GaussianSum<M>, double> project_qubit(const WignerMatrix<1, M>& w, Outcome f) {
  GaussianSum<M> proj = w.components[0] + double(sigma3_sign(f)) * w.components[3];
  const double prob = integrate_full(proj).real();
  if (!(prob >= zero_probability_cutoff))
    throw ZeroProbability("qubit outcome " + to_string(f) + " has probability " + std::to_string(prob));
  proj *= 1.0 / prob;
  return {std::move(proj), prob};
}

/// Projects qubit `index` (0 = A, 1 = B) of a two-qubit Wigner matrix.
template <std::size_t M>
std::pair<WignerMatrix<1, M>, double> project_qubit(const WignerMatrix<2, M>& w, Outcome f, std::size_t index) {
  const double s = sigma3_sign(f);
  WignerMatrix<1, M> out;
  for (std::size_t q = 0; q < 4; ++q) {
    const std::size_t li = index == 0 ? q : 4 * q;  // label with measured qubit at identity
    const std::size_t lz = index == 0 ? 12 + q : 4 * q + 3;
    out.components[q] = w.components[li] + s * w.components[lz];
  }
  const double prob = out.trace_integral().real();
  if (!(prob >= zero_probability_cutoff))
    throw ZeroProbability("qubit outcome " + to_string(f) + " has probability " + std::to_string(prob));
  for (auto& c : out.components) c *= 1.0 / prob;
  return {std::move(out), prob};
}

/// Two-qubit density matrix, Hermitian with unit trace and non-negative
/// spectrum (small negative eigenvalues from round-off clipped).
struct TwoQubitState {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();

  static TwoQubitState from_unnormalized(const Eigen::Matrix4cd& m) {
    const Eigen::Matrix4cd h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw NonPositive("two-qubit matrix has non-positive trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h / tr);
    Eigen::Vector4d ev = es.eigenvalues();
    if (ev.minCoeff() < -positivity_tolerance)
      throw NonPositive("two-qubit matrix has eigenvalue " + std::to_string(ev.minCoeff()));
    ev = ev.cwiseMax(0.0);
    ev /= ev.sum();
    return {es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint()};
  }
};

/// Builds rho = sum_L c_L sigma_L from the 16 Pauli coefficients left after an
/// oscillator conditioning functional, normalized to unit trace.
inline TwoQubitState qubit_density_matrix(const std::array<cplx, 16>& pauli_coeffs) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (std::size_t l = 0; l < 16; ++l) m += pauli_coeffs[l] * WignerMatrix<2, 0>::label_matrix(l);
  return TwoQubitState::from_unnormalized(m);
}

/// Inverse of qubit_density_matrix: c_L = Tr(sigma_L rho) / 4.
inline std::array<cplx, 16> pauli_coefficients(const Eigen::Matrix4cd& rho) {
  std::array<cplx, 16> c{};
  for (std::size_t l = 0; l < 16; ++l) c[l] = (WignerMatrix<2, 0>::label_matrix(l) * rho).trace() / 4.0;
  return c;
}

}  // namespace qme
