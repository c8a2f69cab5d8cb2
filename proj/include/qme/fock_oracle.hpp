#pragma once

// Brute-force reference: qubits and oscillators in a truncated Fock basis,
// integrated with fixed-step RK4 on the full Lindblad master equation.
//
// Basis ordering: qubits are the most significant indices (g = 0, e = 1),
// followed by the oscillator modes, each truncated at `cutoff` levels.

#include <cmath>
#include <cstdio>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "qme/gaussian.hpp"
#include "qme/params.hpp"
#include "qme/pauli_wigner.hpp"

namespace qme::fock {

using Dense = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<cplx>;

class TruncationOverflow : public std::runtime_error {
public:
  explicit TruncationOverflow(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double tail_limit = 1e-8;

struct Layout {
  int qubits = 1;
  int modes = 1;
  int cutoff = 40;

  int mode_dim() const {
    int d = 1;
    for (int m = 0; m < modes; ++m) d *= cutoff;
    return d;
  }
  int qubit_dim() const { return 1 << qubits; }
  int dim() const { return qubit_dim() * mode_dim(); }
};

/// Qubit q couples to mode m through s1^(q) (a_m + a_m^dagger).
struct Coupling {
  int qubit;
  int mode;
};

struct Model {
  Layout layout;
  std::vector<Coupling> couplings;
  double kappa = 0.0;
  double gamma = 0.0;
  double occupation = 0.0;  // n(T)
};

// ---------------------------------------------------------------------------

inline Sparse kron(const Sparse& a, const Sparse& b) {
  Sparse out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (Sparse::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (Sparse::InnerIterator ib(b, kb); ib; ++ib)
          trip.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline Sparse sparse_identity(int n) {
  Sparse id(n, n);
  id.setIdentity();
  return id;
}

inline Sparse annihilation(int cutoff) {
  Sparse a(cutoff, cutoff);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int n = 1; n < cutoff; ++n) trip.emplace_back(n - 1, n, std::sqrt(double(n)));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// Embeds an operator acting on one subsystem (qubits first, then modes).
inline Sparse embed(const Layout& l, int slot, const Sparse& op) {
  const int n_slots = l.qubits + l.modes;
  Sparse out = sparse_identity(1);
  for (int s = 0; s < n_slots; ++s) {
    const int d = s < l.qubits ? 2 : l.cutoff;
    out = kron(out, s == slot ? op : sparse_identity(d));
  }
  return out;
}

inline Sparse mode_op(const Layout& l, int mode, const Sparse& op) { return embed(l, l.qubits + mode, op); }

inline Sparse qubit_op(const Layout& l, int qubit, const Eigen::Matrix2cd& op) {
  return embed(l, qubit, Sparse(op.sparseView()));
}

/// Applies the Liouvillian without forming the superoperator.
class Liouvillian {
public:
  explicit Liouvillian(const Model& m) : model_(m) {
    const Layout& l = m.layout;
    Sparse h(l.dim(), l.dim());
    for (const auto& c : m.couplings) {
      const Sparse a = mode_op(l, c.mode, annihilation(l.cutoff));
      h += qubit_op(l, c.qubit, pauli(1)) * Sparse(a + Sparse(a.adjoint()));
    }
    Sparse k = cplx(0.0, -1.0) * h;
    if (m.kappa > 0.0) {
      for (int mode = 0; mode < l.modes; ++mode) {
        Sparse a = mode_op(l, mode, annihilation(l.cutoff));
        Sparse ad = a.adjoint();
        k -= (0.5 * m.kappa * (m.occupation + 1.0)) * Sparse(ad * a);
        k -= (0.5 * m.kappa * m.occupation) * Sparse(a * ad);
        jumps_.push_back({m.kappa * (m.occupation + 1.0), a});
        if (m.occupation > 0.0) jumps_.push_back({m.kappa * m.occupation, ad});
      }
    }
    if (m.gamma > 0.0) {
      for (int q = 0; q < l.qubits; ++q) {
        jumps_.push_back({0.5 * m.gamma, qubit_op(l, q, pauli(1))});
        k -= cplx(0.25 * m.gamma) * sparse_identity(l.dim());
      }
    }
    k.makeCompressed();
    effective_ = std::move(k);
  }

  /// L(rho) for Hermitian rho.
  Dense operator()(const Dense& rho) const {
    Dense kr = effective_ * rho;
    Dense out = kr + kr.adjoint();
    for (const auto& [rate, c] : jumps_) {
      Dense cr = c * rho;
      out.noalias() += rate * (c * Dense(cr.adjoint()));
    }
    return out;
  }

  const Model& model() const { return model_; }

private:
  struct Jump {
    double rate;
    Sparse op;
  };
  Model model_;
  Sparse effective_;  // -iH - 1/2 sum rate C^dagger C
  std::vector<Jump> jumps_;
};

// ---------------------------------------------------------------------------

/// Population in Fock levels >= cutoff - 2 of the most populated mode tail.
inline double tail_population(const Dense& rho, const Layout& l) {
  double worst = 0.0;
  const int md = l.mode_dim();
  for (int mode = 0; mode < l.modes; ++mode) {
    int stride = 1;
    for (int m = mode + 1; m < l.modes; ++m) stride *= l.cutoff;
    double tail = 0.0;
    for (int i = 0; i < l.dim(); ++i) {
      const int level = (i % md) / stride % l.cutoff;
      if (level >= l.cutoff - 2) tail += rho(i, i).real();
    }
    worst = std::max(worst, tail);
  }
  return worst;
}

inline void check_tail(const Dense& rho, const Layout& l) {
  const double tail = tail_population(rho, l);
  if (tail > tail_limit) {
    char buf[80];
    std::snprintf(buf, sizeof buf, " leaves tail population %.3e above %.1e", tail, tail_limit);
    throw TruncationOverflow("Fock truncation " + std::to_string(l.cutoff) + buf);
  }
}

/// Fixed-step RK4 up to time t.
inline Dense integrate(const Dense& rho0, const Model& m, double t, double dt = 1e-3) {
  if (t < 0.0 || !(dt > 0.0)) throw std::invalid_argument("integrate needs t >= 0 and dt > 0");
  const Liouvillian lv(m);
  Dense rho = rho0;
  const long steps = static_cast<long>(std::ceil(t / dt - 1e-12));
  if (steps == 0) return rho;
  const double h = t / double(steps);
  for (long s = 0; s < steps; ++s) {
    const Dense k1 = lv(rho);
    const Dense k2 = lv(rho + 0.5 * h * k1);
    const Dense k3 = lv(rho + 0.5 * h * k2);
    const Dense k4 = lv(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s % 200 == 199) check_tail(rho, m.layout);
  }
  check_tail(rho, m.layout);
  return rho;
}

/// Halves dt until two successive results agree to `tol` (max abs entry).
inline Dense integrate_converged(const Dense& rho0, const Model& m, double t, double dt = 1e-3, double tol = 1e-10,
                                 int max_halvings = 6) {
  Dense prev = integrate(rho0, m, t, dt);
  for (int k = 0; k < max_halvings; ++k) {
    dt *= 0.5;
    Dense next = integrate(rho0, m, t, dt);
    if ((next - prev).cwiseAbs().maxCoeff() < tol) return next;
    prev = std::move(next);
  }
  return prev;
}

// ---------------------------------------------------------------------------
// States

inline Eigen::VectorXd thermal_populations(int cutoff, double occupation) {
  Eigen::VectorXd p(cutoff);
  if (occupation <= 0.0) {
    p.setZero();
    p(0) = 1.0;
    return p;
  }
  const double r = occupation / (occupation + 1.0);
  double v = 1.0 / (occupation + 1.0);
  for (int n = 0; n < cutoff; ++n, v *= r) p(n) = v;
  return p / p.sum();
}

/// |g...g><g...g| (x) thermal^(x modes)
inline Dense ground_thermal_state(const Layout& l, double occupation) {
  const Eigen::VectorXd p = thermal_populations(l.cutoff, occupation);
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(1);
  for (int m = 0; m < l.modes; ++m) {
    Eigen::VectorXd next(diag.size() * l.cutoff);
    for (int i = 0; i < diag.size(); ++i) next.segment(i * l.cutoff, l.cutoff) = diag(i) * p;
    diag = next;
  }
  Dense rho = Dense::Zero(l.dim(), l.dim());
  rho.topLeftCorner(l.mode_dim(), l.mode_dim()) = diag.cast<cplx>().asDiagonal();
  return rho;
}

/// |g...g><g...g| (x) rho_modes for `qubits` fresh qubits.
inline Dense attach_ground_qubits(const Dense& rho_modes, const Layout& l) {
  Dense rho = Dense::Zero(l.dim(), l.dim());
  rho.topLeftCorner(l.mode_dim(), l.mode_dim()) = rho_modes;
  return rho;
}

/// D(alpha) = exp(alpha a^dagger - alpha* a) at truncation cutoff + guard, cropped.
inline Dense displacement(int cutoff, cplx alpha, int guard = 10) {
  const int n = cutoff + guard;
  Dense a = Dense(annihilation(n));
  Dense gen = alpha * a.adjoint() - std::conj(alpha) * a;
  Dense d = gen.exp();
  return d.topLeftCorner(cutoff, cutoff);
}

/// U(t) = D(-i s1 t) for one qubit and one mode, = P+ (x) D(-it) + P- (x) D(it).
inline Dense unitary_single(int cutoff, double t) {
  const Dense dm = displacement(cutoff, cplx(0.0, -t), 2 * cutoff);
  const Dense dp = displacement(cutoff, cplx(0.0, t), 2 * cutoff);
  Dense u(2 * cutoff, 2 * cutoff);
  // P+- = (1 +- s1)/2 in the (g, e) basis
  u.topLeftCorner(cutoff, cutoff) = 0.5 * (dm + dp);
  u.bottomRightCorner(cutoff, cutoff) = 0.5 * (dm + dp);
  u.topRightCorner(cutoff, cutoff) = 0.5 * (dm - dp);
  u.bottomLeftCorner(cutoff, cutoff) = 0.5 * (dm - dp);
  return u;
}

namespace detail {

/// Generalized Laguerre polynomial L_n^(k)(x) by the three-term recurrence.
inline double laguerre(int n, int k, double x) {
  double l0 = 1.0;
  if (n == 0) return l0;
  double l1 = 1.0 + k - x;
  for (int j = 1; j < n; ++j) {
    const double l2 = ((2.0 * j + 1.0 + k - x) * l1 - (j + k) * l0) / (j + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

}  // namespace detail

/// D(alpha) Pi D(alpha)^dagger for one mode, from the closed form
///   <n|D Pi D^dagger|m> = (-1)^n sqrt(n!/m!) (2 alpha*)^(m-n) e^{-2|alpha|^2} L_n^(m-n)(4|alpha|^2),  m >= n,
/// (Hermitian), so no truncation of the displacement itself is involved.
inline Dense displaced_parity(int cutoff, cplx alpha) {
  const double x = 4.0 * std::norm(alpha);
  const double damp = -2.0 * std::norm(alpha);
  Dense o(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n)
    for (int m = n; m < cutoff; ++m) {
      const double log_ratio = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0));
      const double sign = n % 2 == 0 ? 1.0 : -1.0;
      const cplx v = sign * std::exp(log_ratio + damp) * std::pow(2.0 * std::conj(alpha), m - n) *
                     detail::laguerre(n, m - n, x);
      o(n, m) = v;
      o(m, n) = std::conj(v);
    }
  return o;
}

/// Wigner function of a mode-space operator X via displaced parity:
///   W = (2/pi)^modes Tr[X D Pi D^dagger].
inline cplx wigner_of_block(const Dense& x, const Layout& l, const std::vector<cplx>& point) {
  if (static_cast<int>(point.size()) != l.modes) throw std::invalid_argument("point dimension");
  const int n = l.cutoff;
  if (l.modes == 1) {
    const Dense p = displaced_parity(n, point[0]);
    return (2.0 / pi) * (x.cwiseProduct(p.transpose())).sum();
  }
  if (l.modes == 2) {
    const Dense pa = displaced_parity(n, point[0]);
    const Dense pb = displaced_parity(n, point[1]);
    // Tr[X (Pa (x) Pb)] = sum X_{(ij),(kl)} Pa(k,i) Pb(l,j)
    cplx s{0.0};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const cplx pki = pa(k, i);
        if (pki == cplx{0.0}) continue;
        s += pki * (x.block(i * n, k * n, n, n).cwiseProduct(pb.transpose())).sum();
      }
    return (4.0 / (pi * pi)) * s;
  }
  throw std::invalid_argument("wigner_of_block supports one or two modes");
}

/// Qubit-space matrix of Wigner values, entry (i, j) = Wigner of <i|rho|j>.
inline Dense wigner_point(const Dense& rho, const Layout& l, const std::vector<cplx>& point) {
  check_tail(rho, l);
  const int qd = l.qubit_dim();
  const int md = l.mode_dim();
  Dense w(qd, qd);
  for (int i = 0; i < qd; ++i)
    for (int j = 0; j < qd; ++j) w(i, j) = wigner_of_block(rho.block(i * md, j * md, md, md), l, point);
  return w;
}

// ---------------------------------------------------------------------------
// Measurements

/// Projects qubit `q` onto |f>, removing it; returns the normalized state.
inline std::pair<Dense, double> measure_qubit(const Dense& rho, const Layout& l, int q, Outcome f) {
  const int bit = f == Outcome::g ? 0 : 1;
  const int lower = l.dim() >> (q + 1);           // block size below qubit q
  const int upper = 1 << q;                        // number of blocks above
  Layout out_l = l;
  out_l.qubits -= 1;
  Dense out(out_l.dim(), out_l.dim());
  for (int hi = 0; hi < upper; ++hi)
    for (int hj = 0; hj < upper; ++hj) {
      const int si = (hi * 2 + bit) * lower;
      const int sj = (hj * 2 + bit) * lower;
      out.block(hi * lower, hj * lower, lower, lower) = rho.block(si, sj, lower, lower);
    }
  const double prob = out.trace().real();
  if (!(prob >= zero_probability_cutoff))
    throw ZeroProbability("qubit outcome " + to_string(f) + " has probability " + std::to_string(prob));
  return {out / prob, prob};
}

/// Partial trace over the oscillators.
inline Dense qubit_marginal(const Dense& rho, const Layout& l) {
  const int qd = l.qubit_dim();
  const int md = l.mode_dim();
  Dense r(qd, qd);
  for (int i = 0; i < qd; ++i)
    for (int j = 0; j < qd; ++j) r(i, j) = rho.block(i * md, j * md, md, md).trace();
  return r;
}

/// Probability of parity `sign` on a single-mode state.
inline double parity_probability(const Dense& rho_mode, int sign) {
  double p = 0.0;
  for (int n = 0; n < rho_mode.rows(); ++n) {
    const int par = n % 2 == 0 ? 1 : -1;
    if (par == sign) p += rho_mode(n, n).real();
  }
  return p;
}

/// Unnormalized qubit state Tr_osc[P_a P_b rho] for parity outcomes (pa, pb),
/// and its probability.
inline std::pair<Dense, double> qubit_state_after_parity(const Dense& rho, const Layout& l, int pa, int pb) {
  if (l.modes != 2) throw std::invalid_argument("parity conditioning expects two modes");
  const int qd = l.qubit_dim();
  const int md = l.mode_dim();
  const int n = l.cutoff;
  Dense r = Dense::Zero(qd, qd);
  for (int i = 0; i < qd; ++i)
    for (int j = 0; j < qd; ++j) {
      cplx s{0.0};
      for (int na = 0; na < n; ++na) {
        if (((na % 2 == 0) ? 1 : -1) != pa) continue;
        for (int nb = 0; nb < n; ++nb) {
          if (((nb % 2 == 0) ? 1 : -1) != pb) continue;
          const int k = na * n + nb;
          s += rho(i * md + k, j * md + k);
        }
      }
      r(i, j) = s;
    }
  const double prob = r.trace().real();
  if (!(prob >= zero_probability_cutoff)) throw ZeroProbability("parity sector has zero probability");
  return {r, prob};
}

/// Vector <n|y> for the quadrature Y = (a - a^dagger)/(2i), whose eigenvalue
/// is Im(alpha) in the Wigner picture.
inline Eigen::VectorXcd momentum_eigenvector(int cutoff, double y) {
  // normalized Hermite functions h_n(z), z = sqrt(2) y; <x|n> = 2^{1/4} h_n(z)
  Eigen::VectorXcd v(cutoff);
  const double z = std::sqrt(2.0) * y;
  double hm1 = 0.0;
  double h = std::pow(pi, -0.25) * std::exp(-0.5 * z * z);
  cplx phase{1.0};
  for (int n = 0; n < cutoff; ++n) {
    v(n) = std::pow(2.0, 0.25) * h * phase;  // <n|y> = i^n <n|x=y>
    const double next = std::sqrt(2.0 / (n + 1)) * z * h - std::sqrt(double(n) / (n + 1)) * hm1;
    hm1 = h;
    h = next;
    phase *= I;
  }
  return v;
}

/// Density <y|X|y> of a single-mode operator block.
inline double momentum_density(const Dense& rho_mode, double y) {
  const Eigen::VectorXcd w = momentum_eigenvector(static_cast<int>(rho_mode.rows()), y);
  return (w.adjoint() * rho_mode * w)(0, 0).real();
}

/// Momentum PDF of a single-mode state on a uniform grid.
inline std::vector<double> momentum_pdf(const Dense& rho_mode, double lo = -8.0, double hi = 8.0, int points = 161) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = momentum_density(rho_mode, lo + (hi - lo) * i / (points - 1));
  return out;
}

/// Unnormalized qubit state <ya, yb|rho|ya, yb> (qubit-operator valued).
inline Dense qubit_state_after_momentum(const Dense& rho, const Layout& l, double ya, double yb) {
  if (l.modes != 2) throw std::invalid_argument("momentum conditioning expects two modes");
  const Eigen::VectorXcd wa = momentum_eigenvector(l.cutoff, ya);
  const Eigen::VectorXcd wb = momentum_eigenvector(l.cutoff, yb);
  Eigen::VectorXcd w(l.mode_dim());
  for (int i = 0; i < l.cutoff; ++i) w.segment(i * l.cutoff, l.cutoff) = wa(i) * wb;
  const int qd = l.qubit_dim();
  const int md = l.mode_dim();
  Dense r(qd, qd);
  for (int i = 0; i < qd; ++i)
    for (int j = 0; j < qd; ++j) r(i, j) = (w.adjoint() * rho.block(i * md, j * md, md, md) * w)(0, 0);
  return r;
}

inline Model model_for(const Layout& l, std::vector<Coupling> couplings, const SystemParams& p) {
  return Model{l, std::move(couplings), p.kappa, p.gamma, thermal_occupation(p.temperature)};
}

}  // namespace qme::fock
