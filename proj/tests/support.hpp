#pragma once

// Hand-rolled generators and independent oracles. Nothing here calls into the
// library's linear algebra; amplitudes are built from explicit formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ontic_nogo/hilbert.hpp"

namespace test_support {

using cd = std::complex<double>;
using Spinor = std::array<cd, 2>;

inline constexpr double kPi = std::numbers::pi;

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  ontic_nogo::hilbert::Direction direction() {
    // Uniform on the sphere.
    const double polar = std::acos(uniform(-1.0, 1.0));
    return {polar, uniform(0.0, 2.0 * kPi)};
  }
  Eigen::VectorXcd unit_vector(std::size_t dim) {
    std::normal_distribution<double> n;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    for (auto &c : v) {
      c = {n(rng_), n(rng_)};
    }
    return v / v.norm();
  }
  /// Haar-ish random unitary via QR of a Gaussian matrix.
  Eigen::MatrixXcd unitary(std::size_t dim) {
    std::normal_distribution<double> n;
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = {n(rng_), n(rng_)};
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    return qr.householderQ();
  }
  template <class T> void shuffle(std::vector<T> &v) { std::shuffle(v.begin(), v.end(), rng_); }
  std::mt19937_64 &engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

/// Spin-up along (θ, φ) as R_z(φ) R_y(θ) |0⟩ with 2×2 rotation matrices,
/// R_y(θ) = [[c, −s], [s, c]] at half angles and R_z(φ) = diag(1, e^{iφ}).
inline Spinor rotated_up(double theta, double phi) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  // R_y(θ)|0⟩ = (c, s); R_z then phases the second component.
  const cd ry[2][2] = {{c, -s}, {s, c}};
  const cd rz[2][2] = {{1.0, 0.0}, {0.0, std::polar(1.0, phi)}};
  const Spinor zero{1.0, 0.0};
  Spinor tmp{ry[0][0] * zero[0] + ry[0][1] * zero[1], ry[1][0] * zero[0] + ry[1][1] * zero[1]};
  return {rz[0][0] * tmp[0] + rz[0][1] * tmp[1], rz[1][0] * tmp[0] + rz[1][1] * tmp[1]};
}

/// Spin-down as R_z(φ) R_y(θ) |1⟩.
inline Spinor rotated_down(double theta, double phi) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  return {-s, std::polar(1.0, phi) * c};
}

inline cd braket(const Spinor &a, const Spinor &b) { return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]; }

/// σ·n applied to v.
inline Spinor pauli_dot(double theta, double phi, const Spinor &v) {
  const double nx = std::sin(theta) * std::cos(phi);
  const double ny = std::sin(theta) * std::sin(phi);
  const double nz = std::cos(theta);
  const cd m00 = nz, m01 = cd(nx, -ny), m10 = cd(nx, ny), m11 = -nz;
  return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]};
}

/// |Ψ_i⟩ of the two-lab protocol as a flat 60-vector, written out index by
/// index: S ∈ {0,1}, F ∈ {ready, z+, z−, n+, n−}, S′ ∈ {0,1}, F′ ∈ {ready, z+, z−}.
///   ½ Σ_s |z_s⟩|F:z_s⟩|0⟩|F′:z+⟩ + (1/√2) Σ_s ⟨n_s|+x⟩ |n_s⟩|F:n_s⟩|1⟩|F′:z−⟩
inline std::vector<cd> psi_oracle(double theta, double phi) {
  std::vector<cd> v(60, 0.0);
  auto at = [&](int s, int f, int sp, int fp) -> cd & { return v[static_cast<std::size_t>(((s * 5 + f) * 2 + sp) * 3 + fp)]; };
  at(0, 1, 0, 1) += 0.5;
  at(1, 2, 0, 1) += 0.5;
  const Spinor plus_x{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const Spinor up = rotated_up(theta, phi);
  const Spinor down = rotated_down(theta, phi);
  const cd a_up = braket(up, plus_x) / std::sqrt(2.0);
  const cd a_down = braket(down, plus_x) / std::sqrt(2.0);
  for (int s = 0; s < 2; ++s) {
    at(s, 3, 1, 2) += a_up * up[static_cast<std::size_t>(s)];
    at(s, 4, 1, 2) += a_down * down[static_cast<std::size_t>(s)];
  }
  return v;
}

/// Σ_k conj(a_k) b_k by an explicit loop.
inline cd contract(const std::vector<cd> &a, const std::vector<cd> &b) {
  cd acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += std::conj(a[k]) * b[k];
  }
  return acc;
}

/// Square root of a 2×2 positive-definite real-symmetric matrix in closed form:
/// √M = (M + √det I) / √(tr + 2√det).
inline std::array<double, 4> sqrt2x2(const std::array<double, 4> &m) {
  const double sd = std::sqrt(m[0] * m[3] - m[1] * m[2]);
  const double t = std::sqrt(m[0] + m[3] + 2.0 * sd);
  return {(m[0] + sd) / t, m[1] / t, m[2] / t, (m[3] + sd) / t};
}

inline std::array<double, 4> inv2x2(const std::array<double, 4> &m) {
  const double det = m[0] * m[3] - m[1] * m[2];
  return {m[3] / det, -m[1] / det, -m[2] / det, m[0] / det};
}

/// Every basic feasible solution of {x ≥ 0 : A x = b} by brute force over
/// column subsets. Exponential; for tiny systems only.
inline std::vector<Eigen::VectorXd> polytope_vertices(const Eigen::MatrixXd &a, const Eigen::VectorXd &b,
                                                      double tol = 1e-10) {
  const auto n = a.cols();
  std::vector<Eigen::VectorXd> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask >> j & 1U) {
        cols.push_back(j);
      }
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (!cols.empty()) {
      Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (lu.rank() != static_cast<Eigen::Index>(cols.size())) {
        continue;
      }
      const Eigen::VectorXd xs = lu.solve(b);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        x(cols[k]) = xs(static_cast<Eigen::Index>(k));
      }
    }
    if ((a * x - b).cwiseAbs().maxCoeff() > tol || (x.array() < -tol).any()) {
      continue;
    }
    bool fresh = true;
    for (const auto &v : out) {
      fresh = fresh && (v - x).cwiseAbs().maxCoeff() > 1e-9;
    }
    if (fresh) {
      out.push_back(x);
    }
  }
  return out;
}

} // namespace test_support
