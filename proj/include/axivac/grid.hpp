#pragma once
// Discrete reference domain for the axisymmetric strip (r,z) in (0,R0] x T_L.
//
// Radial nodes are cell-centered, r_i = (i+1/2)dr, so no node sits on the
// axis r = 0; axial nodes z_j = j dz are periodic. Every field carries a
// radial parity flag that encodes its behavior under the reflection r -> -r,
// which is how the axis conditions (odd components vanish at r = 0) enter
// the stencils.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace axivac {

inline constexpr double pi = 3.14159265358979323846;

enum class Parity { even, odd, none };

inline Parity flip(Parity p) {
  switch (p) {
    case Parity::even: return Parity::odd;
    case Parity::odd: return Parity::even;
    default: return Parity::none;
  }
}

inline Parity parity_add(Parity a, Parity b) {
  return a == b ? a : Parity::none;
}

inline Parity parity_mul(Parity a, Parity b) {
  if (a == Parity::none || b == Parity::none) return Parity::none;
  return a == b ? Parity::even : Parity::odd;
}

struct Grid {
  int Nr = 0;
  int Nz = 0;
  double R0 = 1.0;
  double L = 2.0 * pi;
  double dr = 0.0;
  double dz = 0.0;

  Grid() = default;
  Grid(int nr, int nz, double r0, double l) : Nr(nr), Nz(nz), R0(r0), L(l) {
    if (nr <= 3 || nz <= 5) throw std::invalid_argument("Grid: need Nr > 3, Nz > 5");
    if (r0 <= 0.0 || l <= 0.0) throw std::invalid_argument("Grid: R0 and L must be positive");
    dr = R0 / Nr;
    dz = L / Nz;
  }

  double r(int i) const { return (i + 0.5) * dr; }
  double z(int j) const { return j * dz; }
  int jwrap(int j) const {
    int m = j % Nz;
    return m < 0 ? m + Nz : m;
  }
  // quadrature weight of node (i,j) for the measure 2*pi*r dr dz
  double cell_weight(int i) const { return 2.0 * pi * r(i) * dr * dz; }
  std::size_t size() const { return static_cast<std::size_t>(Nr) * Nz; }
};

struct ScalarField {
  Parity parity = Parity::even;
  int Nr = 0;
  int Nz = 0;
  std::vector<double> v;

  ScalarField() = default;
  ScalarField(const Grid& g, Parity p, double fill = 0.0)
      : parity(p), Nr(g.Nr), Nz(g.Nz), v(g.size(), fill) {}

  double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * Nz + j]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * Nz + j]; }
};

struct BoundaryFunction {
  int Nz = 0;
  std::vector<double> v;

  BoundaryFunction() = default;
  explicit BoundaryFunction(const Grid& g, double fill = 0.0) : Nz(g.Nz), v(g.Nz, fill) {}

  double& operator[](int j) { return v[j]; }
  double operator[](int j) const { return v[j]; }
};

// ---------------------------------------------------------------------------
// construction helpers

inline ScalarField sample(const Grid& g, Parity p,
                          const std::function<double(double, double)>& f) {
  ScalarField out(g, p);
  for (int i = 0; i < g.Nr; ++i)
    for (int j = 0; j < g.Nz; ++j) out(i, j) = f(g.r(i), g.z(j));
  return out;
}

inline BoundaryFunction sample_boundary(const Grid& g, const std::function<double(double)>& f) {
  BoundaryFunction out(g);
  for (int j = 0; j < g.Nz; ++j) out[j] = f(g.z(j));
  return out;
}

// coordinate field r (odd under reflection)
inline ScalarField radius_field(const Grid& g) {
  return sample(g, Parity::odd, [](double r, double) { return r; });
}

// ---------------------------------------------------------------------------
// pointwise algebra (parity propagates; mixed-parity sums degrade to none)

inline ScalarField fadd(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.parity = parity_add(a.parity, b.parity);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] += b.v[n];
  return out;
}

inline ScalarField fsub(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.parity = parity_add(a.parity, b.parity);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] -= b.v[n];
  return out;
}

inline ScalarField fmul(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.parity = parity_mul(a.parity, b.parity);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] *= b.v[n];
  return out;
}

inline ScalarField fscale(const ScalarField& a, double c) {
  ScalarField out = a;
  for (double& x : out.v) x *= c;
  return out;
}

inline ScalarField fshift(const ScalarField& a, double c) {
  ScalarField out = a;
  out.parity = (a.parity == Parity::even) ? Parity::even : Parity::none;
  for (double& x : out.v) x += c;
  return out;
}

// f / r, well defined since r_i >= dr/2 > 0; parity flips
inline ScalarField fdiv_r(const Grid& g, const ScalarField& a) {
  ScalarField out = a;
  out.parity = flip(a.parity);
  for (int i = 0; i < g.Nr; ++i) {
    const double inv = 1.0 / g.r(i);
    for (int j = 0; j < g.Nz; ++j) out(i, j) *= inv;
  }
  return out;
}

inline ScalarField fdiv(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.parity = parity_mul(a.parity, b.parity);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] /= b.v[n];
  return out;
}

inline double fmax_abs(const ScalarField& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_finite(const ScalarField& a) {
  for (double x : a.v)
    if (!std::isfinite(x)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// derivative stencils
//
// d_r: second-order centered with a parity ghost cell at the axis row and a
// one-sided closure at the outer row. Fields of unknown parity fall back to
// a one-sided second-order formula at the axis row as well.
// d_z: fourth-order centered periodic (5-point).

inline ScalarField d_r(const Grid& g, const ScalarField& f) {
  ScalarField out(g, flip(f.parity));
  const double i2dr = 1.0 / (2.0 * g.dr);
  const int Nr = g.Nr;
  for (int j = 0; j < g.Nz; ++j) {
    switch (f.parity) {
      case Parity::odd:
        out(0, j) = (f(1, j) + f(0, j)) * i2dr;
        break;
      case Parity::even:
        out(0, j) = (f(1, j) - f(0, j)) * i2dr;
        break;
      case Parity::none:
        out(0, j) = (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) * i2dr;
        break;
    }
    for (int i = 1; i < Nr - 1; ++i) out(i, j) = (f(i + 1, j) - f(i - 1, j)) * i2dr;
    out(Nr - 1, j) = (3.0 * f(Nr - 1, j) - 4.0 * f(Nr - 2, j) + f(Nr - 3, j)) * i2dr;
  }
  return out;
}

inline ScalarField d_z(const Grid& g, const ScalarField& f) {
  ScalarField out(g, f.parity);
  const double c = 1.0 / (12.0 * g.dz);
  for (int i = 0; i < g.Nr; ++i)
    for (int j = 0; j < g.Nz; ++j) {
      const int jm2 = g.jwrap(j - 2), jm1 = g.jwrap(j - 1);
      const int jp1 = g.jwrap(j + 1), jp2 = g.jwrap(j + 2);
      out(i, j) = (f(i, jm2) - 8.0 * f(i, jm1) + 8.0 * f(i, jp1) - f(i, jp2)) * c;
    }
  return out;
}

inline BoundaryFunction d_z(const Grid& g, const BoundaryFunction& f) {
  BoundaryFunction out(g);
  const double c = 1.0 / (12.0 * g.dz);
  for (int j = 0; j < g.Nz; ++j) {
    const int jm2 = g.jwrap(j - 2), jm1 = g.jwrap(j - 1);
    const int jp1 = g.jwrap(j + 1), jp2 = g.jwrap(j + 2);
    out[j] = (f[jm2] - 8.0 * f[jm1] + 8.0 * f[jp1] - f[jp2]) * c;
  }
  return out;
}

// exact transpose of the d_r matrix (needed by weak-form source assembly);
// parity selects which d_r variant is being transposed
inline ScalarField d_r_transpose(const Grid& g, const ScalarField& x, Parity row_parity) {
  ScalarField out(g, Parity::none);
  const double i2dr = 1.0 / (2.0 * g.dr);
  const int N = g.Nr;
  // ghost-sign of the axis row: even ghost gives -f0, odd gives +f0, none is one-sided
  for (int j = 0; j < g.Nz; ++j) {
    for (int i = 0; i < N; ++i) out(i, j) = 0.0;
    // interior rows k = 1..N-2: coefficients -1 at k-1, +1 at k+1 (times i2dr)
    for (int k = 1; k < N - 1; ++k) {
      out(k - 1, j) -= x(k, j) * i2dr;
      out(k + 1, j) += x(k, j) * i2dr;
    }
    // axis row k = 0
    switch (row_parity) {
      case Parity::odd:
        out(0, j) += x(0, j) * i2dr;
        out(1, j) += x(0, j) * i2dr;
        break;
      case Parity::even:
        out(0, j) -= x(0, j) * i2dr;
        out(1, j) += x(0, j) * i2dr;
        break;
      case Parity::none:
        out(0, j) += -3.0 * x(0, j) * i2dr;
        out(1, j) += 4.0 * x(0, j) * i2dr;
        out(2, j) += -x(0, j) * i2dr;
        break;
    }
    // outer row k = N-1: one-sided (3, -4, 1)/(2dr)
    out(N - 1, j) += 3.0 * x(N - 1, j) * i2dr;
    out(N - 2, j) += -4.0 * x(N - 1, j) * i2dr;
    out(N - 3, j) += x(N - 1, j) * i2dr;
  }
  return out;
}

// d_z is antisymmetric under the plain periodic sum, so its transpose is -d_z
inline ScalarField d_z_transpose(const Grid& g, const ScalarField& x) {
  return fscale(d_z(g, x), -1.0);
}

// ---------------------------------------------------------------------------
// quadrature, norms, traces

inline double integrate(const Grid& g, const ScalarField& f) {
  double s = 0.0;
  for (int i = 0; i < g.Nr; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.Nz; ++j) row += f(i, j);
    s += row * g.cell_weight(i);
  }
  return s;
}

inline double inner(const Grid& g, const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (int i = 0; i < g.Nr; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.Nz; ++j) row += a(i, j) * b(i, j);
    s += row * g.cell_weight(i);
  }
  return s;
}

inline double norm0(const Grid& g, const ScalarField& f) { return std::sqrt(inner(g, f, f)); }

// || f ||_k with the measure 2*pi*r dr dz; mixed derivatives by composing the
// first-derivative stencils (one code path, one boundary treatment)
inline double weighted_norm(const Grid& g, const ScalarField& f, int order) {
  if (order < 0 || order > 4) throw std::invalid_argument("weighted_norm: order must be 0..4");
  double acc = 0.0;
  ScalarField dzpow = f;
  for (int az = 0; az <= order; ++az) {
    if (az > 0) dzpow = d_z(g, dzpow);
    ScalarField cur = dzpow;
    for (int ar = 0; ar + az <= order; ++ar) {
      if (ar > 0) cur = d_r(g, cur);
      const double n = norm0(g, cur);
      acc += n * n;
    }
  }
  return std::sqrt(acc);
}

inline double boundary_inner(const Grid& g, const BoundaryFunction& a, const BoundaryFunction& b) {
  double s = 0.0;
  for (int j = 0; j < g.Nz; ++j) s += a[j] * b[j];
  return 2.0 * pi * g.R0 * g.dz * s;
}

inline double boundary_norm0(const Grid& g, const BoundaryFunction& a) {
  return std::sqrt(boundary_inner(g, a, a));
}

// | w |_k on Gamma with weight 2*pi*R0 dz
inline double boundary_norm(const Grid& g, const BoundaryFunction& f, int order) {
  if (order < 0 || order > 4) throw std::invalid_argument("boundary_norm: order must be 0..4");
  double acc = 0.0;
  BoundaryFunction cur = f;
  for (int b = 0; b <= order; ++b) {
    if (b > 0) cur = d_z(g, cur);
    const double n = boundary_norm0(g, cur);
    acc += n * n;
  }
  return std::sqrt(acc);
}

// second-order extrapolation of nodal values to r = R0
inline BoundaryFunction boundary_trace(const Grid& g, const ScalarField& f) {
  BoundaryFunction out(g);
  const int N = g.Nr;
  for (int j = 0; j < g.Nz; ++j) out[j] = 1.5 * f(N - 1, j) - 0.5 * f(N - 2, j);
  return out;
}

// one-sided second-order radial derivative evaluated at r = R0 itself
inline BoundaryFunction boundary_d_r(const Grid& g, const ScalarField& f) {
  BoundaryFunction out(g);
  const int N = g.Nr;
  for (int j = 0; j < g.Nz; ++j)
    out[j] = (2.0 * f(N - 1, j) - 3.0 * f(N - 2, j) + f(N - 3, j)) / g.dr;
  return out;
}

inline double bmax_abs(const BoundaryFunction& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

inline double bmin(const BoundaryFunction& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

inline BoundaryFunction badd(const BoundaryFunction& a, const BoundaryFunction& b) {
  BoundaryFunction out = a;
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] += b.v[n];
  return out;
}

inline BoundaryFunction bsub(const BoundaryFunction& a, const BoundaryFunction& b) {
  BoundaryFunction out = a;
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] -= b.v[n];
  return out;
}

inline BoundaryFunction bmul(const BoundaryFunction& a, const BoundaryFunction& b) {
  BoundaryFunction out = a;
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] *= b.v[n];
  return out;
}

inline BoundaryFunction bscale(const BoundaryFunction& a, double c) {
  BoundaryFunction out = a;
  for (double& x : out.v) x *= c;
  return out;
}

inline double bmean(const Grid& g, const BoundaryFunction& a) {
  double s = 0.0;
  for (double x : a.v) s += x;
  return s / g.Nz;
}

}  // namespace axivac
