#pragma once
// Horizontal convolution-by-layers: mollification acts along the periodic z
// direction only, row by row in r. The kernel is the standard compactly
// supported bump, sampled on the grid and renormalized so the discrete mass
// is exactly one (constants are then preserved exactly).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "axivac/grid.hpp"

namespace axivac {

struct MollifierKernel {
  double kappa = 0.0;        // width in z units
  int support_halfwidth = 0; // nodes each side
  double dz = 0.0;
  std::vector<double> w;     // weights w[-M..M] stored at offset M
  double weight(int m) const { return w[m + support_halfwidth]; }
};

inline double bump(double s) {
  const double t = 1.0 - s * s;
  return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

inline MollifierKernel build_kernel(double kappa, const Grid& g) {
  if (!(kappa > 0.0) || !(kappa < 0.5 * g.L))
    throw std::invalid_argument("build_kernel: require 0 < kappa < L/2");
  MollifierKernel k;
  k.kappa = kappa;
  k.dz = g.dz;
  k.support_halfwidth = static_cast<int>(std::floor(kappa / g.dz + 1e-12));
  const int M = k.support_halfwidth;
  k.w.assign(2 * M + 1, 0.0);
  double mass = 0.0;
  for (int m = -M; m <= M; ++m) {
    k.w[m + M] = bump(m * g.dz / kappa);
    mass += k.w[m + M] * g.dz;
  }
  for (double& x : k.w) x /= mass;
  return k;
}

inline BoundaryFunction mollify(const BoundaryFunction& f, const MollifierKernel& k) {
  BoundaryFunction out;
  out.Nz = f.Nz;
  out.v.assign(f.Nz, 0.0);
  const int M = k.support_halfwidth;
  for (int j = 0; j < f.Nz; ++j) {
    double s = 0.0;
    for (int m = -M; m <= M; ++m) {
      int jj = (j - m) % f.Nz;
      if (jj < 0) jj += f.Nz;
      s += k.weight(m) * f.v[jj];
    }
    out.v[j] = s * k.dz;
  }
  return out;
}

inline ScalarField mollify(const ScalarField& f, const MollifierKernel& k) {
  ScalarField out = f;
  const int M = k.support_halfwidth;
  for (int i = 0; i < f.Nr; ++i)
    for (int j = 0; j < f.Nz; ++j) {
      double s = 0.0;
      for (int m = -M; m <= M; ++m) {
        int jj = (j - m) % f.Nz;
        if (jj < 0) jj += f.Nz;
        s += k.weight(m) * f(i, jj);
      }
      out(i, j) = s * k.dz;
    }
  return out;
}

inline BoundaryFunction mollify2(const BoundaryFunction& f, const MollifierKernel& k) {
  return mollify(mollify(f, k), k);
}

// [Lambda_k, h] g = Lambda_k(h g) - h Lambda_k(g)
inline BoundaryFunction commutator(const BoundaryFunction& h, const BoundaryFunction& g,
                                   const MollifierKernel& k) {
  return bsub(mollify(bmul(h, g), k), bmul(h, mollify(g, k)));
}

// multiplier of the kernel on the pure harmonic of wavenumber wk, by direct
// quadrature of the kernel
inline double harmonic_multiplier(const MollifierKernel& k, double wk) {
  double s = 0.0;
  const int M = k.support_halfwidth;
  for (int m = -M; m <= M; ++m) s += k.weight(m) * std::cos(wk * m * k.dz);
  return s * k.dz;
}

}  // namespace axivac
