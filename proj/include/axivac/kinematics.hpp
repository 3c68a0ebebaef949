#pragma once
// Flow-map geometry. The map is stored as (R, Zhat, Theta) where Z = z + Zhat
// and Theta is the single-valued angular deviation; Zhat and Theta are
// periodic in z, so every stencil sees smooth data. The cofactor matrix is
// built from the same discrete derivatives everywhere, which is what makes
// the transfer identity on the boundary exact.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "axivac/elliptic.hpp"
#include "axivac/grid.hpp"
#include "axivac/mollifier.hpp"

namespace axivac {

struct DegenerateMapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowMap {
  ScalarField R;      // odd
  ScalarField Zhat;   // even, Z = z + Zhat
  ScalarField Theta;  // even, angular deviation
};

inline FlowMap identity_map(const Grid& g) {
  FlowMap m;
  m.R = radius_field(g);
  m.Zhat = ScalarField(g, Parity::even, 0.0);
  m.Theta = ScalarField(g, Parity::even, 0.0);
  return m;
}

// deformation tensor F_ij = d_{a_j} zeta_i, cofactors A = F^{-T}, J = det F
struct Deformation {
  ScalarField F11, F12, F21, F22;  // F11 = d_r R, F12 = d_z R, F21 = d_r Z, F22 = d_z Z
  ScalarField J;
  ScalarField A11, A12, A21, A22;
};

inline Deformation deformation_from_F(ScalarField F11, ScalarField F12, ScalarField F21,
                                      ScalarField F22, double degenerate_floor = 0.5) {
  Deformation d;
  d.F11 = std::move(F11);
  d.F12 = std::move(F12);
  d.F21 = std::move(F21);
  d.F22 = std::move(F22);
  d.J = fsub(fmul(d.F11, d.F22), fmul(d.F12, d.F21));
  for (double j : d.J.v)
    if (std::abs(j) < degenerate_floor)
      throw DegenerateMapError("flow map degenerate: |J| < " + std::to_string(degenerate_floor));
  d.A11 = fdiv(d.F22, d.J);
  d.A12 = fscale(fdiv(d.F21, d.J), -1.0);
  d.A21 = fscale(fdiv(d.F12, d.J), -1.0);
  d.A22 = fdiv(d.F11, d.J);
  return d;
}

inline Deformation deformation(const Grid& g, const FlowMap& m, double degenerate_floor = 0.5) {
  ScalarField F22 = fshift(d_z(g, m.Zhat), 1.0);  // d_z Z = 1 + d_z Zhat
  F22.parity = Parity::even;
  return deformation_from_F(d_r(g, m.R), d_z(g, m.R), d_r(g, m.Zhat), F22, degenerate_floor);
}

// boundary geometry built from traces of F so the cofactor algebra holds
// exactly at every boundary sample
struct BoundaryGeom {
  BoundaryFunction F11, F12, F21, F22;
  BoundaryFunction J;
  BoundaryFunction A11, A12, A21, A22;
  BoundaryFunction Rk;  // trace of the (smoothed) radial map
};

inline BoundaryGeom boundary_geom(const Grid& g, const Deformation& d, const ScalarField& Rfield) {
  BoundaryGeom b;
  b.F11 = boundary_trace(g, d.F11);
  b.F12 = boundary_trace(g, d.F12);
  b.F21 = boundary_trace(g, d.F21);
  b.F22 = boundary_trace(g, d.F22);
  b.J = bsub(bmul(b.F11, b.F22), bmul(b.F12, b.F21));
  b.A11 = BoundaryFunction(g);
  b.A12 = BoundaryFunction(g);
  b.A21 = BoundaryFunction(g);
  b.A22 = BoundaryFunction(g);
  for (int j = 0; j < g.Nz; ++j) {
    b.A11[j] = b.F22[j] / b.J[j];
    b.A12[j] = -b.F21[j] / b.J[j];
    b.A21[j] = -b.F12[j] / b.J[j];
    b.A22[j] = b.F11[j] / b.J[j];
  }
  b.Rk = boundary_trace(g, Rfield);
  return b;
}

// kappa-smoothed map: zeta^k = zeta + phi with phi the flat-harmonic
// extension of the mollified-minus-raw boundary trace, pinned at the axis
struct SmoothedMap {
  ScalarField phiR, phiZ;  // correction fields (odd by the axis pin)
  SolveInfo infoR, infoZ;
};

inline SmoothedMap smooth_correction(const Grid& g, const ScalarField& R, const ScalarField& Zhat,
                                     const MollifierKernel& kernel, double tol,
                                     ScalarField* warmR = nullptr, ScalarField* warmZ = nullptr) {
  SmoothedMap s;
  BoundaryFunction trR = boundary_trace(g, R);
  BoundaryFunction trZ = boundary_trace(g, Zhat);
  BoundaryFunction dataR = bsub(mollify2(trR, kernel), trR);
  BoundaryFunction dataZ = bsub(mollify2(trZ, kernel), trZ);
  auto rr = solve_flat_laplace(g, dataR, tol, warmR);
  auto zz = solve_flat_laplace(g, dataZ, tol, warmZ);
  s.phiR = std::move(rr.u);
  s.infoR = rr.info;
  s.phiZ = std::move(zz.u);
  s.infoZ = zz.info;
  return s;
}

// full geometry cache: raw and smoothed deformation data plus boundary traces
struct GeomCache {
  Deformation base;    // from (R, Z)
  Deformation smooth;  // from (R + phiR, Z + phiZ)
  ScalarField phiR, phiZ;
  ScalarField Rk;  // R + phiR
  BoundaryGeom btrace;
};

inline GeomCache build_geom(const Grid& g, const FlowMap& m, const MollifierKernel& kernel,
                            double tol, ScalarField* warmR = nullptr,
                            ScalarField* warmZ = nullptr) {
  GeomCache gc;
  gc.base = deformation(g, m);
  SmoothedMap s = smooth_correction(g, m.R, m.Zhat, kernel, tol, warmR, warmZ);
  gc.phiR = std::move(s.phiR);
  gc.phiZ = std::move(s.phiZ);
  // derivatives of the smoothed map assembled piecewise so each part keeps
  // its own axis parity
  ScalarField F11 = fadd(gc.base.F11, d_r(g, gc.phiR));
  ScalarField F12 = fadd(gc.base.F12, d_z(g, gc.phiR));
  ScalarField F21 = fadd(gc.base.F21, d_r(g, gc.phiZ));
  ScalarField F22 = fadd(gc.base.F22, d_z(g, gc.phiZ));
  gc.smooth = deformation_from_F(std::move(F11), std::move(F12), std::move(F21), std::move(F22));
  gc.Rk = fadd(m.R, gc.phiR);
  gc.btrace = boundary_geom(g, gc.smooth, gc.Rk);
  return gc;
}

// a priori window |J^k - 1| <= 1/8 and |A^k - I| <= 1/8
struct WindowStatus {
  bool ok = true;
  double worst_J = 0.0;
  double worst_A = 0.0;
};

inline WindowStatus check_geometry_window(const Deformation& d) {
  WindowStatus w;
  for (std::size_t n = 0; n < d.J.v.size(); ++n) {
    w.worst_J = std::max(w.worst_J, std::abs(d.J.v[n] - 1.0));
    w.worst_A = std::max(w.worst_A, std::abs(d.A11.v[n] - 1.0));
    w.worst_A = std::max(w.worst_A, std::abs(d.A22.v[n] - 1.0));
    w.worst_A = std::max(w.worst_A, std::abs(d.A12.v[n]));
    w.worst_A = std::max(w.worst_A, std::abs(d.A21.v[n]));
  }
  w.ok = (w.worst_J <= 0.125) && (w.worst_A <= 0.125);
  return w;
}

// ---------------------------------------------------------------------------
// frozen-in magnetic field

struct MagneticSeed {
  ScalarField b0r;   // odd, vanishing trace on Gamma
  ScalarField b0th;  // odd
  ScalarField b0z;   // even
};

struct FrozenField {
  ScalarField bR;   // b0 . grad R
  ScalarField bTh;  // R b0 . grad Theta (the azimuthal component)
  ScalarField bZ;   // b0 . grad Z
};

// D_b0 f = b0^r d_r f + b0^z d_z f on axisymmetric fields
inline ScalarField apply_Db0(const Grid& g, const MagneticSeed& b0, const ScalarField& f) {
  return fadd(fmul(b0.b0r, d_r(g, f)), fmul(b0.b0z, d_z(g, f)));
}

inline ScalarField apply_Db0_transpose(const Grid& g, const MagneticSeed& b0, const ScalarField& x,
                                       Parity row_parity) {
  return fadd(d_r_transpose(g, fmul(b0.b0r, x), row_parity),
              d_z_transpose(g, fmul(b0.b0z, x)));
}

inline FrozenField reconstruct_b(const Grid& g, const MagneticSeed& b0, const FlowMap& m) {
  FrozenField f;
  f.bR = apply_Db0(g, b0, m.R);
  // b0 . grad Z = b0^r d_r Zhat + b0^z (1 + d_z Zhat)
  f.bZ = fadd(apply_Db0(g, b0, m.Zhat), b0.b0z);
  // b0 . grad Theta picks up the explicit b0^th / r part of the operator
  ScalarField gradTheta = fadd(apply_Db0(g, b0, m.Theta), fdiv_r(g, b0.b0th));
  f.bTh = fmul(m.R, gradTheta);
  return f;
}

// ---------------------------------------------------------------------------
// exact identities

// row divergence of the cofactor matrix: P_j = d_r(J A_j1) + d_z(J A_j2);
// vanishes to rounding when J A is the cofactor of the same discrete
// derivatives, and at the truncation order for analytically sampled geometry
inline std::pair<ScalarField, ScalarField> piola_residual(const Grid& g, const Deformation& d) {
  ScalarField JA11 = fmul(d.J, d.A11);
  ScalarField JA12 = fmul(d.J, d.A12);
  ScalarField JA21 = fmul(d.J, d.A21);
  ScalarField JA22 = fmul(d.J, d.A22);
  ScalarField p1 = fadd(d_r(g, JA11), d_z(g, JA12));
  ScalarField p2 = fadd(d_r(g, JA21), d_z(g, JA22));
  return {std::move(p1), std::move(p2)};
}

// max |F^T A - I| over the grid (exact algebra, rounding only)
inline double cofactor_identity_residual(const Deformation& d) {
  double m = 0.0;
  for (std::size_t n = 0; n < d.J.v.size(); ++n) {
    const double e11 = d.F11.v[n] * d.A11.v[n] + d.F21.v[n] * d.A21.v[n] - 1.0;
    const double e12 = d.F11.v[n] * d.A12.v[n] + d.F21.v[n] * d.A22.v[n];
    const double e21 = d.F12.v[n] * d.A11.v[n] + d.F22.v[n] * d.A21.v[n];
    const double e22 = d.F12.v[n] * d.A12.v[n] + d.F22.v[n] * d.A22.v[n] - 1.0;
    m = std::max({m, std::abs(e11), std::abs(e12), std::abs(e21), std::abs(e22)});
  }
  return m;
}

// boundary-transfer identity: X_R - (X . A_{.2}) dz R - dr R (X . A_{.1}) = 0
// for any boundary 2-vector X, exact in the cofactor algebra
inline BoundaryFunction boundary_transfer_residual(const Grid& g, const BoundaryGeom& b,
                                                   const BoundaryFunction& X1,
                                                   const BoundaryFunction& X2) {
  BoundaryFunction res(g);
  for (int j = 0; j < g.Nz; ++j) {
    const double lhs = X1[j] - (X1[j] * b.A12[j] + X2[j] * b.A22[j]) * b.F12[j];
    const double rhs = b.F11[j] * (X1[j] * b.A11[j] + X2[j] * b.A21[j]);
    res[j] = lhs - rhs;
  }
  return res;
}

}  // namespace axivac
