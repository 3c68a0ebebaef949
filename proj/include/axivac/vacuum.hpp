#pragma once
// Vacuum magnetic amplitude C(t). The azimuthal vacuum field is C/r; the
// amplitude obeys d/dt ln C = A(t) with A a ratio of two boundary integrals,
// so ln C is the integrated quantity and positivity of C is automatic.

#include <cmath>
#include <stdexcept>

#include "axivac/grid.hpp"
#include "axivac/kinematics.hpp"

namespace axivac {

struct VacuumDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VacuumState {
  double C = 0.0;       // amplitude, vacuum field C/r
  double RS = 2.0;      // confining radius, must stay above max R on Gamma
  double A_coeff = 0.0; // most recent growth rate A(t)
};

// A(t) = int (v^r dz Z - v^z dz R) dz / int (ln RS - ln R) dz Z dz on Gamma,
// both by the periodic trapezoid rule (plain sums)
inline double compute_A(const Grid& g, const BoundaryFunction& tr_vr,
                        const BoundaryFunction& tr_vz, const BoundaryFunction& tr_R,
                        const BoundaryFunction& tr_dzR, const BoundaryFunction& tr_dzZ,
                        double RS) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g.Nz; ++j) {
    num += (tr_vr[j] * tr_dzZ[j] - tr_vz[j] * tr_dzR[j]) * g.dz;
    if (!(tr_R[j] > 0.0) || !(RS > tr_R[j]))
      throw VacuumDegeneracyError("compute_A: RS must stay above the interface radius");
    den += (std::log(RS) - std::log(tr_R[j])) * tr_dzZ[j] * g.dz;
  }
  if (std::abs(den) < 1e-8 * g.L)
    throw VacuumDegeneracyError("compute_A: denominator below threshold");
  return num / den;
}

// advance ln C by one classical Runge-Kutta step given the four stage samples
// of A; the exponential structure C = C(0) exp(int A) is preserved exactly
inline VacuumState advance_C(const VacuumState& vac, double A1, double A2, double A3, double A4,
                             double dt) {
  VacuumState out = vac;
  const double dlnC = dt / 6.0 * (A1 + 2.0 * A2 + 2.0 * A3 + A4);
  out.C = vac.C * std::exp(dlnC);
  out.A_coeff = A4;
  return out;
}

// interface pressure data q|_Gamma = (1/2) C^2 / (R^kappa)^2
inline BoundaryFunction pressure_boundary_data(const VacuumState& vac,
                                               const BoundaryFunction& tr_Rk) {
  BoundaryFunction out;
  out.Nz = tr_Rk.Nz;
  out.v.resize(tr_Rk.Nz);
  for (int j = 0; j < tr_Rk.Nz; ++j) {
    if (!(tr_Rk[j] > 0.0))
      throw DegenerateMapError("pressure_boundary_data: nonpositive interface radius");
    out.v[j] = 0.5 * vac.C * vac.C / (tr_Rk[j] * tr_Rk[j]);
  }
  return out;
}

}  // namespace axivac
