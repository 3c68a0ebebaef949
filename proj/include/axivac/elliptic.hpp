#pragma once
// The three boundary-value solvers of the scheme, all built on one
// conservative (flux-form) assembly so each discrete operator is symmetric
// in its weighted inner product:
//
//   flat_laplace   -(d_rr + d_zz) u = f,  u|_G = g, u pinned to 0 at the axis
//   cyl_harmonic   (1/r) d_r(r d_r u) + d_zz u = f, zero flux at the axis
//   pressure       (1/W) d_i(W E_ij d_j u) = f with W = R^kappa, E SPD
//
// Dirichlet data lives at r = R0, half a cell beyond the outermost node row.
// Mixed-coefficient terms are assembled as D_r^T c D_z + D_z^T c D_r with the
// literal matrix transposes, so symmetry holds including the closure rows.
// Solved by Jacobi-preconditioned conjugate gradients to a relative residual.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "axivac/grid.hpp"

namespace axivac {

struct SolverFailure : std::runtime_error {
  double residual;
  SolverFailure(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

struct SolveInfo {
  int iterations = 0;
  double rel_residual = 0.0;
};

enum class AxisClosure { dirichlet_zero, zero_flux };

struct EllipticOperator {
  Grid g;
  AxisClosure axis = AxisClosure::dirichlet_zero;
  bool has_mixed = false;
  // face coefficients: c11 at r-faces (Nr+1 per column, face fi at r = fi*dr),
  // c22 at z-faces (face (i, j+1/2) stored at (i,j)), c12 at nodes
  std::vector<double> c11_face;
  std::vector<double> c22_face;
  std::vector<double> c12_node;
  std::vector<double> row_weight;  // W in (1/W) d(c d u) = f

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * g.Nz + j; }
  std::size_t fidx(int fi, int j) const { return static_cast<std::size_t>(fi) * g.Nz + j; }

  // centered radial derivative with ghost closures (even ghost at the axis,
  // zero-midpoint ghost at R0); used only by the mixed terms
  void mixed_d_r(const std::vector<double>& u, std::vector<double>& out) const {
    const int Nr = g.Nr, Nz = g.Nz;
    const double i2dr = 1.0 / (2.0 * g.dr);
    for (int j = 0; j < Nz; ++j) {
      out[idx(0, j)] = (u[idx(1, j)] - u[idx(0, j)]) * i2dr;
      for (int i = 1; i < Nr - 1; ++i)
        out[idx(i, j)] = (u[idx(i + 1, j)] - u[idx(i - 1, j)]) * i2dr;
      out[idx(Nr - 1, j)] = (-u[idx(Nr - 1, j)] - u[idx(Nr - 2, j)]) * i2dr;
    }
  }

  // exact transpose of mixed_d_r
  void mixed_d_r_transpose(const std::vector<double>& x, std::vector<double>& out) const {
    const int Nr = g.Nr, Nz = g.Nz;
    const double i2dr = 1.0 / (2.0 * g.dr);
    for (int j = 0; j < Nz; ++j) {
      for (int i = 0; i < Nr; ++i) out[idx(i, j)] = 0.0;
      for (int k = 1; k < Nr - 1; ++k) {
        out[idx(k - 1, j)] -= x[idx(k, j)] * i2dr;
        out[idx(k + 1, j)] += x[idx(k, j)] * i2dr;
      }
      out[idx(0, j)] -= x[idx(0, j)] * i2dr;
      out[idx(1, j)] += x[idx(0, j)] * i2dr;
      out[idx(Nr - 1, j)] -= x[idx(Nr - 1, j)] * i2dr;
      out[idx(Nr - 2, j)] -= x[idx(Nr - 1, j)] * i2dr;
    }
  }

  void mixed_d_z(const std::vector<double>& u, std::vector<double>& out) const {
    const int Nr = g.Nr, Nz = g.Nz;
    const double i2dz = 1.0 / (2.0 * g.dz);
    for (int i = 0; i < Nr; ++i)
      for (int j = 0; j < Nz; ++j) {
        const int jp = g.jwrap(j + 1), jm = g.jwrap(j - 1);
        out[idx(i, j)] = (u[idx(i, jp)] - u[idx(i, jm)]) * i2dz;
      }
  }

  // y = A u + (data terms), where A approximates -d_i(c_ij d_j .) rowwise and
  // the function takes the value `data` on r = R0 (pass nullptr for 0)
  void apply(const std::vector<double>& u, const BoundaryFunction* data,
             std::vector<double>& y) const {
    const int Nr = g.Nr, Nz = g.Nz;
    const double idr2 = 1.0 / (g.dr * g.dr), idz2 = 1.0 / (g.dz * g.dz);
    for (int i = 0; i < Nr; ++i) {
      for (int j = 0; j < Nz; ++j) {
        double flux_top, flux_bot;
        if (i + 1 < Nr) {
          flux_top = c11_face[fidx(i + 1, j)] * (u[idx(i + 1, j)] - u[idx(i, j)]);
        } else {
          const double gd = data ? (*data)[j] : 0.0;
          flux_top = c11_face[fidx(Nr, j)] * 2.0 * (gd - u[idx(Nr - 1, j)]);
        }
        if (i > 0) {
          flux_bot = c11_face[fidx(i, j)] * (u[idx(i, j)] - u[idx(i - 1, j)]);
        } else {
          flux_bot = (axis == AxisClosure::dirichlet_zero)
                         ? c11_face[fidx(0, j)] * 2.0 * u[idx(0, j)]
                         : 0.0;
        }
        const int jp = g.jwrap(j + 1), jm = g.jwrap(j - 1);
        const double fz_r = c22_face[idx(i, j)] * (u[idx(i, jp)] - u[idx(i, j)]);
        const double fz_l = c22_face[idx(i, jm)] * (u[idx(i, j)] - u[idx(i, jm)]);
        y[idx(i, j)] = -(flux_top - flux_bot) * idr2 - (fz_r - fz_l) * idz2;
      }
    }
    if (has_mixed) {
      std::vector<double> t(u.size()), s(u.size());
      // D_r^T (c12 . D_z u); the test-function ghost is homogeneous, so this
      // block carries no data contribution
      mixed_d_z(u, t);
      for (std::size_t n = 0; n < t.size(); ++n) t[n] *= c12_node[n];
      mixed_d_r_transpose(t, s);
      for (std::size_t n = 0; n < s.size(); ++n) y[n] += s[n];
      // D_z^T (c12 . D_r u) with D_r's data ghost 2g - u at the top row
      mixed_d_r(u, t);
      if (data) {
        const double i2dr = 1.0 / (2.0 * g.dr);
        for (int j = 0; j < Nz; ++j) t[idx(Nr - 1, j)] += 2.0 * (*data)[j] * i2dr;
      }
      for (std::size_t n = 0; n < t.size(); ++n) t[n] *= c12_node[n];
      mixed_d_z(t, s);  // D_z^T = -D_z
      for (std::size_t n = 0; n < s.size(); ++n) y[n] -= s[n];
    }
  }

  std::vector<double> jacobi_diag() const {
    const int Nr = g.Nr, Nz = g.Nz;
    const double idr2 = 1.0 / (g.dr * g.dr), idz2 = 1.0 / (g.dz * g.dz);
    std::vector<double> d(g.size());
    for (int i = 0; i < Nr; ++i)
      for (int j = 0; j < Nz; ++j) {
        double top = (i + 1 < Nr) ? c11_face[fidx(i + 1, j)] : 2.0 * c11_face[fidx(Nr, j)];
        double bot;
        if (i > 0)
          bot = c11_face[fidx(i, j)];
        else
          bot = (axis == AxisClosure::dirichlet_zero) ? 2.0 * c11_face[fidx(0, j)] : 0.0;
        const int jm = g.jwrap(j - 1);
        d[idx(i, j)] = (top + bot) * idr2 + (c22_face[idx(i, j)] + c22_face[idx(i, jm)]) * idz2;
      }
    return d;
  }
};

inline EllipticOperator make_flat_laplace(const Grid& g) {
  EllipticOperator op;
  op.g = g;
  op.axis = AxisClosure::dirichlet_zero;
  op.c11_face.assign(static_cast<std::size_t>(g.Nr + 1) * g.Nz, 1.0);
  op.c22_face.assign(g.size(), 1.0);
  op.row_weight.assign(g.size(), 1.0);
  return op;
}

inline EllipticOperator make_cyl_harmonic(const Grid& g) {
  EllipticOperator op;
  op.g = g;
  op.axis = AxisClosure::zero_flux;
  op.c11_face.resize(static_cast<std::size_t>(g.Nr + 1) * g.Nz);
  op.c22_face.resize(g.size());
  op.row_weight.resize(g.size());
  for (int fi = 0; fi <= g.Nr; ++fi)
    for (int j = 0; j < g.Nz; ++j) op.c11_face[op.fidx(fi, j)] = fi * g.dr;
  for (int i = 0; i < g.Nr; ++i)
    for (int j = 0; j < g.Nz; ++j) {
      op.c22_face[op.idx(i, j)] = g.r(i);
      op.row_weight[op.idx(i, j)] = g.r(i);
    }
  return op;
}

// W = R^kappa weight, coefficients c = W * E with E_ij = J^k A_li A_lj
inline EllipticOperator make_pressure_operator(const Grid& g, const ScalarField& E11,
                                               const ScalarField& E12, const ScalarField& E22,
                                               const ScalarField& W) {
  for (int i = 0; i < g.Nr; ++i)
    for (int j = 0; j < g.Nz; ++j) {
      const double det = E11(i, j) * E22(i, j) - E12(i, j) * E12(i, j);
      if (!(E11(i, j) > 0.0) || !(det > 0.0))
        throw std::invalid_argument("pressure operator: coefficient matrix not positive");
    }
  EllipticOperator op;
  op.g = g;
  op.axis = AxisClosure::zero_flux;
  op.has_mixed = true;
  const int Nr = g.Nr, Nz = g.Nz;
  op.c11_face.assign(static_cast<std::size_t>(Nr + 1) * Nz, 0.0);
  op.c22_face.resize(g.size());
  op.c12_node.resize(g.size());
  op.row_weight.resize(g.size());
  auto c11 = [&](int i, int j) { return W(i, j) * E11(i, j); };
  for (int j = 0; j < Nz; ++j) {
    op.c11_face[op.fidx(0, j)] = 0.0;  // W ~ R vanishes at the axis
    for (int fi = 1; fi < Nr; ++fi)
      op.c11_face[op.fidx(fi, j)] = 0.5 * (c11(fi - 1, j) + c11(fi, j));
    op.c11_face[op.fidx(Nr, j)] = 1.5 * c11(Nr - 1, j) - 0.5 * c11(Nr - 2, j);
  }
  for (int i = 0; i < Nr; ++i)
    for (int j = 0; j < Nz; ++j) {
      const int jp = g.jwrap(j + 1);
      op.c22_face[op.idx(i, j)] = 0.5 * (W(i, j) * E22(i, j) + W(i, jp) * E22(i, jp));
      op.c12_node[op.idx(i, j)] = W(i, j) * E12(i, j);
      op.row_weight[op.idx(i, j)] = W(i, j);
    }
  return op;
}

// Jacobi-preconditioned CG for A x = b with A = op.apply(., data); the
// iterate cap is 10 N, overrun throws SolverFailure with the residual
inline SolveInfo solve_cg(const EllipticOperator& op, const std::vector<double>& b,
                          std::vector<double>& x, double tol) {
  const std::size_t N = b.size();
  const double bnorm = std::sqrt([&] {
    double s = 0.0;
    for (double v : b) s += v * v;
    return s;
  }());
  if (bnorm == 0.0) {
    // b already folds the Dirichlet data in, so b = 0 means the solution is 0
    x.assign(N, 0.0);
    return {0, 0.0};
  }
  if (x.size() != N) x.assign(N, 0.0);
  std::vector<double> r(N), p(N), Ap(N), z(N);
  // r = b - A x (the data terms are part of b by construction: apply with hom data)
  op.apply(x, nullptr, Ap);
  for (std::size_t n = 0; n < N; ++n) r[n] = b[n] - Ap[n];
  const std::vector<double> diag = op.jacobi_diag();
  auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t n = 0; n < N; ++n) out[n] = v[n] / diag[n];
  };
  precond(r, z);
  p = z;
  double rz = 0.0, rnorm2 = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    rz += r[n] * z[n];
    rnorm2 += r[n] * r[n];
  }
  const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);
  const long cap = 10L * static_cast<long>(N);
  int it = 0;
  while (std::sqrt(rnorm2) > target) {
    if (it >= cap)
      throw SolverFailure("elliptic solve: CG iteration cap exceeded, residual " +
                              std::to_string(std::sqrt(rnorm2) / (bnorm > 0 ? bnorm : 1.0)),
                          std::sqrt(rnorm2) / (bnorm > 0 ? bnorm : 1.0));
    op.apply(p, nullptr, Ap);
    double pAp = 0.0;
    for (std::size_t n = 0; n < N; ++n) pAp += p[n] * Ap[n];
    if (!(pAp > 0.0))
      throw SolverFailure("elliptic solve: operator lost positivity in CG", std::sqrt(rnorm2));
    const double alpha = rz / pAp;
    rnorm2 = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
      rnorm2 += r[n] * r[n];
    }
    precond(r, z);
    double rz_new = 0.0;
    for (std::size_t n = 0; n < N; ++n) rz_new += r[n] * z[n];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t n = 0; n < N; ++n) p[n] = z[n] + beta * p[n];
    ++it;
  }
  return {it, std::sqrt(rnorm2) / (bnorm > 0 ? bnorm : 1.0)};
}

// right-hand side for A u = -W f with Dirichlet data folded in: b = -W f - A(0; data)
inline std::vector<double> assemble_rhs(const EllipticOperator& op, const ScalarField* f,
                                        const BoundaryFunction& data) {
  std::vector<double> b(op.g.size(), 0.0);
  std::vector<double> zero(op.g.size(), 0.0), bc(op.g.size());
  op.apply(zero, &data, bc);
  for (std::size_t n = 0; n < b.size(); ++n) b[n] = -bc[n];
  if (f)
    for (std::size_t n = 0; n < b.size(); ++n) b[n] -= op.row_weight[n] * f->v[n];
  return b;
}

struct FlatSolveResult {
  ScalarField u;
  SolveInfo info;
};

// -(d_rr + d_zz) u = 0 with u|_G = data and the odd-extension pin u(0,z) = 0;
// output is tagged odd accordingly
inline FlatSolveResult solve_flat_laplace(const Grid& g, const BoundaryFunction& data, double tol,
                                          ScalarField* warm = nullptr) {
  EllipticOperator op = make_flat_laplace(g);
  std::vector<double> b = assemble_rhs(op, nullptr, data);
  std::vector<double> x = warm ? warm->v : std::vector<double>();
  SolveInfo info = solve_cg(op, b, x, tol);
  ScalarField u(g, Parity::odd);
  u.v = std::move(x);
  if (warm) *warm = u;
  return {std::move(u), info};
}

// (d_rr + (1/r) d_r + d_zz) u = 0 with u|_G = data, regular at the axis
inline FlatSolveResult solve_cyl_harmonic(const Grid& g, const BoundaryFunction& data, double tol,
                                          ScalarField* warm = nullptr) {
  EllipticOperator op = make_cyl_harmonic(g);
  std::vector<double> b = assemble_rhs(op, nullptr, data);
  std::vector<double> x = warm ? warm->v : std::vector<double>();
  SolveInfo info = solve_cg(op, b, x, tol);
  ScalarField u(g, Parity::even);
  u.v = std::move(x);
  if (warm) *warm = u;
  return {std::move(u), info};
}

// generic inhomogeneous solve against a prebuilt operator: (1/W) d(c d u) = f,
// u|_G = data
inline FlatSolveResult solve_with_operator(const EllipticOperator& op, const ScalarField* f,
                                           const BoundaryFunction& data, double tol,
                                           Parity out_parity, ScalarField* warm = nullptr) {
  std::vector<double> b = assemble_rhs(op, f, data);
  std::vector<double> x = warm ? warm->v : std::vector<double>();
  SolveInfo info = solve_cg(op, b, x, tol);
  ScalarField u(op.g, out_parity);
  u.v = std::move(x);
  if (warm) *warm = u;
  return {std::move(u), info};
}

}  // namespace axivac
