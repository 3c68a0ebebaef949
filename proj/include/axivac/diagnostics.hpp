#pragma once
// Monitored quantities: the H^4 energy functional, divergence/curl residuals,
// the Rayleigh-Taylor and non-collinearity margins, Alinhac's good unknowns,
// and a numeric verification suite for the product/commutator/mollifier/Hardy
// inequalities the analysis leans on.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "axivac/dynamics.hpp"
#include "axivac/grid.hpp"
#include "axivac/kinematics.hpp"
#include "axivac/mollifier.hpp"

namespace axivac {

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  double div_nu = 0.0;   // || Div_{A^k} nu ||_0
  double div_b = 0.0;    // || Div b ||_0
  double curl_nu = 0.0;  // || curl nu ||_0
  double rt_margin = 0.0;
  double noncol_margin = 0.0;
  double boundary_energy = 0.0;
  double C = 0.0;
  bool window_ok = true;
};

// || Z ||_4^2 with Z = z + Zhat: the coordinate part contributes z itself at
// order zero and 1 to the first z-derivative, nothing else
inline double norm4sq_axial(const Grid& g, const ScalarField& Zhat) {
  double acc = 0.0;
  ScalarField dzpow = Zhat;
  for (int az = 0; az <= 4; ++az) {
    if (az > 0) dzpow = d_z(g, dzpow);
    ScalarField cur = dzpow;
    for (int ar = 0; ar + az <= 4; ++ar) {
      if (ar > 0) cur = d_r(g, cur);
      ScalarField term = cur;
      if (az == 0 && ar == 0)
        for (int i = 0; i < g.Nr; ++i)
          for (int j = 0; j < g.Nz; ++j) term(i, j) += g.z(j);
      if (az == 1 && ar == 0)
        for (double& x : term.v) x += 1.0;
      const double n = norm0(g, term);
      acc += n * n;
    }
  }
  return acc;
}

inline double sq(double x) { return x * x; }

// E = ||v||_4^2 + ||(R,Z)||_4^2 + ||b0.grad zeta||_4^2
inline double energy(const Grid& g, const MagneticSeed& seed, const SimState& s) {
  const FrozenField f = reconstruct_b(g, seed, s.map);
  double e = sq(weighted_norm(g, s.vr, 4)) + sq(weighted_norm(g, s.vth, 4)) +
             sq(weighted_norm(g, s.vz, 4));
  e += sq(weighted_norm(g, s.map.R, 4)) + norm4sq_axial(g, s.map.Zhat);
  e += sq(weighted_norm(g, f.bR, 4)) + sq(weighted_norm(g, f.bTh, 4)) +
       sq(weighted_norm(g, f.bZ, 4));
  return e;
}

// per-node Rayleigh-Taylor margin -d_r(q - C^2/(2 Rk^2)) on Gamma
inline BoundaryFunction rt_margin_field(const Grid& g, const ScalarField& q, double C,
                                        const ScalarField& Rk) {
  ScalarField diff(g, Parity::none);
  for (std::size_t n = 0; n < diff.v.size(); ++n)
    diff.v[n] = q.v[n] - 0.5 * C * C / (Rk.v[n] * Rk.v[n]);
  BoundaryFunction drg = boundary_d_r(g, diff);
  for (double& x : drg.v) x = -x;
  return drg;
}

inline double rt_margin(const Grid& g, const ScalarField& q, double C, const ScalarField& Rk) {
  return bmin(rt_margin_field(g, q, C, Rk));
}

// gamma = zero set of the axial seed trace (exact zeros plus sign changes)
inline std::set<int> gamma_set(const Grid& g, const BoundaryFunction& trb0z) {
  std::set<int> out;
  for (int j = 0; j < g.Nz; ++j) {
    const int jp = g.jwrap(j + 1);
    if (trb0z[j] == 0.0) out.insert(j);
    if (trb0z[j] * trb0z[jp] < 0.0) {
      out.insert(j);
      out.insert(jp);
    }
  }
  return out;
}

struct GammaPrime {
  std::set<int> nodes;
  bool covers_all = false;  // delta exceeded max |b0z|
};

// open superset of gamma on which |b0z| may dip below delta; outside gamma'
// the non-collinearity condition |b0z| >= delta holds by construction
inline GammaPrime gamma_prime(const Grid& g, const BoundaryFunction& trb0z, double delta) {
  GammaPrime gp;
  if (bmax_abs(trb0z) < delta) {
    for (int j = 0; j < g.Nz; ++j) gp.nodes.insert(j);
    gp.covers_all = true;
    return gp;
  }
  std::set<int> base = gamma_set(g, trb0z);
  for (int j = 0; j < g.Nz; ++j)
    if (std::abs(trb0z[j]) < delta) base.insert(j);
  for (int j : std::vector<int>(base.begin(), base.end())) {
    gp.nodes.insert(j);
    gp.nodes.insert(g.jwrap(j - 1));
    gp.nodes.insert(g.jwrap(j + 1));
  }
  return gp;
}

struct MixedConditionReport {
  bool pass = false;
  bool rt_ok = false;
  bool noncol_ok = false;
  bool gamma_prime_covers_all = false;
  int worst_rt_node = -1;
  double worst_rt = 0.0;
  int worst_nc_node = -1;
  double worst_nc = 0.0;
  std::size_t gamma_size = 0;
  std::size_t gamma_prime_size = 0;
};

// Rayleigh-Taylor sign on gamma', non-collinearity on the rest of Gamma
inline MixedConditionReport mixed_condition_check(const Grid& g, const BoundaryFunction& margins,
                                                  const BoundaryFunction& trb0z, double delta,
                                                  double lambda) {
  MixedConditionReport rep;
  GammaPrime gp = gamma_prime(g, trb0z, delta);
  rep.gamma_size = gamma_set(g, trb0z).size();
  rep.gamma_prime_size = gp.nodes.size();
  rep.gamma_prime_covers_all = gp.covers_all;
  rep.rt_ok = true;
  rep.noncol_ok = true;
  rep.worst_rt = std::numeric_limits<double>::infinity();
  rep.worst_nc = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.Nz; ++j) {
    if (gp.nodes.count(j)) {
      if (margins[j] < rep.worst_rt) {
        rep.worst_rt = margins[j];
        rep.worst_rt_node = j;
      }
      if (margins[j] < lambda) rep.rt_ok = false;
    } else {
      if (std::abs(trb0z[j]) < rep.worst_nc) {
        rep.worst_nc = std::abs(trb0z[j]);
        rep.worst_nc_node = j;
      }
      if (std::abs(trb0z[j]) < delta) rep.noncol_ok = false;
    }
  }
  if (rep.worst_rt_node < 0) rep.worst_rt = 0.0;    // empty gamma'
  if (rep.worst_nc_node < 0) rep.worst_nc = 0.0;    // gamma' = Gamma
  rep.pass = rep.rt_ok && rep.noncol_ok;
  return rep;
}

struct Residuals {
  ScalarField div_nu, div_b, curl_nu, curl_b;
  double div_nu0 = 0, div_nu3 = 0, div_b0 = 0, div_b3 = 0;
  double curl_nu0 = 0, curl_nu3 = 0, curl_b0 = 0, curl_b3 = 0;
};

inline Residuals residuals(const Grid& g, const ScalarField& vr, const ScalarField& vz,
                           const FrozenField& f) {
  Residuals r;
  r.div_nu = fadd(fadd(d_r(g, vr), fdiv_r(g, vr)), d_z(g, vz));
  r.curl_nu = fsub(d_z(g, vr), d_r(g, vz));
  r.div_b = fadd(fadd(d_r(g, f.bR), fdiv_r(g, f.bR)), d_z(g, f.bZ));
  r.curl_b = fsub(d_z(g, f.bR), d_r(g, f.bZ));
  r.div_nu0 = weighted_norm(g, r.div_nu, 0);
  r.div_nu3 = weighted_norm(g, r.div_nu, 3);
  r.div_b0 = weighted_norm(g, r.div_b, 0);
  r.div_b3 = weighted_norm(g, r.div_b, 3);
  r.curl_nu0 = weighted_norm(g, r.curl_nu, 0);
  r.curl_nu3 = weighted_norm(g, r.curl_nu, 3);
  r.curl_b0 = weighted_norm(g, r.curl_b, 0);
  r.curl_b3 = weighted_norm(g, r.curl_b, 3);
  return r;
}

inline ScalarField dz_pow(const Grid& g, const ScalarField& f, int n) {
  ScalarField out = f;
  for (int k = 0; k < n; ++k) out = d_z(g, out);
  return out;
}

inline BoundaryFunction dz_pow(const Grid& g, const BoundaryFunction& f, int n) {
  BoundaryFunction out = f;
  for (int k = 0; k < n; ++k) out = d_z(g, out);
  return out;
}

struct GoodUnknowns {
  ScalarField V1, V2;  // dz^4 nu - dz^4 zeta . grad_A nu
  ScalarField Q;       // dz^4 q  - dz^4 zeta . grad_A q
  double boundary_energy = 0.0;
};

inline GoodUnknowns good_unknowns(const Grid& g, const Deformation& K, const FlowMap& m,
                                  const ScalarField& vr, const ScalarField& vz,
                                  const ScalarField& q, const MollifierKernel& kernel) {
  GoodUnknowns gu;
  const ScalarField z4R = dz_pow(g, m.R, 4);
  const ScalarField z4Z = dz_pow(g, m.Zhat, 4);  // coordinate part of Z dies
  auto transported = [&](const ScalarField& f) {
    // (dz^4 zeta . grad_A) f = z4R (A11 dr f + A12 dz f) + z4Z (A21 dr f + A22 dz f)
    ScalarField drf = d_r(g, f), dzf = d_z(g, f);
    return fadd(fmul(z4R, fadd(fmul(K.A11, drf), fmul(K.A12, dzf))),
                fmul(z4Z, fadd(fmul(K.A21, drf), fmul(K.A22, dzf))));
  };
  gu.V1 = fsub(dz_pow(g, vr, 4), transported(vr));
  gu.V2 = fsub(dz_pow(g, vz, 4), transported(vz));
  gu.Q = fsub(dz_pow(g, q, 4), transported(q));
  // | dz^4 Lambda_k zeta_i A_{i1} |_0 on Gamma
  BoundaryFunction trR = boundary_trace(g, m.R);
  BoundaryFunction trZh = boundary_trace(g, m.Zhat);
  BoundaryFunction z4mR = dz_pow(g, mollify(trR, kernel), 4);
  BoundaryFunction z4mZ = dz_pow(g, mollify(trZh, kernel), 4);
  Deformation dummy = K;
  BoundaryFunction A11t = boundary_trace(g, K.A11);
  BoundaryFunction A21t = boundary_trace(g, K.A21);
  (void)dummy;
  BoundaryFunction be = badd(bmul(z4mR, A11t), bmul(z4mZ, A21t));
  gu.boundary_energy = boundary_norm0(g, be);
  return gu;
}

// numeric residual of the good-unknown decomposition
//   dz^4(A_ij d_j g) = A_ij d_j(dz^4 g - dz^4 zeta . grad_A g) + C_i(g)
// assembled termwise with the discrete operators; vanishes at truncation order
inline std::pair<double, double> alinhac_residual(const Grid& g, const Deformation& K,
                                                  const FlowMap& m, const ScalarField& q) {
  const ScalarField z4R = dz_pow(g, m.R, 4);
  const ScalarField z4Z = dz_pow(g, m.Zhat, 4);
  ScalarField drq = d_r(g, q), dzq = d_z(g, q);
  const ScalarField* A[2][2] = {{&K.A11, &K.A12}, {&K.A21, &K.A22}};
  const ScalarField* dq[2] = {&drq, &dzq};
  auto dA = [&](int i, int j, const ScalarField& f) {
    return (j == 0) ? fmul(*A[i][0], d_r(g, f)) : ScalarField();
  };
  (void)dA;
  auto grad_A = [&](int i, const ScalarField& f) {
    return fadd(fmul(*A[i][0], d_r(g, f)), fmul(*A[i][1], d_z(g, f)));
  };
  // good unknown for q
  ScalarField Gq = fsub(dz_pow(g, q, 4),
                        fadd(fmul(z4R, grad_A(0, q)), fmul(z4Z, grad_A(1, q))));
  const ScalarField* zeta[2] = {&m.R, &m.Zhat};  // d of Zhat equals d of Z here
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i) {
    ScalarField lhs = dz_pow(g, grad_A(i, q), 4);
    ScalarField rhs = grad_A(i, Gq);
    // C_i(q) = [dz^4, A_ij, d_j q] + dz^4 zeta . grad_A (grad_A_i q)
    //          - [dz^3, A_il A_mj] dz(d_l zeta_m) d_j q
    for (int j = 0; j < 2; ++j) {
      ScalarField prod = fmul(*A[i][j], *dq[j]);
      ScalarField sym = fsub(fsub(dz_pow(g, prod, 4), fmul(dz_pow(g, *A[i][j], 4), *dq[j])),
                             fmul(*A[i][j], dz_pow(g, *dq[j], 4)));
      rhs = fadd(rhs, sym);
    }
    ScalarField gAi = grad_A(i, q);
    rhs = fadd(rhs, fadd(fmul(z4R, grad_A(0, gAi)), fmul(z4Z, grad_A(1, gAi))));
    for (int l = 0; l < 2; ++l)
      for (int mm = 0; mm < 2; ++mm)
        for (int j = 0; j < 2; ++j) {
          ScalarField coef = fmul(*A[i][l], *A[mm][j]);
          ScalarField dlzm = (l == 0) ? d_r(g, *zeta[mm]) : d_z(g, *zeta[mm]);
          if (mm == 1 && l == 1) dlzm = fshift(dlzm, 1.0);  // d_z Z = 1 + d_z Zhat
          ScalarField x = d_z(g, dlzm);
          ScalarField comm = fsub(dz_pow(g, fmul(coef, x), 3), fmul(coef, dz_pow(g, x, 3)));
          rhs = fsub(rhs, fmul(comm, *dq[j]));
        }
    ScalarField res = fsub(lhs, rhs);
    num += sq(norm0(g, res));
    den += sq(norm0(g, lhs));
  }
  return {std::sqrt(num), std::sqrt(den)};
}

// ---------------------------------------------------------------------------
// lemma verification corpus

struct LemmaResult {
  std::string name;
  double constant = 0.0;  // empirical constant over the corpus
  bool finite = true;
};

namespace detail {

inline ScalarField random_field(const Grid& g, Parity p, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
  ScalarField f(g, p, 0.0);
  for (int term = 0; term < 4; ++term) {
    const int kz = term % 3;
    const double a = n01(rng) / (1.0 + kz * kz);
    const double phase = ph(rng);
    const int pr = term % 2;
    for (int i = 0; i < g.Nr; ++i) {
      const double r = g.r(i);
      const double rad = (p == Parity::odd) ? (pr ? r : r * r * r / (g.R0 * g.R0))
                                            : (pr ? 1.0 : r * r / (g.R0 * g.R0));
      for (int j = 0; j < g.Nz; ++j)
        f(i, j) += a * rad * std::cos(2.0 * pi * kz * g.z(j) / g.L + phase);
    }
  }
  return f;
}

inline BoundaryFunction random_boundary(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
  BoundaryFunction f(g, 0.0);
  for (int k = 0; k <= 4; ++k) {
    const double a = n01(rng) / (1.0 + k * k);
    const double phase = ph(rng);
    for (int j = 0; j < g.Nz; ++j) f[j] += a * std::cos(2.0 * pi * k * g.z(j) / g.L + phase);
  }
  return f;
}

inline double winf_boundary(const Grid& g, const BoundaryFunction& f) {
  return std::max(bmax_abs(f), bmax_abs(d_z(g, f)));
}

inline double norm_D(const Grid& g, const ScalarField& f, int s) {
  const double a = weighted_norm(g, d_r(g, f), s);
  const double b = weighted_norm(g, d_z(g, f), s);
  return std::sqrt(a * a + b * b);
}

// all multi-index derivatives of exact order k
inline std::vector<ScalarField> derivs_of_order(const Grid& g, const ScalarField& f, int k) {
  std::vector<ScalarField> out;
  for (int az = 0; az <= k; ++az) {
    ScalarField cur = f;
    for (int m = 0; m < az; ++m) cur = d_z(g, cur);
    for (int m = 0; m < k - az; ++m) cur = d_r(g, cur);
    out.push_back(cur);
  }
  return out;
}

}  // namespace detail

// empirical constants for the product, commutator, mollifier and Hardy
// inequalities on a seeded corpus; constants should be finite and stable
// under refinement
inline std::vector<LemmaResult> lemma_suite(const Grid& g, unsigned long corpus_seed,
                                            int corpus_size = 20) {
  std::mt19937_64 rng(corpus_seed);
  std::vector<LemmaResult> out;
  auto record = [&](const std::string& name, double c) {
    out.push_back({name, c, std::isfinite(c)});
  };
  const double tiny = 1e-14;

  std::vector<ScalarField> gs, hs, odds;
  std::vector<BoundaryFunction> bgs, bhs;
  for (int c = 0; c < corpus_size; ++c) {
    gs.push_back(detail::random_field(g, Parity::even, rng));
    hs.push_back(detail::random_field(g, Parity::even, rng));
    odds.push_back(detail::random_field(g, Parity::odd, rng));
    bgs.push_back(detail::random_boundary(g, rng));
    bhs.push_back(detail::random_boundary(g, rng));
  }

  // product estimate: ||D^a(gh)||_0 <= C (||g||_k ||h||_{k/2+2} + sym)
  for (int k = 0; k <= 4; ++k) {
    double cmax = 0.0;
    const int half = k / 2 + 2;
    for (int c = 0; c < corpus_size; ++c) {
      const ScalarField prod = fmul(gs[c], hs[c]);
      double lhs = 0.0;
      for (const auto& d : detail::derivs_of_order(g, prod, k)) lhs = std::max(lhs, norm0(g, d));
      const double rhs = weighted_norm(g, gs[c], k) * weighted_norm(g, hs[c], std::min(half, 4)) +
                         weighted_norm(g, gs[c], std::min(half, 4)) * weighted_norm(g, hs[c], k);
      cmax = std::max(cmax, lhs / (rhs + tiny));
    }
    record("product_k" + std::to_string(k), cmax);
  }

  // commutator [D^a, g]h
  for (int k = 1; k <= 4; ++k) {
    double cmax = 0.0;
    const int half = (k - 1) / 2 + 2;
    for (int c = 0; c < corpus_size; ++c) {
      const ScalarField prod = fmul(gs[c], hs[c]);
      auto dprod = detail::derivs_of_order(g, prod, k);
      auto dh = detail::derivs_of_order(g, hs[c], k);
      double lhs = 0.0;
      for (std::size_t a = 0; a < dprod.size(); ++a)
        lhs = std::max(lhs, norm0(g, fsub(dprod[a], fmul(gs[c], dh[a]))));
      const double rhs =
          detail::norm_D(g, gs[c], k - 1) * weighted_norm(g, hs[c], std::min(half, 4)) +
          detail::norm_D(g, gs[c], std::min(half, 4)) * weighted_norm(g, hs[c], k - 1);
      cmax = std::max(cmax, lhs / (rhs + tiny));
    }
    record("commutator_k" + std::to_string(k), cmax);
  }

  // symmetric commutator [D^a, g, h]
  for (int k = 2; k <= 4; ++k) {
    double cmax = 0.0;
    const int half = (k - 2) / 2 + 2;
    for (int c = 0; c < corpus_size; ++c) {
      const ScalarField prod = fmul(gs[c], hs[c]);
      auto dprod = detail::derivs_of_order(g, prod, k);
      auto dg = detail::derivs_of_order(g, gs[c], k);
      auto dh = detail::derivs_of_order(g, hs[c], k);
      double lhs = 0.0;
      for (std::size_t a = 0; a < dprod.size(); ++a)
        lhs = std::max(
            lhs, norm0(g, fsub(fsub(dprod[a], fmul(dg[a], hs[c])), fmul(gs[c], dh[a]))));
      const double rhs =
          detail::norm_D(g, gs[c], k - 2) * detail::norm_D(g, hs[c], std::min(half, 4)) +
          detail::norm_D(g, gs[c], std::min(half, 4)) * detail::norm_D(g, hs[c], k - 2);
      cmax = std::max(cmax, lhs / (rhs + tiny));
    }
    record("sym_commutator_k" + std::to_string(k), cmax);
  }

  // boundary product |gh|_s <= C |g|_W1inf |h|_s at the integer endpoints
  for (int s = 0; s <= 1; ++s) {
    double cmax = 0.0;
    for (int c = 0; c < corpus_size; ++c) {
      const double lhs = boundary_norm(g, bmul(bgs[c], bhs[c]), s);
      const double rhs = detail::winf_boundary(g, bgs[c]) * boundary_norm(g, bhs[c], s);
      cmax = std::max(cmax, lhs / (rhs + tiny));
    }
    record("boundary_product_s" + std::to_string(s), cmax);
  }

  // mollifier estimates on three widths
  for (double mult : {2.0, 4.0, 8.0}) {
    MollifierKernel ker = build_kernel(mult * g.dz, g);
    double c_test3 = 0.0, c_loss0 = 0.0, c_loss1 = 0.0, c_es00 = 0.0, c_es10 = 0.0, c_es11 = 0.0;
    for (int c = 0; c < corpus_size; ++c) {
      for (int s = 0; s <= 4; ++s)
        c_test3 = std::max(c_test3, boundary_norm(g, mollify(bgs[c], ker), s) /
                                        (boundary_norm(g, bgs[c], s) + tiny));
      const BoundaryFunction dzm = d_z(g, mollify(bgs[c], ker));
      c_loss0 = std::max(c_loss0, boundary_norm0(g, dzm) * ker.kappa /
                                      (boundary_norm0(g, bgs[c]) + tiny));
      c_loss1 = std::max(c_loss1, boundary_norm0(g, dzm) / (boundary_norm(g, bgs[c], 1) + tiny));
      const BoundaryFunction comm0 = commutator(bhs[c], bgs[c], ker);
      c_es00 = std::max(c_es00, boundary_norm0(g, comm0) /
                                    (bmax_abs(bhs[c]) * boundary_norm0(g, bgs[c]) + tiny));
      const BoundaryFunction commd = commutator(bhs[c], d_z(g, bgs[c]), ker);
      c_es10 =
          std::max(c_es10, boundary_norm0(g, commd) / (detail::winf_boundary(g, bhs[c]) *
                                                           boundary_norm0(g, bgs[c]) +
                                                       tiny));
      c_es11 =
          std::max(c_es11, boundary_norm(g, commd, 1) / (detail::winf_boundary(g, bhs[c]) *
                                                             boundary_norm(g, bgs[c], 1) +
                                                         tiny));
    }
    const std::string tag = "_kdz" + std::to_string(static_cast<int>(mult));
    record("mollify_bounded" + tag, c_test3);
    record("mollify_loss_s0" + tag, c_loss0);
    record("mollify_loss_s1" + tag, c_loss1);
    record("mollify_comm_es00" + tag, c_es00);
    record("mollify_comm_es10" + tag, c_es10);
    record("mollify_comm_es11" + tag, c_es11);
  }

  // Hardy: ||g/r||_{s-1} <= C ||g||_s for axis-vanishing g
  for (int s = 1; s <= 4; ++s) {
    double cmax = 0.0;
    for (int c = 0; c < corpus_size; ++c) {
      const double lhs = weighted_norm(g, fdiv_r(g, odds[c]), s - 1);
      const double rhs = weighted_norm(g, odds[c], s);
      cmax = std::max(cmax, lhs / (rhs + tiny));
    }
    record("hardy_s" + std::to_string(s), cmax);
  }

  return out;
}

// assemble the per-step diagnostics record from a stage evaluation
inline DiagnosticsRecord record_diagnostics(const Grid& g, const MagneticSeed& seed,
                                            const SimState& s, const StageData& st,
                                            const MollifierKernel& kernel) {
  DiagnosticsRecord rec;
  rec.t = s.t;
  rec.energy = energy(g, seed, s);
  rec.div_nu = st.div_nu_Ak;
  Residuals res = residuals(g, s.vr, s.vz, st.frozen);
  rec.div_b = res.div_b0;
  rec.curl_nu = res.curl_nu0;
  rec.rt_margin = st.rt_margin;
  rec.noncol_margin = [&] {
    BoundaryFunction tb = boundary_trace(g, seed.b0z);
    double m = std::abs(tb[0]);
    for (double x : tb.v) m = std::min(m, std::abs(x));
    return m;
  }();
  GoodUnknowns gu = good_unknowns(g, st.geom.smooth, s.map, s.vr, s.vz, st.q, kernel);
  rec.boundary_energy = gu.boundary_energy;
  rec.C = s.C;
  rec.window_ok = st.geo_window.ok;
  return rec;
}

}  // namespace axivac
