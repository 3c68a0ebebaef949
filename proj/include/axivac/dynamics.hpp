#pragma once
// Right-hand-side assembly for the two coupled kappa-regularized sub-systems
// and the explicit classical Runge-Kutta stepper.
//
//   d/dt zeta   = nu + psi
//   d/dt nu     = -grad_A q + (b0.grad)^2 zeta + ((vth^2 - bth^2)/R, 0)
//   d/dt Theta  = vth / R
//   d/dt vth    = b0.grad(bth) + bR bth / R - vth vr / R
//   d/dt ln C   = A(t)
//
// with q from the variable-coefficient elliptic system, psi the
// flat-harmonic extension of a double z-primitive boundary correction, and
// all smoothed geometry (A^k, J^k, R^k) rebuilt per stage.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "axivac/elliptic.hpp"
#include "axivac/grid.hpp"
#include "axivac/kinematics.hpp"
#include "axivac/mollifier.hpp"
#include "axivac/vacuum.hpp"

namespace axivac {

struct SimState {
  FlowMap map;
  ScalarField vr, vth, vz;
  double C = 0.0;
  double t = 0.0;
};

struct StepConfig {
  double dt = 1e-3;
  double cfl = 0.5;
  double kappa = 0.0;  // mollifier width in z units
  double krylov_tol = 1e-10;
  int window_check_every = 1;
  bool pressure_enabled = true;  // test hook: false runs the transport part alone
  double lambda = 0.0;           // Rayleigh-Taylor margin floor (window uses lambda/2)
  double delta = 0.0;            // non-collinearity floor (diagnostic)
  double RS = 2.0;
};

// mean-removal projection on Gamma
inline BoundaryFunction project_zero_mean(const Grid& g, const BoundaryFunction& f) {
  const double m = bmean(g, f);
  BoundaryFunction out = f;
  for (double& x : out.v) x -= m;
  return out;
}

// periodic cumulative trapezoid primitive with F(0) = 0; the input must have
// zero mean for the output to wrap periodically
inline BoundaryFunction cumtrapz(const Grid& g, const BoundaryFunction& f) {
  BoundaryFunction out(g);
  out[0] = 0.0;
  for (int j = 1; j < g.Nz; ++j) out[j] = out[j - 1] + 0.5 * g.dz * (f[j - 1] + f[j]);
  return out;
}

// boundary data of the modification term: double primitive of the projected
// mollifier defect, re-projected after the first integration so the second
// primitive is periodic
inline std::pair<BoundaryFunction, BoundaryFunction> psi_boundary_data(
    const Grid& g, const MollifierKernel& kernel, const BoundaryGeom& bt,
    const BoundaryFunction& trR, const BoundaryFunction& trZh, const BoundaryFunction& trvr,
    const BoundaryFunction& trvz) {
  const BoundaryFunction tz2R = d_z(g, d_z(g, trR));
  const BoundaryFunction tz2Z = d_z(g, d_z(g, trZh));  // the z part of Z dies
  const BoundaryFunction tz2mR = d_z(g, d_z(g, mollify2(trR, kernel)));
  const BoundaryFunction tz2mZ = d_z(g, d_z(g, mollify2(trZh, kernel)));
  const BoundaryFunction dzmvr = d_z(g, mollify2(trvr, kernel));
  const BoundaryFunction dzmvz = d_z(g, mollify2(trvz, kernel));
  const BoundaryFunction dzvr = d_z(g, trvr);
  const BoundaryFunction dzvz = d_z(g, trvz);
  BoundaryFunction f1(g), f2(g);
  for (int j = 0; j < g.Nz; ++j) {
    const double zeta_a2 = tz2R[j] * bt.A12[j] + tz2Z[j] * bt.A22[j];
    const double mzeta_a2 = tz2mR[j] * bt.A12[j] + tz2mZ[j] * bt.A22[j];
    f1[j] = zeta_a2 * dzmvr[j] - mzeta_a2 * dzvr[j];
    f2[j] = zeta_a2 * dzmvz[j] - mzeta_a2 * dzvz[j];
  }
  auto primitive2 = [&](const BoundaryFunction& f) {
    BoundaryFunction F1 = cumtrapz(g, project_zero_mean(g, f));
    F1 = project_zero_mean(g, F1);
    return cumtrapz(g, F1);
  };
  return {primitive2(f1), primitive2(f2)};
}

// everything one stage evaluation produces; kept whole for the diagnostics
struct StageData {
  GeomCache geom;
  FrozenField frozen;
  ScalarField psi1, psi2;  // modification term
  ScalarField w1, w2;      // d/dt zeta = nu + psi
  ScalarField G1, G2;      // pressure sources
  ScalarField q;
  SolveInfo q_info;
  double A = 0.0;  // vacuum growth rate
  // rhs fields
  ScalarField dvr, dvz, dvth, dTheta;
  // monitors
  WindowStatus geo_window;
  double rt_margin = 0.0;
  double div_nu_Ak = 0.0;  // || Div_{A^k} nu ||_0
};

enum class RunStop { none, window_geometry, window_rt, degenerate_map };

struct StepResult {
  RunStop stop = RunStop::none;
  std::string reason;
  StageData first_stage;  // stage-1 evaluation (diagnostic source)
};

class Simulation {
 public:
  Simulation(const Grid& g, MagneticSeed seed, StepConfig cfg)
      : g_(g), seed_(std::move(seed)), cfg_(cfg), kernel_(build_kernel(cfg.kappa, g)) {}

  const Grid& grid() const { return g_; }
  const MagneticSeed& seed() const { return seed_; }
  const MollifierKernel& kernel() const { return kernel_; }
  const StepConfig& config() const { return cfg_; }

  // CFL bound dt <= cfl * min(dr,dz) / max(1, max|v|, max|bbar|)
  double cfl_dt(const SimState& s) const {
    FrozenField f = reconstruct_b(g_, seed_, s.map);
    double vmax = std::max({1.0, fmax_abs(s.vr), fmax_abs(s.vth), fmax_abs(s.vz),
                            fmax_abs(f.bR), fmax_abs(f.bTh), fmax_abs(f.bZ)});
    return cfg_.cfl * std::min(g_.dr, g_.dz) / vmax;
  }

  StageData evaluate(const SimState& s) {
    StageData st;
    st.geom = build_geom(g_, s.map, kernel_, cfg_.krylov_tol, &warm_phiR_, &warm_phiZ_);
    st.geo_window = check_geometry_window(st.geom.smooth);
    st.frozen = reconstruct_b(g_, seed_, s.map);

    // traces of the raw map and velocity
    const BoundaryFunction trR = boundary_trace(g_, s.map.R);
    const BoundaryFunction trZh = boundary_trace(g_, s.map.Zhat);
    const BoundaryFunction trvr = boundary_trace(g_, s.vr);
    const BoundaryFunction trvz = boundary_trace(g_, s.vz);

    // modification term
    auto [pd1, pd2] = psi_boundary_data(g_, kernel_, st.geom.btrace, trR, trZh, trvr, trvz);
    auto ps1 = solve_flat_laplace(g_, pd1, cfg_.krylov_tol, &warm_psi1_);
    auto ps2 = solve_flat_laplace(g_, pd2, cfg_.krylov_tol, &warm_psi2_);
    st.psi1 = std::move(ps1.u);
    st.psi2 = std::move(ps2.u);
    st.w1 = fadd(s.vr, st.psi1);
    st.w2 = fadd(s.vz, st.psi2);

    // time derivative of the smoothed geometry: re-run the smoothing pipeline
    // on d/dt zeta = nu + psi, then use the determinant/cofactor identities
    SmoothedMap dphi = smooth_correction(g_, st.w1, st.w2, kernel_, cfg_.krylov_tol,
                                         &warm_dphiR_, &warm_dphiZ_);
    ScalarField dtF11 = fadd(d_r(g_, st.w1), d_r(g_, dphi.phiR));
    ScalarField dtF12 = fadd(d_z(g_, st.w1), d_z(g_, dphi.phiR));
    ScalarField dtF21 = fadd(d_r(g_, st.w2), d_r(g_, dphi.phiZ));
    ScalarField dtF22 = fadd(d_z(g_, st.w2), d_z(g_, dphi.phiZ));
    ScalarField dtRk = fadd(st.w1, dphi.phiR);

    const Deformation& K = st.geom.smooth;
    ScalarField dtA11(g_, Parity::none), dtA12(g_, Parity::none);
    ScalarField dtA21(g_, Parity::none), dtA22(g_, Parity::none);
    for (std::size_t n = 0; n < dtA11.v.size(); ++n) {
      const double a[2][2] = {{K.A11.v[n], K.A12.v[n]}, {K.A21.v[n], K.A22.v[n]}};
      const double dF[2][2] = {{dtF11.v[n], dtF12.v[n]}, {dtF21.v[n], dtF22.v[n]}};
      double out[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double sum = 0.0;
          for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m) sum += a[i][l] * dF[m][l] * a[m][j];
          out[i][j] = -sum;
        }
      dtA11.v[n] = out[0][0];
      dtA12.v[n] = out[0][1];
      dtA21.v[n] = out[1][0];
      dtA22.v[n] = out[1][1];
    }

    // pressure sources
    const ScalarField& Rk = st.geom.Rk;
    const ScalarField& Jk = K.J;
    ScalarField wf = fdiv(fsub(fmul(s.vth, s.vth), fmul(st.frozen.bTh, st.frozen.bTh)), s.map.R);
    ScalarField DbR = apply_Db0(g_, seed_, st.frozen.bR);
    ScalarField DbZ = apply_Db0(g_, seed_, st.frozen.bZ);

    auto div_Ak = [&](const ScalarField& h1, const ScalarField& h2) {
      ScalarField d = fadd(fadd(fmul(K.A11, d_r(g_, h1)), fmul(K.A12, d_z(g_, h1))),
                           fadd(fmul(K.A21, d_r(g_, h2)), fmul(K.A22, d_z(g_, h2))));
      return fadd(d, fdiv(h1, Rk));
    };

    st.G2 = fmul(Jk, div_Ak(st.frozen.bR, st.frozen.bZ));
    ScalarField JdivDbh = fmul(Jk, div_Ak(DbR, DbZ));
    ScalarField DbG2 = apply_Db0(g_, seed_, st.G2);

    ScalarField drvr = d_r(g_, s.vr), dzvr = d_z(g_, s.vr);
    ScalarField drvz = d_r(g_, s.vz), dzvz = d_z(g_, s.vz);
    ScalarField commute_t(g_, Parity::none);
    for (std::size_t n = 0; n < commute_t.v.size(); ++n) {
      const double dtA_dnu = dtA11.v[n] * drvr.v[n] + dtA12.v[n] * dzvr.v[n] +
                             dtA21.v[n] * drvz.v[n] + dtA22.v[n] * dzvz.v[n];
      commute_t.v[n] =
          Jk.v[n] * (-dtA_dnu + s.vr.v[n] * dtRk.v[n] / (Rk.v[n] * Rk.v[n]));
    }
    ScalarField swirl_part =
        fadd(fmul(fdiv(Jk, Rk), wf),
             fmul(Jk, fadd(fmul(K.A11, d_r(g_, wf)), fmul(K.A12, d_z(g_, wf)))));
    st.G1 = fadd(fadd(commute_t, swirl_part), fsub(JdivDbh, DbG2));

    st.div_nu_Ak = norm0(g_, div_Ak(s.vr, s.vz));

    // pressure solve, split into harmonic lift plus homogeneous remainder
    VacuumState vac{s.C, cfg_.RS, 0.0};
    BoundaryFunction qdata = pressure_boundary_data(vac, st.geom.btrace.Rk);
    if (cfg_.pressure_enabled) {
      auto hh = solve_cyl_harmonic(g_, qdata, cfg_.krylov_tol, &warm_hhat_);
      // E_ij = J^k A_li A_lj, weight R^k
      ScalarField E11 = fmul(Jk, fadd(fmul(K.A11, K.A11), fmul(K.A21, K.A21)));
      ScalarField E12 = fmul(Jk, fadd(fmul(K.A11, K.A12), fmul(K.A21, K.A22)));
      ScalarField E22 = fmul(Jk, fadd(fmul(K.A12, K.A12), fmul(K.A22, K.A22)));
      EllipticOperator op = make_pressure_operator(g_, E11, E12, E22, Rk);
      // b = -W G1 - weak(b0.grad G2) - A(hhat; data)
      std::vector<double> b(g_.size());
      ScalarField RkG2 = fmul(Rk, st.G2);
      ScalarField weak = apply_Db0_transpose(g_, seed_, RkG2, Parity::even);
      ScalarField DbRk = apply_Db0(g_, seed_, Rk);
      std::vector<double> Ah(g_.size());
      op.apply(hh.u.v, &qdata, Ah);
      for (std::size_t n = 0; n < b.size(); ++n) {
        const double w_extra =
            (DbRk.v[n] - seed_.b0r.v[n] / g_.r(static_cast<int>(n) / g_.Nz) * Rk.v[n]) *
            st.G2.v[n];
        b[n] = -Rk.v[n] * st.G1.v[n] + weak.v[n] + w_extra - Ah[n];
      }
      std::vector<double> x = warm_qhat_.v;
      st.q_info = solve_cg(op, b, x, cfg_.krylov_tol);
      ScalarField qhat(g_, Parity::even);
      qhat.v = std::move(x);
      warm_qhat_ = qhat;
      st.q = fadd(qhat, hh.u);
      st.q.parity = Parity::even;
    } else {
      st.q = ScalarField(g_, Parity::even, 0.0);
    }

    // Rayleigh-Taylor margin: min over Gamma of -d_r(q - C^2/(2 Rk^2))
    {
      ScalarField vacq(g_, Parity::none);
      for (std::size_t n = 0; n < vacq.v.size(); ++n)
        vacq.v[n] = st.q.v[n] - 0.5 * s.C * s.C / (Rk.v[n] * Rk.v[n]);
      st.rt_margin = -1.0 * [&] {
        BoundaryFunction drg = boundary_d_r(g_, vacq);
        double mx = drg[0];
        for (double x : drg.v) mx = std::max(mx, x);
        return mx;
      }();
    }

    // momentum and swirl right-hand sides
    ScalarField drq = d_r(g_, st.q), dzq = d_z(g_, st.q);
    st.dvr = fadd(fadd(fscale(fadd(fmul(K.A11, drq), fmul(K.A12, dzq)), -1.0), DbR), wf);
    st.dvz = fadd(fscale(fadd(fmul(K.A21, drq), fmul(K.A22, dzq)), -1.0), DbZ);
    st.dTheta = fdiv(s.vth, s.map.R);
    st.dvth = fsub(fadd(apply_Db0(g_, seed_, st.frozen.bTh),
                        fdiv(fmul(st.frozen.bR, st.frozen.bTh), s.map.R)),
                   fdiv(fmul(s.vth, s.vr), s.map.R));

    // vacuum growth rate from the raw Lagrangian traces
    BoundaryFunction tr_dzR = d_z(g_, trR);
    BoundaryFunction tr_dzZ = d_z(g_, trZh);
    for (double& x : tr_dzZ.v) x += 1.0;
    st.A = compute_A(g_, trvr, trvz, trR, tr_dzR, tr_dzZ, cfg_.RS);
    return st;
  }

  // one classical RK4 step; the amplitude C advances multiplicatively through
  // ln C so positivity is automatic. Window monitors run on the first stage
  // at the configured cadence.
  StepResult step(SimState& s, long step_index = 0) {
    StepResult res;
    const double dt = cfg_.dt;
    StageData k1 = evaluate(s);
    res.first_stage = k1;
    const bool check = (cfg_.window_check_every > 0) &&
                       (step_index % cfg_.window_check_every == 0);
    if (check) {
      if (!k1.geo_window.ok) {
        res.stop = RunStop::window_geometry;
        res.reason = "geometry window violated: |J^k-1| or |A^k-I| above 1/8";
        return res;
      }
      if (cfg_.pressure_enabled && k1.rt_margin < 0.5 * cfg_.lambda) {
        res.stop = RunStop::window_rt;
        res.reason = "Rayleigh-Taylor margin fell below lambda/2";
        return res;
      }
    }
    SimState s2 = advanced(s, k1, 0.5 * dt);
    StageData k2 = evaluate(s2);
    SimState s3 = advanced(s, k2, 0.5 * dt);
    StageData k3 = evaluate(s3);
    SimState s4 = advanced(s, k3, dt);
    StageData k4 = evaluate(s4);

    auto combine = [&](const ScalarField& y, const ScalarField& a, const ScalarField& b,
                       const ScalarField& c, const ScalarField& d) {
      ScalarField out = y;
      const double h = dt / 6.0;
      for (std::size_t n = 0; n < out.v.size(); ++n)
        out.v[n] += h * (a.v[n] + 2.0 * b.v[n] + 2.0 * c.v[n] + d.v[n]);
      return out;
    };
    s.map.R = combine(s.map.R, k1.w1, k2.w1, k3.w1, k4.w1);
    s.map.Zhat = combine(s.map.Zhat, k1.w2, k2.w2, k3.w2, k4.w2);
    s.map.Theta = combine(s.map.Theta, k1.dTheta, k2.dTheta, k3.dTheta, k4.dTheta);
    s.vr = combine(s.vr, k1.dvr, k2.dvr, k3.dvr, k4.dvr);
    s.vth = combine(s.vth, k1.dvth, k2.dvth, k3.dvth, k4.dvth);
    s.vz = combine(s.vz, k1.dvz, k2.dvz, k3.dvz, k4.dvz);
    s.C *= std::exp(dt / 6.0 * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A));
    s.t += dt;
    return res;
  }

 private:
  SimState advanced(const SimState& s, const StageData& k, double h) const {
    SimState out = s;
    auto bump = [&](ScalarField& y, const ScalarField& d) {
      for (std::size_t n = 0; n < y.v.size(); ++n) y.v[n] += h * d.v[n];
    };
    bump(out.map.R, k.w1);
    bump(out.map.Zhat, k.w2);
    bump(out.map.Theta, k.dTheta);
    bump(out.vr, k.dvr);
    bump(out.vth, k.dvth);
    bump(out.vz, k.dvz);
    out.C = s.C * std::exp(h * k.A);
    out.t = s.t + h;
    return out;
  }

  Grid g_;
  MagneticSeed seed_;
  StepConfig cfg_;
  MollifierKernel kernel_;
  // warm starts for the per-stage elliptic solves
  ScalarField warm_phiR_, warm_phiZ_, warm_psi1_, warm_psi2_;
  ScalarField warm_dphiR_, warm_dphiZ_, warm_hhat_, warm_qhat_;
};

}  // namespace axivac
