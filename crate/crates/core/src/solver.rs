//! Time stepping with Gauss–Seidel or Newton iteration for the free boundary
//! and the coupled regimes.
//!
//! Each sweep takes one Newton step per regime on the coupled value, delta
//! and gamma systems together with the boundary condition `u_0 + s_f = K`.
//! The boundary enters through ω and the Dirichlet data `w_0 = y_0 = -s_f`;
//! updating the fields jointly keeps the step well posed where the boundary
//! is weakly determined by the value equation alone (low volatility, early
//! steps). `z` follows from its own tridiagonal system. Gauss–Seidel refreshes
//! the inter-regime coupling from the latest iterate of each regime in turn;
//! Newton freezes it for the whole sweep, so regimes can be solved in parallel.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::greeks::{self, GreeksField};
use crate::interp::{accumulate_coupling, hermite_at, z_derivative_into, CouplingTerms, InterpOrder};
use crate::model::{initial_state, omega_unchecked, BoundaryHistory, GridSpec, RegimeModel, RegimeState};
use crate::scheme::{
    derivative_matrix, derivative_rhs, mass, value_matrix, value_rhs_split, DerivativeInputs, SchemeCoefficients,
    TridiagonalFactor, ValueInputs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "gs")]
    GaussSeidel,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub interpolation: InterpOrder,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub grid: GridSpec,
    /// Solve regimes concurrently inside a Newton iteration. Ignored by Gauss–Seidel.
    pub parallel: bool,
}

impl SolverConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-8;
    pub const DEFAULT_MAX_ITERATIONS: usize = 100;

    pub fn new(grid: GridSpec) -> Self {
        Self {
            method: Method::GaussSeidel,
            interpolation: InterpOrder::Quintic,
            epsilon: Self::DEFAULT_EPSILON,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            grid,
            parallel: false,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_interpolation(mut self, order: InterpOrder) -> Self {
        self.interpolation = order;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("{} must be > 0", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if self.grid.m < 4 {
            return Err(Error::GridTooSmall(self.grid.m));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub states: Vec<RegimeState>,
    pub boundary: BoundaryHistory,
    pub greeks: Vec<GreeksField>,
    /// Backward-difference estimate of `d ln s_f / dτ` at the final level.
    pub s_f_slope: Vec<f64>,
    pub iterations: Vec<usize>,
    pub wall_time: f64,
    pub grid: GridSpec,
    pub strike: f64,
}

impl SolveResult {
    pub fn num_regimes(&self) -> usize {
        self.states.len()
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }

    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }
}

/// Constant per-regime operators.
#[derive(Debug, Clone)]
struct RegimeOps {
    coeffs: SchemeCoefficients,
    rate: f64,
    vol: f64,
    value_rows: [Vec<f64>; 3],
    deriv: TridiagonalFactor,
    deriv_rows: [Vec<f64>; 3],
    /// Regime receives no jumps from other regimes.
    isolated: bool,
}

/// Bandwidths of the interleaved `(u_i, w_i, y_i)` Jacobian.
const KL: usize = 4;
const KU: usize = 8;

#[derive(Debug, Clone)]
struct Work {
    cur: CouplingTerms,
    prev: CouplingTerms,
    sum: CouplingTerms,
    b0: Vec<f64>,
    b1: Vec<f64>,
    tmp: Vec<f64>,
    jac: BandMatrix,
    /// Residual, later the Newton correction.
    x1: Vec<f64>,
    /// Boundary column, later `J^{-1}` of it.
    x2: Vec<f64>,
    converged: bool,
    bracket: Bracket,
}

/// Safeguard for the boundary update. `G(s_f) = u_0 + s_f - K`, with `u`
/// solving the linear rows at fixed `s_f`, is exact after every solve, so a
/// sign bracket on it stays valid while the coupling is steady. Plain Newton
/// is used while `|G|` decreases; otherwise the update bisects a known
/// bracket, or marches away from the sign of `G` until one is found (the
/// residual can fold when the boundary moves quickly).
#[derive(Debug, Clone, Copy)]
struct Bracket {
    below: Option<f64>,
    above: Option<f64>,
    last: f64,
    rises: usize,
    reach: f64,
}

impl Bracket {
    const FRESH: Self = Self { below: None, above: None, last: f64::INFINITY, rises: 0, reach: 0.0 };

    fn next(&mut self, s: f64, g: f64, newton: f64) -> f64 {
        if g < 0.0 {
            self.below = Some(s);
        } else if g > 0.0 {
            self.above = Some(s);
        }
        let rising = g.abs() > self.last;
        self.last = g.abs();
        if !rising {
            return newton;
        }
        self.rises += 1;
        match (self.below, self.above) {
            (Some(a), Some(b)) if (a - b).abs() > 1e-14 * s => 0.5 * (a + b),
            (Some(_), Some(_)) => {
                *self = Self::FRESH;
                newton
            }
            _ if self.rises >= 2 => {
                self.reach = (2.0 * self.reach).max(1e-3 * s);
                s - g.signum() * self.reach
            }
            _ => newton,
        }
    }
}

impl Work {
    fn new(len: usize) -> Self {
        Self {
            cur: CouplingTerms::zeros(len),
            prev: CouplingTerms::zeros(len),
            sum: CouplingTerms::zeros(len),
            b0: vec![0.0; len],
            b1: vec![0.0; len],
            tmp: vec![0.0; len],
            jac: BandMatrix::zeros(3 * len, KL, KU),
            x1: vec![0.0; 3 * len],
            x2: vec![0.0; 3 * len],
            converged: false,
            bracket: Bracket::FRESH,
        }
    }
}

/// Reusable stepping machinery for one model and configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: RegimeModel,
    config: SolverConfig,
    ops: Vec<RegimeOps>,
    work: Vec<Work>,
    zslope: Vec<Vec<f64>>,
    zslope_prev: Vec<Vec<f64>>,
}

impl Stepper {
    pub fn new(model: &RegimeModel, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let m = grid.m;
        let n_reg = model.num_regimes();
        let mut ops = Vec::with_capacity(n_reg);
        for r in 0..n_reg {
            let coeffs = SchemeCoefficients::new(model.vols[r], model.effective_rate(r), 0.0, &grid);
            let (vs, vd, vu) = value_matrix(&coeffs, m);
            let (ds, dd, du) = derivative_matrix(&coeffs, m);
            let deriv = TridiagonalFactor::new(&ds, &dd, &du)?;
            let isolated = (0..n_reg).all(|l| l == r || model.generator.get(r, l) == 0.0);
            ops.push(RegimeOps {
                coeffs,
                rate: model.rates[r],
                vol: model.vols[r],
                value_rows: [vs, vd, vu],
                deriv,
                deriv_rows: [ds, dd, du],
                isolated,
            });
        }
        Ok(Self {
            model: model.clone(),
            config: *config,
            ops,
            work: (0..n_reg).map(|_| Work::new(m + 1)).collect(),
            zslope: vec![vec![0.0; m + 1]; n_reg],
            zslope_prev: vec![vec![0.0; m + 1]; n_reg],
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Advances `states` from level `step` to `step + 1`; returns the iteration count.
    pub fn step(&mut self, states: &mut [RegimeState], step: usize) -> Result<usize> {
        if states.len() != self.ops.len() {
            return Err(Error::DimensionMismatch { what: "states", expected: self.ops.len(), got: states.len() });
        }
        let len = self.config.grid.m + 1;
        for s in states.iter() {
            if s.u.len() != len || s.w.len() != len || s.y.len() != len || s.z.len() != len {
                return Err(Error::DimensionMismatch { what: "state", expected: len, got: s.u.len() });
            }
            if !(s.s_f > 0.0) {
                return Err(Error::NonpositiveBoundary(s.s_f));
            }
        }
        let prev: Vec<RegimeState> = states.to_vec();
        for (r, st) in prev.iter().enumerate() {
            z_derivative_into(&st.z, self.config.grid.h, &mut self.zslope_prev[r])?;
        }
        self.zslope.clone_from(&self.zslope_prev);
        for r in 0..prev.len() {
            let Self { work, zslope_prev, model, config, .. } = self;
            coupling_into(&mut work[r].prev, r, &prev, zslope_prev, prev[r].s_f, model, config)?;
            work[r].converged = false;
            work[r].bracket = Bracket::FRESH;
        }
        for s in states.iter_mut() {
            s.s_f_prev = s.s_f;
        }
        let res = match self.config.method {
            Method::GaussSeidel => self.gs_iterate(states, &prev),
            Method::Newton => self.newton_iterate(states, &prev),
        };
        res.map_err(|e| match e {
            Error::NoConvergence { iterations, boundary_change, value_change, .. } => {
                Error::NoConvergence { step, iterations, boundary_change, value_change }
            }
            e => e.at_step(step),
        })
    }

    fn gs_iterate(&mut self, states: &mut [RegimeState], prev: &[RegimeState]) -> Result<usize> {
        let cfg = self.config;
        let n_reg = states.len();
        let (mut ds_max, mut du_max) = (f64::INFINITY, f64::INFINITY);
        for it in 1..=cfg.max_iterations {
            ds_max = 0.0;
            du_max = 0.0;
            for r in 0..n_reg {
                if self.ops[r].isolated && self.work[r].converged {
                    continue;
                }
                {
                    let Self { work, zslope, model, config, .. } = self;
                    let s_f = states[r].s_f;
                    coupling_into(&mut work[r].cur, r, states, zslope, s_f, model, config)?;
                }
                let (ds, du) =
                    regime_update(&self.ops[r], &mut self.work[r], &mut states[r], &prev[r], self.model.strike, &cfg)?;
                z_derivative_into(&states[r].z, cfg.grid.h, &mut self.zslope[r])?;
                self.work[r].converged = ds < cfg.epsilon && du < cfg.epsilon;
                ds_max = ds_max.max(ds);
                du_max = du_max.max(du);
            }
            if ds_max < cfg.epsilon && du_max < cfg.epsilon {
                return Ok(it);
            }
        }
        Err(Error::NoConvergence {
            step: 0,
            iterations: cfg.max_iterations,
            boundary_change: ds_max,
            value_change: du_max,
        })
    }

    fn newton_iterate(&mut self, states: &mut [RegimeState], prev: &[RegimeState]) -> Result<usize> {
        let cfg = self.config;
        let strike = self.model.strike;
        let (mut ds_max, mut du_max) = (f64::INFINITY, f64::INFINITY);
        for it in 1..=cfg.max_iterations {
            // Coupling frozen at the previous iterate for every regime.
            for r in 0..states.len() {
                if self.ops[r].isolated && self.work[r].converged {
                    continue;
                }
                let Self { work, zslope, model, config, .. } = self;
                let s_f = states[r].s_f;
                coupling_into(&mut work[r].cur, r, states, zslope, s_f, model, config)?;
            }
            let body = |((ops, work), (st, pv)): ((&RegimeOps, &mut Work), (&mut RegimeState, &RegimeState))| {
                if ops.isolated && work.converged {
                    return Ok((0.0, 0.0));
                }
                regime_update(ops, work, st, pv, strike, &cfg)
            };
            let changes: Vec<Result<(f64, f64)>> = if cfg.parallel {
                self.ops
                    .par_iter()
                    .zip(self.work.par_iter_mut())
                    .zip(states.par_iter_mut().zip(prev.par_iter()))
                    .map(body)
                    .collect()
            } else {
                self.ops.iter().zip(self.work.iter_mut()).zip(states.iter_mut().zip(prev.iter())).map(body).collect()
            };
            ds_max = 0.0;
            du_max = 0.0;
            for (r, c) in changes.into_iter().enumerate() {
                let (ds, du) = c?;
                if !(self.ops[r].isolated && self.work[r].converged) {
                    z_derivative_into(&states[r].z, cfg.grid.h, &mut self.zslope[r])?;
                    self.work[r].converged = ds < cfg.epsilon && du < cfg.epsilon;
                }
                ds_max = ds_max.max(ds);
                du_max = du_max.max(du);
            }
            if ds_max < cfg.epsilon && du_max < cfg.epsilon {
                return Ok(it);
            }
        }
        Err(Error::NoConvergence {
            step: 0,
            iterations: cfg.max_iterations,
            boundary_change: ds_max,
            value_change: du_max,
        })
    }
}

/// `Σ_{l≠m} q_ml f_l` at every node of regime `m`.
fn coupling_into(
    out: &mut CouplingTerms,
    m: usize,
    states: &[RegimeState],
    zslope: &[Vec<f64>],
    s_f_m: f64,
    model: &RegimeModel,
    config: &SolverConfig,
) -> Result<()> {
    out.clear();
    for (l, st) in states.iter().enumerate() {
        let q = model.generator.get(m, l);
        if l == m || q == 0.0 {
            continue;
        }
        accumulate_coupling(out, q, st, &zslope[l], s_f_m, model.strike, config.interpolation, &config.grid)?;
    }
    Ok(())
}

fn sum_coupling(work: &mut Work) {
    let Work { cur, prev, sum, .. } = work;
    for (s, (a, b)) in [
        (&mut sum.u, (&cur.u, &prev.u)),
        (&mut sum.w, (&cur.w, &prev.w)),
        (&mut sum.y, (&cur.y, &prev.y)),
        (&mut sum.z, (&cur.z, &prev.z)),
    ] {
        for ((s, a), b) in s.iter_mut().zip(a).zip(b) {
            *s = a + b;
        }
    }
}

#[inline]
fn tridiag_apply(rows: &[Vec<f64>; 3], f: &[f64], i: usize) -> f64 {
    let [sub, diag, sup] = rows;
    let mut a = diag[i] * f[i];
    if i > 0 {
        a += sub[i] * f[i - 1];
    }
    if i + 1 < f.len() {
        a += sup[i] * f[i + 1];
    }
    a
}

#[inline]
fn stiff(v: &[f64], i: usize) -> f64 {
    v[i - 1] - 2.0 * v[i] + v[i + 1]
}

/// Residual of a regime's `(u, w, y)` rows into `work.x1`, their `s_f`
/// derivative into `work.x2` and the Jacobian at fixed `s_f` into `work.jac`.
fn assemble_newton(
    ops: &RegimeOps,
    work: &mut Work,
    st: &RegimeState,
    pv: &RegimeState,
    strike: f64,
    cfg: &SolverConfig,
) {
    let m = cfg.grid.m;
    let (h, k) = (cfg.grid.h, cfg.grid.k);
    let s = st.s_f;
    let s_n = pv.s_f;
    let om = omega_unchecked(s, s_n, k, ops.rate, ops.vol);
    let dom = 4.0 * s_n / (k * (s + s_n) * (s + s_n));
    let coeffs = ops.coeffs.with_omega(om);
    let rq = coeffs.eff_rate;
    let (a_sub, a_dia) = (ops.value_rows[0][1], ops.value_rows[1][1]);
    let (a00, a01) = (ops.value_rows[1][0], ops.value_rows[2][0]);
    let src = om / (2.0 * h * h);
    let dsrc = dom / (2.0 * h * h);
    let (iu, iw, iy) = (|i: usize| 3 * i, |i: usize| 3 * i + 1, |i: usize| 3 * i + 2);

    sum_coupling(work);
    {
        let Work { sum, b0, b1, .. } = &mut *work;
        let inp = ValueInputs {
            u_n: &pv.u,
            w_n: &pv.w,
            y_n: &pv.y,
            w_guess: &st.w,
            y_guess: &st.y,
            coupling_u: &sum.u,
            coupling_w: &sum.w,
        };
        value_rhs_split(&inp, &ops.coeffs, m, strike, b0, b1);
    }
    // Residuals and the boundary column. The new boundary delta w_0 enters
    // the value rows as ω w_0 t with t = e_0/2 + e_1/24.
    let w0 = st.w[0];
    for i in 0..=m {
        let t = match i {
            0 => 0.5,
            1 => 1.0 / 24.0,
            _ => 0.0,
        };
        if i == m {
            work.x1[iu(i)] = st.u[m];
            work.x2[iu(i)] = 0.0;
        } else {
            let full = work.b1[i] + w0 * t;
            work.x1[iu(i)] = tridiag_apply(&ops.value_rows, &st.u, i) - work.b0[i] - om * full;
            // The coupling is sampled at s_f e^{x_i}, so d/ds_f of it is its x-slope over s_f.
            let (cw, cy) = (&work.cur.w, &work.cur.y);
            let dcoup = if i == 0 {
                0.875 * cw[0] + 0.375 * cw[1] + h / 24.0 * (3.0 * cy[0] - 2.0 * cy[1])
            } else {
                mass(cw, i) / 24.0
            };
            work.x2[iu(i)] = -dom * full - dcoup / s;
        }
    }
    for (field, off) in [(0usize, 1usize), (1, 2)] {
        let (f, g, f_n, g_n, cf, dcf) = if field == 0 {
            (&st.w, &st.u, &pv.w, &pv.u, &work.sum.w, &work.cur.y)
        } else {
            (&st.y, &st.w, &pv.y, &pv.w, &work.sum.y, &work.cur.z)
        };
        let inp = DerivativeInputs { f_n, g_n, g_guess: g, coupling_f: cf };
        derivative_rhs(&inp, &coeffs, m, s, &mut work.tmp);
        for i in 0..=m {
            work.x1[3 * i + off] = tridiag_apply(&ops.deriv_rows, f, i) - work.tmp[i];
            work.x2[3 * i + off] = if i == 0 {
                1.0
            } else if i == m {
                0.0
            } else {
                -dsrc * (stiff(g, i) + stiff(g_n, i)) - mass(dcf, i) / (24.0 * s)
            };
        }
    }

    // Jacobian of the (u, w, y) rows at fixed s_f.
    let jac = &mut work.jac;
    jac.clear();
    jac.add(iu(0), iu(0), a00);
    jac.add(iu(0), iu(1), a01);
    jac.add(iu(0), iw(0), -0.5 * om);
    jac.add(iu(0), iw(1), -(h / (6.0 * k) + rq * h / 12.0) - 0.375 * om);
    jac.add(iu(0), iw(2), -0.375 * om);
    jac.add(iu(0), iy(1), 7.0 * h * om / 12.0);
    jac.add(iu(0), iy(2), h * om / 8.0);
    for i in 1..m {
        jac.add(iu(i), iu(i - 1), a_sub);
        jac.add(iu(i), iu(i), a_dia);
        jac.add(iu(i), iu(i + 1), a_sub);
        jac.add(iu(i), iw(i - 1), -om / 24.0);
        jac.add(iu(i), iw(i), -10.0 * om / 24.0);
        jac.add(iu(i), iw(i + 1), -om / 24.0);
        for (row, col) in [(iw(i), iu as fn(usize) -> usize), (iy(i), iw as fn(usize) -> usize)] {
            let own = row - 3 * i;
            jac.add(row, 3 * (i - 1) + own, a_sub);
            jac.add(row, row, a_dia);
            jac.add(row, 3 * (i + 1) + own, a_sub);
            jac.add(row, col(i - 1), -src);
            jac.add(row, col(i), 2.0 * src);
            jac.add(row, col(i + 1), -src);
        }
    }
    for r in [iu(m), iw(0), iw(m), iy(0), iy(m)] {
        jac.add(r, r, 1.0);
    }
}

/// One Newton step on a regime's coupled `(u, w, y, s_f)` system with the
/// inter-regime coupling held fixed, followed by the `z` solve.
/// Returns `(|Δs_f|, max |Δu|)`.
fn regime_update(
    ops: &RegimeOps,
    work: &mut Work,
    st: &mut RegimeState,
    pv: &RegimeState,
    strike: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    let m = cfg.grid.m;
    let k = cfg.grid.k;
    let s = st.s_f;
    let s_n = pv.s_f;
    let (iu, iw, iy) = (|i: usize| 3 * i, |i: usize| 3 * i + 1, |i: usize| 3 * i + 2);
    assemble_newton(ops, work, st, pv, strike, cfg);
    let jac = &mut work.jac;
    jac.factor()?;
    jac.solve_in_place(&mut work.x1);
    jac.solve_in_place(&mut work.x2);

    // Bordered closure u_0 + s_f = K.
    let f_s = st.u[0] + s - strike;
    let denom = 1.0 - work.x2[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularPivot(0));
    }
    let g = f_s - work.x1[0];
    let newton = g / denom;
    let s_new = work.bracket.next(s, g, s - newton);
    if !(s_new > 0.0 && s_new.is_finite()) {
        return Err(Error::NonpositiveBoundary(s_new));
    }
    let ds = s - s_new;
    let mut du = 0.0f64;
    for i in 0..=m {
        let dui = work.x1[iu(i)] - work.x2[iu(i)] * ds;
        du = du.max(dui.abs());
        st.u[i] -= dui;
        st.w[i] -= work.x1[iw(i)] - work.x2[iw(i)] * ds;
        st.y[i] -= work.x1[iy(i)] - work.x2[iy(i)] * ds;
    }
    st.s_f = s_new;
    st.u[0] = strike - s_new;
    st.w[0] = -s_new;
    st.y[0] = -s_new;
    st.u[m] = 0.0;
    st.w[m] = 0.0;
    st.y[m] = 0.0;

    // z from the converged-so-far y.
    let coeffs = ops.coeffs.with_omega(omega_unchecked(s_new, s_n, k, ops.rate, ops.vol));
    let inp = DerivativeInputs { f_n: &pv.z, g_n: &pv.y, g_guess: &st.y, coupling_f: &work.sum.z };
    derivative_rhs(&inp, &coeffs, m, s_new, &mut work.tmp);
    ops.deriv.solve_in_place(&mut work.tmp);
    st.z.copy_from_slice(&work.tmp);
    Ok((ds.abs().max(newton.abs()), du))
}

/// Single Gauss–Seidel time step from `states`.
pub fn gs_time_step(
    states: &[RegimeState],
    model: &RegimeModel,
    config: &SolverConfig,
) -> Result<(Vec<RegimeState>, usize)> {
    let cfg = config.with_method(Method::GaussSeidel);
    let mut stepper = Stepper::new(model, &cfg)?;
    let mut next = states.to_vec();
    let its = stepper.step(&mut next, 0)?;
    Ok((next, its))
}

/// Single Newton time step from `states`.
pub fn newton_time_step(
    states: &[RegimeState],
    model: &RegimeModel,
    config: &SolverConfig,
) -> Result<(Vec<RegimeState>, usize)> {
    let cfg = config.with_method(Method::Newton);
    let mut stepper = Stepper::new(model, &cfg)?;
    let mut next = states.to_vec();
    let its = stepper.step(&mut next, 0)?;
    Ok((next, its))
}

/// Full-horizon solve from the initial data.
pub fn solve(model: &RegimeModel, config: &SolverConfig) -> Result<SolveResult> {
    let start = Instant::now();
    let grid = config.grid;
    let mut stepper = Stepper::new(model, config)?;
    let mut states = initial_state(model, &grid);
    let n_reg = states.len();
    let mut boundary = BoundaryHistory::new(model.strike, n_reg, grid.n);
    let mut iterations = Vec::with_capacity(grid.n);
    let mut older: Option<Vec<RegimeState>> = None;
    let mut greeks_fields = vec![GreeksField::zeros(grid.m + 1); n_reg];
    let mut slope = vec![0.0; n_reg];
    for n in 0..grid.n {
        let before = states.clone();
        let its = stepper.step(&mut states, n)?;
        iterations.push(its);
        boundary.push(states.iter().map(|s| s.s_f));
        for (r, st) in states.iter().enumerate() {
            let mut levels = vec![st, &before[r]];
            if let Some(o) = &older {
                levels.push(&o[r]);
            }
            greeks_fields[r] = greeks::update_time_greeks(&levels, grid.k, n + 1)?;
            let ln: Vec<f64> = levels.iter().map(|s| s.s_f.ln()).collect();
            slope[r] = greeks::backward_difference(&ln, grid.k)?;
        }
        older = Some(before);
    }
    Ok(SolveResult {
        states,
        boundary,
        greeks: greeks_fields,
        s_f_slope: slope,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        grid,
        strike: model.strike,
    })
}

/// Option value at asset price `s` in regime `regime` at the final time level.
pub fn price_at_asset(result: &SolveResult, s: f64, regime: usize) -> Result<f64> {
    let st = result.states.get(regime).ok_or(Error::RegimeOutOfRange { index: regime, count: result.states.len() })?;
    if !(s > 0.0) {
        return Err(Error::NonpositiveAsset(s));
    }
    if s <= st.s_f {
        return Ok(result.strike - s);
    }
    let x = (s / st.s_f).ln();
    if x >= result.grid.x_max {
        return Ok(0.0);
    }
    Ok(hermite_at(&st.u, &st.w, x, &result.grid))
}
