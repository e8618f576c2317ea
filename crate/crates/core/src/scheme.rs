//! Crank–Nicolson compact finite-difference systems for `u` and its
//! x-derivatives `w`, `y`, `z`, plus the tridiagonal solver.
//!
//! Interior rows use the compact (1, 10, 1)/12 mass and (1, -2, 1) stiffness
//! stencils. The value system's first row is a fourth-order one-sided closure
//! that folds in `w - u = -K` at `x = 0` and uses gamma values at nodes 1 and 2.

use crate::error::{Error, Result};
use crate::model::GridSpec;

/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`; `sub[0]` and `sup[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.diag.len();
        for (what, v) in [("sub", &self.sub), ("sup", &self.sup), ("rhs", &self.rhs)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { what, expected: n, got: v.len() });
            }
        }
        Ok(())
    }

    /// `A x` with the stored coefficients.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

/// Thomas algorithm.
pub fn thomas_solve(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    system.check()?;
    let f = TridiagonalFactor::new(&system.sub, &system.diag, &system.sup)?;
    let mut x = system.rhs.clone();
    f.solve_in_place(&mut x);
    Ok(x)
}

/// Forward-elimination data of a tridiagonal matrix, reused across right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFactor {
    sub: Vec<f64>,
    inv_pivot: Vec<f64>,
    sup_scaled: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if sub.len() != n {
            return Err(Error::DimensionMismatch { what: "sub", expected: n, got: sub.len() });
        }
        if sup.len() != n {
            return Err(Error::DimensionMismatch { what: "sup", expected: n, got: sup.len() });
        }
        let mut inv_pivot = vec![0.0; n];
        let mut sup_scaled = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - sub[i] * sup_scaled[i - 1] };
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularPivot(i));
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                sup_scaled[i] = sup[i] * inv_pivot[i];
            }
        }
        Ok(Self { sub: sub.to_vec(), inv_pivot, sup_scaled })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.inv_pivot.len();
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.sub[i] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.sup_scaled[i] * x[i + 1];
        }
    }
}

/// Per-regime scheme coefficients. `mu`, `kappa` and `omega_k` are the
/// dimensionless groups used by the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoefficients {
    pub mu: f64,
    pub kappa: f64,
    pub omega_k: f64,
    pub sigma2: f64,
    /// `r_m - q_mm`.
    pub eff_rate: f64,
    pub omega: f64,
    pub h: f64,
    pub k: f64,
}

impl SchemeCoefficients {
    pub fn new(vol: f64, eff_rate: f64, omega: f64, grid: &GridSpec) -> Self {
        let sigma2 = vol * vol;
        let (h, k) = (grid.h, grid.k);
        Self { mu: sigma2 * k / (4.0 * h * h), kappa: eff_rate * k, omega_k: omega * k, sigma2, eff_rate, omega, h, k }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self.omega_k = omega * self.k;
        self
    }

    /// Interior `(A_sub, A_diag, B_sub, B_diag)`: implicit and explicit stencil weights.
    #[inline]
    fn interior(&self) -> (f64, f64, f64, f64) {
        let (h, k, s2, rq) = (self.h, self.k, self.sigma2, self.eff_rate);
        let d = s2 / (4.0 * h * h);
        (
            1.0 / (12.0 * k) - d + rq / 24.0,
            10.0 / (12.0 * k) + 2.0 * d + 10.0 * rq / 24.0,
            1.0 / (12.0 * k) + d - rq / 24.0,
            10.0 / (12.0 * k) - 2.0 * d - 10.0 * rq / 24.0,
        )
    }

    /// First-row weights on `(u_0, u_1)`: implicit `(a00, a01)`, explicit `(b00, b01)`.
    #[inline]
    fn boundary(&self) -> (f64, f64, f64, f64) {
        let (h, k, s2, rq) = (self.h, self.k, self.sigma2, self.eff_rate);
        let t0 = 5.0 * s2 / (4.0 * h * h) + 5.0 * s2 / (4.0 * h) + rq * (7.0 + h) / 8.0;
        let t1 = -5.0 * s2 / (4.0 * h * h) + 3.0 * rq / 8.0;
        let c0 = (7.0 + h) / (4.0 * k);
        let c1 = 3.0 / (4.0 * k);
        (c0 + t0, c1 + t1, c0 - t0, c1 - t1)
    }
}

#[inline]
pub(crate) fn mass(v: &[f64], i: usize) -> f64 {
    v[i - 1] + 10.0 * v[i] + v[i + 1]
}

#[inline]
fn stiff(v: &[f64], i: usize) -> f64 {
    v[i - 1] - 2.0 * v[i] + v[i + 1]
}

/// Matrix of the value system; independent of ω and the time level.
pub(crate) fn value_matrix(c: &SchemeCoefficients, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (a_sub, a_dia, ..) = c.interior();
    let (a00, a01, ..) = c.boundary();
    let n = m + 1;
    let mut sub = vec![a_sub; n];
    let mut diag = vec![a_dia; n];
    let mut sup = vec![a_sub; n];
    sub[0] = 0.0;
    diag[0] = a00;
    sup[0] = a01;
    sub[m] = 0.0;
    diag[m] = 1.0;
    sup[m] = 0.0;
    (sub, diag, sup)
}

/// Matrix of the derivative systems (Dirichlet rows at both ends).
pub(crate) fn derivative_matrix(c: &SchemeCoefficients, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (a_sub, a_dia, ..) = c.interior();
    let n = m + 1;
    let mut sub = vec![a_sub; n];
    let mut diag = vec![a_dia; n];
    let mut sup = vec![a_sub; n];
    sub[0] = 0.0;
    diag[0] = 1.0;
    sup[0] = 0.0;
    sub[m] = 0.0;
    diag[m] = 1.0;
    sup[m] = 0.0;
    (sub, diag, sup)
}

/// Inputs of the value system. Coupling arrays hold `Σ_l q_ml f_l` summed over
/// the new iterate and the old level (the Crank–Nicolson pair).
#[derive(Debug, Clone, Copy)]
pub struct ValueInputs<'a> {
    pub u_n: &'a [f64],
    pub w_n: &'a [f64],
    pub y_n: &'a [f64],
    pub w_guess: &'a [f64],
    pub y_guess: &'a [f64],
    pub coupling_u: &'a [f64],
    pub coupling_w: &'a [f64],
}

impl ValueInputs<'_> {
    fn check(&self, len: usize) -> Result<()> {
        for (what, v) in [
            ("u_n", self.u_n),
            ("w_n", self.w_n),
            ("y_n", self.y_n),
            ("w_guess", self.w_guess),
            ("y_guess", self.y_guess),
            ("coupling_u", self.coupling_u),
            ("coupling_w", self.coupling_w),
        ] {
            if v.len() != len {
                return Err(Error::DimensionMismatch { what, expected: len, got: v.len() });
            }
        }
        Ok(())
    }
}

/// Splits the value right-hand side as `b0 + ω b1 + ω w_0^{n+1} t`, where
/// `t = e_0 / 2 + e_1 / 24` carries the new boundary delta `w_0^{n+1} = -s_f^{n+1}`
/// so that the solver can treat it implicitly. `w_guess[0]` is not read.
pub(crate) fn value_rhs_split(
    inp: &ValueInputs<'_>,
    c: &SchemeCoefficients,
    m: usize,
    strike: f64,
    b0: &mut [f64],
    b1: &mut [f64],
) {
    let (_, _, b_sub, b_dia) = c.interior();
    let (.., b00, b01) = c.boundary();
    let (h, k, s2, rq) = (c.h, c.k, c.sigma2, c.eff_rate);
    let (un, wn, yn, wg, yg) = (inp.u_n, inp.w_n, inp.y_n, inp.w_guess, inp.y_guess);
    let (cu, cw) = (inp.coupling_u, inp.coupling_w);

    for i in 1..m {
        b0[i] = b_sub * (un[i - 1] + un[i + 1]) + b_dia * un[i] + mass(cu, i) / 24.0;
        b1[i] = mass(wg, i) + mass(wn, i);
    }
    // Node 0 of the new delta is carried by the implicit column.
    b1[1] -= wg[0];
    for v in &mut b1[1..m] {
        *v /= 24.0;
    }

    let wbar = |i: usize| 0.5 * (wg[i] + wn[i]);
    let ybar = |i: usize| 0.5 * (yg[i] + yn[i]);
    b0[0] = b00 * un[0]
        + b01 * un[1]
        + h / 6.0 * (wg[1] - wn[1]) / k
        + 5.0 * s2 * strike / (2.0 * h)
        + rq * (h * strike / 4.0 + h / 6.0 * wbar(1))
        + 0.875 * cu[0]
        + 0.375 * cu[1]
        + h / 24.0 * (3.0 * cw[0] - 2.0 * cw[1]);
    b1[0] = 0.5 * wn[0] + 0.75 * (wbar(1) + wbar(2)) - h / 24.0 * (28.0 * ybar(1) + 6.0 * ybar(2));

    b0[m] = 0.0;
    b1[m] = 0.0;
}

/// Value system for `u^{n+1}` with every `w`, `y` and coupling term lagged at its guess.
pub fn assemble_value_system(
    inp: &ValueInputs<'_>,
    coeffs: &SchemeCoefficients,
    grid: &GridSpec,
    strike: f64,
) -> Result<TridiagonalSystem> {
    let m = grid.m;
    inp.check(m + 1)?;
    let (sub, diag, sup) = value_matrix(coeffs, m);
    let mut b0 = vec![0.0; m + 1];
    let mut b1 = vec![0.0; m + 1];
    value_rhs_split(inp, coeffs, m, strike, &mut b0, &mut b1);
    let om = coeffs.omega;
    let w0 = inp.w_guess[0];
    let mut rhs: Vec<f64> = b0.iter().zip(&b1).map(|(a, b)| a + om * b).collect();
    rhs[0] += om * w0 * 0.5;
    rhs[1] += om * w0 / 24.0;
    Ok(TridiagonalSystem { sub, diag, sup, rhs })
}

/// Inputs of a derivative system for `f ∈ {w, y, z}` with chain predecessor `g`.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeInputs<'a> {
    pub f_n: &'a [f64],
    pub g_n: &'a [f64],
    pub g_guess: &'a [f64],
    /// `Σ_l q_ml f_l` summed over both levels.
    pub coupling_f: &'a [f64],
}

pub(crate) fn derivative_rhs(
    inp: &DerivativeInputs<'_>,
    c: &SchemeCoefficients,
    m: usize,
    s_f_next: f64,
    rhs: &mut [f64],
) {
    let (_, _, b_sub, b_dia) = c.interior();
    let src = c.omega / (2.0 * c.h * c.h);
    let (fn_, gn, gg, cf) = (inp.f_n, inp.g_n, inp.g_guess, inp.coupling_f);
    for i in 1..m {
        rhs[i] = b_sub * (fn_[i - 1] + fn_[i + 1])
            + b_dia * fn_[i]
            + src * (stiff(gg, i) + stiff(gn, i))
            + mass(cf, i) / 24.0;
    }
    rhs[0] = -s_f_next;
    rhs[m] = 0.0;
}

pub fn assemble_derivative_system(
    inp: &DerivativeInputs<'_>,
    coeffs: &SchemeCoefficients,
    grid: &GridSpec,
    s_f_next: f64,
) -> Result<TridiagonalSystem> {
    let m = grid.m;
    for (what, v) in [("f_n", inp.f_n), ("g_n", inp.g_n), ("g_guess", inp.g_guess), ("coupling_f", inp.coupling_f)] {
        if v.len() != m + 1 {
            return Err(Error::DimensionMismatch { what, expected: m + 1, got: v.len() });
        }
    }
    let (sub, diag, sup) = derivative_matrix(coeffs, m);
    let mut rhs = vec![0.0; m + 1];
    derivative_rhs(inp, coeffs, m, s_f_next, &mut rhs);
    Ok(TridiagonalSystem { sub, diag, sup, rhs })
}

/// Remainder of the one-sided compact identity behind the boundary row:
/// `7/4 f''_0 + 3/4 f''_1 - [5/h² (f_1 - f_0) - 5/h f'_0 - h/4 f'''_0 + h/6 f'''_1]`.
/// `f(x)` returns `[f, f', f'', f''']`.
pub fn boundary_identity_residual(f: impl Fn(f64) -> [f64; 4], x0: f64, h: f64) -> f64 {
    let a = f(x0);
    let b = f(x0 + h);
    let lhs = 1.75 * a[2] + 0.75 * b[2];
    let rhs = 5.0 / (h * h) * (b[0] - a[0]) - 5.0 / h * a[1] - h / 4.0 * a[3] + h / 6.0 * b[3];
    lhs - rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let n = 5;
        let sys = TridiagonalSystem {
            sub: vec![0.0; n],
            diag: vec![1.0; n],
            sup: vec![0.0; n],
            rhs: vec![1.0, -2.0, 3.5, 0.0, 7.0],
        };
        assert_eq!(thomas_solve(&sys).unwrap(), sys.rhs);
    }

    #[test]
    fn three_by_three() {
        let sys = TridiagonalSystem {
            sub: vec![0.0, 1.0, 1.0],
            diag: vec![2.0; 3],
            sup: vec![1.0, 1.0, 0.0],
            rhs: vec![1.0, 0.0, 1.0],
        };
        let x = thomas_solve(&sys).unwrap();
        for (a, b) in x.iter().zip([1.0, -1.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let sys =
            TridiagonalSystem { sub: vec![0.0, 1.0], diag: vec![1.0, 1.0], sup: vec![1.0, 0.0], rhs: vec![1.0, 1.0] };
        assert_eq!(thomas_solve(&sys), Err(Error::SingularPivot(1)));
    }

    #[test]
    fn boundary_identity_examples() {
        let cubic = |x: f64| [x * x * x - 2.0 * x + 1.0, 3.0 * x * x - 2.0, 6.0 * x, 6.0];
        assert!(boundary_identity_residual(cubic, 0.4, 0.1).abs() < 1e-9);
        let exp = |x: f64| [x.exp(); 4];
        let r1 = boundary_identity_residual(exp, 0.2, 0.1).abs();
        let r2 = boundary_identity_residual(exp, 0.2, 0.05).abs();
        assert!(r1 / r2 >= 14.0, "ratio {}", r1 / r2);
        let sin = |x: f64| [x.sin(), x.cos(), -x.sin(), -x.cos()];
        assert!(boundary_identity_residual(sin, 0.3, 0.05).abs() < 1e-6);
    }

    #[test]
    fn first_step_boundary_row_only_strike_sources() {
        let grid = GridSpec::new(3.0, 30, 1.0, 100).unwrap();
        let z = vec![0.0; 31];
        let inp = ValueInputs { u_n: &z, w_n: &z, y_n: &z, w_guess: &z, y_guess: &z, coupling_u: &z, coupling_w: &z };
        let om = crate::model::omega(9.0, 9.0, grid.k, 0.1, 0.8).unwrap();
        let c = SchemeCoefficients::new(0.8, 0.1 + 6.0, om, &grid);
        let sys = assemble_value_system(&inp, &c, &grid, 9.0).unwrap();
        let h = grid.h;
        let expected = 5.0 * 0.64 * 9.0 / (2.0 * h) + 6.1 * h * 9.0 / 4.0;
        assert!((sys.rhs[0] - expected).abs() < 1e-9);
        assert!(sys.rhs[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn assembly_is_deterministic() {
        let grid = GridSpec::new(3.0, 20, 1.0, 50).unwrap();
        let v: Vec<f64> = (0..21).map(|i| (i as f64 * 0.37).sin()).collect();
        let inp = ValueInputs { u_n: &v, w_n: &v, y_n: &v, w_guess: &v, y_guess: &v, coupling_u: &v, coupling_w: &v };
        let c = SchemeCoefficients::new(0.3, 9.05, -1.7, &grid);
        let a = assemble_value_system(&inp, &c, &grid, 9.0).unwrap();
        let b = assemble_value_system(&inp, &c, &grid, 9.0).unwrap();
        assert_eq!(a, b);
    }
}
