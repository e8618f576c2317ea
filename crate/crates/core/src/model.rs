//! Market model, grid, per-regime state and the closed forms of the
//! front-fixed coordinate system `x = ln(S / s_f(τ))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sum tolerance for generator matrices written with finite decimals.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Transition-rate matrix of the regime chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn num_regimes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, m: usize, l: usize) -> f64 {
        self.entries[m * self.n + l]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// True when no regime can jump to another one.
    pub fn is_decoupled(&self) -> bool {
        self.entries.iter().all(|&q| q == 0.0)
    }

    /// Submatrix on the given regime indices (rows and columns in that order).
    /// The result is only a generator again if the removed regimes were unreachable.
    pub fn select(&self, idx: &[usize]) -> Result<GeneratorMatrix> {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&m| idx.iter().map(|&l| self.get(m, l)).collect()).collect();
        validate_generator(&rows)
    }
}

/// Checks non-negative off-diagonals and zero row sums.
pub fn validate_generator(rows: &[Vec<f64>]) -> Result<GeneratorMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::invalid("generator", "matrix has no rows"));
    }
    let mut entries = Vec::with_capacity(n * n);
    for (m, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare { row: m, len: row.len(), expected: n });
        }
        for (l, &q) in row.iter().enumerate() {
            if !q.is_finite() {
                return Err(Error::invalid("generator", format!("q[{m}][{l}] is not finite")));
            }
            if l != m && q < 0.0 {
                return Err(Error::NegativeOffDiagonal { row: m, col: l, value: q });
            }
        }
        let sum: f64 = row.iter().sum();
        if sum.abs() > ROW_SUM_TOL {
            return Err(Error::RowSumViolation { row: m, sum });
        }
        entries.extend_from_slice(row);
    }
    Ok(GeneratorMatrix { n, entries })
}

/// Regime-switching market: per-regime rate and volatility, generator, strike, expiry.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeModel {
    pub rates: Vec<f64>,
    pub vols: Vec<f64>,
    pub generator: GeneratorMatrix,
    pub strike: f64,
    pub expiry: f64,
}

impl RegimeModel {
    pub fn new(rates: Vec<f64>, vols: Vec<f64>, generator: GeneratorMatrix, strike: f64, expiry: f64) -> Result<Self> {
        let n = generator.num_regimes();
        if rates.len() != n {
            return Err(Error::DimensionMismatch { what: "rates", expected: n, got: rates.len() });
        }
        if vols.len() != n {
            return Err(Error::DimensionMismatch { what: "vols", expected: n, got: vols.len() });
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("rates", format!("rate {r} must be finite and >= 0")));
        }
        if let Some(s) = vols.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("vols", format!("volatility {s} must be finite and > 0")));
        }
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::invalid("strike", format!("{strike} must be > 0")));
        }
        if !(expiry > 0.0 && expiry.is_finite()) {
            return Err(Error::invalid("expiry", format!("{expiry} must be > 0")));
        }
        Ok(Self { rates, vols, generator, strike, expiry })
    }

    pub fn num_regimes(&self) -> usize {
        self.generator.num_regimes()
    }

    /// `r_m - q_mm`, the effective discount rate of regime `m`.
    pub fn effective_rate(&self, m: usize) -> f64 {
        self.rates[m] - self.generator.get(m, m)
    }

    /// Model restricted to the given regimes, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<RegimeModel> {
        RegimeModel::new(
            idx.iter().map(|&m| self.rates[m]).collect(),
            idx.iter().map(|&m| self.vols[m]).collect(),
            self.generator.select(idx)?,
            self.strike,
            self.expiry,
        )
    }
}

/// Uniform mesh on `[0, x_max] x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub h: f64,
    pub k: f64,
    pub m: usize,
    pub n: usize,
}

impl GridSpec {
    /// Grid with `m` space intervals and `n` time steps; `n = 0` gives an empty horizon.
    pub fn new(x_max: f64, m: usize, expiry: f64, n: usize) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::invalid("x_max", format!("{x_max} must be > 0")));
        }
        if !(expiry > 0.0 && expiry.is_finite()) {
            return Err(Error::invalid("expiry", format!("{expiry} must be > 0")));
        }
        if m < 4 {
            return Err(Error::GridTooSmall(m));
        }
        let k = if n == 0 { expiry } else { expiry / n as f64 };
        Ok(Self { x_max, h: x_max / m as f64, k, m, n })
    }

    /// Grid from target step sizes; `k = None` selects `k = h^2`. Steps are
    /// adjusted so that they divide `x_max` and `T` exactly.
    pub fn from_steps(x_max: f64, h: f64, expiry: f64, k: Option<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", format!("{h} must be > 0")));
        }
        let k = k.unwrap_or(h * h);
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid("k", format!("{k} must be > 0")));
        }
        let m = (x_max / h).round().max(1.0) as usize;
        let n = (expiry / k).round().max(1.0) as usize;
        Self::new(x_max, m, expiry, n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    #[inline]
    pub fn tau(&self, n: usize) -> f64 {
        n as f64 * self.k
    }
}

/// Transformed price `u`, delta `w`, gamma `y` and speed `z` of one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeState {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s_f: f64,
    pub s_f_prev: f64,
}

impl RegimeState {
    pub fn zeros(len: usize, s_f: f64) -> Self {
        Self { u: vec![0.0; len], w: vec![0.0; len], y: vec![0.0; len], z: vec![0.0; len], s_f, s_f_prev: s_f }
    }
}

/// `s_f` of every regime at every time level: `values[m][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryHistory {
    pub values: Vec<Vec<f64>>,
}

impl BoundaryHistory {
    pub fn new(strike: f64, regimes: usize, steps: usize) -> Self {
        let mut values = vec![Vec::with_capacity(steps + 1); regimes];
        for v in &mut values {
            v.push(strike);
        }
        Self { values }
    }

    pub fn push(&mut self, s_f: impl IntoIterator<Item = f64>) {
        for (v, s) in self.values.iter_mut().zip(s_f) {
            v.push(s);
        }
    }

    pub fn levels(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Whether `s_f` is non-increasing in τ for every regime (a diagnostic, not an invariant).
    pub fn is_monotone(&self) -> bool {
        self.values.iter().all(|v| v.windows(2).all(|p| p[1] <= p[0]))
    }
}

/// Drift coefficient: log-velocity of the boundary plus `r - σ²/2`.
pub fn omega(s_f_new: f64, s_f_old: f64, k: f64, rate: f64, vol: f64) -> Result<f64> {
    if !(s_f_new > 0.0) {
        return Err(Error::NonpositiveBoundary(s_f_new));
    }
    if !(s_f_old > 0.0) {
        return Err(Error::NonpositiveBoundary(s_f_old));
    }
    if !(k > 0.0) {
        return Err(Error::invalid("k", format!("{k} must be > 0")));
    }
    Ok(omega_unchecked(s_f_new, s_f_old, k, rate, vol))
}

#[inline]
pub(crate) fn omega_unchecked(s_f_new: f64, s_f_old: f64, k: f64, rate: f64, vol: f64) -> f64 {
    2.0 * (s_f_new - s_f_old) / (k * (s_f_new + s_f_old)) + rate - 0.5 * vol * vol
}

/// Closed-form `(u, w, y, z)` in the exercise region `x <= 0`, where `V = K - S`.
#[inline]
pub fn exercise_region_values(s_f: f64, x: f64, strike: f64) -> (f64, f64, f64, f64) {
    let se = s_f * x.exp();
    (strike - se, -se, -se, -se)
}

/// Zero fields with `s_f = K` in every regime.
pub fn initial_state(model: &RegimeModel, grid: &GridSpec) -> Vec<RegimeState> {
    (0..model.num_regimes()).map(|_| RegimeState::zeros(grid.m + 1, model.strike)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_collapses_without_boundary_motion() {
        let w = omega(9.0, 9.0, 0.01, 0.10, 0.80).unwrap();
        assert!((w - (-0.22)).abs() < 1e-14);
        let w = omega(7.3, 7.3, 0.5, 0.05, 0.30).unwrap();
        assert!((w - 0.005).abs() < 1e-14);
    }

    #[test]
    fn omega_direct_arithmetic() {
        let w = omega(8.9, 9.0, 0.01, 0.10, 0.80).unwrap();
        let expected = 2.0 * (-0.1) / (0.01 * 17.9) + 0.10 - 0.32;
        assert!((w - expected).abs() < 1e-12);
    }

    #[test]
    fn omega_rejects_nonpositive_boundary() {
        assert_eq!(omega(0.0, 9.0, 0.01, 0.1, 0.2), Err(Error::NonpositiveBoundary(0.0)));
        assert_eq!(omega(9.0, -1.0, 0.01, 0.1, 0.2), Err(Error::NonpositiveBoundary(-1.0)));
    }

    #[test]
    fn exercise_values_examples() {
        assert_eq!(exercise_region_values(9.0, 0.0, 9.0), (0.0, -9.0, -9.0, -9.0));
        let (u, w, y, z) = exercise_region_values(8.0, -std::f64::consts::LN_2, 9.0);
        assert!((u - 5.0).abs() < 1e-14 && (w + 4.0).abs() < 1e-14);
        assert!(w == y && y == z);
        let e = 8.5 * (-0.3f64).exp();
        let (u, w, ..) = exercise_region_values(8.5, -0.3, 9.0);
        assert!((u - (9.0 - e)).abs() < 1e-14 && (w + e).abs() < 1e-14);
    }

    #[test]
    fn generator_examples() {
        assert!(validate_generator(&[vec![-6.0, 6.0], vec![9.0, -9.0]]).is_ok());
        let zero = validate_generator(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(zero.is_decoupled());
        assert!(matches!(
            validate_generator(&[vec![-1.0, -1.0], vec![2.0, -2.0]]),
            Err(Error::NegativeOffDiagonal { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            validate_generator(&[vec![-1.0, 1.5], vec![2.0, -2.0]]),
            Err(Error::RowSumViolation { row: 0, .. })
        ));
        assert!(matches!(validate_generator(&[vec![-1.0, 1.0], vec![0.0]]), Err(Error::NotSquare { row: 1, .. })));
    }

    #[test]
    fn grid_steps_divide_exactly() {
        let g = GridSpec::from_steps(3.0, 0.01, 1.0, None).unwrap();
        assert_eq!((g.m, g.n), (300, 10_000));
        assert_eq!(g.h, 3.0 / 300.0);
        assert_eq!(g.k, 1.0 / 10_000.0);
        assert_eq!(GridSpec::new(3.0, 3, 1.0, 10), Err(Error::GridTooSmall(3)));
    }

    #[test]
    fn initial_state_is_zero_at_strike() {
        let q = validate_generator(&[vec![-6.0, 6.0], vec![9.0, -9.0]]).unwrap();
        let model = RegimeModel::new(vec![0.1, 0.05], vec![0.8, 0.3], q, 9.0, 1.0).unwrap();
        let grid = GridSpec::from_steps(3.0, 0.1, 1.0, None).unwrap();
        let states = initial_state(&model, &grid);
        assert_eq!(states.len(), 2);
        for s in &states {
            assert_eq!(s.s_f, 9.0);
            assert_eq!(s.u.len(), 31);
            assert!(s.u.iter().chain(&s.w).chain(&s.y).chain(&s.z).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn model_validation() {
        let q = validate_generator(&[vec![0.0]]).unwrap();
        assert!(RegimeModel::new(vec![0.0], vec![0.2], q.clone(), 9.0, 1.0).is_ok());
        assert!(RegimeModel::new(vec![-0.1], vec![0.2], q.clone(), 9.0, 1.0).is_err());
        assert!(RegimeModel::new(vec![0.1], vec![0.0], q.clone(), 9.0, 1.0).is_err());
        assert!(RegimeModel::new(vec![0.1, 0.2], vec![0.2], q, 9.0, 1.0).is_err());
    }
}
