//! Time-derivative fields in the transformed frame and conversion of all
//! Greeks to asset space.

use crate::error::{Error, Result};
use crate::interp::{hermite_at, z_derivative};
use crate::model::{GridSpec, RegimeState};
use crate::solver::SolveResult;

/// τ-derivatives of `u`, `w`, `y` at fixed `x`, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GreeksField {
    pub theta: Vec<f64>,
    pub delta_decay: Vec<f64>,
    pub color: Vec<f64>,
}

impl GreeksField {
    pub fn zeros(len: usize) -> Self {
        Self { theta: vec![0.0; len], delta_decay: vec![0.0; len], color: vec![0.0; len] }
    }
}

/// Backward difference of a time series given newest first: first order with
/// two levels, second order `(3f_0 - 4f_1 + f_2) / 2k` with three.
pub fn backward_difference(newest_first: &[f64], k: f64) -> Result<f64> {
    match newest_first {
        [a, b] => Ok((a - b) / k),
        [a, b, c, ..] => Ok((3.0 * a - 4.0 * b + c) / (2.0 * k)),
        _ => Err(Error::InsufficientHistory { level: 0, needed: 2, have: newest_first.len() }),
    }
}

/// Θ, K and Γ fields at level `n` from `levels = [level n, level n-1, (level n-2)]`.
/// Level 1 uses the first-order formula; later levels need three levels.
pub fn update_time_greeks(levels: &[&RegimeState], k: f64, n: usize) -> Result<GreeksField> {
    let needed = if n >= 2 { 3 } else { 2 };
    if n == 0 || levels.len() < needed {
        return Err(Error::InsufficientHistory { level: n, needed, have: levels.len() });
    }
    let len = levels[0].u.len();
    let mut g = GreeksField::zeros(len);
    let pick = |f: fn(&RegimeState) -> &Vec<f64>, out: &mut Vec<f64>| {
        let a = f(levels[0]);
        let b = f(levels[1]);
        if needed == 2 {
            for i in 0..len {
                out[i] = (a[i] - b[i]) / k;
            }
        } else {
            let c = f(levels[2]);
            for i in 0..len {
                out[i] = (3.0 * a[i] - 4.0 * b[i] + c[i]) / (2.0 * k);
            }
        }
    };
    pick(|s| &s.u, &mut g.theta);
    pick(|s| &s.w, &mut g.delta_decay);
    pick(|s| &s.y, &mut g.color);
    Ok(g)
}

/// Asset-space Greeks. Time sensitivities are derivatives in time to expiry τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalGreeks {
    pub delta: f64,
    pub gamma: f64,
    pub speed: f64,
    pub theta: f64,
    pub delta_decay: f64,
    pub color: f64,
}

impl PhysicalGreeks {
    pub const EXERCISE: PhysicalGreeks =
        PhysicalGreeks { delta: -1.0, gamma: 0.0, speed: 0.0, theta: 0.0, delta_decay: 0.0, color: 0.0 };

    /// Time sensitivities re-expressed in calendar time `t = T - τ`.
    pub fn calendar(self) -> Self {
        Self { theta: -self.theta, delta_decay: -self.delta_decay, color: -self.color, ..self }
    }
}

/// Converts the transformed fields at `x = ln(S / s_f)` to asset-space Greeks.
pub fn to_physical(
    state: &RegimeState,
    greeks: &GreeksField,
    s_f_slope: f64,
    s: f64,
    grid: &GridSpec,
) -> Result<PhysicalGreeks> {
    if !(s > 0.0) {
        return Err(Error::NonpositiveAsset(s));
    }
    if s <= state.s_f {
        return Ok(PhysicalGreeks::EXERCISE);
    }
    let x = (s / state.s_f).ln();
    if x >= grid.x_max {
        return Ok(PhysicalGreeks { delta: 0.0, gamma: 0.0, speed: 0.0, theta: 0.0, delta_decay: 0.0, color: 0.0 });
    }
    let zd = z_derivative(&state.z, grid.h)?;
    let cd = z_derivative(&greeks.color, grid.h)?;
    let w = hermite_at(&state.w, &state.y, x, grid);
    let y = hermite_at(&state.y, &state.z, x, grid);
    let z = hermite_at(&state.z, &zd, x, grid);
    let th = hermite_at(&greeks.theta, &greeks.delta_decay, x, grid);
    let kd = hermite_at(&greeks.delta_decay, &greeks.color, x, grid);
    let gc = hermite_at(&greeks.color, &cd, x, grid);
    let (s2, s3) = (s * s, s * s * s);
    Ok(PhysicalGreeks {
        delta: w / s,
        gamma: (y - w) / s2,
        speed: (2.0 * w - 3.0 * y + z) / s3,
        theta: th - s_f_slope * w,
        delta_decay: (kd - s_f_slope * y) / s,
        color: (gc - kd + s_f_slope * (y - z)) / s2,
    })
}

/// Asset-space Greeks of a finished solve.
pub fn greeks_at_asset(result: &SolveResult, s: f64, regime: usize) -> Result<PhysicalGreeks> {
    let n = result.states.len();
    if regime >= n {
        return Err(Error::RegimeOutOfRange { index: regime, count: n });
    }
    to_physical(&result.states[regime], &result.greeks[regime], result.s_f_slope[regime], s, &result.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(len: usize, v: f64) -> RegimeState {
        let mut s = RegimeState::zeros(len, 9.0);
        s.u.iter_mut().for_each(|x| *x = v);
        s.w.iter_mut().for_each(|x| *x = 2.0 * v);
        s.y.iter_mut().for_each(|x| *x = -v);
        s
    }

    #[test]
    fn constant_in_time_gives_zero() {
        let a = level(6, 1.3);
        let g = update_time_greeks(&[&a, &a, &a], 0.01, 5).unwrap();
        assert!(g.theta.iter().chain(&g.delta_decay).chain(&g.color).all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_in_time_exact_for_both_orders() {
        let k = 0.01;
        let c = 2.5;
        let l = |n: usize| level(4, c * n as f64 * k);
        let (l0, l1, l2) = (l(2), l(1), l(0));
        let g1 = update_time_greeks(&[&l1, &l2], k, 1).unwrap();
        let g2 = update_time_greeks(&[&l0, &l1, &l2], k, 2).unwrap();
        for g in [g1, g2] {
            assert!(g.theta.iter().all(|&v| (v - c).abs() < 1e-10));
            assert!(g.delta_decay.iter().all(|&v| (v - 2.0 * c).abs() < 1e-10));
        }
    }

    #[test]
    fn quadratic_in_time() {
        let k = 0.1;
        let t = |n: usize| (n as f64 * k).powi(2);
        let second = backward_difference(&[t(3), t(2), t(1)], k).unwrap();
        assert!((second - 2.0 * 0.3).abs() < 1e-12);
        let first = backward_difference(&[t(3), t(2)], k).unwrap();
        assert!((first - 0.6).abs() > 0.05);
    }

    #[test]
    fn history_errors() {
        let a = level(4, 0.0);
        assert!(matches!(update_time_greeks(&[&a, &a], 0.1, 2), Err(Error::InsufficientHistory { needed: 3, .. })));
        assert!(backward_difference(&[1.0], 0.1).is_err());
    }

    #[test]
    fn exercise_region_branch() {
        let grid = GridSpec::new(3.0, 30, 1.0, 10).unwrap();
        let st = RegimeState::zeros(31, 4.0);
        let g = GreeksField::zeros(31);
        assert_eq!(to_physical(&st, &g, 0.0, 3.5, &grid).unwrap(), PhysicalGreeks::EXERCISE);
        assert!(to_physical(&st, &g, 0.0, -1.0, &grid).is_err());
    }
}
