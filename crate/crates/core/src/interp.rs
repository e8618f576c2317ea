//! Frame maps between regimes and Hermite evaluation of foreign-regime fields.
//!
//! Regime `l`'s fields live on its own fixed grid `x_l = ln(S / s_f(l))`.
//! A node `x_m` of regime `m` corresponds to `x_l = x_m - ln(s_f(l) / s_f(m))`.
//! Points left of the grid use the exercise-region closed form, points right
//! of it are zero, and interior points use Hermite interpolation on the pairs
//! (u, w), (w, y), (y, z) and (z, z').

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{exercise_region_values, GridSpec, RegimeState};

/// Hermite interpolation order used for coupling samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpOrder {
    Cubic,
    Quintic,
}

/// Which piece of the sampling rule applies to a mapped point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Left,
    Interior,
    Right,
}

/// Log ratio of two boundaries, `ln(s_f(l) / s_f(m))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMap {
    pub log_ratio: f64,
}

impl FrameMap {
    pub fn new(s_f_l: f64, s_f_m: f64) -> Result<Self> {
        if !(s_f_l > 0.0) {
            return Err(Error::NonpositiveBoundary(s_f_l));
        }
        if !(s_f_m > 0.0) {
            return Err(Error::NonpositiveBoundary(s_f_m));
        }
        Ok(Self { log_ratio: (s_f_l / s_f_m).ln() })
    }

    #[inline]
    pub fn map(&self, x_m: f64) -> f64 {
        x_m - self.log_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub x_l: f64,
    /// `floor(x_l / h)` clamped to `[0, M-1]`; meaningful for the interior branch.
    pub bracket: usize,
    pub branch: Branch,
}

#[inline]
fn classify(x_l: f64, x_max: f64) -> Branch {
    if x_l <= 0.0 {
        Branch::Left
    } else if x_l > x_max {
        Branch::Right
    } else {
        Branch::Interior
    }
}

#[inline]
fn cubic_bracket(x_l: f64, grid: &GridSpec) -> usize {
    ((x_l / grid.h).floor().max(0.0) as usize).min(grid.m - 1)
}

#[inline]
fn quintic_center(x_l: f64, grid: &GridSpec) -> usize {
    ((x_l / grid.h).round().max(1.0) as usize).clamp(1, grid.m - 1)
}

pub fn map_point(x_m: f64, s_f_l: f64, s_f_m: f64, grid: &GridSpec) -> Result<MappedPoint> {
    let x_l = FrameMap::new(s_f_l, s_f_m)?.map(x_m);
    let branch = classify(x_l, grid.x_max);
    let bracket = if branch == Branch::Interior { cubic_bracket(x_l, grid) } else { 0 };
    Ok(MappedPoint { x_l, bracket, branch })
}

/// Two-node Hermite weights: `p(x*) = a f_j + b f_{j+1} + c f'_j + d f'_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicWeights {
    pub a_c: f64,
    pub b_c: f64,
    pub c_c: f64,
    pub d_c: f64,
}

impl CubicWeights {
    #[inline]
    fn at(t: f64, h: f64) -> Self {
        let t2 = t * t;
        let t3 = t2 * t;
        Self {
            a_c: 2.0 * t3 - 3.0 * t2 + 1.0,
            b_c: -2.0 * t3 + 3.0 * t2,
            c_c: h * (t3 - 2.0 * t2 + t),
            d_c: h * (t3 - t2),
        }
    }

    #[inline]
    pub fn apply(&self, f: [f64; 2], fp: [f64; 2]) -> f64 {
        self.a_c * f[0] + self.b_c * f[1] + self.c_c * fp[0] + self.d_c * fp[1]
    }
}

fn check_bracket(x: f64, lo: f64, hi: f64, h: f64) -> Result<()> {
    let slack = 1e-12 * h.max(hi.abs());
    if x < lo - slack || x > hi + slack || !x.is_finite() {
        return Err(Error::OutOfBracket { x, lo, hi });
    }
    Ok(())
}

pub fn cubic_weights(x_star: f64, x_j: f64, h: f64) -> Result<CubicWeights> {
    check_bracket(x_star, x_j, x_j + h, h)?;
    Ok(CubicWeights::at((x_star - x_j) / h, h))
}

/// Three-node Hermite weights over nodes `j-1, j, j+1`.
///
/// `value`/`slope` give `p(x*) = Σ value[a] f_a + slope[a] f'_a`;
/// `d_value`/`d_slope` give `p'(x*)` from the same nodal data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticWeights {
    pub value: [f64; 3],
    pub slope: [f64; 3],
    pub d_value: [f64; 3],
    pub d_slope: [f64; 3],
}

impl QuinticWeights {
    /// `s = (x* - x_j) / h` in `[-1, 1]`.
    fn at(s: f64, h: f64) -> Self {
        // Lagrange basis on nodes -1, 0, 1 and its derivative in s.
        let l = [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)];
        let dl = [s - 0.5, -2.0 * s, s + 0.5];
        // L_a'(node a) in s-units.
        let dl_node = [-1.5, 0.0, 1.5];
        let nodes = [-1.0, 0.0, 1.0];
        let mut w = QuinticWeights { value: [0.0; 3], slope: [0.0; 3], d_value: [0.0; 3], d_slope: [0.0; 3] };
        for a in 0..3 {
            let ds = s - nodes[a];
            let l2 = l[a] * l[a];
            let lin = 1.0 - 2.0 * dl_node[a] * ds;
            w.value[a] = lin * l2;
            w.slope[a] = h * ds * l2;
            w.d_value[a] = (-2.0 * dl_node[a] * l2 + lin * 2.0 * l[a] * dl[a]) / h;
            w.d_slope[a] = l2 + 2.0 * ds * l[a] * dl[a];
        }
        w
    }

    #[inline]
    pub fn apply(&self, f: [f64; 3], fp: [f64; 3]) -> f64 {
        let v = &self.value;
        let d = &self.slope;
        v[0] * f[0] + v[1] * f[1] + v[2] * f[2] + d[0] * fp[0] + d[1] * fp[1] + d[2] * fp[2]
    }

    #[inline]
    pub fn apply_derivative(&self, f: [f64; 3], fp: [f64; 3]) -> f64 {
        let v = &self.d_value;
        let d = &self.d_slope;
        v[0] * f[0] + v[1] * f[1] + v[2] * f[2] + d[0] * fp[0] + d[1] * fp[1] + d[2] * fp[2]
    }
}

pub fn quintic_weights(x_star: f64, x_j: f64, h: f64) -> Result<QuinticWeights> {
    check_bracket(x_star, x_j - h, x_j + h, h)?;
    Ok(QuinticWeights::at((x_star - x_j) / h, h))
}

/// Foreign-regime fields at a mapped point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingSample {
    pub u: f64,
    pub w: f64,
    pub y: f64,
    pub z: f64,
}

/// Fourth-order nodal derivative: centred five-point stencil inside, one-sided
/// five-point stencils at the two nodes next to each end.
pub fn z_derivative(z: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; z.len()];
    z_derivative_into(z, h, &mut out)?;
    Ok(out)
}

pub(crate) fn z_derivative_into(z: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
    if z.len() < 5 {
        return Err(Error::GridTooSmall(z.len().saturating_sub(1)));
    }
    let m = z.len() - 1;
    let c = 1.0 / (12.0 * h);
    for i in 2..m - 1 {
        out[i] = (z[i - 2] - 8.0 * z[i - 1] + 8.0 * z[i + 1] - z[i + 2]) * c;
    }
    out[0] = (-25.0 * z[0] + 48.0 * z[1] - 36.0 * z[2] + 16.0 * z[3] - 3.0 * z[4]) * c;
    out[1] = (-3.0 * z[0] - 10.0 * z[1] + 18.0 * z[2] - 6.0 * z[3] + z[4]) * c;
    out[m] = (25.0 * z[m] - 48.0 * z[m - 1] + 36.0 * z[m - 2] - 16.0 * z[m - 3] + 3.0 * z[m - 4]) * c;
    out[m - 1] = (3.0 * z[m] + 10.0 * z[m - 1] - 18.0 * z[m - 2] + 6.0 * z[m - 3] - z[m - 4]) * c;
    Ok(())
}

#[inline]
fn interior_cubic(fields: [&[f64]; 5], j: usize, w: &CubicWeights) -> CouplingSample {
    let pair = |f: &[f64], g: &[f64]| w.apply([f[j], f[j + 1]], [g[j], g[j + 1]]);
    CouplingSample {
        u: pair(fields[0], fields[1]),
        w: pair(fields[1], fields[2]),
        y: pair(fields[2], fields[3]),
        z: pair(fields[3], fields[4]),
    }
}

#[inline]
fn interior_quintic(fields: [&[f64]; 5], j: usize, w: &QuinticWeights) -> CouplingSample {
    let pair = |f: &[f64], g: &[f64]| w.apply([f[j - 1], f[j], f[j + 1]], [g[j - 1], g[j], g[j + 1]]);
    CouplingSample {
        u: pair(fields[0], fields[1]),
        w: pair(fields[1], fields[2]),
        y: pair(fields[2], fields[3]),
        z: pair(fields[3], fields[4]),
    }
}

#[inline]
fn left_sample(s_f_l: f64, x_l: f64, strike: f64) -> CouplingSample {
    let (u, w, y, z) = exercise_region_values(s_f_l, x_l, strike);
    CouplingSample { u, w, y, z }
}

/// Evaluates regime `l`'s fields at the image of `x_m`.
pub fn sample_coupling(
    state_l: &RegimeState,
    x_m: f64,
    s_f_m: f64,
    strike: f64,
    order: InterpOrder,
    z_slope: &[f64],
    grid: &GridSpec,
) -> Result<CouplingSample> {
    let len = grid.m + 1;
    for (what, v) in [("u", &state_l.u), ("w", &state_l.w), ("y", &state_l.y), ("z", &state_l.z)] {
        if v.len() != len {
            return Err(Error::DimensionMismatch { what, expected: len, got: v.len() });
        }
    }
    if z_slope.len() != len {
        return Err(Error::DimensionMismatch { what: "z_slope", expected: len, got: z_slope.len() });
    }
    let p = map_point(x_m, state_l.s_f, s_f_m, grid)?;
    let fields = [&state_l.u[..], &state_l.w, &state_l.y, &state_l.z, z_slope];
    Ok(match p.branch {
        Branch::Left => left_sample(state_l.s_f, p.x_l, strike),
        Branch::Right => CouplingSample::default(),
        Branch::Interior => match order {
            InterpOrder::Cubic => {
                let j = p.bracket;
                let w = cubic_weights(p.x_l, grid.x(j), grid.h)?;
                interior_cubic(fields, j, &w)
            }
            InterpOrder::Quintic => {
                let j = quintic_center(p.x_l, grid);
                let w = quintic_weights(p.x_l, grid.x(j), grid.h)?;
                interior_quintic(fields, j, &w)
            }
        },
    })
}

/// Coupling sums `Σ_l q_ml f_l` on every node of regime `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTerms {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl CouplingTerms {
    pub fn zeros(len: usize) -> Self {
        Self { u: vec![0.0; len], w: vec![0.0; len], y: vec![0.0; len], z: vec![0.0; len] }
    }

    pub fn clear(&mut self) {
        for v in [&mut self.u, &mut self.w, &mut self.y, &mut self.z] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    #[inline]
    fn add(&mut self, i: usize, q: f64, s: CouplingSample) {
        self.u[i] += q * s.u;
        self.w[i] += q * s.w;
        self.y[i] += q * s.y;
        self.z[i] += q * s.z;
    }
}

/// Adds `q * f_l(x_l(x_i))` to `terms` for every node `x_i` of regime `m`.
///
/// The frame shift is the same for every node, so the fractional position
/// inside the bracket is shared; weights are built once and only the bracket
/// index moves. Nodes whose bracket is clamped at a grid end get their own
/// weights. Agrees with [`sample_coupling`] to rounding.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_coupling(
    terms: &mut CouplingTerms,
    q: f64,
    state_l: &RegimeState,
    z_slope_l: &[f64],
    s_f_m: f64,
    strike: f64,
    order: InterpOrder,
    grid: &GridSpec,
) -> Result<()> {
    let frame = FrameMap::new(state_l.s_f, s_f_m)?;
    let fields = [&state_l.u[..], &state_l.w, &state_l.y, &state_l.z, z_slope_l];
    let c = frame.log_ratio / grid.h;
    let m = grid.m;
    match order {
        InterpOrder::Cubic => {
            // x_l / h = i - c; floor(i - c) = i - off with a shared offset t.
            let cf = c.floor();
            let frac = c - cf;
            let (off, t) = if frac == 0.0 { (cf, 0.0) } else { (cf + 1.0, 1.0 - frac) };
            let shared = CubicWeights::at(t, grid.h);
            for i in 0..=m {
                let x_l = frame.map(grid.x(i));
                let s = match classify(x_l, grid.x_max) {
                    Branch::Left => left_sample(state_l.s_f, x_l, strike),
                    Branch::Right => continue,
                    Branch::Interior => {
                        let j = i as f64 - off;
                        if j >= 0.0 && j <= (m - 1) as f64 {
                            interior_cubic(fields, j as usize, &shared)
                        } else {
                            let j = cubic_bracket(x_l, grid);
                            let w = CubicWeights::at(((x_l - grid.x(j)) / grid.h).clamp(0.0, 1.0), grid.h);
                            interior_cubic(fields, j, &w)
                        }
                    }
                };
                terms.add(i, q, s);
            }
        }
        InterpOrder::Quintic => {
            let off = c.round();
            let shared = QuinticWeights::at(off - c, grid.h);
            for i in 0..=m {
                let x_l = frame.map(grid.x(i));
                let s = match classify(x_l, grid.x_max) {
                    Branch::Left => left_sample(state_l.s_f, x_l, strike),
                    Branch::Right => continue,
                    Branch::Interior => {
                        let j = i as f64 - off;
                        if j >= 1.0 && j <= (m - 1) as f64 {
                            interior_quintic(fields, j as usize, &shared)
                        } else {
                            let j = quintic_center(x_l, grid);
                            let s = ((x_l - grid.x(j)) / grid.h).clamp(-1.0, 1.0);
                            interior_quintic(fields, j, &QuinticWeights::at(s, grid.h))
                        }
                    }
                };
                terms.add(i, q, s);
            }
        }
    }
    Ok(())
}

/// Cubic Hermite evaluation of nodal data `(f, f')` at `x` in `[0, x_max]`.
pub fn hermite_at(f: &[f64], fp: &[f64], x: f64, grid: &GridSpec) -> f64 {
    let x = x.clamp(0.0, grid.x_max);
    let j = cubic_bracket(x, grid);
    let t = ((x - grid.x(j)) / grid.h).clamp(0.0, 1.0);
    CubicWeights::at(t, grid.h).apply([f[j], f[j + 1]], [fp[j], fp[j + 1]])
}
