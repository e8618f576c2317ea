//! Grid-refinement error and rate, and the von Neumann amplification check
//! of the single-regime scheme kernel.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{GridSpec, RegimeModel};
use crate::scheme::{assemble_value_system, thomas_solve, SchemeCoefficients, ValueInputs};
use crate::solver::{solve, SolverConfig};

/// Max absolute difference over coincident nodes of a grid and its 2x refinement.
pub fn max_error(coarse: &[f64], fine: &[f64]) -> Result<f64> {
    let mc = coarse.len().saturating_sub(1);
    let mf = fine.len().saturating_sub(1);
    if coarse.is_empty() || mf != 2 * mc {
        return Err(Error::GridMismatch { coarse: mc, fine: mf });
    }
    Ok(coarse.iter().zip(fine.iter().step_by(2)).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

/// `log2(E_coarse / E_fine)`.
pub fn convergence_rate(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(Error::NonpositiveError { coarse: e_coarse, fine: e_fine });
    }
    Ok((e_coarse / e_fine).log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementLevel {
    pub h: f64,
    pub k: f64,
    /// Error against the next finer level; `None` for the finest.
    pub max_error: Option<f64>,
    pub wall_time: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy {
    pub levels: Vec<RefinementLevel>,
    pub rates: Vec<f64>,
}

impl RefinementStudy {
    /// Builds the study from `(h, k, u_final, wall_time, mean_iterations)` per level, coarse first.
    pub fn from_levels(levels: &[(f64, f64, Vec<f64>, f64, f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(levels.len());
        let mut errors = Vec::new();
        for (i, (h, k, u, t, its)) in levels.iter().enumerate() {
            let e = match levels.get(i + 1) {
                Some(next) => Some(max_error(u, &next.2)?),
                None => None,
            };
            if let Some(e) = e {
                errors.push(e);
            }
            out.push(RefinementLevel { h: *h, k: *k, max_error: e, wall_time: *t, mean_iterations: *its });
        }
        let rates = errors.windows(2).map(|p| convergence_rate(p[0], p[1])).collect::<Result<Vec<_>>>()?;
        Ok(Self { levels: out, rates })
    }

    pub fn errors(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.max_error).collect()
    }
}

/// Entries of the 2x2 recurrence blocks and the eigenvalue moduli of the
/// amplification matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationSpectrum {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// Repeated real pair `q/p` followed by the pair from the coupled 2x2 block.
    pub moduli: [f64; 4],
}

impl AmplificationSpectrum {
    pub fn max_modulus(&self) -> f64 {
        self.moduli.iter().copied().fold(0.0, f64::max)
    }
}

/// Fourier symbol of one time step for a mode `e^{iβx}`:
/// `p λ' - q λ = r (Φ' + Φ)` and `p Φ' - q Φ = s (λ' + λ)`, with
/// `S = sin²(βh/2)`, `p,q = 1 - S/3 ± 4μS + κ(1 - S)/2`,
/// `r = -(2 ωk / h²) S`, `s = ωk (1/2 - S/6)`.
pub fn amplification_spectrum(mu: f64, kappa: f64, omega_k: f64, h: f64, beta_h: f64) -> Result<AmplificationSpectrum> {
    if !(mu > 0.0) {
        return Err(Error::NonpositiveMu(mu));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("{h} must be > 0")));
    }
    let sn = (0.5 * beta_h).sin().powi(2);
    let base = 1.0 - sn / 3.0 + 0.5 * kappa * (1.0 - sn);
    let p = base + 4.0 * mu * sn;
    let q = base - 4.0 * mu * sn;
    let r = -2.0 * omega_k / (h * h) * sn;
    let s = omega_k * (0.5 - sn / 6.0);
    let varpi = -r * s;
    let real = (q / p).abs();
    let pair = ((q * q + varpi) / (p * p + varpi)).sqrt();
    Ok(AmplificationSpectrum { p, q, r, s, moduli: [real, real, pair, pair] })
}

/// Refinement study of the full solver: one solve per `h` with `k = h²`,
/// keeping the method, interpolation and tolerance of `base`. Errors are taken
/// on the value field of `regime` (zero-based).
pub fn solver_study(model: &RegimeModel, base: &SolverConfig, hs: &[f64], regime: usize) -> Result<RefinementStudy> {
    let count = model.num_regimes();
    if regime >= count {
        return Err(Error::RegimeOutOfRange { index: regime, count });
    }
    let levels = hs
        .iter()
        .map(|&h| {
            let grid = GridSpec::from_steps(base.grid.x_max, h, model.expiry, None)?;
            let r = solve(model, &SolverConfig { grid, ..*base })?;
            Ok((grid.h, grid.k, r.states[regime].u.clone(), r.wall_time, r.mean_iterations()))
        })
        .collect::<Result<Vec<_>>>()?;
    RefinementStudy::from_levels(&levels)
}

/// Exact solution of the manufactured problem: `e^{-τ} sin(2x + 1/2) + x`.
pub fn manufactured_solution(x: f64, tau: f64) -> f64 {
    (-tau).exp() * (2.0 * x + 0.5).sin() + x
}

/// Refinement study on a decoupled linear problem with a known smooth
/// solution. Each level marches `u_τ = σ²/2 u_xx - r u + f` with the library's
/// compact Crank–Nicolson value rows (ω = 0), the source `f` fed through the
/// coupling slot and exact Dirichlet data at both ends; `k = h²`.
pub fn manufactured_study(hs: &[f64], vol: f64, rate: f64) -> Result<RefinementStudy> {
    const X_MAX: f64 = 2.0;
    const EXPIRY: f64 = 0.5;
    let source = |x: f64, tau: f64| {
        let e = (-tau).exp() * (2.0 * x + 0.5).sin();
        -e + 2.0 * vol * vol * e + rate * (e + x)
    };
    let mut levels = Vec::with_capacity(hs.len());
    for &h in hs {
        let start = Instant::now();
        let grid = GridSpec::from_steps(X_MAX, h, EXPIRY, None)?;
        let m = grid.m;
        let coeffs = SchemeCoefficients::new(vol, rate, 0.0, &grid);
        let zeros = vec![0.0; m + 1];
        let mut u: Vec<f64> = (0..=m).map(|i| manufactured_solution(grid.x(i), 0.0)).collect();
        for n in 0..grid.n {
            let (t0, t1) = (grid.tau(n), grid.tau(n + 1));
            let f: Vec<f64> = (0..=m).map(|i| source(grid.x(i), t0) + source(grid.x(i), t1)).collect();
            let inp = ValueInputs {
                u_n: &u,
                w_n: &zeros,
                y_n: &zeros,
                w_guess: &zeros,
                y_guess: &zeros,
                coupling_u: &f,
                coupling_w: &zeros,
            };
            let mut sys = assemble_value_system(&inp, &coeffs, &grid, 0.0)?;
            for (i, x) in [(0, 0.0), (m, X_MAX)] {
                sys.sub[i] = 0.0;
                sys.sup[i] = 0.0;
                sys.diag[i] = 1.0;
                sys.rhs[i] = manufactured_solution(x, t1);
            }
            u = thomas_solve(&sys)?;
        }
        levels.push((grid.h, grid.k, u, start.elapsed().as_secs_f64(), 1.0));
    }
    RefinementStudy::from_levels(&levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_error_examples() {
        let c = vec![1.0, 2.0, 3.0];
        let f = vec![1.0, 9.0, 2.0, 9.0, 3.0];
        assert_eq!(max_error(&c, &f).unwrap(), 0.0);
        let f2: Vec<f64> = f.iter().map(|v| v + 1e-3).collect();
        assert!((max_error(&c, &f2).unwrap() - 1e-3).abs() < 1e-15);
        assert!(matches!(max_error(&c, &c), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn rate_examples() {
        assert!((convergence_rate(8e-3, 1e-3).unwrap() - 3.0).abs() < 1e-12);
        assert!((convergence_rate(5.128e-2, 6.196e-3).unwrap() - 3.05).abs() < 5e-3);
        assert!((convergence_rate(6.196e-3, 6.806e-4).unwrap() - 3.19).abs() < 5e-3);
        assert!(convergence_rate(0.0, 1.0).is_err());
    }

    #[test]
    fn spectrum_limits() {
        let a = amplification_spectrum(0.7, 0.1, 0.0, 0.05, 1.3).unwrap();
        assert!(a.r == 0.0 && a.s == 0.0);
        assert!(a.moduli.iter().all(|&m| (m - (a.q / a.p).abs()).abs() < 1e-15));
        assert!(a.max_modulus() < 1.0);
        let z = amplification_spectrum(0.7, 0.1, 0.3, 0.05, 0.0).unwrap();
        assert_eq!(z.p, z.q);
        assert!(z.moduli.iter().all(|&m| (m - 1.0).abs() < 1e-15));
        assert!(amplification_spectrum(0.0, 0.1, 0.3, 0.05, 1.0).is_err());
    }

    #[test]
    fn manufactured_problem_is_fourth_order() {
        let st = manufactured_study(&[0.2, 0.1, 0.05, 0.025], 0.4, 0.1).unwrap();
        assert!(st.rates.iter().all(|&r| r >= 3.5), "{:?}", st.rates);
    }

    #[test]
    fn refinement_single_level() {
        let st = RefinementStudy::from_levels(&[(0.1, 0.01, vec![0.0; 31], 0.0, 1.0)]).unwrap();
        assert!(st.errors().is_empty() && st.rates.is_empty());
    }
}
