//! Built-in market fixtures and reference values for them.
//!
//! Reference cells are four-decimal (or longer) benchmark values for these
//! exact parameter sets. Cells whose reference value
//! is self-inconsistent are kept out of the assertion set and listed in
//! [`ReferenceTable::excluded`] with the reason.

use crate::error::{Error, Result};
use crate::greeks::greeks_at_asset;
use crate::interp::InterpOrder;
use crate::model::{validate_generator, GridSpec, RegimeModel};
use crate::solver::{price_at_asset, Method, SolveResult, SolverConfig};

/// A named market with its customary solver settings.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub model: RegimeModel,
    pub h: f64,
    pub x_max: f64,
    pub epsilon: f64,
}

fn model(q: Vec<Vec<f64>>, rates: &[f64], vols: &[f64], strike: f64) -> RegimeModel {
    let g = validate_generator(&q).expect("built-in generator is valid");
    RegimeModel::new(rates.to_vec(), vols.to_vec(), g, strike, 1.0).expect("built-in model is valid")
}

fn uniform_q(n: usize, diag: f64, off: f64) -> Vec<Vec<f64>> {
    (0..n).map(|m| (0..n).map(|l| if l == m { diag } else { off }).collect()).collect()
}

pub const FIXTURE_NAMES: [&str; 7] = [
    "two-regime",
    "two-regime-no-switch",
    "two-regime-k10",
    "four-regime",
    "eight-regime",
    "sixteen-regime",
    "sixteen-regime-lowvol",
];

const SIXTEEN_RATES: [f64; 16] =
    [0.04, 0.15, 0.03, 0.30, 0.13, 0.12, 0.10, 0.18, 0.08, 0.25, 0.06, 0.20, 0.21, 0.07, 0.12, 0.19];

/// Sixteen-regime volatilities with regime 1 at 0.07. The reference prices in
/// this module belong to the same market with 0.70 there (`sixteen-regime`).
const SIXTEEN_VOLS_LOW: [f64; 16] =
    [0.07, 0.30, 0.90, 0.80, 0.25, 0.15, 0.12, 0.28, 0.85, 0.35, 0.39, 0.72, 0.45, 0.18, 0.20, 0.25];

pub fn fixture(name: &str) -> Result<Fixture> {
    let f = |name, description, model, epsilon| Fixture { name, description, model, h: 0.01, x_max: 3.0, epsilon };
    Ok(match name {
        "two-regime" => f(
            "two-regime",
            "K=9, T=1; volatile regime (r=0.10, vol=0.80) and calm regime (r=0.05, vol=0.30), fast switching",
            model(vec![vec![-6.0, 6.0], vec![9.0, -9.0]], &[0.10, 0.05], &[0.80, 0.30], 9.0),
            1e-8,
        ),
        "two-regime-no-switch" => f(
            "two-regime-no-switch",
            "the two-regime market with a zero generator (regimes never switch)",
            model(vec![vec![0.0, 0.0], vec![0.0, 0.0]], &[0.10, 0.05], &[0.80, 0.30], 9.0),
            1e-8,
        ),
        "two-regime-k10" => f(
            "two-regime-k10",
            "K=10, T=1; equal rates 0.05, vols 0.3 and 0.4",
            model(vec![vec![-3.0, 3.0], vec![2.0, -2.0]], &[0.05, 0.05], &[0.3, 0.4], 10.0),
            1e-8,
        ),
        "four-regime" => f(
            "four-regime",
            "K=9, T=1; four regimes, symmetric switching at rate 1/3",
            model(
                uniform_q(4, -1.0, 1.0 / 3.0),
                &[0.02, 0.10, 0.06, 0.15],
                &[0.90, 0.50, 0.70, 0.20],
                9.0,
            ),
            1e-8,
        ),
        "eight-regime" => f(
            "eight-regime",
            "K=9, T=1; eight regimes with an asymmetric generator",
            model(
                vec![
                    vec![-1.0, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1],
                    vec![0.2, -1.0, 0.1, 0.1, 0.1, 0.2, 0.2, 0.1],
                    vec![0.2, 0.1, -1.0, 0.1, 0.2, 0.1, 0.1, 0.2],
                    vec![0.2, 0.1, 0.2, -1.0, 0.2, 0.1, 0.1, 0.1],
                    vec![0.1, 0.2, 0.1, 0.1, -1.0, 0.2, 0.1, 0.2],
                    vec![0.2, 0.2, 0.2, 0.1, 0.1, -1.0, 0.1, 0.1],
                    vec![0.1, 0.1, 0.2, 0.2, 0.2, 0.1, -1.0, 0.1],
                    vec![0.1, 0.1, 0.1, 0.2, 0.1, 0.2, 0.2, -1.0],
                ],
                &[0.03, 0.15, 0.20, 0.09, 0.05, 0.12, 0.15, 0.18],
                &[0.80, 0.40, 0.50, 0.70, 0.45, 0.38, 0.30, 0.25],
                9.0,
            ),
            1e-7,
        ),
        "sixteen-regime" => {
            let mut vols = SIXTEEN_VOLS_LOW;
            vols[0] = 0.70;
            f(
                "sixteen-regime",
                "K=9, T=1; sixteen regimes, uniform switching at rate 0.2 (regime 1 vol 0.70)",
                model(uniform_q(16, -3.0, 0.2), &SIXTEEN_RATES, &vols, 9.0),
                1e-7,
            )
        }
        "sixteen-regime-lowvol" => f(
            "sixteen-regime-lowvol",
            "the sixteen-regime market with regime 1 vol 0.07; its boundary drops fast enough early on to fold the boundary residual",
            model(uniform_q(16, -3.0, 0.2), &SIXTEEN_RATES, &SIXTEEN_VOLS_LOW, 9.0),
            1e-7,
        ),
        other => return Err(Error::UnknownFixture(other.to_string())),
    })
}

pub fn fixtures() -> Vec<Fixture> {
    FIXTURE_NAMES.iter().map(|n| fixture(n).expect("listed fixture exists")).collect()
}

/// What a reference cell measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Price,
    Delta,
    Gamma,
    Speed,
    /// Calendar-time sensitivities (negated τ-derivatives).
    Theta,
    DeltaDecay,
    Color,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Price => "price",
            Quantity::Delta => "delta",
            Quantity::Gamma => "gamma",
            Quantity::Speed => "speed",
            Quantity::Theta => "theta",
            Quantity::DeltaDecay => "delta_decay",
            Quantity::Color => "color",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCell {
    pub s: f64,
    /// One-based regime label.
    pub regime: usize,
    pub quantity: Quantity,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedCell {
    pub cell: ReferenceCell,
    pub reason: &'static str,
}

/// Reference values for one fixture under one method configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub id: &'static str,
    pub title: &'static str,
    pub fixture: &'static str,
    pub method: Method,
    pub interpolation: InterpOrder,
    pub h: f64,
    pub epsilon: f64,
    pub cells: Vec<ReferenceCell>,
    pub excluded: Vec<ExcludedCell>,
}

pub const PRICE_TOL: f64 = 5e-3;
pub const GREEK_TOL: f64 = 1e-2;
pub const TIME_GREEK_TOL: f64 = 2e-2;
pub const RATE_TOL: f64 = 0.25;

/// Reference refinement data: the max error between each pair of consecutive
/// grids in `hs` and the observed rates between consecutive errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReference {
    pub fixture: &'static str,
    pub method: Method,
    pub interpolation: InterpOrder,
    /// Grid sizes of the solves, coarse first.
    pub hs: [f64; 4],
    /// `E(h_i, h_{i+1})` for consecutive levels.
    pub errors: [f64; 3],
    pub rates: [f64; 2],
}

pub fn convergence_references() -> [ConvergenceReference; 2] {
    [
        ConvergenceReference {
            fixture: "two-regime",
            method: Method::GaussSeidel,
            interpolation: InterpOrder::Cubic,
            hs: [0.2, 0.1, 0.05, 0.025],
            errors: [5.344e-2, 6.269e-3, 6.329e-4],
            rates: [3.09, 3.31],
        },
        ConvergenceReference {
            fixture: "two-regime",
            method: Method::GaussSeidel,
            interpolation: InterpOrder::Quintic,
            hs: [0.2, 0.1, 0.05, 0.025],
            errors: [5.128e-2, 6.196e-3, 6.806e-4],
            rates: [3.05, 3.19],
        },
    ]
}

/// Reference wall-clock seconds per time step at h = 0.1, 0.05, 0.01 for the
/// four method variants (GS/cubic, GS/quintic, Newton/cubic, Newton/quintic).
/// Hardware dependent; reported for context, never asserted.
pub const REFERENCE_STEP_SECONDS: [(f64, [f64; 4]); 3] =
    [(0.1, [0.182, 0.209, 0.058, 0.061]), (0.05, [0.311, 0.316, 0.084, 0.078]), (0.01, [3.697, 4.167, 0.768, 0.771])];

const ASSET_GRID: [f64; 10] = [3.5, 4.0, 4.5, 6.0, 7.5, 8.5, 9.0, 9.5, 10.5, 12.0];

fn column(s: &[f64], regime: usize, q: Quantity, values: &[f64], tol: f64) -> Vec<ReferenceCell> {
    s.iter()
        .zip(values)
        .map(|(&s, &expected)| ReferenceCell { s, regime, quantity: q, expected, tolerance: tol })
        .collect()
}

fn prices(s: &[f64], regimes: &[usize], rows: &[&[f64]], tol: f64) -> Vec<ReferenceCell> {
    let mut out = Vec::new();
    for (r, &regime) in regimes.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|row| row[r]).collect();
        out.extend(column(s, regime, Quantity::Price, &col, tol));
    }
    out
}

fn take_out(
    cells: &mut Vec<ReferenceCell>,
    pick: impl Fn(&ReferenceCell) -> bool,
    reason: &'static str,
) -> Vec<ExcludedCell> {
    let (out, keep): (Vec<_>, Vec<_>) = cells.drain(..).partition(|c| pick(c));
    *cells = keep;
    out.into_iter().map(|cell| ExcludedCell { cell, reason }).collect()
}

const INTRINSIC_MISMATCH: &str = "reference 5.0000 where S is below the boundary and the value must be K - S = 5.5";

pub const TABLE_IDS: [&str; 16] = [
    "two-regime-prices",
    "two-regime-prices-h0.05",
    "two-regime-prices-h0.1",
    "two-regime-prices-cubic",
    "two-regime-newton-cubic",
    "two-regime-newton-quintic",
    "two-regime-greeks",
    "two-regime-no-switch-prices",
    "two-regime-k10-price",
    "two-regime-k10-price-newton",
    "four-regime-prices",
    "four-regime-greeks",
    "eight-regime-prices",
    "eight-regime-newton",
    "sixteen-regime-prices",
    "sixteen-regime-newton",
];

pub fn reference_tables() -> Vec<ReferenceTable> {
    TABLE_IDS.iter().map(|id| reference_table(id).expect("listed table exists")).collect()
}

pub fn reference_table(id: &str) -> Result<ReferenceTable> {
    use InterpOrder::{Cubic, Quintic};
    use Method::{GaussSeidel as Gs, Newton};
    let t = |id, title, fixture, method, interpolation, h, epsilon, cells, excluded| ReferenceTable {
        id,
        title,
        fixture,
        method,
        interpolation,
        h,
        epsilon,
        cells,
        excluded,
    };
    Ok(match id {
        "two-regime-prices" => {
            let mut cells = column(
                &ASSET_GRID,
                1,
                Quantity::Price,
                &[5.0000, 5.0033, 4.5433, 3.4143, 2.5842, 2.1559, 1.9720, 1.8056, 1.5185, 1.1803],
                PRICE_TOL,
            );
            cells.extend(column(
                &ASSET_GRID,
                2,
                Quantity::Price,
                &[5.5000, 5.0000, 4.5119, 3.3507, 2.5033, 2.0683, 1.8825, 1.7149, 1.4273, 1.0923],
                PRICE_TOL,
            ));
            let excluded = take_out(&mut cells, |c| c.regime == 1 && c.s == 3.5, INTRINSIC_MISMATCH);
            t(
                "two-regime-prices",
                "two-regime prices, GS + quintic, h = 0.01",
                "two-regime",
                Gs,
                Quintic,
                0.01,
                1e-8,
                cells,
                excluded,
            )
        }
        "two-regime-prices-h0.05" => {
            let mut cells = column(
                &ASSET_GRID,
                1,
                Quantity::Price,
                &[5.5000, 5.0035, 4.5442, 3.4143, 2.5854, 2.1553, 1.9723, 1.8062, 1.5190, 1.1802],
                2e-3,
            );
            cells.extend(column(
                &ASSET_GRID,
                2,
                Quantity::Price,
                &[5.5000, 5.0000, 4.5129, 3.3508, 2.5045, 2.0684, 1.8820, 1.7149, 1.4274, 1.0927],
                2e-3,
            ));
            t(
                "two-regime-prices-h0.05",
                "two-regime prices, GS + quintic, h = 0.05",
                "two-regime",
                Gs,
                Quintic,
                0.05,
                1e-8,
                cells,
                vec![],
            )
        }
        "two-regime-prices-h0.1" => {
            let mut cells = column(
                &ASSET_GRID,
                1,
                Quantity::Price,
                &[5.5000, 5.5069, 4.5475, 3.4190, 2.5874, 2.1540, 1.9760, 1.8044, 1.5170, 1.1833],
                PRICE_TOL,
            );
            let excluded = take_out(
                &mut cells,
                |c| c.s == 4.0,
                "reference 5.5069, inconsistent with every neighbouring column (about 5.003)",
            );
            t(
                "two-regime-prices-h0.1",
                "two-regime prices, GS + quintic, h = 0.1",
                "two-regime",
                Gs,
                Quintic,
                0.1,
                1e-8,
                cells,
                excluded,
            )
        }
        "two-regime-prices-cubic" => {
            let cells = column(
                &ASSET_GRID,
                1,
                Quantity::Price,
                &[5.5000, 5.0033, 4.5433, 3.4143, 2.5842, 2.1559, 1.9720, 1.8056, 1.5185, 1.1803],
                PRICE_TOL,
            );
            t(
                "two-regime-prices-cubic",
                "two-regime prices, GS + cubic, h = 0.01",
                "two-regime",
                Gs,
                Cubic,
                0.01,
                1e-8,
                cells,
                vec![],
            )
        }
        "two-regime-newton-cubic" | "two-regime-newton-quintic" => {
            let cubic = id == "two-regime-newton-cubic";
            let mut cells = column(
                &ASSET_GRID,
                1,
                Quantity::Price,
                &[
                    if cubic { 5.5000 } else { 5.0000 },
                    5.0033,
                    4.5433,
                    3.4141,
                    2.5840,
                    2.1556,
                    1.9717,
                    1.8054,
                    1.5183,
                    1.1801,
                ],
                PRICE_TOL,
            );
            cells.extend(column(
                &ASSET_GRID,
                2,
                Quantity::Price,
                &[5.5000, 5.0000, 4.5119, 3.3504, 2.5030, 2.0681, 1.8822, 1.7146, 1.4271, 1.0921],
                PRICE_TOL,
            ));
            // Long-format values at S = 9.
            let (a, b) =
                if cubic { (1.971738757801249, 1.882203676543793) } else { (1.971733636374602, 1.882198321043946) };
            cells.push(ReferenceCell { s: 9.0, regime: 1, quantity: Quantity::Price, expected: a, tolerance: 5e-4 });
            cells.push(ReferenceCell { s: 9.0, regime: 2, quantity: Quantity::Price, expected: b, tolerance: 5e-4 });
            let excluded =
                take_out(&mut cells, |c| c.regime == 1 && c.s == 3.5 && c.expected == 5.0, INTRINSIC_MISMATCH);
            if cubic {
                t(
                    "two-regime-newton-cubic",
                    "two-regime prices, Newton + cubic, h = 0.01",
                    "two-regime",
                    Newton,
                    Cubic,
                    0.01,
                    1e-8,
                    cells,
                    excluded,
                )
            } else {
                t(
                    "two-regime-newton-quintic",
                    "two-regime prices, Newton + quintic, h = 0.01",
                    "two-regime",
                    Newton,
                    Quintic,
                    0.01,
                    1e-8,
                    cells,
                    excluded,
                )
            }
        }
        "two-regime-greeks" => {
            let s = [3.5, 4.0, 4.5, 6.0, 9.5, 12.0];
            let mut cells = Vec::new();
            let mut add = |q: Quantity, r1: [f64; 6], r2: [f64; 6], tol: f64| {
                cells.extend(column(&s, 1, q, &r1, tol));
                cells.extend(column(&s, 2, q, &r2, tol));
            };
            add(
                Quantity::Delta,
                [-1.0, -0.9652, -0.8749, -0.6426, -0.3165, -0.1945],
                [-1.0, -1.0000, -0.9171, -0.6571, -0.3181, -0.1913],
                GREEK_TOL,
            );
            add(
                Quantity::Gamma,
                [0.0, 0.0164, 0.0508, 0.0851, 0.0560, 0.0347],
                [0.0, 0.0000, 0.0497, 0.0905, 0.0594, 0.0361],
                GREEK_TOL,
            );
            add(
                Quantity::Speed,
                [0.0, 0.0171, 0.0438, 0.0381, 0.0015, -0.0025],
                [0.0, 0.0000, 0.0470, 0.0462, 0.0013, -0.0031],
                GREEK_TOL,
            );
            add(
                Quantity::Theta,
                [0.0, -0.0300, -0.1200, -0.4083, -0.7904, 0.8248],
                [0.0, 0.0000, -0.0850, -0.4279, -0.8467, -0.8700],
                TIME_GREEK_TOL,
            );
            add(
                Quantity::DeltaDecay,
                [0.0, -0.0211, -0.0690, -0.1160, -0.0310, 0.0169],
                [0.0, 0.0000, -0.0722, -0.1358, -0.0317, 0.0240],
                TIME_GREEK_TOL,
            );
            add(
                Quantity::Color,
                [0.0, -0.0086, -0.0229, -0.0125, 0.0108, 0.0061],
                [0.0, 0.0000, -0.0295, -0.0206, 0.0132, 0.0069],
                TIME_GREEK_TOL,
            );
            let excluded = take_out(
                &mut cells,
                |c| c.quantity == Quantity::Theta && c.regime == 1 && c.s == 12.0,
                "reference +0.8248; a put's calendar theta is negative here and the column's trend gives about -0.82",
            );
            t(
                "two-regime-greeks",
                "two-regime Greeks, GS + quintic, h = 0.01",
                "two-regime",
                Gs,
                Quintic,
                0.01,
                1e-8,
                cells,
                excluded,
            )
        }
        "two-regime-no-switch-prices" => {
            let s = [6.0, 9.0, 12.0];
            let mut cells = column(&s, 1, Quantity::Price, &[3.666746420, 2.375408073, 1.604912489], 2e-3);
            cells.extend(column(&s, 2, Quantity::Price, &[3.000000000, 0.888393716, 0.203637945], 2e-3));
            cells[3].tolerance = 1e-6;
            t(
                "two-regime-no-switch-prices",
                "no-switching prices, GS + quintic, h = 0.01",
                "two-regime-no-switch",
                Gs,
                Quintic,
                0.01,
                1e-8,
                cells,
                vec![],
            )
        }
        "two-regime-k10-price" => t(
            "two-regime-k10-price",
            "two-regime market with K = 10, at S = 10, GS + quintic, h = 0.01",
            "two-regime-k10",
            Gs,
            Quintic,
            0.01,
            1e-8,
            column(&[10.0], 1, Quantity::Price, &[1.1750372], 2e-3),
            vec![],
        ),
        "two-regime-k10-price-newton" => t(
            "two-regime-k10-price-newton",
            "two-regime market with K = 10, at S = 10, Newton + quintic, h = 0.01",
            "two-regime-k10",
            Newton,
            Quintic,
            0.01,
            1e-8,
            column(&[10.0], 1, Quantity::Price, &[1.1751356], 2e-3),
            vec![],
        ),
        "four-regime-prices" => t(
            "four-regime-prices",
            "four-regime prices, GS + quintic, h = 0.01",
            "four-regime",
            Gs,
            Quintic,
            0.01,
            1e-8,
            prices(
                &[7.5, 9.0, 10.5, 12.0],
                &[1, 2, 3, 4],
                &[
                    &[3.1418, 2.2319, 2.6746, 1.6578],
                    &[2.5545, 1.5835, 2.0567, 0.9858],
                    &[2.1015, 1.1414, 1.6012, 0.6553],
                    &[1.7525, 0.8374, 1.2621, 0.4706],
                ],
                PRICE_TOL,
            ),
            vec![],
        ),
        "four-regime-greeks" => {
            let s = [3.5, 6.0, 9.0, 12.0];
            let mut cells = Vec::new();
            let rows: [(Quantity, [[f64; 3]; 4]); 3] = [
                (
                    Quantity::Delta,
                    [
                        [-0.8246, -1.0, -1.0],
                        [-0.5739, -0.7442, -1.0],
                        [-0.3401, -0.3546, -0.3026],
                        [-0.2055, -0.1679, -0.0958],
                    ],
                ),
                (
                    Quantity::Gamma,
                    [[0.0515, 0.0, 0.0], [0.0638, 0.0723, 0.0], [0.0488, 0.0727, 0.1086], [0.0289, 0.0370, 0.0269]],
                ),
                (
                    Quantity::Speed,
                    [[0.0949, 0.0, 0.0], [0.0204, 0.0262, 0.0], [0.0005, 0.0011, -0.0027], [-0.0023, -0.0048, -0.0081]],
                ),
            ];
            for (q, table) in rows {
                for (c, regime) in [1usize, 2, 4].into_iter().enumerate() {
                    let col: Vec<f64> = table.iter().map(|row| row[c]).collect();
                    cells.extend(column(&s, regime, q, &col, GREEK_TOL));
                }
            }
            t(
                "four-regime-greeks",
                "four-regime Greeks, GS + quintic, h = 0.01",
                "four-regime",
                Gs,
                Quintic,
                0.01,
                1e-8,
                cells,
                vec![],
            )
        }
        "eight-regime-prices" | "eight-regime-newton" => {
            let newton = id == "eight-regime-newton";
            let rows: [&[f64]; 10] = if newton {
                [
                    &[5.5555, 5.5000, 5.5000, 5.5000, 5.5000],
                    &[5.1244, 5.0000, 5.0006, 5.0000, 5.0000],
                    &[4.7197, 4.5000, 4.5320, 4.5000, 4.5000],
                    &[3.6639, 3.0000, 3.3649, 3.0001, 3.0000],
                    &[2.8408, 1.7962, 2.4959, 1.8252, 1.5301],
                    &[2.4081, 1.2864, 2.0536, 1.3138, 0.9338],
                    &[2.2214, 1.0921, 1.8662, 1.1169, 0.7457],
                    &[2.0519, 0.9293, 1.6985, 0.9510, 0.6033],
                    &[1.7582, 0.6785, 1.4129, 0.6945, 0.4094],
                    &[1.4092, 0.4334, 1.0838, 0.4428, 0.2482],
                ]
            } else {
                [
                    &[5.5551, 5.5000, 5.5000, 5.5000, 5.5000],
                    &[5.1238, 5.0000, 5.0006, 5.0000, 5.0000],
                    &[4.7190, 4.5000, 4.5319, 4.5000, 4.5000],
                    &[3.6630, 3.0000, 3.3646, 3.0001, 3.0000],
                    &[2.8399, 1.7960, 2.4955, 1.8250, 1.5300],
                    &[2.4071, 1.2861, 2.0532, 1.3135, 0.9336],
                    &[2.2204, 1.0918, 1.8658, 1.1166, 0.7455],
                    &[2.0509, 0.9290, 1.6980, 0.9508, 0.6030],
                    &[1.7572, 0.6782, 1.4124, 0.6942, 0.4092],
                    &[1.4083, 0.4332, 1.0833, 0.4426, 0.2480],
                ]
            };
            let cells = prices(&ASSET_GRID, &[1, 2, 4, 6, 8], &rows, PRICE_TOL);
            if newton {
                t(
                    "eight-regime-newton",
                    "eight-regime prices, Newton + quintic, h = 0.01",
                    "eight-regime",
                    Newton,
                    Quintic,
                    0.01,
                    1e-8,
                    cells,
                    vec![],
                )
            } else {
                t(
                    "eight-regime-prices",
                    "eight-regime prices, GS + quintic, h = 0.01",
                    "eight-regime",
                    Gs,
                    Quintic,
                    0.01,
                    1e-7,
                    cells,
                    vec![],
                )
            }
        }
        "sixteen-regime-prices" | "sixteen-regime-newton" => {
            let newton = id == "sixteen-regime-newton";
            let rows: [&[f64]; 10] = if newton {
                [
                    &[5.5000, 5.5000, 5.5000, 5.5000, 5.5000, 5.5000, 5.5000],
                    &[5.0075, 5.0000, 5.0000, 5.0000, 5.0000, 5.0000, 5.0000],
                    &[4.5387, 4.5000, 4.5000, 4.5000, 4.5000, 4.5000, 4.5000],
                    &[3.2836, 3.0000, 3.0872, 3.0000, 3.0000, 3.1064, 3.0000],
                    &[2.3078, 1.7145, 2.1059, 1.6227, 1.6611, 2.1163, 1.6249],
                    &[1.8264, 1.2061, 1.6496, 1.1089, 1.1555, 1.6497, 1.1146],
                    &[1.6290, 1.0209, 1.4662, 0.9312, 0.9767, 1.4619, 0.9379],
                    &[1.4563, 0.8697, 1.3072, 0.7900, 0.8319, 1.2992, 0.7964],
                    &[1.1721, 0.6435, 1.0484, 0.5884, 0.6114, 1.0347, 0.5885],
                    &[0.8617, 0.4286, 0.7692, 0.3929, 0.4081, 0.7509, 0.3938],
                ]
            } else {
                [
                    &[5.5000, 5.5000, 5.5000, 5.5000, 5.5000, 5.5000, 5.5000],
                    &[5.0000, 5.0074, 5.0000, 5.0000, 5.0000, 5.0000, 5.0000],
                    &[4.5385, 4.5000, 4.5000, 4.5000, 4.5000, 4.5000, 4.5000],
                    &[3.2833, 3.0000, 3.0872, 3.0000, 3.0000, 3.1064, 3.0000],
                    &[2.3075, 1.7145, 2.1058, 1.6227, 1.6624, 2.1162, 1.6248],
                    &[1.8260, 1.2060, 1.6495, 1.1088, 1.1533, 1.6496, 1.1144],
                    &[1.6287, 1.0207, 1.4661, 0.9311, 0.9730, 1.4618, 0.9378],
                    &[1.4560, 0.8696, 1.3071, 0.7898, 0.8272, 1.2990, 0.7963],
                    &[1.1718, 0.6434, 1.0483, 0.5842, 0.6112, 1.0346, 0.5883],
                    &[0.8614, 0.4285, 0.7690, 0.3928, 0.4079, 0.7508, 0.3936],
                ]
            };
            let mut cells = prices(&ASSET_GRID, &[1, 2, 4, 6, 8, 12, 16], &rows, PRICE_TOL);
            let excluded = if newton {
                take_out(
                    &mut cells,
                    |c| c.regime == 6 && c.s == 10.5,
                    "reference 0.5884, out of line with the same cell under the other method (0.5842) and its column",
                )
            } else {
                take_out(
                    &mut cells,
                    |c| c.s == 4.0 && (c.regime == 1 || c.regime == 2),
                    "regime 1 and 2 values appear swapped relative to the same row under the other method",
                )
            };
            if newton {
                t(
                    "sixteen-regime-newton",
                    "sixteen-regime prices, Newton + quintic, h = 0.01",
                    "sixteen-regime",
                    Newton,
                    Quintic,
                    0.01,
                    1e-8,
                    cells,
                    excluded,
                )
            } else {
                t(
                    "sixteen-regime-prices",
                    "sixteen-regime prices, GS + quintic, h = 0.01",
                    "sixteen-regime",
                    Gs,
                    Quintic,
                    0.01,
                    1e-7,
                    cells,
                    excluded,
                )
            }
        }
        other => return Err(Error::UnknownTable(other.to_string())),
    })
}

/// Value of `q` at asset price `s` in the one-based `regime`. Time sensitivities
/// are in calendar time, matching the reference tables.
pub fn quantity_at(result: &SolveResult, s: f64, regime: usize, q: Quantity) -> Result<f64> {
    let count = result.num_regimes();
    if regime == 0 || regime > count {
        return Err(Error::RegimeOutOfRange { index: regime, count });
    }
    let r = regime - 1;
    if q == Quantity::Price {
        return price_at_asset(result, s, r);
    }
    let g = greeks_at_asset(result, s, r)?.calendar();
    Ok(match q {
        Quantity::Price => unreachable!(),
        Quantity::Delta => g.delta,
        Quantity::Gamma => g.gamma,
        Quantity::Speed => g.speed,
        Quantity::Theta => g.theta,
        Quantity::DeltaDecay => g.delta_decay,
        Quantity::Color => g.color,
    })
}

/// One reference cell evaluated against a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: ReferenceCell,
    pub computed: f64,
    pub diff: f64,
    /// Why the cell is reported but not asserted.
    pub excluded: Option<&'static str>,
}

impl CellOutcome {
    pub fn within_tolerance(&self) -> bool {
        self.diff <= self.cell.tolerance
    }

    /// Failing cells that count against the table.
    pub fn is_mismatch(&self) -> bool {
        self.excluded.is_none() && !self.within_tolerance()
    }
}

impl ReferenceTable {
    /// The reference settings on the fixture's domain, with `k = h^2`.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let f = fixture(self.fixture)?;
        let grid = GridSpec::from_steps(f.x_max, self.h, f.model.expiry, None)?;
        Ok(SolverConfig::new(grid)
            .with_method(self.method)
            .with_interpolation(self.interpolation)
            .with_epsilon(self.epsilon))
    }

    /// Asserted cells first, then the excluded ones.
    pub fn compare(&self, result: &SolveResult) -> Result<Vec<CellOutcome>> {
        let asserted = self.cells.iter().map(|c| (c, None));
        let excluded = self.excluded.iter().map(|e| (&e.cell, Some(e.reason)));
        asserted
            .chain(excluded)
            .map(|(cell, excluded)| {
                let computed = quantity_at(result, cell.s, cell.regime, cell.quantity)?;
                Ok(CellOutcome { cell: *cell, computed, diff: (computed - cell.expected).abs(), excluded })
            })
            .collect()
    }
}
