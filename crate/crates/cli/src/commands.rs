//! Subcommand implementations. Each writes its report to `out`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use amerput_core::fixtures::{convergence_references, ConvergenceReference, RATE_TOL, TABLE_IDS};
use amerput_core::{
    fixture, fixtures, manufactured_study, reference_table, solve, solver_study, GridSpec, InterpOrder, Method,
    RefinementStudy, SolverConfig,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::write_outputs;

/// Minimum observed rate for a convergence reproduction to pass.
pub const MIN_RATE: f64 = 2.8;

const CONVERGENCE_PREFIX: &str = "two-regime-convergence-";

fn io(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source })
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { io($out, format_args!("{}\n", format_args!($($arg)*))) };
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    RunConfig::from_toml(&text)
}

/// Solves the configured market and writes the result files.
pub fn run(config_path: &Path, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let resolved = config.resolve()?;
    let result = solve(&resolved.model, &resolved.solver)?;
    let dir = out_dir.unwrap_or(&config.output.directory);
    let files = write_outputs(dir, &config, &result)?;
    say!(
        out,
        "solved {} regimes on {} x {} grid in {:.3} s (mean {:.2} iterations per step)",
        result.num_regimes(),
        result.grid.m,
        result.grid.n,
        result.wall_time,
        result.mean_iterations()
    )?;
    for f in files {
        say!(out, "wrote {}", dir.join(f).display())?;
    }
    Ok(())
}

/// Overrides applied on top of a table's reference settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub method: Option<Method>,
    pub interpolation: Option<InterpOrder>,
    pub h: Option<f64>,
}

pub fn table_ids() -> Vec<String> {
    let mut ids: Vec<String> = TABLE_IDS.iter().map(|s| s.to_string()).collect();
    ids.extend(convergence_references().iter().map(convergence_id));
    ids
}

fn convergence_id(r: &ConvergenceReference) -> String {
    let order = match r.interpolation {
        InterpOrder::Cubic => "cubic",
        InterpOrder::Quintic => "quintic",
    };
    format!("{CONVERGENCE_PREFIX}{order}")
}

fn unknown_table(id: &str) -> CliError {
    CliError::Config { field: "table", reason: format!("unknown id `{id}`; known: {}", table_ids().join(", ")) }
}

/// Recomputes a reference table and compares cell by cell.
pub fn reproduce(id: &str, ov: Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    if id.starts_with(CONVERGENCE_PREFIX) {
        return reproduce_convergence(id, ov, out);
    }
    let table = reference_table(id).map_err(|_| unknown_table(id))?;
    let mut cfg = table.solver_config()?;
    if let Some(m) = ov.method {
        cfg.method = m;
    }
    if let Some(o) = ov.interpolation {
        cfg.interpolation = o;
    }
    if let Some(h) = ov.h {
        let f = fixture(table.fixture)?;
        cfg.grid = GridSpec::from_steps(f.x_max, h, f.model.expiry, None)
            .map_err(|e| CliError::Config { field: "h", reason: e.to_string() })?;
    }
    let model = fixture(table.fixture)?.model;
    let result = solve(&model, &cfg)?;
    say!(out, "{}: {}", table.id, table.title)?;
    say!(
        out,
        "fixture {}, {:?}/{:?}, h = {}, k = {:e}, {:.2} s, mean {:.2} iterations per step",
        table.fixture,
        cfg.method,
        cfg.interpolation,
        cfg.grid.h,
        cfg.grid.k,
        result.wall_time,
        result.mean_iterations()
    )?;
    say!(
        out,
        "{:>8} {:>6} {:>11} {:>12} {:>12} {:>9} {:>7}  status",
        "S",
        "regime",
        "quantity",
        "reference",
        "computed",
        "diff",
        "tol"
    )?;
    let outcomes = table.compare(&result)?;
    let mut mismatches = 0;
    for o in &outcomes {
        let status = match (o.excluded, o.within_tolerance()) {
            (Some(reason), _) => format!("excluded: {reason}"),
            (None, true) => "ok".to_string(),
            (None, false) => {
                mismatches += 1;
                "MISMATCH".to_string()
            }
        };
        let c = &o.cell;
        say!(
            out,
            "{:>8} {:>6} {:>11} {:>12.6} {:>12.6} {:>9.2e} {:>7.0e}  {status}",
            c.s,
            c.regime,
            c.quantity.name(),
            c.expected,
            o.computed,
            o.diff,
            c.tolerance
        )?;
    }
    let asserted = outcomes.iter().filter(|o| o.excluded.is_none()).count();
    say!(out, "{} of {asserted} cells within tolerance", asserted - mismatches)?;
    if mismatches > 0 {
        return Err(CliError::Mismatch(format!("{id}: {mismatches} of {asserted} cells outside tolerance")));
    }
    Ok(())
}

fn reproduce_convergence(id: &str, ov: Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let reference =
        convergence_references().into_iter().find(|r| convergence_id(r) == id).ok_or_else(|| unknown_table(id))?;
    if ov.h.is_some() {
        return Err(CliError::Config { field: "h", reason: "a convergence study fixes its own grid sequence".into() });
    }
    let f = fixture(reference.fixture)?;
    let grid = GridSpec::from_steps(f.x_max, reference.hs[0], f.model.expiry, None)?;
    let base = SolverConfig::new(grid)
        .with_method(ov.method.unwrap_or(reference.method))
        .with_interpolation(ov.interpolation.unwrap_or(reference.interpolation))
        .with_epsilon(f.epsilon);
    let study = solver_study(&f.model, &base, &reference.hs, 0)?;
    say!(out, "{id}: fixture {}, {:?}/{:?}, regime 1, k = h^2", reference.fixture, base.method, base.interpolation)?;
    write_study(&study, f.model.expiry, out)?;
    let mut failures = Vec::new();
    for (i, (&got, &want)) in study.rates.iter().zip(&reference.rates).enumerate() {
        let ok = (got - want).abs() <= RATE_TOL && got >= MIN_RATE;
        say!(
            out,
            "rate {}: computed {got:.2}, reference {want:.2} (tolerance {RATE_TOL}, minimum {MIN_RATE})  {}",
            i + 1,
            if ok { "ok" } else { "MISMATCH" }
        )?;
        if !ok {
            failures.push(format!("rate {} = {got:.2}", i + 1));
        }
    }
    for (e, p) in study.errors().iter().zip(&reference.errors) {
        say!(out, "error {e:.3e}, reference {p:.3e}")?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("{id}: {}", failures.join(", "))))
    }
}

/// Convergence study target.
#[derive(Debug, Clone)]
pub enum StudyTarget {
    Fixture { name: String, regime: usize },
    Manufactured { vol: f64, rate: f64 },
}

pub fn converge(target: &StudyTarget, hs: &[f64], ov: Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    if hs.len() < 2 {
        return Err(CliError::Config { field: "h", reason: "a study needs at least two grid sizes".into() });
    }
    let (study, expiry) = match target {
        StudyTarget::Manufactured { vol, rate } => (manufactured_study(hs, *vol, *rate)?, 0.5),
        StudyTarget::Fixture { name, regime } => {
            let f = fixture(name).map_err(|e| CliError::Config { field: "target", reason: e.to_string() })?;
            if *regime == 0 || *regime > f.model.num_regimes() {
                return Err(CliError::Config {
                    field: "regime",
                    reason: format!("{regime} is not in 1..={}", f.model.num_regimes()),
                });
            }
            let grid = GridSpec::from_steps(f.x_max, hs[0], f.model.expiry, None)?;
            let base = SolverConfig::new(grid)
                .with_method(ov.method.unwrap_or(Method::GaussSeidel))
                .with_interpolation(ov.interpolation.unwrap_or(InterpOrder::Quintic))
                .with_epsilon(f.epsilon);
            (solver_study(&f.model, &base, hs, regime - 1)?, f.model.expiry)
        }
    };
    write_study(&study, expiry, out)
}

/// One CSV row per level. `max_error` compares a level with the next finer
/// one; `rate` compares that error with the previous level's.
pub fn write_study(study: &RefinementStudy, expiry: f64, out: &mut dyn Write) -> Result<(), CliError> {
    say!(out, "h,k,max_error,rate,wall_time,seconds_per_step,mean_iterations")?;
    for (i, l) in study.levels.iter().enumerate() {
        let err = l.max_error.map(|e| format!("{e:.6e}")).unwrap_or_default();
        let rate = match (i, l.max_error) {
            (1.., Some(_)) => study.rates.get(i - 1).map(|r| format!("{r:.4}")).unwrap_or_default(),
            _ => String::new(),
        };
        let steps = (expiry / l.k).round().max(1.0);
        say!(
            out,
            "{},{:.6e},{err},{rate},{:.4e},{:.3e},{:.3}",
            l.h,
            l.k,
            l.wall_time,
            l.wall_time / steps,
            l.mean_iterations
        )?;
    }
    Ok(())
}

pub fn list_fixtures(out: &mut dyn Write) -> Result<(), CliError> {
    for f in fixtures() {
        say!(out, "{:<22} {:>2} regimes  h = {:<5} {}", f.name, f.model.num_regimes(), f.h, f.description)?;
    }
    Ok(())
}

pub fn list_tables(out: &mut dyn Write) -> Result<(), CliError> {
    for id in table_ids() {
        say!(out, "{id}")?;
    }
    Ok(())
}
