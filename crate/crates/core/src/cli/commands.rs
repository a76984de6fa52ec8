//! The four `cstlab` commands.

use super::config::{RunConfig, Suite};
use super::report::{fmt_float, Report, SuiteReport};
use super::suites::{run_suite, Context};
use crate::cst::{cst_apply, evaluate_on_kc, HeatKernel, PeterWeylDocument, PeterWeylVector};
use crate::error::{CstError, Result};
use crate::group_model::{compose_complex, nu_density_vs_liouville, AlgebraPoint, Family, GroupPoint, GroupSpec};
use crate::quadrature::{truncation_radius, DEFAULT_TRUNCATION_SIGMAS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Largest number of kernel samples written on a torus grid.
pub const MAX_KERNEL_SAMPLES: usize = 1 << 20;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Runs the selected suites, writes `report.json` into the output directory
/// and a summary table to `out`.
pub fn cmd_verify<W: Write>(cfg: &RunConfig, mut out: W) -> Result<Report> {
    cfg.validate()?;
    let ctx = Context::base(cfg)?;
    let mut suites = Vec::with_capacity(cfg.suites.len());
    for &suite in &cfg.suites {
        let outcome = run_suite(&ctx, suite)?;
        suites.push(SuiteReport {
            suite: suite.name().to_string(),
            passed: outcome.checks.iter().all(|c| c.pass),
            checks: outcome.checks,
        });
    }
    let report = Report {
        group: cfg.group.clone(),
        passed: suites.iter().all(|s| s.passed),
        suites,
    };
    ensure_dir(&cfg.output_dir)?;
    report.write_json(&cfg.output_dir.join("report.json"))?;
    report.write_table(&mut out)?;
    Ok(report)
}

/// One refinement level of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub level: usize,
    pub nodes_total: usize,
    pub max_rel_err: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub suite: Suite,
    pub path: PathBuf,
    pub rows: Vec<TableRow>,
}

/// Convergence tables: radial nodes doubled per level (horizontality halves its step instead).
/// Writes `table_<suite>.csv` per selected suite.
pub fn cmd_table<W: Write>(cfg: &RunConfig, mut out: W) -> Result<Vec<ConvergenceTable>> {
    cfg.validate()?;
    ensure_dir(&cfg.output_dir)?;
    let mut tables = Vec::new();
    for &suite in &cfg.suites {
        let mut rows = Vec::with_capacity(cfg.table_levels);
        for level in 0..cfg.table_levels {
            let ctx = Context::level(cfg, level)?;
            let start = Instant::now();
            let outcome = run_suite(&ctx, suite)?;
            rows.push(TableRow {
                level,
                nodes_total: outcome.nodes_total,
                max_rel_err: outcome.convergence_error,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        let path = cfg.output_dir.join(format!("table_{}.csv", suite.name()));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["level", "nodes_total", "max_rel_err", "runtime_ms"])?;
        for r in &rows {
            w.write_record([
                r.level.to_string(),
                r.nodes_total.to_string(),
                fmt_float(r.max_rel_err),
                format!("{:.3}", r.runtime_ms),
            ])?;
        }
        w.flush()?;
        writeln!(out, "{}:", suite)?;
        for r in &rows {
            writeln!(
                out,
                "  level {:>2}  nodes {:>10}  max_rel_err {:>9.2e}  {:>10.1} ms",
                r.level, r.nodes_total, r.max_rel_err, r.runtime_ms
            )?;
        }
        tables.push(ConvergenceTable { suite, path, rows });
    }
    Ok(tables)
}

/// A transform value at `x e^{iY}`. `x` holds angles (torus) or Euler angles `(α, β, γ)` (SU(2)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutput {
    pub hbar: f64,
    pub transformed: PeterWeylDocument,
    pub samples: Vec<Sample>,
}

/// Seeded sample points `(x coordinates, x, Y)`.
pub fn sample_points(spec: &GroupSpec, seed: u64, count: usize) -> Vec<(Vec<f64>, GroupPoint, AlgebraPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (coords, x) = match spec.family() {
                Family::Torus => {
                    let a: Vec<f64> = (0..spec.n()).map(|_| rng.gen_range(0.0..TAU)).collect();
                    (a.clone(), GroupPoint::torus(&a))
                }
                Family::Su2 => {
                    let alpha = rng.gen_range(0.0..TAU);
                    let beta = rng.gen_range(-1.0f64..1.0).acos();
                    let gamma = rng.gen_range(0.0..2.0 * TAU);
                    (vec![alpha, beta, gamma], GroupPoint::su2_euler(alpha, beta, gamma))
                }
            };
            (coords, x, AlgebraPoint::random_ball(spec, &mut rng, 1.0))
        })
        .collect()
}

/// Reads a vector, applies `C_ℏ`, and writes it with samples at the configured points.
pub fn cmd_transform(cfg: &RunConfig, input: &Path, hbar: f64, output: &Path) -> Result<TransformOutput> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let f: PeterWeylVector = serde_json::from_str(&std::fs::read_to_string(input)?)?;
    spec.check_same(f.spec())?;
    let transformed = cst_apply(&spec, hbar, &f)?;
    let samples = sample_points(&spec, cfg.seed, cfg.sample_points)
        .into_iter()
        .map(|(coords, x, y)| {
            let v = evaluate_on_kc(&transformed, &compose_complex(&x, 1.0, &y)?)?;
            Ok(Sample {
                x: coords,
                y: y.y,
                re: v.re,
                im: v.im,
            })
        })
        .collect::<Result<_>>()?;
    let result = TransformOutput {
        hbar,
        transformed: transformed.to_document(),
        samples,
    };
    let mut text = serde_json::to_string_pretty(&result)?;
    text.push('\n');
    std::fs::write(output, text)?;
    Ok(result)
}

/// Path of the `ν_ℏ` ray table written next to the kernel table.
pub fn nu_path(kernel_path: &Path) -> PathBuf {
    let stem = kernel_path.file_stem().and_then(|s| s.to_str()).unwrap_or("kernel");
    kernel_path.with_file_name(format!("{stem}_nu.csv"))
}

/// Tabulates `ρ_ℏ` on `K` and the density of `ν_ℏ` against `ε` along the coordinate rays.
///
/// Torus: a uniform angle grid, columns `theta_1..theta_n,value`. SU(2): the kernel is a
/// class function, tabulated on `exp(t X_3)` for `t ∈ [0, 4π)`, columns `t,value`.
/// The ray table has columns `axis,r,value` with `r` up to the truncation radius for `ℏ`.
pub fn cmd_kernel(cfg: &RunConfig, hbar: f64, output: &Path) -> Result<(PathBuf, PathBuf)> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let kernel = HeatKernel::new(&spec, hbar)?;
    let p = cfg.kernel_points;
    let mut w = csv::Writer::from_path(output)?;
    match spec.family() {
        Family::Torus => {
            let n = spec.n();
            let total = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if total > MAX_KERNEL_SAMPLES as u128 {
                return Err(CstError::Config(format!(
                    "{p}^{n} kernel samples exceed the limit {MAX_KERNEL_SAMPLES}"
                )));
            }
            let mut header: Vec<String> = (1..=n).map(|k| format!("theta_{k}")).collect();
            header.push("value".into());
            w.write_record(&header)?;
            for flat in 0..total as usize {
                let mut rest = flat;
                let angles: Vec<f64> = (0..n)
                    .map(|_| {
                        let i = rest % p;
                        rest /= p;
                        TAU * i as f64 / p as f64
                    })
                    .rev()
                    .collect();
                let v = kernel.evaluate(&GroupPoint::torus(&angles).embed())?;
                let mut rec: Vec<String> = angles.iter().map(|a| fmt_float(*a)).collect();
                rec.push(fmt_float(v.re));
                w.write_record(&rec)?;
            }
        }
        Family::Su2 => {
            w.write_record(["t", "value"])?;
            for i in 0..p {
                let t = 4.0 * PI * i as f64 / p as f64;
                let x = GroupPoint::identity(&spec).mul_exp(&AlgebraPoint::new(vec![0.0, 0.0, t]));
                let v = kernel.evaluate(&x.embed())?;
                w.write_record([fmt_float(t), fmt_float(v.re)])?;
            }
        }
    }
    w.flush()?;

    let nu = nu_path(output);
    let mut w = csv::Writer::from_path(&nu)?;
    w.write_record(["axis", "r", "value"])?;
    let radius = truncation_radius(&spec, DEFAULT_TRUNCATION_SIGMAS, 0, hbar);
    for axis in 0..spec.n() {
        for i in 0..=p {
            let r = radius * i as f64 / p as f64;
            let mut y = vec![0.0; spec.n()];
            y[axis] = r;
            let v = nu_density_vs_liouville(&spec, hbar, &AlgebraPoint::new(y))?;
            w.write_record([(axis + 1).to_string(), fmt_float(r), fmt_float(v)])?;
        }
    }
    w.flush()?;
    Ok((output.to_path_buf(), nu))
}
