//! Verification suites. Each returns its checks and one convergence figure for `table`.

use super::config::{RunConfig, Suite};
use super::report::Check;
use crate::cst::{
    cst_apply, cst_invert, evaluate_on_kc, hl2_norm_sq, hl2_norms_sq, parallel_transport_h, ConvolutionOracle,
    PeterWeylVector,
};
use crate::error::{CstError, Result};
use crate::group_model::{c_hbar, compose_complex, eta, AlgebraPoint, ComplexGroupPoint, GroupPoint, GroupSpec};
use crate::irreps::{enumerate_irreps, IrrepLabel, MatrixElementIndex};
use crate::quadrature::{
    build_rule, certification_battery, gram_deviation, nu_gram, GridSpec, QuadratureRule, DEFAULT_RADIAL_NODES_SU2,
    DEFAULT_RADIAL_NODES_TORUS,
};
use crate::quantization::{
    a_factor, connection_battery, connection_eigenvalue, delta_q_apply, delta_q_pairing_direct,
    gaussian_laplacian_residual, hermiticity_check, horizontal_family, horizontality_check, horizontality_residual,
    intertwining_check, parallel_transport_q, quantum_norm, s_isomorphism, QuantumSection,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// Exactness bound for coefficient-level identities.
pub const EXACT_TOL: f64 = 1e-14;
/// Bound for the normalization of `ν_ℏ` and the fiber-norm preservation of transport.
pub const MASS_TOL: f64 = 1e-8;
/// Bound for the torus closed forms.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Finite-difference step of the horizontality check at level 0.
pub const HORIZONTALITY_DS: f64 = 1e-2;
/// Finite-difference step for the norm derivative in the Hermiticity check.
pub const HERMITICITY_DS: f64 = 1e-4;
pub const RICHARDSON_RANGE: (f64, f64) = (3.5, 4.5);
/// Required ratio between the control family's residual and the horizontal one.
pub const CONTROL_FACTOR: f64 = 1e3;
/// Radius of the ball of `Y` used for random `K_C` points.
pub const SAMPLE_REACH: f64 = 1.0;

/// Checks of one suite plus the figure tracked under grid refinement.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub checks: Vec<Check>,
    pub convergence_error: f64,
    pub nodes_total: usize,
}

/// Suite inputs: the validated configuration at one refinement level.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub spec: GroupSpec,
    pub grid: GridSpec,
    /// Horizontality step.
    pub ds: f64,
}

impl<'a> Context<'a> {
    /// The configured grid, used by `verify`.
    pub fn base(cfg: &'a RunConfig) -> Result<Self> {
        Ok(Context {
            cfg,
            spec: cfg.spec()?,
            grid: cfg.grid()?,
            ds: HORIZONTALITY_DS,
        })
    }

    /// Level `l` of `table`: radial nodes `start·2^l`, horizontality step `ds/2^l`.
    pub fn level(cfg: &'a RunConfig, level: usize) -> Result<Self> {
        let base = Self::base(cfg)?;
        let factor = 1usize
            .checked_shl(level as u32)
            .ok_or_else(|| CstError::Config(format!("table level {level} too large")))?;
        Ok(Context {
            grid: base.grid.with_radial_nodes(cfg.table_start_radial * factor),
            ds: HORIZONTALITY_DS / factor as f64,
            ..base
        })
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite as u64)
    }

    fn probes(&self) -> Vec<MatrixElementIndex> {
        MatrixElementIndex::all(&enumerate_irreps(&self.spec, self.cfg.rep_cutoff))
    }
}

pub fn run_suite(ctx: &Context<'_>, suite: Suite) -> Result<SuiteOutcome> {
    match suite {
        Suite::Certify => certify_suite(ctx),
        Suite::Cst => cst_suite(ctx),
        Suite::Transport => transport_suite(ctx),
        Suite::Connection => connection_suite(ctx),
        Suite::Horizontality => horizontality_suite(ctx),
        Suite::TorusGolden => torus_golden_suite(ctx),
    }
}

fn tag(name: &str, key: &str, v: f64) -> String {
    format!("{name}[{key}={v}]")
}

fn random_kc_point(spec: &GroupSpec, rng: &mut ChaCha8Rng) -> Result<ComplexGroupPoint> {
    let x = GroupPoint::random(spec, rng);
    let y = AlgebraPoint::random_ball(spec, rng, SAMPLE_REACH);
    compose_complex(&x, 1.0, &y)
}

fn certify_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    for &hbar in &cfg.hbar_values {
        let rule = build_rule(&ctx.spec, &ctx.grid, hbar)?;
        nodes += rule.len();
        let mass = nu_gram(&rule, &ctx.spec, hbar, &[IrrepLabel::trivial(&ctx.spec)])?[(0, 0)].re;
        let m = Check::relative(tag("certify/nu-mass", "hbar", hbar), mass, 1.0, MASS_TOL);
        let r = certification_battery(&rule, &ctx.spec, cfg.rep_cutoff, cfg.tolerances.certify)?;
        worst = worst.max(m.rel_err).max(r.max_error);
        checks.push(m);
        checks.push(Check::error(
            tag("certify/schur", "hbar", hbar),
            r.schur_max_error,
            cfg.tolerances.certify,
        ));
        checks.push(Check::error(
            tag("certify/nu-orthogonality", "hbar", hbar),
            r.nu_max_error,
            cfg.tolerances.certify,
        ));
    }
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: nodes,
    })
}

/// Largest deviation of `‖C_ℏ f‖_{ν_ℏ} / ‖f‖` from 1 over the random battery.
pub fn unitarity_deviation(rule: &QuadratureRule, spec: &GroupSpec, hbar: f64, fs: &[PeterWeylVector]) -> Result<f64> {
    let transformed: Vec<PeterWeylVector> = fs.iter().map(|f| cst_apply(spec, hbar, f)).collect::<Result<_>>()?;
    let norms = hl2_norms_sq(rule, spec, hbar, &transformed)?;
    Ok(fs
        .iter()
        .zip(norms)
        .map(|(f, n2)| ((n2 / f.coefficient_norm_sq()).sqrt() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Largest relative gap between the spectral transform and the convolution integral at `points`.
pub fn convolution_deviation(
    spec: &GroupSpec,
    hbar: f64,
    f: &PeterWeylVector,
    points: &[ComplexGroupPoint],
) -> Result<f64> {
    let oracle = ConvolutionOracle::new(spec, hbar, f, SAMPLE_REACH)?;
    let spectral = cst_apply(spec, hbar, f)?;
    let mut worst: f64 = 0.0;
    for g in points {
        let a = evaluate_on_kc(&spectral, g)?;
        let b = oracle.evaluate(g)?;
        worst = worst.max((a - b).norm() / a.norm());
    }
    Ok(worst)
}

fn cst_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let mut rng = ctx.rng(Suite::Cst);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    let fs: Vec<PeterWeylVector> = (0..cfg.random_vectors)
        .map(|_| PeterWeylVector::random(&ctx.spec, cfg.rep_cutoff, &mut rng))
        .collect();
    let points: Vec<ComplexGroupPoint> = (0..cfg.sample_points)
        .map(|_| random_kc_point(&ctx.spec, &mut rng))
        .collect::<Result<_>>()?;
    let one = PeterWeylVector::constant(&ctx.spec, Complex64::new(1.0, 0.0));
    for &hbar in &cfg.hbar_values {
        let rule = build_rule(&ctx.spec, &ctx.grid, hbar)?;
        nodes += rule.len();
        let u = unitarity_deviation(&rule, &ctx.spec, hbar, &fs)?;
        checks.push(Check::error(
            tag("cst/hall-unitarity", "hbar", hbar),
            u,
            cfg.tolerances.unitarity,
        ));
        let c = convolution_deviation(&ctx.spec, hbar, &fs[0], &points)?;
        checks.push(Check::error(
            tag("cst/spectral-vs-convolution", "hbar", hbar),
            c,
            cfg.tolerances.unitarity,
        ));
        let d = cst_apply(&ctx.spec, hbar, &one)?.relative_distance(&one);
        checks.push(Check::error(tag("cst/constant-fixed", "hbar", hbar), d, EXACT_TOL));
        let back = cst_invert(&ctx.spec, hbar, &cst_apply(&ctx.spec, hbar, &fs[0])?)?.relative_distance(&fs[0]);
        checks.push(Check::error(tag("cst/inverse", "hbar", hbar), back, EXACT_TOL));
        worst = worst.max(u).max(c);
    }
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: nodes,
    })
}

/// Three increasing values of `ℏ` drawn from the configuration.
fn hbar_triple(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let hi = if hi > lo { hi } else { 2.0 * lo };
    (lo, 0.5 * (lo + hi), hi)
}

fn transport_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let spec = &ctx.spec;
    let mut rng = ctx.rng(Suite::Transport);
    let f = cst_apply(
        spec,
        cfg.hbar_values[0],
        &PeterWeylVector::random(spec, cfg.rep_cutoff, &mut rng),
    )?;
    let (h1, h2, h3) = hbar_triple(&cfg.hbar_values);
    let u = |a: f64, b: f64, v: &PeterWeylVector| parallel_transport_h(spec, a, b, v);
    let mut checks = vec![
        Check::error("transport/identity", u(h2, h2, &f)?.relative_distance(&f), EXACT_TOL),
        Check::error(
            "transport/composition",
            u(h2, h3, &u(h1, h2, &f)?)?.relative_distance(&u(h1, h3, &f)?),
            EXACT_TOL,
        ),
        Check::error(
            "transport/inverse",
            u(h3, h1, &u(h1, h3, &f)?)?.relative_distance(&f),
            EXACT_TOL,
        ),
        Check::error(
            "transport/via-cst",
            cst_apply(spec, h3, &cst_invert(spec, h1, &f)?)?.relative_distance(&u(h1, h3, &f)?),
            EXACT_TOL,
        ),
    ];
    let r1 = build_rule(spec, &ctx.grid, h1)?;
    let r3 = build_rule(spec, &ctx.grid, h3)?;
    let n1 = hl2_norm_sq(&r1, spec, h1, &f)?.sqrt();
    let n3 = hl2_norm_sq(&r3, spec, h3, &u(h1, h3, &f)?)?.sqrt();
    let c = Check::relative("transport/fiber-norm", n3, n1, MASS_TOL);
    let worst = c.rel_err;
    checks.push(c);
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: r1.len() + r3.len(),
    })
}

/// `a_s (ℏ₀/2)|m|² e^{sℏ₀|m|²}`: the torus pairing `⟨δ^Q e_m, e_m⟩` in closed form.
pub fn torus_pairing_closed_form(spec: &GroupSpec, s: f64, hbar0: f64, m2: f64) -> Result<f64> {
    Ok(a_factor(spec, s, hbar0)? * hbar0 / 2.0 * m2 * (s * hbar0 * m2).exp())
}

fn connection_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let spec = &ctx.spec;
    let tol = cfg.tolerances.connection;
    let h0 = cfg.hbar0;
    let probes = ctx.probes();
    let mut rng = ctx.rng(Suite::Connection);
    let f = PeterWeylVector::random(spec, cfg.rep_cutoff, &mut rng);
    let g = PeterWeylVector::random(spec, cfg.rep_cutoff, &mut rng);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    for &s in &cfg.s_values {
        let hbar = s * h0;
        let rule = build_rule(spec, &ctx.grid, hbar)?;
        let report = connection_battery(&rule, spec, s, h0, &probes)?;
        nodes += report.nodes_total;
        checks.push(Check::error(
            tag("connection/weighted-integral-vs-spectral", "s", s),
            report.max_rel_err,
            tol,
        ));
        worst = worst.max(report.max_rel_err);

        if spec.positive_roots().is_empty() {
            let mut closed: f64 = 0.0;
            for p in &probes {
                let sec = QuantumSection::new(s, h0, PeterWeylVector::basis(spec, p.clone())?)?;
                let got = delta_q_pairing_direct(&rule, &sec, &sec)?.re;
                let m2 = p.label.casimir();
                let want = torus_pairing_closed_form(spec, s, h0, m2)?;
                let scale = a_factor(spec, s, h0)? * (h0 / 2.0).max(h0 / 2.0 * m2) * (hbar * m2).exp();
                closed = closed.max((got - want).abs() / scale);
            }
            checks.push(Check::error(tag("connection/torus-closed-form", "s", s), closed, tol));
            worst = worst.max(closed);
        }

        let gl = gaussian_laplacian_residual(&rule, spec, hbar, &probes)?;
        checks.push(Check::error(
            tag("connection/gaussian-laplacian-weak-form", "s", s),
            gl,
            tol,
        ));

        let fiber = QuadratureRule::for_quantum_fiber(spec, &ctx.grid, s, h0)?;
        let qn = quantum_norm(&fiber, &s_isomorphism(spec, h0, s, &f)?)?.direct;
        let hn = hl2_norm_sq(&rule, spec, hbar, &f)?.sqrt();
        let unit = Check::relative(tag("connection/s-unitarity", "s", s), qn, hn, tol);
        worst = worst.max(unit.rel_err);
        checks.push(unit);
        let one = PeterWeylVector::constant(spec, Complex64::new(1.0, 0.0));
        let qn1 = quantum_norm(&fiber, &s_isomorphism(spec, h0, s, &one)?)?.direct;
        checks.push(Check::relative(tag("connection/s-unit-norm", "s", s), qn1, 1.0, tol));

        let tw = intertwining_check(spec, &ctx.grid, h0, s, &f, &g)?;
        checks.push(Check::with_errors(
            tag("connection/intertwining", "s", s),
            tw.lhs_re,
            tw.rhs_re,
            tw.abs_err,
            tw.rel_err,
            tol,
        ));
        worst = worst.max(tw.rel_err);
    }
    let (s1, s2) = (cfg.s_values[0], cfg.s_values[cfg.s_values.len() - 1] + 1.0);
    let wrapped_then_moved = parallel_transport_q(&s_isomorphism(spec, h0, s1, &f)?, s2)?;
    let moved_then_wrapped = s_isomorphism(spec, h0, s2, &parallel_transport_h(spec, s1 * h0, s2 * h0, &f)?)?;
    checks.push(Check::error(
        "connection/transport-intertwining",
        wrapped_then_moved.datum().relative_distance(moved_then_wrapped.datum()),
        MASS_TOL,
    ));
    let min_eig = probes
        .iter()
        .filter(|p| !p.label.is_trivial())
        .map(|p| connection_eigenvalue(spec, h0, &p.label, false))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least(
        "connection/positive-eigenvalues",
        min_eig,
        f64::MIN_POSITIVE,
    ));
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: nodes,
    })
}

fn horizontality_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let spec = &ctx.spec;
    let h0 = cfg.hbar0;
    let mut rng = ctx.rng(Suite::Horizontality);
    let f = PeterWeylVector::random(spec, cfg.rep_cutoff, &mut rng);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    for &s in &cfg.s_values {
        let r = horizontality_check(spec, h0, horizontal_family(spec, h0, &f, s), s, ctx.ds)?;
        worst = worst.max(r.residual);
        checks.push(Check::within(
            tag("horizontality/richardson-ratio", "s", s),
            r.ratio,
            RICHARDSON_RANGE.0,
            RICHARDSON_RANGE.1,
        ));
        let control = horizontality_residual(spec, h0, |_| f.clone(), s, ctx.ds)?;
        checks.push(Check::at_least(
            tag("horizontality/control-factor", "s", s),
            control / r.residual,
            CONTROL_FACTOR,
        ));
        let herm = hermiticity_check(spec, &ctx.grid, h0, &f, s, HERMITICITY_DS.min(s / 2.0))?;
        nodes += 2 * QuadratureRule::for_quantum_fiber(spec, &ctx.grid, s, h0)?.len();
        checks.push(Check::with_errors(
            tag("horizontality/hermiticity", "s", s),
            herm.norm_derivative,
            herm.twice_pairing,
            (herm.norm_derivative - herm.twice_pairing).abs(),
            herm.rel_err,
            cfg.tolerances.connection,
        ));
        checks.push(Check::error(
            tag("horizontality/horizontal-norm-constant", "s", s),
            herm.horizontal_rel_derivative,
            cfg.tolerances.connection,
        ));
    }
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: nodes,
    })
}

fn torus_golden_suite(ctx: &Context<'_>) -> Result<SuiteOutcome> {
    let cfg = ctx.cfg;
    let (spec, grid) = if ctx.spec.positive_roots().is_empty() {
        (ctx.spec.clone(), ctx.grid.clone())
    } else {
        let t = GroupSpec::torus(1)?;
        let band = crate::quadrature::band_of(&enumerate_irreps(&t, cfg.rep_cutoff));
        // Same refinement level as the configured grid, measured against the per-family defaults.
        let radial = (ctx.grid.radial_nodes() * DEFAULT_RADIAL_NODES_TORUS).div_ceil(DEFAULT_RADIAL_NODES_SU2);
        (t.clone(), GridSpec::recommended(&t, band).with_radial_nodes(radial))
    };
    let n = spec.n() as f64;
    let h0 = cfg.hbar0;
    let mut rng = ctx.rng(Suite::TorusGolden);
    let labels = enumerate_irreps(&spec, cfg.rep_cutoff);
    let probes = MatrixElementIndex::all(&labels);
    let mut checks = Vec::new();
    let mut nodes = 0;

    let eta_err = (0..16)
        .map(|_| (eta(&spec, &AlgebraPoint::random_ball(&spec, &mut rng, 5.0)) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::error("torus-golden/eta-is-one", eta_err, GOLDEN_TOL));
    let a_want = (PI * h0).powf(n / 2.0);
    checks.push(Check::relative(
        "torus-golden/a_s",
        a_factor(&spec, 1.7, h0)?,
        a_want,
        GOLDEN_TOL,
    ));

    for &hbar in &cfg.hbar_values {
        checks.push(Check::relative(
            tag("torus-golden/c_hbar", "hbar", hbar),
            c_hbar(&spec, hbar)?,
            (PI * hbar).powf(-n / 2.0),
            GOLDEN_TOL,
        ));
        let rule = build_rule(&spec, &grid, hbar)?;
        nodes += rule.len();
        let want: Vec<f64> = probes.iter().map(|p| (hbar * p.label.casimir()).exp()).collect();
        let (err, _, _) = gram_deviation(&nu_gram(&rule, &spec, hbar, &labels)?, &want);
        checks.push(Check::error(
            tag("torus-golden/nu-orthogonality", "hbar", hbar),
            err,
            GOLDEN_TOL,
        ));

        let z: Vec<Complex64> = (0..spec.n())
            .map(|_| Complex64::new(rng.gen_range(0.0..TAU), rng.gen_range(-1.0..1.0)))
            .collect();
        let g = ComplexGroupPoint::Torus(z.clone());
        let mut cst_err: f64 = 0.0;
        for p in &probes {
            let IrrepLabel::Torus(m) = &p.label else {
                unreachable!("torus labels")
            };
            let v = cst_apply(&spec, hbar, &PeterWeylVector::basis(&spec, p.clone())?)?;
            let phase: Complex64 = m
                .iter()
                .zip(&z)
                .map(|(mk, zk)| Complex64::new(0.0, *mk as f64) * zk)
                .sum();
            let want = (-hbar * p.label.casimir() / 2.0 + phase).exp();
            cst_err = cst_err.max((evaluate_on_kc(&v, &g)? - want).norm() / want.norm());
        }
        checks.push(Check::error(
            tag("torus-golden/cst-factors", "hbar", hbar),
            cst_err,
            GOLDEN_TOL,
        ));
    }

    for &s in &cfg.s_values {
        let rule = build_rule(&spec, &grid, s * h0)?;
        let fiber = QuadratureRule::for_quantum_fiber(&spec, &grid, s, h0)?;
        nodes += rule.len() + fiber.len();
        let (mut eig_err, mut pair_err, mut norm_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for p in &probes {
            let m2 = p.label.casimir();
            let sec = QuantumSection::new(s, h0, PeterWeylVector::basis(&spec, p.clone())?)?;
            let lambda = delta_q_apply(&sec).datum().get(p).re;
            eig_err = eig_err.max((lambda - m2 * h0 / 2.0).abs() / (m2 * h0 / 2.0).max(1.0));
            eig_err = eig_err.max((connection_eigenvalue(&spec, h0, &p.label, true) - lambda).abs());
            let got = delta_q_pairing_direct(&rule, &sec, &sec)?.re;
            let want = torus_pairing_closed_form(&spec, s, h0, m2)?;
            let scale = a_factor(&spec, s, h0)? * (h0 / 2.0) * m2.max(1.0) * (s * h0 * m2).exp();
            pair_err = pair_err.max((got - want).abs() / scale);
            let qn = quantum_norm(&fiber, &sec)?;
            let nwant = (a_factor(&spec, s, h0)? * (s * h0 * m2).exp()).sqrt();
            norm_err = norm_err
                .max((qn.direct / nwant - 1.0).abs())
                .max((qn.spectral / nwant - 1.0).abs());
        }
        checks.push(Check::error(
            tag("torus-golden/delta-q-eigenvalues", "s", s),
            eig_err,
            GOLDEN_TOL,
        ));
        checks.push(Check::error(
            tag("torus-golden/delta-q-pairing", "s", s),
            pair_err,
            GOLDEN_TOL,
        ));
        checks.push(Check::error(
            tag("torus-golden/quantum-norm", "s", s),
            norm_err,
            GOLDEN_TOL,
        ));
    }
    let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    Ok(SuiteOutcome {
        checks,
        convergence_error: worst,
        nodes_total: nodes,
    })
}
