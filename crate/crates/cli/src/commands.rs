//! The subcommands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use singlepeak_core::functionals::diamagnetic_pair;
use singlepeak_core::instanton::UnitProfile;
use singlepeak_core::{
    assemble_at, assemble_solution, bubble_field, bubble_norms, boundary_decay_check, check_assumptions,
    correction_check, find_critical_points, g1, gamma_smallmu_closed_form, magnetic_smallmu_limit, richardson, scan,
    BlockDiagonalHessian, Bubble, ComplexField, FieldKind, MagneticPotential, Melnikov, PotentialPair,
    PotentialSamples, PotentialSpec, ReductionError,
};

use crate::config::{ConfigError, RunConfig};
use crate::output::{field_dump, landscape_csv, solutions_csv, write_atomic, SolutionRow};
use crate::report::{CheckRow, RunReport};
use crate::CliError;

/// Process exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok,
    CheckFailed,
    NoSolution,
}

impl Exit {
    pub fn code(self) -> u8 {
        match self {
            Exit::Ok => 0,
            Exit::CheckFailed => 1,
            Exit::NoSolution => 3,
        }
    }
}

pub struct Outcome {
    pub report: RunReport,
    pub exit: Exit,
}

/// Effective configuration and paths of a run.
pub struct Context {
    pub config: RunConfig,
    /// Directory for all output files.
    pub out: PathBuf,
    /// Directory against which table paths resolve.
    pub base: PathBuf,
    pub force: bool,
}

impl Context {
    pub fn new(config: RunConfig, config_path: Option<&Path>, out: Option<PathBuf>, force: bool) -> Result<Self, ConfigError> {
        config.validate()?;
        let base = config_path
            .and_then(Path::parent)
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let out = out.unwrap_or_else(|| config.output.clone());
        Ok(Self {
            config,
            out,
            base,
            force,
        })
    }

    pub fn potentials(&self) -> Result<PotentialPair, ConfigError> {
        self.config.potentials(&self.base)
    }

    pub fn melnikov(&self) -> Result<Melnikov, ConfigError> {
        let basis = self.config.basis()?;
        Melnikov::new(&basis, self.potentials()?, self.config.g2_rule()).map_err(|e| ConfigError::Core(e.into()))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.out.join(name);
        write_atomic(&p, bytes)?;
        Ok(p)
    }
}

fn assumption_rows(ctx: &Context) -> Result<Vec<CheckRow>, CliError> {
    let pot = ctx.potentials()?;
    let rep = check_assumptions(&pot.a, &pot.v, ctx.config.dim()?, &ctx.config.check_options()?);
    Ok(rep
        .entries
        .iter()
        .map(|e| {
            CheckRow::new(e.name, e.estimate, e.pass).detail(format!("{} (p = {}) {}", e.norm, e.exponent, e.detail))
        })
        .collect())
}

pub fn check_potentials(ctx: &Context) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("check-potentials", &ctx.config);
    report.checks = assumption_rows(ctx)?;
    let exit = if report.all_pass() { Exit::Ok } else { Exit::CheckFailed };
    Ok(Outcome { report, exit })
}

/// Runs the assumption checks; a failure stops the command unless forced.
fn preflight(ctx: &Context, report: &mut RunReport) -> Result<bool, CliError> {
    let rows = assumption_rows(ctx)?;
    let ok = rows.iter().all(|r| r.pass);
    if !ok {
        let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        if ctx.force {
            report.warnings.push(format!("potential checks failed ({}); continuing because of --force", failed.join(", ")));
        } else {
            report.warnings.push(format!("potential checks failed ({}); rerun with --force to continue", failed.join(", ")));
            report.checks = rows;
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn scan_cmd(ctx: &Context) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("scan", &ctx.config);
    if !preflight(ctx, &mut report)? {
        return Ok(Outcome {
            report,
            exit: Exit::CheckFailed,
        });
    }
    let m = ctx.melnikov()?;
    let grid = ctx.config.grid()?;
    let land = scan(&m, &grid);
    ctx.write("gamma_landscape.csv", &landscape_csv(&land)?)?;
    let failed = land.samples.iter().filter(|s| !s.is_ok()).count();
    report.warnings.extend(land.warnings.iter().cloned());
    if failed > 0 {
        report.warnings.push(format!("{failed} samples failed; see the error column"));
    }
    report.data = json!({
        "file": "gamma_landscape.csv",
        "rows": land.samples.len(),
        "failed": failed,
        "max_abs_gamma": land.max_abs(),
    });
    Ok(Outcome { report, exit: Exit::Ok })
}

pub fn asymptotics(ctx: &Context) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("asymptotics", &ctx.config);
    if !preflight(ctx, &mut report)? {
        return Ok(Outcome {
            report,
            exit: Exit::CheckFailed,
        });
    }
    let cfg = &ctx.config;
    let dim = cfg.dim()?;
    let m = ctx.melnikov()?;
    let core = |e: singlepeak_core::MelnikovError| CliError::Core(e.into());

    let decay = boundary_decay_check(&m, &cfg.decay_options()?).map_err(core)?;
    for ray in &decay.rays {
        report.checks.push(
            CheckRow::new(format!("decay {}", ray.name), ray.final_ratio, ray.pass)
                .tolerance(decay.tolerance)
                .detail(format!("|Gamma| {:?} at {:?}; monotone {}", ray.values, ray.parameter, ray.monotone)),
        );
    }
    report.checks.push(
        CheckRow::new("decay corner", decay.corner_ratio, decay.corner_ratio < decay.tolerance)
            .tolerance(decay.tolerance)
            .detail(format!(
                "|Gamma| = {:e} at mu = {}, |xi| = {}; interior max {:e}",
                decay.corner_value,
                decay.corner.0,
                decay.corner.1.iter().map(|v| v * v).sum::<f64>().sqrt(),
                decay.interior_max
            )),
    );

    let pot = m.potentials();
    let tol = cfg.asymptotics.limit_tolerance;
    let mu = cfg.asymptotics.mu;
    let mut limits = Vec::new();
    for xi in cfg.limit_points() {
        let samples: Vec<_> = [mu, 2.0 * mu, 4.0 * mu]
            .iter()
            .map(|&t| m.gamma(t, &xi))
            .collect::<Result<_, _>>()
            .map_err(core)?;
        let rich = |f: &dyn Fn(&singlepeak_core::GammaSample) -> f64| {
            let v: Vec<f64> = samples.iter().map(|s| f(s) / (s.mu * s.mu)).collect();
            richardson(v[0], v[1], v[2])
        };
        let measured = rich(&|s| s.gamma);
        let electric = gamma_smallmu_closed_form(&xi, &pot.v, dim).map_err(core)?;
        let magnetic = magnetic_smallmu_limit(&xi, &pot.a, dim).map_err(core)?;
        let scale = electric.abs().max(magnetic);
        let err = (measured - electric).abs();
        report.checks.push(
            CheckRow::new(format!("small-mu limit at xi = {xi:?}"), measured, err <= tol * scale)
                .reference(electric)
                .tolerance(tol)
                .detail(format!("relative error {:e}", err / scale)),
        );
        if pot.a.is_zero() {
            report
                .checks
                .push(CheckRow::new(format!("magnetic cancellation at xi = {xi:?}"), 0.0, true).detail("A = 0, trivially zero"));
        } else {
            let h2 = rich(&|s| s.g2_magnetic);
            let corr = rich(&|s| -s.correction_part);
            let net = rich(&|s| s.g2_magnetic + s.correction_part);
            for (name, value, reference) in [
                ("magnetic G2", h2, magnetic),
                ("magnetic correction", corr, magnetic),
                ("magnetic cancellation", net, 0.0),
            ] {
                let e = (value - reference).abs();
                report.checks.push(
                    CheckRow::new(format!("{name} at xi = {xi:?}"), value, e <= tol * scale)
                        .reference(reference)
                        .tolerance(tol)
                        .detail(format!("relative error {:e}", e / scale)),
                );
            }
        }
        limits.push(json!({"xi": xi, "measured": measured, "electric": electric, "magnetic": magnetic}));
    }

    let mut correction = serde_json::Value::Null;
    if pot.a.is_zero() {
        report.checks.push(CheckRow::new("correction bound", 0.0, true).detail("A = 0, no correction"));
        report.checks.push(CheckRow::new("rescaled correction decreases", 0.0, true).detail("A = 0, no correction"));
    } else {
        let c = correction_check(&m, &cfg.correction_options()?).map_err(core)?;
        report.checks.push(
            CheckRow::new("correction bound", c.max_norm, c.bounded)
                .reference(c.bound.constant)
                .detail(format!(
                    "max ||phi||_E over {} points; min {:e}",
                    c.points.len(),
                    c.norms.iter().cloned().fold(f64::INFINITY, f64::min)
                )),
        );
        report.checks.push(
            CheckRow::new("rescaled correction decreases", *c.rescaled_norms.last().unwrap_or(&0.0), c.decreasing)
                .detail(format!("||phi*||_E {:?} at mu {:?}", c.rescaled_norms, c.rescaled_mu)),
        );
        correction = serde_json::to_value(&c)?;
    }
    report.data = json!({"decay": decay, "small_mu": limits, "correction": correction});
    let exit = if report.all_pass() { Exit::Ok } else { Exit::CheckFailed };
    Ok(Outcome { report, exit })
}

pub fn solve(ctx: &Context) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("solve", &ctx.config);
    if !preflight(ctx, &mut report)? {
        return Ok(Outcome {
            report,
            exit: Exit::CheckFailed,
        });
    }
    let cfg = &ctx.config;
    let n = cfg.dimension;
    let m = ctx.melnikov()?;
    // below alpha = 2 the reduced function is the electric term alone
    let landscape_m;
    let reduced = if cfg.alpha < 2.0 {
        let pot = PotentialPair::new(MagneticPotential::zero(cfg.dim()?), m.potentials().v.clone());
        landscape_m = Melnikov::with_hessian(Arc::clone(m.hessian()), pot, cfg.g2_rule());
        &landscape_m
    } else {
        &m
    };
    let grid = cfg.grid()?;
    let land = scan(reduced, &grid);
    ctx.write("gamma_landscape.csv", &landscape_csv(&land)?)?;
    report.warnings.extend(land.warnings.iter().cloned());
    let found = match find_critical_points(reduced, &land, &cfg.search_options()) {
        Ok(r) => r,
        Err(ReductionError::FlatLandscape { max_abs, floor }) => {
            report.warnings.push(format!(
                "the reduced function is flat on the grid (max |Gamma| = {max_abs:e}, noise floor {floor:e}); no solutions"
            ));
            ctx.write("solutions.csv", &solutions_csv(n, &[])?)?;
            return Ok(Outcome {
                report,
                exit: Exit::NoSolution,
            });
        }
        Err(e) => return Err(CliError::Core(e.into())),
    };
    report.warnings.extend(found.warnings.iter().cloned());

    let mut solutions = Vec::new();
    let mut dumps = Vec::new();
    for (ie, &eps) in cfg.epsilon.iter().enumerate() {
        for (ip, cp) in found.points.iter().enumerate() {
            let sol = assemble_solution(&m, cp, eps, cfg.alpha).map_err(|e| CliError::Core(e.into()))?;
            let name = format!("fields/eps{ie}_point{ip}.txt");
            let meta = [
                ("eps", eps.to_string()),
                ("alpha", cfg.alpha.to_string()),
                ("point_kind", cp.kind.to_string()),
                ("gamma", sol.gamma.to_string()),
            ];
            ctx.write(&name, &field_dump(&sol.solution, &meta))?;
            dumps.push(name);
            solutions.push((cp.kind.to_string(), sol));
        }
    }
    let rows: Vec<SolutionRow<'_>> = solutions
        .iter()
        .map(|(k, s)| SolutionRow {
            kind: k,
            solution: s,
        })
        .collect();
    ctx.write("solutions.csv", &solutions_csv(n, &rows)?)?;
    for (k, s) in &solutions {
        report.checks.push(
            CheckRow::new(
                format!("residual eps = {} {k} at mu = {:.4}", s.eps, s.bubble.mu()),
                s.residual_perp,
                s.residual_perp.is_finite() && s.residual_tangent.is_finite(),
            )
            .detail(format!("tangent {:e}, gamma {:e}", s.residual_tangent, s.gamma)),
        );
    }
    report.data = json!({
        "critical_points": found.points,
        "grad_tol": found.grad_tol,
        "merge_radius": found.merge_radius,
        "field_dumps": dumps,
    });
    let exit = if found.points.is_empty() { Exit::NoSolution } else { Exit::Ok };
    Ok(Outcome { report, exit })
}

/// Invariants that hold for any admissible configuration.
pub fn verify(ctx: &Context) -> Result<Outcome, CliError> {
    let mut report = RunReport::new("verify", &ctx.config);
    let cfg = &ctx.config;
    let dim = cfg.dim()?;
    let n = dim.n();
    let m = ctx.melnikov()?;
    let basis = m.basis().clone();
    let core = |e: singlepeak_core::Error| CliError::Core(e);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let norms = bubble_norms(dim).map_err(|e| core(e.into()))?;
    let nehari = (norms.dirichlet - norms.l2star).abs() / norms.dirichlet;
    report
        .checks
        .push(CheckRow::new("nehari identity", nehari, nehari < 1e-8).tolerance(1e-8).detail("|dirichlet - critical| / dirichlet"));

    let mut g1_max = 0.0f64;
    for _ in 0..10 {
        let sigma = rng.random_range(0.0..std::f64::consts::TAU);
        let mu = 10f64.powf(rng.random_range(-1.0..1.0));
        let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = Bubble::new(sigma, mu, xi).map_err(|e| core(e.into()))?;
        let u = bubble_field(&b, &basis).map_err(|e| core(e.into()))?;
        let s = PotentialSamples::new(&basis, &b.frame(), m.potentials());
        g1_max = g1_max.max(g1(&u, &s).map_err(|e| core(e.into()))?.abs());
    }
    report
        .checks
        .push(CheckRow::new("first-order term vanishes on bubbles", g1_max, g1_max < 1e-7).tolerance(1e-7).detail("max over 10 bubbles"));

    let k = m.hessian().kernel_dimension_check();
    report.checks.push(
        CheckRow::new("kernel dimension", k.total() as f64, k.imag_kernel == 1 && k.real_kernel == n + 1)
            .reference((n + 2) as f64)
            .detail(format!("imaginary {}, real {}", k.imag_kernel, k.real_kernel)),
    );

    let rel = translation_solve_error(m.hessian(), dim, &[0.3, -0.5, 0.2, 0.7, 1.0])?;
    report
        .checks
        .push(CheckRow::new("translation source solve", rel, rel < 1e-4).tolerance(1e-4).detail("relative E-norm error"));

    let xi: Vec<f64> = (0..n).map(|k| if k == 0 { 0.4 } else { 0.1 * k as f64 }).collect();
    let g0 = m.gamma_at(&Bubble::new(0.0, 0.8, xi.clone()).map_err(|e| core(e.into()))?).map_err(|e| core(e.into()))?;
    let g1s = m.gamma_at(&Bubble::new(1.3, 0.8, xi.clone()).map_err(|e| core(e.into()))?).map_err(|e| core(e.into()))?;
    let phase = (g0.gamma - g1s.gamma).abs() / g0.gamma.abs().max(f64::MIN_POSITIVE);
    report.checks.push(CheckRow::new("phase invariance of gamma", phase, phase < 1e-10).tolerance(1e-10));

    let c = m.correction(&Bubble::new(0.0, 0.8, xi.clone()).map_err(|e| core(e.into()))?).map_err(|e| core(e.into()))?;
    let consistency = if c.spectral_part == 0.0 {
        c.correction_part.abs()
    } else {
        (c.correction_part - c.spectral_part).abs() / c.spectral_part.abs()
    };
    report.checks.push(
        CheckRow::new("correction term two forms agree", consistency, consistency < 1e-8)
            .tolerance(1e-8)
            .detail(format!("{:e} vs {:e}", c.correction_part, c.spectral_part)),
    );

    let b = Bubble::new(0.4, 1.2, xi.clone()).map_err(|e| core(e.into()))?;
    let s0 = assemble_at(&m, &b, 0.0, cfg.alpha).map_err(|e| core(e.into()))?;
    let res0 = s0.residual_perp.max(s0.residual_tangent);
    report
        .checks
        .push(CheckRow::new("unperturbed bubble residual", res0, res0 < 1e-7).tolerance(1e-7).detail("eps = 0"));

    let eps = cfg.epsilon[0];
    let sa = assemble_at(&m, &Bubble::new(0.5, 0.9, xi.clone()).map_err(|e| core(e.into()))?, eps, cfg.alpha)
        .map_err(|e| core(e.into()))?;
    let sb = assemble_at(&m, &Bubble::new(1.7, 0.9, xi.clone()).map_err(|e| core(e.into()))?, eps, cfg.alpha)
        .map_err(|e| core(e.into()))?;
    let rotated = sa.solution.scale(Complex64::from_polar(1.0, 1.2));
    let cov = rotated
        .axpy(Complex64::new(-1.0, 0.0), &sb.solution)
        .and_then(|d| Ok(d.e_norm()? / sb.solution.e_norm()?))
        .map_err(|e| core(e.into()))?;
    report.checks.push(CheckRow::new("assembly phase covariance", cov, cov < 1e-10).tolerance(1e-10));

    let samples = PotentialSamples::new(&basis, &sb.bubble.frame(), m.potentials());
    let (plain, magnetic) = diamagnetic_pair(&sb.solution, &samples, eps).map_err(|e| core(e.into()))?;
    report.checks.push(
        CheckRow::new("diamagnetic inequality", plain, plain <= magnetic * (1.0 + 1e-10))
            .reference(magnetic)
            .detail("int |grad |u||^2 against the magnetic kinetic energy"),
    );

    let gauge = PotentialSpec {
        strength: Some(0.7),
        ..PotentialSpec::family("gradient-gaussian")
    }
    .magnetic(dim, Path::new("."))
    .map_err(|e| core(e.into()))?;
    let pot = PotentialPair::new(gauge, singlepeak_core::ElectricPotential::zero(dim));
    let mg = Melnikov::with_hessian(Arc::clone(m.hessian()), pot, cfg.g2_rule());
    let g = mg.gamma(0.7, &xi).map_err(|e| core(e.into()))?;
    let ratio = g.gamma.abs() / g.g2_part;
    report.checks.push(
        CheckRow::new("pure gauge potential has no reduced function", ratio, ratio < 1e-4)
            .tolerance(1e-4)
            .detail("|Gamma| / G2 for A = grad of a gaussian"),
    );

    let exit = if report.all_pass() { Exit::Ok } else { Exit::CheckFailed };
    Ok(Outcome { report, exit })
}

/// Relative E-norm error of L_z on (2/i) grad z0 . a against i z0 a.x.
pub fn translation_solve_error(h: &BlockDiagonalHessian, dim: singlepeak_core::Dimension, a: &[f64]) -> Result<f64, CliError> {
    let basis = h.basis();
    let b = Bubble::unit(dim);
    let p = UnitProfile::new(dim);
    let norm = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dot = |y: &[f64]| y.iter().zip(a).map(|(y, a)| y * a).sum::<f64>();
    let k = ComplexField::from_unit_fn(basis, b.frame(), FieldKind::Dual, |y| {
        Complex64::new(0.0, -2.0 * p.d1_over_r(norm(y)) * dot(y))
    });
    let exact = ComplexField::from_unit_fn(basis, b.frame(), FieldKind::Primal, |y| {
        Complex64::new(0.0, p.value(norm(y)) * dot(y))
    });
    let sol = h.apply_lz(&b, &k).map_err(|e| CliError::Core(e.into()))?;
    let diff = sol
        .phi
        .axpy(Complex64::new(-1.0, 0.0), &exact)
        .map_err(|e| CliError::Core(e.into()))?;
    let num = diff.e_norm().map_err(|e| CliError::Core(e.into()))?;
    let den = exact.e_norm().map_err(|e| CliError::Core(e.into()))?;
    Ok(num / den)
}

pub fn run_command(cmd: crate::Command, ctx: &Context) -> Result<Outcome, CliError> {
    match cmd {
        crate::Command::CheckPotentials => check_potentials(ctx),
        crate::Command::Scan => scan_cmd(ctx),
        crate::Command::Asymptotics => asymptotics(ctx),
        crate::Command::Solve => solve(ctx),
        crate::Command::Verify => verify(ctx),
    }
}

/// Writes the report next to the other outputs.
pub fn write_report(ctx: &Context, report: &RunReport) -> Result<PathBuf, CliError> {
    ctx.write(&format!("{}.json", report.command), &report.to_json()?)
}
