use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sdstab::liecalc::{
    check_corollary1_point, check_prop1_point, parse_scalar_field, ConditionReport, IntegratorRegion, ScalarFieldExpr,
};
use sdstab::patchwork::{verify_patchwork, Active, Envelope, PatchworkW, Region};
use sdstab::sampling::{ball_points, box_points};
use sdstab::sdfctl::{certify_decrease, run_closed_loop, CertificateV, FrozenGain};
use sdstab::synth::uniform_bounds;
use sdstab::sysmodel::{make_uniform_partition, SamplingPartition};
use sdstab::{ClosedLoopRun, DecreaseCertificate, Error};

use crate::build::{self, Plant};
use crate::config::{invalid, ExperimentConfig, LyapunovSpec, SystemKind};
use crate::output::{certificate_csv, num, trajectory_csv, vec_str, write_file, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synthesize,
    Simulate,
    CheckLie,
    CheckPatchwork,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            crate::EXIT_PASS
        } else {
            crate::EXIT_FAIL
        }
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    match cmd {
        Command::Synthesize => synthesize(cfg),
        Command::Simulate => simulate(cfg, out),
        Command::CheckLie => check_lie(cfg),
        Command::CheckPatchwork => check_patchwork(cfg),
    }
}

fn outcome(report: Report, files: Vec<PathBuf>) -> Outcome {
    let (report, passed) = report.finish();
    Outcome { report, passed, files }
}

fn matrix_rows(m: &sdstab::Matrix) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|i| vec_str(m.row(i))).collect();
    format!("[{}]", rows.join(", "))
}

/// Frozen-gain synthesis at the configured points with uniform bounds on
/// `P(ξ)` over the ball.
pub fn synthesize(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let Plant::StateLinear(sys) = build::plant(cfg.system()?)? else {
        return Err(invalid("synthesize needs a state-linear system").into());
    };
    let spec = cfg.synthesize.clone().unwrap_or_default();
    let n = sys.dim_state();
    let points = match (&spec.points, spec.radius) {
        (Some(p), _) => p.clone(),
        (None, Some(r)) => ball_points(n, r, spec.samples, cfg.seed()),
        (None, None) => vec![vec![0.0; n]],
    };
    let ctrl = FrozenGain::new(sys.clone(), build::integration(&cfg.integrator())?)?;
    let mut rep = Report::default();
    rep.line(format!("synthesize: {} point(s), n = {n}, m = {}", points.len(), sys.dim_input()));
    for xi in &points {
        if xi.len() != n {
            return Err(invalid(format!("point {xi:?} has the wrong dimension")).into());
        }
        match ctrl.synthesize(xi) {
            Ok(s) => {
                rep.check(true, format!("xi = {} stabilizable", vec_str(xi)));
                rep.line(format!("  F = {}", matrix_rows(&s.gain)));
                rep.line(format!("  P = {}", matrix_rows(&s.lyapunov)));
                rep.line(format!("  k = {}  abscissa = {}", num(s.decay), num(s.abscissa)));
            }
            Err(e @ Error::NotStabilizable { .. }) => {
                rep.check(false, format!("xi = {} not stabilizable: {e}", vec_str(xi)));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(r) = spec.radius {
        if rep.failures() == 0 {
            match uniform_bounds(|xi: &[f64]| Ok(ctrl.synthesize(xi)?.lyapunov), n, r, spec.samples, cfg.seed()) {
                Ok(b) => {
                    rep.check(
                        b.c_low > 0.0 && b.c_high.is_finite(),
                        format!(
                            "uniform bounds Eq.(45c) on B[0, {}]: c = {}, C = {} ({} samples)",
                            num(r),
                            num(b.c_low),
                            num(b.c_high),
                            spec.samples
                        ),
                    );
                }
                Err(e @ Error::NotStabilizable { .. }) => {
                    rep.check(false, format!("uniform bounds Eq.(45c): {e}"));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(outcome(rep, Vec::new()))
}

fn partition(cfg: &ExperimentConfig) -> Result<SamplingPartition<f64>, CliError> {
    let spec = cfg
        .partition
        .as_ref()
        .ok_or_else(|| invalid("missing [partition] section"))?;
    Ok(match &spec.prefix {
        Some(p) => SamplingPartition::new(p.clone(), Some(spec.h))?,
        None => make_uniform_partition(spec.h, 1)?,
    })
}

enum CertFn {
    PerSample,
    Expr(ScalarFieldExpr),
    Patchwork(PatchworkW),
}

struct RunResult {
    run: ClosedLoopRun,
    cert: Result<DecreaseCertificate, Error>,
}

/// Closed-loop runs from every initial state with decrease certificates;
/// CSVs go to `out` when given.
pub fn simulate(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let sys_spec = cfg.system()?;
    let plant = build::plant(sys_spec)?;
    let general = plant.general()?;
    let ctrl = build::controller(cfg, &plant)?;
    let spec = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| invalid("missing [simulate] section"))?;
    let part = partition(cfg)?;
    let integ = build::integration(&cfg.integrator())?;
    let vars = build::variables(sys_spec)?;
    let certf = match &spec.lyapunov {
        LyapunovSpec::PerSample => CertFn::PerSample,
        LyapunovSpec::Patchwork => CertFn::Patchwork(build::patchwork(cfg)?),
        LyapunovSpec::Expr(s) => CertFn::Expr(parse_scalar_field(s, &vars)?),
    };
    if !(spec.comparison > 0.0) {
        return Err(invalid("comparison slope must be positive").into());
    }
    let a = Envelope::power(spec.comparison, 1.0);
    for x0 in &spec.initial {
        if x0.len() != plant.dim() {
            return Err(invalid(format!("initial state {x0:?} has the wrong dimension")).into());
        }
    }

    let results: Vec<Result<RunResult, Error>> = spec
        .initial
        .par_iter()
        .map(|x0| {
            let run = run_closed_loop(&general, ctrl.as_ref(), &part, x0, spec.horizon, &integ)?;
            let cert = match &certf {
                CertFn::PerSample => certify_decrease(&run, &CertificateV::PerSample, &a),
                CertFn::Expr(e) => {
                    let f = |x: &[f64]| e.eval(x).unwrap_or(f64::NAN);
                    certify_decrease(&run, &CertificateV::Function(&f), &a)
                }
                CertFn::Patchwork(w) => certify_decrease(&run, &CertificateV::Patchwork(w), &a),
            };
            Ok(RunResult { run, cert })
        })
        .collect();

    let mut rep = Report::default();
    let mut files = Vec::new();
    rep.line(format!(
        "simulate: controller {}, {} initial state(s), horizon {}",
        ctrl.descriptor(),
        spec.initial.len(),
        num(spec.horizon)
    ));
    for (i, res) in results.into_iter().enumerate() {
        let RunResult { run, cert } = res?;
        let label = i + 1;
        let v_of = |k: usize, x: &[f64]| -> f64 {
            match &certf {
                CertFn::PerSample => run.records[k]
                    .info
                    .lyapunov
                    .as_ref()
                    .map_or(f64::NAN, |p| 0.5 * p.quad_form(x)),
                CertFn::Expr(e) => e.eval(x).unwrap_or(f64::NAN),
                CertFn::Patchwork(w) => match w.eval(x) {
                    Ok((_, Active::Origin)) => 0.0,
                    Ok((_, act)) => {
                        let i = act.index().expect("non-origin");
                        w.family().pieces()[i].v.eval(x).unwrap_or(f64::NAN)
                    }
                    Err(_) => f64::NAN,
                },
            }
        };
        let w = match &certf {
            CertFn::Patchwork(w) => Some(w),
            _ => None,
        };
        if let Some(dir) = out {
            files.push(write_file(dir, &format!("trajectory_{label}.csv"), &trajectory_csv(&run, &v_of, w))?);
        }
        let x0 = &run.trajectory.states[0];
        let xf = run.trajectory.final_state();
        let norm_f = xf.iter().map(|v| v * v).sum::<f64>().sqrt();
        rep.line(format!(
            "run {label}: x0 = {}, {} interval(s) ({} from the uniform tail), final t = {}, final x = {}",
            vec_str(x0),
            run.records.len(),
            run.records.iter().filter(|r| r.from_tail).count(),
            num(run.trajectory.final_time()),
            vec_str(xf)
        ));
        if let Some(e) = &run.aborted {
            rep.check(false, format!("run {label}: controller error: {e}"));
        }
        if let Some(t) = run.escaped() {
            rep.check(false, format!("run {label}: escape at t = {}", num(t)));
        }
        rep.check(
            norm_f <= spec.threshold && run.escaped().is_none() && run.aborted.is_none(),
            format!("run {label}: |x(T)| = {} <= {}", num(norm_f), num(spec.threshold)),
        );
        match cert {
            Ok(cert) => {
                if let Some(dir) = out {
                    files.push(write_file(dir, &format!("certificate_{label}.csv"), &certificate_csv(&cert))?);
                }
                let decrease_fail = cert
                    .intervals
                    .iter()
                    .filter(|m| !m.waived && !(m.margin > 0.0))
                    .count();
                let bound_fail = cert.intervals.iter().filter(|m| !m.bound_ok).count();
                let first = cert.intervals.iter().find(|m| !m.waived && !(m.margin > 0.0));
                rep.check(
                    decrease_fail == 0,
                    format!(
                        "run {label}: decrease Eq.(4a) on {} interval(s), {} failing{}",
                        cert.intervals.len(),
                        decrease_fail,
                        first.map_or(String::new(), |m| format!(
                            "; first at k = {} (T_k = {}, L_k = {})",
                            m.index + 1,
                            num(m.start),
                            num(m.margin)
                        ))
                    ),
                );
                rep.check(
                    bound_fail == 0,
                    format!("run {label}: interval bound Eq.(4b) with a(s) = {}s, {bound_fail} failing", num(spec.comparison)),
                );
                if let Some(l) = cert.uniform_margin {
                    rep.line(format!(
                        "  uniform margin Eq.(6a): L = min L_k = {}; marginal (L_k < 1e-10): {}",
                        num(l),
                        cert.marginal_count()
                    ));
                }
                let cmax = cert.intervals.iter().map(|m| m.excursion_ratio).fold(0.0, f64::max);
                rep.line(format!("  excursion Eq.(5): max C_k = {}", num(cmax)));
            }
            Err(e) => {
                rep.check(false, format!("run {label}: certificate not computed: {e}"));
            }
        }
    }
    Ok(outcome(rep, files))
}

/// `points^n` grid over the box, without the origin.
fn grid(lo: &[f64], hi: &[f64], points: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    let coord = |i: usize, k: usize| {
        if points == 1 {
            0.5 * (lo[i] + hi[i])
        } else {
            lo[i] + (hi[i] - lo[i]) * k as f64 / (points - 1) as f64
        }
    };
    let total = points.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|i| {
                    let k = idx % points;
                    idx /= points;
                    coord(i, k)
                })
                .collect::<Vec<f64>>()
        })
        .map(|mut p: Vec<f64>| {
            // snap grid roundoff so axis points are exact zeros
            for v in &mut p {
                if v.abs() < 1e-12 {
                    *v = 0.0;
                }
            }
            p
        })
        .filter(|p| p.iter().any(|&v| v != 0.0))
        .collect()
}

fn witnesses(r: &ConditionReport) -> String {
    let w: Vec<String> = r.witnesses.iter().map(|(k, v)| format!("{k} = {}", num(*v))).collect();
    w.join(", ")
}

/// Rejects a piece that is not positive at sampled points of its region.
fn check_positive(v: &ScalarFieldExpr, region: &Region, samples: usize, seed: u64) -> Result<(), CliError> {
    let (lo, hi) = region.bounds();
    for x in box_points::<f64>(lo, hi, samples, seed) {
        if region.contains(&x) && !(v.eval(&x)? > 0.0) {
            return Err(invalid(format!(
                "piece is not positive definite on its region: V = {} at {}",
                num(v.eval(&x)?),
                vec_str(&x)
            ))
            .into());
        }
    }
    Ok(())
}

/// Grid classification by the pointwise decrease conditions and, for
/// integrator systems, the feedback-integrator conditions.
pub fn check_lie(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sys_spec = cfg.system()?;
    let plant = build::plant(sys_spec)?;
    let affine = match &plant {
        Plant::Affine(a) | Plant::Integrator(_, a) => a,
        Plant::StateLinear(_) => return Err(invalid("check-lie needs an affine or integrator system").into()),
    };
    let spec = cfg
        .check_lie
        .as_ref()
        .ok_or_else(|| invalid("missing [check_lie] section"))?;
    let vars = build::variables(sys_spec)?;
    let n = vars.len();
    if spec.grid.lo.len() != n || spec.grid.hi.len() != n || spec.grid.points == 0 {
        return Err(invalid("grid box must match the state dimension").into());
    }
    let pad: Vec<f64> = spec.grid.lo.iter().zip(&spec.grid.hi).map(|(a, b)| 0.1 * (b - a) + 1.0).collect();
    let lo: Vec<f64> = spec.grid.lo.iter().zip(&pad).map(|(a, p)| a - p).collect();
    let hi: Vec<f64> = spec.grid.hi.iter().zip(&pad).map(|(a, p)| a + p).collect();
    let region = |src: &str| Region::parse(src, &vars, lo.clone(), hi.clone());

    let pieces = spec
        .pieces
        .iter()
        .map(|p| {
            let e = sdstab::liecalc::parse_expr(&p.v, &vars)?;
            let v = ScalarFieldExpr::lyapunov_candidate(n, e)?;
            let r = region(&p.region)?;
            check_positive(&v, &r, spec.positivity_samples, cfg.seed())?;
            Ok((v, r))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let points = grid(&spec.grid.lo, &spec.grid.hi, spec.grid.points);
    let mut rep = Report::default();
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();

    if !pieces.is_empty() {
        rep.line(format!(
            "pointwise conditions, N_max = {}, {} grid point(s), {} piece(s)",
            spec.n_max,
            points.len(),
            pieces.len()
        ));
        let results: Vec<Result<Option<(usize, ConditionReport)>, Error>> = points
            .par_iter()
            .map(|x| {
                let i = pieces
                    .iter()
                    .position(|(_, r)| r.contains(x))
                    .or_else(|| pieces.iter().position(|(_, r)| r.in_closure(x)));
                match i {
                    Some(i) => Ok(Some((i, check_prop1_point(affine, &pieces[i].0, x, spec.n_max)?))),
                    None => Ok(None),
                }
            })
            .collect();
        for (x, r) in points.iter().zip(results) {
            match r? {
                Some((i, r)) => {
                    *counts.entry(r.clause.label()).or_default() += 1;
                    let n_used = r.n_used.map_or(String::new(), |n| format!(" N = {n}"));
                    rep.check(
                        r.passed(),
                        format!("x = {} piece {} {}{} [{}]", vec_str(x), i + 1, r.clause.label(), n_used, witnesses(&r)),
                    );
                }
                None => {
                    *counts.entry("uncovered").or_default() += 1;
                    rep.check(false, format!("x = {} in no region closure", vec_str(x)));
                }
            }
        }
    }

    if let (Some(c), Plant::Integrator(fi, _)) = (&spec.integrator, &plant) {
        let v = parse_scalar_field(&c.v, &vars)?;
        let w = parse_scalar_field(&c.w, &vars)?;
        let d1 = region(&c.d1)?;
        let d2 = region(&c.d2)?;
        rep.line(format!("feedback-integrator conditions, {} grid point(s)", points.len()));
        for x in &points {
            let mut any = false;
            for (reg, name, inside) in [
                (IntegratorRegion::D1, "D1", d1.in_closure(x)),
                (IntegratorRegion::D2, "D2", d2.contains(x)),
            ] {
                if !inside {
                    continue;
                }
                any = true;
                let r = check_corollary1_point(fi, &v, &w, reg, x)?;
                *counts.entry(r.clause.label()).or_default() += 1;
                rep.check(r.passed(), format!("p = {} {name} {} [{}]", vec_str(x), r.clause.label(), witnesses(&r)));
            }
            if !any {
                *counts.entry("uncovered").or_default() += 1;
                rep.check(false, format!("p = {} in neither cl(D1) nor D2", vec_str(x)));
            }
        }
    } else if spec.integrator.is_some() {
        return Err(invalid("feedback-integrator checks need an integrator system").into());
    }

    rep.line("classification counts:");
    for (k, v) in &counts {
        rep.line(format!("  {k}: {v}"));
    }
    Ok(outcome(rep, Vec::new()))
}

/// Offset selection (unless fixed) and numerical verification of the
/// patchwork function.
pub fn check_patchwork(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = cfg
        .patchwork
        .as_ref()
        .ok_or_else(|| invalid("missing [patchwork] section"))?;
    if let Some(s) = &cfg.system {
        if s.kind == SystemKind::Integrator && spec.lo.len() != build::variables(s)?.len() {
            return Err(invalid("patchwork box dimension differs from the state dimension").into());
        }
    }
    let mut rep = Report::default();
    let w = match build::patchwork(cfg) {
        Ok(w) => w,
        Err(CliError::Core(e @ Error::OffsetSelection { .. })) => {
            rep.check(false, format!("offset selection Eq.(17): {e}"));
            return Ok(outcome(rep, Vec::new()));
        }
        Err(e) => return Err(e),
    };
    let fam = w.family();
    rep.line(format!(
        "patchwork: {} piece(s), offsets {}{}",
        fam.pieces().len(),
        vec_str(fam.offsets()),
        fam.schedule()
            .map_or(" (fixed)".to_string(), |(c0, d)| format!(" (c0 = {}, delta = {})", num(c0), num(d)))
    ));
    let report = verify_patchwork(&w, spec.radius, spec.samples, cfg.seed())?;
    rep.line(format!(
        "verification on B[0, {}]: {} samples, {} boundary point(s)",
        num(report.radius),
        report.samples,
        report.boundary_points
    ));
    let boundary_checks = ["distinctness", "usc", "active-index"];
    for c in &report.checks {
        let vacuous = c.tested == 0 && boundary_checks.contains(&c.name);
        let mut line = format!("{} {}: {} tested", c.name, c.label, c.tested);
        if vacuous {
            line.push_str(" (vacuous: no shared boundary)");
        }
        if let Some(x) = &c.witness {
            line.push_str(&format!("; witness {} {}", vec_str(x), c.detail));
        }
        rep.check(c.passed, line);
    }
    Ok(outcome(rep, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_skips_origin() {
        let g = grid(&[-1.0, -1.0], &[1.0, 1.0], 3);
        assert_eq!(g.len(), 8);
        assert!(g.contains(&vec![0.0, 1.0]));
    }
}
