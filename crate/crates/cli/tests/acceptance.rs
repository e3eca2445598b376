//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line with
//! its measured runtime; the test fails if any criterion fails.

use std::fs;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdstab::liecalc::{
    check_corollary1_point, check_prop1_point, default_vars, lie_bracket, parse_scalar_field, parse_vector_field,
    Clause, IntegratorRegion, ScalarFieldExpr, VectorFieldExpr,
};
use sdstab::patchwork::{boundary_samples, verify_patchwork, Region};
use sdstab::sampling::ball_points;
use sdstab::sdfctl::{certify_decrease, excursion_ratios, run_closed_loop, CertificateV, SampledController};
use sdstab::synth::{solve_lyapunov, spectral_abscissa, synthesize_gain};
use sdstab::sysmodel::{make_uniform_partition, state_linear_as_general, SamplingPartition};
use sdstab::{Error, FrozenGain, IntegrationConfig, Matrix, StateLinearSystem};
use sdstab_cli::build::{self, Plant};
use sdstab_cli::registry::example;
use sdstab_cli::{check_patchwork, simulate};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, span: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-span..span))
}

fn frob(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `exp(M)` by scaling and squaring a degree-20 Taylor polynomial.
fn expm(m: &Matrix) -> Matrix {
    let n = m.rows();
    let norm = m.as_slice().iter().map(|v| v.abs()).sum::<f64>();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m.scale(0.5f64.powi(s));
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=20 {
        term = (&term * &a).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn lyapunov_residual() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = 1 + case % 6;
        let m = rand_matrix(&mut rng, n, n, 2.0);
        // shift past the Gershgorin discs
        let r = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let shift = r + rng.random_range(0.05..1.0);
        let a = Matrix::from_fn(n, n, |i, j| m[(i, j)] - if i == j { shift } else { 0.0 });
        let c = rand_matrix(&mut rng, n, n, 1.0);
        let q = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| c[(k, i)] * c[(k, j)]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }
        });
        let p = solve_lyapunov(&a, &q).map_err(|e| format!("case {case}: {e}"))?;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut v = q[(i, j)];
                for k in 0..n {
                    v += a[(k, i)] * p[(k, j)] + p[(i, k)] * a[(k, j)];
                }
                s += v * v;
            }
        }
        let rel = s.sqrt() / (1.0 + frob(&q));
        worst = worst.max(rel);
        ensure(rel <= 1e-10, || format!("case {case} (n = {n}): residual/(1+|Q|) = {rel:e}"))?;
    }
    Ok(format!("100 cases, max residual/(1+|Q|) = {worst:e} <= 1e-10"))
}

fn gain_synthesis() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..100 {
        let n = 1 + case % 5;
        let m = 1 + case % 2;
        let a = rand_matrix(&mut rng, n, n, 2.0);
        let b = rand_matrix(&mut rng, n, m, 2.0);
        let r = synthesize_gain(&a, &b).map_err(|e| format!("case {case}: {e}"))?;
        let s = spectral_abscissa(&r.closed_loop(&a, &b)).map_err(|e| e.to_string())?;
        worst = worst.max(s);
        ensure(s < -1e-8, || format!("case {case}: abscissa {s:e}"))?;
    }
    let mut err = 0.0f64;
    for _ in 0..50 {
        let a: f64 = rng.random_range(-3.0..3.0);
        let b: f64 = rng.random_range(0.5..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let r = synthesize_gain(&Matrix::scalar(a), &Matrix::scalar(b)).map_err(|e| e.to_string())?;
        // 2ax − b²x² + 1 = 0, stabilizing root; F = −bx
        let x = (a + (a * a + b * b).sqrt()) / (b * b);
        err = err.max((r.gain[(0, 0)] + b * x).abs()).max((r.riccati[(0, 0)] - x).abs());
    }
    ensure(err <= 1e-10, || format!("scalar Riccati error {err:e}"))?;
    Ok(format!("max abscissa {worst:e} < -1e-8; scalar closed-form error {err:e} <= 1e-10"))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> String {
    let terms: Vec<String> = (0..rng.random_range(1..=4))
        .map(|_| {
            let mut t = format!("({:.6})", rng.random_range(-1.0..1.0));
            for _ in 0..rng.random_range(0..=3) {
                t.push_str(&format!("*x{}", rng.random_range(1..=n)));
            }
            t
        })
        .collect();
    terms.join(" + ")
}

fn lie_calculus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut anti, mut jac) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let vars = default_vars(n);
        let mut field = || -> VectorFieldExpr {
            let c: Vec<String> = (0..n).map(|_| random_poly(&mut rng, n)).collect();
            parse_vector_field(&c, &vars).unwrap()
        };
        let (x, y, z) = (field(), field(), field());
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let ev = |f: &VectorFieldExpr| -> Vec<f64> { f.eval(&p).unwrap() };
        let br = |a: &VectorFieldExpr, b: &VectorFieldExpr| lie_bracket(a, b).unwrap();
        let xy = ev(&br(&x, &y));
        let yx = ev(&br(&y, &x));
        let j1 = ev(&br(&x, &br(&y, &z)));
        let j2 = ev(&br(&y, &br(&z, &x)));
        let j3 = ev(&br(&z, &br(&x, &y)));
        for i in 0..n {
            anti = anti.max((xy[i] + yx[i]).abs());
            jac = jac.max((j1[i] + j2[i] + j3[i]).abs());
        }
    }
    ensure(anti <= 1e-8 && jac <= 1e-8, || format!("antisymmetry {anti:e}, Jacobi {jac:e}"))?;

    type Oracle = fn(&[f64]) -> Vec<f64>;
    let fixtures: [(&[&str], &[&str], &[&str], Oracle); 5] = [
        (&["x", "y"], &["y", "0"], &["0", "1"], |_| vec![-1.0, 0.0]),
        (&["x1", "x2"], &["x2", "0"], &["0", "x1"], |p| vec![-p[0], p[1]]),
        (&["x1", "x2"], &["x2", "x1^3"], &["0", "x1"], |p| vec![-p[0], p[1]]),
        (&["x1", "x2", "x3"], &["x2*x3", "0", "0"], &["0", "0", "x1"], |p| vec![-p[0] * p[1], 0.0, p[1] * p[2]]),
        (&["x"], &["x^2"], &["sin(x)"], |p| vec![p[0].cos() * p[0] * p[0] - 2.0 * p[0] * p[0].sin()]),
    ];
    let mut fix = 0.0f64;
    for (vars, f, g, want) in fixtures {
        let b = lie_bracket(&parse_vector_field(f, vars).unwrap(), &parse_vector_field(g, vars).unwrap()).unwrap();
        for _ in 0..20 {
            let p: Vec<f64> = (0..vars.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got: Vec<f64> = b.eval(&p).unwrap();
            for (u, v) in got.iter().zip(want(&p)) {
                fix = fix.max((u - v).abs());
            }
        }
    }
    ensure(fix <= 1e-9, || format!("fixture mismatch {fix:e}"))?;
    Ok(format!("antisymmetry {anti:e}, Jacobi {jac:e} (<= 1e-8); 5 fixtures within {fix:e} (<= 1e-9)"))
}

/// Allowed pointwise and feedback-integrator clauses on the double integrator
/// at grid point `(i, j)/10`.
fn chart(i: i32, j: i32) -> (Vec<Clause>, Vec<Clause>) {
    use Clause::*;
    if j == 0 {
        (vec![OddBracket], vec![IntegratorBracket])
    } else if i * j < 0 && j.abs() < i.abs() {
        (vec![DriftDecrease], vec![IntegratorDecrease])
    } else if i * j < 0 && j.abs() == i.abs() {
        // on the diagonal the point sits on both region boundaries
        (vec![DriftDecrease, InputDerivative], vec![IntegratorDecrease, IntegratorGradient])
    } else {
        (vec![InputDerivative], vec![IntegratorGradient])
    }
}

fn prop1_chart() -> Verdict {
    let cfg = example("double-integrator").map_err(|e| e.to_string())?;
    let Plant::Integrator(fi, affine) = build::plant(cfg.system().unwrap()).map_err(|e| e.to_string())? else {
        return Err("double integrator is not an integrator system".into());
    };
    let vars = ["x", "y"];
    let spec = cfg.check_lie.as_ref().unwrap();
    let region = |s: &str| Region::parse(s, &vars, vec![-4.0, -4.0], vec![4.0, 4.0]).unwrap();
    let pieces: Vec<(ScalarFieldExpr, Region)> = spec
        .pieces
        .iter()
        .map(|p| (parse_scalar_field(&p.v, &vars).unwrap(), region(&p.region)))
        .collect();
    let cor = spec.integrator.as_ref().unwrap();
    let (v, w) = (parse_scalar_field(&cor.v, &vars).unwrap(), parse_scalar_field(&cor.w, &vars).unwrap());
    let (d1, d2) = (region(&cor.d1), region(&cor.d2));
    let (mut points, mut fails, mut off_chart) = (0, 0, Vec::new());
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    for i in -20..=20 {
        for j in -20..=20 {
            if i == 0 && j == 0 {
                continue;
            }
            points += 1;
            let p = [i as f64 / 10.0, j as f64 / 10.0];
            let (want1, want2) = chart(i, j);
            let k = pieces
                .iter()
                .position(|(_, r)| r.contains(&p))
                .or_else(|| pieces.iter().position(|(_, r)| r.in_closure(&p)))
                .ok_or_else(|| format!("{p:?} uncovered"))?;
            let c = check_prop1_point(&affine, &pieces[k].0, &p, spec.n_max).map_err(|e| e.to_string())?.clause;
            *counts.entry(c.label()).or_default() += 1;
            fails += usize::from(c.is_fail());
            if !want1.contains(&c) {
                off_chart.push(format!("{p:?}: {c}"));
            }
            let mut any = false;
            for (reg, inside) in [(IntegratorRegion::D1, d1.in_closure(&p)), (IntegratorRegion::D2, d2.contains(&p))] {
                if inside {
                    any = true;
                    let c = check_corollary1_point(&fi, &v, &w, reg, &p).map_err(|e| e.to_string())?.clause;
                    *counts.entry(c.label()).or_default() += 1;
                    fails += usize::from(c.is_fail());
                    if !want2.contains(&c) {
                        off_chart.push(format!("{p:?}: {c}"));
                    }
                }
            }
            ensure(any, || format!("{p:?} in neither cl(D1) nor D2"))?;
        }
    }
    ensure(points == 1680, || format!("{points} grid points"))?;
    ensure(fails == 0 && off_chart.is_empty(), || {
        format!("{fails} FAIL, off chart: {:?}", &off_chart[..off_chart.len().min(5)])
    })?;
    Ok(format!("{points} points, zero FAIL, counts {counts:?}"))
}

fn lti_consistency() -> Verdict {
    let systems = [
        (
            Matrix::from_f64_rows(&[&[0.0, 1.0], &[2.0, -1.0]]),
            Matrix::from_f64_rows(&[&[0.0], &[1.0]]),
            vec![1.0, -0.5],
        ),
        (
            Matrix::from_f64_rows(&[&[0.5, 1.0, 0.0], &[0.0, 0.0, 1.0], &[-1.0, 0.3, 0.2]]),
            Matrix::from_f64_rows(&[&[0.0, 1.0], &[0.0, 0.0], &[1.0, 0.0]]),
            vec![0.7, -1.2, 0.4],
        ),
    ];
    let cfg = IntegrationConfig::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (a, b, x0) in &systems {
        let acl = synthesize_gain(a, b).map_err(|e| e.to_string())?.closed_loop(a, b);
        let sys = StateLinearSystem::lti(a.clone(), b.clone()).unwrap();
        let plant = state_linear_as_general(&sys);
        let ctrl = FrozenGain::new(sys, cfg).unwrap();
        for h in [0.01, 0.1, 0.5] {
            let parts = [
                make_uniform_partition(h, 1).unwrap(),
                SamplingPartition::new(vec![0.0, 0.07, 0.1, 0.33], Some(h)).unwrap(),
            ];
            for part in &parts {
                let run = run_closed_loop(&plant, &ctrl, part, x0, 3.0, &cfg).map_err(|e| e.to_string())?;
                ensure(run.aborted.is_none() && run.escaped().is_none(), || format!("h = {h}: run incomplete"))?;
                let mut instants: Vec<(f64, &[f64])> = run.records.iter().map(|r| (r.start, r.xi.as_slice())).collect();
                instants.push((run.trajectory.final_time(), run.trajectory.final_state()));
                for (t, x) in instants {
                    let want = expm(&acl.scale(t)).mat_vec(x0);
                    for (g, w) in x.iter().zip(&want) {
                        worst = worst.max((g - w).abs());
                    }
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!("{count} sample instants, max deviation {worst:e} <= 1e-6"))
}

struct StatedepRuns {
    plant: sdstab::GeneralSystem,
    ctrl: std::sync::Arc<dyn SampledController<f64>>,
    cfg: IntegrationConfig,
    runs: Vec<sdstab::ClosedLoopRun>,
}

fn statedep_runs() -> Result<StatedepRuns, String> {
    let cfg = example("statedep-2d").map_err(|e| e.to_string())?;
    let plant = build::plant(cfg.system().unwrap()).map_err(|e| e.to_string())?;
    let ctrl = build::controller(&cfg, &plant).map_err(|e| e.to_string())?;
    let general = plant.general().map_err(|e| e.to_string())?;
    let integ = build::integration(&cfg.integrator()).map_err(|e| e.to_string())?;
    let part = make_uniform_partition(0.05, 1).unwrap();
    let runs = [[2.0, -1.0], [-1.5, 1.5], [0.5, 2.0]]
        .iter()
        .map(|x0| run_closed_loop(&general, ctrl.as_ref(), &part, x0, 10.0, &integ).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StatedepRuns {
        plant: general,
        ctrl,
        cfg: integ,
        runs,
    })
}

fn statedep_end_to_end(s: &StatedepRuns) -> Verdict {
    let mut notes = Vec::new();
    for run in &s.runs {
        let x0 = &run.trajectory.states[0];
        ensure(run.aborted.is_none() && run.escaped().is_none(), || format!("{x0:?}: run incomplete"))?;
        let xf = run.trajectory.final_state();
        let nf = xf.iter().map(|v| v * v).sum::<f64>().sqrt();
        ensure(nf <= 1e-2, || format!("{x0:?}: |x(10)| = {nf:e}"))?;
        let cert = certify_decrease(run, &CertificateV::PerSample, &sdstab::patchwork::Envelope::double())
            .map_err(|e| e.to_string())?;
        let lmin = cert.intervals.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
        ensure(cert.passed && lmin > 0.0, || {
            format!("{x0:?}: certificate failed, min L_k = {lmin:e}, first failure {:?}", cert.first_failure())
        })?;
        notes.push(format!("|x(10)| = {nf:.2e}, min L_k = {lmin:.2e}"));
    }
    Ok(notes.join("; "))
}

fn excursion_bound(s: &StatedepRuns) -> Verdict {
    let mut worst = 1.0f64;
    let mut tested = 0;
    for run in &s.runs {
        for r in &run.records {
            let c = excursion_ratios(&s.plant, s.ctrl.as_ref(), &r.xi, r.length(), &s.cfg).map_err(|e| e.to_string())?;
            let hi = c.iter().copied().fold(0.0, f64::max);
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            ensure(lo > 0.0 && hi <= 2.0 * lo, || format!("xi = {:?}: C = {c:?}", r.xi))?;
            worst = worst.max(hi / lo);
            tested += 1;
        }
    }
    Ok(format!("{tested} sampled states, max C spread {worst:.4} <= 2"))
}

fn patchwork_verification() -> Verdict {
    let cfg = example("patchwork-halfplanes").map_err(|e| e.to_string())?;
    let w = build::patchwork(&cfg).map_err(|e| e.to_string())?;
    let rep = verify_patchwork(&w, 2.0, 10_000, cfg.seed()).map_err(|e| e.to_string())?;
    for name in ["sandwich", "distinctness", "usc", "active-index"] {
        let c = rep.check(name).ok_or_else(|| format!("no {name} check"))?;
        ensure(c.passed && c.tested > 0, || format!("{name}: {c:?}"))?;
    }
    ensure(rep.passed(), || format!("{} failing checks", rep.failures()))?;
    let fam = w.family();
    let pts = ball_points::<f64>(2, 2.0, 4000, 77);
    let samples = boundary_samples(fam.pieces(), &pts);
    ensure(samples.len() >= 1000, || format!("only {} boundary samples", samples.len()))?;
    for s in samples.iter().take(1000) {
        let oracle = fam
            .pieces()
            .iter()
            .zip(fam.offsets())
            .filter(|(p, _)| p.region.in_closure(&s.point))
            .map(|(p, c)| p.v.eval::<f64>(&s.point).unwrap() + c)
            .reduce(f64::max);
        let got = w.value(&s.point).map_err(|e| e.to_string())?;
        ensure(Some(got) == oracle, || format!("{:?}: W = {got:e}, oracle {oracle:?}", s.point))?;
    }
    Ok(format!(
        "{} samples, {} boundary points, all checks pass; W equals the max oracle at 1000 boundary samples",
        rep.samples, rep.boundary_points
    ))
}

fn negative_controls() -> Verdict {
    // equal offsets on equal pieces
    let mut cfg = example("patchwork-halfplanes").map_err(|e| e.to_string())?;
    cfg.patchwork.as_mut().unwrap().offsets = Some(vec![0.1, 0.1]);
    let w = build::patchwork(&cfg).map_err(|e| e.to_string())?;
    let rep = verify_patchwork(&w, 2.0, 10_000, cfg.seed()).map_err(|e| e.to_string())?;
    let d = rep.check("distinctness").unwrap();
    let x = d.witness.clone().ok_or("distinctness failed without a witness")?;
    ensure(!d.passed && x[0].abs() < 1e-6, || format!("distinctness: {d:?}"))?;
    let out = check_patchwork(&cfg).map_err(|e| e.to_string())?;
    ensure(!out.passed && out.exit_code() == 1, || "check-patchwork passed with c1 = c2".into())?;

    // zero controller on the double integrator
    let cfg = example("double-integrator").map_err(|e| e.to_string())?;
    let plant = build::plant(cfg.system().unwrap()).map_err(|e| e.to_string())?;
    let ctrl = build::controller(&cfg, &plant).map_err(|e| e.to_string())?;
    let run = run_closed_loop(
        &plant.general().unwrap(),
        ctrl.as_ref(),
        &make_uniform_partition(0.1, 1).unwrap(),
        &[1.0, 0.0],
        5.0,
        &IntegrationConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let v = |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]);
    let cert = certify_decrease(&run, &CertificateV::Function(&v), &sdstab::patchwork::Envelope::double())
        .map_err(|e| e.to_string())?;
    ensure(!cert.passed, || "zero controller certified".into())?;
    let out = simulate(&cfg, None).map_err(|e| e.to_string())?;
    ensure(!out.passed, || "simulate passed with the zero controller".into())?;

    // A = 1, B = 0
    match synthesize_gain(&Matrix::scalar(1.0), &Matrix::scalar(0.0)) {
        Err(Error::NotStabilizable { .. }) => {}
        other => return Err(format!("A = 1, B = 0 gave {other:?}")),
    }
    Ok(format!(
        "c1 = c2 distinctness witness {x:?}; zero controller fails ({} failing intervals); A = 1, B = 0 not stabilizable",
        cert.failures()
    ))
}

fn determinism() -> Verdict {
    let mut compared = 0;
    for name in ["statedep-2d", "patchwork-halfplanes"] {
        let cfg = example(name).map_err(|e| e.to_string())?;
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let outs = dirs
            .iter()
            .map(|d| simulate(&cfg, Some(d.path())).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(outs[0].files.len() == outs[1].files.len() && !outs[0].files.is_empty(), || {
            format!("{name}: file lists differ")
        })?;
        ensure(outs[0].report == outs[1].report, || format!("{name}: reports differ"))?;
        for (a, b) in outs[0].files.iter().zip(&outs[1].files) {
            ensure(a.file_name() == b.file_name(), || format!("{a:?} vs {b:?}"))?;
            ensure(fs::read(a).unwrap() == fs::read(b).unwrap(), || format!("{a:?} differs"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} CSV files byte-identical across two runs"))
}

/// Writes through the process stdout handle so the lines survive the test
/// harness's output capture.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

fn timed(id: usize, budget: Option<f64>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = f();
    let secs = start.elapsed().as_secs_f64();
    let over = budget.is_some_and(|b| Duration::from_secs_f64(secs) > Duration::from_secs_f64(b));
    let budget_txt = budget.map_or(String::new(), |b| format!(" (budget {b} s)"));
    let ok = verdict.is_ok() && !over;
    let detail = match &verdict {
        Ok(s) => s.clone(),
        Err(e) => e.clone(),
    };
    let over_txt = if over { "; over runtime budget" } else { "" };
    report(&format!(
        "criterion {id}: {} [{secs:.2} s{budget_txt}] {detail}{over_txt}",
        if ok { "PASS" } else { "FAIL" }
    ));
    ok
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    results.push(timed(1, Some(5.0), lyapunov_residual));
    results.push(timed(2, Some(5.0), gain_synthesis));
    results.push(timed(3, Some(10.0), lie_calculus));
    results.push(timed(4, Some(10.0), prop1_chart));
    results.push(timed(5, Some(5.0), lti_consistency));
    let mut runs = None;
    results.push(timed(6, Some(30.0), || {
        let r = statedep_runs()?;
        let verdict = statedep_end_to_end(&r);
        runs = Some(r);
        verdict
    }));
    results.push(timed(7, Some(10.0), patchwork_verification));
    results.push(timed(8, Some(10.0), || match &runs {
        Some(r) => excursion_bound(r),
        None => Err("criterion-6 runs unavailable".into()),
    }));
    results.push(timed(9, Some(5.0), negative_controls));
    results.push(timed(10, None, determinism));
    let failed = results.iter().filter(|ok| !**ok).count();
    report(&format!("acceptance: {} of {} criteria pass", results.len() - failed, results.len()));
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
