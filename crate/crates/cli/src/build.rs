//! Turns configuration sections into toolkit objects.

use std::sync::Arc;

use sdstab::liecalc::{default_vars, parse_expr, parse_scalar_field, parse_vector_field, Expr, FeedbackIntegrator};
use sdstab::patchwork::{choose_offsets, Envelope, LyapunovPiece, PatchworkFamily, PatchworkW, Region};
use sdstab::sdfctl::{FrozenGain, Intersample, PatchworkController, SampledController, UserController, ZeroController};
use sdstab::sysmodel::{affine_as_general, state_linear_as_general, AffineSystem};
use sdstab::{GeneralSystem, IntegrationConfig, Matrix, StateLinearSystem};

use crate::config::{invalid, ControllerKindSpec, ExperimentConfig, IntegratorSpec, SystemKind, SystemSpec};
use crate::CliError;

/// Plant in the forms the commands need.
pub enum Plant {
    StateLinear(StateLinearSystem),
    Affine(AffineSystem),
    Integrator(FeedbackIntegrator, AffineSystem),
}

impl Plant {
    pub fn general(&self) -> Result<GeneralSystem, CliError> {
        Ok(match self {
            Plant::StateLinear(s) => state_linear_as_general(s),
            Plant::Affine(s) | Plant::Integrator(_, s) => affine_as_general(s)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Plant::StateLinear(s) => s.dim_state(),
            Plant::Affine(s) | Plant::Integrator(_, s) => s.dim(),
        }
    }

    pub fn dim_input(&self) -> usize {
        match self {
            Plant::StateLinear(s) => s.dim_input(),
            _ => 1,
        }
    }
}

fn required<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| invalid(format!("system needs '{what}'")).into())
}

/// State dimension implied by the system section.
fn spec_dim(spec: &SystemSpec) -> Result<usize, CliError> {
    Ok(match spec.kind {
        SystemKind::StateLinear => required(&spec.a, "a")?.len(),
        SystemKind::Affine => required(&spec.drift, "drift")?.len(),
        SystemKind::Integrator => required(&spec.map, "map")?.len() + 1,
    })
}

/// Variable names: explicit, or `x1..xn` (with `y` last for integrators).
pub fn variables(spec: &SystemSpec) -> Result<Vec<String>, CliError> {
    let n = spec_dim(spec)?;
    let vars = match &spec.vars {
        Some(v) => v.clone(),
        None if spec.kind == SystemKind::Integrator => {
            let mut v = default_vars(n - 1);
            v.push("y".into());
            v
        }
        None => default_vars(n),
    };
    if vars.len() != n {
        return Err(invalid(format!("expected {n} variable names, got {}", vars.len())).into());
    }
    Ok(vars)
}

fn matrix_exprs(rows: &[Vec<String>], vars: &[String], r: usize, what: &str) -> Result<Vec<Vec<Expr>>, CliError> {
    if rows.len() != r || rows.is_empty() {
        return Err(invalid(format!("'{what}' needs {r} rows")).into());
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(invalid(format!("'{what}' rows must have equal, positive length")).into());
    }
    rows.iter()
        .map(|row| row.iter().map(|s| parse_expr(s, vars).map_err(CliError::from)).collect())
        .collect()
}

fn eval_matrix(m: &[Vec<Expr>], x: &[f64]) -> Matrix {
    Matrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j].eval(x))
}

pub fn plant(spec: &SystemSpec) -> Result<Plant, CliError> {
    let vars = variables(spec)?;
    let n = vars.len();
    Ok(match spec.kind {
        SystemKind::StateLinear => {
            let a = matrix_exprs(required(&spec.a, "a")?, &vars, n, "a")?;
            if a[0].len() != n {
                return Err(invalid("'a' must be square").into());
            }
            let b = matrix_exprs(required(&spec.b, "b")?, &vars, n, "b")?;
            let m = b[0].len();
            Plant::StateLinear(StateLinearSystem::new(
                n,
                m,
                move |x: &[f64]| eval_matrix(&a, x),
                move |x: &[f64]| eval_matrix(&b, x),
            )?)
        }
        SystemKind::Affine => {
            let f = parse_vector_field(required(&spec.drift, "drift")?, &vars)?;
            let g = parse_vector_field(required(&spec.input, "input")?, &vars)?;
            Plant::Affine(AffineSystem::new(f, g)?)
        }
        SystemKind::Integrator => {
            let map = required(&spec.map, "map")?
                .iter()
                .map(|s| parse_expr(s, &vars))
                .collect::<Result<Vec<_>, _>>()?;
            let fi = FeedbackIntegrator::new(map)?;
            let aff = fi.as_affine()?;
            Plant::Integrator(fi, aff)
        }
    })
}

pub fn integration(spec: &IntegratorSpec) -> Result<IntegrationConfig, CliError> {
    Ok(IntegrationConfig::new(spec.step, spec.blowup)?)
}

/// Patchwork function of the `[patchwork]` section: fixed offsets when
/// given, otherwise the schedule search.
pub fn patchwork(cfg: &ExperimentConfig) -> Result<PatchworkW, CliError> {
    let spec = cfg
        .patchwork
        .as_ref()
        .ok_or_else(|| invalid("missing [patchwork] section"))?;
    let vars = match &cfg.system {
        Some(s) => variables(s)?,
        None => default_vars(spec.lo.len()),
    };
    if spec.lo.len() != vars.len() || spec.hi.len() != vars.len() {
        return Err(invalid("patchwork box dimension differs from the state dimension").into());
    }
    let pieces = spec
        .pieces
        .iter()
        .map(|p| {
            let lo = p.lo.clone().unwrap_or_else(|| spec.lo.clone());
            let hi = p.hi.clone().unwrap_or_else(|| spec.hi.clone());
            let region = Region::parse(&p.region, &vars, lo, hi)?.with_tol(spec.boundary_tol)?;
            let v = parse_scalar_field(&p.v, &vars)?;
            let piece = LyapunovPiece::new(
                v,
                region,
                Envelope::power(p.omega1[0], p.omega1[1]),
                Envelope::power(p.omega2[0], p.omega2[1]),
            )?;
            piece.check_envelopes(spec.samples.min(4000), cfg.seed())?;
            Ok(piece)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let family = match &spec.offsets {
        Some(c) => PatchworkFamily::with_offsets(pieces, c.clone())?,
        None => choose_offsets(pieces, spec.samples, cfg.seed())?,
    };
    Ok(PatchworkW::new(family))
}

pub fn controller(cfg: &ExperimentConfig, plant: &Plant) -> Result<Arc<dyn SampledController<f64>>, CliError> {
    let spec = cfg.controller.clone().unwrap_or_default();
    let integ = integration(&cfg.integrator())?;
    let frozen = |mode| -> Result<Arc<dyn SampledController<f64>>, CliError> {
        match plant {
            Plant::StateLinear(s) => Ok(Arc::new(FrozenGain::new(s.clone(), integ)?.with_mode(mode))),
            _ => Err(invalid("frozen-gain control needs a state-linear system").into()),
        }
    };
    match spec.kind {
        ControllerKindSpec::FrozenGain => frozen(Intersample::InternalModel),
        ControllerKindSpec::FrozenGainZoh => frozen(Intersample::ZeroOrderHold),
        ControllerKindSpec::Zero => Ok(Arc::new(ZeroController::new(plant.dim_input()))),
        ControllerKindSpec::Patchwork => {
            let w = patchwork(cfg)?;
            let vars = variables(cfg.system()?)?;
            let feedback = spec
                .pieces
                .as_ref()
                .ok_or_else(|| invalid("patchwork controller needs per-region 'pieces'"))?;
            let m = plant.dim_input();
            let pieces = feedback
                .iter()
                .enumerate()
                .map(|(i, comps)| {
                    if comps.len() != m {
                        return Err(invalid(format!("feedback {i} needs {m} components")).into());
                    }
                    let exprs = comps
                        .iter()
                        .map(|s| parse_expr(s, &vars))
                        .collect::<Result<Vec<_>, _>>()?;
                    let ctrl: Arc<dyn SampledController<f64>> =
                        Arc::new(UserController::hold(m, format!("hold {}", comps.join(", ")), move |xi: &[f64]| {
                            exprs.iter().map(|e| e.eval(xi)).collect()
                        }));
                    Ok(ctrl)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Arc::new(PatchworkController::new(w, pieces)?))
        }
    }
}
