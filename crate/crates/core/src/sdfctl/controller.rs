use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::odeint::{integrate_field, IntegrationConfig};
use crate::patchwork::{Active, PatchworkW};
use crate::scalar::{norm, to_f64_vec, Scalar};
use crate::synth::{synthesize_gain, GainSynthesisResult, Matrix};
use crate::sysmodel::{ControlSignal, SignalSource, StateLinearSystem, EQUILIBRIUM_TOL};

/// Which construction produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    FrozenGain,
    FrozenGainZoh,
    Zero,
    Patchwork,
    User,
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ControllerKind::FrozenGain => "frozen-gain",
            ControllerKind::FrozenGainZoh => "frozen-gain-zoh",
            ControllerKind::Zero => "zero",
            ControllerKind::Patchwork => "patchwork",
            ControllerKind::User => "user",
        };
        f.write_str(s)
    }
}

/// Data recorded alongside a plan.
#[derive(Debug, Clone)]
pub struct PlanInfo<T> {
    pub kind: ControllerKind,
    /// Dispatched piece for patchwork controllers.
    pub piece: Option<usize>,
    pub gain: Option<Matrix<T>>,
    /// `P(ξ)` of the frozen closed loop; `V_ξ(x) = ½xᵀP(ξ)x`.
    pub lyapunov: Option<Matrix<T>>,
    pub decay: Option<T>,
}

impl<T> PlanInfo<T> {
    pub fn of(kind: ControllerKind) -> Self {
        Self {
            kind,
            piece: None,
            gain: None,
            lyapunov: None,
            decay: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plan<T> {
    pub signal: ControlSignal<T>,
    pub info: PlanInfo<T>,
}

/// `k(·, ξ)` on one sampling interval: given the sampled state and the
/// interval length, an open-loop input on `[0, ε]`.
pub trait SampledController<T: Scalar>: Send + Sync {
    fn dim_input(&self) -> usize;

    fn plan(&self, xi: &[T], eps: T) -> Result<Plan<T>>;

    fn descriptor(&self) -> String;
}

fn is_equilibrium<T: Scalar>(xi: &[T]) -> bool {
    norm(xi) <= T::lit(EQUILIBRIUM_TOL)
}

fn controller_error<T: Scalar>(xi: &[T], reason: impl Into<String>) -> Error {
    Error::Controller {
        xi: to_f64_vec(xi),
        reason: reason.into(),
    }
}

/// Input value used between samples by [`FrozenGain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Intersample {
    /// `u(t) = F(ξ)x̂(t)` along the frozen-gain internal model.
    #[default]
    InternalModel,
    /// `u(t) ≡ F(ξ)ξ`.
    ZeroOrderHold,
}

/// Frozen-gain feedback for `ẋ = A(x)x + B(x)u`.
#[derive(Clone)]
pub struct FrozenGain<T> {
    sys: StateLinearSystem<T>,
    cfg: IntegrationConfig<T>,
    mode: Intersample,
}

impl<T: Scalar> fmt::Debug for FrozenGain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrozenGain({:?}, {:?})", self.sys, self.mode)
    }
}

impl<T: Scalar> FrozenGain<T> {
    pub fn new(sys: StateLinearSystem<T>, cfg: IntegrationConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            sys,
            cfg,
            mode: Intersample::InternalModel,
        })
    }

    pub fn with_mode(mut self, mode: Intersample) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> Intersample {
        self.mode
    }

    pub fn system(&self) -> &StateLinearSystem<T> {
        &self.sys
    }

    /// `F(ξ)`, `P(ξ)` and the decay rate at `ξ`.
    pub fn synthesize(&self, xi: &[T]) -> Result<GainSynthesisResult<T>> {
        synthesize_gain(&self.sys.a(xi), &self.sys.b(xi)).map_err(|e| e.with_witness(to_f64_vec(xi)))
    }

    fn info(&self, syn: &GainSynthesisResult<T>) -> PlanInfo<T> {
        let kind = match self.mode {
            Intersample::InternalModel => ControllerKind::FrozenGain,
            Intersample::ZeroOrderHold => ControllerKind::FrozenGainZoh,
        };
        PlanInfo {
            kind,
            piece: None,
            gain: Some(syn.gain.clone()),
            lyapunov: Some(syn.lyapunov.clone()),
            decay: Some(syn.decay),
        }
    }
}

impl<T: Scalar> SampledController<T> for FrozenGain<T> {
    fn dim_input(&self) -> usize {
        self.sys.dim_input()
    }

    fn descriptor(&self) -> String {
        match self.mode {
            Intersample::InternalModel => "frozen-gain (internal model)".into(),
            Intersample::ZeroOrderHold => "frozen-gain (zero-order hold)".into(),
        }
    }

    fn plan(&self, xi: &[T], eps: T) -> Result<Plan<T>> {
        if xi.len() != self.sys.dim_state() {
            return Err(Error::invalid("sampled state has the wrong dimension"));
        }
        let m = self.sys.dim_input();
        if is_equilibrium(xi) {
            let mut info = PlanInfo::of(ControllerKind::FrozenGain);
            if let Ok(syn) = self.synthesize(xi) {
                info = self.info(&syn);
            }
            return Ok(Plan {
                signal: ControlSignal::zero(eps, m)?,
                info,
            });
        }
        let syn = self
            .synthesize(xi)
            .map_err(|e| controller_error(xi, e.to_string()))?;
        let f = &syn.gain;
        let info = self.info(&syn);
        if self.mode == Intersample::ZeroOrderHold {
            return Ok(Plan {
                signal: ControlSignal::constant(eps, f.mat_vec(xi))?,
                info,
            });
        }

        let sys = &self.sys;
        let closed = |x: &[T]| -> Vec<T> {
            let fx = f.mat_vec(x);
            let ax = sys.a(x).mat_vec(x);
            let bu = sys.b(x).mat_vec(&fx);
            ax.iter().zip(&bu).map(|(&p, &q)| p + q).collect()
        };
        let (times, states, escaped) = integrate_field(|_, x: &[T]| closed(x), xi, T::zero(), eps, &self.cfg)?;
        if let Some(t) = escaped {
            return Err(controller_error(xi, format!("internal model escaped at t = {t}")));
        }
        let values: Vec<Vec<T>> = states.iter().map(|x| f.mat_vec(x)).collect();
        let slopes: Vec<Vec<T>> = states.iter().map(|x| f.mat_vec(&closed(x))).collect();
        let peak = states.iter().map(|x| norm(x)).fold(T::zero(), T::max);
        let bound = (f.frobenius_norm() * peak * (T::one() + T::lit(1e-6))).max(T::min_positive_value());
        let signal = ControlSignal::new(eps, bound, m, SignalSource::Sampled { times, values, slopes })?;
        Ok(Plan { signal, info })
    }
}

/// `u ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroController {
    dim_input: usize,
}

impl ZeroController {
    pub fn new(dim_input: usize) -> Self {
        Self { dim_input }
    }
}

impl<T: Scalar> SampledController<T> for ZeroController {
    fn dim_input(&self) -> usize {
        self.dim_input
    }

    fn descriptor(&self) -> String {
        "zero".into()
    }

    fn plan(&self, _xi: &[T], eps: T) -> Result<Plan<T>> {
        Ok(Plan {
            signal: ControlSignal::zero(eps, self.dim_input)?,
            info: PlanInfo::of(ControllerKind::Zero),
        })
    }
}

type PlanFn<T> = Arc<dyn Fn(&[T], T) -> Result<ControlSignal<T>> + Send + Sync>;

/// Controller given by a closure `(ξ, ε) ↦ u`.
#[derive(Clone)]
pub struct UserController<T> {
    dim_input: usize,
    name: String,
    f: PlanFn<T>,
}

impl<T> fmt::Debug for UserController<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UserController({})", self.name)
    }
}

impl<T: Scalar> UserController<T> {
    pub fn new(
        dim_input: usize,
        name: impl Into<String>,
        f: impl Fn(&[T], T) -> Result<ControlSignal<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim_input,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Zero-order hold of a static feedback `u = k(ξ)`.
    pub fn hold(dim_input: usize, name: impl Into<String>, k: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self::new(dim_input, name, move |xi, eps| {
            let u = k(xi);
            if u.iter().all(|v| v.is_zero()) {
                ControlSignal::zero(eps, u.len())
            } else {
                ControlSignal::constant(eps, u)
            }
        })
    }
}

impl<T: Scalar> SampledController<T> for UserController<T> {
    fn dim_input(&self) -> usize {
        self.dim_input
    }

    fn descriptor(&self) -> String {
        self.name.clone()
    }

    fn plan(&self, xi: &[T], eps: T) -> Result<Plan<T>> {
        let signal = if is_equilibrium(xi) {
            ControlSignal::zero(eps, self.dim_input)?
        } else {
            (self.f)(xi, eps)?
        };
        if signal.dim() != self.dim_input {
            return Err(controller_error(xi, "plan has the wrong input dimension"));
        }
        Ok(Plan {
            signal,
            info: PlanInfo::of(ControllerKind::User),
        })
    }
}

/// Dispatches to the plan of the region containing `ξ`, or of the active
/// index when `ξ` lies on a shared boundary.
#[derive(Clone)]
pub struct PatchworkController<T> {
    w: PatchworkW,
    pieces: Vec<Arc<dyn SampledController<T>>>,
}

impl<T: Scalar> PatchworkController<T> {
    pub fn new(w: PatchworkW, pieces: Vec<Arc<dyn SampledController<T>>>) -> Result<Self> {
        if pieces.len() != w.family().pieces().len() {
            return Err(Error::invalid("one piece controller per region is required"));
        }
        let m = pieces.first().map(|p| p.dim_input()).unwrap_or(0);
        if pieces.iter().any(|p| p.dim_input() != m) {
            return Err(Error::invalid("piece controllers disagree on the input dimension"));
        }
        Ok(Self { w, pieces })
    }

    pub fn patchwork(&self) -> &PatchworkW {
        &self.w
    }

    /// Piece whose plan is used at `ξ`.
    pub fn dispatch(&self, xi: &[T]) -> Result<Option<usize>> {
        match self.w.eval(xi) {
            Ok((_, Active::Origin)) => Ok(None),
            Ok((_, a)) => Ok(a.index()),
            Err(e) => Err(controller_error(xi, e.to_string())),
        }
    }
}

impl<T: Scalar> SampledController<T> for PatchworkController<T> {
    fn dim_input(&self) -> usize {
        self.pieces[0].dim_input()
    }

    fn descriptor(&self) -> String {
        let names: Vec<String> = self.pieces.iter().map(|p| p.descriptor()).collect();
        format!("patchwork [{}]", names.join(", "))
    }

    fn plan(&self, xi: &[T], eps: T) -> Result<Plan<T>> {
        let Some(i) = (if is_equilibrium(xi) { None } else { self.dispatch(xi)? }) else {
            return Ok(Plan {
                signal: ControlSignal::zero(eps, self.dim_input())?,
                info: PlanInfo::of(ControllerKind::Patchwork),
            });
        };
        let mut plan = self.pieces[i].plan(xi, eps)?;
        plan.info.kind = ControllerKind::Patchwork;
        plan.info.piece = Some(i);
        Ok(plan)
    }
}
