use crate::error::{Error, Result};
use crate::patchwork::{Envelope, PatchworkW};
use crate::scalar::{norm, Scalar};
use crate::sdfctl::run::ClosedLoopRun;
use crate::sysmodel::EQUILIBRIUM_TOL;

/// Margins below this are reported as marginal passes.
pub const MARGINAL_MARGIN: f64 = 1e-10;

/// Function used to certify decrease.
pub enum CertificateV<'a, T> {
    /// `V_{ξ_k}(x) = ½xᵀP(ξ_k)x` on interval `k`, from the plan info.
    PerSample,
    Function(&'a (dyn Fn(&[T]) -> T + Sync)),
    Patchwork(&'a PatchworkW),
}

#[derive(Debug, Clone)]
pub struct IntervalMargin<T> {
    pub index: usize,
    pub start: T,
    pub end: T,
    pub v_start: T,
    pub v_end: T,
    /// `L_k = V(ξ_k) − V(ξ_{k+1})`.
    pub margin: T,
    pub vmax: T,
    /// `max V ≤ a(V(ξ_k))` on the interval.
    pub bound_ok: bool,
    pub excursion: T,
    /// `C_k = excursion / ε_k`.
    pub excursion_ratio: T,
    /// Sampled at the equilibrium; strict decrease not required.
    pub waived: bool,
    pub marginal: bool,
}

impl<T: Scalar> IntervalMargin<T> {
    pub fn passed(&self) -> bool {
        self.bound_ok && (self.waived || self.margin > T::zero())
    }
}

#[derive(Debug, Clone)]
pub struct DecreaseCertificate<T> {
    pub intervals: Vec<IntervalMargin<T>>,
    /// `min L_k` over intervals not waived.
    pub uniform_margin: Option<T>,
    pub escaped: Option<T>,
    pub aborted: bool,
    pub passed: bool,
}

impl<T: Scalar> DecreaseCertificate<T> {
    pub fn marginal_count(&self) -> usize {
        self.intervals.iter().filter(|m| m.marginal).count()
    }

    pub fn failures(&self) -> usize {
        self.intervals.iter().filter(|m| !m.passed()).count()
            + usize::from(self.escaped.is_some())
            + usize::from(self.aborted)
    }

    pub fn first_failure(&self) -> Option<&IntervalMargin<T>> {
        self.intervals.iter().find(|m| !m.passed())
    }
}

/// Checks strict decrease of `V` across every sampling interval of `run`
/// and the interval bound `max V ≤ a(V(ξ_k))`.
pub fn certify_decrease<T: Scalar>(
    run: &ClosedLoopRun<T>,
    v: &CertificateV<'_, T>,
    a: &Envelope,
) -> Result<DecreaseCertificate<T>> {
    if run.records.is_empty() {
        return Err(Error::invalid("the run has no completed interval"));
    }
    let mut intervals = Vec::with_capacity(run.records.len());
    for (k, rec) in run.records.iter().enumerate() {
        let states = run.interval_states(k);
        let waived = norm(&rec.xi) <= T::lit(EQUILIBRIUM_TOL);
        let values: Vec<T> = match v {
            CertificateV::PerSample => match &rec.info.lyapunov {
                Some(p) => states.iter().map(|x| T::half() * p.quad_form(x)).collect(),
                None if waived => states.iter().map(|_| T::zero()).collect(),
                None => {
                    return Err(Error::invalid(format!(
                        "interval {k} has no Lyapunov matrix for the per-sample quadratic"
                    )))
                }
            },
            CertificateV::Function(f) => states.iter().map(|x| f(x)).collect(),
            CertificateV::Patchwork(w) => states.iter().map(|x| w.value(x).unwrap_or_else(|_| T::nan())).collect(),
        };
        let v_start = values[0];
        let v_end = *values.last().expect("non-empty interval");
        let vmax = values.iter().copied().fold(T::neg_infinity(), |m, x| if x.is_nan() { x } else { m.max(x) });
        let margin = v_start - v_end;
        let bound = T::lit(a.eval(v_start.as_f64()));
        let eps = rec.length();
        intervals.push(IntervalMargin {
            index: rec.index,
            start: rec.start,
            end: rec.end,
            v_start,
            v_end,
            margin,
            vmax,
            bound_ok: vmax <= bound,
            excursion: rec.excursion,
            excursion_ratio: rec.excursion / eps,
            waived,
            marginal: !waived && margin > T::zero() && margin < T::lit(MARGINAL_MARGIN),
        });
    }
    let uniform_margin = intervals
        .iter()
        .filter(|m| !m.waived)
        .map(|m| m.margin)
        .reduce(T::min);
    let escaped = run.escaped();
    let aborted = run.aborted.is_some();
    let passed = !aborted && escaped.is_none() && intervals.iter().all(|m| m.passed());
    Ok(DecreaseCertificate {
        intervals,
        uniform_margin,
        escaped,
        aborted,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeint::IntegrationConfig;
    use crate::sdfctl::controller::ZeroController;
    use crate::sdfctl::run::run_closed_loop;
    use crate::sysmodel::{make_uniform_partition, GeneralSystem};

    fn sq(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn run(rate: f64) -> ClosedLoopRun<f64> {
        let plant = GeneralSystem::new(2, 1, move |x: &[f64], _: &[f64]| x.iter().map(|v| rate * v).collect()).unwrap();
        let p = make_uniform_partition(0.2, 1).unwrap();
        run_closed_loop(&plant, &ZeroController::new(1), &p, &[1.0, -0.5], 2.0, &IntegrationConfig::default()).unwrap()
    }

    #[test]
    fn decay_passes() {
        let cert = certify_decrease(&run(-1.0), &CertificateV::Function(&sq), &Envelope::double()).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.intervals.len(), 10);
        assert!(cert.intervals.iter().all(|m| m.vmax <= m.v_start));
        assert!(cert.uniform_margin.unwrap() > 0.0);
    }

    #[test]
    fn constant_state_fails() {
        let cert = certify_decrease(&run(0.0), &CertificateV::Function(&sq), &Envelope::double()).unwrap();
        assert!(!cert.passed);
        assert!(cert.intervals.iter().all(|m| m.margin == 0.0));
    }
}
