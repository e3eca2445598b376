use crate::error::{Error, Result};
use crate::odeint::IntegrationConfig;
use crate::patchwork::Envelope;
use crate::scalar::{norm, to_f64_vec, Scalar};
use crate::sdfctl::certificate::{certify_decrease, CertificateV, DecreaseCertificate};
use crate::sdfctl::controller::SampledController;
use crate::sdfctl::run::{run_closed_loop, ClosedLoopRun};
use crate::sysmodel::{GeneralSystem, SamplingPartition, EQUILIBRIUM_TOL};

pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone)]
pub struct AdaptedStep<T> {
    pub epsilon: T,
    pub halvings: usize,
    pub certificate: DecreaseCertificate<T>,
}

/// Single sampling interval `[0, ε]` from `ξ`.
pub fn single_interval<T: Scalar>(
    plant: &GeneralSystem<T>,
    ctrl: &dyn SampledController<T>,
    xi: &[T],
    eps: T,
    cfg: &IntegrationConfig<T>,
) -> Result<ClosedLoopRun<T>> {
    let partition = SamplingPartition::new(vec![T::zero(), eps], None)?;
    run_closed_loop(plant, ctrl, &partition, xi, eps, cfg)
}

/// Halves `ε` from `ε₀` until one interval from `ξ` passes the decrease
/// certificate, at most [`MAX_HALVINGS`] times.
pub fn adapt_epsilon<T: Scalar>(
    plant: &GeneralSystem<T>,
    ctrl: &dyn SampledController<T>,
    xi: &[T],
    v: &CertificateV<'_, T>,
    a: &Envelope,
    eps0: T,
    cfg: &IntegrationConfig<T>,
) -> Result<AdaptedStep<T>> {
    if !(eps0 > T::zero()) || !eps0.is_finite() {
        return Err(Error::invalid("initial sampling step must be positive"));
    }
    let mut eps = eps0;
    let mut trace = Vec::new();
    for halvings in 0..=MAX_HALVINGS {
        let run = single_interval(plant, ctrl, xi, eps, cfg)?;
        let cert = certify_decrease(&run, v, a)?;
        if cert.passed || norm(xi) <= T::lit(EQUILIBRIUM_TOL) {
            return Ok(AdaptedStep {
                epsilon: eps,
                halvings,
                certificate: cert,
            });
        }
        let why = if let Some(e) = &run.aborted {
            e.to_string()
        } else if let Some(t) = cert.escaped {
            format!("escape at t = {t}")
        } else {
            let m = &cert.intervals[0];
            format!("L = {:e}, bound ok = {}", m.margin, m.bound_ok)
        };
        trace.push((eps.as_f64(), why));
        eps = eps * T::half();
    }
    Err(Error::NoCertifiedStep {
        xi: to_f64_vec(xi),
        halvings: MAX_HALVINGS,
        trace,
    })
}

/// `C = excursion/ε` for single intervals of length `ε`, `ε/2`, `ε/4` from
/// the same `ξ`.
pub fn excursion_ratios<T: Scalar>(
    plant: &GeneralSystem<T>,
    ctrl: &dyn SampledController<T>,
    xi: &[T],
    eps: T,
    cfg: &IntegrationConfig<T>,
) -> Result<[T; 3]> {
    let mut out = [T::zero(); 3];
    let mut e = eps;
    for slot in &mut out {
        let run = single_interval(plant, ctrl, xi, e, cfg)?;
        if let Some(err) = run.aborted {
            return Err(err);
        }
        let rec = run
            .records
            .first()
            .ok_or_else(|| Error::numerical("single-interval run produced no record"))?;
        *slot = rec.excursion / rec.length();
        e = e * T::half();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdfctl::controller::{FrozenGain, Intersample};
    use crate::synth::Matrix;
    use crate::sysmodel::{state_linear_as_general, StateLinearSystem};

    #[test]
    fn lti_accepts_initial_step() {
        let sys = StateLinearSystem::lti(Matrix::scalar(1.0), Matrix::scalar(1.0)).unwrap();
        let plant = state_linear_as_general(&sys);
        let ctrl = FrozenGain::new(sys, IntegrationConfig::default()).unwrap();
        let cfg = IntegrationConfig::default();
        let r = adapt_epsilon(&plant, &ctrl, &[1.0], &CertificateV::PerSample, &Envelope::double(), 0.1, &cfg).unwrap();
        assert_eq!(r.epsilon, 0.1);
        assert_eq!(r.halvings, 0);
        let z = adapt_epsilon(&plant, &ctrl, &[0.0], &CertificateV::PerSample, &Envelope::double(), 0.1, &cfg).unwrap();
        assert_eq!(z.epsilon, 0.1);
    }

    #[test]
    fn mismatch_forces_refinement() {
        let sys = StateLinearSystem::new(
            1,
            1,
            |x: &[f64]| Matrix::scalar(1.0 + 5.0 * x[0] * x[0]),
            |_: &[f64]| Matrix::scalar(1.0),
        )
        .unwrap();
        let plant = state_linear_as_general(&sys);
        let cfg = IntegrationConfig::default();
        let ctrl = FrozenGain::new(sys, cfg).unwrap().with_mode(Intersample::ZeroOrderHold);
        let r = adapt_epsilon(&plant, &ctrl, &[1.0], &CertificateV::PerSample, &Envelope::double(), 1.0, &cfg).unwrap();
        assert!(r.epsilon < 1.0);
        assert!(r.certificate.passed);
    }
}
