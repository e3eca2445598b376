use crate::error::{Error, Result};
use crate::odeint::{integrate, IntegrationConfig};
use crate::scalar::{distance, Scalar};
use crate::sdfctl::controller::{PlanInfo, SampledController};
use crate::sysmodel::{GeneralSystem, SamplingPartition, Trajectory};

/// One completed (or escaped) sampling interval.
#[derive(Debug, Clone)]
pub struct IntervalRecord<T> {
    pub index: usize,
    pub start: T,
    pub end: T,
    pub from_tail: bool,
    /// Sampled state `ξ_k`.
    pub xi: Vec<T>,
    pub info: PlanInfo<T>,
    /// Bound `M` of the signal used.
    pub bound: T,
    /// `max |x(t) − ξ_k|` over the interval.
    pub excursion: T,
    /// Index range `first..=last` of the interval in the run trajectory.
    pub first: usize,
    pub last: usize,
}

impl<T: Scalar> IntervalRecord<T> {
    pub fn length(&self) -> T {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
pub struct ClosedLoopRun<T> {
    pub partition: SamplingPartition<T>,
    pub horizon: T,
    /// Plant trajectory; the row at a sampling instant carries the input of
    /// the interval starting there.
    pub trajectory: Trajectory<T>,
    pub records: Vec<IntervalRecord<T>>,
    /// Set when a controller failed; the run stops at that sample.
    pub aborted: Option<Error>,
}

impl<T: Scalar> ClosedLoopRun<T> {
    pub fn escaped(&self) -> Option<T> {
        self.trajectory.escaped
    }

    pub fn samples(&self) -> impl Iterator<Item = &[T]> {
        self.records.iter().map(|r| r.xi.as_slice())
    }

    /// States in the trajectory of interval `k`.
    pub fn interval_states(&self, k: usize) -> &[Vec<T>] {
        let r = &self.records[k];
        &self.trajectory.states[r.first..=r.last]
    }
}

/// Simulates the sampled-data loop: at each `T_k` the plant state is
/// sampled, the controller plans an open-loop input for the interval and
/// the plant is integrated under it.
pub fn run_closed_loop<T: Scalar>(
    plant: &GeneralSystem<T>,
    ctrl: &dyn SampledController<T>,
    partition: &SamplingPartition<T>,
    x0: &[T],
    horizon: T,
    cfg: &IntegrationConfig<T>,
) -> Result<ClosedLoopRun<T>> {
    if x0.len() != plant.dim_state() {
        return Err(Error::invalid("initial state has the wrong dimension"));
    }
    if ctrl.dim_input() != plant.dim_input() {
        return Err(Error::invalid("controller and plant disagree on the input dimension"));
    }
    cfg.validate()?;
    let intervals = partition.intervals(horizon)?;
    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![x0.to_vec()],
        controls: vec![vec![T::zero(); plant.dim_input()]],
        escaped: None,
    };
    let mut records = Vec::with_capacity(intervals.len());
    let mut aborted = None;

    for iv in intervals {
        let xi = traj.final_state().to_vec();
        let plan = match ctrl.plan(&xi, iv.end - iv.start) {
            Ok(p) => p,
            Err(e) => {
                aborted = Some(e);
                break;
            }
        };
        let piece = integrate(plant, &xi, &plan.signal, (iv.start, iv.end), cfg)?;
        let first = traj.len() - 1;
        // the junction row takes the new interval's input
        traj.controls[first] = piece.controls[0].clone();
        traj.times.extend_from_slice(&piece.times[1..]);
        traj.states.extend_from_slice(&piece.states[1..]);
        traj.controls.extend_from_slice(&piece.controls[1..]);
        let excursion = piece
            .states
            .iter()
            .map(|x| distance(x, &xi))
            .fold(T::zero(), T::max);
        records.push(IntervalRecord {
            index: iv.index,
            start: iv.start,
            end: piece.final_time(),
            from_tail: iv.from_tail,
            xi,
            bound: plan.signal.bound(),
            info: plan.info,
            excursion,
            first,
            last: traj.len() - 1,
        });
        if piece.escaped.is_some() {
            traj.escaped = piece.escaped;
            break;
        }
    }
    Ok(ClosedLoopRun {
        partition: partition.clone(),
        horizon,
        trajectory: traj,
        records,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdfctl::controller::ZeroController;
    use crate::sysmodel::make_uniform_partition;

    #[test]
    fn zero_controller_on_decay() {
        let plant = GeneralSystem::new(1, 1, |x: &[f64], _: &[f64]| vec![-x[0]]).unwrap();
        for h in [0.1, 0.37] {
            let p = make_uniform_partition(h, 1).unwrap();
            let run = run_closed_loop(&plant, &ZeroController::new(1), &p, &[2.0], 3.0, &IntegrationConfig::default()).unwrap();
            let x = run.trajectory.final_state()[0];
            assert!((x - 2.0 * (-3.0f64).exp()).abs() < 1e-10);
            assert_eq!(run.trajectory.final_time(), 3.0);
            assert!(run.trajectory.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn escape_is_recorded() {
        let plant = GeneralSystem::new(1, 1, |x: &[f64], _: &[f64]| vec![x[0] * x[0]]).unwrap();
        let p = make_uniform_partition(0.25, 1).unwrap();
        let run = run_closed_loop(&plant, &ZeroController::new(1), &p, &[1.0], 3.0, &IntegrationConfig::default()).unwrap();
        let t = run.escaped().unwrap();
        assert!(t > 0.99 && t < 1.01, "escape at {t}");
        assert!((4..=5).contains(&run.records.len()));
    }
}
