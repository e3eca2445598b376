//! Fixed-step classical Runge–Kutta integration with blow-up detection.

use crate::error::{Error, Result};
use crate::scalar::{all_finite, distance, norm, Scalar};
use crate::sysmodel::{ControlSignal, GeneralSystem, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig<T> {
    pub step: T,
    pub blowup_norm: T,
}

impl<T: Scalar> Default for IntegrationConfig<T> {
    fn default() -> Self {
        Self {
            step: T::lit(1e-3),
            blowup_norm: T::lit(1e6),
        }
    }
}

impl<T: Scalar> IntegrationConfig<T> {
    pub fn new(step: T, blowup_norm: T) -> Result<Self> {
        let cfg = Self { step, blowup_norm };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(Error::invalid("integration step must be positive"));
        }
        if !(self.blowup_norm > T::one()) {
            return Err(Error::invalid("blow-up norm must exceed 1"));
        }
        Ok(())
    }
}

/// Grid `t0 = s_0 < s_1 < … < s_N = t1` with spacing `step` and a shorter
/// final step when the window is not a multiple of it. A remainder below
/// `1e-9·step` is absorbed so no sliver step is taken.
pub fn time_grid<T: Scalar>(t0: T, t1: T, step: T) -> Vec<T> {
    let span = t1 - t0;
    let ratio = span / step;
    let nearest = ratio.round();
    let full = if (ratio - nearest).abs() <= T::lit(1e-9) {
        nearest
    } else {
        ratio.floor()
    };
    let full = full.to_usize().unwrap_or(0);
    let mut grid: Vec<T> = (0..=full).map(|k| t0 + step * T::lit(k as f64)).collect();
    if grid.len() > 1 && (t1 - grid[grid.len() - 1]).abs() <= step * T::lit(1e-9) {
        grid.pop();
    }
    grid.push(t1);
    grid
}

/// One classical RK4 step of `ẋ = field(t, x)`.
pub fn rk4_step<T: Scalar>(field: &impl Fn(T, &[T]) -> Vec<T>, t: T, x: &[T], h: T) -> Vec<T> {
    let half = h * T::half();
    let k1 = field(t, x);
    let y: Vec<T> = x.iter().zip(&k1).map(|(&a, &k)| a + half * k).collect();
    let k2 = field(t + half, &y);
    let y: Vec<T> = x.iter().zip(&k2).map(|(&a, &k)| a + half * k).collect();
    let k3 = field(t + half, &y);
    let y: Vec<T> = x.iter().zip(&k3).map(|(&a, &k)| a + h * k).collect();
    let k4 = field(t + h, &y);
    let sixth = h / T::lit(6.0);
    (0..x.len())
        .map(|i| x[i] + sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect()
}

/// Integrates the autonomous-in-form field `ẋ = field(t, x)` over
/// `[t0, t1]`. Returns the grid, the states and the escape time if the
/// state left the blow-up ball or became non-finite.
pub fn integrate_field<T: Scalar>(
    field: impl Fn(T, &[T]) -> Vec<T>,
    x0: &[T],
    t0: T,
    t1: T,
    cfg: &IntegrationConfig<T>,
) -> Result<(Vec<T>, Vec<Vec<T>>, Option<T>)> {
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::invalid(format!("integration window [{t0}, {t1}] is empty")));
    }
    let grid = time_grid(t0, t1, cfg.step);
    let mut states = Vec::with_capacity(grid.len());
    states.push(x0.to_vec());
    for w in grid.windows(2) {
        let x = states.last().expect("non-empty");
        let next = rk4_step(&field, w[0], x, w[1] - w[0]);
        let blown = !all_finite(&next) || norm(&next) > cfg.blowup_norm;
        states.push(next);
        if blown {
            let times = grid[..states.len()].to_vec();
            return Ok((times, states, Some(w[1])));
        }
    }
    Ok((grid, states, None))
}

/// Trajectory of `sys` from `x0` on the window `[t0, t1]` under `u`, whose
/// clock starts at 0 at `t0`.
pub fn integrate<T: Scalar>(
    sys: &GeneralSystem<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    window: (T, T),
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    let (t0, t1) = window;
    if x0.len() != sys.dim_state() {
        return Err(Error::invalid("initial state has the wrong dimension"));
    }
    if u.dim() != sys.dim_input() {
        return Err(Error::invalid("control signal has the wrong dimension"));
    }
    let span = t1 - t0;
    if span > u.horizon() * (T::one() + T::lit(1e-12)) {
        return Err(Error::invalid(format!(
            "control horizon {} is shorter than the window length {span}",
            u.horizon()
        )));
    }
    let (times, states, escaped) =
        integrate_field(|t, x: &[T]| sys.rhs(x, &u.value(t - t0)), x0, t0, t1, cfg)?;
    let controls = times.iter().map(|&t| u.value(t - t0)).collect();
    Ok(Trajectory {
        times,
        states,
        controls,
        escaped,
    })
}

/// `max_t |x(t) − x_ref|` over the stored grid.
pub fn max_excursion<T: Scalar>(traj: &Trajectory<T>, x_ref: &[T]) -> Result<T> {
    if traj.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    Ok(traj
        .states
        .iter()
        .map(|x| distance(x, x_ref))
        .fold(T::zero(), |m, d| m.max(d)))
}
