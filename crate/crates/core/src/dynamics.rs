//! Forward simulation of the energy / damage / storage stocks under a given
//! investment path, and the discounted welfare of a simulated path.
//!
//! Integration is classical fixed-step RK4. Both state systems are linear
//! with constant coefficients, so [`exact_base`] and [`exact_storage`] give
//! closed-form references for constant controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{steady_state_base, steady_state_storage};
use crate::params::{check_evaluable, ModelParameters, StorageParameters};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    /// Step size in years.
    pub dt: f64,
    /// Horizon in years; must be a whole number of steps.
    pub t_end: f64,
    pub e0: f64,
    pub d0: f64,
    pub s0: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 200.0,
            e0: 10.0,
            d0: 10.0,
            s0: 1.0,
        }
    }
}

impl IntegrationConfig {
    /// Number of steps, or an error naming the offending field.
    pub fn steps(&self) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad(format!("t_end must be at least dt, got {}", self.t_end));
        }
        for (name, v) in [("e0", self.e0), ("d0", self.d0), ("s0", self.s0)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        let n = (self.t_end / self.dt).round();
        if ((n * self.dt - self.t_end) / self.t_end).abs() > 1e-9 {
            return bad(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            ));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub e: f64,
    pub d: f64,
    pub s: f64,
}

/// One trajectory sample: the state at `t` and the control applied there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub i: f64,
    pub e: f64,
    pub d: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    /// Discounted welfare of the path (Simpson quadrature).
    pub objective_value: f64,
    /// Set when the energy stock had to be clamped at zero.
    pub clamped: bool,
    pub storage: bool,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// First time the energy stock reaches `target`, linearly interpolated
    /// between samples. `None` if it never does within the horizon.
    pub fn first_passage_e(&self, target: f64) -> Option<f64> {
        let first = self.samples.first()?;
        if first.e >= target {
            return Some(first.t);
        }
        self.samples.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            (a.e < target && b.e >= target).then(|| a.t + (target - a.e) / (b.e - a.e) * (b.t - a.t))
        })
    }
}

type Rhs<'a> = dyn Fn([f64; 3], f64) -> [f64; 3] + 'a;

fn integrate(
    cfg: &IntegrationConfig,
    control: &dyn Fn(f64) -> f64,
    rhs: &Rhs<'_>,
    y0: [f64; 3],
) -> Result<(Vec<Sample>, bool)> {
    let n = cfg.steps()?;
    let h = cfg.dt;
    let checked = |t: f64| -> Result<f64> {
        let i = control(t);
        if i >= 0.0 && i.is_finite() {
            Ok(i)
        } else {
            Err(Error::NegativeControl { t, value: i })
        }
    };
    let axpy = |y: [f64; 3], k: [f64; 3], a: f64| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];

    let mut samples = Vec::with_capacity(n + 1);
    let mut clamped = false;
    let mut y = y0;
    let mut i_now = checked(0.0)?;
    samples.push(Sample {
        t: 0.0,
        i: i_now,
        e: y[0],
        d: y[1],
        s: y[2],
    });
    for k in 0..n {
        let t = k as f64 * h;
        let t_next = (k + 1) as f64 * h;
        let i_mid = checked(t + 0.5 * h)?;
        let i_next = checked(t_next)?;
        let k1 = rhs(y, i_now);
        let k2 = rhs(axpy(y, k1, 0.5 * h), i_mid);
        let k3 = rhs(axpy(y, k2, 0.5 * h), i_mid);
        let k4 = rhs(axpy(y, k3, h), i_next);
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if y[0] < 0.0 {
            y[0] = 0.0;
            clamped = true;
        }
        i_now = i_next;
        samples.push(Sample {
            t: t_next,
            i: i_now,
            e: y[0],
            d: y[1],
            s: y[2],
        });
    }
    Ok((samples, clamped))
}

/// Simulates `E' = eta I - delta_e E`, `D' = -omega eta I + delta_d D`.
pub fn simulate_base(p: &ModelParameters, control: impl Fn(f64) -> f64, cfg: &IntegrationConfig) -> Result<Trajectory> {
    check_evaluable(p, None)?;
    let rhs = |y: [f64; 3], i: f64| {
        [
            p.eta * i - p.delta_e * y[0],
            -p.omega * p.eta * i + p.delta_d * y[1],
            0.0,
        ]
    };
    let (samples, clamped) = integrate(cfg, &control, &rhs, [cfg.e0, cfg.d0, 0.0])?;
    let mut traj = Trajectory {
        dt: cfg.dt,
        samples,
        objective_value: f64::NAN,
        clamped,
        storage: false,
    };
    if traj.samples.len() >= 3 {
        traj.objective_value = discounted_objective_base(p, &traj)?;
    }
    Ok(traj)
}

/// Simulates the storage system; PV capacity receives the share `1 - s` of
/// investment and storage the share `s`.
pub fn simulate_storage(
    p: &ModelParameters,
    sp: &StorageParameters,
    control: impl Fn(f64) -> f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    check_evaluable(p, Some(sp))?;
    let pv = 1.0 - sp.s;
    let rhs = |y: [f64; 3], i: f64| {
        [
            p.eta * pv * i - p.delta_e * y[0],
            -p.omega * p.eta * pv * i - sp.q * y[2] + p.delta_d * y[1],
            sp.eta_s * sp.s * i - sp.delta_s * y[2],
        ]
    };
    let (samples, clamped) = integrate(cfg, &control, &rhs, [cfg.e0, cfg.d0, cfg.s0])?;
    let mut traj = Trajectory {
        dt: cfg.dt,
        samples,
        objective_value: f64::NAN,
        clamped,
        storage: true,
    };
    if traj.samples.len() >= 3 {
        traj.objective_value = discounted_objective_storage(p, sp, &traj)?;
    }
    Ok(traj)
}

/// Composite Simpson rule on uniformly spaced values. An odd number of
/// intervals closes with Simpson's 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values
        .len()
        .checked_sub(1)
        .filter(|&n| n >= 2)
        .ok_or(Error::TooFewSamples(values.len()))?;
    let (even_end, tail) = if n % 2 == 0 { (n, None) } else { (n - 3, Some(n - 3)) };
    let mut acc = 0.0;
    if even_end > 0 {
        let mut inner = 0.0;
        for (k, v) in values[1..even_end].iter().enumerate() {
            inner += if k % 2 == 0 { 4.0 * v } else { 2.0 * v };
        }
        acc += h / 3.0 * (values[0] + inner + values[even_end]);
    }
    if let Some(j) = tail {
        acc += 3.0 * h / 8.0 * (values[j] + 3.0 * values[j + 1] + 3.0 * values[j + 2] + values[j + 3]);
    }
    Ok(acc)
}

fn discounted(traj: &Trajectory, rho: f64, integrand: impl Fn(&Sample) -> f64) -> Result<f64> {
    let values: Vec<f64> = traj.samples.iter().map(|x| integrand(x) * (-rho * x.t).exp()).collect();
    simpson(&values, traj.dt)
}

/// `int (r I - c I^2 + beta E - gamma D) e^{-rho t} dt` over the trajectory.
pub fn discounted_objective_base(p: &ModelParameters, traj: &Trajectory) -> Result<f64> {
    discounted(traj, p.rho, |x| {
        (p.r * x.i - p.c * x.i * x.i) + (p.beta * x.e - p.gamma * x.d)
    })
}

/// Storage welfare: `r I (1-s) - c I^2 (1-s)^2 + beta E - gamma D + sigma S - c_s s I`.
pub fn discounted_objective_storage(p: &ModelParameters, sp: &StorageParameters, traj: &Trajectory) -> Result<f64> {
    let pv = 1.0 - sp.s;
    discounted(traj, p.rho, |x| {
        p.r * x.i * pv - p.c * x.i * x.i * pv * pv + p.beta * x.e - p.gamma * x.d + sp.sigma * x.s - sp.c_s * sp.s * x.i
    })
}

/// Exact PV-only state at time `t` under constant investment `i`.
pub fn exact_base(p: &ModelParameters, i: f64, cfg: &IntegrationConfig, t: f64) -> Result<State> {
    let (e_star, d_star) = steady_state_base(p, i)?;
    Ok(State {
        t,
        e: e_star + (cfg.e0 - e_star) * (-p.delta_e * t).exp(),
        d: d_star + (cfg.d0 - d_star) * (p.delta_d * t).exp(),
        s: 0.0,
    })
}

/// Exact storage-model state at time `t` under constant investment `i`.
///
/// With `S(t) = S* + (S0 - S*) e^{-delta_s t}`, the damage stock is
/// `D* + B e^{-delta_s t} + (D0 - D* - B) e^{delta_d t}` where
/// `B = q (S0 - S*) / (delta_d + delta_s)`.
pub fn exact_storage(
    p: &ModelParameters,
    sp: &StorageParameters,
    i: f64,
    cfg: &IntegrationConfig,
    t: f64,
) -> Result<State> {
    let (e_star, d_star, s_star) = steady_state_storage(p, sp, i)?;
    let b = sp.q * (cfg.s0 - s_star) / (p.delta_d + sp.delta_s);
    Ok(State {
        t,
        e: e_star + (cfg.e0 - e_star) * (-p.delta_e * t).exp(),
        d: d_star + b * (-sp.delta_s * t).exp() + (cfg.d0 - d_star - b) * (p.delta_d * t).exp(),
        s: s_star + (cfg.s0 - s_star) * (-sp.delta_s * t).exp(),
    })
}
