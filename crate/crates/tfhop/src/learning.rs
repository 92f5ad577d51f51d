//! Bandit no-regret learners over the joint action set.
//!
//! The external learner keeps one score per action and plays an exploration-mixed
//! softmax. The internal learner keeps a score matrix, one row per source action,
//! and plays the stationary distribution of the row-softmax transition matrix.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{uniform_strategy, MixedStrategy};

/// Scores beyond this magnitude are shifted back toward zero.
pub const SCORE_CAP: f64 = 1e6;
pub const STATIONARY_TOL: f64 = 1e-10;
pub const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Importance-weighted utility estimate for every action.
pub fn iw_estimate(u_bar: f64, played: usize, p: &MixedStrategy, gamma: f64) -> Result<Vec<f64>> {
    let pp = *p
        .probs
        .get(played)
        .ok_or_else(|| invalid("played", "index outside the strategy set"))?;
    if !(pp > 0.0) {
        return Err(invalid("played", "played action has zero probability"));
    }
    let n = p.len();
    let out = if gamma != 0.0 {
        let mut v = vec![0.0; n];
        v[played] = u_bar / pp;
        v
    } else {
        let mut v = vec![1.0; n];
        v[played] = 1.0 - (1.0 - u_bar) / pp;
        v
    };
    Ok(out)
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn mix(p: Vec<f64>, gamma: f64) -> Vec<f64> {
    let n = p.len() as f64;
    p.into_iter().map(|x| (1.0 - gamma) * x + gamma / n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalDualState {
    pub z: Vec<f64>,
}

impl ExternalDualState {
    pub fn new(n: usize) -> Self {
        ExternalDualState { z: vec![0.0; n] }
    }
}

pub fn external_update(
    mut state: ExternalDualState,
    u_hat: &[f64],
    eta: f64,
    gamma: f64,
) -> (MixedStrategy, ExternalDualState) {
    for (z, u) in state.z.iter_mut().zip(u_hat) {
        *z += eta * u;
    }
    let top = state.z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top.abs() > SCORE_CAP {
        state.z.iter_mut().for_each(|z| *z -= top);
    }
    let p = mix(softmax(&state.z), gamma);
    (MixedStrategy { probs: p }, state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalDualState {
    pub n: usize,
    /// Row scores, `z[s * n + t]`.
    pub z: Vec<f64>,
    /// Row-stochastic transition matrix, same layout.
    pub q: Vec<f64>,
}

impl InternalDualState {
    pub fn new(n: usize) -> Self {
        InternalDualState {
            n,
            z: vec![0.0; n * n],
            q: vec![1.0 / n as f64; n * n],
        }
    }
}

pub fn internal_update(
    mut state: InternalDualState,
    u_hat: &[f64],
    p: &MixedStrategy,
    eta: f64,
    gamma: f64,
    positive_part: bool,
) -> Result<(MixedStrategy, InternalDualState)> {
    let n = state.n;
    for s in 0..n {
        let w = eta * p.probs[s];
        let row = &mut state.z[s * n..(s + 1) * n];
        for (z, u) in row.iter_mut().zip(u_hat) {
            *z += w * u;
        }
    }
    for s in 0..n {
        let row: Vec<f64> = state.z[s * n..(s + 1) * n]
            .iter()
            .map(|&z| if positive_part { z.max(0.0) } else { z })
            .collect();
        let q = mix(softmax(&row), gamma);
        state.q[s * n..(s + 1) * n].copy_from_slice(&q);
    }
    let next = stationary_distribution(&state.q, n, &p.probs)?;
    Ok((next, state))
}

fn left_mul(p: &[f64], q: &[f64], n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (s, ps) in p.iter().enumerate() {
        if *ps == 0.0 {
            continue;
        }
        for (o, qv) in out.iter_mut().zip(&q[s * n..(s + 1) * n]) {
            *o += ps * qv;
        }
    }
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Left fixed point `p = pQ` by lazy power iteration warm-started at `init`.
///
/// Iterating `(I + Q) / 2` has the same fixed points and avoids oscillation on
/// periodic chains. Once the residual is below tolerance the loop keeps going
/// until it stops finding a smaller residual, and the best iterate is returned.
pub fn stationary_distribution(q: &[f64], n: usize, init: &[f64]) -> Result<MixedStrategy> {
    if q.len() != n * n || init.len() != n || n == 0 {
        return Err(invalid("transition matrix", "shape mismatch"));
    }
    let mut p: Vec<f64> = init.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = p.iter().sum();
    if !(s > 0.0) {
        p = vec![1.0 / n as f64; n];
    } else {
        p.iter_mut().for_each(|x| *x /= s);
    }
    let mut pq = vec![0.0; n];
    left_mul(&p, q, n, &mut pq);
    let mut residual = l1_diff(&pq, &p);
    let mut iter = 0;
    let mut stall = 0;
    let mut best = (residual, p.clone());
    while iter < STATIONARY_MAX_ITER {
        if best.0 <= STATIONARY_TOL && (best.0 <= 1e-16 || stall >= 8) {
            break;
        }
        for (x, y) in p.iter_mut().zip(&pq) {
            *x = 0.5 * (*x + y);
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        left_mul(&p, q, n, &mut pq);
        residual = l1_diff(&pq, &p);
        if residual < best.0 {
            best = (residual, p.clone());
            stall = 0;
        } else {
            stall += 1;
        }
        iter += 1;
    }
    let (residual, p) = best;
    if residual > STATIONARY_TOL {
        return Err(Error::Stationary {
            iterations: iter,
            residual,
        });
    }
    Ok(MixedStrategy { probs: p })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Explored,
    Unexplored,
}

/// Step size and exploration rate from the regret analysis.
pub fn theoretical_schedule(n: usize, horizon: usize, regime: Regime) -> (f64, f64) {
    let nf = n as f64;
    let t = horizon as f64;
    let ln = nf.ln();
    match regime {
        Regime::Explored => {
            let gamma = (nf * ln).cbrt() / t.cbrt();
            let eta = ln.powf(2.0 / 3.0) / (nf.cbrt() * t.powf(2.0 / 3.0));
            (eta, gamma)
        }
        Regime::Unexplored => ((ln / (nf * t)).sqrt(), 0.0),
    }
}

pub fn regret_bound_external(n: usize, horizon: usize, eta: f64, gamma: f64, gamma_max: f64) -> f64 {
    let nf = n as f64;
    let t = horizon as f64;
    if gamma == 0.0 {
        nf.ln() / eta + eta * t * nf
    } else {
        let g = gamma_max.min(gamma);
        nf.ln() / eta + eta * t * nf / g + g * t
    }
}

pub fn regret_bound_internal(n: usize, horizon: usize, eta: f64, gamma: f64, gamma_max: f64) -> f64 {
    n as f64 * regret_bound_external(n, horizon, eta, gamma, gamma_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GammaSchedule {
    Constant { gamma: f64 },
    Linear { start: f64, end: f64 },
}

impl GammaSchedule {
    /// Exploration rate at 1-based `epoch` of `horizon`.
    pub fn at(&self, epoch: usize, horizon: usize) -> f64 {
        match *self {
            GammaSchedule::Constant { gamma } => gamma,
            GammaSchedule::Linear { start, end } => {
                if horizon <= 1 {
                    return start;
                }
                let x = (epoch.clamp(1, horizon) - 1) as f64 / (horizon - 1) as f64;
                start + (end - start) * x
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalLearner {
    pub state: ExternalDualState,
    pub p: MixedStrategy,
    pub eta: f64,
    pub gamma: GammaSchedule,
    pub horizon: usize,
}

impl ExternalLearner {
    pub fn new(n: usize, eta: f64, gamma: GammaSchedule, horizon: usize) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(invalid("learner.external.eta", "must be positive"));
        }
        Ok(ExternalLearner {
            state: ExternalDualState::new(n),
            p: uniform_strategy(n)?,
            eta,
            gamma,
            horizon,
        })
    }

    /// Consumes the utility of `played` at 1-based `epoch` and moves to the next strategy.
    pub fn observe(&mut self, u_bar: f64, played: usize, epoch: usize) -> Result<()> {
        let g = self.gamma.at(epoch, self.horizon);
        let u_hat = iw_estimate(u_bar, played, &self.p, g)?;
        let g_next = self.gamma.at(epoch + 1, self.horizon);
        let state = std::mem::replace(&mut self.state, ExternalDualState::new(0));
        let (p, state) = external_update(state, &u_hat, self.eta, g_next);
        self.p = p;
        self.state = state;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalLearner {
    pub state: InternalDualState,
    pub p: MixedStrategy,
    pub eta: f64,
    pub gamma: f64,
    pub positive_part: bool,
}

impl InternalLearner {
    pub fn new(n: usize, eta: f64, gamma: f64, positive_part: bool) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(invalid("learner.internal.eta", "must be positive"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(invalid("learner.internal.gamma", "must lie in [0, 1)"));
        }
        Ok(InternalLearner {
            state: InternalDualState::new(n),
            p: uniform_strategy(n)?,
            eta,
            gamma,
            positive_part,
        })
    }

    pub fn observe(&mut self, u_bar: f64, played: usize) -> Result<()> {
        let u_hat = iw_estimate(u_bar, played, &self.p, self.gamma)?;
        let state = std::mem::replace(&mut self.state, InternalDualState::new(0));
        let (p, state) = internal_update(state, &u_hat, &self.p, self.eta, self.gamma, self.positive_part)?;
        self.p = p;
        self.state = state;
        Ok(())
    }
}
