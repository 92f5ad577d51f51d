//! Offline analysis of play histories: empirical play, counterfactual regret,
//! equilibrium certificates and collision metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::feedback::{cpi_utility, per_chirp_sinr, UtilityMap};
use crate::harness::Fidelity;
use crate::model::{ActionSpace, Scenario};
use crate::scheduler::{delta_schedule, ChirpSchedule};
use crate::waveform::fast_power_radar;

/// Everything logged for one CPI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// Played strategy index per radar.
    pub strategies: Vec<usize>,
    pub utilities: Vec<f64>,
    pub schedules: Vec<ChirpSchedule>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayHistory {
    pub scenario: Scenario,
    pub block_length: usize,
    pub fidelity: Fidelity,
    pub epochs: Vec<EpochLog>,
}

/// Utility access needed by the regret oracles.
pub trait UtilityOracle {
    fn horizon(&self) -> usize;
    fn players(&self) -> usize;
    fn actions(&self) -> usize;
    fn played(&self, tau: usize, i: usize) -> usize;
    fn realized(&self, tau: usize, i: usize) -> f64;
    fn counterfactual(&self, tau: usize, i: usize, alt: usize) -> Result<f64>;
}

impl PlayHistory {
    pub fn utility_map(&self) -> Result<UtilityMap> {
        UtilityMap::new(self.scenario.beta, self.scenario.s0())
    }

    pub fn profiles(&self) -> Vec<Vec<usize>> {
        self.epochs.iter().map(|e| e.strategies.clone()).collect()
    }

    fn check(&self, tau: usize, i: usize) -> Result<&EpochLog> {
        let log = self
            .epochs
            .get(tau)
            .ok_or_else(|| invalid("history", format!("no log for epoch {}", tau + 1)))?;
        if log.schedules.len() != self.scenario.radar_count() || i >= log.schedules.len() {
            return Err(invalid("history", format!("missing schedules in epoch {}", tau + 1)));
        }
        Ok(log)
    }
}

/// Fast-power replay of epoch `tau` with radar `i` forced onto `alt`.
pub fn counterfactual_utility(history: &PlayHistory, tau: usize, i: usize, alt: usize) -> Result<f64> {
    let log = history.check(tau, i)?;
    let s = &history.scenario;
    if alt >= s.action_space.len() {
        return Err(invalid("alternative", "outside the action space"));
    }
    let k = log.schedules[i].len();
    let own = delta_schedule(alt, history.block_length, k, &s.action_space);
    let trace = fast_power_radar(s, i, &own, &log.schedules);
    cpi_utility(&per_chirp_sinr(&trace), &history.utility_map()?)
}

impl UtilityOracle for PlayHistory {
    fn horizon(&self) -> usize {
        self.epochs.len()
    }

    fn players(&self) -> usize {
        self.scenario.radar_count()
    }

    fn actions(&self) -> usize {
        self.scenario.action_space.len()
    }

    fn played(&self, tau: usize, i: usize) -> usize {
        self.epochs[tau].strategies[i]
    }

    fn realized(&self, tau: usize, i: usize) -> f64 {
        match self.fidelity {
            Fidelity::Fast => self.epochs[tau].utilities[i],
            // waveform utilities carry noise-estimate jitter; compare like with like
            Fidelity::Waveform => counterfactual_utility(self, tau, i, self.played(tau, i))
                .unwrap_or(self.epochs[tau].utilities[i]),
        }
    }

    fn counterfactual(&self, tau: usize, i: usize, alt: usize) -> Result<f64> {
        counterfactual_utility(self, tau, i, alt)
    }
}

/// Finite game given by explicit utility tables, used for small exhaustive checks.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularGame {
    pub actions: usize,
    /// `utility[i]` indexed by the joint profile in mixed radix.
    pub utility: Vec<Vec<f64>>,
    pub profiles: Vec<Vec<usize>>,
}

impl TabularGame {
    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().fold(0, |acc, a| acc * self.actions + a)
    }

    pub fn payoff(&self, i: usize, profile: &[usize]) -> f64 {
        self.utility[i][self.index(profile)]
    }
}

impl UtilityOracle for TabularGame {
    fn horizon(&self) -> usize {
        self.profiles.len()
    }

    fn players(&self) -> usize {
        self.utility.len()
    }

    fn actions(&self) -> usize {
        self.actions
    }

    fn played(&self, tau: usize, i: usize) -> usize {
        self.profiles[tau][i]
    }

    fn realized(&self, tau: usize, i: usize) -> f64 {
        self.payoff(i, &self.profiles[tau])
    }

    fn counterfactual(&self, tau: usize, i: usize, alt: usize) -> Result<f64> {
        let mut p = self.profiles[tau].clone();
        p[i] = alt;
        Ok(self.payoff(i, &p))
    }
}

/// Support of the empirical joint-play distribution as `(profile, count)` over `total` epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub atoms: Vec<(Vec<usize>, usize)>,
    pub total: usize,
}

impl EmpiricalDistribution {
    pub fn mass(&self, profile: &[usize]) -> f64 {
        self.atoms
            .iter()
            .find(|(p, _)| p.as_slice() == profile)
            .map(|(_, c)| *c as f64 / self.total as f64)
            .unwrap_or(0.0)
    }
}

pub fn empirical_distribution(profiles: &[Vec<usize>]) -> EmpiricalDistribution {
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for p in profiles {
        *counts.entry(p.clone()).or_insert(0) += 1;
    }
    EmpiricalDistribution {
        atoms: counts.into_iter().collect(),
        total: profiles.len(),
    }
}

/// Per-epoch utility gaps `U_i(alt, others) - U_i(played)` for every alternative.
pub fn regret_gaps<O: UtilityOracle + ?Sized>(oracle: &O, i: usize) -> Result<Vec<Vec<f64>>> {
    (0..oracle.horizon())
        .map(|tau| {
            let u = oracle.realized(tau, i);
            (0..oracle.actions())
                .map(|alt| Ok(oracle.counterfactual(tau, i, alt)? - u))
                .collect()
        })
        .collect()
}

/// Prefix series of external and swap regret for player `i`.
pub fn regret_series<O: UtilityOracle + ?Sized>(oracle: &O, i: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let gaps = regret_gaps(oracle, i)?;
    let n = oracle.actions();
    let mut ext = vec![0.0; n];
    let mut per_source = vec![vec![0.0; n]; n];
    let mut ext_series = Vec::with_capacity(gaps.len());
    let mut swap_series = Vec::with_capacity(gaps.len());
    for (tau, g) in gaps.iter().enumerate() {
        let s = oracle.played(tau, i);
        for alt in 0..n {
            ext[alt] += g[alt];
            per_source[s][alt] += g[alt];
        }
        let e = max_of(&ext);
        let swap: f64 = per_source.iter().map(|row| max_of(row).max(0.0)).sum();
        // constant maps are swap maps; taking the max keeps the ordering exact under rounding
        ext_series.push(e);
        swap_series.push(swap.max(e));
    }
    Ok((ext_series, swap_series))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn external_regret<O: UtilityOracle + ?Sized>(oracle: &O, i: usize) -> Result<Vec<f64>> {
    Ok(regret_series(oracle, i)?.0)
}

pub fn swap_regret<O: UtilityOracle + ?Sized>(oracle: &O, i: usize) -> Result<Vec<f64>> {
    Ok(regret_series(oracle, i)?.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    #[serde(rename = "CCE")]
    CoarseCorrelated,
    #[serde(rename = "CE")]
    Correlated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub horizon: usize,
    pub eps_ext: Vec<f64>,
    pub eps_ext_max: f64,
    pub eps_int: Vec<f64>,
    pub eps_int_max: f64,
    /// The stronger notion the history certifies at level `eps_int_max`.
    pub kind: EquilibriumKind,
    pub external_series: Vec<Vec<f64>>,
    pub swap_series: Vec<Vec<f64>>,
}

pub fn certify<O: UtilityOracle + ?Sized>(oracle: &O) -> Result<EquilibriumCertificate> {
    let t = oracle.horizon();
    if t == 0 {
        return Err(invalid("history", "no epochs"));
    }
    let mut cert = EquilibriumCertificate {
        horizon: t,
        eps_ext: Vec::new(),
        eps_ext_max: 0.0,
        eps_int: Vec::new(),
        eps_int_max: 0.0,
        kind: EquilibriumKind::Correlated,
        external_series: Vec::new(),
        swap_series: Vec::new(),
    };
    for i in 0..oracle.players() {
        let (ext, swap) = regret_series(oracle, i)?;
        let e = ext[t - 1] / t as f64;
        let s = swap[t - 1] / t as f64;
        cert.eps_ext_max = cert.eps_ext_max.max(e);
        cert.eps_int_max = cert.eps_int_max.max(s);
        cert.eps_ext.push(e);
        cert.eps_int.push(s);
        cert.external_series.push(ext);
        cert.swap_series.push(swap);
    }
    Ok(cert)
}

/// Fraction of transmissions sharing their (subband, slot) cell with another radar on the same chirp.
pub fn collision_rate(schedules: &[ChirpSchedule], space: &ActionSpace) -> f64 {
    let k = schedules.iter().map(|s| s.len()).min().unwrap_or(0);
    if k == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; space.len()];
    let mut hits = 0usize;
    for c in 0..k {
        counts.iter_mut().for_each(|x| *x = 0);
        for s in schedules {
            counts[s.actions[c]] += 1;
        }
        hits += counts.iter().filter(|&&n| n >= 2).sum::<usize>();
    }
    hits as f64 / (schedules.len() * k) as f64
}

/// Fraction of transmissions that receive any band-and-time overlapping interference.
pub fn overlap_rate(scenario: &Scenario, schedules: &[ChirpSchedule]) -> f64 {
    let mut hit = 0usize;
    let mut total = 0usize;
    for (i, s) in schedules.iter().enumerate() {
        let trace = fast_power_radar(scenario, i, s, schedules);
        hit += trace.interference.iter().filter(|x| **x > 0.0).count();
        total += trace.len();
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
