//! Per-action SINR/SNR estimates and the saturating CPI utility.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::lin_to_db;
use crate::scheduler::ChirpSchedule;
use crate::waveform::PowerTrace;

/// `u(s) = s^beta / (s^beta + s0^beta)` on linear SINR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityMap {
    pub beta: f64,
    pub s0: f64,
}

impl UtilityMap {
    pub fn new(beta: f64, s0: f64) -> Result<Self> {
        if !(beta > 0.0) || !(s0 > 0.0) {
            return Err(invalid("utility", "beta and S0 must be positive"));
        }
        Ok(UtilityMap { beta, s0 })
    }

    pub fn eval(&self, s: f64) -> f64 {
        saturating_utility(s, self)
    }
}

pub fn saturating_utility(s: f64, map: &UtilityMap) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    // ratio form keeps large s finite
    1.0 / (1.0 + (map.s0 / s).powf(map.beta))
}

pub fn per_chirp_sinr(trace: &PowerTrace) -> Vec<f64> {
    (0..trace.len())
        .map(|k| trace.signal[k] / (trace.interference[k] + trace.noise[k]))
        .collect()
}

/// Average SINR over the chirps that used each action.
pub fn estimate_per_action_sinr(trace: &PowerTrace, schedule: &ChirpSchedule) -> BTreeMap<usize, f64> {
    let sinr = per_chirp_sinr(trace);
    average_by_action(schedule, (0..trace.len()).map(|k| Some(sinr[k])))
}

/// Average SNR over interference-free chirps of each action.
pub fn estimate_per_action_snr(trace: &PowerTrace, schedule: &ChirpSchedule) -> BTreeMap<usize, f64> {
    average_by_action(
        schedule,
        (0..trace.len()).map(|k| (trace.interference[k] == 0.0).then(|| trace.signal[k] / trace.noise[k])),
    )
}

fn average_by_action<I: Iterator<Item = Option<f64>>>(schedule: &ChirpSchedule, vals: I) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (k, v) in vals.enumerate() {
        if let Some(v) = v {
            let e = acc.entry(schedule.actions[k]).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(a, (s, n))| (a, s / n as f64)).collect()
}

pub fn cpi_utility(chirp_sinr: &[f64], map: &UtilityMap) -> Result<f64> {
    if chirp_sinr.is_empty() {
        return Err(invalid("feedback", "empty CPI"));
    }
    let mean = chirp_sinr.iter().sum::<f64>() / chirp_sinr.len() as f64;
    Ok(map.eval(mean))
}

/// Mean over chirps of per-chirp SINR in dB, the reported metric.
pub fn sinr_db_metric(chirp_sinr: &[f64]) -> f64 {
    chirp_sinr.iter().map(|s| lin_to_db(*s)).sum::<f64>() / chirp_sinr.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpiFeedback {
    pub epoch: usize,
    pub sinr: BTreeMap<usize, f64>,
    pub snr: BTreeMap<usize, f64>,
    pub mean_sinr: f64,
    pub sinr_db: f64,
    pub utility: f64,
}

pub fn cpi_feedback(trace: &PowerTrace, schedule: &ChirpSchedule, map: &UtilityMap, epoch: usize) -> Result<CpiFeedback> {
    let chirps = per_chirp_sinr(trace);
    let utility = cpi_utility(&chirps, map)?;
    Ok(CpiFeedback {
        epoch,
        sinr: estimate_per_action_sinr(trace, schedule),
        snr: estimate_per_action_snr(trace, schedule),
        mean_sinr: chirps.iter().sum::<f64>() / chirps.len() as f64,
        sinr_db: sinr_db_metric(&chirps),
        utility,
    })
}
