//! Domain types: joint actions, radars, targets, the interference graph and scenarios.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Speed of light in m/s.
pub const C: f64 = 299_792_458.0;

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One (subband, time-slot) pair. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointAction {
    pub a: usize,
    pub b: usize,
    /// Subband start frequency in Hz.
    pub f_hz: f64,
    /// Start-time offset inside the PRI in seconds.
    pub t_s: f64,
}

/// Cartesian grid of joint actions, row-major in (a, b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub a_f: usize,
    pub a_t: usize,
    pub delta_f_hz: f64,
    pub delta_t_s: f64,
    pub f_c_hz: f64,
    pub actions: Vec<JointAction>,
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// 0-based flat index of the 1-based pair (a, b).
    pub fn flat(&self, a: usize, b: usize) -> usize {
        (a - 1) * self.a_t + (b - 1)
    }

    pub fn get(&self, flat: usize) -> &JointAction {
        &self.actions[flat]
    }

    pub fn frequency(&self, a: usize) -> f64 {
        self.f_c_hz + (a as f64 - 1.0) * self.delta_f_hz
    }

    pub fn offset(&self, b: usize) -> f64 {
        (b as f64 - 1.0) * self.delta_t_s
    }

    /// Latest start offset in the grid.
    pub fn max_offset(&self) -> f64 {
        self.offset(self.a_t)
    }

    /// Checks that every slot leaves room for a chirp of `t_a` inside `t_pri`.
    pub fn validate_timing(&self, t_a: f64, t_pri: f64) -> Result<()> {
        if self.max_offset() + t_a > t_pri * (1.0 + 1e-12) {
            return Err(invalid(
                "time_slots",
                format!(
                    "last slot {:.3e} s plus chirp {:.3e} s exceeds PRI {:.3e} s",
                    self.max_offset(),
                    t_a,
                    t_pri
                ),
            ));
        }
        Ok(())
    }
}

pub fn build_action_space(
    a_f: usize,
    delta_f_hz: f64,
    a_t: usize,
    delta_t_s: f64,
    f_c_hz: f64,
) -> Result<ActionSpace> {
    if a_f == 0 || a_t == 0 {
        return Err(invalid("action_space", "A_f and A_t must be at least 1"));
    }
    if !(delta_f_hz > 0.0) || !(delta_t_s > 0.0) {
        return Err(invalid("action_space", "grid spacings must be positive"));
    }
    let mut space = ActionSpace {
        a_f,
        a_t,
        delta_f_hz,
        delta_t_s,
        f_c_hz,
        actions: Vec::with_capacity(a_f * a_t),
    };
    for a in 1..=a_f {
        for b in 1..=a_t {
            let f_hz = space.frequency(a);
            let t_s = space.offset(b);
            space.actions.push(JointAction { a, b, f_hz, t_s });
        }
    }
    Ok(space)
}

/// Flat 0-based index assigned to 1-based radar `i` by the Nash baseline.
pub fn nash_index(i: usize, n: usize) -> usize {
    (i - 1) % n
}

pub fn nash_assignment(i: usize, space: &ActionSpace) -> JointAction {
    *space.get(nash_index(i, space.len()))
}

/// Probability vector over a strategy set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("strategy", "empty"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("strategy", "entries must be finite and nonnegative"));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(invalid("strategy", format!("sums to {s}")));
        }
        Ok(MixedStrategy { probs })
    }

    pub fn delta(n: usize, k: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        MixedStrategy { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Inverse-CDF draw from a uniform variate in [0, 1).
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (k, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                last = k;
            }
            acc += p;
            if u < acc && *p > 0.0 {
                return k;
            }
        }
        last
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_with(rng.gen::<f64>())
    }
}

pub fn uniform_strategy(n: usize) -> Result<MixedStrategy> {
    if n == 0 {
        return Err(invalid("strategy", "n must be at least 1"));
    }
    Ok(MixedStrategy {
        probs: vec![1.0 / n as f64; n],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    pub id: usize,
    pub f_c_hz: f64,
    pub bandwidth_hz: f64,
    pub t_a_s: f64,
    pub t_pri_s: f64,
    pub chirps: usize,
    pub tx_power_dbm: f64,
    pub position_m: [f64; 2],
    pub antenna_gain_dbi: f64,
    pub adc_rate_hz: f64,
}

impl RadarParams {
    /// Chirp slope in Hz/s.
    pub fn slope(&self) -> f64 {
        self.bandwidth_hz / self.t_a_s
    }

    pub fn samples_per_chirp(&self) -> usize {
        (self.t_a_s * self.adc_rate_hz + 1e-9).floor() as usize
    }

    pub fn wavelength(&self) -> f64 {
        C / self.f_c_hz
    }

    pub fn distance_to(&self, other: &RadarParams) -> f64 {
        let dx = self.position_m[0] - other.position_m[0];
        let dy = self.position_m[1] - other.position_m[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// Coarse-range bin spacing in metres.
    pub fn range_bin_m(&self) -> f64 {
        self.adc_rate_hz * C / (2.0 * self.slope() * self.samples_per_chirp() as f64)
    }

    /// Doppler bin spacing in m/s.
    pub fn velocity_bin_mps(&self) -> f64 {
        C / (2.0 * self.f_c_hz * self.chirps as f64 * self.t_pri_s)
    }

    pub fn validate(&self) -> Result<()> {
        let f = |s: &str| format!("radar {}: {}", self.id, s);
        if !(self.t_a_s > 0.0) {
            return Err(invalid(&f("t_a_us"), "must be positive"));
        }
        if !(self.t_pri_s > self.t_a_s) {
            return Err(invalid(&f("t_pri_us"), "must exceed the active duration"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(invalid(&f("b_mhz"), "must be positive"));
        }
        if self.chirps == 0 {
            return Err(invalid(&f("chirps"), "must be at least 1"));
        }
        if !(self.adc_rate_hz > 0.0) || self.samples_per_chirp() == 0 {
            return Err(invalid(&f("adc_rate_msps"), "gives no samples per chirp"));
        }
        if !(self.f_c_hz > 0.0) {
            return Err(invalid(&f("f_c_ghz"), "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    /// Radial velocity, negative when approaching.
    pub velocity_mps: f64,
    pub rcs_dbsm: f64,
}

/// Directed interference edges: `incoming[i]` lists `(o, delay_s)` for each aggressor o of victim i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceGraph {
    pub nodes: usize,
    pub incoming: Vec<Vec<(usize, f64)>>,
}

impl InterferenceGraph {
    pub fn fully_connected(nodes: usize, delay_s: f64) -> Self {
        let incoming = (0..nodes)
            .map(|i| (0..nodes).filter(|&o| o != i).map(|o| (o, delay_s)).collect())
            .collect();
        InterferenceGraph { nodes, incoming }
    }

    pub fn empty(nodes: usize) -> Self {
        InterferenceGraph {
            nodes,
            incoming: vec![Vec::new(); nodes],
        }
    }

    /// Builds a graph from `(aggressor, victim, delay)` edges.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::empty(nodes);
        for &(o, i, d) in edges {
            if o >= nodes || i >= nodes {
                return Err(invalid("interference.edges", format!("edge {o}->{i} names an undeclared radar")));
            }
            if o == i {
                return Err(invalid("interference.edges", format!("self-edge on radar {i}")));
            }
            if !(d >= 0.0) {
                return Err(invalid("interference.edges", "delays must be nonnegative"));
            }
            g.incoming[i].push((o, d));
        }
        Ok(g)
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.incoming[i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub radars: Vec<RadarParams>,
    /// One target list per radar, as seen from that radar.
    pub targets: Vec<Vec<Target>>,
    pub graph: InterferenceGraph,
    pub action_space: ActionSpace,
    pub noise_power_dbm: f64,
    /// Extra gain applied to target echoes, used to calibrate absolute SINR levels.
    pub echo_gain_db: f64,
    pub max_range_m: f64,
    /// Utility exponent.
    pub beta: f64,
    /// Half-good SINR relative to the clean SNR of a target at `nominal_range_m`.
    pub s0_offset_db: f64,
    pub nominal_range_m: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn radar_count(&self) -> usize {
        self.radars.len()
    }

    pub fn noise_power_mw(&self) -> f64 {
        db_to_lin(self.noise_power_dbm)
    }

    /// Echo power in mW for radar `i` and target `t`.
    pub fn echo_power_mw(&self, i: usize, t: &Target) -> f64 {
        let r = &self.radars[i];
        radar_equation_mw(r, t.rcs_dbsm, t.range_m) * db_to_lin(self.echo_gain_db)
    }

    /// Interference power in mW received by `victim` from `aggressor` at full overlap.
    pub fn interference_power_mw(&self, victim: usize, aggressor: usize) -> f64 {
        let v = &self.radars[victim];
        let o = &self.radars[aggressor];
        one_way_mw(o.tx_power_dbm, o.antenna_gain_dbi, v.antenna_gain_dbi, v.wavelength(), v.distance_to(o))
    }

    /// Clean per-sample SNR of a reference target at the nominal range, seen by radar 0.
    pub fn nominal_snr(&self) -> f64 {
        let rcs = self.targets.first().and_then(|t| t.first()).map(|t| t.rcs_dbsm).unwrap_or(0.0);
        let t = Target {
            range_m: self.nominal_range_m,
            velocity_mps: 0.0,
            rcs_dbsm: rcs,
        };
        self.echo_power_mw(0, &t) / self.noise_power_mw()
    }

    /// Half-good SINR used by the utility map.
    pub fn s0(&self) -> f64 {
        self.nominal_snr() * db_to_lin(self.s0_offset_db)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radars.is_empty() {
            return Err(invalid("radars.count", "at least one radar required"));
        }
        if self.targets.len() != self.radars.len() {
            return Err(invalid("targets", "one target list per radar required"));
        }
        if self.graph.nodes != self.radars.len() {
            return Err(invalid("interference", "graph size differs from radar count"));
        }
        for (i, edges) in self.graph.incoming.iter().enumerate() {
            for &(o, d) in edges {
                if o == i || o >= self.radars.len() || !(d >= 0.0) {
                    return Err(invalid("interference.edges", format!("bad edge {o}->{i}")));
                }
            }
        }
        for r in &self.radars {
            r.validate()?;
            self.action_space.validate_timing(r.t_a_s, r.t_pri_s)?;
        }
        for (i, ts) in self.targets.iter().enumerate() {
            for t in ts {
                if !(t.range_m > 0.0) || t.range_m > self.max_range_m {
                    return Err(invalid(
                        &format!("target of radar {}", i + 1),
                        format!("range {} m outside (0, {}]", t.range_m, self.max_range_m),
                    ));
                }
            }
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("utility.beta", "must be positive"));
        }
        Ok(())
    }
}

/// Monostatic radar equation, result in mW.
pub fn radar_equation_mw(r: &RadarParams, rcs_dbsm: f64, range_m: f64) -> f64 {
    let g = db_to_lin(r.antenna_gain_dbi);
    let lambda = r.wavelength();
    let four_pi = 4.0 * std::f64::consts::PI;
    db_to_lin(r.tx_power_dbm) * g * g * lambda * lambda * db_to_lin(rcs_dbsm)
        / (four_pi.powi(3) * range_m.powi(4))
}

/// One-way free-space link, result in mW.
pub fn one_way_mw(tx_dbm: f64, g_tx_dbi: f64, g_rx_dbi: f64, lambda: f64, d: f64) -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    db_to_lin(tx_dbm) * db_to_lin(g_tx_dbi) * db_to_lin(g_rx_dbi) * lambda * lambda
        / (four_pi.powi(2) * d * d)
}
