//! TOML scenario configuration and seeded geometry randomization.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    build_action_space, InterferenceGraph, RadarParams, Scenario, Target,
};
use crate::rng_from;

/// Marker for fields drawn from the seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomTag {
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Draw<T> {
    Random(RandomTag),
    Fixed(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionSpaceConfig {
    pub subbands: usize,
    pub slots: usize,
    pub subband_spacing_mhz: f64,
    pub slot_spacing_us: f64,
}

impl Default for ActionSpaceConfig {
    fn default() -> Self {
        ActionSpaceConfig {
            subbands: 3,
            slots: 7,
            subband_spacing_mhz: 150.0,
            slot_spacing_us: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarConfig {
    pub count: usize,
    pub f_c_ghz: f64,
    pub b_mhz: Draw<f64>,
    pub b_range_mhz: [f64; 2],
    pub t_a_us: f64,
    pub t_pri_us: f64,
    pub chirps: usize,
    pub p_t_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub adc_rate_msps: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            count: 4,
            f_c_ghz: 77.0,
            b_mhz: Draw::Random(RandomTag::Random),
            b_range_mhz: [110.0, 150.0],
            t_a_us: 8.89,
            t_pri_us: 29.99,
            chirps: 256,
            p_t_dbm: 13.0,
            antenna_gain_dbi: 20.0,
            adc_rate_msps: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub positions_m: Draw<Vec<[f64; 2]>>,
    pub polygon_radius_m: f64,
    pub position_jitter_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            positions_m: Draw::Random(RandomTag::Random),
            polygon_radius_m: 25.0,
            position_jitter_m: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    pub position_m: Draw<[f64; 2]>,
    pub position_jitter_m: f64,
    pub velocity_mps: Draw<f64>,
    pub velocity_range_mps: [f64; 2],
    pub rcs_dbsm: f64,
    pub max_range_m: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig {
            position_m: Draw::Random(RandomTag::Random),
            position_jitter_m: 5.0,
            velocity_mps: Draw::Random(RandomTag::Random),
            velocity_range_mps: [-25.0, 25.0],
            rcs_dbsm: 20.0,
            max_range_m: 200.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub power_dbm: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { power_dbm: -88.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Full,
    None,
    Edges,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterferenceConfig {
    pub topology: Topology,
    pub delay_us: f64,
    /// `[aggressor, victim, delay_us]` with 1-based radar ids; used when topology = "edges".
    pub edges: Vec<(usize, usize, f64)>,
}

impl Default for InterferenceConfig {
    fn default() -> Self {
        InterferenceConfig {
            topology: Topology::Full,
            delay_us: 0.0,
            edges: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityConfig {
    pub beta: f64,
    pub s0_offset_db: f64,
    pub nominal_range_m: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            beta: 2.0,
            s0_offset_db: -10.0,
            nominal_range_m: 25.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub echo_gain_db: f64,
}

/// External learner settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExternalConfig {
    pub eta: f64,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub gamma_max: f64,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig {
            eta: 0.1252,
            gamma_start: 0.1,
            gamma_end: 0.0,
            gamma_max: 0.5,
        }
    }
}

/// Internal learner settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InternalConfig {
    pub eta: f64,
    pub gamma: f64,
    pub positive_part: bool,
}

impl Default for InternalConfig {
    fn default() -> Self {
        InternalConfig {
            eta: 0.5,
            gamma: 0.0,
            positive_part: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerConfig {
    /// Block length of the round-robin sampler.
    pub block_length: usize,
    pub external: ExternalConfig,
    pub internal: InternalConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub epochs: usize,
    pub action_space: ActionSpaceConfig,
    pub radar: RadarConfig,
    pub geometry: GeometryConfig,
    pub target: TargetConfig,
    pub noise: NoiseConfig,
    pub interference: InterferenceConfig,
    pub utility: UtilityConfig,
    pub calibration: CalibrationConfig,
    pub learner: LearnerConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            epochs: 15,
            action_space: ActionSpaceConfig::default(),
            radar: RadarConfig::default(),
            geometry: GeometryConfig::default(),
            target: TargetConfig::default(),
            noise: NoiseConfig::default(),
            interference: InterferenceConfig::default(),
            utility: UtilityConfig::default(),
            calibration: CalibrationConfig::default(),
            learner: LearnerConfig {
                block_length: 1,
                ..Default::default()
            },
        }
    }
}

/// The baseline configuration document shipped with the crate.
pub const BASELINE_TOML: &str = include_str!("../configs/baseline.toml");

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn baseline() -> Self {
        Self::parse(BASELINE_TOML).expect("bundled config parses")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds a validated scenario, drawing every `"random"` field from `seed`.
    pub fn build(&self, seed: u64) -> Result<Scenario> {
        let mut rng: ChaCha8Rng = rng_from(seed);
        let rc = &self.radar;
        let n = rc.count;
        if n == 0 {
            return Err(invalid("radar.count", "at least one radar required"));
        }
        let ac = &self.action_space;
        let f_c_hz = rc.f_c_ghz * 1e9;
        let action_space = build_action_space(
            ac.subbands,
            ac.subband_spacing_mhz * 1e6,
            ac.slots,
            ac.slot_spacing_us * 1e-6,
            f_c_hz,
        )?;

        let g = &self.geometry;
        let positions: Vec<[f64; 2]> = match &g.positions_m {
            Draw::Fixed(p) => {
                if p.len() != n {
                    return Err(invalid(
                        "geometry.positions_m",
                        format!("{} positions for {} radars", p.len(), n),
                    ));
                }
                p.clone()
            }
            Draw::Random(_) => (0..n)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    let j = disc_point(&mut rng, g.position_jitter_m);
                    [
                        g.polygon_radius_m * phi.cos() + j[0],
                        g.polygon_radius_m * phi.sin() + j[1],
                    ]
                })
                .collect(),
        };

        let tc = &self.target;
        let target_pos = match &tc.position_m {
            Draw::Fixed(p) => *p,
            Draw::Random(_) => disc_point(&mut rng, tc.position_jitter_m),
        };

        let mut radars = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for (k, pos) in positions.iter().enumerate() {
            let b_mhz = match rc.b_mhz {
                Draw::Fixed(b) => b,
                Draw::Random(_) => {
                    let [lo, hi] = rc.b_range_mhz;
                    if !(hi >= lo) {
                        return Err(invalid("radar.b_range_mhz", "upper bound below lower bound"));
                    }
                    rng.gen_range(lo..=hi)
                }
            };
            let velocity = match tc.velocity_mps {
                Draw::Fixed(v) => v,
                Draw::Random(_) => {
                    let [lo, hi] = tc.velocity_range_mps;
                    if !(hi >= lo) {
                        return Err(invalid("target.velocity_range_mps", "upper bound below lower bound"));
                    }
                    rng.gen_range(lo..=hi)
                }
            };
            radars.push(RadarParams {
                id: k + 1,
                f_c_hz,
                bandwidth_hz: b_mhz * 1e6,
                t_a_s: rc.t_a_us * 1e-6,
                t_pri_s: rc.t_pri_us * 1e-6,
                chirps: rc.chirps,
                tx_power_dbm: rc.p_t_dbm,
                position_m: *pos,
                antenna_gain_dbi: rc.antenna_gain_dbi,
                adc_rate_hz: rc.adc_rate_msps * 1e6,
            });
            let dx = pos[0] - target_pos[0];
            let dy = pos[1] - target_pos[1];
            targets.push(vec![Target {
                range_m: (dx * dx + dy * dy).sqrt(),
                velocity_mps: velocity,
                rcs_dbsm: tc.rcs_dbsm,
            }]);
        }

        let ic = &self.interference;
        let graph = match ic.topology {
            Topology::Full => {
                if !(ic.delay_us >= 0.0) {
                    return Err(invalid("interference.delay_us", "must be nonnegative"));
                }
                InterferenceGraph::fully_connected(n, ic.delay_us * 1e-6)
            }
            Topology::None => InterferenceGraph::empty(n),
            Topology::Edges => {
                let mut edges = Vec::with_capacity(ic.edges.len());
                for &(o, i, d) in &ic.edges {
                    if o == 0 || i == 0 {
                        return Err(invalid("interference.edges", "radar ids are 1-based"));
                    }
                    edges.push((o - 1, i - 1, d * 1e-6));
                }
                InterferenceGraph::from_edges(n, &edges)?
            }
        };

        let scenario = Scenario {
            radars,
            targets,
            graph,
            action_space,
            noise_power_dbm: self.noise.power_dbm,
            echo_gain_db: self.calibration.echo_gain_db,
            max_range_m: tc.max_range_m,
            beta: self.utility.beta,
            s0_offset_db: self.utility.s0_offset_db,
            nominal_range_m: self.utility.nominal_range_m,
            epochs: self.epochs,
            seed,
        };
        scenario.validate()?;
        if self.learner.block_length == 0 {
            return Err(invalid("learner.block_length", "must be at least 1"));
        }
        Ok(scenario)
    }
}

/// Parses a config document and builds the scenario from its own seed.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let cfg = ScenarioConfig::parse(text)?;
    cfg.build(cfg.seed)
}

fn disc_point(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    if radius <= 0.0 {
        return [0.0, 0.0];
    }
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_loads() {
        let s = load_scenario(BASELINE_TOML).unwrap();
        assert_eq!(s.radar_count(), 4);
        assert_eq!(s.radars[0].chirps, 256);
        assert!((s.radars[0].t_pri_s - 29.99e-6).abs() < 1e-18);
        assert_eq!(s.radars[0].samples_per_chirp(), 88);
        assert_eq!(s.action_space.len(), 21);
        for r in &s.radars {
            assert!(r.bandwidth_hz >= 110e6 && r.bandwidth_hz <= 150e6);
            let d = (r.position_m[0].powi(2) + r.position_m[1].powi(2)).sqrt();
            assert!(d >= 20.0 && d <= 30.0);
        }
        for t in s.targets.iter().flatten() {
            assert!(t.range_m >= 15.0 && t.range_m <= 35.0);
            assert!(t.velocity_mps.abs() <= 25.0);
        }
    }

    #[test]
    fn chirp_longer_than_pri_rejected() {
        let text = BASELINE_TOML.replace("t_a_us = 8.89", "t_a_us = 31.0");
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("t_pri_us"), "{err}");
    }

    #[test]
    fn same_seed_same_scenario() {
        let text = BASELINE_TOML.replace("seed = 1", "seed = 7");
        assert_eq!(load_scenario(&text).unwrap(), load_scenario(&text).unwrap());
        assert_ne!(load_scenario(&text).unwrap(), load_scenario(BASELINE_TOML).unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{BASELINE_TOML}\n[noise]\nbogus = 1\n");
        assert!(load_scenario(&text).is_err());
        let text = BASELINE_TOML.replace("t_pri_us", "t_pri_ms");
        let err = load_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("t_pri_ms"), "{err}");
    }

    #[test]
    fn fixed_fields() {
        let mut cfg = ScenarioConfig::baseline();
        cfg.radar.count = 2;
        cfg.radar.b_mhz = Draw::Fixed(150.0);
        cfg.geometry.positions_m = Draw::Fixed(vec![[25.0, 0.0], [-25.0, 0.0]]);
        cfg.target.position_m = Draw::Fixed([0.0, 0.0]);
        cfg.target.velocity_mps = Draw::Fixed(-3.0);
        let s = cfg.build(3).unwrap();
        assert_eq!(s.targets[1][0].range_m, 25.0);
        assert_eq!(s.targets[0][0].velocity_mps, -3.0);
        assert_eq!(s.radars[1].bandwidth_hz, 150e6);
        let back = ScenarioConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn explicit_edges() {
        let mut cfg = ScenarioConfig::baseline();
        cfg.interference.topology = Topology::Edges;
        cfg.interference.edges = vec![(1, 2, 0.5)];
        let s = cfg.build(1).unwrap();
        assert_eq!(s.graph.neighbors(1), &[(0, 0.5e-6)]);
        assert!(s.graph.neighbors(0).is_empty());
        cfg.interference.edges = vec![(1, 9, 0.0)];
        assert!(cfg.build(1).is_err());
    }
}
