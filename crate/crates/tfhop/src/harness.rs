//! Experiment driver: epoch loop, Monte Carlo trials, metrics and file outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{certify, collision_rate, overlap_rate, EpochLog, EquilibriumCertificate, PlayHistory};
use crate::config::ScenarioConfig;
use crate::error::{invalid, Error, Result};
use crate::feedback::{cpi_feedback, CpiFeedback, UtilityMap};
use crate::learning::{ExternalLearner, GammaSchedule, InternalLearner};
use crate::model::{lin_to_db, nash_index, uniform_strategy, MixedStrategy, Scenario};
use crate::rd::{detect_peak, rd_process, Detection};
use crate::scheduler::{delta_schedule, ChirpSchedule};
use crate::waveform::{fast_power_sim, synthesize_cpi_adc, AdcMatrix, PowerTrace};
use crate::{rng_from, sub_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Random,
    Nash,
    External,
    Internal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Random, Algorithm::Nash, Algorithm::External, Algorithm::Internal];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Nash => "nash",
            Algorithm::External => "external",
            Algorithm::Internal => "internal",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    Fast,
    Waveform,
}

impl FromStr for Fidelity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Fidelity::Fast),
            "waveform" => Ok(Fidelity::Waveform),
            _ => Err(invalid("fidelity", format!("unknown fidelity `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub config: ScenarioConfig,
    pub algorithm: Algorithm,
    pub epochs: usize,
    pub trials: usize,
    pub seed: u64,
    pub fidelity: Fidelity,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Spec taking epochs and seed from the config.
    pub fn new(config: ScenarioConfig, algorithm: Algorithm, trials: usize) -> Self {
        ExperimentSpec {
            epochs: config.epochs,
            seed: config.seed,
            config,
            algorithm,
            trials,
            fidelity: Fidelity::Fast,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.config.learner.block_length == 0 {
            return Err(invalid("learner.block_length", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Player {
    Nash(usize),
    Random(MixedStrategy),
    External(ExternalLearner),
    Internal(InternalLearner),
}

impl Player {
    pub fn strategy(&self, n: usize) -> MixedStrategy {
        match self {
            Player::Nash(k) => MixedStrategy::delta(n, *k),
            Player::Random(p) => p.clone(),
            Player::External(l) => l.p.clone(),
            Player::Internal(l) => l.p.clone(),
        }
    }
}

/// One row per (trial, epoch, radar).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub trial: usize,
    pub epoch: usize,
    pub radar: usize,
    pub strategy: usize,
    pub a: usize,
    pub b: usize,
    pub sinr_db: f64,
    pub snr_db: f64,
    pub utility: f64,
    pub collision_rate: f64,
    pub overlap_rate: f64,
}

pub const METRICS_HEADER: [&str; 11] = [
    "trial",
    "epoch",
    "radar",
    "strategy",
    "a",
    "b",
    "sinr_db",
    "snr_db",
    "utility",
    "collision_rate",
    "overlap_rate",
];

#[derive(Clone, Debug)]
pub struct TrialState {
    pub trial: usize,
    pub scenario: Scenario,
    pub players: Vec<Player>,
    pub rng: ChaCha8Rng,
    pub history: PlayHistory,
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub utility: UtilityMap,
}

#[derive(Clone, Debug)]
pub struct EpochOutcome {
    pub rows: Vec<MetricsRow>,
    /// Strategy in force during the epoch, per radar.
    pub strategies: Vec<MixedStrategy>,
    pub feedback: Vec<CpiFeedback>,
    pub adc: Option<Vec<AdcMatrix>>,
}

/// Sub-seed for the scenario draw of trial `t`.
pub fn trial_scenario_seed(seed: u64, trial: usize) -> u64 {
    sub_seed(seed, 2 * trial as u64)
}

/// Sub-seed driving strategy sampling and noise of trial `t`.
pub fn trial_play_seed(seed: u64, trial: usize) -> u64 {
    sub_seed(seed, 2 * trial as u64 + 1)
}

impl TrialState {
    pub fn new(spec: &ExperimentSpec, trial: usize) -> Result<Self> {
        spec.validate()?;
        let mut scenario = spec.config.build(trial_scenario_seed(spec.seed, trial))?;
        scenario.epochs = spec.epochs;
        Self::with_scenario(spec, trial, scenario)
    }

    pub fn with_scenario(spec: &ExperimentSpec, trial: usize, scenario: Scenario) -> Result<Self> {
        let n = scenario.action_space.len();
        let lc = &spec.config.learner;
        let players = (0..scenario.radar_count())
            .map(|i| {
                Ok(match spec.algorithm {
                    Algorithm::Nash => Player::Nash(nash_index(i + 1, n)),
                    Algorithm::Random => Player::Random(uniform_strategy(n)?),
                    Algorithm::External => Player::External(ExternalLearner::new(
                        n,
                        lc.external.eta,
                        GammaSchedule::Linear {
                            start: lc.external.gamma_start,
                            end: lc.external.gamma_end,
                        },
                        spec.epochs,
                    )?),
                    Algorithm::Internal => Player::Internal(InternalLearner::new(
                        n,
                        lc.internal.eta,
                        lc.internal.gamma,
                        lc.internal.positive_part,
                    )?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let utility = UtilityMap::new(scenario.beta, scenario.s0())?;
        Ok(TrialState {
            trial,
            history: PlayHistory {
                scenario: scenario.clone(),
                block_length: lc.block_length,
                fidelity: spec.fidelity,
                epochs: Vec::new(),
            },
            scenario,
            players,
            rng: rng_from(trial_play_seed(spec.seed, trial)),
            algorithm: spec.algorithm,
            horizon: spec.epochs,
            utility,
        })
    }
}

/// Executes one CPI and applies the algorithm's update.
pub fn run_epoch(state: &mut TrialState, fidelity: Fidelity, keep_adc: bool) -> Result<EpochOutcome> {
    let epoch = state.history.epochs.len() + 1;
    epoch_inner(state, fidelity, keep_adc, epoch).map_err(|e| Error::Epoch {
        epoch,
        source: Box::new(e),
    })
}

fn epoch_inner(state: &mut TrialState, fidelity: Fidelity, keep_adc: bool, epoch: usize) -> Result<EpochOutcome> {
    let sc = &state.scenario;
    let space = &sc.action_space;
    let n = space.len();
    let ell = state.history.block_length;
    let strategies: Vec<MixedStrategy> = state.players.iter().map(|p| p.strategy(n)).collect();
    let played: Vec<usize> = strategies.iter().map(|q| q.sample(&mut state.rng)).collect();
    let schedules: Vec<ChirpSchedule> = played
        .iter()
        .zip(&sc.radars)
        .map(|(&s, r)| delta_schedule(s, ell, r.chirps, space))
        .collect();
    let (traces, adc): (Vec<PowerTrace>, Option<Vec<AdcMatrix>>) = match fidelity {
        Fidelity::Fast => (fast_power_sim(sc, &schedules), None),
        Fidelity::Waveform => {
            let adc = synthesize_cpi_adc(sc, &schedules, &mut state.rng);
            (adc.iter().map(|m| m.component_powers()).collect(), Some(adc))
        }
    };
    let feedback = traces
        .iter()
        .zip(&schedules)
        .map(|(t, s)| cpi_feedback(t, s, &state.utility, epoch))
        .collect::<Result<Vec<_>>>()?;
    let coll = collision_rate(&schedules, space);
    let over = overlap_rate(sc, &schedules);
    let rows = (0..sc.radar_count())
        .map(|i| {
            let act = space.get(played[i]);
            let clean: Vec<f64> = traces[i].signal.iter().zip(&traces[i].noise).map(|(s, n)| s / n).collect();
            MetricsRow {
                trial: state.trial,
                epoch,
                radar: i + 1,
                strategy: played[i],
                a: act.a,
                b: act.b,
                sinr_db: feedback[i].sinr_db,
                snr_db: clean.iter().map(|x| lin_to_db(*x)).sum::<f64>() / clean.len() as f64,
                utility: feedback[i].utility,
                collision_rate: coll,
                overlap_rate: over,
            }
        })
        .collect();
    for (i, player) in state.players.iter_mut().enumerate() {
        let u = feedback[i].utility;
        match player {
            Player::External(l) => l.observe(u, played[i], epoch)?,
            Player::Internal(l) => l.observe(u, played[i])?,
            Player::Nash(_) | Player::Random(_) => {}
        }
    }
    state.history.epochs.push(EpochLog {
        strategies: played,
        utilities: feedback.iter().map(|f| f.utility).collect(),
        schedules,
    });
    Ok(EpochOutcome {
        rows,
        strategies,
        feedback,
        adc: if keep_adc { adc } else { None },
    })
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: usize,
    pub rows: Vec<MetricsRow>,
    pub strategies: Vec<Vec<MixedStrategy>>,
    pub history: PlayHistory,
    pub certificate: EquilibriumCertificate,
}

impl TrialResult {
    /// Mean over radars of the SINR metric at 1-based `epoch`.
    pub fn mean_sinr_db(&self, epoch: usize) -> f64 {
        let r: Vec<f64> = self.rows.iter().filter(|r| r.epoch == epoch).map(|r| r.sinr_db).collect();
        r.iter().sum::<f64>() / r.len() as f64
    }

    pub fn collision_rate(&self, epoch: usize) -> f64 {
        self.rows.iter().find(|r| r.epoch == epoch).map(|r| r.collision_rate).unwrap_or(0.0)
    }

    pub fn final_epoch(&self) -> usize {
        self.history.epochs.len()
    }
}

pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialResult> {
    run_state(spec, TrialState::new(spec, trial)?)
}

/// Runs every epoch of an already initialized trial.
pub fn run_state(spec: &ExperimentSpec, mut state: TrialState) -> Result<TrialResult> {
    let mut rows = Vec::new();
    let mut strategies = Vec::new();
    for _ in 0..spec.epochs {
        let out = run_epoch(&mut state, spec.fidelity, false)?;
        rows.extend(out.rows);
        strategies.push(out.strategies);
    }
    let certificate = certify(&state.history)?;
    Ok(TrialResult {
        trial: state.trial,
        rows,
        strategies,
        history: state.history,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub sinr_db_mean: f64,
    pub sinr_db_std: f64,
    pub collision_mean: f64,
    pub collision_std: f64,
    pub overlap_mean: f64,
    pub utility_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub algorithm: Algorithm,
    pub fidelity: Fidelity,
    pub radars: usize,
    pub trials: usize,
    pub epochs: usize,
    pub seed: u64,
    pub per_epoch: Vec<EpochSummary>,
    pub eps_ext_mean: f64,
    pub eps_int_mean: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialResult>,
    pub summary: ExperimentSummary,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

pub fn summarize(spec: &ExperimentSpec, trials: &[TrialResult]) -> ExperimentSummary {
    let per_epoch = (1..=spec.epochs)
        .map(|e| {
            let sinr: Vec<f64> = trials.iter().map(|t| t.mean_sinr_db(e)).collect();
            let coll: Vec<f64> = trials.iter().map(|t| t.collision_rate(e)).collect();
            let over: Vec<f64> = trials
                .iter()
                .filter_map(|t| t.rows.iter().find(|r| r.epoch == e).map(|r| r.overlap_rate))
                .collect();
            let util: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.rows.iter().filter(move |r| r.epoch == e).map(|r| r.utility))
                .collect();
            let (sm, ss) = mean_std(&sinr);
            let (cm, cs) = mean_std(&coll);
            EpochSummary {
                epoch: e,
                sinr_db_mean: sm,
                sinr_db_std: ss,
                collision_mean: cm,
                collision_std: cs,
                overlap_mean: mean_std(&over).0,
                utility_mean: mean_std(&util).0,
            }
        })
        .collect();
    let ext: Vec<f64> = trials.iter().map(|t| t.certificate.eps_ext_max).collect();
    let int: Vec<f64> = trials.iter().map(|t| t.certificate.eps_int_max).collect();
    ExperimentSummary {
        algorithm: spec.algorithm,
        fidelity: spec.fidelity,
        radars: spec.config.radar.count,
        trials: spec.trials,
        epochs: spec.epochs,
        seed: spec.seed,
        per_epoch,
        eps_ext_mean: mean_std(&ext).0,
        eps_int_mean: mean_std(&int).0,
    }
}

/// Runs all trials and, when `out_dir` is set, writes the output files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let trials = (0..spec.trials).map(|t| run_trial(spec, t)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(spec, &trials);
    let result = ExperimentResult {
        spec: spec.clone(),
        trials,
        summary,
    };
    if let Some(dir) = &spec.out_dir {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_history(path: &Path) -> Result<PlayHistory> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct TrialCertificate<'a> {
    trial: usize,
    #[serde(flatten)]
    certificate: &'a EquilibriumCertificate,
}

/// Writes metrics, strategy, feedback and schedule CSVs plus certificate, summary and history JSON.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("metrics.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    // header comes from the serde field names, which METRICS_HEADER mirrors
    for t in &result.trials {
        for r in &t.rows {
            w.serialize(r).map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("strategies.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["trial", "epoch", "radar", "action", "probability"]).map_err(csv_err(&path))?;
    for t in &result.trials {
        for (e, snap) in t.strategies.iter().enumerate() {
            for (i, p) in snap.iter().enumerate() {
                for (k, prob) in p.probs.iter().enumerate() {
                    w.write_record(&[
                        t.trial.to_string(),
                        (e + 1).to_string(),
                        (i + 1).to_string(),
                        k.to_string(),
                        format!("{prob:.12e}"),
                    ])
                    .map_err(csv_err(&path))?;
                }
            }
        }
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("feedback.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["trial", "epoch", "radar", "a", "b", "sinr_db", "snr_db", "utility"]).map_err(csv_err(&path))?;
    for t in &result.trials {
        for r in &t.rows {
            w.write_record(&[
                r.trial.to_string(),
                r.epoch.to_string(),
                r.radar.to_string(),
                r.a.to_string(),
                r.b.to_string(),
                r.sinr_db.to_string(),
                r.snr_db.to_string(),
                r.utility.to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;

    // per-chirp schedules of the last epoch of the first trial
    if let Some(last) = result.trials.first().and_then(|t| t.history.epochs.last()) {
        let space = &result.trials[0].history.scenario.action_space;
        for (i, sched) in last.schedules.iter().enumerate() {
            let path = dir.join(format!("schedule_r{}.csv", i + 1));
            let mut w = create(&path)?;
            sched.write_csv(space, &mut w)?;
            w.flush().map_err(io_err(&path))?;
        }
    }

    let certs: Vec<TrialCertificate> = result
        .trials
        .iter()
        .map(|t| TrialCertificate {
            trial: t.trial,
            certificate: &t.certificate,
        })
        .collect();
    write_json(&dir.join("certificates.json"), &certs)?;
    write_json(&dir.join("summary.json"), &result.summary)?;
    write_json(&dir.join("spec.json"), &result.spec)?;
    for t in &result.trials {
        write_json(&dir.join(format!("history_{}.json", t.trial)), &t.history)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdExport {
    pub radar: usize,
    pub epoch: usize,
    pub truth_range_m: f64,
    pub truth_velocity_mps: f64,
    pub detected_range_m: f64,
    pub detected_velocity_mps: f64,
    pub peak_db: f64,
    pub median_db: f64,
    pub csv: PathBuf,
    pub adc: PathBuf,
    pub grid: crate::rd::RdGrid,
}

pub struct RdResult {
    pub export: RdExport,
    pub detection: Detection,
    pub cube: crate::rd::RdCube,
}

/// Runs trial 0 of a waveform spec up to `epoch` and processes radar `radar` (1-based).
pub fn rd_cube_at(spec: &ExperimentSpec, radar: usize, epoch: usize) -> Result<(crate::rd::RdCube, Scenario, ChirpSchedule, AdcMatrix)> {
    if spec.fidelity != Fidelity::Waveform {
        return Err(invalid("fidelity", "RD export needs waveform fidelity"));
    }
    let mut state = TrialState::new(spec, 0)?;
    if radar == 0 || radar > state.scenario.radar_count() {
        return Err(invalid("radar", format!("no radar {radar}")));
    }
    if epoch == 0 || epoch > spec.epochs {
        return Err(invalid("epoch", format!("must lie in 1..={}", spec.epochs)));
    }
    let mut last = None;
    for e in 1..=epoch {
        let out = run_epoch(&mut state, Fidelity::Waveform, e == epoch)?;
        last = out.adc;
    }
    let adc = last
        .and_then(|mut v| (radar <= v.len()).then(|| v.swap_remove(radar - 1)))
        .ok_or_else(|| invalid("rd", "no ADC captured"))?;
    let sched = state.history.epochs[epoch - 1].schedules[radar - 1].clone();
    let sc = state.scenario;
    let cube = rd_process(&adc.total(), &sc.radars[radar - 1], &sc.action_space, &sched);
    Ok((cube, sc, sched, adc))
}

/// Median over the cube of the magnitude in dB.
pub fn median_db(cube: &crate::rd::RdCube) -> f64 {
    let mut v: Vec<f64> = cube.values.iter().map(|x| x.norm_sqr()).collect();
    let mid = v.len() / 2;
    v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    lin_to_db(v[mid])
}

/// Writes `rdcube_r{radar}_e{epoch}.csv`, its JSON sidecar and the raw ADC matrix.
pub fn export_rd_cube(spec: &ExperimentSpec, radar: usize, epoch: usize, dir: &Path) -> Result<RdResult> {
    let (cube, sc, _sched, adc) = rd_cube_at(spec, radar, epoch)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let target = sc.targets[radar - 1].first().cloned();
    let truth = target.map(|t| (t.range_m, t.velocity_mps));
    let stem = format!("rdcube_r{radar}_e{epoch}");
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = create(&csv_path)?;
    cube.write_csv(truth, &mut w)?;
    w.flush().map_err(io_err(&csv_path))?;
    let adc_path = dir.join(format!("adc_r{radar}_e{epoch}.bin"));
    let mut w = create(&adc_path)?;
    adc.write_binary(&adc.total(), &mut w)?;
    w.flush().map_err(io_err(&adc_path))?;
    let detection = detect_peak(&cube);
    let export = RdExport {
        radar,
        epoch,
        truth_range_m: truth.map(|t| t.0).unwrap_or(f64::NAN),
        truth_velocity_mps: truth.map(|t| t.1).unwrap_or(f64::NAN),
        detected_range_m: detection.range_m,
        detected_velocity_mps: detection.velocity_mps,
        peak_db: lin_to_db(detection.power),
        median_db: median_db(&cube),
        csv: csv_path,
        adc: adc_path,
        grid: cube.grid.clone(),
    };
    write_json(&dir.join(format!("{stem}.json")), &export)?;
    Ok(RdResult { export, detection, cube })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub radars: usize,
    pub sinr_db_mean: f64,
    pub sinr_db_std: f64,
    pub collision_mean: f64,
}

/// Final-epoch SINR over radar counts, each count with its own trials.
pub fn sweep_radar_counts(base: &ExperimentSpec, counts: &[usize]) -> Result<Vec<SweepPoint>> {
    counts
        .iter()
        .map(|&n| {
            let mut spec = base.clone();
            spec.config.radar.count = n;
            spec.out_dir = None;
            let res = run_experiment(&spec)?;
            let last = res.summary.per_epoch.last().cloned().ok_or_else(|| invalid("epochs", "empty run"))?;
            let all: Vec<f64> = res
                .trials
                .iter()
                .map(|t| (1..=spec.epochs).map(|e| t.mean_sinr_db(e)).sum::<f64>() / spec.epochs as f64)
                .collect();
            let (m, s) = mean_std(&all);
            Ok(SweepPoint {
                radars: n,
                sinr_db_mean: m,
                sinr_db_std: s,
                collision_mean: last.collision_mean,
            })
        })
        .collect()
}

/// Echo gain that moves the mean SINR of `measured_db` to `target_db`.
pub fn calibrate_echo_gain(current_gain_db: f64, measured_db: f64, target_db: f64) -> f64 {
    current_gain_db + target_db - measured_db
}
