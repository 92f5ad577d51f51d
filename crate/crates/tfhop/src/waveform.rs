//! Dechirped baseband synthesis and the closed-form power simulator.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{RadarParams, Scenario, Target, C};
use crate::scheduler::ChirpSchedule;

/// Time-frequency footprint of one transmitted chirp. Times are absolute within the CPI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChirpWindow {
    pub f_start_hz: f64,
    pub bandwidth_hz: f64,
    pub t_start_s: f64,
    pub duration_s: f64,
}

impl ChirpWindow {
    /// Window of chirp `k` (0-based) of `radar` under `schedule`.
    pub fn of(radar: &RadarParams, scenario: &Scenario, schedule: &ChirpSchedule, k: usize) -> Self {
        let act = scenario.action_space.get(schedule.actions[k]);
        ChirpWindow {
            f_start_hz: act.f_hz,
            bandwidth_hz: radar.bandwidth_hz,
            t_start_s: k as f64 * radar.t_pri_s + act.t_s,
            duration_s: radar.t_a_s,
        }
    }
}

/// Returns the absolute time intersection when the swept bands and the active
/// windows (aggressor delayed by `delay_s`) both overlap with positive length.
pub fn overlap_detect(victim: &ChirpWindow, aggressor: &ChirpWindow, delay_s: f64) -> Option<(f64, f64)> {
    let f_lo = victim.f_start_hz.max(aggressor.f_start_hz);
    let f_hi = (victim.f_start_hz + victim.bandwidth_hz).min(aggressor.f_start_hz + aggressor.bandwidth_hz);
    if f_hi - f_lo <= 0.0 {
        return None;
    }
    let a0 = aggressor.t_start_s + delay_s;
    let t_lo = victim.t_start_s.max(a0);
    let t_hi = (victim.t_start_s + victim.duration_s).min(a0 + aggressor.duration_s);
    if t_hi - t_lo <= 0.0 {
        return None;
    }
    Some((t_lo, t_hi))
}

/// Per-chirp powers in mW seen by one radar.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerTrace {
    pub signal: Vec<f64>,
    pub interference: Vec<f64>,
    pub noise: Vec<f64>,
}

impl PowerTrace {
    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }
}

/// Closed-form per-chirp powers for every radar.
pub fn fast_power_sim(scenario: &Scenario, schedules: &[ChirpSchedule]) -> Vec<PowerTrace> {
    (0..scenario.radar_count())
        .map(|i| fast_power_radar(scenario, i, &schedules[i], schedules))
        .collect()
}

/// Powers for radar `i` transmitting `own` while every other radar follows `schedules`.
pub fn fast_power_radar(
    scenario: &Scenario,
    i: usize,
    own: &ChirpSchedule,
    schedules: &[ChirpSchedule],
) -> PowerTrace {
    let radar = &scenario.radars[i];
    let k_i = own.len();
    let signal: f64 = scenario.targets[i].iter().map(|t| scenario.echo_power_mw(i, t)).sum();
    let mut interference = vec![0.0; k_i];
    for &(o, delay) in scenario.graph.neighbors(i) {
        let p_full = scenario.interference_power_mw(i, o);
        let agg = &scenario.radars[o];
        for (k, slot) in interference.iter_mut().enumerate() {
            let v = ChirpWindow::of(radar, scenario, own, k);
            let mut frac = 0.0;
            for j in candidate_chirps(&v, agg, scenario, schedules[o].len(), delay) {
                let w = ChirpWindow::of(agg, scenario, &schedules[o], j);
                if let Some((t0, t1)) = overlap_detect(&v, &w, delay) {
                    frac += (t1 - t0) / radar.t_a_s;
                }
            }
            *slot += p_full * frac;
        }
    }
    PowerTrace {
        signal: vec![signal; k_i],
        interference,
        noise: vec![scenario.noise_power_mw(); k_i],
    }
}

/// Aggressor chirp indices whose active window can touch `v`.
fn candidate_chirps(
    v: &ChirpWindow,
    agg: &RadarParams,
    scenario: &Scenario,
    k_o: usize,
    delay: f64,
) -> std::ops::Range<usize> {
    let span = scenario.action_space.max_offset() + agg.t_a_s;
    let lo = ((v.t_start_s - delay - span) / agg.t_pri_s).floor();
    let hi = ((v.t_start_s + v.duration_s - delay) / agg.t_pri_s).floor() + 1.0;
    let lo = lo.max(0.0) as usize;
    let hi = (hi.max(0.0) as usize).min(k_o);
    lo..hi.max(lo)
}

/// Component-tracked dechirped ADC data, stored chirp-major (`[k * n_t + n]`).
#[derive(Clone, Debug, PartialEq)]
pub struct AdcMatrix {
    pub n_t: usize,
    pub k: usize,
    pub fs_hz: f64,
    pub clean: Vec<Complex64>,
    /// `(aggressor, component)` pairs.
    pub interference: Vec<(usize, Vec<Complex64>)>,
    pub noise: Vec<Complex64>,
}

impl AdcMatrix {
    pub fn zeros(n_t: usize, k: usize, fs_hz: f64) -> Self {
        AdcMatrix {
            n_t,
            k,
            fs_hz,
            clean: vec![Complex64::new(0.0, 0.0); n_t * k],
            interference: Vec::new(),
            noise: vec![Complex64::new(0.0, 0.0); n_t * k],
        }
    }

    pub fn interference_sum(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_t * self.k];
        for (_, comp) in &self.interference {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += c;
            }
        }
        out
    }

    pub fn total(&self) -> Vec<Complex64> {
        let mut out = self.interference_sum();
        for ((o, c), e) in out.iter_mut().zip(&self.clean).zip(&self.noise) {
            *o += c + e;
        }
        out
    }

    pub fn chirp<'a>(&self, data: &'a [Complex64], k: usize) -> &'a [Complex64] {
        &data[k * self.n_t..(k + 1) * self.n_t]
    }

    /// Per-chirp powers of the tracked components.
    pub fn component_powers(&self) -> PowerTrace {
        let interf = self.interference_sum();
        let p = |data: &[Complex64], k: usize| mean_power(self.chirp(data, k));
        PowerTrace {
            signal: (0..self.k).map(|k| p(&self.clean, k)).collect(),
            interference: (0..self.k).map(|k| p(&interf, k)).collect(),
            noise: (0..self.k).map(|k| p(&self.noise, k)).collect(),
        }
    }

    /// Binary dump: text header line then little-endian (re, im) f64 pairs, row-major N_t x K.
    pub fn write_binary<W: Write>(&self, data: &[Complex64], mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        writeln!(w, "n_t={} k={} fs_hz={}", self.n_t, self.k, self.fs_hz).map_err(io)?;
        for n in 0..self.n_t {
            for k in 0..self.k {
                let z = data[k * self.n_t + n];
                w.write_all(&z.re.to_le_bytes()).map_err(io)?;
                w.write_all(&z.im.to_le_bytes()).map_err(io)?;
            }
        }
        Ok(())
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Target beat samples for 1-based chirp `k` with hop offset `delta_f_hz` and shift offset `delta_t_s`.
pub fn target_beat_signal(
    radar: &RadarParams,
    target: &Target,
    amplitude: Complex64,
    delta_f_hz: f64,
    delta_t_s: f64,
    k: usize,
) -> Vec<Complex64> {
    let n_t = radar.samples_per_chirp();
    let f_r = radar.slope() * 2.0 * target.range_m / C;
    let f_d = radar.f_c_hz * 2.0 * target.velocity_mps / C;
    let slow = (k as f64 - 1.0) * radar.t_pri_s + delta_t_s;
    let tau = 2.0 / C * (target.range_m + target.velocity_mps * slow);
    let phase0 = f_d * slow + delta_f_hz * tau;
    (0..n_t)
        .map(|n| {
            let t = n as f64 / radar.adc_rate_hz;
            amplitude * Complex64::from_polar(1.0, 2.0 * PI * (f_r * t + phase0))
        })
        .collect()
}

/// Sample range `[n0, n1)` of the victim chirp covered by the absolute window `(t0, t1)`.
pub fn gate_samples(victim: &RadarParams, victim_start_s: f64, window: (f64, f64)) -> (usize, usize) {
    let n_t = victim.samples_per_chirp();
    let fs = victim.adc_rate_hz;
    let idx = |t: f64| {
        let x = (t - victim_start_s) * fs;
        (x - 1e-9).ceil().clamp(0.0, n_t as f64) as usize
    };
    (idx(window.0), idx(window.1))
}

/// Gated interference beat seen by `victim`; zero when the chirps do not overlap.
pub fn interference_beat_signal(
    victim: &RadarParams,
    aggressor: &RadarParams,
    victim_window: &ChirpWindow,
    aggressor_window: &ChirpWindow,
    delay_s: f64,
    amplitude: Complex64,
) -> Vec<Complex64> {
    let n_t = victim.samples_per_chirp();
    let mut out = vec![Complex64::new(0.0, 0.0); n_t];
    if let Some(win) = overlap_detect(victim_window, aggressor_window, delay_s) {
        let (n0, n1) = gate_samples(victim, victim_window.t_start_s, win);
        let d_alpha = victim.slope() - aggressor.slope();
        for (n, slot) in out.iter_mut().enumerate().take(n1).skip(n0) {
            let t = n as f64 / victim.adc_rate_hz;
            *slot = amplitude * Complex64::from_polar(1.0, PI * d_alpha * t * t);
        }
    }
    out
}

/// Circular complex Gaussian samples with the given mean power.
pub fn complex_noise<R: Rng + ?Sized>(n: usize, power: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (power / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>())
}

/// Synthesizes one CPI for every radar.
pub fn synthesize_cpi_adc<R: Rng + ?Sized>(
    scenario: &Scenario,
    schedules: &[ChirpSchedule],
    rng: &mut R,
) -> Vec<AdcMatrix> {
    let space = &scenario.action_space;
    let mut out = Vec::with_capacity(scenario.radar_count());
    for (i, radar) in scenario.radars.iter().enumerate() {
        let sched = &schedules[i];
        let n_t = radar.samples_per_chirp();
        let k_count = sched.len();
        let mut adc = AdcMatrix::zeros(n_t, k_count, radar.adc_rate_hz);
        for target in &scenario.targets[i] {
            let amp = random_phase(rng) * scenario.echo_power_mw(i, target).sqrt();
            for k in 0..k_count {
                let beat = target_beat_signal(
                    radar,
                    target,
                    amp,
                    sched.delta_f(space, k),
                    sched.delta_t(space, k),
                    k + 1,
                );
                for (slot, z) in adc.clean[k * n_t..(k + 1) * n_t].iter_mut().zip(beat) {
                    *slot += z;
                }
            }
        }
        for &(o, delay) in scenario.graph.neighbors(i) {
            let agg = &scenario.radars[o];
            let amp = random_phase(rng) * scenario.interference_power_mw(i, o).sqrt();
            let mut comp = vec![Complex64::new(0.0, 0.0); n_t * k_count];
            for k in 0..k_count {
                let v = ChirpWindow::of(radar, scenario, sched, k);
                for j in candidate_chirps(&v, agg, scenario, schedules[o].len(), delay) {
                    let w = ChirpWindow::of(agg, scenario, &schedules[o], j);
                    if overlap_detect(&v, &w, delay).is_none() {
                        continue;
                    }
                    let beat = interference_beat_signal(radar, agg, &v, &w, delay, amp);
                    for (slot, z) in comp[k * n_t..(k + 1) * n_t].iter_mut().zip(beat) {
                        *slot += z;
                    }
                }
            }
            adc.interference.push((o, comp));
        }
        adc.noise = complex_noise(n_t * k_count, scenario.noise_power_mw(), rng);
        out.push(adc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Draw, ScenarioConfig};
    use crate::model::{db_to_lin, nash_index};
    use crate::rng_from;
    use proptest::prelude::*;

    fn radar(b: f64) -> RadarParams {
        RadarParams {
            id: 1,
            f_c_hz: 77e9,
            bandwidth_hz: b,
            t_a_s: 8.89e-6,
            t_pri_s: 29.99e-6,
            chirps: 256,
            tx_power_dbm: 13.0,
            position_m: [0.0, 0.0],
            antenna_gain_dbi: 20.0,
            adc_rate_hz: 10e6,
        }
    }

    fn win(f: f64, t: f64) -> ChirpWindow {
        ChirpWindow {
            f_start_hz: f,
            bandwidth_hz: 150e6,
            t_start_s: t,
            duration_s: 8.89e-6,
        }
    }

    fn scenario(n: usize) -> Scenario {
        let mut cfg = ScenarioConfig::baseline();
        cfg.radar.count = n;
        cfg.build(3).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let a = win(77e9, 0.0);
        assert_eq!(overlap_detect(&a, &a, 0.0), Some((0.0, 8.89e-6)));
        let b = win(77e9, 3e-6);
        let (t0, t1) = overlap_detect(&a, &b, 0.0).unwrap();
        assert!((t1 - t0 - 5.89e-6).abs() < 1e-15);
        let c = win(77.15e9, 0.0);
        assert_eq!(overlap_detect(&a, &c, 0.0), None);
    }

    #[test]
    fn beat_tone_at_25m() {
        let r = radar(150e6);
        let t = Target {
            range_m: 25.0,
            velocity_mps: 0.0,
            rcs_dbsm: 20.0,
        };
        let x = target_beat_signal(&r, &t, Complex64::new(1.0, 0.0), 0.0, 0.0, 1);
        assert_eq!(x.len(), 88);
        let f_r = r.slope() * 50.0 / C;
        assert!((f_r - 2.8134e6).abs() < 1e3, "{f_r}");
        let step = x[1] / x[0];
        assert!((step.arg() - 2.0 * PI * f_r / 10e6).abs() < 1e-9);
    }

    #[test]
    fn zero_range_constant_phase() {
        let r = radar(150e6);
        let t = Target {
            range_m: 0.0,
            velocity_mps: 0.0,
            rcs_dbsm: 20.0,
        };
        let x = target_beat_signal(&r, &t, Complex64::new(0.0, 2.0), 0.0, 0.0, 3);
        assert!(x.iter().all(|z| (z - x[0]).norm() < 1e-12));
    }

    #[test]
    fn zero_doppler_same_progression() {
        let r = radar(150e6);
        let t = Target {
            range_m: 20.0,
            velocity_mps: 0.0,
            rcs_dbsm: 20.0,
        };
        let a = target_beat_signal(&r, &t, Complex64::new(1.0, 0.0), 0.0, 0.0, 1);
        let b = target_beat_signal(&r, &t, Complex64::new(1.0, 0.0), 0.0, 6e-6, 40);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-9));
    }

    #[test]
    fn interference_gates() {
        let v = radar(150e6);
        let disjoint = interference_beat_signal(&v, &v, &win(77e9, 0.0), &win(77.15e9, 0.0), 0.0, Complex64::new(1.0, 0.0));
        assert!(disjoint.iter().all(|z| z.norm() == 0.0));
        let full = interference_beat_signal(&v, &v, &win(77e9, 0.0), &win(77e9, 0.0), 0.0, Complex64::new(0.0, 1.0));
        assert!(full.iter().all(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-12));
        let half = v.t_a_s / 2.0;
        let x = interference_beat_signal(&v, &v, &win(77e9, 0.0), &win(77e9, half), 0.0, Complex64::new(1.0, 0.0));
        for (n, z) in x.iter().enumerate() {
            let t = n as f64 / v.adc_rate_hz;
            assert_eq!(z.norm() > 0.0, t >= half, "sample {n}");
        }
    }

    #[test]
    fn noise_variance() {
        let p = db_to_lin(-88.0);
        let x = complex_noise(1_000_000, p, &mut rng_from(4));
        let var = mean_power(&x);
        assert!((var / p - 1.0).abs() < 0.01, "{}", var / p);
    }

    #[test]
    fn no_neighbors_no_interference() {
        let mut s = scenario(2);
        s.graph = crate::model::InterferenceGraph::empty(2);
        let sched = vec![ChirpSchedule::constant(0, 256); 2];
        let adc = synthesize_cpi_adc(&s, &sched, &mut rng_from(1));
        assert!(adc.iter().all(|m| m.interference.is_empty()));
        let p = fast_power_sim(&s, &sched);
        assert!(p.iter().all(|t| t.interference.iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn separated_actions_are_clean() {
        let mut cfg = ScenarioConfig::baseline();
        cfg.radar.count = 2;
        cfg.radar.b_mhz = Draw::Fixed(150.0);
        let s = cfg.build(2).unwrap();
        let sched: Vec<ChirpSchedule> = (0..2)
            .map(|i| ChirpSchedule::constant(nash_index(1 + 7 * i, 21), 256))
            .collect();
        let adc = synthesize_cpi_adc(&s, &sched, &mut rng_from(1));
        for m in &adc {
            assert!(m.interference_sum().iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn additivity() {
        let s = scenario(3);
        let sched = vec![ChirpSchedule::constant(0, 256); 3];
        let adc = synthesize_cpi_adc(&s, &sched, &mut rng_from(9));
        for m in &adc {
            let total = m.total();
            let interf = m.interference_sum();
            for idx in 0..total.len() {
                let sum = m.clean[idx] + interf[idx] + m.noise[idx];
                assert!((total[idx] - sum).norm() <= 1e-15 * (1.0 + sum.norm()));
            }
        }
    }

    #[test]
    fn full_overlap_ratio() {
        let mut s = scenario(2);
        s.noise_power_dbm = -400.0;
        let sched = vec![ChirpSchedule::constant(0, 4); 2];
        let p = fast_power_radar(&s, 0, &sched[0], &sched);
        let expect = s.interference_power_mw(0, 1);
        assert!((p.interference[0] / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_matches_waveform() {
        let s = scenario(4);
        let mut rng = rng_from(21);
        let q = crate::model::uniform_strategy(21).unwrap();
        let sched: Vec<ChirpSchedule> = (0..4)
            .map(|_| crate::scheduler::stochastic_round_robin(&q, 1, 256, &s.action_space, &mut rng).unwrap())
            .collect();
        let fast = fast_power_sim(&s, &sched);
        let adc = synthesize_cpi_adc(&s, &sched, &mut rng);
        for i in 0..4 {
            let w = adc[i].component_powers();
            let sinr = |p: &PowerTrace| {
                (0..p.len()).map(|k| p.signal[k] / (p.interference[k] + p.noise[k])).sum::<f64>() / p.len() as f64
            };
            let d = 10.0 * (sinr(&fast[i]) / sinr(&w)).log10();
            assert!(d.abs() < 1.0, "radar {i}: {d} dB");
        }
    }

    #[test]
    fn binary_dump_layout() {
        let mut m = AdcMatrix::zeros(2, 3, 10e6);
        for (idx, z) in m.clean.iter_mut().enumerate() {
            *z = Complex64::new(idx as f64, -(idx as f64));
        }
        let mut buf = Vec::new();
        m.write_binary(&m.clean, &mut buf).unwrap();
        let header_end = buf.iter().position(|&c| c == b'\n').unwrap() + 1;
        assert_eq!(&buf[..header_end], b"n_t=2 k=3 fs_hz=10000000\n");
        let body = &buf[header_end..];
        assert_eq!(body.len(), 6 * 16);
        let val = |i: usize| f64::from_le_bytes(body[i * 8..i * 8 + 8].try_into().unwrap());
        // row n=0: chirps 0,1,2 live at chirp-major indices 0,2,4
        assert_eq!((val(0), val(2), val(4)), (0.0, 2.0, 4.0));
        assert_eq!(val(5), -4.0);
    }

    proptest! {
        #[test]
        fn overlap_swap_symmetry(tv in 0.0f64..20e-6, ta in 0.0f64..20e-6, d in -10e-6f64..10e-6, fa in 0usize..3, fb in 0usize..3) {
            let v = win(77e9 + fa as f64 * 150e6, tv);
            let a = win(77e9 + fb as f64 * 150e6, ta);
            let fwd = overlap_detect(&v, &a, d);
            let back = overlap_detect(&a, &v, -d);
            prop_assert_eq!(fwd.is_some(), back.is_some());
            if let (Some(x), Some(y)) = (fwd, back) {
                prop_assert!(((x.1 - x.0) - (y.1 - y.0)).abs() < 1e-15);
                prop_assert!((x.0 - d - y.0).abs() < 1e-15);
            }
        }

        #[test]
        fn interference_energy_monotone(s1 in 0.0f64..8.89e-6, s2 in 0.0f64..8.89e-6) {
            let v = radar(150e6);
            let (near, far) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            let e = |shift: f64| {
                interference_beat_signal(&v, &v, &win(77e9, 0.0), &win(77e9, shift), 0.0, Complex64::new(1.0, 0.0))
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            };
            prop_assert!(e(near) >= e(far));
        }

        #[test]
        fn beat_frequency_linear_in_range(r in 1.0f64..20.0) {
            let rp = radar(150e6);
            let tone = |range: f64| {
                let t = Target { range_m: range, velocity_mps: 0.0, rcs_dbsm: 0.0 };
                let x = target_beat_signal(&rp, &t, Complex64::new(1.0, 0.0), 0.0, 0.0, 1);
                let bins = crate::rd::coarse_range_transform(&x, x.len());
                bins.iter().enumerate().max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap()).unwrap().0
            };
            let b1 = tone(r) as f64 * rp.range_bin_m();
            let b2 = tone(2.0 * r) as f64 * rp.range_bin_m();
            prop_assert!((b2 - 2.0 * r).abs() <= rp.range_bin_m());
            prop_assert!((b1 - r).abs() <= rp.range_bin_m());
        }
    }
}
