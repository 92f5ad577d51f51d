//! Range-Doppler processing: coarse-range DFT, hop/shift compensation,
//! nonuniform slow-time transform and peak picking.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActionSpace, RadarParams, C};
use crate::scheduler::ChirpSchedule;

pub const FINE_RANGE_POINTS: usize = 16;

/// Unnormalized DFT of one chirp: `X[m] = sum_n x[n] exp(-j 2 pi n m / N)`.
pub fn coarse_range_transform(x: &[Complex64], n: usize) -> Vec<Complex64> {
    let tw = twiddles(n);
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(k, v)| v * tw[(k * m) % n])
                .sum()
        })
        .collect()
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Coarse transform applied to every chirp of chirp-major data.
pub fn coarse_range_matrix(data: &[Complex64], n_t: usize, k: usize) -> Vec<Complex64> {
    let tw = twiddles(n_t);
    let mut out = vec![Complex64::new(0.0, 0.0); n_t * k];
    for c in 0..k {
        let x = &data[c * n_t..(c + 1) * n_t];
        for m in 0..n_t {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, v) in x.iter().enumerate() {
                acc += v * tw[(s * m) % n_t];
            }
            out[c * n_t + m] = acc;
        }
    }
    out
}

/// Hypothesis grids of a cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdGrid {
    pub r_m: Vec<f64>,
    pub v_q: Vec<f64>,
    pub eps_p: Vec<f64>,
    /// Signed Doppler index for each q.
    pub q_signed: Vec<f64>,
}

impl RdGrid {
    pub fn for_radar(radar: &RadarParams) -> Self {
        let n_t = radar.samples_per_chirp();
        let k = radar.chirps;
        let dr = radar.range_bin_m();
        let dv = radar.velocity_bin_mps();
        let q_signed: Vec<f64> = (0..k)
            .map(|q| if q < k.div_ceil(2) { q as f64 } else { q as f64 - k as f64 })
            .collect();
        let half = C / (4.0 * radar.bandwidth_hz);
        let eps_p = (0..FINE_RANGE_POINTS)
            .map(|p| -half + 2.0 * half * p as f64 / (FINE_RANGE_POINTS - 1) as f64)
            .collect();
        RdGrid {
            r_m: (0..n_t).map(|m| m as f64 * dr).collect(),
            v_q: q_signed.iter().map(|q| q * dv).collect(),
            eps_p,
            q_signed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdCube {
    pub n_m: usize,
    pub n_q: usize,
    pub n_p: usize,
    /// Indexed `[(m * n_q + q) * n_p + p]`.
    pub values: Vec<Complex64>,
    pub grid: RdGrid,
}

impl RdCube {
    pub fn at(&self, m: usize, q: usize, p: usize) -> Complex64 {
        self.values[(m * self.n_q + q) * self.n_p + p]
    }

    pub fn write_csv<W: Write>(&self, truth: Option<(f64, f64)>, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        out.write_record(["kind", "m", "q", "p", "magnitude_db"]).map_err(fmt)?;
        if let Some((r, v)) = truth {
            let (m, q, p) = self.nearest(r, v);
            out.write_record(["truth", &m.to_string(), &q.to_string(), &p.to_string(), ""])
                .map_err(fmt)?;
        }
        for m in 0..self.n_m {
            for q in 0..self.n_q {
                for p in 0..self.n_p {
                    let mag = self.at(m, q, p).norm_sqr().max(1e-300);
                    out.write_record([
                        "cell",
                        &m.to_string(),
                        &q.to_string(),
                        &p.to_string(),
                        &format!("{:.3}", 10.0 * mag.log10()),
                    ])
                    .map_err(fmt)?;
                }
            }
        }
        out.flush().map_err(|e| Error::Format(e.to_string()))
    }

    /// Grid cell closest to a range/velocity pair.
    pub fn nearest(&self, range_m: f64, velocity_mps: f64) -> (usize, usize, usize) {
        let g = &self.grid;
        let mut best = (0, 0, f64::INFINITY);
        for (m, rm) in g.r_m.iter().enumerate() {
            for (p, e) in g.eps_p.iter().enumerate() {
                let d = (rm + e - range_m).abs();
                if d < best.2 {
                    best = (m, p, d);
                }
            }
        }
        let q = argmin(g.v_q.iter().map(|v| (v - velocity_mps).abs()));
        (best.0, q, best.1)
    }
}

fn argmin<I: Iterator<Item = f64>>(it: I) -> usize {
    let mut best = (0, f64::INFINITY);
    for (k, x) in it.enumerate() {
        if x < best.1 {
            best = (k, x);
        }
    }
    best.0
}

/// Slow-time instants `(k-1) T_pri + dt_k` for each chirp.
pub fn slow_times(radar: &RadarParams, space: &ActionSpace, schedule: &ChirpSchedule) -> Vec<f64> {
    (0..schedule.len())
        .map(|k| k as f64 * radar.t_pri_s + schedule.delta_t(space, k))
        .collect()
}

pub fn hop_offsets(space: &ActionSpace, schedule: &ChirpSchedule) -> Vec<f64> {
    (0..schedule.len()).map(|k| schedule.delta_f(space, k)).collect()
}

/// Phase factor removing the hop-induced rotation of a target at `range` moving at `v`.
pub fn hop_phase(delta_f: f64, range: f64, v: f64, slow_t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * delta_f * (2.0 * range / C + 2.0 * v * slow_t / C))
}

/// Compensated coarse matrix (chirp-major, `[k * n_t + m]`) for one (eps_p, v_q) hypothesis.
pub fn hop_time_compensate(
    coarse: &[Complex64],
    n_t: usize,
    grid: &RdGrid,
    delta_f: &[f64],
    slow_t: &[f64],
    p: usize,
    q: usize,
) -> Vec<Complex64> {
    let mut out = coarse.to_vec();
    for (k, (df, st)) in delta_f.iter().zip(slow_t).enumerate() {
        for m in 0..n_t {
            out[k * n_t + m] *= hop_phase(*df, grid.r_m[m] + grid.eps_p[p], grid.v_q[q], *st);
        }
    }
    out
}

/// Nonuniform steering entry for chirp slow time `slow_t` and signed Doppler index `q_signed`.
pub fn steering(slow_t: f64, q_signed: f64, k: usize, t_pri: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * slow_t * q_signed / (k as f64 * t_pri))
}

/// Contracts chirp-major data over k with the steering matrix; output `[m * K + q]`.
pub fn nonuniform_slow_time_transform(
    data: &[Complex64],
    n_t: usize,
    grid: &RdGrid,
    slow_t: &[f64],
    t_pri: f64,
) -> Vec<Complex64> {
    let k = slow_t.len();
    let nq = grid.q_signed.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n_t * nq];
    for q in 0..nq {
        let d: Vec<Complex64> = slow_t.iter().map(|&s| steering(s, grid.q_signed[q], k, t_pri)).collect();
        for m in 0..n_t {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..k {
                acc += data[c * n_t + m] * d[c];
            }
            out[m * nq + q] = acc;
        }
    }
    out
}

/// Full pipeline on chirp-major ADC data.
pub fn rd_process(
    data: &[Complex64],
    radar: &RadarParams,
    space: &ActionSpace,
    schedule: &ChirpSchedule,
) -> RdCube {
    let n_t = radar.samples_per_chirp();
    let k = schedule.len();
    let grid = RdGrid::for_radar(radar);
    let coarse = coarse_range_matrix(data, n_t, k);
    let df = hop_offsets(space, schedule);
    let st = slow_times(radar, space, schedule);
    let nq = grid.v_q.len();
    let np = grid.eps_p.len();
    // b[c * nq + q]: velocity part of the compensation times the steering entry.
    let mut b = vec![Complex64::new(0.0, 0.0); k * nq];
    for c in 0..k {
        for q in 0..nq {
            b[c * nq + q] = hop_phase(df[c], 0.0, grid.v_q[q], st[c]) * steering(st[c], grid.q_signed[q], k, radar.t_pri_s);
        }
    }
    let mut values = vec![Complex64::new(0.0, 0.0); n_t * nq * np];
    let mut w = vec![Complex64::new(0.0, 0.0); k];
    let mut acc = vec![Complex64::new(0.0, 0.0); nq];
    for m in 0..n_t {
        for p in 0..np {
            let range = grid.r_m[m] + grid.eps_p[p];
            for c in 0..k {
                w[c] = coarse[c * n_t + m] * hop_phase(df[c], range, 0.0, 0.0);
            }
            acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            for (c, wc) in w.iter().enumerate() {
                let row = &b[c * nq..(c + 1) * nq];
                for (a, bv) in acc.iter_mut().zip(row) {
                    *a += wc * bv;
                }
            }
            for q in 0..nq {
                values[(m * nq + q) * np + p] = acc[q];
            }
        }
    }
    RdCube {
        n_m: n_t,
        n_q: nq,
        n_p: np,
        values,
        grid,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub m: usize,
    pub q: usize,
    pub p: usize,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub power: f64,
}

/// Global magnitude peak; the lowest flat index wins ties.
pub fn detect_peak(cube: &RdCube) -> Detection {
    let mut best = (0usize, -1.0f64);
    for (idx, v) in cube.values.iter().enumerate() {
        let p = v.norm_sqr();
        if p > best.1 {
            best = (idx, p);
        }
    }
    let p = best.0 % cube.n_p;
    let q = (best.0 / cube.n_p) % cube.n_q;
    let m = best.0 / (cube.n_p * cube.n_q);
    Detection {
        m,
        q,
        p,
        range_m: cube.grid.r_m[m] + cube.grid.eps_p[p],
        velocity_mps: cube.grid.v_q[q],
        power: best.1,
    }
}
