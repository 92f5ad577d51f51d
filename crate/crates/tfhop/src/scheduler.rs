//! Stochastic round-robin sampler turning a mixed strategy into a per-chirp schedule.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ActionSpace, MixedStrategy};

/// Per-chirp flat action indices for one CPI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChirpSchedule {
    pub actions: Vec<usize>,
}

impl ChirpSchedule {
    pub fn constant(flat: usize, k: usize) -> Self {
        ChirpSchedule {
            actions: vec![flat; k],
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Start frequency of chirp `k` (0-based).
    pub fn f_k(&self, space: &ActionSpace, k: usize) -> f64 {
        space.get(self.actions[k]).f_hz
    }

    pub fn t_k(&self, space: &ActionSpace, k: usize) -> f64 {
        space.get(self.actions[k]).t_s
    }

    /// Hop offset relative to the carrier.
    pub fn delta_f(&self, space: &ActionSpace, k: usize) -> f64 {
        self.f_k(space, k) - space.f_c_hz
    }

    /// Shift offset relative to the first chirp.
    pub fn delta_t(&self, space: &ActionSpace, k: usize) -> f64 {
        self.t_k(space, k) - self.t_k(space, 0)
    }

    pub fn write_csv<W: Write>(&self, space: &ActionSpace, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let fmt = |e: csv::Error| crate::error::Error::Format(e.to_string());
        out.write_record(["chirp", "a", "b", "f_hz", "t_s"]).map_err(fmt)?;
        for (k, &flat) in self.actions.iter().enumerate() {
            let act = space.get(flat);
            out.write_record([
                (k + 1).to_string(),
                act.a.to_string(),
                act.b.to_string(),
                format!("{:.1}", act.f_hz),
                format!("{:e}", act.t_s),
            ])
            .map_err(fmt)?;
        }
        out.flush().map_err(|e| crate::error::Error::Format(e.to_string()))?;
        Ok(())
    }
}

/// Draws one start pair per block of `ell` chirps and cycles both indices inside the block.
pub fn stochastic_round_robin<R: Rng + ?Sized>(
    q: &MixedStrategy,
    ell: usize,
    k: usize,
    space: &ActionSpace,
    rng: &mut R,
) -> Result<ChirpSchedule> {
    if k == 0 {
        return Err(invalid("chirps", "K must be at least 1"));
    }
    if ell == 0 {
        return Err(invalid("block_length", "must be at least 1"));
    }
    if q.len() != space.len() {
        return Err(invalid("strategy", "length differs from the action space"));
    }
    let mut actions = Vec::with_capacity(k);
    while actions.len() < k {
        let start = space.get(q.sample(rng));
        let (sf, st) = (start.a - 1, start.b - 1);
        for l in 0..ell.min(k - actions.len()) {
            let a = (sf + l) % space.a_f;
            let b = (st + l) % space.a_t;
            actions.push(a * space.a_t + b);
        }
    }
    Ok(ChirpSchedule { actions })
}

/// Schedule produced by the sampler when its strategy is a point mass on `start`.
pub fn delta_schedule(start: usize, ell: usize, k: usize, space: &ActionSpace) -> ChirpSchedule {
    let act = space.get(start);
    let (sf, st) = (act.a - 1, act.b - 1);
    let actions = (0..k)
        .map(|c| {
            let l = c % ell.max(1);
            ((sf + l) % space.a_f) * space.a_t + (st + l) % space.a_t
        })
        .collect();
    ChirpSchedule { actions }
}
