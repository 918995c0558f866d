//! Simulated parameter-server rounds.
//!
//! Worker shifts are stored exactly and every server-side sum is formed
//! exactly with one rounding at the end. In reference mode the server sums
//! `h_i + Δ_i` from all workers; in delta mode it keeps `H = Σ h_i` itself and
//! only receives the `Δ_i`. Both compute the same real number before rounding,
//! so the iterates agree to the last bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyMode {
    /// Workers send `h_i` and `Δ_i` every round.
    ReferenceBroadcast,
    /// Workers send only `Δ_i`; the server tracks the shift sum.
    #[default]
    DeltaAggregated,
}

/// Vectors exchanged so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCount {
    pub rounds: u64,
    pub up: u64,
    pub down: u64,
    /// One-off uploads of initial shifts in delta mode.
    pub setup: u64,
}

impl MessageCount {
    pub fn per_round(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            (self.up + self.down) as f64 / self.rounds as f64
        }
    }
}

/// Per-worker shifts `h_i` (exact, with a rounded copy the workers use) and,
/// once attached to a delta-mode topology, the server's exact `Σ h_i`.
#[derive(Debug, Clone)]
pub struct ShiftBank {
    exact: Vec<ExactVec>,
    rounded: Vec<Vec<f64>>,
    server: Option<ExactVec>,
}

impl ShiftBank {
    pub fn new(init: Vec<Vec<f64>>) -> Self {
        let exact = init.iter().map(|h| ExactVec::from_slice(h)).collect();
        Self { exact, rounded: init, server: None }
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self::new(vec![vec![0.0; dim]; n])
    }

    pub fn n(&self) -> usize {
        self.rounded.len()
    }

    pub fn shift(&self, i: usize) -> &[f64] {
        &self.rounded[i]
    }

    pub fn shifts(&self) -> &[Vec<f64>] {
        &self.rounded
    }

    /// Server-side `(1/n) Σ h_i`, if tracked.
    pub fn server_mean(&self) -> Option<Vec<f64>> {
        self.server.clone().map(|mut s| s.value_div(self.n() as u32))
    }

    fn apply(&mut self, deltas: &[Vec<f64>], nu: f64) {
        if nu == 0.0 {
            return;
        }
        for (i, d) in deltas.iter().enumerate() {
            self.exact[i].add_scaled(nu, d);
            self.rounded[i] = self.exact[i].value();
        }
        if let Some(h) = self.server.as_mut() {
            for d in deltas {
                h.add_scaled(nu, d);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundTopology {
    pub mode: TopologyMode,
    pub n: usize,
    pub messages: MessageCount,
    scratch: ExactVec,
}

impl RoundTopology {
    pub fn new(mode: TopologyMode, n: usize, dim: usize) -> Self {
        Self { mode, n, messages: MessageCount::default(), scratch: ExactVec::zeros(dim) }
    }

    /// Registers a shift bank. In delta mode the workers upload `h_i⁰` once.
    pub fn attach(&mut self, bank: &mut ShiftBank) -> Result<()> {
        self.check(bank.n())?;
        if self.mode == TopologyMode::DeltaAggregated {
            let mut h = ExactVec::zeros(self.scratch.dim());
            for e in &bank.exact {
                h.add_vec(e);
            }
            bank.server = Some(h);
            self.messages.setup += self.n as u64;
        } else {
            bank.server = None;
        }
        Ok(())
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::Precondition(format!("topology has {} workers, solver has {n}", self.n)));
        }
        Ok(())
    }

    /// One shifted round: returns `(1/n) Σ (h_i + Δ_i)` and applies
    /// `h_i ← h_i + ν Δ_i`.
    pub fn round(&mut self, bank: &mut ShiftBank, deltas: &[Vec<f64>], nu: f64) -> Result<Vec<f64>> {
        self.check(bank.n())?;
        self.check(deltas.len())?;
        self.scratch.clear();
        match self.mode {
            TopologyMode::ReferenceBroadcast => {
                for e in &bank.exact {
                    self.scratch.add_vec(e);
                }
                self.messages.up += 2 * self.n as u64;
            }
            TopologyMode::DeltaAggregated => {
                let h = bank
                    .server
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("shift bank not attached to the delta topology".into()))?;
                self.scratch.add_vec(h);
                self.messages.up += self.n as u64;
            }
        }
        for d in deltas {
            self.scratch.add(d);
        }
        let g = self.scratch.value_div(self.n as u32);
        self.messages.down += 1;
        self.messages.rounds += 1;
        bank.apply(deltas, nu);
        Ok(g)
    }

    /// Plain average of worker vectors (no shifts).
    pub fn mean(&mut self, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check(vectors.len())?;
        self.scratch.clear();
        for v in vectors {
            self.scratch.add(v);
        }
        self.messages.up += self.n as u64;
        self.messages.down += 1;
        self.messages.rounds += 1;
        Ok(self.scratch.value_div(self.n as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_count() {
        let init = vec![vec![0.1, 1e20], vec![-0.3, -1e20], vec![1.0 / 3.0, 7.0]];
        let deltas = vec![vec![1e-17, 3.0], vec![0.2, -1e-3], vec![-0.7, 1e4]];
        let mut out = Vec::new();
        for mode in [TopologyMode::ReferenceBroadcast, TopologyMode::DeltaAggregated] {
            let mut bank = ShiftBank::new(init.clone());
            let mut t = RoundTopology::new(mode, 3, 2);
            t.attach(&mut bank).unwrap();
            let mut gs = Vec::new();
            for _ in 0..5 {
                gs.push(t.round(&mut bank, &deltas, 0.37).unwrap());
            }
            out.push((gs, bank.shifts().to_vec(), t.messages));
        }
        assert_eq!(out[0].0, out[1].0);
        assert_eq!(out[0].1, out[1].1);
        assert_eq!(out[0].2.up, 30);
        assert_eq!(out[1].2.up, 15);
        assert_eq!(out[1].2.per_round(), 4.0);
        assert_eq!(out[1].2.setup, 3);
    }

    #[test]
    fn server_mean_tracks_workers() {
        let mut bank = ShiftBank::zeros(2, 1);
        let mut t = RoundTopology::new(TopologyMode::DeltaAggregated, 2, 1);
        t.attach(&mut bank).unwrap();
        t.round(&mut bank, &[vec![1.0], vec![3.0]], 0.5).unwrap();
        assert_eq!(bank.server_mean().unwrap(), vec![1.0]);
        assert_eq!(bank.shift(1), &[1.5]);
    }

    #[test]
    fn unattached_delta_round_fails() {
        let mut bank = ShiftBank::zeros(2, 1);
        let mut t = RoundTopology::new(TopologyMode::DeltaAggregated, 2, 1);
        assert!(t.round(&mut bank, &[vec![1.0], vec![3.0]], 0.5).is_err());
        let mut t3 = RoundTopology::new(TopologyMode::ReferenceBroadcast, 3, 1);
        assert!(t3.attach(&mut bank).is_err());
    }
}
