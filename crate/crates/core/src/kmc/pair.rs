//! Two dual particles: the symmetric interacting pair and its lookdown
//! (hierarchical) counterpart.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::walk::walk_rates;
use super::{Trajectory, DEFAULT_EVENT_CAP};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::{seeded, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// Both particles attract each other at rate `N^2`.
    Symmetric,
    /// Only the second particle is attracted, at rate `2 N^2`.
    Lookdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairState {
    pub x: usize,
    pub y: usize,
    pub kind: PairKind,
}

impl PairState {
    pub fn new(x: usize, y: usize, kind: PairKind) -> Self {
        PairState { x, y, kind }
    }
}

/// Event-driven simulator of a [`PairState`].
#[derive(Debug, Clone)]
pub struct PairWalk {
    params: ModelParams,
    state: PairState,
    interaction: bool,
    time: f64,
    events: u64,
    event_cap: u64,
    rng: SimRng,
}

impl PairWalk {
    pub fn new(params: &ModelParams, pair0: PairState, rng: SimRng) -> Self {
        let n = params.n;
        assert!(pair0.x <= n && pair0.y <= n, "pair outside 0..={n}");
        PairWalk {
            params: *params,
            state: pair0,
            interaction: true,
            time: 0.0,
            events: 0,
            event_cap: DEFAULT_EVENT_CAP,
            rng,
        }
    }

    /// Switches the mutual attraction on or off.
    pub fn with_interaction(mut self, on: bool) -> Self {
        self.interaction = on;
        self
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    pub fn state(&self) -> PairState {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    fn in_bulk(&self, x: usize) -> bool {
        x != 0 && x != self.params.n
    }

    pub fn is_absorbed(&self) -> bool {
        !self.in_bulk(self.state.x) && !self.in_bulk(self.state.y)
    }

    /// Candidate moves as `(rate, new_x, new_y)`.
    fn moves(&self) -> ([(f64, usize, usize); 6], usize) {
        let PairState { x, y, kind } = self.state;
        let mut out = [(0.0, 0, 0); 6];
        let mut k = 0;
        if self.in_bulk(x) {
            let (l, r) = walk_rates(&self.params, x);
            out[k] = (l, x - 1, y);
            out[k + 1] = (r, x + 1, y);
            k += 2;
        }
        if self.in_bulk(y) {
            let (l, r) = walk_rates(&self.params, y);
            out[k] = (l, x, y - 1);
            out[k + 1] = (r, x, y + 1);
            k += 2;
        }
        if self.interaction && self.in_bulk(x) && self.in_bulk(y) && x.abs_diff(y) == 1 {
            let n2 = self.params.bulk_speed();
            match kind {
                PairKind::Symmetric => {
                    out[k] = (n2, y, y);
                    out[k + 1] = (n2, x, x);
                    k += 2;
                }
                PairKind::Lookdown => {
                    out[k] = (2.0 * n2, x, x);
                    k += 1;
                }
            }
        }
        (out, k)
    }

    /// Runs until both particles are absorbed or `t_cap` is reached,
    /// calling `on_hold(t0, t1, state)` on every constant stretch. Returns
    /// whether the pair was absorbed.
    pub fn run_until<F>(&mut self, t_cap: f64, mut on_hold: F) -> Result<bool>
    where
        F: FnMut(f64, f64, PairState),
    {
        while !self.is_absorbed() {
            let (moves, k) = self.moves();
            let total: f64 = moves[..k].iter().map(|m| m.0).sum();
            let e: f64 = Exp1.sample(&mut self.rng);
            let t_next = self.time + e / total;
            if t_next > t_cap {
                if t_cap > self.time {
                    on_hold(self.time, t_cap, self.state);
                    self.time = t_cap;
                }
                return Ok(false);
            }
            on_hold(self.time, t_next, self.state);
            self.time = t_next;
            let mut u = self.rng.random::<f64>() * total;
            let mut pick = k - 1;
            for (i, m) in moves[..k].iter().enumerate() {
                if u < m.0 {
                    pick = i;
                    break;
                }
                u -= m.0;
            }
            self.state.x = moves[pick].1;
            self.state.y = moves[pick].2;
            self.events += 1;
            if self.events > self.event_cap {
                return Err(Error::EventCapExceeded {
                    cap: self.event_cap,
                    time: self.time,
                });
            }
        }
        Ok(true)
    }
}

/// Records every jump of a pair walk until absorption or `t_cap`. A pair
/// that starts absorbed yields an empty trajectory.
pub fn simulate_pair(
    params: &ModelParams,
    pair0: PairState,
    t_cap: f64,
    seed: u64,
) -> Result<Trajectory<PairState>> {
    let mut walk = PairWalk::new(params, pair0, seeded(seed));
    if walk.is_absorbed() {
        return Ok(Trajectory {
            samples: Vec::new(),
            terminal_time: 0.0,
            events: 0,
        });
    }
    let mut samples = vec![(0.0, pair0)];
    let mut last = pair0;
    walk.run_until(t_cap, |t0, _, s| {
        if s != last {
            samples.push((t0, s));
            last = s;
        }
    })?;
    if walk.state() != last {
        samples.push((walk.time(), walk.state()));
    }
    Ok(Trajectory {
        samples,
        terminal_time: walk.time(),
        events: walk.events(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 2.0, 1.0, 2.0, 0.0, 6).unwrap()
    }

    #[test]
    fn absorbed_pair_is_empty() {
        let tr = simulate_pair(&params(), PairState::new(0, 6, PairKind::Symmetric), 1.0, 0).unwrap();
        assert!(tr.samples.is_empty());
        assert_eq!(tr.events, 0);
    }

    #[test]
    fn absorbed_coordinates_never_move() {
        let tr = simulate_pair(&params(), PairState::new(2, 3, PairKind::Lookdown), 100.0, 8).unwrap();
        let n = 6;
        for w in tr.samples.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            assert!(w[1].0 > w[0].0);
            if a.x == 0 || a.x == n {
                assert_eq!(a.x, b.x);
            }
            if a.y == 0 || a.y == n {
                assert_eq!(a.y, b.y);
            }
        }
        let last = tr.samples.last().unwrap().1;
        assert!(matches!(last.x, 0 | 6) && matches!(last.y, 0 | 6));
    }

    #[test]
    fn lookdown_first_coordinate_ignores_second() {
        let p = params();
        let mut w = PairWalk::new(&p, PairState::new(2, 3, PairKind::Lookdown), seeded(1));
        let (moves, k) = w.moves();
        let to_first: f64 = moves[..k].iter().filter(|m| m.1 != 2).map(|m| m.0).sum();
        assert_eq!(to_first, 2.0 * 36.0);
        let onto: f64 = moves[..k].iter().filter(|m| m.1 == 2 && m.2 == 2).map(|m| m.0).sum();
        assert_eq!(onto, 2.0 * 36.0 + 36.0);
        assert!(w.run_until(f64::INFINITY, |_, _, _| {}).unwrap());
    }
}
