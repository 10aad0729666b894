//! Exact event-driven simulation of the open inclusion process, its
//! absorbing dual, and the one- and two-particle dual walks.
//!
//! All rates are per unit of macroscopic time: bulk jumps carry the `N^2`
//! speed-up and reservoir moves `N^(2-beta)`.

mod pair;
mod sampling;
mod tree;
mod walk;

pub use pair::{simulate_pair, PairKind, PairState, PairWalk};
pub use sampling::{sample_local_gibbs, sample_negbin, sample_negbin_product};
pub use walk::{simulate_single_walk, simulate_single_walk_with, WalkOutcome};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, DualConfiguration, ModelParams};
use crate::rng::{seeded, SimRng};
use tree::RateTree;

/// Default cap on the number of events in a single trajectory.
pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    BulkJump { from: usize, to: usize },
    ReservoirBirth { site: usize },
    ReservoirDeath { site: usize },
    DualAbsorbLeft,
    DualAbsorbRight,
    PairCoalesceStep { from: usize, to: usize },
}

/// One possible transition out of the current state with its total rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub kind: EventKind,
    pub rate: f64,
}

/// Observation samples along a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub samples: Vec<(f64, S)>,
    pub terminal_time: f64,
    pub events: u64,
}

/// Every non-zero-rate transition of the open process from `eta`.
pub fn transition_table(params: &ModelParams, eta: &Configuration) -> Vec<TransitionEvent> {
    let n = params.n;
    let a = params.alpha;
    let bulk = params.bulk_speed();
    let bs = params.boundary_speed();
    let occ = |x: usize| eta.get(x) as f64;
    let mut out = Vec::new();
    let mut push = |kind, rate: f64| {
        if rate > 0.0 {
            out.push(TransitionEvent { kind, rate });
        }
    };
    for x in 1..n - 1 {
        push(
            EventKind::BulkJump { from: x, to: x + 1 },
            bulk * occ(x) * (a + occ(x + 1)),
        );
        push(
            EventKind::BulkJump { from: x + 1, to: x },
            bulk * occ(x + 1) * (a + occ(x)),
        );
    }
    push(
        EventKind::ReservoirBirth { site: 1 },
        bs * params.rho_l() * (a + occ(1)),
    );
    push(
        EventKind::ReservoirDeath { site: 1 },
        bs * occ(1) * params.alpha_l * (1.0 + params.theta_l),
    );
    push(
        EventKind::ReservoirBirth { site: n - 1 },
        bs * params.rho_r() * (a + occ(n - 1)),
    );
    push(
        EventKind::ReservoirDeath { site: n - 1 },
        bs * occ(n - 1) * params.alpha_r * (1.0 + params.theta_r),
    );
    out
}

/// Every non-zero-rate transition of the absorbing dual from `xi`.
pub fn dual_transition_table(params: &ModelParams, xi: &DualConfiguration) -> Vec<TransitionEvent> {
    let n = params.n;
    let a = params.alpha;
    let bulk = params.bulk_speed();
    let bs = params.boundary_speed();
    let occ = |x: usize| xi.get(x) as f64;
    let mut out = Vec::new();
    for x in 1..n - 1 {
        for (from, to) in [(x, x + 1), (x + 1, x)] {
            let rate = bulk * occ(from) * (a + occ(to));
            if rate > 0.0 {
                out.push(TransitionEvent {
                    kind: EventKind::BulkJump { from, to },
                    rate,
                });
            }
        }
    }
    let left = bs * params.alpha_l * occ(1);
    if left > 0.0 {
        out.push(TransitionEvent {
            kind: EventKind::DualAbsorbLeft,
            rate: left,
        });
    }
    let right = bs * params.alpha_r * occ(n - 1);
    if right > 0.0 {
        out.push(TransitionEvent {
            kind: EventKind::DualAbsorbRight,
            rate: right,
        });
    }
    out
}

/// Applies a transition to a primal configuration.
pub fn apply_primal(eta: &Configuration, kind: EventKind) -> Configuration {
    let mut out = eta.clone();
    match kind {
        EventKind::BulkJump { from, to } => {
            out.set(from, out.get(from) - 1);
            out.set(to, out.get(to) + 1);
        }
        EventKind::ReservoirBirth { site } => out.set(site, out.get(site) + 1),
        EventKind::ReservoirDeath { site } => out.set(site, out.get(site) - 1),
        _ => panic!("{kind:?} is not a primal transition"),
    }
    out
}

/// Applies a transition to a dual configuration.
pub fn apply_dual(xi: &DualConfiguration, kind: EventKind) -> DualConfiguration {
    let mut out = xi.clone();
    let n = xi.n();
    let (from, to) = match kind {
        EventKind::BulkJump { from, to } => (from, to),
        EventKind::DualAbsorbLeft => (1, 0),
        EventKind::DualAbsorbRight => (n - 1, n),
        _ => panic!("{kind:?} is not a dual transition"),
    };
    out.set(from, out.get(from) - 1);
    out.set(to, out.get(to) + 1);
    out
}

/// How the chain interacts with the two ends of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Open process: injection and removal by reservoirs.
    Reservoirs,
    /// Dual process: mass at sites 1 and N-1 is absorbed into 0 and N.
    Absorbing,
}

/// Gillespie simulator shared by the open process and its absorbing dual.
///
/// Occupations are stored on `0..=N`; for the open process the two end
/// entries stay zero. Channel `2(x-1)` moves a particle from `x` to the left,
/// `2(x-1)+1` to the right (leaving the lattice at the ends), and for the
/// open process the last two channels are the left and right injections.
#[derive(Debug, Clone)]
pub struct InclusionChain {
    params: ModelParams,
    boundary: Boundary,
    occ: Vec<u64>,
    bulk: f64,
    edge: f64,
    rates: RateTree,
    time: f64,
    events: u64,
    event_cap: u64,
    rng: SimRng,
}

impl InclusionChain {
    pub fn primal(params: &ModelParams, eta0: &Configuration, rng: SimRng) -> Result<Self> {
        if eta0.n() != params.n {
            return Err(Error::SizeMismatch {
                dual: params.n,
                primal: eta0.n(),
            });
        }
        let mut occ = vec![0; params.n + 1];
        occ[1..params.n].copy_from_slice(eta0.bulk());
        Ok(Self::build(params, Boundary::Reservoirs, occ, rng))
    }

    pub fn dual(params: &ModelParams, xi0: &DualConfiguration, rng: SimRng) -> Result<Self> {
        if xi0.n() != params.n {
            return Err(Error::SizeMismatch {
                dual: xi0.n(),
                primal: params.n,
            });
        }
        Ok(Self::build(params, Boundary::Absorbing, xi0.sites().to_vec(), rng))
    }

    fn build(params: &ModelParams, boundary: Boundary, occ: Vec<u64>, rng: SimRng) -> Self {
        let channels = 2 * (params.n - 1) + 2;
        let mut chain = InclusionChain {
            params: *params,
            boundary,
            occ,
            bulk: params.bulk_speed(),
            edge: params.boundary_speed(),
            rates: RateTree::new(&vec![0.0; channels]),
            time: 0.0,
            events: 0,
            event_cap: DEFAULT_EVENT_CAP,
            rng,
        };
        for ch in 0..channels {
            let r = chain.channel_rate(ch);
            chain.rates.set(ch, r);
        }
        chain
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Occupations on `0..=N` (end entries are absorbed mass for the dual,
    /// always zero for the open process).
    pub fn occupations(&self) -> &[u64] {
        &self.occ
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::from_bulk(self.occ[1..self.params.n].to_vec())
    }

    pub fn dual_configuration(&self) -> DualConfiguration {
        DualConfiguration::from_sites(self.occ.clone())
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.total()
    }

    fn channel_rate(&self, ch: usize) -> f64 {
        let p = &self.params;
        let n = p.n;
        let a = p.alpha;
        let occ = |x: usize| self.occ[x] as f64;
        let births = 2 * (n - 1);
        if ch >= births {
            if self.boundary == Boundary::Absorbing {
                return 0.0;
            }
            return if ch == births {
                self.edge * p.alpha_l * p.theta_l * (a + occ(1))
            } else {
                self.edge * p.alpha_r * p.theta_r * (a + occ(n - 1))
            };
        }
        let x = ch / 2 + 1;
        let k = occ(x);
        if k == 0.0 {
            return 0.0;
        }
        let leftward = ch.is_multiple_of(2);
        let absorbing = self.boundary == Boundary::Absorbing;
        match (leftward, x) {
            (true, 1) if absorbing => self.edge * k * p.alpha_l,
            (true, 1) => self.edge * k * p.alpha_l * (1.0 + p.theta_l),
            (false, x) if x == n - 1 && absorbing => self.edge * k * p.alpha_r,
            (false, x) if x == n - 1 => self.edge * k * p.alpha_r * (1.0 + p.theta_r),
            (true, x) => self.bulk * k * (a + occ(x - 1)),
            (false, x) => self.bulk * k * (a + occ(x + 1)),
        }
    }

    fn refresh_channel(&mut self, ch: usize) {
        let r = self.channel_rate(ch);
        self.rates.set(ch, r);
    }

    fn refresh_site(&mut self, x: usize) {
        let n = self.params.n;
        if (1..n).contains(&x) {
            for ch in [2 * (x - 1), 2 * (x - 1) + 1] {
                let r = self.channel_rate(ch);
                self.rates.set(ch, r);
            }
        }
    }

    fn kind_of(&self, ch: usize) -> EventKind {
        let n = self.params.n;
        let births = 2 * (n - 1);
        if ch == births {
            return EventKind::ReservoirBirth { site: 1 };
        }
        if ch == births + 1 {
            return EventKind::ReservoirBirth { site: n - 1 };
        }
        let x = ch / 2 + 1;
        let leftward = ch.is_multiple_of(2);
        match (leftward, self.boundary) {
            (true, _) if x > 1 => EventKind::BulkJump { from: x, to: x - 1 },
            (false, _) if x < n - 1 => EventKind::BulkJump { from: x, to: x + 1 },
            (true, Boundary::Reservoirs) => EventKind::ReservoirDeath { site: 1 },
            (false, Boundary::Reservoirs) => EventKind::ReservoirDeath { site: n - 1 },
            (true, Boundary::Absorbing) => EventKind::DualAbsorbLeft,
            (false, Boundary::Absorbing) => EventKind::DualAbsorbRight,
        }
    }

    fn apply(&mut self, kind: EventKind) -> Result<()> {
        let n = self.params.n;
        let (from, to) = match kind {
            EventKind::BulkJump { from, to } => (Some(from), Some(to)),
            EventKind::ReservoirBirth { site } => (None, Some(site)),
            EventKind::ReservoirDeath { site } => (Some(site), None),
            EventKind::DualAbsorbLeft => (Some(1), Some(0)),
            EventKind::DualAbsorbRight => (Some(n - 1), Some(n)),
            EventKind::PairCoalesceStep { .. } => unreachable!("not an inclusion-chain event"),
        };
        if let Some(x) = from {
            self.occ[x] -= 1;
        }
        if let Some(y) = to {
            self.occ[y] = self.occ[y]
                .checked_add(1)
                .ok_or(Error::OccupationOverflow(y))?;
        }
        let touched = [from, to].into_iter().flatten();
        let lo = touched.clone().min().unwrap_or(1).saturating_sub(1);
        let hi = touched.max().unwrap_or(1) + 1;
        // Site lo only looks right and site hi only looks left.
        if (1..n).contains(&lo) {
            self.refresh_channel(2 * (lo - 1) + 1);
        }
        for s in lo + 1..hi {
            self.refresh_site(s);
        }
        if (1..n).contains(&hi) {
            self.refresh_channel(2 * (hi - 1));
        }
        if self.boundary == Boundary::Reservoirs && (lo <= 1 || hi >= n - 1) {
            let births = 2 * (n - 1);
            for ch in [births, births + 1] {
                let r = self.channel_rate(ch);
                self.rates.set(ch, r);
            }
        }
        Ok(())
    }

    /// Performs the next event and returns its time and kind, or `None` if
    /// the chain is frozen (every rate is zero).
    pub fn step(&mut self) -> Result<Option<(f64, EventKind)>> {
        let total = self.rates.total();
        if total <= 0.0 {
            return Ok(None);
        }
        let hold: f64 = Exp1.sample(&mut self.rng);
        self.time += hold / total;
        let ch = self.rates.find(self.rng.random::<f64>() * total);
        let kind = self.kind_of(ch);
        self.fire(kind)?;
        Ok(Some((self.time, kind)))
    }

    fn fire(&mut self, kind: EventKind) -> Result<()> {
        self.events += 1;
        if self.events > self.event_cap {
            return Err(Error::EventCapExceeded {
                cap: self.event_cap,
                time: self.time,
            });
        }
        self.apply(kind)
    }

    /// Runs the chain up to `t_end`. `on_hold(t0, t1, occupations)` is called
    /// for every interval on which the state is constant, which makes
    /// time integrals of state functionals exact.
    pub fn advance_to<F>(&mut self, t_end: f64, mut on_hold: F) -> Result<()>
    where
        F: FnMut(f64, f64, &[u64]),
    {
        loop {
            let total = self.rates.total();
            if total <= 0.0 {
                if t_end > self.time {
                    on_hold(self.time, t_end, &self.occ);
                    self.time = t_end;
                }
                return Ok(());
            }
            let hold: f64 = Exp1.sample(&mut self.rng);
            let t_next = self.time + hold / total;
            if t_next > t_end {
                // The pending clock is discarded; by memorylessness the
                // restarted chain has the same law.
                if t_end > self.time {
                    on_hold(self.time, t_end, &self.occ);
                    self.time = t_end;
                }
                return Ok(());
            }
            on_hold(self.time, t_next, &self.occ);
            self.time = t_next;
            let ch = self.rates.find(self.rng.random::<f64>() * total);
            let kind = self.kind_of(ch);
            self.fire(kind)?;
        }
    }
}

fn check_grid(t_end: f64, obs_times: &[f64]) -> Result<()> {
    if t_end.is_nan() || t_end < 0.0 {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
    }
    let mut prev = f64::NEG_INFINITY;
    for &t in obs_times {
        if !(t > prev && (0.0..=t_end).contains(&t)) {
            return Err(Error::InvalidArgument(
                "observation times must be strictly increasing within [0, t_end]".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Uniform observation grid `0, t_end/count, ..., t_end`.
pub fn uniform_grid(t_end: f64, count: usize) -> Vec<f64> {
    if count == 0 || t_end == 0.0 {
        return vec![0.0];
    }
    (0..=count).map(|i| t_end * i as f64 / count as f64).collect()
}

/// Simulates the open process from `eta0` up to `t_end`, sampling
/// `observer(t, eta_t)` at each of `obs_times`.
pub fn simulate_primal<S, F>(
    params: &ModelParams,
    eta0: &Configuration,
    t_end: f64,
    obs_times: &[f64],
    seed: u64,
    observer: F,
) -> Result<Trajectory<S>>
where
    F: FnMut(f64, &Configuration) -> S,
{
    let chain = InclusionChain::primal(params, eta0, seeded(seed))?;
    run_observed(chain, t_end, obs_times, observer, |c| c.configuration())
}

/// Simulates the absorbing dual from `xi0` up to `t_end`.
pub fn simulate_dual<S, F>(
    params: &ModelParams,
    xi0: &DualConfiguration,
    t_end: f64,
    obs_times: &[f64],
    seed: u64,
    observer: F,
) -> Result<Trajectory<S>>
where
    F: FnMut(f64, &DualConfiguration) -> S,
{
    let chain = InclusionChain::dual(params, xi0, seeded(seed))?;
    run_observed(chain, t_end, obs_times, observer, |c| c.dual_configuration())
}

/// Drives `chain` across the observation grid.
pub fn run_observed<C, S, F, G>(
    mut chain: InclusionChain,
    t_end: f64,
    obs_times: &[f64],
    mut observer: F,
    snapshot: G,
) -> Result<Trajectory<S>>
where
    F: FnMut(f64, &C) -> S,
    G: Fn(&InclusionChain) -> C,
{
    check_grid(t_end, obs_times)?;
    let mut samples = Vec::with_capacity(obs_times.len());
    for &t in obs_times {
        chain.advance_to(t, |_, _, _| {})?;
        samples.push((t, observer(t, &snapshot(&chain))));
    }
    chain.advance_to(t_end, |_, _, _| {})?;
    Ok(Trajectory {
        samples,
        terminal_time: t_end,
        events: chain.events(),
    })
}
