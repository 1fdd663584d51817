//! Stochastic SIR dynamics on the susceptible subgraph, plus the fully mixed
//! mean-field ODE.
//!
//! The stochastic engine is event driven: when a device becomes infected it
//! draws its recovery time and, for every susceptible neighbor, a
//! transmission time; transmissions later than the recovery are dropped.
//! With exponential waiting times this samples the continuous-time Markov
//! SIR process exactly.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rgg::AdjacencyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Transmission rate per infected–susceptible edge.
    pub beta: f64,
    /// Recovery rate per infected device.
    pub delta: f64,
    /// Horizon; `f64::INFINITY` runs to absorption.
    pub t_max: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, delta: f64, t_max: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid("delta", format!("must be finite and >= 0, got {delta}")));
        }
        if t_max.is_nan() || t_max <= 0.0 {
            return Err(invalid("t_max", format!("must be > 0, got {t_max}")));
        }
        Ok(Self { beta, delta, t_max })
    }

    /// Runs until no infected device remains.
    pub fn to_absorption(beta: f64, delta: f64) -> Result<Self> {
        Self::new(beta, delta, f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    #[serde(rename = "S->I")]
    Infection,
    #[serde(rename = "I->R")]
    Recovery,
}

impl Transition {
    pub fn as_str(self) -> &'static str {
        match self {
            Transition::Infection => "S->I",
            Transition::Recovery => "I->R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicEvent {
    pub time: f64,
    pub device: usize,
    pub transition: Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SirCounts {
    pub s: usize,
    pub i: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicTrace {
    pub seed_device: usize,
    pub events: Vec<EpidemicEvent>,
    /// `(time, counts)` at t = 0 and after every event.
    pub counts_over_time: Vec<(f64, SirCounts)>,
    /// Sorted ids of every device that was ever infected, seed included.
    pub ever_infected: Vec<usize>,
}

impl EpidemicTrace {
    pub fn final_counts(&self) -> SirCounts {
        self.counts_over_time
            .last()
            .map(|&(_, c)| c)
            .expect("trace always holds the initial state")
    }

    /// Writes the event log as CSV with header `time,device,transition`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "device", "transition"])?;
        for e in &self.events {
            w.write_record([
                e.time.to_string(),
                e.device.to_string(),
                e.transition.as_str().to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<trace csv>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            seed_device: self.seed_device,
            ever_infected_size: self.ever_infected.len(),
            event_count: self.events.len(),
            final_time: self.counts_over_time.last().map(|&(t, _)| t).unwrap_or(0.0),
            final_counts: self.final_counts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub seed_device: usize,
    pub ever_infected_size: usize,
    pub event_count: usize,
    pub final_time: f64,
    pub final_counts: SirCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Susceptible,
    Infected,
    Recovered,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    seq: u64,
    device: usize,
    transition: Transition,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed so BinaryHeap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn waiting_time(rate: f64, rng: &mut ChaCha8Rng) -> f64 {
    if rate == 0.0 {
        f64::INFINITY
    } else {
        Exp::new(rate).expect("rate is finite and positive").sample(rng)
    }
}

/// Simulates SIR spread from `seed_device` over devices with `active[v] == true`.
///
/// Inactive (protected) devices never change state and block transmission.
pub fn simulate_sir(
    graph: &AdjacencyGraph,
    active: &[bool],
    seed_device: usize,
    params: &EpidemicParams,
    rng_seed: u64,
) -> Result<EpidemicTrace> {
    let n = graph.vertex_count();
    if active.len() != n {
        return Err(invalid(
            "susceptible_mask",
            format!("length {} does not match {n} devices", active.len()),
        ));
    }
    if seed_device >= n {
        return Err(Error::DeviceOutOfRange(seed_device));
    }
    if !active[seed_device] {
        return Err(Error::ProtectedSeed(seed_device));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut state: Vec<State> = vec![State::Susceptible; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut counts = SirCounts {
        s: active.iter().filter(|&&a| a).count() - 1,
        i: 1,
        r: 0,
    };
    let mut counts_over_time = vec![(0.0, counts)];
    let mut events = Vec::new();
    let mut ever = BTreeSet::from([seed_device]);

    let mut infect = |v: usize,
                      t: f64,
                      state: &mut Vec<State>,
                      heap: &mut BinaryHeap<Pending>,
                      rng: &mut ChaCha8Rng| {
        state[v] = State::Infected;
        let recovery = t + waiting_time(params.delta, rng);
        if recovery.is_finite() {
            heap.push(Pending {
                time: recovery,
                seq,
                device: v,
                transition: Transition::Recovery,
            });
            seq += 1;
        }
        for &w in graph.neighbors(v) {
            if !active[w] || state[w] != State::Susceptible {
                continue;
            }
            let hit = t + waiting_time(params.beta, rng);
            if hit < recovery {
                heap.push(Pending {
                    time: hit,
                    seq,
                    device: w,
                    transition: Transition::Infection,
                });
                seq += 1;
            }
        }
    };

    infect(seed_device, 0.0, &mut state, &mut heap, &mut rng);
    while let Some(ev) = heap.pop() {
        if ev.time > params.t_max {
            break;
        }
        match ev.transition {
            Transition::Infection => {
                if state[ev.device] != State::Susceptible {
                    continue;
                }
                infect(ev.device, ev.time, &mut state, &mut heap, &mut rng);
                ever.insert(ev.device);
                counts.s -= 1;
                counts.i += 1;
            }
            Transition::Recovery => {
                state[ev.device] = State::Recovered;
                counts.i -= 1;
                counts.r += 1;
            }
        }
        events.push(EpidemicEvent {
            time: ev.time,
            device: ev.device,
            transition: ev.transition,
        });
        counts_over_time.push((ev.time, counts));
        if counts.i == 0 {
            break;
        }
    }
    Ok(EpidemicTrace {
        seed_device,
        events,
        counts_over_time,
        ever_infected: ever.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

/// Integrates the fully mixed SIR equations with classical RK4.
///
/// `dS/dt = -(c/N)SI`, `dI/dt = (c/N)SI - δI`, `dR/dt = δI`. The last step is
/// shortened so the trajectory ends exactly at `t_max`.
pub fn solve_mean_field_sir(
    population: u64,
    contact_rate: f64,
    delta: f64,
    initial_infected: u64,
    t_max: f64,
    dt: f64,
) -> Result<Vec<MeanFieldPoint>> {
    for (name, v) in [
        ("contact_rate", contact_rate),
        ("delta", delta),
        ("t_max", t_max),
        ("dt", dt),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
        }
    }
    if dt == 0.0 {
        return Err(invalid("dt", "must be positive"));
    }
    if population == 0 {
        return Err(invalid("population", "must be positive"));
    }
    if initial_infected > population {
        return Err(invalid(
            "initial_infected",
            format!("{initial_infected} exceeds population {population}"),
        ));
    }
    let n = population as f64;
    let k = contact_rate / n;
    let deriv = |s: f64, i: f64| -> [f64; 3] {
        let force = k * s * i;
        [-force, force - delta * i, delta * i]
    };
    let mut y = [n - initial_infected as f64, initial_infected as f64, 0.0];
    let mut t = 0.0;
    let mut out = vec![MeanFieldPoint {
        t,
        s: y[0],
        i: y[1],
        r: y[2],
    }];
    let steps = (t_max / dt).ceil() as u64;
    for step in 0..steps {
        let h = if step + 1 == steps { t_max - t } else { dt };
        if h <= 0.0 {
            break;
        }
        let k1 = deriv(y[0], y[1]);
        let k2 = deriv(y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]);
        let k3 = deriv(y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]);
        let k4 = deriv(y[0] + h * k3[0], y[1] + h * k3[1]);
        for c in 0..3 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        t = if step + 1 == steps { t_max } else { t + h };
        out.push(MeanFieldPoint {
            t,
            s: y[0],
            i: y[1],
            r: y[2],
        });
    }
    Ok(out)
}
