use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Side, Site};
use crate::kernels::StochasticKernel;
use crate::value::Value;
use crate::{Error, Result};

pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

/// Flattened cumulative rows for fast sampling.
#[derive(Clone, Debug)]
pub struct SamplingTable {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    cumulative: Vec<f64>,
    layer: Vec<u32>,
    side: Vec<i8>,
    absorbing: Vec<bool>,
}

impl SamplingTable {
    /// `sites` marks the state space as the shared site layout (so boundary
    /// sides are defined); 1-D chains have no sides.
    pub fn new<T: Value>(kernel: &StochasticKernel<T>, sites: bool) -> Self {
        let m = kernel.matrix();
        let n = m.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        offsets.push(0);
        for i in 0..n {
            let mut acc = 0.0;
            for (j, p) in m.row(i) {
                let p = p.to_f64();
                if p <= 0.0 {
                    continue;
                }
                acc += p;
                targets.push(*j as u32);
                cumulative.push(acc);
            }
            offsets.push(targets.len());
        }
        let side = (0..n)
            .map(|i| match sites.then(|| Site::from_index(i).side()).flatten() {
                Some(Side::Upper) => 1,
                Some(Side::Lower) => -1,
                None => 0,
            })
            .collect();
        SamplingTable {
            offsets,
            targets,
            cumulative,
            layer: (0..n).map(|i| m.layer(i) as u32).collect(),
            side,
            absorbing: (0..n).map(|i| kernel.is_absorbing(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer.is_empty()
    }

    /// Next state, or `None` when the walker is killed.
    #[inline]
    fn step<R: Rng>(&self, state: usize, rng: &mut R) -> Option<usize> {
        let (lo, hi) = (self.offsets[state], self.offsets[state + 1]);
        let u: f64 = rng.random();
        for k in lo..hi {
            if u < self.cumulative[k] {
                return Some(self.targets[k] as usize);
            }
        }
        // rounding slack on a full row goes to the last entry
        if hi > lo && self.cumulative[hi - 1] > 1.0 - 1e-12 {
            Some(self.targets[hi - 1] as usize)
        } else {
            None
        }
    }
}

/// Where each path starts.
#[derive(Clone, Debug)]
pub enum Start {
    State(usize),
    /// Uniform on the sites of a layer, drawn per path.
    Fiber(usize),
    /// A fixed law, given as `(state, weight)` pairs.
    Law(Vec<(usize, f64)>),
}

/// When a path ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// On first reaching this layer, or an absorbing state.
    Layer(usize),
    /// When the kernel's killing fires.
    Killed,
}

/// Which boundary contact to record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideObserver {
    /// Last contact strictly before the stopping time.
    LastBeforeStop,
    /// First contact strictly after time zero.
    FirstAfterStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LastSide {
    Upper,
    Lower,
    Undefined,
}

impl LastSide {
    fn from_code(c: i8) -> Self {
        match c {
            1 => LastSide::Upper,
            -1 => LastSide::Lower,
            _ => LastSide::Undefined,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub start: usize,
    /// Stopping state; for killed paths, the state where the kill happened.
    pub exit: usize,
    pub side: LastSide,
    pub steps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub workers: usize,
    pub step_cap: u64,
}

impl RunConfig {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        RunConfig {
            n_paths,
            seed,
            workers: 1,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for path `index`, a pure function of `(seed, index)`.
pub fn path_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

fn draw_start<R: Rng>(start: &Start, rng: &mut R) -> usize {
    match start {
        Start::State(s) => *s,
        Start::Fiber(k) => crate::intertwining::filter_sample(*k, rng).index(),
        Start::Law(law) => {
            let total: f64 = law.iter().map(|(_, w)| w).sum();
            let mut u = rng.random::<f64>() * total;
            for (s, w) in law {
                if u < *w {
                    return *s;
                }
                u -= w;
            }
            law.last().map(|(s, _)| *s).unwrap_or(0)
        }
    }
}

fn run_one(
    table: &SamplingTable,
    start: &Start,
    stop: Stop,
    observer: SideObserver,
    seed: u64,
    index: u64,
    cap: u64,
) -> Result<PathRecord> {
    let mut rng = path_rng(seed, index);
    let first = draw_start(start, &mut rng);
    let stopped = |s: usize| match stop {
        Stop::Layer(m) => table.layer[s] as usize >= m || table.absorbing[s],
        Stop::Killed => false,
    };
    let mut state = first;
    let mut steps = 0u64;
    let mut side = 0i8;
    let record_first = observer == SideObserver::FirstAfterStart;
    loop {
        if stopped(state) {
            break;
        }
        if !record_first && table.side[state] != 0 {
            side = table.side[state];
        }
        if steps >= cap {
            return Err(Error::Timeout {
                path: index,
                steps,
                completed: 0,
            });
        }
        match table.step(state, &mut rng) {
            Some(next) => {
                state = next;
                steps += 1;
                if record_first && side == 0 && table.side[state] != 0 {
                    side = table.side[state];
                }
            }
            None => break,
        }
    }
    Ok(PathRecord {
        start: first,
        exit: state,
        side: LastSide::from_code(side),
        steps,
    })
}

/// Runs `config.n_paths` independent paths. Path `i` uses a generator
/// derived from `(seed, i)` only, so the records do not depend on the
/// number of workers.
pub fn run_paths(
    table: &SamplingTable,
    start: &Start,
    stop: Stop,
    observer: SideObserver,
    config: &RunConfig,
) -> Result<Vec<PathRecord>> {
    if config.n_paths == 0 {
        return Err(crate::error::domain("need at least one path"));
    }
    if let Start::State(s) = start {
        if *s >= table.len() {
            return Err(Error::Shape {
                what: "start state",
                expected: table.len(),
                found: *s,
            });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| crate::error::domain(format!("thread pool: {e}")))?;
    let results: Vec<Result<PathRecord>> = pool.install(|| {
        (0..config.n_paths)
            .into_par_iter()
            .map(|i| run_one(table, start, stop, observer, config.seed, i, config.step_cap))
            .collect()
    });
    let completed = results.iter().filter(|r| r.is_ok()).count();
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::Timeout { path, steps, .. }) => {
                return Err(Error::Timeout {
                    path,
                    steps,
                    completed,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}
