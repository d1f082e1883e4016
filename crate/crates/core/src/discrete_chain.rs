//! The discrete fake Brownian motion on the lattice `√(2/m)·ℤ`.
//!
//! A particle is either *lazy* (frozen at its start in `C^{N,m}`) or *busy*
//! (a lazy random walk time-changed to live on `G^{N,m}`, so it jumps across
//! gaps). Lazy particles switch at a rate that makes the occupancy of every
//! lazy site follow `p̃_{m+l}`, and they land on the flanking busy sites with
//! the gambler's-ruin split. [`DiscreteChain::verify`] evolves the exact joint
//! law and measures the site-wise distance to `p̃_{m+l}`.

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::intervals::LatticeSystem;
use crate::lazy_walk::{pmf, ratio_check_f64};
use crate::rng::{PathSeed, Purpose};
use crate::scalar::{Backend, Mass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lazy,
    Busy,
}

/// Position and mode of one particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub position: i64,
    pub mode: Mode,
}

/// One busy row: moves to the nearest `G` sites on each side and a stay.
#[derive(Debug, Clone, PartialEq)]
pub struct BusyRow<T> {
    pub left: (i64, T),
    pub stay: T,
    pub right: (i64, T),
}

impl<T: Mass> BusyRow<T> {
    pub fn entries(&self, i: i64) -> Vec<(i64, T)> {
        vec![self.left.clone(), (i, self.stay.clone()), self.right.clone()]
    }
}

fn busy_row<T: Mass>(lattice: &LatticeSystem, i: i64) -> BusyRow<T> {
    let (j1, j2) = lattice.g_neighbors(i);
    let left = T::ratio(1, 4 * (i - j1));
    let right = T::ratio(1, 4 * (j2 - i));
    let stay = T::one() - left.clone() - right.clone();
    BusyRow { left: (j1, left), stay, right: (j2, right) }
}

/// Transition row of a busy particle at `i ∈ G^{N,m}`.
///
/// Toward a `G` neighbour the walk moves with probability `¼`; across a gap
/// to the far side `j` it jumps with probability `1/(4|i - j|)`; it stays
/// with the remaining mass. The row mean is `i`.
pub fn busy_transition<T: Mass>(lattice: &LatticeSystem, i: i64) -> Result<Vec<(i64, T)>> {
    if !lattice.is_g(i) {
        return domain(format!("busy transition requested at lazy site {i}"));
    }
    Ok(busy_row::<T>(lattice, i).entries(i))
}

/// Probability that a lazy particle at `i` switches during step `l → l + 1`:
/// `1 - p̃_{m+l+1}(i) / p̃_{m+l}(i)`.
pub fn lazy_hazard<T: Mass>(i: i64, l: u64, m: u32) -> Result<T> {
    let n = m as i64 + l as i64;
    if n < 2 * i * i {
        return domain(format!(
            "lazy site {i} at walk length {n}: need m + l >= 2 i^2 for decreasing mass"
        ));
    }
    // p̃_{n+1}(i) / p̃_n(i) = (n+1)(2n+1) / (2(n+1+i)(n+1-i))
    let keep = T::ratio((n + 1) * (2 * n + 1), 2 * (n + 1 + i) * (n + 1 - i));
    Ok(T::one() - keep)
}

/// Two-point landing law of a particle switching at `i ∈ C^{N,m}` with gap
/// neighbours `(j1, j2)`: `j1` with `(j2 - i)/(j2 - j1)`, `j2` with
/// `(i - j1)/(j2 - j1)`.
pub fn switch_jump<T: Mass>(lattice: &LatticeSystem, i: i64) -> Result<[(i64, T); 2]> {
    if !lattice.is_c(i) {
        return domain(format!("switch jump requested at busy site {i}"));
    }
    let (j1, j2) = lattice.gap_neighbors(i).expect("lazy sites always have gap neighbours");
    let width = j2 - j1;
    Ok([(j1, T::ratio(j2 - i, width)), (j2, T::ratio(i - j1, width))])
}

/// Joint law of `(position, mode)` after `step` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    step: u64,
    j_max: i64,
    busy: Vec<T>,
    lazy: Vec<T>,
}

impl<T: Mass> JointDistribution<T> {
    pub fn step(&self) -> u64 {
        self.step
    }

    fn slot(&self, j: i64) -> Option<usize> {
        (j.abs() <= self.j_max).then(|| (j + self.j_max) as usize)
    }

    pub fn busy_mass(&self, j: i64) -> T {
        self.slot(j).map_or_else(T::zero, |k| self.busy[k].clone())
    }

    pub fn lazy_mass(&self, j: i64) -> T {
        self.slot(j).map_or_else(T::zero, |k| self.lazy[k].clone())
    }

    /// `P(X̃_l = j)` regardless of mode.
    pub fn marginal(&self, j: i64) -> T {
        self.busy_mass(j) + self.lazy_mass(j)
    }

    pub fn total(&self) -> T {
        self.busy.iter().chain(&self.lazy).fold(T::zero(), |a, p| a + p.clone())
    }

    /// `Σ j² P(X̃_l = j)`.
    pub fn second_moment(&self) -> T {
        (-self.j_max..=self.j_max).fold(T::zero(), |acc, j| acc + T::ratio(j * j, 1) * self.marginal(j))
    }
}

/// The discrete chain on a fixed lattice, with its kernel precomputed.
#[derive(Debug, Clone)]
pub struct DiscreteChain<T> {
    lattice: LatticeSystem,
    busy_rows: Vec<Option<BusyRow<T>>>,
    jumps: Vec<Option<[(i64, T); 2]>>,
}

impl<T: Mass> DiscreteChain<T> {
    pub fn new(lattice: LatticeSystem) -> Self {
        let busy_rows = lattice.sites().map(|i| lattice.is_g(i).then(|| busy_row(&lattice, i))).collect();
        let jumps = lattice.sites().map(|i| switch_jump(&lattice, i).ok()).collect();
        Self { lattice, busy_rows, jumps }
    }

    pub fn lattice(&self) -> &LatticeSystem {
        &self.lattice
    }

    pub fn m(&self) -> u32 {
        self.lattice.m()
    }

    pub fn busy_row(&self, i: i64) -> Option<&BusyRow<T>> {
        self.busy_rows.get(self.lattice.index(i))?.as_ref()
    }

    pub fn jump(&self, i: i64) -> Option<&[(i64, T); 2]> {
        self.jumps.get(self.lattice.index(i))?.as_ref()
    }

    /// Start from `p̃_m`: mass on `G^{N,m}` busy, mass on `C^{N,m}` lazy.
    /// Mass beyond the window is dropped.
    pub fn initial(&self) -> JointDistribution<T> {
        let lat = &self.lattice;
        let start = pmf::<T>(lat.m() as u64);
        let width = (2 * lat.j_max() + 1) as usize;
        let mut busy = vec![T::zero(); width];
        let mut lazy = vec![T::zero(); width];
        for j in lat.sites() {
            let k = lat.index(j);
            if lat.is_c(j) {
                lazy[k] = start.get(j);
            } else {
                busy[k] = start.get(j);
            }
        }
        JointDistribution { step: 0, j_max: lat.j_max(), busy, lazy }
    }

    /// One synchronous step. Moves leaving the window are dropped.
    pub fn evolve(&self, joint: &JointDistribution<T>) -> JointDistribution<T> {
        let lat = &self.lattice;
        let width = joint.busy.len();
        let mut busy = vec![T::zero(); width];
        let mut lazy = vec![T::zero(); width];
        let add = |target: &mut Vec<T>, j: i64, w: T| {
            if j.abs() <= lat.j_max() {
                let k = lat.index(j);
                target[k] = target[k].clone() + w;
            }
        };
        for i in lat.sites() {
            let k = lat.index(i);
            let b = &joint.busy[k];
            if !b.is_zero() {
                let row = self.busy_rows[k].as_ref().expect("busy mass only sits on G");
                add(&mut busy, row.left.0, b.clone() * row.left.1.clone());
                add(&mut busy, i, b.clone() * row.stay.clone());
                add(&mut busy, row.right.0, b.clone() * row.right.1.clone());
            }
            let z = &joint.lazy[k];
            if !z.is_zero() {
                let h = lazy_hazard::<T>(i, joint.step, lat.m())
                    .expect("lazy sites of a valid lattice satisfy m >= 2 i^2");
                let switched = z.clone() * h;
                lazy[k] = z.clone() - switched.clone();
                let [(j1, p1), (j2, p2)] = self.jumps[k].clone().expect("lazy mass only sits on C");
                add(&mut busy, j1, switched.clone() * p1);
                add(&mut busy, j2, switched * p2);
            }
        }
        JointDistribution { step: joint.step + 1, j_max: joint.j_max, busy, lazy }
    }

    /// Evolve `steps` times, comparing every step against `p̃_{m+l}`.
    pub fn verify(&self, steps: u64) -> MarginalCheck<T> {
        let lat = &self.lattice;
        let m = lat.m() as u64;
        let mut joint = self.initial();
        let mut max_dev = T::zero();
        let mut max_lazy_dev = T::zero();
        let mut busy_on_c = false;
        for l in 0..=steps {
            if l > 0 {
                joint = self.evolve(&joint);
            }
            let target = pmf::<T>(m + l);
            for j in lat.sites() {
                let dev = (joint.marginal(j) - target.get(j)).abs();
                if dev > max_dev {
                    max_dev = dev;
                }
                if lat.is_c(j) {
                    let lazy_dev = (joint.lazy_mass(j) - target.get(j)).abs();
                    if lazy_dev > max_lazy_dev {
                        max_lazy_dev = lazy_dev;
                    }
                    busy_on_c |= !joint.busy_mass(j).is_zero();
                }
            }
        }
        MarginalCheck { steps, max_abs_deviation: max_dev, max_lazy_deviation: max_lazy_dev, busy_on_c, last: joint }
    }
}

fn sample_with<T: Mass>(
    chain: &DiscreteChain<T>,
    horizon: u64,
    seed: PathSeed,
    to_f64: impl Fn(&T) -> f64,
) -> Vec<ChainState> {
    let lat = chain.lattice();
    let m = lat.m() as u64;
    let mut rng = seed.rng(Purpose::Chain);
    let lazy_step = |rng: &mut rand_chacha::ChaCha8Rng| {
        let r: u32 = rng.random();
        (r & 1) as i64 + ((r >> 1) & 1) as i64 - 1
    };
    let start: i64 = (0..m).map(|_| lazy_step(&mut rng)).sum();
    let mut path = Vec::with_capacity(horizon as usize + 1);
    let mut pos = start;
    let mut mode = if lat.is_c(start) { Mode::Lazy } else { Mode::Busy };
    let u: f64 = rng.random();
    // P(still lazy after l steps) = p̃_{m+l}(i) / p̃_m(i)
    let mut survival = 1.0;
    path.push(ChainState { position: pos, mode });
    for l in 0..horizon {
        match mode {
            Mode::Lazy => {
                survival /= ratio_check_f64(m + l, pos);
                if u >= survival {
                    let [(j1, p1), (j2, _)] = chain.jump(pos).expect("lazy sites have a jump law");
                    pos = if rng.random::<f64>() < to_f64(p1) { *j1 } else { *j2 };
                    mode = Mode::Busy;
                }
            }
            Mode::Busy => {
                let r: f64 = rng.random();
                let (left, right) = match chain.busy_row(pos) {
                    Some(row) => ((row.left.0, to_f64(&row.left.1)), (row.right.0, to_f64(&row.right.1))),
                    None => ((pos - 1, 0.25), (pos + 1, 0.25)),
                };
                if r < left.1 {
                    pos = left.0;
                } else if r < left.1 + right.1 {
                    pos = right.0;
                }
            }
        }
        path.push(ChainState { position: pos, mode });
    }
    path
}

/// Trajectory sampler shared by both backends: kernels are read as floats.
pub fn sample_path<T: Mass>(chain: &DiscreteChain<T>, horizon: u64, seed: PathSeed) -> Vec<ChainState> {
    sample_with(chain, horizon, seed, |p: &T| p.to_f64())
}

/// Build the chain and its initial law in one go.
pub fn initial_joint<T: Mass>(lattice: &LatticeSystem) -> JointDistribution<T> {
    DiscreteChain::<T>::new(lattice.clone()).initial()
}

/// One step of the exact law on `lattice`.
pub fn evolve<T: Mass>(joint: &JointDistribution<T>, lattice: &LatticeSystem) -> JointDistribution<T> {
    DiscreteChain::<T>::new(lattice.clone()).evolve(joint)
}

/// Outcome of [`DiscreteChain::verify`].
#[derive(Debug, Clone)]
pub struct MarginalCheck<T> {
    pub steps: u64,
    /// `max_{l, j} |P(X̃_l = j) - p̃_{m+l}(j)|`.
    pub max_abs_deviation: T,
    /// Same, restricted to lazy mass on `C^{N,m}`.
    pub max_lazy_deviation: T,
    /// Whether busy mass was ever found on `C^{N,m}`.
    pub busy_on_c: bool,
    /// Joint law after the last step.
    pub last: JointDistribution<T>,
}

/// Machine-readable summary of a discrete verification run.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteReport {
    pub m: u32,
    #[serde(rename = "N")]
    pub n_intervals: usize,
    pub steps: u64,
    pub max_abs_deviation: f64,
    pub backend: Backend,
    pub exact_zero: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Float tolerance on the site-wise deviation.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Run the exact-law check on `lattice` with backend `T`.
pub fn verify_marginals<T: Mass>(lattice: &LatticeSystem, n_intervals: usize, steps: u64) -> DiscreteReport {
    let chain = DiscreteChain::<T>::new(lattice.clone());
    let check = chain.verify(steps);
    let backend = T::backend();
    let exact_zero = check.max_abs_deviation.is_zero() && check.max_lazy_deviation.is_zero() && !check.busy_on_c;
    let tolerance = match backend {
        Backend::Rational => 0.0,
        Backend::Float => FLOAT_TOLERANCE,
    };
    let dev = check.max_abs_deviation.to_f64().max(check.max_lazy_deviation.to_f64());
    let pass = match backend {
        Backend::Rational => exact_zero,
        Backend::Float => dev <= tolerance && !check.busy_on_c,
    };
    DiscreteReport { m: lattice.m(), n_intervals, steps, max_abs_deviation: dev, backend, exact_zero, tolerance, pass }
}
