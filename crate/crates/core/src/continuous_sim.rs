//! Monte Carlo for the continuous constructions.
//!
//! A driving path `B` (Brownian with `N(0, 1)` start, or the geometric
//! martingale for the exponential variant) is run on a grid of step `dt`.
//! Its occupation clock `A` counts grid time spent in `G`; the fake process
//! waits at its start until the switch time `T`, then follows `B` read
//! through the inverse clock, so it only moves while `B` is in `G`.
//!
//! Busy values are taken at the last grid index before the clock passes the
//! target, which is always a `G` visit of the driver. For a driver that never
//! leaves `G` this is `B` at the nearest-left grid point.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::densities::{
    bisect_decreasing, check_exp_window, invert_survival_ratio, lognormal_density, SWITCH_TIME_TOL,
};
use crate::discrete_chain::Mode;
use crate::error::{domain, Error, Result};
use crate::intervals::IntervalSystem;
use crate::rng::{PathSeed, Purpose};

/// Driving path on a grid: `values[k] ≈ B_{k·dt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Grid occupation clock, `A[k] = dt · #{j < k : B[j] ∈ G}`, stored as counts.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationClock {
    pub dt: f64,
    counts: Vec<u64>,
}

impl OccupationClock {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.counts[k] as f64 * self.dt
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts[k]
    }

    /// Largest time the clock reaches.
    pub fn last(&self) -> f64 {
        self.counts.last().map_or(0.0, |&c| c as f64 * self.dt)
    }

    /// First grid index with `A[k] > s`.
    pub fn inverse_index(&self, s: f64) -> Result<usize> {
        let need = visits_needed(s, self.dt);
        let k = self.counts.partition_point(|&c| c < need);
        if k == self.counts.len() {
            return Err(Error::ClockExhausted { requested: s, available: self.last() });
        }
        Ok(k)
    }
}

/// Smallest count `n` with `n·dt > s`.
fn visits_needed(s: f64, dt: f64) -> u64 {
    if s < 0.0 {
        return 0;
    }
    (s / dt).floor() as u64 + 1
}

/// Visits needed at grid index `k` of a path that switched at `switch_time`,
/// computed in grid units so that `switch_time = 0` gives exactly `k + 1`.
fn visits_at(k: u64, switch_time: f64, dt: f64) -> u64 {
    ((k as f64 - switch_time / dt).floor().max(0.0) as u64) + 1
}

/// What drives the busy phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Driver {
    /// Brownian motion, `B_0 ~ N(0, 1)`.
    Brownian,
    /// `Y_s = Y_0 exp(W_s - s/2)` started at time `t1` from lognormal`(-t1/2, t1)`.
    Geometric { t1: f64, t2: f64 },
}

impl Driver {
    fn start(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match *self {
            Driver::Brownian => z,
            Driver::Geometric { t1, .. } => (t1.sqrt() * z - 0.5 * t1).exp(),
        }
    }

    fn step(&self, x: f64, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match self {
            Driver::Brownian => x + dt.sqrt() * z,
            Driver::Geometric { .. } => x * (dt.sqrt() * z - 0.5 * dt).exp(),
        }
    }

    /// Absolute time of grid index 0.
    pub fn origin(&self) -> f64 {
        match *self {
            Driver::Brownian => 0.0,
            Driver::Geometric { t1, .. } => t1,
        }
    }
}

/// Brownian grid path with `N(0, 1)` start and `N(0, dt)` increments.
pub fn sample_brownian_path(seed: PathSeed, t_max: f64, dt: f64) -> Result<BrownianPath> {
    check_grid(t_max, dt)?;
    let steps = (t_max / dt).round() as usize;
    let mut rng = seed.rng(Purpose::Driver);
    let mut x = Driver::Brownian.start(&mut rng);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(x);
    for _ in 0..steps {
        x = Driver::Brownian.step(x, dt, &mut rng);
        values.push(x);
    }
    Ok(BrownianPath { dt, values })
}

fn check_grid(t_max: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("grid step must be positive, got dt = {dt}"));
    }
    if !(t_max >= dt) {
        return domain(format!("t_max = {t_max} must be at least dt = {dt}"));
    }
    Ok(())
}

/// Left-endpoint occupation clock of `path` in `G`.
pub fn occupation_clock(path: &BrownianPath, system: &IntervalSystem) -> OccupationClock {
    let mut counts = Vec::with_capacity(path.values.len());
    let mut c = 0;
    for &x in &path.values {
        counts.push(c);
        if system.contains_g(x) {
            c += 1;
        }
    }
    OccupationClock { dt: path.dt, counts }
}

/// `τ(s) = dt · min{k : A[k] > s}`.
pub fn inverse_clock(clock: &OccupationClock, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return domain(format!("clock time must be non-negative, got {s}"));
    }
    Ok(clock.inverse_index(s)? as f64 * clock.dt)
}

/// Uniform on `(0, 1]` from the switch substream.
fn switch_uniform(seed: PathSeed) -> f64 {
    1.0 - seed.rng(Purpose::Switch).random::<f64>()
}

/// Switch time of a particle started at `x0`: zero on `G`, otherwise the
/// inverse of the survival ratio at a uniform level.
pub fn sample_switch_time(x0: f64, system: &IntervalSystem, seed: PathSeed) -> Result<f64> {
    switch_time_at(x0, system, switch_uniform(seed))
}

/// Switch time for an explicit uniform level `u ∈ (0, 1]`.
pub fn switch_time_at(x0: f64, system: &IntervalSystem, u: f64) -> Result<f64> {
    if system.contains_g(x0) || u >= 1.0 {
        return Ok(0.0);
    }
    invert_survival_ratio(x0, u)
}

/// Switch time in the exponential variant: `p(x, t1 + s) / p(x, t1) = u`,
/// searched on `[0, t2 - t1]`. Infinite when the ratio stays above `u`.
pub fn exp_switch_time_at(x0: f64, system: &IntervalSystem, t1: f64, t2: f64, u: f64) -> Result<f64> {
    if system.contains_g(x0) || u >= 1.0 {
        return Ok(0.0);
    }
    let p0 = lognormal_density(x0, t1)?;
    let ratio = |s: f64| lognormal_density(x0, t1 + s).map_or(0.0, |p| p / p0);
    let span = t2 - t1;
    if ratio(span) >= u {
        return Ok(f64::INFINITY);
    }
    Ok(bisect_decreasing(ratio, u, 0.0, span, SWITCH_TIME_TOL))
}

/// A fake path on the grid `origin + k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FakeBMPath {
    pub origin: f64,
    pub dt: f64,
    pub switch_time: f64,
    pub values: Vec<f64>,
}

impl FakeBMPath {
    pub fn mode(&self, k: usize) -> Mode {
        mode_at(k as f64 * self.dt, self.switch_time)
    }
}

fn mode_at(s: f64, switch_time: f64) -> Mode {
    if s < switch_time {
        Mode::Lazy
    } else {
        Mode::Busy
    }
}

/// Compose the switch time, the clock and its inverse on a stored path.
pub fn assemble_fake_path(path: &BrownianPath, system: &IntervalSystem, seed: PathSeed) -> Result<FakeBMPath> {
    let start = path.values[0];
    let switch_time = sample_switch_time(start, system, seed)?;
    let clock = occupation_clock(path, system);
    let dt = path.dt;
    let mut values = Vec::with_capacity(path.values.len());
    for k in 0..path.values.len() {
        let t = k as f64 * dt;
        if t < switch_time {
            values.push(start);
        } else {
            let need = visits_at(k as u64, switch_time, dt);
            let idx = clock.counts.partition_point(|&c| c < need);
            if idx == clock.counts.len() {
                return Err(Error::ClockExhausted { requested: t - switch_time, available: clock.last() });
            }
            values.push(path.values[idx - 1]);
        }
    }
    Ok(FakeBMPath { origin: 0.0, dt, switch_time, values })
}

/// Streaming evaluation of one fake path; the driver is extended on demand,
/// so the clock is never exhausted.
#[derive(Debug, Clone)]
pub struct FakeCursor<'a> {
    system: &'a IntervalSystem,
    driver: Driver,
    dt: f64,
    rng: ChaCha8Rng,
    start: f64,
    switch_time: f64,
    // driver value at the next unread grid index and that index
    next_value: f64,
    driver_steps: u64,
    visits: u64,
    busy_value: f64,
}

impl<'a> FakeCursor<'a> {
    pub fn new(system: &'a IntervalSystem, driver: Driver, dt: f64, seed: PathSeed) -> Result<Self> {
        let mut rng = seed.rng(Purpose::Driver);
        let start = driver.start(&mut rng);
        Self::with_rng(system, driver, dt, seed, rng, start)
    }

    /// A path forced to start at `x0`; the driver substream then supplies
    /// only increments.
    pub fn from_start(system: &'a IntervalSystem, driver: Driver, dt: f64, seed: PathSeed, x0: f64) -> Result<Self> {
        Self::with_rng(system, driver, dt, seed, seed.rng(Purpose::Driver), x0)
    }

    fn with_rng(
        system: &'a IntervalSystem,
        driver: Driver,
        dt: f64,
        seed: PathSeed,
        rng: ChaCha8Rng,
        start: f64,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("grid step must be positive, got dt = {dt}"));
        }
        let u = switch_uniform(seed);
        let switch_time = match driver {
            Driver::Brownian => switch_time_at(start, system, u)?,
            Driver::Geometric { t1, t2 } => exp_switch_time_at(start, system, t1, t2, u)?,
        };
        Ok(Self {
            system,
            driver,
            dt,
            rng,
            start,
            switch_time,
            next_value: start,
            driver_steps: 0,
            visits: 0,
            busy_value: start,
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// Switch time, measured from the grid origin.
    pub fn switch_time(&self) -> f64 {
        self.switch_time
    }

    /// Driver grid steps consumed so far.
    pub fn driver_steps(&self) -> u64 {
        self.driver_steps
    }

    /// Value and mode at grid index `k`. Calls must use non-decreasing `k`.
    pub fn at(&mut self, k: u64) -> (f64, Mode) {
        let t = k as f64 * self.dt;
        if t < self.switch_time {
            return (self.start, Mode::Lazy);
        }
        let need = visits_at(k, self.switch_time, self.dt);
        while self.visits < need {
            let x = self.next_value;
            if self.system.contains_g(x) {
                self.visits += 1;
                self.busy_value = x;
            }
            self.next_value = self.driver.step(x, self.dt, &mut self.rng);
            self.driver_steps += 1;
        }
        (self.busy_value, Mode::Busy)
    }

    /// The value taken at the switch: the driver's first visit to `G`.
    pub fn first_busy_value(&mut self) -> f64 {
        if self.switch_time.is_infinite() {
            return self.start;
        }
        let k = (self.switch_time / self.dt).ceil() as u64;
        self.at(k).0
    }

    /// Value at absolute time `t`, rounded to the grid.
    pub fn at_time(&mut self, t: f64) -> (f64, Mode) {
        let k = ((t - self.driver.origin()) / self.dt).round().max(0.0) as u64;
        self.at(k)
    }
}

/// One path evaluated at a list of query times.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySample {
    pub start: f64,
    pub switch_time: f64,
    pub values: Vec<f64>,
    pub modes: Vec<Mode>,
    pub driver_steps: u64,
}

/// Evaluate one path at `queries` (absolute times, ascending).
pub fn sample_at(
    system: &IntervalSystem,
    driver: Driver,
    dt: f64,
    seed: PathSeed,
    queries: &[f64],
) -> Result<QuerySample> {
    let mut cur = FakeCursor::new(system, driver, dt, seed)?;
    let mut values = Vec::with_capacity(queries.len());
    let mut modes = Vec::with_capacity(queries.len());
    for &t in queries {
        let (x, mode) = cur.at_time(t);
        values.push(x);
        modes.push(mode);
    }
    Ok(QuerySample {
        start: cur.start(),
        switch_time: cur.switch_time(),
        values,
        modes,
        driver_steps: cur.driver_steps(),
    })
}

/// `n_paths` independent samples, identical for any worker count.
pub fn sample_many(
    system: &IntervalSystem,
    driver: Driver,
    dt: f64,
    seed: u64,
    n_paths: u64,
    queries: &[f64],
) -> Result<Vec<QuerySample>> {
    check_queries(queries)?;
    (0..n_paths)
        .into_par_iter()
        .map(|i| sample_at(system, driver, dt, PathSeed::new(seed, i), queries))
        .collect()
}

fn check_queries(queries: &[f64]) -> Result<()> {
    if queries.windows(2).any(|w| !(w[0] <= w[1])) {
        return domain("query times must be ascending");
    }
    Ok(())
}

/// Full trajectory on `[0, t_max]` via the streaming sampler.
pub fn trajectory(
    system: &IntervalSystem,
    driver: Driver,
    t_max: f64,
    dt: f64,
    seed: PathSeed,
) -> Result<FakeBMPath> {
    check_grid(t_max, dt)?;
    let steps = (t_max / dt).round() as u64;
    let mut cur = FakeCursor::new(system, driver, dt, seed)?;
    let values = (0..=steps).map(|k| cur.at(k).0).collect();
    Ok(FakeBMPath { origin: driver.origin(), dt, switch_time: cur.switch_time(), values })
}

/// Finite-depth approximation of the Cantor limit process.
pub fn simulate_limit_path(depth: u32, t_max: f64, dt: f64, seed: PathSeed) -> Result<FakeBMPath> {
    let system = IntervalSystem::fat_cantor(depth)?;
    trajectory(&system, Driver::Brownian, t_max, dt, seed)
}

/// The exponential variant on the window `(a, b) × [t1, t2]`. `system` must
/// live on the domain `(a, b)`; the path starts at time `t1`.
pub fn assemble_exp_fake_path(
    window: (f64, f64, f64, f64),
    system: &IntervalSystem,
    t_max: f64,
    dt: f64,
    seed: PathSeed,
) -> Result<FakeBMPath> {
    let driver = exp_driver(window, system)?;
    trajectory(system, driver, t_max, dt, seed)
}

/// Validate an exponential window and return its driver.
pub fn exp_driver(window: (f64, f64, f64, f64), system: &IntervalSystem) -> Result<Driver> {
    let (a, b, t1, t2) = window;
    if !check_exp_window(a, b, t1, t2)? {
        return domain(format!(
            "window ({a}, {b}) x [{t1}, {t2}] fails the concavity or density-decrease check"
        ));
    }
    if system.domain() != (a, b) {
        return domain(format!("interval system must live on ({a}, {b}), got {:?}", system.domain()));
    }
    Ok(Driver::Geometric { t1, t2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::survival_ratio;

    fn two() -> IntervalSystem {
        IntervalSystem::new(&[(0.1, 0.4), (0.6, 0.9)]).unwrap()
    }

    #[test]
    fn brownian_path_basics() {
        let a = sample_brownian_path(PathSeed::new(3, 0), 1.0, 1e-2).unwrap();
        let b = sample_brownian_path(PathSeed::new(3, 0), 1.0, 1e-2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 101);
        assert!(sample_brownian_path(PathSeed::new(3, 0), 1e-3, 1e-2).is_err());
        // Var B_1 = 2 and zero-mean increments, over 10^4 paths
        let n = 10_000;
        let (mut s1, mut s2, mut inc) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = sample_brownian_path(PathSeed::new(5, i), 1.0, 1e-2).unwrap();
            let x = p.values[100];
            s1 += x;
            s2 += x * x;
            inc += p.values[1] - p.values[0];
        }
        let n = n as f64;
        let var = s2 / n - (s1 / n).powi(2);
        // sd of the sample variance ≈ 2·√(2/n)
        assert!((var - 2.0).abs() < 5.0 * 2.0 * (2.0 / n).sqrt(), "var = {var}");
        assert!((inc / n).abs() < 5.0 * (1e-2 / n).sqrt());
    }

    #[test]
    fn clock_examples() {
        let sys = two();
        let neg = BrownianPath { dt: 0.1, values: vec![-1.0, -0.5, -2.0, -0.1] };
        let c = occupation_clock(&neg, &sys);
        for k in 0..4 {
            assert!((c.value(k) - k as f64 * 0.1).abs() < 1e-15);
        }
        // always in G: τ(t) = t + dt on the grid
        assert!((inverse_clock(&c, 0.15).unwrap() - 0.2).abs() < 1e-15);
        assert!((inverse_clock(&c, 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(inverse_clock(&c, 0.35), Err(Error::ClockExhausted { .. })));
        let gap = BrownianPath { dt: 0.1, values: vec![0.5, 0.45, 0.55, 0.42] };
        let c = occupation_clock(&gap, &sys);
        assert!((0..4).all(|k| c.value(k) == 0.0));
    }

    #[test]
    fn inverse_clock_bounds() {
        let sys = two();
        let path = sample_brownian_path(PathSeed::new(11, 0), 3.0, 1e-3).unwrap();
        let c = occupation_clock(&path, &sys);
        let mut prev = 0.0;
        for i in 0..200 {
            let s = i as f64 * 0.0071;
            let tau = inverse_clock(&c, s).unwrap();
            assert!(tau >= prev);
            prev = tau;
            let a = c.value((tau / 1e-3).round() as usize);
            assert!(a - s > 0.0 && a - s <= 1e-3 + 1e-12);
        }
        for k in 1..c.len() {
            let d = c.count(k) - c.count(k - 1);
            assert!(d <= 1);
        }
    }

    #[test]
    fn switch_time_examples() {
        let sys = two();
        assert_eq!(sample_switch_time(-2.0, &sys, PathSeed::new(1, 0)).unwrap(), 0.0);
        let s = IntervalSystem::with_domain(-0.5, 0.5, &[(-0.4, -0.1), (0.1, 0.4)]).unwrap();
        assert!((switch_time_at(0.0, &s, 0.5).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn switch_time_survival_law() {
        let sys = two();
        let x0 = 0.5;
        let n = 100_000;
        let times: Vec<f64> = (0..n).map(|i| sample_switch_time(x0, &sys, PathSeed::new(21, i)).unwrap()).collect();
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            let p = survival_ratio(x0, t).unwrap();
            let hat = times.iter().filter(|&&s| s > t).count() as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((hat - p).abs() < 3.0 * sd, "t = {t}: {hat} vs {p}");
        }
    }

    #[test]
    fn stored_and_streamed_paths_agree() {
        let sys = two();
        let dt = 1e-3;
        for i in 0..40 {
            let seed = PathSeed::new(8, i);
            let path = sample_brownian_path(seed, 6.0, dt).unwrap();
            let stored = match assemble_fake_path(&path, &sys, seed) {
                Ok(p) => p,
                Err(Error::ClockExhausted { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let streamed = trajectory(&sys, Driver::Brownian, 6.0, dt, seed).unwrap();
            assert_eq!(stored.switch_time, streamed.switch_time);
            assert_eq!(stored.values, streamed.values);
            if stored.switch_time == 0.0 {
                assert_eq!(stored.values[0], path.values[0]);
            }
            for (k, &x) in stored.values.iter().enumerate() {
                match stored.mode(k) {
                    Mode::Lazy => assert_eq!(x, path.values[0]),
                    Mode::Busy => assert!(sys.contains_g(x)),
                }
            }
        }
    }

    #[test]
    fn lazy_start_exits_near_a_gap_end() {
        let sys = two();
        let mut seen = 0;
        for i in 0..400 {
            let seed = PathSeed::new(4, i);
            let p = trajectory(&sys, Driver::Brownian, 2.0, 1e-4, seed).unwrap();
            if p.switch_time == 0.0 || p.switch_time > 1.5 {
                continue;
            }
            let gap = sys.gap_containing(p.values[0]).unwrap();
            let k = (p.switch_time / p.dt).ceil() as usize;
            let x = p.values[k];
            assert!((x - gap.lo).abs() < 0.05 || (x - gap.hi).abs() < 0.05, "first busy value {x} from {gap:?}");
            seen += 1;
        }
        assert!(seen > 10);
    }

    #[test]
    fn forced_start_lands_on_the_gap_ends() {
        let sys = two();
        for i in 0..50 {
            let mut cur = FakeCursor::from_start(&sys, Driver::Brownian, 1e-4, PathSeed::new(6, i), 0.47).unwrap();
            assert_eq!(cur.start(), 0.47);
            assert!(cur.switch_time() > 0.0);
            let x = cur.first_busy_value();
            assert!((0.35..=0.4).contains(&x) || (0.6..=0.65).contains(&x), "{x}");
        }
    }

    #[test]
    fn deeper_systems_run_faster_clocks() {
        let dt = 1e-3;
        let systems: Vec<_> = (1..=6).map(|d| IntervalSystem::fat_cantor(d).unwrap()).collect();
        for i in 0..20 {
            let path = sample_brownian_path(PathSeed::new(13, i), 4.0, dt).unwrap();
            let clocks: Vec<_> = systems.iter().map(|s| occupation_clock(&path, s)).collect();
            for w in clocks.windows(2) {
                for s in [0.1, 0.5, 1.0, 2.0] {
                    if let (Ok(a), Ok(b)) = (inverse_clock(&w[0], s), inverse_clock(&w[1], s)) {
                        assert!(b <= a + dt);
                    }
                }
            }
        }
    }

    #[test]
    fn busy_jumps_shrink_with_depth() {
        let max_jump = |depth| {
            let mut jumps: Vec<f64> = (0..60)
                .map(|i| {
                    let p = simulate_limit_path(depth, 1.0, 1e-4, PathSeed::new(17, i)).unwrap();
                    let first = (p.switch_time / p.dt).ceil() as usize;
                    p.values[first.min(p.values.len() - 1)..]
                        .windows(2)
                        .map(|w| (w[1] - w[0]).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            jumps.sort_by(f64::total_cmp);
            jumps[jumps.len() / 2]
        };
        assert!(max_jump(6) < max_jump(2));
    }

    #[test]
    fn exponential_variant() {
        let window = (0.6, 1.1, 0.5, 1.0);
        let sys = IntervalSystem::with_domain(0.6, 1.1, &[(0.7, 0.8), (0.9, 1.0)]).unwrap();
        assert!(assemble_exp_fake_path((0.6, 1.2, 0.5, 1.0), &sys, 0.1, 1e-3, PathSeed::new(1, 0)).is_err());
        let other = two();
        assert!(exp_driver(window, &other).is_err());
        let n = 4000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..n {
            let p = assemble_exp_fake_path(window, &sys, 0.4, 1e-3, PathSeed::new(2, i)).unwrap();
            assert!(p.values.iter().all(|&x| x > 0.0));
            let x = *p.values.last().unwrap();
            sum += x;
            sq += x * x;
        }
        let n = n as f64;
        let mean = sum / n;
        let sd = ((sq / n - mean * mean) / n).sqrt();
        assert!((mean - 1.0).abs() < 5.0 * sd, "mean {mean}");
    }

    #[test]
    fn many_paths_do_not_depend_on_pool_size() {
        let sys = two();
        let q = [0.5, 1.0];
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| sample_many(&sys, Driver::Brownian, 1e-3, 42, 64, &q).unwrap());
        let b = three.install(|| sample_many(&sys, Driver::Brownian, 1e-3, 42, 64, &q).unwrap());
        assert_eq!(a, b);
        assert!(sample_many(&sys, Driver::Brownian, 1e-3, 42, 4, &[1.0, 0.5]).is_err());
    }
}
