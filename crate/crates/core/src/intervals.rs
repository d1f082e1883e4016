//! Interval systems `G = (-∞, lo] ∪ [a_1, b_1] ∪ … ∪ [a_N, b_N] ∪ [hi, ∞)`,
//! their open complements (the lazy territory `C`), fat Cantor families, and
//! their projection onto the lattice `√(2/m)·ℤ`.

use serde_json::Value;

use crate::error::{domain, Error, Result};

/// Distance under which a lattice point counts as sitting on an endpoint.
pub const SNAP_TOL: f64 = 1e-12;

/// A closed interval `[lo, hi]` (or an open gap, depending on context).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Validated, ordered family of disjoint closed intervals strictly inside an
/// open domain `(lo, hi)`. The pieces `(-∞, lo]` and `[hi, ∞)` belong to `G`
/// implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSystem {
    lo: f64,
    hi: f64,
    intervals: Vec<Interval>,
}

impl IntervalSystem {
    /// Build a system on the unit domain `(0, 1)`.
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::with_domain(0.0, 1.0, intervals)
    }

    /// Build a system on an arbitrary bounded domain `(lo, hi)`.
    pub fn with_domain(lo: f64, hi: f64, intervals: &[(f64, f64)]) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("domain ({lo}, {hi}) is not a bounded interval"));
        }
        if intervals.is_empty() {
            return Err(Error::InvalidInterval { index: 0, reason: "interval list is empty".into() });
        }
        let mut sorted: Vec<(usize, Interval)> = intervals
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| (i, Interval { lo: a, hi: b }))
            .collect();
        for &(index, iv) in &sorted {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) {
                return Err(Error::InvalidInterval { index, reason: "non-finite endpoint".into() });
            }
            if iv.lo >= iv.hi {
                return Err(Error::InvalidInterval {
                    index,
                    reason: format!("a = {} is not below b = {}", iv.lo, iv.hi),
                });
            }
            if iv.lo <= lo || iv.hi >= hi {
                return Err(Error::InvalidInterval {
                    index,
                    reason: format!("[{}, {}] not strictly inside ({lo}, {hi})", iv.lo, iv.hi),
                });
            }
        }
        sorted.sort_by(|x, y| x.1.lo.total_cmp(&y.1.lo));
        for w in sorted.windows(2) {
            let (prev, (index, next)) = (w[0].1, w[1]);
            if next.lo <= prev.hi {
                return Err(Error::InvalidInterval {
                    index,
                    reason: format!(
                        "[{}, {}] overlaps or touches [{}, {}]",
                        next.lo, next.hi, prev.lo, prev.hi
                    ),
                });
            }
        }
        Ok(Self { lo, hi, intervals: sorted.into_iter().map(|(_, iv)| iv).collect() })
    }

    /// The depth-`d` fat Cantor system on `(0, 1)`.
    pub fn fat_cantor(depth: u32) -> Result<Self> {
        Self::fat_cantor_in(0.0, 1.0, depth)
    }

    /// The depth-`d` fat Cantor system mapped affinely onto `(lo, hi)`.
    pub fn fat_cantor_in(lo: f64, hi: f64, depth: u32) -> Result<Self> {
        let scale = hi - lo;
        let ivs: Vec<(f64, f64)> = fat_cantor_intervals(depth)?
            .into_iter()
            .map(|(a, b)| (lo + scale * a, lo + scale * b))
            .collect();
        Self::with_domain(lo, hi, &ivs)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Number of bounded intervals `N`.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `x ∈ G`.
    pub fn contains_g(&self, x: f64) -> bool {
        self.contains_g_within(x, 0.0)
    }

    /// `x ∈ C = ℝ \ G`.
    pub fn contains_c(&self, x: f64) -> bool {
        !self.contains_g(x)
    }

    /// Membership with every piece of `G` widened by `tol`.
    fn contains_g_within(&self, x: f64, tol: f64) -> bool {
        if x <= self.lo + tol || x >= self.hi - tol {
            return true;
        }
        // last interval with lo - tol <= x
        let k = self.intervals.partition_point(|iv| iv.lo - tol <= x);
        k > 0 && x <= self.intervals[k - 1].hi + tol
    }

    /// The `N + 1` open gaps, left to right: `(lo, a_1), (b_1, a_2), …, (b_N, hi)`.
    pub fn gaps(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut left = self.lo;
        for iv in &self.intervals {
            out.push(Interval { lo: left, hi: iv.lo });
            left = iv.hi;
        }
        out.push(Interval { lo: left, hi: self.hi });
        out
    }

    /// The open gap `(b_{n-1}, a_n)` containing `x`, if `x ∈ C`.
    pub fn gap_containing(&self, x: f64) -> Option<Interval> {
        if self.contains_g(x) {
            return None;
        }
        let k = self.intervals.partition_point(|iv| iv.lo <= x);
        let left = if k == 0 { self.lo } else { self.intervals[k - 1].hi };
        let right = self.intervals.get(k).map_or(self.hi, |iv| iv.lo);
        Some(Interval { lo: left, hi: right })
    }

    /// Total Lebesgue measure of the bounded intervals.
    pub fn bounded_measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Project onto the lattice `j·√(2/m)`, `|j| ≤ j_max`.
    pub fn lattice(&self, m: u32, j_max: i64) -> Result<LatticeSystem> {
        lattice_project(self, m, j_max)
    }

    /// Serialize as a JSON array of `["a", "b"]` decimal-string pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.intervals
                .iter()
                .map(|iv| Value::Array(vec![Value::String(iv.lo.to_string()), Value::String(iv.hi.to_string())]))
                .collect(),
        )
    }

    /// Parse a JSON array of `[a, b]` pairs (strings or numbers) on `(0, 1)`.
    pub fn from_json(value: &Value) -> Result<Self> {
        Self::new(&parse_pairs(value)?)
    }
}

/// Parse `[[a, b], …]` where each endpoint is a JSON number or decimal string.
pub fn parse_pairs(value: &Value) -> Result<Vec<(f64, f64)>> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Config("interval system must be a JSON array of [a, b] pairs".into()))?;
    arr.iter()
        .enumerate()
        .map(|(i, pair)| {
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::InvalidInterval {
                index: i,
                reason: "expected a two-element array".into(),
            })?;
            Ok((endpoint(&p[0], i)?, endpoint(&p[1], i)?))
        })
        .collect()
}

fn endpoint(v: &Value, index: usize) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::InvalidInterval { index, reason: format!("endpoint {v} is not a number") })
}

/// Removed intervals of the Smith–Volterra–Cantor construction on `[0, 1]`.
///
/// Stage `k` removes the centred open interval of length `4^{-k}` from each
/// of the `2^{k-1}` intervals kept so far. The `2^depth - 1` removed pieces
/// are returned as closed intervals, left to right.
pub fn fat_cantor_intervals(depth: u32) -> Result<Vec<(f64, f64)>> {
    if depth < 1 {
        return domain("fat Cantor depth must be at least 1");
    }
    if depth > 30 {
        return domain(format!("fat Cantor depth {depth} is too large"));
    }
    let mut kept = vec![(0.0f64, 1.0f64)];
    let mut removed = Vec::with_capacity((1usize << depth) - 1);
    for k in 1..=depth {
        let len = 0.25f64.powi(k as i32);
        let mut next = Vec::with_capacity(kept.len() * 2);
        for &(a, b) in &kept {
            let mid = 0.5 * (a + b);
            let (ra, rb) = (mid - 0.5 * len, mid + 0.5 * len);
            removed.push((ra, rb));
            next.push((a, ra));
            next.push((rb, b));
        }
        kept = next;
    }
    removed.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(removed)
}

/// Default lattice half-width for a run up to time `t_max`: the truncated
/// tail carries less than `1e-12` of the mass.
pub fn default_window(m: u32, t_max: f64) -> i64 {
    ((m as f64 / 2.0).sqrt() * (1.0 + 6.0 * (1.0 + t_max).sqrt())).ceil() as i64
}

/// Where a lattice site sits relative to `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    /// In `G` with both lattice neighbours in `G`.
    Interior,
    /// In `G` with at least one lattice neighbour in `C`.
    Boundary,
    /// In `C`.
    Lazy,
}

/// The lattice image of an interval system: sites `j` with `|j| ≤ j_max`
/// split into `G^{N,m}`, `∂G^{N,m}` and `C^{N,m}`.
#[derive(Debug, Clone)]
pub struct LatticeSystem {
    m: u32,
    j_max: i64,
    spacing: f64,
    kinds: Vec<SiteKind>,
    // nearest G site strictly left / right of each site (None past the window)
    left_g: Vec<Option<i64>>,
    right_g: Vec<Option<i64>>,
}

/// Project `system` onto `√(2/m)·ℤ`.
///
/// Every gap between two bounded intervals must contain a lattice point;
/// the outer gaps `(lo, a_1)` and `(b_N, hi)` may vanish on coarse lattices.
pub fn lattice_project(system: &IntervalSystem, m: u32, j_max: i64) -> Result<LatticeSystem> {
    if m == 0 {
        return domain("lattice scale m must be positive");
    }
    let spacing = (2.0 / m as f64).sqrt();
    let (lo, hi) = system.domain();
    let reach = lo.abs().max(hi.abs());
    if (j_max as f64) * spacing <= reach {
        return domain(format!(
            "lattice window |j| <= {j_max} (|x| <= {}) does not cover the domain ({lo}, {hi})",
            j_max as f64 * spacing
        ));
    }
    let gaps = system.gaps();
    for g in &gaps[1..gaps.len() - 1] {
        let first = (g.lo / spacing).floor() as i64 - 1;
        let last = (g.hi / spacing).ceil() as i64 + 1;
        let hit = (first..=last).any(|j| {
            let x = j as f64 * spacing;
            x > g.lo + SNAP_TOL && x < g.hi - SNAP_TOL
        });
        if !hit {
            return Err(Error::LatticeTooCoarse { m, lo: g.lo, hi: g.hi });
        }
    }

    let width = (2 * j_max + 1) as usize;
    let in_g: Vec<bool> = (-j_max..=j_max)
        .map(|j| system.contains_g_within(j as f64 * spacing, SNAP_TOL))
        .collect();
    let kinds: Vec<SiteKind> = (0..width)
        .map(|k| {
            if !in_g[k] {
                SiteKind::Lazy
            } else if (k > 0 && !in_g[k - 1]) || (k + 1 < width && !in_g[k + 1]) {
                SiteKind::Boundary
            } else {
                SiteKind::Interior
            }
        })
        .collect();
    let mut left_g = vec![None; width];
    let mut last = None;
    for k in 0..width {
        left_g[k] = last;
        if in_g[k] {
            last = Some(k as i64 - j_max);
        }
    }
    let mut right_g = vec![None; width];
    let mut next = None;
    for k in (0..width).rev() {
        right_g[k] = next;
        if in_g[k] {
            next = Some(k as i64 - j_max);
        }
    }
    Ok(LatticeSystem { m, j_max, spacing, kinds, left_g, right_g })
}

impl LatticeSystem {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    /// `√(2/m)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn position(&self, j: i64) -> f64 {
        j as f64 * self.spacing
    }

    pub fn contains(&self, j: i64) -> bool {
        j.abs() <= self.j_max
    }

    /// Storage index of site `j`.
    pub fn index(&self, j: i64) -> usize {
        (j + self.j_max) as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        -self.j_max..=self.j_max
    }

    pub fn kind(&self, j: i64) -> Option<SiteKind> {
        self.contains(j).then(|| self.kinds[self.index(j)])
    }

    /// `j ∈ G^{N,m}`. Sites outside the window lie beyond the domain, hence in `G`.
    pub fn is_g(&self, j: i64) -> bool {
        !matches!(self.kind(j), Some(SiteKind::Lazy))
    }

    /// `j ∈ C^{N,m}`.
    pub fn is_c(&self, j: i64) -> bool {
        matches!(self.kind(j), Some(SiteKind::Lazy))
    }

    /// `j ∈ ∂G^{N,m}`.
    pub fn is_boundary(&self, j: i64) -> bool {
        matches!(self.kind(j), Some(SiteKind::Boundary))
    }

    pub fn g_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.sites().filter(move |&j| self.is_g(j))
    }

    pub fn c_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.sites().filter(move |&j| self.is_c(j))
    }

    pub fn boundary_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.sites().filter(move |&j| self.is_boundary(j))
    }

    /// Nearest `G^{N,m}` sites strictly left and right of `j`, for
    /// `j ∈ C^{N,m} ∪ ∂G^{N,m}`. At the window edge the missing side is the
    /// adjacent (off-window, hence `G`) site.
    pub fn gap_neighbors(&self, j: i64) -> Option<(i64, i64)> {
        match self.kind(j)? {
            SiteKind::Interior => None,
            SiteKind::Boundary | SiteKind::Lazy => {
                let k = self.index(j);
                Some((self.left_g[k].unwrap_or(j - 1), self.right_g[k].unwrap_or(j + 1)))
            }
        }
    }

    /// Nearest `G` neighbours of any site; interior sites give `(j - 1, j + 1)`.
    pub(crate) fn g_neighbors(&self, j: i64) -> (i64, i64) {
        self.gap_neighbors(j).unwrap_or((j - 1, j + 1))
    }
}
