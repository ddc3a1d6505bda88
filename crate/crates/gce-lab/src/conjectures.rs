//! Randomized counterexample hunts for GCE structure conjectures.
//!
//! Conjectured inequalities, scanned over Haar-random states:
//!
//! - monotonicity: C(s_sub) <= C(s) for s_sub inside s
//! - subadditivity: C(s1 (+) s2) <= C(s1) + C(s2) for disjoint s1, s2
//! - nonnegativity of the binary functional
//!   q(z) = 2^{-n} sum_{alpha} (-1)^{<z restricted to alpha>} Tr(rho_alpha^K)
//!   over the full power set (integer K >= 2); odd-parity z give exactly 0,
//!   and K -> infinity sends every even-parity value to 2^{1-n}
//! - a strong-subadditivity-style alternating Tsallis sum over a partition
//!   (A, b, C) of the full register, conjectured <= 0; for pure global
//!   states it is in fact a rescaled monotonicity difference,
//!   nsssa = -2^{|A|+2} (C(A + b) - C(A)) for every order k, which is
//!   pinned here as an exact identity (purity pairs each term with its
//!   complement, so fullness of the partition is essential)
//!
//! A sweep records signed differences (negative-definite quantities are
//! recorded as-is with a sign-flipped predicate) and any candidate
//! violation is re-verified by an independent recomputation - fresh
//! reductions, no eigenvalue cache, compensated summation - before it is
//! reported as a counterexample together with the offending statevector.

use rayon::prelude::*;
use std::fmt;

use crate::gce::{gce_with_cache, GceParams, TracePowerCache};
use crate::rng::stream_seed;
use crate::state::{haar_random_state, PureState, SubsetLabel};
use crate::{Error, Result};

/// Violations are declared below this signed threshold; everything closer
/// to zero counts as numerical noise.
pub const VIOLATION_TOL: f64 = 1e-10;

/// C(s) - C(s_sub) for s_sub inside s; conjectured >= 0.
pub fn conj_monotone_diff(
    psi: &PureState,
    s_sub: &SubsetLabel,
    s: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    let mut cache = TracePowerCache::new(psi);
    conj_monotone_diff_with_cache(&mut cache, s_sub, s, k)
}

pub fn conj_monotone_diff_with_cache(
    cache: &mut TracePowerCache<'_>,
    s_sub: &SubsetLabel,
    s: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    if !s_sub.is_subset_of(s) {
        return Err(Error::InvalidArgument(format!(
            "{s_sub} is not contained in {s}"
        )));
    }
    let big = gce_with_cache(cache, &GceParams::new(k, s.clone())?)?;
    let small = gce_with_cache(cache, &GceParams::new(k, s_sub.clone())?)?;
    Ok(big - small)
}

/// C(s1) + C(s2) - C(s1 (+) s2) for disjoint s1, s2; conjectured >= 0.
pub fn conj_subadd_diff(
    psi: &PureState,
    s1: &SubsetLabel,
    s2: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    let mut cache = TracePowerCache::new(psi);
    conj_subadd_diff_with_cache(&mut cache, s1, s2, k)
}

pub fn conj_subadd_diff_with_cache(
    cache: &mut TracePowerCache<'_>,
    s1: &SubsetLabel,
    s2: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    if !s1.is_disjoint_from(s2) {
        return Err(Error::InvalidArgument(format!("{s1} and {s2} overlap")));
    }
    let union = s1.union(s2)?;
    let a = gce_with_cache(cache, &GceParams::new(k, s1.clone())?)?;
    let b = gce_with_cache(cache, &GceParams::new(k, s2.clone())?)?;
    let u = gce_with_cache(cache, &GceParams::new(k, union)?)?;
    Ok(a + b - u)
}

/// The parity-signed trace-power average over the full power set,
/// q(z) = 2^{-n} sum_alpha (-1)^{sum_{x in alpha} z_x} Tr(rho_alpha^K),
/// for a binary string z and integer K >= 2. At K = 2 this reproduces the
/// outcome probabilities of the two-copy permutation test digit string z.
pub fn q_of_z(psi: &PureState, z: &[u8], k: u32) -> Result<f64> {
    let mut cache = TracePowerCache::new(psi);
    q_of_z_with_cache(&mut cache, z, k)
}

pub fn q_of_z_with_cache(cache: &mut TracePowerCache<'_>, z: &[u8], k: u32) -> Result<f64> {
    let n = cache.state().n();
    if z.len() != n {
        return Err(Error::InvalidArgument(format!(
            "z has {} bits for an {n}-qubit state",
            z.len()
        )));
    }
    if z.iter().any(|&b| b > 1) {
        return Err(Error::InvalidArgument("z must be a binary string".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("q is defined for integer K >= 2, got {k}")));
    }
    let z_mask: u64 = z
        .iter()
        .enumerate()
        .fold(0, |m, (i, &b)| m | u64::from(b) << i);
    let mut total = 0.0;
    for mask in 0u64..(1 << n) {
        let sign = if (mask & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * cache.trace_power(mask, f64::from(k))?;
    }
    Ok(total / 2f64.powi(n as i32))
}

/// Alternating Tsallis sum over the disjoint triple (A, b, C):
/// sum_{alpha in P(A)} [T_k(alpha+b+C) + T_k(alpha) - T_k(alpha+b) - T_k(alpha+C)].
/// Conjectured <= 0 when (A, b, C) partitions the full register, where it
/// equals -2^{|A|+2} (C(A+b) - C(A)) identically.
pub fn nsssa_sum(
    psi: &PureState,
    a: &SubsetLabel,
    b: usize,
    c: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    let mut cache = TracePowerCache::new(psi);
    nsssa_sum_with_cache(&mut cache, a, b, c, k)
}

pub fn nsssa_sum_with_cache(
    cache: &mut TracePowerCache<'_>,
    a: &SubsetLabel,
    b: usize,
    c: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    check_nsssa_args(cache.state(), a, b, c, k)?;
    let b_mask = 1u64 << b;
    let c_mask = c.mask();
    let labels = a.indices();
    // Tsallis terms at equal k: signs telescope onto the trace powers
    let mut total = 0.0;
    for sub in 0u64..(1 << labels.len()) {
        let mut alpha = 0u64;
        for (i, &q) in labels.iter().enumerate() {
            if sub >> i & 1 == 1 {
                alpha |= 1 << q;
            }
        }
        let tp_ab = cache.trace_power(alpha | b_mask, k)?;
        let tp_ac = cache.trace_power(alpha | c_mask, k)?;
        let tp_abc = cache.trace_power(alpha | b_mask | c_mask, k)?;
        let tp_a = cache.trace_power(alpha, k)?;
        total += (tp_ab + tp_ac - tp_abc - tp_a) / (k - 1.0);
    }
    Ok(total)
}

/// nsssa_sum + 2^{|A|+2} (C(A+b) - C(A)); identically zero when (A, b, C)
/// partitions the full register.
pub fn nsssa_identity_residual(
    psi: &PureState,
    a: &SubsetLabel,
    b: usize,
    c: &SubsetLabel,
    k: f64,
) -> Result<f64> {
    if !is_full_partition(psi.n(), a, c) {
        return Err(Error::InvalidArgument(format!(
            "the identity needs (A, b, C) to cover all {} qubits; got A={a}, b={b}, C={c}",
            psi.n()
        )));
    }
    let mut cache = TracePowerCache::new(psi);
    let sum = nsssa_sum_with_cache(&mut cache, a, b, c, k)?;
    let a_with_b = a.union(&SubsetLabel::new(vec![b])?)?;
    let big = gce_with_cache(&mut cache, &GceParams::new(k, a_with_b)?)?;
    let small = gce_with_cache(&mut cache, &GceParams::new(k, a.clone())?)?;
    Ok(sum + 2f64.powi(a.len() as i32 + 2) * (big - small))
}

/// Assumes the triple already passed the disjointness checks.
fn is_full_partition(n: usize, a: &SubsetLabel, c: &SubsetLabel) -> bool {
    a.len() + 1 + c.len() == n
}

fn check_nsssa_args(
    psi: &PureState,
    a: &SubsetLabel,
    b: usize,
    c: &SubsetLabel,
    k: f64,
) -> Result<()> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("order must satisfy k > 1, got {k}")));
    }
    if a.is_empty() || c.is_empty() {
        return Err(Error::InvalidArgument("partition parts A and C must be nonempty".into()));
    }
    if a.contains(b) || c.contains(b) || !a.is_disjoint_from(c) {
        return Err(Error::InvalidArgument(format!(
            "partition parts overlap: A={a}, b={b}, C={c}"
        )));
    }
    let all = a.union(c)?.union(&SubsetLabel::new(vec![b])?)?;
    all.check_within(psi.n())
}

/// The quantity a sweep row tracks; each kind carries its own violation
/// predicate over the recorded value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjectureKind {
    /// C(s) - C(s_sub); violated when < -tol.
    Monotone,
    /// C(s1) + C(s2) - C(union); violated when < -tol.
    Subadditive,
    /// q(z) for even-parity z; violated when < -tol.
    QzEven,
    /// q(z) for odd-parity z; exact zero, violated when |value| > tol.
    QzOdd,
    /// The alternating Tsallis sum; violated when > tol.
    Nsssa,
    /// Identity residual tying the sum to a monotonicity difference;
    /// violated when |value| > tol.
    NsssaIdentity,
}

impl ConjectureKind {
    pub fn slug(self) -> &'static str {
        match self {
            ConjectureKind::Monotone => "monotone",
            ConjectureKind::Subadditive => "subadd",
            ConjectureKind::QzEven => "qz",
            ConjectureKind::QzOdd => "qz-odd",
            ConjectureKind::Nsssa => "nsssa",
            ConjectureKind::NsssaIdentity => "nsssa-identity",
        }
    }

    /// True when `value` breaks this kind's expectation.
    pub fn violated(self, value: f64) -> bool {
        match self {
            ConjectureKind::Monotone | ConjectureKind::Subadditive | ConjectureKind::QzEven => {
                value < -VIOLATION_TOL
            }
            ConjectureKind::Nsssa => value > VIOLATION_TOL,
            ConjectureKind::QzOdd | ConjectureKind::NsssaIdentity => value.abs() > VIOLATION_TOL,
        }
    }
}

impl fmt::Display for ConjectureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// One recorded quantity of one sample.
#[derive(Debug, Clone)]
pub struct ConjectureRow {
    pub conjecture: ConjectureKind,
    pub n: usize,
    pub k: f64,
    /// Comma-free rendering of the subsets involved.
    pub subsets: String,
    pub sample_index: usize,
    pub difference: f64,
    /// Seed that regenerates the sample state, for reproduction.
    pub state_seed: u64,
}

/// Sweep grid; `None` selectors resolve to per-n defaults.
#[derive(Debug, Clone, Default)]
pub struct ConjectureSweepConfig {
    pub n_values: Vec<usize>,
    pub k_values: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// (s_sub, s); default ({0,1,2}, {0,1,2,3}) clipped to small n.
    pub monotone: Option<(SubsetLabel, SubsetLabel)>,
    /// (s1, s2); default ({0,1}, {2,3}) clipped to small n.
    pub subadd: Option<(SubsetLabel, SubsetLabel)>,
    /// Binary string; default ends in two ones (even parity).
    pub z: Option<Vec<u8>>,
    /// (A, b, C); default ({0..n-3}, n-2, {n-1}).
    pub nsssa: Option<(SubsetLabel, usize, SubsetLabel)>,
}

struct ResolvedSelectors {
    monotone: (SubsetLabel, SubsetLabel),
    subadd: (SubsetLabel, SubsetLabel),
    z_even: Vec<u8>,
    z_odd: Vec<u8>,
    nsssa: (SubsetLabel, usize, SubsetLabel),
}

fn resolve_selectors(cfg: &ConjectureSweepConfig, n: usize) -> Result<ResolvedSelectors> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "conjecture sweeps need n >= 3, got n={n}"
        )));
    }
    let monotone = match &cfg.monotone {
        Some(pair) => pair.clone(),
        None => {
            let top = n.min(4);
            (
                SubsetLabel::new((0..top - 1).collect())?,
                SubsetLabel::new((0..top).collect())?,
            )
        }
    };
    let subadd = match &cfg.subadd {
        Some(pair) => pair.clone(),
        None => {
            let top = n.min(4);
            (
                SubsetLabel::new((0..top / 2).collect())?,
                SubsetLabel::new((top / 2..top).collect())?,
            )
        }
    };
    let z_even = match &cfg.z {
        Some(z) => z.clone(),
        None => {
            let mut z = vec![0u8; n];
            z[n - 2] = 1;
            z[n - 1] = 1;
            z
        }
    };
    if z_even.len() != n {
        return Err(Error::InvalidArgument(format!(
            "z has {} bits but the sweep visits n={n}",
            z_even.len()
        )));
    }
    let mut z_odd = vec![0u8; n];
    z_odd[n - 1] = 1;
    let nsssa = match &cfg.nsssa {
        Some(triple) => triple.clone(),
        None => (
            SubsetLabel::new((0..n - 2).collect())?,
            n - 2,
            SubsetLabel::new(vec![n - 1])?,
        ),
    };
    Ok(ResolvedSelectors { monotone, subadd, z_even, z_odd, nsssa })
}

fn is_integer_order(k: f64) -> Option<u32> {
    let r = k.round();
    if (k - r).abs() < 1e-9 && r >= 2.0 && r <= f64::from(u32::MAX) {
        Some(r as u32)
    } else {
        None
    }
}

fn subset_pair_string(a: &SubsetLabel, sep: char, b: &SubsetLabel) -> String {
    format!("{a}{sep}{b}")
}

fn z_string(z: &[u8]) -> String {
    let bits: String = z.iter().map(|&b| char::from(b'0' + b)).collect();
    format!("z={bits}")
}

/// A candidate violation that survived re-verification, with the state
/// that produced it.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub row_index: usize,
    pub reverified_difference: f64,
    pub state_json: String,
}

/// Sweep output: every recorded row plus re-verified counterexamples.
#[derive(Debug, Clone)]
pub struct ConjectureSweepReport {
    pub rows: Vec<ConjectureRow>,
    pub counterexamples: Vec<Counterexample>,
}

/// Indices of rows whose value breaks their kind's expectation.
pub fn flag_candidates(rows: &[ConjectureRow]) -> Vec<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.conjecture.violated(r.difference))
        .map(|(i, _)| i)
        .collect()
}

/// Runs the sweep; deterministic for any thread count. Candidate
/// violations are recomputed independently (fresh state, no cache,
/// compensated sums) and only kept if they persist.
pub fn conjecture_sweep(cfg: &ConjectureSweepConfig) -> Result<ConjectureSweepReport> {
    if cfg.samples == 0 || cfg.n_values.is_empty() || cfg.k_values.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let mut grid = Vec::new();
    for &n in &cfg.n_values {
        resolve_selectors(cfg, n)?; // validate early, before spawning work
        for &k in &cfg.k_values {
            if !(k > 1.0) {
                return Err(Error::InvalidArgument(format!("order must satisfy k > 1, got {k}")));
            }
            grid.push((n, k));
        }
    }

    let work: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|cell| (0..cfg.samples).map(move |sample| (cell, sample)))
        .collect();
    let nested: Result<Vec<Vec<ConjectureRow>>> = work
        .par_iter()
        .map(|&(cell, sample)| {
            let (n, k) = grid[cell];
            let sel = resolve_selectors(cfg, n)?;
            let state_seed = stream_seed(cfg.seed, &[cell as u64, sample as u64]);
            let psi = haar_random_state(n, state_seed)?;
            let mut cache = TracePowerCache::new(&psi);
            let mut rows = Vec::with_capacity(6);
            let mut push = |kind: ConjectureKind, subsets: String, difference: f64| {
                rows.push(ConjectureRow {
                    conjecture: kind,
                    n,
                    k,
                    subsets,
                    sample_index: sample,
                    difference,
                    state_seed,
                });
            };
            let (s_sub, s) = &sel.monotone;
            push(
                ConjectureKind::Monotone,
                subset_pair_string(s_sub, '<', s),
                conj_monotone_diff_with_cache(&mut cache, s_sub, s, k)?,
            );
            let (s1, s2) = &sel.subadd;
            push(
                ConjectureKind::Subadditive,
                subset_pair_string(s1, '+', s2),
                conj_subadd_diff_with_cache(&mut cache, s1, s2, k)?,
            );
            if let Some(k_int) = is_integer_order(k) {
                push(
                    ConjectureKind::QzEven,
                    z_string(&sel.z_even),
                    q_of_z_with_cache(&mut cache, &sel.z_even, k_int)?,
                );
                push(
                    ConjectureKind::QzOdd,
                    z_string(&sel.z_odd),
                    q_of_z_with_cache(&mut cache, &sel.z_odd, k_int)?,
                );
            }
            let (a, b, c) = &sel.nsssa;
            let nsssa_subsets = format!("{a}|{b}|{c}");
            push(
                ConjectureKind::Nsssa,
                nsssa_subsets.clone(),
                nsssa_sum_with_cache(&mut cache, a, *b, c, k)?,
            );
            if is_full_partition(n, a, c) {
                push(
                    ConjectureKind::NsssaIdentity,
                    nsssa_subsets,
                    nsssa_identity_residual(&psi, a, *b, c, k)?,
                );
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<ConjectureRow> = nested?.into_iter().flatten().collect();

    let mut counterexamples = Vec::new();
    for idx in flag_candidates(&rows) {
        let row = &rows[idx];
        let psi = haar_random_state(row.n, row.state_seed)?;
        let value = reverify(cfg, &psi, row)?;
        if row.conjecture.violated(value) {
            counterexamples.push(Counterexample {
                row_index: idx,
                reverified_difference: value,
                state_json: psi.to_json_string(),
            });
        }
    }
    Ok(ConjectureSweepReport { rows, counterexamples })
}

/// CSV with one row per recorded quantity.
pub fn rows_to_csv(rows: &[ConjectureRow]) -> String {
    let mut out = String::from("conjecture,n,K,subsets,sample_index,difference\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.conjecture, r.n, r.k, r.subsets, r.sample_index, r.difference
        ));
    }
    out
}

// Independent recomputation path for candidate violations: no shared
// eigenvalue cache, subset sums in compensated (Kahan) arithmetic.

struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

fn trace_power_fresh(psi: &PureState, mask: u64, k: f64) -> Result<f64> {
    let rho = crate::state::partial_trace(psi, &SubsetLabel::from_mask(mask))?;
    crate::state::trace_power(&rho, k)
}

fn gce_compensated(psi: &PureState, s: &SubsetLabel, k: f64) -> Result<f64> {
    let labels = s.indices();
    let mut acc = Kahan::new();
    for sub in 0u64..(1 << labels.len()) {
        let mut mask = 0u64;
        for (i, &q) in labels.iter().enumerate() {
            if sub >> i & 1 == 1 {
                mask |= 1 << q;
            }
        }
        acc.add(trace_power_fresh(psi, mask, k)?);
    }
    Ok((1.0 - acc.sum / 2f64.powi(labels.len() as i32)) / (k - 1.0))
}

fn reverify(cfg: &ConjectureSweepConfig, psi: &PureState, row: &ConjectureRow) -> Result<f64> {
    let sel = resolve_selectors(cfg, row.n)?;
    let k = row.k;
    match row.conjecture {
        ConjectureKind::Monotone => {
            let (s_sub, s) = &sel.monotone;
            Ok(gce_compensated(psi, s, k)? - gce_compensated(psi, s_sub, k)?)
        }
        ConjectureKind::Subadditive => {
            let (s1, s2) = &sel.subadd;
            Ok(gce_compensated(psi, s1, k)? + gce_compensated(psi, s2, k)?
                - gce_compensated(psi, &s1.union(s2)?, k)?)
        }
        ConjectureKind::QzEven | ConjectureKind::QzOdd => {
            let z = if row.conjecture == ConjectureKind::QzEven { &sel.z_even } else { &sel.z_odd };
            let z_mask: u64 = z.iter().enumerate().fold(0, |m, (i, &b)| m | u64::from(b) << i);
            let n = psi.n();
            let mut acc = Kahan::new();
            for mask in 0u64..(1 << n) {
                let sign = if (mask & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc.add(sign * trace_power_fresh(psi, mask, k)?);
            }
            Ok(acc.sum / 2f64.powi(n as i32))
        }
        ConjectureKind::Nsssa | ConjectureKind::NsssaIdentity => {
            let (a, b, c) = &sel.nsssa;
            let b_mask = 1u64 << *b;
            let c_mask = c.mask();
            let labels = a.indices();
            let mut acc = Kahan::new();
            for sub in 0u64..(1 << labels.len()) {
                let mut alpha = 0u64;
                for (i, &q) in labels.iter().enumerate() {
                    if sub >> i & 1 == 1 {
                        alpha |= 1 << q;
                    }
                }
                acc.add(trace_power_fresh(psi, alpha | b_mask, k)?);
                acc.add(trace_power_fresh(psi, alpha | c_mask, k)?);
                acc.add(-trace_power_fresh(psi, alpha | b_mask | c_mask, k)?);
                acc.add(-trace_power_fresh(psi, alpha, k)?);
            }
            let sum = acc.sum / (k - 1.0);
            if row.conjecture == ConjectureKind::Nsssa {
                Ok(sum)
            } else {
                let a_with_b = a.union(&SubsetLabel::new(vec![*b])?)?;
                let diff = gce_compensated(psi, &a_with_b, k)? - gce_compensated(psi, a, k)?;
                Ok(sum + 2f64.powi(a.len() as i32 + 2) * diff)
            }
        }
    }
}
