//! Cyclic permutation test over K copies of a state, simulated exactly.
//!
//! The test prepares |psi>^(x)K, runs one generalized-phase estimation per
//! qubit label against the cyclic copy shift, and records one base-K digit
//! z_j per label. For prime K every power of the shift is a single K-cycle,
//! and the outcome masses on residue classes of digit sums recover trace
//! powers: with P_t(alpha) the probability that sum_{j in alpha} z_j = t
//! (mod K),
//!
//!   Tr(rho_alpha^K) = (K P_0(alpha) - 1) / (K - 1)
//!                   = 1 - K P_t(alpha)            for any fixed t != 0.
//!
//! Both identities are exposed side by side and never merged, so they keep
//! cross-checking each other. For composite K the shift powers fall apart
//! into shorter cycles and no such identity exists; those orders are
//! rejected as unsupported.
//!
//! Exact outcome distributions are computed by a copy-shift path integral:
//! for shift digits m = (m_0 .. m_{n-1}), one per label,
//!
//!   G(m) = sum_y conj(Psi[y]) Psi[x(y)],   x's (copy i, label j) bit
//!                                          taken from y's copy (i - m_j)
//!   p(z) = K^{-n} sum_m exp(-2 pi i <z, m> / K) G(m)
//!
//! Identical pure copies only ever produce digit strings whose total digit
//! sum vanishes mod K, so tables store exactly that support.

use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::gce::GceParams;
use crate::rng::seeded_rng;
use crate::state::{partial_trace, DensityMatrix, PureState, SubsetLabel};
use crate::{Error, Result};

/// Largest K*n for which exact joint-state tables are computed by default.
pub const KRAUS_QUBIT_GUARD: usize = 24;

pub(crate) fn is_prime(k: u32) -> bool {
    if k < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= k {
        if k % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn require_prime(k: u32) -> Result<()> {
    if is_prime(k) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(k))
    }
}

/// Permutation of K copy slots, stored as `source[i]` = slot whose content
/// lands at slot i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyPermutation {
    source: Vec<usize>,
}

impl CopyPermutation {
    pub fn identity(k: usize) -> Self {
        CopyPermutation { source: (0..k).collect() }
    }

    /// Swap of two slots.
    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        if a >= k || b >= k || a == b {
            return Err(Error::InvalidArgument(format!(
                "transposition ({a} {b}) invalid for {k} slots"
            )));
        }
        let mut source: Vec<usize> = (0..k).collect();
        source.swap(a, b);
        Ok(CopyPermutation { source })
    }

    pub fn k(&self) -> usize {
        self.source.len()
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    /// `self` applied first, `then` applied second.
    pub fn compose(&self, then: &CopyPermutation) -> Result<CopyPermutation> {
        if self.k() != then.k() {
            return Err(Error::InvalidArgument("composing permutations of different sizes".into()));
        }
        Ok(CopyPermutation {
            source: (0..self.k()).map(|i| self.source[then.source[i]]).collect(),
        })
    }

    pub fn pow(&self, q: usize) -> CopyPermutation {
        let mut acc = CopyPermutation::identity(self.k());
        for _ in 0..q {
            acc = acc.compose(self).expect("equal sizes");
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(i, &s)| i == s)
    }
}

/// z-th power of the cyclic copy shift on K slots: slot i receives the
/// content of slot (i + z) mod K.
pub fn derangement_power(k: usize, z: usize) -> Result<CopyPermutation> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 copies, got {k}")));
    }
    Ok(CopyPermutation { source: (0..k).map(|i| (i + z) % k).collect() })
}

/// True when the permutation is one cycle through all slots. Shift powers
/// D^z with z != 0 have this for every z exactly when K is prime.
pub fn is_single_cycle(p: &CopyPermutation) -> bool {
    let k = p.k();
    let mut seen = 1usize;
    let mut at = p.source[0];
    while at != 0 {
        seen += 1;
        at = p.source[at];
        if seen > k {
            return false; // not reachable for a permutation; belt and braces
        }
    }
    seen == k
}

/// Applies the copy shift D^z to one qubit label of a joint state over
/// K copies of an n-qubit register (copy 0 on the most significant qubits).
pub fn apply_copy_derangement(
    joint: &PureState,
    n: usize,
    k: usize,
    qubit_label: usize,
    z: usize,
) -> Result<PureState> {
    if k < 2 || n == 0 || joint.n() != k * n {
        return Err(Error::InvalidArgument(format!(
            "joint state has {} qubits, expected {k} copies x {n} labels",
            joint.n()
        )));
    }
    if qubit_label >= n {
        return Err(Error::InvalidArgument(format!(
            "qubit label {qubit_label} out of range for {n}-qubit copies"
        )));
    }
    let z = z % k;
    let total = k * n;
    let shift_of = |copy: usize| total - 1 - (copy * n + qubit_label);
    let mut clear_mask = usize::MAX;
    for i in 0..k {
        clear_mask &= !(1usize << shift_of(i));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); joint.dim()];
    for (x, amp) in joint.amplitudes().iter().enumerate() {
        let mut y = x & clear_mask;
        for i in 0..k {
            let bit = x >> shift_of((i + z) % k) & 1;
            y |= bit << shift_of(i);
        }
        out[y] = *amp;
    }
    Ok(PureState::from_trusted(joint.n(), out))
}

/// Tr(D^z (rho_0 (x) .. (x) rho_{K-1})) by direct index contraction:
/// sum over basis tuples x of prod_i rho_i[x_{i-z}, x_i].
///
/// Independent of both the eigenvalue path and the outcome-table path, so
/// it serves as a third route for trace identities (e.g. equal copies and a
/// single-cycle shift give Tr(rho^K); the two-cycle case K=4, z=2 gives
/// Tr(rho^2)^2 instead).
pub fn derangement_trace(rhos: &[&DensityMatrix], z: usize) -> Result<Complex64> {
    let k = rhos.len();
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one factor".into()));
    }
    let d = rhos[0].dim();
    if rhos.iter().any(|r| r.dim() != d) {
        return Err(Error::InvalidArgument("factors must share one dimension".into()));
    }
    if (d as f64).powi(k as i32) > 1e7 {
        return Err(Error::ResourceLimit(format!(
            "direct contraction over {d}^{k} index tuples"
        )));
    }
    let z = z % k;
    let mut total = Complex64::new(0.0, 0.0);
    let mut x = vec![0usize; k];
    loop {
        let mut term = Complex64::new(1.0, 0.0);
        for i in 0..k {
            term *= rhos[i].entry(x[(i + k - z) % k], x[i]);
        }
        total += term;
        // odometer over [d]^k
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            x[pos] += 1;
            if x[pos] < d {
                break;
            }
            x[pos] = 0;
        }
    }
}

/// Base-K digit string, one digit per qubit label (label 0 first).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DigitString {
    k: u32,
    digits: Vec<u8>,
}

impl DigitString {
    pub fn new(k: u32, digits: Vec<u8>) -> Result<Self> {
        if k < 2 || k > 36 {
            return Err(Error::InvalidArgument(format!("digit radix {k} outside 2..=36")));
        }
        if digits.iter().any(|&d| u32::from(d) >= k) {
            return Err(Error::InvalidArgument(format!("digit out of range for radix {k}")));
        }
        Ok(DigitString { k, digits })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn parse(k: u32, text: &str) -> Result<Self> {
        let digits = text
            .chars()
            .map(|ch| {
                ch.to_digit(36)
                    .filter(|&d| d < k)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Parse(format!("bad base-{k} digit {ch:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        DigitString::new(k, digits)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.digits {
            write!(f, "{}", char::from_digit(u32::from(d), 36).expect("digit < 36"))?;
        }
        Ok(())
    }
}

/// Outcome distribution of the permutation test: probability per base-K
/// digit string, keyed in lexicographic digit order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    n: usize,
    k: u32,
    entries: BTreeMap<Vec<u8>, f64>,
}

impl ProbabilityTable {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        if n == 0 || k < 2 {
            return Err(Error::InvalidArgument(format!(
                "table needs n >= 1 labels and radix K >= 2, got n={n}, K={k}"
            )));
        }
        Ok(ProbabilityTable { n, k, entries: BTreeMap::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u8>, f64)> {
        self.entries.iter().map(|(d, &p)| (d, p))
    }

    /// Probability of one digit string; absent entries count as 0.
    pub fn probability(&self, digits: &[u8]) -> f64 {
        self.entries.get(digits).copied().unwrap_or(0.0)
    }

    pub(crate) fn set(&mut self, digits: Vec<u8>, p: f64) -> Result<()> {
        if digits.len() != self.n || digits.iter().any(|&d| u32::from(d) >= self.k) {
            return Err(Error::InvalidArgument("digit string does not fit the table".into()));
        }
        self.entries.insert(digits, p);
        Ok(())
    }

    pub(crate) fn add_mass(&mut self, digits: Vec<u8>, p: f64) -> Result<()> {
        if digits.len() != self.n || digits.iter().any(|&d| u32::from(d) >= self.k) {
            return Err(Error::InvalidArgument("digit string does not fit the table".into()));
        }
        *self.entries.entry(digits).or_insert(0.0) += p;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Mass of entries whose digit sum over `alpha` is t mod K.
    pub fn residue_mass(&self, alpha: &SubsetLabel, t: u32) -> Result<f64> {
        alpha.check_within(self.n)?;
        let k = self.k;
        Ok(self
            .entries
            .iter()
            .filter(|(digits, _)| {
                let r: u32 = alpha.indices().iter().map(|&j| u32::from(digits[j])).sum();
                r % k == t % k
            })
            .map(|(_, &p)| p)
            .sum())
    }

    /// Mass of stored entries whose total digit sum is nonzero mod K.
    /// Identical pure copies put (numerically) nothing there.
    pub fn off_support_mass(&self) -> f64 {
        let full = SubsetLabel::full(self.n);
        self.total() - self.residue_mass(&full, 0).expect("full subset fits")
    }

    /// CSV with header `digits,probability`, probabilities at 17
    /// significant digits (round-trips f64 exactly), rows in lexicographic
    /// digit order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("digits,probability\n");
        for (digits, p) in self.entries.iter() {
            let ds = DigitString::new(self.k, digits.clone()).expect("validated on insert");
            out.push_str(&format!("{ds},{p:.16e}\n"));
        }
        out
    }

    pub fn from_csv_str(text: &str, k: u32) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "digits,probability")) => {}
            _ => return Err(Error::Parse("table CSV must start with `digits,probability`".into())),
        }
        let mut entries = BTreeMap::new();
        let mut n = None;
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (ds, ps) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two fields", ln + 1)))?;
            let digits = DigitString::parse(k, ds)
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
            let p: f64 = ps
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad probability: {e}", ln + 1)))?;
            match n {
                None => n = Some(digits.digits().len()),
                Some(n0) if n0 != digits.digits().len() => {
                    return Err(Error::Parse(format!("line {}: ragged digit strings", ln + 1)))
                }
                _ => {}
            }
            entries.insert(digits.digits().to_vec(), p);
        }
        let n = n.ok_or_else(|| Error::Parse("table CSV has no rows".into()))?;
        Ok(ProbabilityTable { n, k, entries })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn load_csv(path: &Path, k: u32) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, k)
    }
}

/// Shift-digit sums G(m) for all K^n shift vectors (label 0 = most
/// significant digit of the index).
fn shift_sums(psi: &PureState, k: u32) -> Vec<Complex64> {
    let n = psi.n();
    let ku = k as usize;
    let total_bits = ku * n;
    let amps = psi
        .tensor_power(ku)
        .expect("k >= 2 checked by callers")
        .amplitudes()
        .to_vec();
    let codes = ku.pow(n as u32);

    let mut g = vec![Complex64::new(0.0, 0.0); codes];
    let mut m = vec![0usize; n];
    for code in 0..codes {
        // source bit position (from the left) for each target bit
        let mut src_shift = vec![0usize; total_bits];
        for (p, s) in src_shift.iter_mut().enumerate() {
            let copy = p / n;
            let label = p % n;
            let src_copy = (copy + ku - m[label]) % ku;
            *s = total_bits - 1 - (src_copy * n + label);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, amp_y) in amps.iter().enumerate() {
            let mut x = 0usize;
            for (p, &s) in src_shift.iter().enumerate() {
                x |= (y >> s & 1) << (total_bits - 1 - p);
            }
            acc += amp_y.conj() * amps[x];
        }
        g[code] = acc;

        // odometer over base-K digits, label n-1 fastest
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            m[pos] += 1;
            if m[pos] < ku {
                break;
            }
            m[pos] = 0;
        }
    }
    g
}

fn digits_of_code(mut code: usize, n: usize, k: usize) -> Vec<u8> {
    let mut digits = vec![0u8; n];
    for slot in (0..n).rev() {
        digits[slot] = (code % k) as u8;
        code /= k;
    }
    digits
}

/// p(z) for one digit string, from the shift sums.
fn outcome_probability(g: &[Complex64], z: &[u8], k: u32) -> f64 {
    let ku = k as usize;
    let n = z.len();
    let omega_bar: Vec<Complex64> = (0..ku)
        .map(|t| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t as f64 / ku as f64))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (code, gm) in g.iter().enumerate() {
        let m = digits_of_code(code, n, ku);
        let phase: usize = z
            .iter()
            .zip(&m)
            .map(|(&zj, &mj)| zj as usize * mj as usize)
            .sum();
        acc += omega_bar[phase % ku] * gm;
    }
    (acc / ku.pow(n as u32) as f64).re
}

fn check_kraus_guard(n: usize, k: u32) -> Result<()> {
    let bits = k as usize * n;
    if bits > KRAUS_QUBIT_GUARD {
        return Err(Error::ResourceLimit(format!(
            "joint register of K*n = {bits} qubits exceeds the default cap of {KRAUS_QUBIT_GUARD}; use the unguarded variant to force it"
        )));
    }
    Ok(())
}

/// Exact outcome distribution of the permutation test on |psi>^(x)K for
/// prime K. The returned table stores exactly the digit strings with total
/// digit sum 0 mod K (all K^(n-1) of them); everything else carries no
/// mass for identical pure copies.
pub fn exact_probability_table(psi: &PureState, k: u32) -> Result<ProbabilityTable> {
    require_prime(k)?;
    check_kraus_guard(psi.n(), k)?;
    exact_probability_table_unguarded(psi, k)
}

/// Same as [`exact_probability_table`] with the size guard lifted; memory
/// grows as 2^(K n) amplitudes.
pub fn exact_probability_table_unguarded(psi: &PureState, k: u32) -> Result<ProbabilityTable> {
    require_prime(k)?;
    let n = psi.n();
    let ku = k as usize;
    let g = shift_sums(psi, k);
    let mut table = ProbabilityTable::new(n, k)?;
    for code in 0..ku.pow(n as u32) {
        let z = digits_of_code(code, n, ku);
        let sum: u32 = z.iter().map(|&d| u32::from(d)).sum();
        if sum % k != 0 {
            continue;
        }
        table.set(z.clone(), outcome_probability(&g, &z, k))?;
    }
    Ok(table)
}

/// Total |p(z)| over digit strings outside the zero-residue support; for
/// identical pure copies this is numerical noise (< 1e-12).
pub fn exact_off_support_mass(psi: &PureState, k: u32) -> Result<f64> {
    require_prime(k)?;
    check_kraus_guard(psi.n(), k)?;
    let n = psi.n();
    let ku = k as usize;
    let g = shift_sums(psi, k);
    let mut mass = 0.0;
    for code in 0..ku.pow(n as u32) {
        let z = digits_of_code(code, n, ku);
        let sum: u32 = z.iter().map(|&d| u32::from(d)).sum();
        if sum % k == 0 {
            continue;
        }
        mass += outcome_probability(&g, &z, k).abs();
    }
    Ok(mass)
}

/// Tr(rho_alpha^K) recovered from outcome masses, through both residue
/// identities at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePowerEstimate {
    /// (K P_0 - 1) / (K - 1), from the zero-residue mass.
    pub zero_class_form: f64,
    /// 1 - K P_1, from the mass of the fixed residue class t = 1.
    pub unit_class_form: f64,
}

/// Reads Tr(rho_alpha^K) off a probability table both ways.
pub fn estimate_trace_power(
    table: &ProbabilityTable,
    alpha: &SubsetLabel,
) -> Result<TracePowerEstimate> {
    let k = f64::from(table.k);
    let p0 = table.residue_mass(alpha, 0)?;
    let p1 = table.residue_mass(alpha, 1)?;
    Ok(TracePowerEstimate {
        zero_class_form: (k * p0 - 1.0) / (k - 1.0),
        unit_class_form: 1.0 - k * p1,
    })
}

/// GCE recovered from outcome masses, through both residue identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GceEstimate {
    /// K / (2^|s| (K-1)^2) * sum_alpha (1 - P_0(alpha)).
    pub zero_class_form: f64,
    /// K / (2^|s| (K-1)) * sum_alpha P_1(alpha).
    pub unit_class_form: f64,
}

/// GCE from a probability table; the table's K must match params.k.
pub fn estimate_gce(table: &ProbabilityTable, params: &GceParams) -> Result<GceEstimate> {
    params.s().check_within(table.n)?;
    let k = f64::from(table.k);
    if (params.k() - k).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "table was computed for K={}, cannot estimate order k={}",
            table.k,
            params.k()
        )));
    }
    let labels = params.s().indices();
    let mut sum_zero = 0.0;
    let mut sum_unit = 0.0;
    for sub in 0u64..(1 << labels.len()) {
        let alpha = SubsetLabel::new(
            labels
                .iter()
                .enumerate()
                .filter(|(i, _)| sub >> i & 1 == 1)
                .map(|(_, &q)| q)
                .collect(),
        )?;
        sum_zero += 1.0 - table.residue_mass(&alpha, 0)?;
        sum_unit += table.residue_mass(&alpha, 1)?;
    }
    let scale = 2f64.powi(-(labels.len() as i32)) * k;
    Ok(GceEstimate {
        zero_class_form: scale * sum_zero / ((k - 1.0) * (k - 1.0)),
        unit_class_form: scale * sum_unit / (k - 1.0),
    })
}

/// Empirical table from `shots` multinomial draws (relative frequencies of
/// the stored support). Deterministic in the seed.
pub fn sample_table(table: &ProbabilityTable, shots: u64, seed: u64) -> Result<ProbabilityTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("sampling needs at least one shot".into()));
    }
    if table.is_empty() {
        return Err(Error::InvalidArgument("cannot sample from an empty table".into()));
    }
    let keys: Vec<&Vec<u8>> = table.entries.keys().collect();
    let mut cumulative = Vec::with_capacity(keys.len());
    let mut acc = 0.0;
    for &p in table.entries.values() {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    if total <= 0.0 {
        return Err(Error::InvalidArgument("table carries no positive mass".into()));
    }

    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; keys.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(keys.len() - 1);
        counts[idx] += 1;
    }
    let mut out = ProbabilityTable::new(table.n, table.k)?;
    for (idx, &count) in counts.iter().enumerate() {
        out.set(keys[idx].clone(), count as f64 / shots as f64)?;
    }
    Ok(out)
}

/// GCE-style functional for K distinct pure inputs psi_0 .. psi_{K-1}
/// (prime K), which the permutation test measures when its copies differ:
///
///   C = (1 - 2^{-|s|} sum_alpha avg_c Tr(rho_{0,alpha} rho_{c,alpha}
///        rho_{2c,alpha} .. rho_{(K-1)c,alpha})) / (K - 1)
///
/// averaging over c = 1 .. K-1 (indices mod K). With identical inputs every
/// factor chain collapses to Tr(rho_alpha^K) and this equals the GCE.
pub fn distinct_copy_gce(copies: &[PureState], params: &GceParams) -> Result<f64> {
    let ku = copies.len();
    let k = ku as u32;
    require_prime(k)?;
    let n = copies[0].n();
    if copies.iter().any(|c| c.n() != n) {
        return Err(Error::InvalidArgument("all inputs must have the same qubit count".into()));
    }
    params.s().check_within(n)?;
    if (params.k() - f64::from(k)).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{ku} input states fix the order at K={ku}, got k={}",
            params.k()
        )));
    }
    let labels = params.s().indices();
    let mut total = 0.0;
    for sub in 0u64..(1 << labels.len()) {
        if sub == 0 {
            total += 1.0;
            continue;
        }
        let alpha = SubsetLabel::new(
            labels
                .iter()
                .enumerate()
                .filter(|(i, _)| sub >> i & 1 == 1)
                .map(|(_, &q)| q)
                .collect(),
        )?;
        let reduced: Vec<DensityMatrix> = copies
            .iter()
            .map(|c| partial_trace(c, &alpha))
            .collect::<Result<_>>()?;
        let mut avg = 0.0;
        for c in 1..ku {
            let mut prod = reduced[0].matrix().clone();
            for j in 1..ku {
                prod *= reduced[j * c % ku].matrix();
            }
            let tr: Complex64 = (0..prod.nrows()).map(|i| prod[(i, i)]).sum();
            avg += tr.re;
        }
        total += avg / (ku - 1) as f64;
    }
    Ok((1.0 - total / 2f64.powi(labels.len() as i32)) / (f64::from(k) - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gce::gce;
    use crate::state::{haar_random_state, trace_power};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn bell() -> PureState {
        PureState::normalized(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn primality() {
        for k in [2u32, 3, 5, 7, 11, 13] {
            assert!(is_prime(k), "{k}");
        }
        for k in [0u32, 1, 4, 6, 8, 9, 12] {
            assert!(!is_prime(k), "{k}");
        }
    }

    #[test]
    fn derangement_mapping_and_power_law() {
        let d2 = derangement_power(5, 2).unwrap();
        assert_eq!(d2.source(), &[2, 3, 4, 0, 1]);
        for z in 0..5 {
            for q in 0..5 {
                let lhs = derangement_power(5, z).unwrap().pow(q);
                let rhs = derangement_power(5, z * q % 5).unwrap();
                assert_eq!(lhs, rhs, "z={z}, q={q}");
            }
        }
        assert!(derangement_power(5, 0).unwrap().is_identity());
    }

    #[test]
    fn single_cycle_exactly_for_prime_orders() {
        for k in [2usize, 3, 5, 7] {
            for z in 1..k {
                assert!(is_single_cycle(&derangement_power(k, z).unwrap()), "K={k}, z={z}");
            }
        }
        for k in [4usize, 6, 8, 9] {
            let broken = (1..k).any(|z| !is_single_cycle(&derangement_power(k, z).unwrap()));
            assert!(broken, "K={k} should have a non-cyclic power");
        }
        // the canonical failure: K=4, z=2 splits into two 2-cycles
        assert!(!is_single_cycle(&derangement_power(4, 2).unwrap()));
    }

    #[test]
    fn copy_derangement_moves_basis_content() {
        // two copies of one qubit: joint |0>|1> = index 0b01
        let joint = PureState::basis(2, 0b01).unwrap();
        let moved = apply_copy_derangement(&joint, 1, 2, 0, 1).unwrap();
        assert_close(moved.amp(0b10).re, 1.0, 0.0);
        // applying the shift K times is the identity
        let psi = haar_random_state(6, 3).unwrap(); // 3 copies x 2 labels
        let mut cur = psi.clone();
        for _ in 0..3 {
            cur = apply_copy_derangement(&cur, 2, 3, 1, 1).unwrap();
        }
        for i in 0..psi.dim() {
            assert!((cur.amp(i) - psi.amp(i)).norm() < 1e-15);
        }
    }

    #[test]
    fn derangement_trace_on_equal_copies_vs_split_cycles() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let refs = [&rho, &rho, &rho, &rho];
        // z=1 is a 4-cycle: Tr(rho^4) = 0.2482
        let t1 = derangement_trace(&refs, 1).unwrap();
        assert_close(t1.re, trace_power(&rho, 4.0).unwrap(), 1e-14);
        assert_close(t1.re, 0.2482, 1e-14);
        // z=2 splits into (0 2)(1 3): Tr(rho^2)^2 = 0.3364
        let t2 = derangement_trace(&refs, 2).unwrap();
        assert_close(t2.re, 0.3364, 1e-14);
        assert!((t2.re - t1.re).abs() > 1e-6);
    }

    #[test]
    fn bell_table_at_k3_matches_hand_computation() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        // support = digit sums 0 mod 3 on two labels: 00, 12, 21
        assert_eq!(table.len(), 3);
        assert_close(table.probability(&[0, 0]), 0.5, 1e-12);
        assert_close(table.probability(&[1, 2]), 0.25, 1e-12);
        assert_close(table.probability(&[2, 1]), 0.25, 1e-12);
        assert_close(table.total(), 1.0, 1e-12);
        assert!(exact_off_support_mass(&bell(), 3).unwrap() < 1e-12);
    }

    #[test]
    fn product_state_concentrates_on_zero_string() {
        let psi = PureState::plus_product(2).unwrap();
        let table = exact_probability_table(&psi, 3).unwrap();
        assert_close(table.probability(&[0, 0]), 1.0, 1e-12);
    }

    #[test]
    fn trace_power_estimates_on_bell() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        let est = estimate_trace_power(&table, &SubsetLabel::new(vec![0]).unwrap()).unwrap();
        // single qubit of a Bell pair: maximally mixed, Tr(rho^3) = 1/4
        assert_close(est.zero_class_form, 0.25, 1e-12);
        assert_close(est.unit_class_form, 0.25, 1e-12);
        // empty subset reads off normalization
        let all = estimate_trace_power(&table, &SubsetLabel::empty()).unwrap();
        assert_close(all.zero_class_form, 1.0, 1e-12);
        assert_close(all.unit_class_form, 1.0, 1e-12);
    }

    #[test]
    fn gce_estimates_on_bell() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        let params = GceParams::new(3.0, SubsetLabel::full(2)).unwrap();
        let est = estimate_gce(&table, &params).unwrap();
        assert_close(est.zero_class_form, 0.1875, 1e-12);
        assert_close(est.unit_class_form, 0.1875, 1e-12);
        assert_close(gce(&bell(), &params).unwrap(), 0.1875, 1e-12);
    }

    #[test]
    fn estimates_match_oracle_on_haar_states() {
        for seed in [1u64, 2, 3] {
            let psi = haar_random_state(2, seed).unwrap();
            let table = exact_probability_table(&psi, 3).unwrap();
            let params = GceParams::new(3.0, SubsetLabel::full(2)).unwrap();
            let est = estimate_gce(&table, &params).unwrap();
            let exact = gce(&psi, &params).unwrap();
            assert_close(est.zero_class_form, exact, 1e-10);
            assert_close(est.unit_class_form, exact, 1e-10);
        }
    }

    #[test]
    fn composite_orders_are_rejected() {
        let psi = haar_random_state(2, 1).unwrap();
        match exact_probability_table(&psi, 4) {
            Err(Error::UnsupportedOrder(4)) => {}
            other => panic!("expected UnsupportedOrder, got {other:?}"),
        }
    }

    #[test]
    fn kraus_guard_trips_before_allocating() {
        let psi = haar_random_state(9, 1).unwrap();
        match exact_probability_table(&psi, 3) {
            Err(Error::ResourceLimit(_)) => {}
            other => panic!("expected ResourceLimit, got {other:?}"),
        }
    }

    #[test]
    fn table_mismatched_order_is_rejected() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        let params = GceParams::new(2.0, SubsetLabel::full(2)).unwrap();
        assert!(estimate_gce(&table, &params).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_converges() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        let a = sample_table(&table, 40_000, 9).unwrap();
        let b = sample_table(&table, 40_000, 9).unwrap();
        assert_eq!(a, b);
        assert_close(a.total(), 1.0, 1e-12);
        for (digits, p) in table.iter() {
            assert_close(a.probability(digits), p, 0.02);
        }
        let c = sample_table(&table, 40_000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let table = exact_probability_table(&bell(), 3).unwrap();
        let text = table.to_csv_string();
        assert!(text.starts_with("digits,probability\n"));
        let back = ProbabilityTable::from_csv_str(&text, 3).unwrap();
        assert_eq!(table, back);
        assert!(ProbabilityTable::from_csv_str("nope\n00,0.5\n", 3).is_err());
        assert!(ProbabilityTable::from_csv_str("digits,probability\n0x,0.5\n", 3).is_err());
    }

    #[test]
    fn distinct_copies_collapse_to_gce_when_equal() {
        let psi = haar_random_state(2, 17).unwrap();
        let params = GceParams::new(3.0, SubsetLabel::full(2)).unwrap();
        let copies = vec![psi.clone(), psi.clone(), psi.clone()];
        let a = distinct_copy_gce(&copies, &params).unwrap();
        let b = gce(&psi, &params).unwrap();
        assert_close(a, b, 1e-12);
    }

    #[test]
    fn distinct_copies_at_k2_match_pairwise_overlap_form() {
        let a = haar_random_state(2, 5).unwrap();
        let b = haar_random_state(2, 6).unwrap();
        let params = GceParams::new(2.0, SubsetLabel::full(2)).unwrap();
        let got = distinct_copy_gce(&[a.clone(), b.clone()], &params).unwrap();
        // independent route: 1 - 2^{-|s|} sum_alpha Tr(rho_alpha rho'_alpha),
        // each factor via direct index contraction
        let mut total = 0.0;
        for mask in 0u64..4 {
            let alpha = SubsetLabel::from_mask(mask);
            let ra = partial_trace(&a, &alpha).unwrap();
            let rb = partial_trace(&b, &alpha).unwrap();
            total += derangement_trace(&[&ra, &rb], 1).unwrap().re;
        }
        assert_close(got, 1.0 - total / 4.0, 1e-12);
    }

    #[test]
    fn distinct_copy_layout_rejections() {
        let psi = haar_random_state(2, 1).unwrap();
        let params = GceParams::new(2.0, SubsetLabel::full(2)).unwrap();
        // two copies with mismatched sizes
        let other = haar_random_state(3, 1).unwrap();
        assert!(distinct_copy_gce(&[psi.clone(), other], &params).is_err());
        // four equal copies: composite K
        let four = vec![psi.clone(), psi.clone(), psi.clone(), psi.clone()];
        let p4 = GceParams::new(4.0, SubsetLabel::full(2)).unwrap();
        assert!(matches!(distinct_copy_gce(&four, &p4), Err(Error::UnsupportedOrder(4))));
    }

    #[test]
    fn digit_strings_render_and_parse() {
        let d = DigitString::new(12, vec![0, 11, 5]).unwrap();
        assert_eq!(d.to_string(), "0b5");
        assert_eq!(DigitString::parse(12, "0b5").unwrap(), d);
        assert!(DigitString::parse(3, "05").is_err());
        assert!(DigitString::new(3, vec![3]).is_err());
    }
}
