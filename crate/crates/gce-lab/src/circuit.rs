//! Compiles the permutation test to qubit gates and simulates the result.
//!
//! Each qubit label j gets one ancilla group of l = ceil(log2 K) qubits and
//! four gates:
//!
//!   FB   - block Fourier transform: K x K Fourier on ancilla values below
//!          K, identity on the padding values K .. 2^l - 1
//!   CCP  - controlled cyclic copy shift: ancilla value c < K sends the
//!          label-j bit of copy i to copy (i - c), i.e. copy i receives the
//!          bit of copy (i + c); values c >= K act as identity
//!   FBD  - inverse block Fourier
//!   MEAS - computational-basis readout of the group, one base-K digit
//!
//! Register layout: all ancilla groups first (group g on qubits
//! g*l .. (g+1)*l - 1), then the K data copies, copy 0 most significant;
//! data qubit (copy i, label j) sits at n*l + i*n + j.
//!
//! Ancillas start at |0..0>, which the Fourier block maps onto the uniform
//! superposition of the K shift values, so padding values only ever
//! acquire amplitude through numerical error: the mass the readout sees on
//! values >= K must vanish, and the digit distribution must match the
//! direct path-integral tables from [`crate::permtest`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

use crate::permtest::{require_prime, ProbabilityTable};
use crate::state::PureState;
use crate::{Error, Result};

/// Largest total register (ancillas plus data) simulated by default.
pub const GATE_QUBIT_GUARD: usize = 22;

/// Ancilla qubits per group: ceil(log2 k).
pub fn block_size(k: u32) -> usize {
    debug_assert!(k >= 2);
    (32 - (k - 1).leading_zeros()) as usize
}

/// Block Fourier transform on 2^l ancilla levels: entries
/// omega^(j c) / sqrt(K) with omega = e^{2 pi i / K} for j, c < K;
/// identity on the padding levels.
pub fn fb_matrix(k: u32) -> Result<DMatrix<Complex64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need K >= 2, got {k}")));
    }
    let dim = 1usize << block_size(k);
    let ku = k as usize;
    let scale = (ku as f64).sqrt().recip();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for j in 0..dim {
        for c in 0..dim {
            m[(j, c)] = if j < ku && c < ku {
                Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * (j * c % ku) as f64 / ku as f64)
            } else if j == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
    Ok(m)
}

/// Dense controlled-cyclic-shift unitary on one ancilla group plus the K
/// copies of a single label: a 2^(l+K)-dimensional permutation matrix with
/// index = ancilla value * 2^K + data bits (copy 0 most significant).
/// For K = 2 this is the Fredkin gate.
pub fn ccp_matrix(k: u32) -> Result<DMatrix<Complex64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need K >= 2, got {k}")));
    }
    let ku = k as usize;
    let l = block_size(k);
    if l + ku > 20 {
        return Err(Error::ResourceLimit(format!(
            "dense CCP on {} qubits",
            l + ku
        )));
    }
    let dim = 1usize << (l + ku);
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for x in 0..dim {
        let c = x >> ku;
        let t = x & ((1 << ku) - 1);
        let tp = if c == 0 || c >= ku {
            t
        } else {
            let mut tp = 0usize;
            for j in 0..ku {
                let bit = t >> (ku - 1 - (j + c) % ku) & 1;
                tp |= bit << (ku - 1 - j);
            }
            tp
        };
        m[((c << ku) | tp, x)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// One gate of the compiled test, referencing its ancilla group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Block Fourier on group `group`.
    Fb { group: usize },
    /// Inverse block Fourier on group `group`.
    FbDagger { group: usize },
    /// Cyclic copy shift of the bits of `label`, controlled on `group`.
    Ccp { group: usize, label: usize },
    /// Base-K readout of group `group`.
    Measure { group: usize },
}

/// Compiled permutation test: n ancilla groups of l qubits each over K
/// copies of an n-qubit register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateList {
    n: usize,
    k: u32,
    l: usize,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Total qubits when simulated: n*l ancillas plus K*n data.
    pub fn total_qubits(&self) -> usize {
        self.n * self.l + self.k as usize * self.n
    }

    fn anc_list(&self, group: usize) -> String {
        let parts: Vec<String> = (group * self.l..(group + 1) * self.l)
            .map(|q| q.to_string())
            .collect();
        parts.join(",")
    }

    /// Plain-text form: a header line
    /// `GCE-CIRCUIT v1 n=<n> K=<K> l=<l>` followed by one line per gate
    /// (`FB anc=..`, `CCP anc=.. label=.. copies=..`, `FBD anc=..`,
    /// `MEAS anc=..`).
    pub fn to_text(&self) -> String {
        let mut out = format!("GCE-CIRCUIT v1 n={} K={} l={}\n", self.n, self.k, self.l);
        for gate in &self.gates {
            match *gate {
                Gate::Fb { group } => writeln!(out, "FB anc={}", self.anc_list(group)),
                Gate::FbDagger { group } => writeln!(out, "FBD anc={}", self.anc_list(group)),
                Gate::Ccp { group, label } => writeln!(
                    out,
                    "CCP anc={} label={} copies={}",
                    self.anc_list(group),
                    label,
                    self.k
                ),
                Gate::Measure { group } => writeln!(out, "MEAS anc={}", self.anc_list(group)),
            }
            .expect("writing to String cannot fail");
        }
        out
    }

    pub fn parse(text: &str) -> Result<GateList> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty circuit file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "GCE-CIRCUIT" || fields[1] != "v1" {
            return Err(Error::Parse(
                "line 1: expected header `GCE-CIRCUIT v1 n=<n> K=<K> l=<l>`".into(),
            ));
        }
        let n: usize = parse_kv(fields[2], "n", 1)?;
        let k: u32 = parse_kv(fields[3], "K", 1)?;
        let l: usize = parse_kv(fields[4], "l", 1)?;
        if n == 0 || k < 2 || l != block_size(k) {
            return Err(Error::Parse(format!(
                "line 1: inconsistent header (n={n}, K={k}, l={l}; l must be {})",
                block_size(k.max(2))
            )));
        }

        let group_of = |anc: &str, ln: usize| -> Result<usize> {
            let qs = anc
                .split(',')
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("line {ln}: bad ancilla index {s:?}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            if qs.len() != l || qs[0] % l != 0 || !qs.windows(2).all(|w| w[1] == w[0] + 1) {
                return Err(Error::Parse(format!(
                    "line {ln}: ancilla list {anc:?} is not one aligned group of {l} qubits"
                )));
            }
            let g = qs[0] / l;
            if g >= n {
                return Err(Error::Parse(format!("line {ln}: ancilla group {g} out of range")));
            }
            Ok(g)
        };

        let mut gates = Vec::new();
        for (idx, line) in lines {
            let ln = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let gate = match fields[0] {
                "FB" | "FBD" | "MEAS" if fields.len() == 2 => {
                    let group = group_of(fields[1].strip_prefix("anc=").ok_or_else(|| {
                        Error::Parse(format!("line {ln}: expected anc=<list>"))
                    })?, ln)?;
                    match fields[0] {
                        "FB" => Gate::Fb { group },
                        "FBD" => Gate::FbDagger { group },
                        _ => Gate::Measure { group },
                    }
                }
                "CCP" if fields.len() == 4 => {
                    let group = group_of(fields[1].strip_prefix("anc=").ok_or_else(|| {
                        Error::Parse(format!("line {ln}: expected anc=<list>"))
                    })?, ln)?;
                    let label: usize = parse_kv(fields[2], "label", ln)?;
                    let copies: u32 = parse_kv(fields[3], "copies", ln)?;
                    if copies != k {
                        return Err(Error::Parse(format!(
                            "line {ln}: copies={copies} disagrees with header K={k}"
                        )));
                    }
                    if label >= n {
                        return Err(Error::Parse(format!("line {ln}: label {label} out of range")));
                    }
                    Gate::Ccp { group, label }
                }
                op => {
                    return Err(Error::Parse(format!(
                        "line {ln}: unknown or malformed gate line starting with {op:?}"
                    )))
                }
            };
            gates.push(gate);
        }
        Ok(GateList { n, k, l, gates })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GateList> {
        GateList::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_kv<T: std::str::FromStr>(field: &str, key: &str, ln: usize) -> Result<T> {
    field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse(format!("line {ln}: expected {key}=<value>, got {field:?}")))
}

/// Compiles the full permutation test for K copies of an n-qubit state:
/// per label, FB then CCP then FBD then MEAS on that label's group.
/// Gates on distinct groups commute, so this grouped order equals the
/// all-FB / all-CCP / all-FBD / all-MEAS layering.
pub fn compile_circuit(n: usize, k: u32) -> Result<GateList> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit label".into()));
    }
    require_prime(k)?;
    let mut gates = Vec::with_capacity(4 * n);
    for g in 0..n {
        gates.push(Gate::Fb { group: g });
        gates.push(Gate::Ccp { group: g, label: g });
        gates.push(Gate::FbDagger { group: g });
        gates.push(Gate::Measure { group: g });
    }
    Ok(GateList { n, k, l: block_size(k), gates })
}

/// The cyclic shift written as adjacent transpositions: applying
/// (0 1), (1 2), .., (K-2 K-1) in order moves the content of slot i+1 to
/// slot i, which is exactly `derangement_power(k, 1)`.
pub fn decompose_derangement_to_swaps(k: usize) -> Vec<(usize, usize)> {
    (0..k.saturating_sub(1)).map(|i| (i, i + 1)).collect()
}

struct Register {
    amps: Vec<Complex64>,
    total_bits: usize,
    n: usize,
    k: usize,
    l: usize,
}

impl Register {
    fn group_shift(&self, group: usize) -> usize {
        self.total_bits - (group + 1) * self.l
    }

    fn data_shift(&self, copy: usize, label: usize) -> usize {
        self.total_bits - 1 - (self.n * self.l + copy * self.n + label)
    }

    /// Applies a 2^l x 2^l matrix to one ancilla group.
    fn apply_block(&mut self, group: usize, m: &DMatrix<Complex64>) {
        let sh = self.group_shift(group);
        let mask = (1usize << self.l) - 1;
        let dim = 1usize << self.l;
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base >> sh & mask != 0 {
                continue;
            }
            for (c, s) in scratch.iter_mut().enumerate() {
                *s = self.amps[base | c << sh];
            }
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, s) in scratch.iter().enumerate() {
                    acc += m[(j, c)] * s;
                }
                self.amps[base | j << sh] = acc;
            }
        }
    }

    /// Cyclic shift of one label's bits across copies, controlled on the
    /// group value c: copy i receives the bit of copy (i + c) mod K.
    fn apply_ccp(&mut self, group: usize, label: usize) {
        let sh = self.group_shift(group);
        let mask = (1usize << self.l) - 1;
        let mut clear = usize::MAX;
        for i in 0..self.k {
            clear &= !(1usize << self.data_shift(i, label));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (x, amp) in self.amps.iter().enumerate() {
            let c = x >> sh & mask;
            if c == 0 || c >= self.k {
                out[x] = *amp;
                continue;
            }
            let mut y = x & clear;
            for i in 0..self.k {
                let bit = x >> self.data_shift((i + c) % self.k, label) & 1;
                y |= bit << self.data_shift(i, label);
            }
            out[y] = *amp;
        }
        self.amps = out;
    }
}

/// Runs a compiled circuit on |psi>^(x)K and reads out the joint base-K
/// digit distribution. Every ancilla-valid digit string (all group values
/// below K) is stored, so 1 - total() is exactly the mass stranded on
/// padding values >= K, which must be numerical noise.
pub fn simulate_gatelist(list: &GateList, psi: &PureState) -> Result<ProbabilityTable> {
    let total_bits = list.total_qubits();
    if total_bits > GATE_QUBIT_GUARD {
        return Err(Error::ResourceLimit(format!(
            "gate simulation over {total_bits} qubits exceeds the default cap of {GATE_QUBIT_GUARD}; use the unguarded variant to force it"
        )));
    }
    simulate_gatelist_unguarded(list, psi)
}

/// [`simulate_gatelist`] with the register-size guard lifted.
pub fn simulate_gatelist_unguarded(list: &GateList, psi: &PureState) -> Result<ProbabilityTable> {
    let n = list.n;
    let ku = list.k as usize;
    if psi.n() != n {
        return Err(Error::InvalidArgument(format!(
            "circuit expects {n}-qubit input states, got {}",
            psi.n()
        )));
    }
    let total_bits = list.total_qubits();
    let data = psi.tensor_power(ku)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total_bits];
    amps[..data.dim()].copy_from_slice(data.amplitudes());
    let mut reg = Register { amps, total_bits, n, k: ku, l: list.l };

    let fb = fb_matrix(list.k)?;
    let fbd = fb.adjoint();
    let mut measured = vec![false; n];
    for gate in &list.gates {
        let group = match *gate {
            Gate::Fb { group } | Gate::FbDagger { group } | Gate::Measure { group } => group,
            Gate::Ccp { group, .. } => group,
        };
        if group >= n {
            return Err(Error::InvalidArgument(format!("ancilla group {group} out of range")));
        }
        if measured[group] {
            return Err(Error::InvalidArgument(format!(
                "gate touches ancilla group {group} after its measurement"
            )));
        }
        match *gate {
            Gate::Fb { group } => reg.apply_block(group, &fb),
            Gate::FbDagger { group } => reg.apply_block(group, &fbd),
            Gate::Ccp { group, label } => {
                if label >= n {
                    return Err(Error::InvalidArgument(format!("label {label} out of range")));
                }
                reg.apply_ccp(group, label);
            }
            Gate::Measure { group } => measured[group] = true,
        }
    }
    if let Some(g) = measured.iter().position(|&m| !m) {
        return Err(Error::InvalidArgument(format!("ancilla group {g} is never measured")));
    }

    let mut table = ProbabilityTable::new(n, list.k)?;
    let anc_mask = (1usize << list.l) - 1;
    'outer: for (idx, amp) in reg.amps.iter().enumerate() {
        let mut digits = vec![0u8; n];
        for g in 0..n {
            let c = idx >> reg.group_shift(g) & anc_mask;
            if c >= ku {
                continue 'outer; // padding value: excluded, shows up as 1 - total()
            }
            digits[g] = c as u8;
        }
        table.add_mass(digits, amp.norm_sqr())?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permtest::{
        derangement_power, exact_probability_table, CopyPermutation,
    };
    use crate::state::haar_random_state;

    #[test]
    fn block_sizes() {
        assert_eq!(block_size(2), 1);
        assert_eq!(block_size(3), 2);
        assert_eq!(block_size(4), 2);
        assert_eq!(block_size(5), 3);
        assert_eq!(block_size(7), 3);
    }

    #[test]
    fn fb_matrix_is_unitary_and_hadamard_at_k2() {
        let h = fb_matrix(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((h[(0, 0)].re - r).abs() < 1e-15);
        assert!((h[(1, 1)].re + r).abs() < 1e-15);
        assert!((h[(0, 1)].re - r).abs() < 1e-15);
        for k in [3u32, 5] {
            let f = fb_matrix(k).unwrap();
            let prod = &f * f.adjoint();
            let dim = f.nrows();
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-14);
                }
            }
            // padding rows stay identity
            for j in k as usize..dim {
                assert!((f[(j, j)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ccp_at_k2_is_fredkin() {
        let m = ccp_matrix(2).unwrap();
        assert_eq!(m.nrows(), 8);
        // control = ancilla bit (MSB); |1,01> <-> |1,10>, everything else fixed
        for x in 0..8usize {
            let y = match x {
                5 => 6,
                6 => 5,
                _ => x,
            };
            assert!((m[(y, x)] - Complex64::new(1.0, 0.0)).norm() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn ccp_matrix_is_a_permutation_matching_the_bit_path() {
        // n=1, K=3: the simulated register is exactly one ancilla group plus
        // the three copy bits, so the dense matrix applies directly
        let m = ccp_matrix(3).unwrap();
        let dim = 32;
        let psi = haar_random_state(5, 8).unwrap();
        let mut reg = Register {
            amps: psi.amplitudes().to_vec(),
            total_bits: 5,
            n: 1,
            k: 3,
            l: 2,
        };
        reg.apply_ccp(0, 0);
        for y in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..dim {
                acc += m[(y, x)] * psi.amp(x);
            }
            assert!((acc - reg.amps[y]).norm() < 1e-14, "y={y}");
        }
    }

    #[test]
    fn swap_decomposition_rebuilds_the_shift() {
        for k in [2usize, 3, 5, 7] {
            let swaps = decompose_derangement_to_swaps(k);
            assert_eq!(swaps.len(), k - 1);
            let mut acc = CopyPermutation::identity(k);
            for (a, b) in swaps {
                let t = CopyPermutation::transposition(k, a, b).unwrap();
                acc = acc.compose(&t).unwrap();
            }
            assert_eq!(acc, derangement_power(k, 1).unwrap());
        }
    }

    #[test]
    fn compile_emits_four_gates_per_label_in_group_order() {
        let list = compile_circuit(2, 3).unwrap();
        assert_eq!(list.gates().len(), 8);
        assert_eq!(list.l(), 2);
        assert_eq!(list.total_qubits(), 10);
        assert_eq!(
            list.gates()[..4],
            [
                Gate::Fb { group: 0 },
                Gate::Ccp { group: 0, label: 0 },
                Gate::FbDagger { group: 0 },
                Gate::Measure { group: 0 },
            ]
        );
        assert!(matches!(compile_circuit(2, 4), Err(Error::UnsupportedOrder(4))));
        assert!(compile_circuit(0, 3).is_err());
    }

    #[test]
    fn text_format_round_trips_and_rejects_garbage() {
        let list = compile_circuit(2, 3).unwrap();
        let text = list.to_text();
        let expected = "GCE-CIRCUIT v1 n=2 K=3 l=2\n\
                        FB anc=0,1\n\
                        CCP anc=0,1 label=0 copies=3\n\
                        FBD anc=0,1\n\
                        MEAS anc=0,1\n\
                        FB anc=2,3\n\
                        CCP anc=2,3 label=1 copies=3\n\
                        FBD anc=2,3\n\
                        MEAS anc=2,3\n";
        assert_eq!(text, expected);
        assert_eq!(GateList::parse(&text).unwrap(), list);

        for bad in [
            "nonsense\n",
            "GCE-CIRCUIT v2 n=1 K=3 l=2\n",
            "GCE-CIRCUIT v1 n=1 K=3 l=1\n", // l inconsistent with K
            "GCE-CIRCUIT v1 n=1 K=3 l=2\nFB anc=0\n", // half a group
            "GCE-CIRCUIT v1 n=1 K=3 l=2\nFB anc=1,2\n", // unaligned group
            "GCE-CIRCUIT v1 n=1 K=3 l=2\nCCP anc=0,1 label=0 copies=5\n",
            "GCE-CIRCUIT v1 n=1 K=3 l=2\nCCP anc=0,1 label=3 copies=3\n",
            "GCE-CIRCUIT v1 n=1 K=3 l=2\nHADAMARD anc=0,1\n",
        ] {
            assert!(GateList::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn gate_simulation_matches_direct_tables() {
        // the central dual-route check: compiled circuit vs path integral
        for (n, k, seed) in [(1usize, 2u32, 4u64), (1, 3, 5), (1, 5, 6), (2, 3, 7)] {
            let psi = haar_random_state(n, seed).unwrap();
            let list = compile_circuit(n, k).unwrap();
            let gate_table = simulate_gatelist(&list, &psi).unwrap();
            let direct = exact_probability_table(&psi, k).unwrap();
            // total variation distance over the union of digit strings
            let mut tvd = 0.0;
            for (digits, p) in gate_table.iter() {
                tvd += (p - direct.probability(digits)).abs();
            }
            for (digits, p) in direct.iter() {
                if gate_table.probability(digits) == 0.0 {
                    tvd += p.abs();
                }
            }
            tvd /= 2.0;
            assert!(tvd < 1e-10, "n={n}, K={k}: tvd={tvd}");
            // no amplitude may strand on ancilla padding values >= K
            assert!((1.0 - gate_table.total()).abs() < 1e-12, "n={n}, K={k}");
            assert!(gate_table.off_support_mass() < 1e-12, "n={n}, K={k}");
        }
    }

    #[test]
    fn simulation_guard_and_input_validation() {
        let list = compile_circuit(3, 5).unwrap(); // 3*3 + 15 = 24 qubits
        let psi = haar_random_state(3, 1).unwrap();
        assert!(matches!(simulate_gatelist(&list, &psi), Err(Error::ResourceLimit(_))));
        let list = compile_circuit(2, 3).unwrap();
        let wrong = haar_random_state(3, 1).unwrap();
        assert!(simulate_gatelist(&list, &wrong).is_err());
    }

    #[test]
    fn unmeasured_groups_are_rejected() {
        let text = "GCE-CIRCUIT v1 n=1 K=3 l=2\nFB anc=0,1\n";
        let list = GateList::parse(text).unwrap();
        let psi = haar_random_state(1, 2).unwrap();
        assert!(simulate_gatelist(&list, &psi).is_err());
    }
}
