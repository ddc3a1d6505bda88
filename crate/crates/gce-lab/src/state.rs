//! Dense pure states, reduced density matrices, and local unitaries.
//!
//! Conventions, used consistently across the crate:
//!
//! - qubit labels are 0-based and qubit 0 is the *most significant* bit of a
//!   basis-state index, so |q0 q1 .. q(n-1)> sits at index sum_j q_j << (n-1-j)
//! - global phase is never stripped; state comparisons go through overlaps
//! - randomness always comes from an explicit seed or caller-owned generator
//! - subsets of qubit labels are kept strictly increasing ([`SubsetLabel`])

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::rng::seeded_rng;
use crate::{Error, Result};

/// Absolute tolerance for normalization and hermiticity checks.
pub(crate) const NORM_ATOL: f64 = 1e-12;
/// Eigenvalues of reduced states may round slightly negative; anything above
/// this floor (in magnitude) is treated as an error, not noise.
pub(crate) const PSD_FLOOR: f64 = -1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Strictly increasing list of qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetLabel(Vec<usize>);

impl SubsetLabel {
    /// Builds a subset from labels in any order; duplicates are rejected.
    pub fn new(mut labels: Vec<usize>) -> Result<Self> {
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate qubit label in subset {labels:?}"
            )));
        }
        Ok(SubsetLabel(labels))
    }

    pub fn empty() -> Self {
        SubsetLabel(Vec::new())
    }

    /// The full register {0, .., n-1}.
    pub fn full(n: usize) -> Self {
        SubsetLabel((0..n).collect())
    }

    /// Labels from the set bits of `mask` (bit i set means label i).
    pub fn from_mask(mask: u64) -> Self {
        SubsetLabel((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.binary_search(&label).is_ok()
    }

    pub fn is_subset_of(&self, other: &SubsetLabel) -> bool {
        self.0.iter().all(|&q| other.contains(q))
    }

    pub fn is_disjoint_from(&self, other: &SubsetLabel) -> bool {
        self.0.iter().all(|&q| !other.contains(q))
    }

    pub fn union(&self, other: &SubsetLabel) -> Result<SubsetLabel> {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        SubsetLabel::new(v)
    }

    /// Complement within {0, .., n-1}; every label must be below n.
    pub fn complement(&self, n: usize) -> Result<SubsetLabel> {
        self.check_within(n)?;
        Ok(SubsetLabel((0..n).filter(|q| !self.contains(*q)).collect()))
    }

    /// Bitmask form (bit i set means label i); labels must fit in 64 bits.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &q| m | 1 << q)
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&q) if q >= n => Err(Error::InvalidArgument(format!(
                "qubit label {q} out of range for an {n}-qubit state"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SubsetLabel {
    /// Dot-separated labels ("0.2.3"); empty subset prints as "-".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Normalized statevector over n qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl PureState {
    /// Wraps an amplitude vector, requiring unit norm within 1e-12.
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("state needs at least one qubit".into()));
        }
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector has length {}, expected 2^{n}",
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > NORM_ATOL {
            return Err(Error::InvalidArgument(format!(
                "statevector norm {} is not 1 within {NORM_ATOL}",
                norm2.sqrt()
            )));
        }
        Ok(PureState { n, amps })
    }

    /// Rescales an arbitrary nonzero amplitude vector to unit norm.
    pub fn normalized(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < NORM_ATOL {
            return Err(Error::InvalidArgument("cannot normalize a (near-)zero vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        PureState::new(n, amps)
    }

    /// Internal constructor for vectors already unit-norm by construction.
    pub(crate) fn from_trusted(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        PureState { n, amps }
    }

    /// Computational basis state |index> (qubit 0 = most significant bit).
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || index >= 1 << n {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        Ok(PureState { n, amps })
    }

    /// (|0..0> + |1..1>)/sqrt(2).
    pub fn ghz(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ghz needs at least one qubit".into()));
        }
        let dim = 1usize << n;
        let mut amps = vec![c(0.0, 0.0); dim];
        let a = 1.0 / 2f64.sqrt();
        amps[0] = c(a, 0.0);
        amps[dim - 1] = c(a, 0.0);
        Ok(PureState { n, amps })
    }

    /// Equal superposition of the n single-excitation basis states.
    pub fn w(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("w needs at least one qubit".into()));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        let a = 1.0 / (n as f64).sqrt();
        for q in 0..n {
            amps[1 << (n - 1 - q)] = c(a, 0.0);
        }
        Ok(PureState { n, amps })
    }

    /// |+>^n; a product state, so every GCE of it vanishes.
    pub fn plus_product(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("product needs at least one qubit".into()));
        }
        let dim = 1usize << n;
        let a = 1.0 / (dim as f64).sqrt();
        Ok(PureState { n, amps: vec![c(a, 0.0); dim] })
    }

    /// Product of explicit single-qubit states, each required to be unit norm.
    pub fn product_of(qubits: &[[Complex64; 2]]) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidArgument("product needs at least one qubit".into()));
        }
        for (i, q) in qubits.iter().enumerate() {
            let norm2 = q[0].norm_sqr() + q[1].norm_sqr();
            if (norm2.sqrt() - 1.0).abs() > NORM_ATOL {
                return Err(Error::InvalidArgument(format!(
                    "qubit {i} of product input is not normalized"
                )));
            }
        }
        let n = qubits.len();
        let mut amps = vec![c(1.0, 0.0)];
        for q in qubits {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * q[0]);
                next.push(a * q[1]);
            }
            amps = next;
        }
        Ok(PureState { n, amps })
    }

    /// One-axis-twisted state: (e^{-i mu Jz^2 / 2} applied to |+>^n up to
    /// global phase), amplitude 2^{-n/2} e^{i (mu/2) k (n-k)} on every basis
    /// state of Hamming weight k. Explicit vector, so n is guarded.
    pub fn spin_squeezed(n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("spin-squeezed needs at least one qubit".into()));
        }
        if n > 22 {
            return Err(Error::ResourceLimit(format!(
                "explicit spin-squeezed statevector for n={n} (2^{n} amplitudes); use the symmetric-sector path instead"
            )));
        }
        let dim = 1usize << n;
        let a = (dim as f64).sqrt().recip();
        let amps = (0..dim)
            .map(|x| {
                let k = x.count_ones() as f64;
                let phase = 0.5 * mu * k * (n as f64 - k);
                c(a * phase.cos(), a * phase.sin())
            })
            .collect();
        Ok(PureState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// <self|other>.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "overlap of states on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// self (x) other, with self on the more significant qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState { n: self.n + other.n, amps }
    }

    /// k-fold tensor power; copy 0 ends up on the most significant qubits.
    pub fn tensor_power(&self, k: usize) -> Result<PureState> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor power needs k >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self);
        }
        Ok(out)
    }

    pub fn to_json_string(&self) -> String {
        let j = StateJson {
            n: self.n,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        };
        serde_json::to_string_pretty(&j).expect("statevector serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: StateJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("statevector JSON: {e}")))?;
        let amps = j.amplitudes.iter().map(|[re, im]| c(*re, *im)).collect();
        PureState::new(j.n, amps)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace (1e-12) and positivity (-1e-10).
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument("density matrix must be square and nonempty".into()));
        }
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > NORM_ATOL {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
        if (tr.re - 1.0).abs() > NORM_ATOL || tr.im.abs() > NORM_ATOL {
            return Err(Error::InvalidArgument(format!("trace {} is not 1", tr)));
        }
        let dm = DensityMatrix { m };
        let min = dm
            .eigenvalues_raw()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < PSD_FLOOR {
            return Err(Error::InvalidArgument(format!(
                "matrix has negative eigenvalue {min}"
            )));
        }
        Ok(dm)
    }

    /// For matrices Hermitian/unit-trace/PSD by construction; skips checks.
    pub(crate) fn from_trusted(m: DMatrix<Complex64>) -> Self {
        DensityMatrix { m }
    }

    /// |psi><psi|.
    pub fn pure(psi: &PureState) -> Self {
        let d = psi.dim();
        let m = DMatrix::from_fn(d, d, |i, j| psi.amp(i) * psi.amp(j).conj());
        DensityMatrix { m }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let w = 1.0 / dim as f64;
        Ok(DensityMatrix {
            m: DMatrix::from_fn(dim, dim, |i, j| if i == j { c(w, 0.0) } else { c(0.0, 0.0) }),
        })
    }

    /// Diagonal density matrix from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > NORM_ATOL {
            return Err(Error::InvalidArgument(
                "diagonal needs a probability vector summing to 1".into(),
            ));
        }
        let d = probs.len();
        Ok(DensityMatrix {
            m: DMatrix::from_fn(d, d, |i, j| if i == j { c(probs[i], 0.0) } else { c(0.0, 0.0) }),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// Eigenvalues as computed, unclamped; order unspecified.
    pub fn eigenvalues_raw(&self) -> Vec<f64> {
        if self.dim() == 1 {
            return vec![self.m[(0, 0)].re];
        }
        self.m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }
}

/// Sum of eigenvalue powers with the shared clamping policy: values in
/// [-1e-10, 0) count as 0, anything below -1e-10 is an error.
pub(crate) fn sum_eigenvalue_powers(eigs: &[f64], k: f64) -> Result<f64> {
    let mut total = 0.0;
    for &lam in eigs {
        if lam < PSD_FLOOR {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue {lam} below the positivity floor {PSD_FLOOR}"
            )));
        }
        if lam > 0.0 {
            total += lam.powf(k);
        }
    }
    Ok(total)
}

/// Tr(rho^k) for real k > 1, via eigendecomposition.
pub fn trace_power(rho: &DensityMatrix, k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::InvalidArgument(format!("trace power needs k > 1, got {k}")));
    }
    sum_eigenvalue_powers(&rho.eigenvalues_raw(), k)
}

/// Reduced density matrix of `psi` on the qubits in `keep` (label order
/// preserved: the smallest kept label becomes the most significant bit of
/// the reduced index). keep = {} gives the 1x1 matrix [1].
pub fn partial_trace(psi: &PureState, keep: &SubsetLabel) -> Result<DensityMatrix> {
    let n = psi.n();
    keep.check_within(n)?;
    let k = keep.len();
    let env: Vec<usize> = (0..n).filter(|q| !keep.contains(*q)).collect();

    // scatter[a]: bits of the compact index a placed at their full positions
    let scatter = |labels: &[usize], compact: usize| -> usize {
        let mut full = 0usize;
        for (j, &q) in labels.iter().enumerate() {
            if compact >> (labels.len() - 1 - j) & 1 == 1 {
                full |= 1 << (n - 1 - q);
            }
        }
        full
    };
    let keep_idx: Vec<usize> = (0..1usize << k).map(|a| scatter(keep.indices(), a)).collect();
    let env_idx: Vec<usize> = (0..1usize << env.len()).map(|e| scatter(&env, e)).collect();

    let amps = psi.amplitudes();
    let dim = 1usize << k;
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = c(0.0, 0.0);
            for &e in &env_idx {
                acc += amps[keep_idx[a] | e] * amps[keep_idx[b] | e].conj();
            }
            m[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// sqrt(1 - |<a|b>|^2), the trace distance between two pure states.
pub fn trace_distance_pure(a: &PureState, b: &PureState) -> Result<f64> {
    let ov = a.overlap(b)?;
    Ok((1.0 - ov.norm_sqr()).max(0.0).sqrt())
}

/// Draws a Haar-random pure state on n qubits from the given seed.
pub fn haar_random_state(n: usize, seed: u64) -> Result<PureState> {
    haar_random_state_with(n, &mut seeded_rng(seed))
}

/// Haar-random state from a caller-owned generator: a vector of i.i.d.
/// complex standard normals, normalized.
pub fn haar_random_state_with<R: Rng>(n: usize, rng: &mut R) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("state needs at least one qubit".into()));
    }
    let dim = 1usize << n;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::normalized(n, amps)
}

/// Moves `psi` an exact trace distance `epsilon` along a random geodesic:
/// returns sqrt(1-eps^2) psi + eps phi with phi a Haar-random direction
/// orthogonal to psi.
pub fn perturb_state(psi: &PureState, epsilon: f64, seed: u64) -> Result<PureState> {
    perturb_state_with(psi, epsilon, &mut seeded_rng(seed))
}

pub fn perturb_state_with<R: Rng>(psi: &PureState, epsilon: f64, rng: &mut R) -> Result<PureState> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "perturbation strength must lie in [0, 1], got {epsilon}"
        )));
    }
    // dim >= 2, so an orthogonal direction always exists; redraw on the
    // measure-zero event that the sample is (numerically) parallel
    for _ in 0..64 {
        let raw = haar_random_state_with(psi.n(), rng)?;
        let ov = psi.overlap(&raw)?;
        let mut dir: Vec<Complex64> = raw
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(r, p)| r - ov * p)
            .collect();
        let norm: f64 = dir.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for a in &mut dir {
            *a /= norm;
        }
        let keep = (1.0 - epsilon * epsilon).sqrt();
        let amps = psi
            .amplitudes()
            .iter()
            .zip(&dir)
            .map(|(p, d)| keep * p + epsilon * d)
            .collect();
        return Ok(PureState::from_trusted(psi.n(), amps));
    }
    Err(Error::InvalidArgument(
        "could not sample a direction orthogonal to psi".into(),
    ))
}

/// Single-qubit unitary parameterized by three angles:
/// [[cos(t/2), -e^{i l} sin(t/2)], [e^{i p} sin(t/2), e^{i(p+l)} cos(t/2)]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitUnitary {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl SingleQubitUnitary {
    pub fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        SingleQubitUnitary { theta, phi, lambda }
    }

    pub fn identity() -> Self {
        SingleQubitUnitary { theta: 0.0, phi: 0.0, lambda: 0.0 }
    }

    /// Row-major 2x2 matrix; unitary for every angle triple.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (ct, st) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let el = Complex64::from_polar(1.0, self.lambda);
        let ep = Complex64::from_polar(1.0, self.phi);
        [[c(ct, 0.0), -el * st], [ep * st, ep * el * ct]]
    }

    /// Applies the unitary to a bare single-qubit amplitude pair.
    pub fn apply(&self, q: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.matrix();
        [m[0][0] * q[0] + m[0][1] * q[1], m[1][0] * q[0] + m[1][1] * q[1]]
    }
}

/// Applies single-qubit unitaries to distinct target qubits of `psi`.
pub fn apply_local_unitaries(
    psi: &PureState,
    ops: &[(usize, SingleQubitUnitary)],
) -> Result<PureState> {
    let n = psi.n();
    let mut seen = vec![false; n];
    for &(q, _) in ops {
        if q >= n {
            return Err(Error::InvalidArgument(format!(
                "target qubit {q} out of range for an {n}-qubit state"
            )));
        }
        if seen[q] {
            return Err(Error::InvalidArgument(format!("qubit {q} targeted twice")));
        }
        seen[q] = true;
    }
    let mut amps = psi.amplitudes().to_vec();
    for &(q, u) in ops {
        let m = u.matrix();
        let w = 1usize << (n - 1 - q);
        for idx in 0..amps.len() {
            if idx & w == 0 {
                let (a0, a1) = (amps[idx], amps[idx | w]);
                amps[idx] = m[0][0] * a0 + m[0][1] * a1;
                amps[idx | w] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
    Ok(PureState::from_trusted(n, amps))
}
