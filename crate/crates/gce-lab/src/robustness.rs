//! Noise robustness of the permutation-test GCE.
//!
//! The K copies fed to the test are never perfectly identical. Modelling
//! copy i as a pure state within trace distance eps_i of the ideal one, the
//! measured functional [`crate::permtest::distinct_copy_gce`] stays within
//!
//!   |C_measured - C| <= (2^|s| - 1) / ((K-1) 2^|s|)
//!                       * (e_1 + e_2 + .. + e_{K-1} + 2 e_K)
//!
//! of the ideal GCE, where e_j is the j-th elementary symmetric polynomial
//! in (eps_1, .., eps_K). Two standard scenarios: every copy at eps
//! ("all-noisy") and a single bad copy ("one-noisy", where the bound
//! collapses to (1 - 2^{-|s|}) eps / (K-1) and larger K visibly averages
//! the noise away).

use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use crate::gce::{gce, GceParams};
use crate::permtest::{distinct_copy_gce, require_prime};
use crate::rng::stream_seed;
use crate::state::{haar_random_state, perturb_state, PureState, SubsetLabel};
use crate::{Error, Result};

/// Per-copy trace-distance budgets plus the seed for drawing the actual
/// perturbation directions.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub epsilons: Vec<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(epsilons: Vec<f64>, seed: u64) -> Result<Self> {
        if epsilons.len() < 2 {
            return Err(Error::InvalidArgument("noise model needs K >= 2 copies".into()));
        }
        if epsilons.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidArgument(
                "per-copy noise strengths must lie in [0, 1]".into(),
            ));
        }
        Ok(NoiseSpec { epsilons, seed })
    }

    /// Every copy perturbed by the same eps.
    pub fn all_noisy(k: usize, eps: f64, seed: u64) -> Result<Self> {
        Self::new(vec![eps; k], seed)
    }

    /// Only the first copy perturbed.
    pub fn one_noisy(k: usize, eps: f64, seed: u64) -> Result<Self> {
        let mut eps_vec = vec![0.0; k];
        eps_vec[0] = eps;
        Self::new(eps_vec, seed)
    }
}

/// Elementary symmetric polynomials e_0 .. e_n of the inputs, by the
/// standard one-pass recurrence.
fn elementary_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; xs.len() + 1];
    e[0] = 1.0;
    for (i, &x) in xs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// The worst-case deviation bound for per-copy budgets `epsilons` on a
/// label set of size s_size.
pub fn error_bound(epsilons: &[f64], k: u32, s_size: usize) -> Result<f64> {
    if epsilons.len() != k as usize {
        return Err(Error::InvalidArgument(format!(
            "got {} noise strengths for K={k} copies",
            epsilons.len()
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("need K >= 2".into()));
    }
    if s_size == 0 {
        return Err(Error::InvalidArgument("need a nonempty label set".into()));
    }
    if epsilons.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
        return Err(Error::InvalidArgument("noise strengths must lie in [0, 1]".into()));
    }
    let e = elementary_symmetric(epsilons);
    let ku = k as usize;
    let sum: f64 = e[1..ku].iter().sum::<f64>() + 2.0 * e[ku];
    let pow = 2f64.powi(s_size as i32);
    Ok((pow - 1.0) / ((f64::from(k) - 1.0) * pow) * sum)
}

/// Measured deviation of one noisy run against its bound.
#[derive(Debug, Clone, Copy)]
pub struct MeasuredError {
    /// |distinct-copy functional of the perturbed copies - gce(psi)|.
    pub error: f64,
    /// [`error_bound`] for the same budgets.
    pub bound: f64,
}

/// Perturbs each copy of `psi` per the noise model, runs the distinct-copy
/// functional, and compares to the ideal GCE. Copy i is moved exactly
/// trace distance epsilons[i] in a seeded random direction.
pub fn measured_error(
    psi: &PureState,
    noise: &NoiseSpec,
    params: &GceParams,
) -> Result<MeasuredError> {
    let k = noise.epsilons.len() as u32;
    require_prime(k)?;
    let copies: Vec<PureState> = noise
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| perturb_state(psi, eps, stream_seed(noise.seed, &[i as u64])))
        .collect::<Result<_>>()?;
    let measured = distinct_copy_gce(&copies, params)?;
    let ideal = gce(psi, params)?;
    Ok(MeasuredError {
        error: (measured - ideal).abs(),
        bound: error_bound(&noise.epsilons, k, params.s().len())?,
    })
}

/// Noise scenario of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    AllNoisy,
    OneNoisy,
}

impl Scenario {
    fn noise(self, k: usize, eps: f64, seed: u64) -> Result<NoiseSpec> {
        match self {
            Scenario::AllNoisy => NoiseSpec::all_noisy(k, eps, seed),
            Scenario::OneNoisy => NoiseSpec::one_noisy(k, eps, seed),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::AllNoisy => "all-noisy",
            Scenario::OneNoisy => "one-noisy",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-noisy" => Ok(Scenario::AllNoisy),
            "one-noisy" => Ok(Scenario::OneNoisy),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario {other:?} (expected all-noisy or one-noisy)"
            ))),
        }
    }
}

/// Grid of a robustness sweep: Haar states per (n, K, scenario) cell.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub k_values: Vec<u32>,
    /// (scenario, eps) cells, e.g. all-noisy at 0.05 and one-noisy at 0.1.
    pub cells: Vec<(Scenario, f64)>,
    /// The label set is {0, .., s_size-1}; for Haar states the choice of
    /// labels is statistically irrelevant.
    pub s_size: usize,
    pub samples: usize,
    pub seed: u64,
}

/// One sweep sample.
#[derive(Debug, Clone)]
pub struct RobustnessRow {
    pub n: usize,
    pub k: u32,
    pub s_size: usize,
    pub scenario: Scenario,
    pub epsilon: f64,
    pub sample_index: usize,
    pub measured_error: f64,
    pub bound: f64,
}

/// Runs the sweep. Work items are indexed up front and every random draw
/// is derived from (master seed, cell, sample), so the output is identical
/// for any thread count.
pub fn robustness_sweep(cfg: &SweepConfig) -> Result<Vec<RobustnessRow>> {
    if cfg.samples == 0 || cfg.n_values.is_empty() || cfg.k_values.is_empty() || cfg.cells.is_empty()
    {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    for k in &cfg.k_values {
        require_prime(*k)?;
    }
    let mut grid = Vec::new();
    for &n in &cfg.n_values {
        if cfg.s_size == 0 || cfg.s_size > n {
            return Err(Error::InvalidArgument(format!(
                "s_size {} does not fit n={n}",
                cfg.s_size
            )));
        }
        for &k in &cfg.k_values {
            for &(scenario, eps) in &cfg.cells {
                grid.push((n, k, scenario, eps));
            }
        }
    }

    let work: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|cell| (0..cfg.samples).map(move |sample| (cell, sample)))
        .collect();
    work.par_iter()
        .map(|&(cell, sample)| {
            let (n, k, scenario, eps) = grid[cell];
            let state_seed = stream_seed(cfg.seed, &[0, cell as u64, sample as u64]);
            let noise_seed = stream_seed(cfg.seed, &[1, cell as u64, sample as u64]);
            let psi = haar_random_state(n, state_seed)?;
            let params = GceParams::new(
                f64::from(k),
                SubsetLabel::new((0..cfg.s_size).collect())?,
            )?;
            let noise = scenario.noise(k as usize, eps, noise_seed)?;
            let me = measured_error(&psi, &noise, &params)?;
            Ok(RobustnessRow {
                n,
                k,
                s_size: cfg.s_size,
                scenario,
                epsilon: eps,
                sample_index: sample,
                measured_error: me.error,
                bound: me.bound,
            })
        })
        .collect()
}

/// CSV with one row per sample; floats in shortest round-trip form.
pub fn rows_to_csv(rows: &[RobustnessRow]) -> String {
    let mut out = String::from("n,K,s_size,scenario,epsilon,sample_index,measured_error,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n, r.k, r.s_size, r.scenario, r.epsilon, r.sample_index, r.measured_error, r.bound
        ));
    }
    out
}
