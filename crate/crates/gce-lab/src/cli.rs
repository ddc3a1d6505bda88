//! Command line front end.
//!
//! One thin binary wraps the library: every subcommand prints a JSON
//! summary to stdout and writes any bulk data (outcome tables, sweep rows,
//! gate lists) to files named on the command line. All randomness flows
//! from the single `--seed` value, and `--threads` only changes wall time,
//! never output bytes.
//!
//! Exit codes: 0 success, 1 bad input or I/O, 2 composite copy count where
//! a prime is required, 3 resource guard tripped.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::circuit::{compile_circuit, simulate_gatelist};
use crate::concentration::{analyze, ConcentrationInput};
use crate::conjectures::{self, ConjectureSweepConfig};
use crate::gce::{
    gce, gce_ghz_closed_form, gce_spin_squeezed, gce_w_closed_form, GceParams, SqueezingParams,
};
use crate::permtest::{estimate_gce, exact_probability_table, sample_table, ProbabilityTable};
use crate::rng::stream_seed;
use crate::robustness::{self, Scenario, SweepConfig};
use crate::state::{haar_random_state, PureState, SubsetLabel};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "gce-lab",
    version,
    about = "Generalized concentratable entanglement: exact values, permutation-test estimates, concentration, robustness, conjecture scans"
)]
struct Cli {
    /// Master seed; every random draw in any subcommand derives from it
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Worker thread count (default: one per core); results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact GCE of a pure state from its reduced spectra
    Gce(GceArgs),
    /// Permutation-test outcome distribution and the GCE estimates it induces
    Estimate(EstimateArgs),
    /// Three-copy concentration of single-qubit products toward W states
    Concentrate(ConcentrateArgs),
    /// Measured estimation error under local perturbations vs the analytic bound
    Robustness(RobustnessArgs),
    /// Randomized scans for conjectured GCE inequalities over Haar states
    Conjectures(ConjecturesArgs),
    /// Compile the K-copy permutation test to a printable gate list
    Compile(CompileArgs),
    /// Reproduce reference data sets as CSV
    Examples(ExamplesArgs),
}

/// Input state selection shared by the state-centric subcommands.
#[derive(Args, Debug)]
struct StateArgs {
    /// Built-in family: ghz | w | product | haar | spin-squeezed
    #[arg(long, conflicts_with = "state")]
    family: Option<String>,

    /// Qubit count for --family
    #[arg(long)]
    n: Option<usize>,

    /// Squeezing strength, only for --family spin-squeezed
    #[arg(long)]
    mu: Option<f64>,

    /// Load the statevector from a JSON file instead of --family
    #[arg(long)]
    state: Option<PathBuf>,
}

impl StateArgs {
    fn build(&self, seed: u64) -> Result<PureState> {
        if let Some(path) = &self.state {
            return PureState::load(path);
        }
        let family = self.family.as_deref().ok_or_else(|| {
            Error::InvalidArgument("pick an input with --family or --state".into())
        })?;
        let n = self
            .n
            .ok_or_else(|| Error::InvalidArgument(format!("--family {family} needs --n")))?;
        match family {
            "ghz" => PureState::ghz(n),
            "w" => PureState::w(n),
            "product" => PureState::plus_product(n),
            "haar" => haar_random_state(n, stream_seed(seed, &[0])),
            "spin-squeezed" => {
                let mu = self.mu.ok_or_else(|| {
                    Error::InvalidArgument("--family spin-squeezed needs --mu".into())
                })?;
                PureState::spin_squeezed(n, mu)
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown family {other:?} (expected ghz, w, product, haar or spin-squeezed)"
            ))),
        }
    }
}

#[derive(Args, Debug)]
struct GceArgs {
    #[command(flatten)]
    state: StateArgs,

    /// Order (any real > 1, e.g. 2, 3 or 1.5)
    #[arg(long, default_value_t = 2.0)]
    k: f64,

    /// Measured subset as a comma list of labels, e.g. 0,1,2 (default: all)
    #[arg(long)]
    subset: Option<String>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    state: StateArgs,

    /// Copy count K of the test; must be prime
    #[arg(long, default_value_t = 2)]
    copies: u32,

    /// Subset for the GCE estimate (default: all)
    #[arg(long)]
    subset: Option<String>,

    /// Measurement shots; 0 uses the exact distribution
    #[arg(long, default_value_t = 0)]
    shots: u64,

    /// Run the compiled qubit circuit instead of the direct path sum
    #[arg(long)]
    via_circuit: bool,

    /// Write the outcome distribution to this CSV file
    #[arg(long)]
    table: Option<PathBuf>,

    /// Write the compiled gate list to this text file
    #[arg(long)]
    circuit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConcentrateArgs {
    /// Twelve reals a1re,a1im,b1re,b1im,...: amplitudes of the three input qubits
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    amps: Option<Vec<f64>>,

    /// Number of random product inputs when --amps is absent
    #[arg(long, default_value_t = 1)]
    samples: usize,
}

#[derive(Args, Debug)]
struct RobustnessArgs {
    /// Qubit counts: comma list and/or start:stop[:step] ranges
    #[arg(long, default_value = "4")]
    n: String,

    /// Prime copy counts, comma list
    #[arg(long, default_value = "2,3")]
    copies: String,

    /// Noise cells as scenario=eps pairs, e.g. all-noisy=0.05,one-noisy=0.1
    #[arg(long, default_value = "all-noisy=0.05,one-noisy=0.05")]
    cells: String,

    /// Measured subset is {0, .., s_size-1}
    #[arg(long, default_value_t = 2)]
    s_size: usize,

    /// Haar samples per grid cell
    #[arg(long, default_value_t = 20)]
    samples: usize,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConjecturesArgs {
    /// Qubit counts: comma list and/or start:stop[:step] ranges
    #[arg(long, default_value = "5")]
    n: String,

    /// Orders (real), comma list
    #[arg(long, default_value = "1.2,1.8,3,5")]
    k: String,

    /// Haar samples per (n, order) cell
    #[arg(long, default_value_t = 100)]
    samples: usize,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,

    /// Directory for counterexample statevector dumps (default: next to --out)
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Qubits per copy
    #[arg(long)]
    n: usize,

    /// Copy count K; must be prime
    #[arg(long, default_value_t = 2)]
    copies: u32,

    /// Write the gate list here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExamplesArgs {
    /// Which reference data set: spin | ghz-w
    #[arg(long)]
    figure: String,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,

    /// Override qubit counts (ghz-w) or the single n (spin)
    #[arg(long)]
    n: Option<String>,

    /// Override integer orders, comma list
    #[arg(long)]
    copies: Option<String>,

    /// Override squeezing strengths (spin): comma list and/or ranges
    #[arg(long)]
    mu: Option<String>,
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point; parses `args` and executes, returning the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads;
    let result = match threads {
        None => execute(cli),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")));
            match pool {
                Ok(pool) => pool.install(|| execute(cli)),
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gce(args) => cmd_gce(cli.seed, args),
        Command::Estimate(args) => cmd_estimate(cli.seed, args),
        Command::Concentrate(args) => cmd_concentrate(cli.seed, args),
        Command::Robustness(args) => cmd_robustness(cli.seed, args),
        Command::Conjectures(args) => cmd_conjectures(cli.seed, args),
        Command::Compile(args) => cmd_compile(args),
        Command::Examples(args) => cmd_examples(args),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json serialization"));
}

fn subset_or_full(text: Option<&str>, n: usize) -> Result<SubsetLabel> {
    match text {
        None => Ok(SubsetLabel::full(n)),
        Some(t) => {
            let labels = parse_usize_list(t)?;
            let s = SubsetLabel::new(labels)?;
            s.check_within(n)?;
            Ok(s)
        }
    }
}

fn cmd_gce(seed: u64, args: GceArgs) -> Result<()> {
    let psi = args.state.build(seed)?;
    let subset = subset_or_full(args.subset.as_deref(), psi.n())?;
    let params = GceParams::new(args.k, subset.clone())?;
    let value = gce(&psi, &params)?;
    print_json(&serde_json::json!({
        "n": psi.n(),
        "k": args.k,
        "subset": subset.to_string(),
        "gce": value,
    }));
    Ok(())
}

fn cmd_estimate(seed: u64, args: EstimateArgs) -> Result<()> {
    let psi = args.state.build(seed)?;
    let subset = subset_or_full(args.subset.as_deref(), psi.n())?;
    let params = GceParams::new(f64::from(args.copies), subset.clone())?;

    let mut circuit_path = serde_json::Value::Null;
    let table: ProbabilityTable = if args.via_circuit || args.circuit.is_some() {
        let list = compile_circuit(psi.n(), args.copies)?;
        if let Some(path) = &args.circuit {
            list.save(path)?;
            circuit_path = serde_json::json!(path.display().to_string());
        }
        if args.via_circuit {
            simulate_gatelist(&list, &psi)?
        } else {
            exact_probability_table(&psi, args.copies)?
        }
    } else {
        exact_probability_table(&psi, args.copies)?
    };
    let table = if args.shots > 0 {
        sample_table(&table, args.shots, stream_seed(seed, &[1]))?
    } else {
        table
    };
    if let Some(path) = &args.table {
        table.write_csv(path)?;
    }

    let estimate = estimate_gce(&table, &params)?;
    let exact = gce(&psi, &params)?;
    print_json(&serde_json::json!({
        "n": psi.n(),
        "copies": args.copies,
        "subset": subset.to_string(),
        "shots": args.shots,
        "route": if args.via_circuit { "circuit" } else { "path-sum" },
        "exact": exact,
        "estimate": {
            "zero_class_form": estimate.zero_class_form,
            "unit_class_form": estimate.unit_class_form,
        },
        "abs_error": {
            "zero_class_form": (estimate.zero_class_form - exact).abs(),
            "unit_class_form": (estimate.unit_class_form - exact).abs(),
        },
        "table_path": args.table.as_ref().map(|p| p.display().to_string()),
        "circuit_path": circuit_path,
    }));
    Ok(())
}

fn cmd_concentrate(seed: u64, args: ConcentrateArgs) -> Result<()> {
    let inputs: Vec<(usize, ConcentrationInput)> = match &args.amps {
        Some(values) => {
            if values.len() != 12 {
                return Err(Error::InvalidArgument(format!(
                    "--amps needs 12 comma-separated reals (re,im for each of 6 amplitudes), got {}",
                    values.len()
                )));
            }
            let q = |i: usize| Complex64::new(values[2 * i], values[2 * i + 1]);
            let input = ConcentrationInput::new([[q(0), q(1)], [q(2), q(3)], [q(4), q(5)]])?;
            vec![(0, input)]
        }
        None => (0..args.samples.max(1))
            .map(|i| (i, ConcentrationInput::random_from_seed(stream_seed(seed, &[2, i as u64]))))
            .collect(),
    };
    let mut reports = Vec::new();
    for (index, input) in &inputs {
        let records = analyze(input)?;
        reports.push(serde_json::json!({
            "sample_index": index,
            "records": records,
        }));
    }
    print_json(&serde_json::json!({ "samples": reports }));
    Ok(())
}

fn cmd_robustness(seed: u64, args: RobustnessArgs) -> Result<()> {
    let cfg = SweepConfig {
        n_values: parse_usize_list(&args.n)?,
        k_values: parse_u32_list(&args.copies)?,
        cells: parse_cells(&args.cells)?,
        s_size: args.s_size,
        samples: args.samples,
        seed,
    };
    let rows = robustness::robustness_sweep(&cfg)?;
    std::fs::write(&args.out, robustness::rows_to_csv(&rows))?;
    let within = rows.iter().filter(|r| r.measured_error <= r.bound + 1e-12).count();
    print_json(&serde_json::json!({
        "rows": rows.len(),
        "within_bound": within,
        "csv_path": args.out.display().to_string(),
    }));
    Ok(())
}

fn cmd_conjectures(seed: u64, args: ConjecturesArgs) -> Result<()> {
    let cfg = ConjectureSweepConfig {
        n_values: parse_usize_list(&args.n)?,
        k_values: parse_f64_list(&args.k)?,
        samples: args.samples,
        seed,
        ..Default::default()
    };
    let report = conjectures::conjecture_sweep(&cfg)?;
    std::fs::write(&args.out, conjectures::rows_to_csv(&report.rows))?;
    let dump_dir = args
        .dump_dir
        .clone()
        .or_else(|| args.out.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut dumps = Vec::new();
    for ce in &report.counterexamples {
        let row = &report.rows[ce.row_index];
        let path = dump_dir.join(format!(
            "counterexample-{}-row{}.json",
            row.conjecture, ce.row_index
        ));
        std::fs::write(&path, &ce.state_json)?;
        eprintln!(
            "counterexample: {} n={} K={} sample={} value={} (re-verified {}), state in {}",
            row.conjecture,
            row.n,
            row.k,
            row.sample_index,
            row.difference,
            ce.reverified_difference,
            path.display()
        );
        dumps.push(serde_json::json!({
            "conjecture": row.conjecture.to_string(),
            "row_index": ce.row_index,
            "difference": row.difference,
            "reverified_difference": ce.reverified_difference,
            "state_path": path.display().to_string(),
        }));
    }
    print_json(&serde_json::json!({
        "rows": report.rows.len(),
        "counterexamples": dumps,
        "csv_path": args.out.display().to_string(),
    }));
    Ok(())
}

fn cmd_compile(args: CompileArgs) -> Result<()> {
    let list = compile_circuit(args.n, args.copies)?;
    match &args.out {
        Some(path) => {
            list.save(path)?;
            print_json(&serde_json::json!({
                "n": args.n,
                "copies": args.copies,
                "ancilla_qubits_per_group": list.l(),
                "total_qubits": list.total_qubits(),
                "gates": list.gates().len(),
                "path": path.display().to_string(),
            }));
        }
        None => print!("{}", list.to_text()),
    }
    Ok(())
}

fn cmd_examples(args: ExamplesArgs) -> Result<()> {
    match args.figure.as_str() {
        "spin" => {
            let n_list = parse_usize_list(args.n.as_deref().unwrap_or("40"))?;
            let k_list = parse_u32_list(args.copies.as_deref().unwrap_or("2,3,4,5"))?;
            let mu_list = parse_f64_list(args.mu.as_deref().unwrap_or("0:3.2:0.1"))?;
            let mut csv = String::from("n,K,mu,s_size,gce\n");
            for &n in &n_list {
                let s_size = n / 2;
                for &k in &k_list {
                    for &mu in &mu_list {
                        let params = SqueezingParams::new(n, mu)?;
                        let value = gce_spin_squeezed(&params, s_size, f64::from(k))?;
                        csv.push_str(&format!("{n},{k},{mu},{s_size},{value}\n"));
                    }
                }
            }
            std::fs::write(&args.out, csv)?;
        }
        "ghz-w" => {
            let n_list = parse_usize_list(args.n.as_deref().unwrap_or("4:11"))?;
            let k_list = parse_u32_list(args.copies.as_deref().unwrap_or("2,3,4,5"))?;
            let mut csv = String::from("n,K,s_size,gce_ghz,gce_w,difference\n");
            for &n in &n_list {
                let s_size = n / 2;
                for &k in &k_list {
                    let g = gce_ghz_closed_form(n, s_size, f64::from(k))?;
                    let w = gce_w_closed_form(n, s_size, f64::from(k))?;
                    csv.push_str(&format!("{n},{k},{s_size},{g},{w},{}\n", g - w));
                }
            }
            std::fs::write(&args.out, csv)?;
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown figure {other:?} (expected spin or ghz-w)"
            )))
        }
    }
    print_json(&serde_json::json!({
        "figure": args.figure,
        "csv_path": args.out.display().to_string(),
    }));
    Ok(())
}

// List parsing: comma-separated atoms, each either a plain number or an
// inclusive-start exclusive-stop range start:stop[:step].

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for atom in text.split(',') {
        let atom = atom.trim();
        if atom.contains(':') {
            let parts: Vec<&str> = atom.split(':').collect();
            if parts.len() > 3 {
                return Err(Error::Parse(format!("range {atom:?} has too many fields")));
            }
            let start: usize = parse_num(parts[0])?;
            let stop: usize = parse_num(parts[1])?;
            let step: usize = if parts.len() == 3 { parse_num(parts[2])? } else { 1 };
            if step == 0 {
                return Err(Error::Parse(format!("range {atom:?} has step 0")));
            }
            out.extend((start..stop).step_by(step));
        } else {
            out.push(parse_num(atom)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("empty list {text:?}")));
    }
    Ok(out)
}

fn parse_u32_list(text: &str) -> Result<Vec<u32>> {
    parse_usize_list(text)?
        .into_iter()
        .map(|v| {
            u32::try_from(v).map_err(|_| Error::Parse(format!("value {v} does not fit in u32")))
        })
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for atom in text.split(',') {
        let atom = atom.trim();
        if atom.contains(':') {
            let parts: Vec<&str> = atom.split(':').collect();
            if parts.len() > 3 {
                return Err(Error::Parse(format!("range {atom:?} has too many fields")));
            }
            let start: f64 = parse_num(parts[0])?;
            let stop: f64 = parse_num(parts[1])?;
            let step: f64 = if parts.len() == 3 { parse_num(parts[2])? } else { 1.0 };
            if !(step > 0.0) {
                return Err(Error::Parse(format!("range {atom:?} needs a positive step")));
            }
            let count = ((stop - start) / step - 1e-9).ceil().max(0.0) as usize;
            out.extend((0..count).map(|i| start + step * i as f64));
        } else {
            out.push(parse_num(atom)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("empty list {text:?}")));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse number {text:?}")))
}

fn parse_cells(text: &str) -> Result<Vec<(Scenario, f64)>> {
    text.split(',')
        .map(|cell| {
            let (name, eps) = cell
                .trim()
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("cell {cell:?} is not scenario=eps")))?;
            Ok((name.parse::<Scenario>()?, parse_num::<f64>(eps)?))
        })
        .collect()
}
