//! Command-line front end: generate synthetic networks, run community
//! detection on a file, drive sweep experiments, and check model assumptions.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use dfm::config::{grid_range, parse_experiment_config, ExperimentSpec};
use dfm::dataio::{
    graph_adjacency, read_matrix_csv, write_matrix_csv, write_results_csv, Dataset,
};
use dfm::error::DfmError;
use dfm::eval::{delta_separation, sigma_lower_bound_check, theoretical_rate};
use dfm::gml::parse_gml;
use dfm::model::{build_omega, labels_to_membership, ModelSpec};
use dfm::rng::RandomStream;
use dfm::sampling::{check_assumptions, sample_bundle, sample_labels, NoiseSpec};
use dfm::spectral::{dfa, KMeansConfig};
use dfm::sweep::{rows_from_records, run_realdata, run_sweep};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "dfm", version, about = "Spectral community detection for weighted networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one network from a config and write Omega, A, Ahat and labels.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run community detection on a GML or matrix-CSV file; prints one label
    /// per line.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Number of clusters.
        #[arg(long)]
        k: usize,
        /// Number of leading eigenvectors; defaults to k.
        #[arg(long)]
        k0: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run a config-driven synthetic sweep and write the result CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Redraw the label vector for every repetition.
        #[arg(long)]
        resample_labels: bool,
        /// Record wall-clock times in the elapsed_ms column (breaks bitwise
        /// reproducibility of the CSV).
        #[arg(long)]
        timings: bool,
    },
    /// Noise sweep on a bundled dataset over sigma2W in {0, 0.01, ..., 0.2}.
    Realdata {
        #[arg(long, value_parser = ["karate", "polbooks"])]
        dataset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long)]
        timings: bool,
    },
    /// Print assumption diagnostics and the singular-value bound check for a
    /// config.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_spec(path: &Path, seed: Option<u64>, reps: Option<usize>) -> dfm::Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec = parse_experiment_config(&text)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(reps) = reps {
        if reps < 1 {
            return Err(DfmError::Config("reps must be at least 1".into()));
        }
        spec.reps = reps;
    }
    Ok(spec)
}

/// Model instance at the first grid value of a spec, with labels drawn from
/// the seed.
fn instantiate(spec: &ExperimentSpec) -> dfm::Result<(ModelSpec, f64)> {
    let value = spec.grid[0];
    let stream = RandomStream::new(spec.seed, 0).child(1);
    let labels = sample_labels(spec.n, spec.k, &stream)?;
    let z = labels_to_membership(&labels, spec.k)?;
    let model = ModelSpec::new(spec.rho_at(value), spec.p.clone(), z)?;
    Ok((model, value))
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> dfm::Result<()> {
    let spec = load_spec(config, seed, None)?;
    let (model, value) = instantiate(&spec)?;
    let omega = build_omega(&model);
    let dist = spec.distribution_at(value);
    let noise = NoiseSpec::new(spec.sigma2w_at(value))?;
    let bundle = sample_bundle(
        &omega,
        &dist,
        &noise,
        &RandomStream::new(spec.seed, 0).child(2),
    )?;

    let prefix = out.to_string_lossy();
    let paths = [
        (format!("{prefix}_omega.csv"), omega.as_matrix()),
        (format!("{prefix}_A.csv"), &bundle.a),
        (format!("{prefix}_Ahat.csv"), &bundle.ahat),
    ];
    for (path, matrix) in &paths {
        write_matrix_csv(matrix, Path::new(path))?;
        println!("wrote {path}");
    }
    let labels_path = format!("{prefix}_labels.txt");
    let text: String = model
        .labels()
        .entries()
        .iter()
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&labels_path, text)?;
    println!("wrote {labels_path}");
    Ok(())
}

fn detect(input: &Path, k: usize, k0: usize, seed: u64) -> dfm::Result<()> {
    let text = std::fs::read_to_string(input)?;
    let a = if input.extension().is_some_and(|e| e == "gml") {
        graph_adjacency(&parse_gml(&text)?)?
    } else {
        read_matrix_csv(&text)?
    };
    let config = KMeansConfig::new(RandomStream::new(seed, 0));
    let labels = dfa(&a, k, k0, &config)?;
    for l in labels.entries() {
        println!("{l}");
    }
    Ok(())
}

fn sweep(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    reps: Option<usize>,
    resample_labels: bool,
    timings: bool,
) -> dfm::Result<()> {
    let mut spec = load_spec(config, seed, reps)?;
    if resample_labels {
        spec.resample_labels = true;
    }
    let records = run_sweep(&spec, timings)?;
    let rows = rows_from_records(&spec.id, spec.n, spec.k, spec.k0, spec.seed, &records);
    write_results_csv(&rows, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn realdata(name: &str, out: &Path, seed: u64, reps: usize, timings: bool) -> dfm::Result<()> {
    let dataset: Dataset = match name {
        "karate" => dfm::dataio::karate()?,
        "polbooks" => dfm::dataio::polbooks()?,
        other => return Err(DfmError::Dataset(format!("unknown dataset `{other}`"))),
    };
    let grid = grid_range(0.0, 0.01, 0.2)?;
    let records = run_realdata(&dataset, &grid, reps, seed, timings)?;
    let rows = rows_from_records(&dataset.name, dataset.n(), dataset.k, dataset.k, seed, &records);
    write_results_csv(&rows, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn check(config: &Path, seed: Option<u64>) -> dfm::Result<()> {
    let spec = load_spec(config, seed, None)?;
    let (model, value) = instantiate(&spec)?;
    let dist = spec.distribution_at(value);
    let noise = NoiseSpec::new(spec.sigma2w_at(value))?;

    println!("experiment {} at {} = {}", spec.id, spec.sweep.name(), value);
    println!(
        "n = {}, K = {}, K0 = {}, rho = {}, distribution = {}",
        model.n(),
        model.k(),
        model.k0(),
        model.rho,
        dist.name()
    );

    let report = check_assumptions(&model, &dist, &noise);
    println!("gamma bound: {:.6}", report.gamma);
    println!(
        "(gamma*rho*n + sigma2W*n)/log(n) = {:.3}",
        report.sparsity_value
    );
    println!("rho/sigma2W = {}", report.rho_over_noise);
    for flag in &report.flags {
        println!("warning: {flag}");
    }

    let bound = sigma_lower_bound_check(&model)?;
    println!(
        "sigma_K0(Omega) = {:.6} >= rho*sigma_K0(P)*n_K0 = {:.6}: {}",
        bound.sigma_k0_omega,
        bound.bound,
        if bound.holds { "holds" } else { "VIOLATED" }
    );

    let omega = build_omega(&model);
    let delta = delta_separation(&omega, &model.z, model.k0())?;
    match delta.reference {
        Some(r) => println!("delta = {:.6} (reference sqrt(2/n_max) = {r:.6})", delta.delta),
        None => println!("delta = {:.6}", delta.delta),
    }

    for (name, rate) in theoretical_rate(&model, &dist, &noise, delta.delta)? {
        println!("rate[{name}] = {rate:.6e}");
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Generate { config, out, seed } => generate(config, out, *seed),
        Command::Detect { input, k, k0, seed } => detect(input, *k, k0.unwrap_or(*k), *seed),
        Command::Sweep {
            config,
            out,
            seed,
            reps,
            resample_labels,
            timings,
        } => sweep(config, out, *seed, *reps, *resample_labels, *timings),
        Command::Realdata {
            dataset,
            out,
            seed,
            reps,
            timings,
        } => realdata(dataset, out, *seed, *reps, *timings),
        Command::Check { config, seed } => check(config, *seed),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
