//! Command-line experiment driver.
//!
//! Every subcommand writes CSV with a header row and numbers rounded to 12
//! significant digits. Parallel work is seeded from the command's `--seed`
//! and the indices of the work item, so output does not depend on the number
//! of worker threads.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::codelength::CodelengthReport;
use crate::flow::{stationary, FlowDistribution, FlowError};
use crate::metrics::{ami, MetricsError};
use crate::netcore::{
    load_metadata, load_network, read_partition, write_edge_list, write_metadata, write_partition,
    MetadataAnnotation, Network, NetworkError, NetworkFormat, Partition,
};
use crate::optimizer::{search, SearchConfig, SearchResult};
use crate::synth::{generate, SbmSpec, SynthError};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "CONTENTMAP_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "contentmap", version, about = "Community detection with the metadata-weighted content map equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find one partition and report its codelength.
    Partition(PartitionArgs),
    /// Search once per eta and tabulate the codelength terms.
    Sweep(SweepArgs),
    /// Planted-partition detectability experiment.
    Sbm(SbmArgs),
    /// Pairwise AMI among metadata types and the partitions found for each.
    AmiMatrix(AmiMatrixArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Teleportation probability.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Independent restarts per search.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub max_outer_loops: usize,
    /// Perturb-and-descend rounds per trial.
    #[arg(long, default_value_t = 4)]
    pub perturbations: usize,
    /// Minimum codelength improvement (bits) for a move.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

impl SearchArgs {
    fn config(&self, eta: f64) -> SearchConfig<f64> {
        SearchConfig {
            eta,
            tau: self.tau,
            trials: self.trials,
            seed: self.seed,
            max_outer_loops: self.max_outer_loops,
            perturbations: self.perturbations,
            tolerance: self.tolerance,
        }
    }
}

impl Default for SearchArgs {
    fn default() -> Self {
        let config = SearchConfig::<f64>::default();
        SearchArgs {
            tau: config.tau,
            trials: config.trials,
            seed: config.seed,
            max_outer_loops: config.max_outer_loops,
            perturbations: config.perturbations,
            tolerance: config.tolerance,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// `edge-list-tsv` or `pajek-net`; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<NetworkFormat>,
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub input: NetworkArgs,
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Partition output (`node<TAB>module`).
    #[arg(long)]
    pub out: PathBuf,
    /// Codelength report CSV; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: NetworkArgs,
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0,0.1,0.25,0.5,1")]
    pub eta_grid: String,
    /// Reference partition for the `ami_reference` column.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SbmArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    #[arg(long, default_value = "0:0.4:0.02")]
    pub delta_grid: String,
    #[arg(long, default_value = "0.05,0.25,0.5")]
    pub noise_grid: String,
    #[arg(long, default_value = "0,0.1,0.25,0.5,1")]
    pub eta_grid: String,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Directory receiving every generated instance.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AmiMatrixArgs {
    #[command(flatten)]
    pub input: NetworkArgs,
    /// Metadata type as `NAME=PATH`; repeat for several types.
    #[arg(long = "metadata", required = true)]
    pub metadata: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Round to 12 significant digits and print in shortest form.
pub fn format_number(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 { "0".to_string() } else { value.to_string() };
    }
    let rounded: f64 = format!("{value:.11e}").parse().expect("formatted float parses");
    if (1e-5..1e15).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

/// Parse `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Usage(format!("invalid grid {spec:?}"));
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // snap to the step's decimal precision so 0.1 * 3 prints as 0.3
        return Ok((0..=count)
            .map(|i| format_number(start + step * i as f64).parse().expect("number"))
            .collect());
    }
    spec.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

/// Mix several indices into one seed (SplitMix64 finalizer per component).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    for &part in parts {
        state ^= part.wrapping_add(0x9E37_79B9_7F4A_7C15);
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        state = z ^ (z >> 31);
    }
    state
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(io::stdout()),
    })
}

fn load_input(args: &NetworkArgs) -> Result<Network<f64>, HarnessError> {
    let format = args.format.unwrap_or_else(|| NetworkFormat::from_path(&args.network));
    Ok(load_network(&args.network, format, args.directed)?)
}

fn load_labels(path: Option<&Path>, network: &Network<f64>, eta: f64) -> Result<MetadataAnnotation, HarnessError> {
    match path {
        Some(path) => Ok(load_metadata(path, network)?),
        None if eta > 0.0 => Err(HarnessError::Usage("--metadata is required when --eta > 0".to_string())),
        None => Ok(MetadataAnnotation::uniform(network.node_count())),
    }
}

fn check_eta(eta: f64) -> Result<(), HarnessError> {
    if eta >= 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Usage(format!("eta must be a non-negative number, got {eta}")))
    }
}

pub const REPORT_HEADER: [&str; 8] = ["eta", "tau", "total", "inter", "intra", "metadata", "topological", "modules"];

pub fn write_report<W: Write>(
    writer: W,
    report: &CodelengthReport<f64>,
    tau: f64,
    modules: usize,
) -> Result<(), HarnessError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(REPORT_HEADER)?;
    csv.write_record([
        format_number(report.eta),
        format_number(tau),
        format_number(report.total),
        format_number(report.inter),
        format_number(report.intra),
        format_number(report.metadata),
        format_number(report.topological()),
        modules.to_string(),
    ])?;
    csv.flush()?;
    Ok(())
}

pub fn cmd_partition(args: &PartitionArgs) -> Result<SearchResult<f64>, HarnessError> {
    check_eta(args.eta)?;
    let network = load_input(&args.input)?;
    let metadata = load_labels(args.metadata.as_deref(), &network, args.eta)?;
    let flow = stationary(&network, args.search.tau)?;
    let result = search(&network, &flow, &metadata, &args.search.config(args.eta));
    write_partition(&result.partition, network.ids(), &args.out)?;
    write_report(
        output(args.report.as_deref())?,
        &result.report,
        args.search.tau,
        result.partition.module_count(),
    )?;
    Ok(result)
}

/// One row of an eta sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub seed: u64,
    pub report: CodelengthReport<f64>,
    pub modules: usize,
    pub ami_metadata: f64,
    pub ami_reference: Option<f64>,
}

pub const SWEEP_HEADER: [&str; 10] = [
    "eta",
    "seed",
    "total",
    "inter",
    "intra",
    "metadata",
    "topological",
    "modules",
    "ami_metadata",
    "ami_reference",
];

/// Best partition per eta with its codelength terms and AMI scores.
pub fn sweep(
    network: &Network<f64>,
    flow: &FlowDistribution<f64>,
    metadata: &MetadataAnnotation,
    reference: Option<&Partition>,
    etas: &[f64],
    search_args: &SearchArgs,
) -> Result<Vec<SweepRow>, HarnessError> {
    let labels = metadata.as_partition();
    etas.par_iter()
        .map(|&eta| {
            check_eta(eta)?;
            let result = search(network, flow, metadata, &search_args.config(eta));
            Ok(SweepRow {
                eta,
                seed: search_args.seed,
                modules: result.partition.module_count(),
                ami_metadata: ami(&result.partition, &labels)?,
                ami_reference: reference.map(|r| ami(&result.partition, r)).transpose()?,
                report: result.report,
            })
        })
        .collect()
}

pub fn write_sweep<W: Write>(writer: W, rows: &[SweepRow]) -> Result<(), HarnessError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(SWEEP_HEADER)?;
    for row in rows {
        csv.write_record([
            format_number(row.eta),
            row.seed.to_string(),
            format_number(row.report.total),
            format_number(row.report.inter),
            format_number(row.report.intra),
            format_number(row.report.metadata),
            format_number(row.report.topological()),
            row.modules.to_string(),
            format_number(row.ami_metadata),
            row.ami_reference.map(format_number).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>, HarnessError> {
    let etas = parse_grid(&args.eta_grid)?;
    let network = load_input(&args.input)?;
    let max_eta = etas.iter().copied().fold(0.0, f64::max);
    let metadata = load_labels(args.metadata.as_deref(), &network, max_eta)?;
    let reference = args
        .reference
        .as_deref()
        .map(|p| read_partition(p, network.ids()))
        .transpose()?;
    let flow = stationary(&network, args.search.tau)?;
    let rows = sweep(&network, &flow, &metadata, reference.as_ref(), &etas, &args.search)?;
    write_sweep(output(args.out.as_deref())?, &rows)?;
    Ok(rows)
}

/// Settings of a planted-partition experiment.
#[derive(Debug, Clone)]
pub struct SbmExperiment {
    pub nodes: usize,
    pub rho: f64,
    pub deltas: Vec<f64>,
    pub noises: Vec<f64>,
    pub etas: Vec<f64>,
    pub instances: usize,
    pub search: SearchArgs,
}

/// Aggregate over instances at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmRow {
    pub delta: f64,
    pub noise: f64,
    pub eta: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub mean_ami: f64,
    pub std_ami: f64,
    pub mean_modules: f64,
    pub amis: Vec<f64>,
}

pub const SBM_HEADER: [&str; 8] = ["delta", "noise", "eta", "p_in", "p_out", "mean_ami", "std_ami", "mean_modules"];

/// Seed of the graph for (delta, noise, instance) grid indices.
pub fn instance_seed(seed: u64, delta: usize, noise: usize, instance: usize) -> u64 {
    derive_seed(&[seed, delta as u64, noise as u64, instance as u64])
}

/// Search seed for (delta, noise, eta, instance) grid indices.
pub fn search_seed(seed: u64, delta: usize, noise: usize, eta: usize, instance: usize) -> u64 {
    derive_seed(&[seed, delta as u64, noise as u64, eta as u64, instance as u64, 1])
}

impl SbmExperiment {
    fn spec(&self, di: usize, ni: usize, ii: usize) -> Result<SbmSpec, HarnessError> {
        SbmSpec::from_density(
            self.nodes,
            self.rho,
            self.deltas[di],
            self.noises[ni],
            instance_seed(self.search.seed, di, ni, ii),
        )
        .map_err(|e| HarnessError::Usage(format!("delta {} with rho {}: {e}", self.deltas[di], self.rho)))
    }

    /// Run every grid point; rows ordered by delta, then noise, then eta.
    pub fn run(&self, dump: Option<&Path>) -> Result<Vec<SbmRow>, HarnessError> {
        for di in 0..self.deltas.len() {
            self.spec(di, 0, 0)?;
        }
        for &eta in &self.etas {
            check_eta(eta)?;
        }
        if self.instances == 0 || self.noises.is_empty() {
            return Err(HarnessError::Usage("need at least one instance and one noise level".to_string()));
        }
        if let Some(dir) = dump {
            fs::create_dir_all(dir)?;
        }
        let jobs: Vec<(usize, usize, usize)> = (0..self.deltas.len())
            .flat_map(|d| (0..self.noises.len()).flat_map(move |n| (0..self.instances).map(move |i| (d, n, i))))
            .collect();
        // (ami, modules) per job and eta
        let scores: Vec<Vec<(f64, usize)>> = jobs
            .par_iter()
            .map(|&(di, ni, ii)| self.run_instance(di, ni, ii, dump))
            .collect::<Result<_, _>>()?;

        let mut rows = Vec::new();
        for di in 0..self.deltas.len() {
            for ni in 0..self.noises.len() {
                for (ei, &eta) in self.etas.iter().enumerate() {
                    let base = (di * self.noises.len() + ni) * self.instances;
                    let picked: Vec<(f64, usize)> = (0..self.instances).map(|i| scores[base + i][ei]).collect();
                    let amis: Vec<f64> = picked.iter().map(|&(a, _)| a).collect();
                    let count = amis.len() as f64;
                    let mean = amis.iter().sum::<f64>() / count;
                    let std = if amis.len() > 1 {
                        (amis.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    let delta = self.deltas[di];
                    rows.push(SbmRow {
                        delta,
                        noise: self.noises[ni],
                        eta,
                        p_in: self.rho + delta / 2.0,
                        p_out: self.rho - delta / 2.0,
                        mean_ami: mean,
                        std_ami: std,
                        mean_modules: picked.iter().map(|&(_, m)| m as f64).sum::<f64>() / count,
                        amis,
                    });
                }
            }
        }
        Ok(rows)
    }

    fn run_instance(&self, di: usize, ni: usize, ii: usize, dump: Option<&Path>) -> Result<Vec<(f64, usize)>, HarnessError> {
        let instance = generate::<f64>(&self.spec(di, ni, ii)?)?;
        let flow = stationary(&instance.network, self.search.tau)?;
        if let Some(dir) = dump {
            let stem = dir.join(format!("sbm_d{di}_n{ni}_i{ii}"));
            let ids = instance.network.ids();
            write_edge_list(&instance.network, &stem.with_extension("tsv"))?;
            write_metadata(&instance.metadata, ids, &stem.with_extension("meta.tsv"))?;
            write_partition(&instance.planted, ids, &stem.with_extension("planted.tsv"))?;
        }
        self.etas
            .iter()
            .enumerate()
            .map(|(ei, &eta)| {
                let config = SearchConfig {
                    seed: search_seed(self.search.seed, di, ni, ei, ii),
                    ..self.search.config(eta)
                };
                let result = search(&instance.network, &flow, &instance.metadata, &config);
                Ok((ami(&result.partition, &instance.planted)?, result.partition.module_count()))
            })
            .collect()
    }

    /// Seeds of every dumped instance as CSV rows.
    pub fn seed_manifest(&self) -> Vec<[String; 6]> {
        let mut rows = Vec::new();
        for di in 0..self.deltas.len() {
            for ni in 0..self.noises.len() {
                for ii in 0..self.instances {
                    for ei in 0..self.etas.len() {
                        rows.push([
                            format!("sbm_d{di}_n{ni}_i{ii}"),
                            format_number(self.deltas[di]),
                            format_number(self.noises[ni]),
                            format_number(self.etas[ei]),
                            instance_seed(self.search.seed, di, ni, ii).to_string(),
                            search_seed(self.search.seed, di, ni, ei, ii).to_string(),
                        ]);
                    }
                }
            }
        }
        rows
    }
}

pub fn write_sbm<W: Write>(writer: W, rows: &[SbmRow]) -> Result<(), HarnessError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(SBM_HEADER)?;
    for row in rows {
        csv.write_record([
            format_number(row.delta),
            format_number(row.noise),
            format_number(row.eta),
            format_number(row.p_in),
            format_number(row.p_out),
            format_number(row.mean_ami),
            format_number(row.std_ami),
            format_number(row.mean_modules),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cmd_sbm(args: &SbmArgs) -> Result<Vec<SbmRow>, HarnessError> {
    let experiment = SbmExperiment {
        nodes: args.n,
        rho: args.rho,
        deltas: parse_grid(&args.delta_grid)?,
        noises: parse_grid(&args.noise_grid)?,
        etas: parse_grid(&args.eta_grid)?,
        instances: args.instances,
        search: args.search.clone(),
    };
    let rows = experiment.run(args.dump.as_deref())?;
    if let Some(dir) = &args.dump {
        let mut csv = csv::Writer::from_path(dir.join("seeds.csv"))?;
        csv.write_record(["instance", "delta", "noise", "eta", "graph_seed", "search_seed"])?;
        for row in experiment.seed_manifest() {
            csv.write_record(&row)?;
        }
        csv.flush()?;
    }
    write_sbm(output(args.out.as_deref())?, &rows)?;
    Ok(rows)
}

/// Names and square matrix of pairwise AMI values.
#[derive(Debug, Clone, PartialEq)]
pub struct AmiMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Metadata partitions named `NAME` followed by the found partitions `c_NAME`.
pub fn ami_matrix(
    network: &Network<f64>,
    flow: &FlowDistribution<f64>,
    metadata: &[(String, MetadataAnnotation)],
    eta: f64,
    search_args: &SearchArgs,
) -> Result<AmiMatrix, HarnessError> {
    check_eta(eta)?;
    let found: Vec<Partition> = metadata
        .par_iter()
        .map(|(_, labels)| search(network, flow, labels, &search_args.config(eta)).partition)
        .collect();
    let mut names: Vec<String> = metadata.iter().map(|(n, _)| n.clone()).collect();
    names.extend(metadata.iter().map(|(n, _)| format!("c_{n}")));
    let partitions: Vec<Partition> = metadata
        .iter()
        .map(|(_, m)| m.as_partition())
        .chain(found)
        .collect();
    let mut values = vec![vec![0.0; partitions.len()]; partitions.len()];
    for i in 0..partitions.len() {
        for j in i..partitions.len() {
            let value = ami(&partitions[i], &partitions[j])?;
            values[i][j] = value;
            values[j][i] = value;
        }
    }
    Ok(AmiMatrix { names, values })
}

pub fn write_ami_matrix<W: Write>(writer: W, matrix: &AmiMatrix) -> Result<(), HarnessError> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(matrix.names.iter().cloned());
    csv.write_record(&header)?;
    for (name, row) in matrix.names.iter().zip(&matrix.values) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|&v| format_number(v)));
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cmd_ami_matrix(args: &AmiMatrixArgs) -> Result<AmiMatrix, HarnessError> {
    let network = load_input(&args.input)?;
    let mut metadata = Vec::new();
    for entry in &args.metadata {
        let (name, path) = entry
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("expected NAME=PATH, got {entry:?}")))?;
        metadata.push((name.to_string(), load_metadata(Path::new(path), &network)?));
    }
    let flow = stationary(&network, args.search.tau)?;
    let matrix = ami_matrix(&network, &flow, &metadata, args.eta, &args.search)?;
    write_ami_matrix(output(args.out.as_deref())?, &matrix)?;
    Ok(matrix)
}

pub fn run(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Partition(args) => cmd_partition(args).map(drop),
        Command::Sweep(args) => cmd_sweep(args).map(drop),
        Command::Sbm(args) => cmd_sbm(args).map(drop),
        Command::AmiMatrix(args) => cmd_ami_matrix(args).map(drop),
    }
}
