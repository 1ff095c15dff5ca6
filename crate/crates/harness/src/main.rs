use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use whomp::metrics::{homogeneity_report, normalized_entropy, HomogeneityReport};
use whomp::{partition_subgroups, Dataset, Method, Partition, Rng, SubgroupRequest};
use whomp_harness::config::{ExperimentConfig, ExperimentKind, PartitionerSettings, Scale};
use whomp_harness::experiments::{headline_metric, run_table, write_table};
use whomp_harness::generators::{write_embedding_csv, write_survey_csv};
use whomp_harness::manifest::RunManifest;
use whomp_harness::suite::{run_property_suite, SuiteOptions, SuiteReport};

#[derive(Parser)]
#[command(name = "whomp", version, about = "Equal-size subgroups that match the whole sample in distribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Numeric CSV, one row per unit.
    #[arg(long)]
    input: PathBuf,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Column holding integer class labels (name, or index without a header).
    #[arg(long)]
    label_column: Option<String>,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        Dataset::from_csv(&self.input, !self.no_header, self.label_column.as_deref())
            .with_context(|| format!("loading {}", self.input.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split a CSV into subgroups and write `id,group` rows.
    Partition {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "whomp_random")]
        method: String,
        #[arg(long)]
        groups: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Reject row counts not divisible by the group count.
        #[arg(long)]
        strict: bool,
    },
    /// Homogeneity diagnostics of an existing partition.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        /// `id,group` CSV as written by `partition`.
        #[arg(long)]
        partition: PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Also write per-subgroup CSV rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite.
    Selftest {
        #[arg(long, default_value = "default")]
        scale: Scale,
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
        /// Negative control: flip the sign of every W2 distance.
        #[arg(long)]
        inject_fault: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write a synthetic stand-in dataset.
    Generate {
        #[arg(value_enum)]
        kind: Synthetic,
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Synthetic {
    /// Survey-like table (score, age, gender, elapse).
    Survey,
    /// Labelled 2-D clusters (x, y, label).
    Embedding,
}

/// Failures that map to exit code 2.
struct PropertyFailure;

fn print_suite(report: &SuiteReport) {
    for r in &report.results {
        println!(
            "{} {:<34} {:>8.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        );
    }
}

fn run_suite(opts: SuiteOptions, json: Option<&PathBuf>) -> Result<std::result::Result<(), PropertyFailure>> {
    let report = run_property_suite(&opts);
    print_suite(&report);
    if let Some(path) = json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.all_passed() { Ok(()) } else { Err(PropertyFailure) })
}

fn align(data: &Dataset, ids: &[usize], part: &Partition) -> Result<Partition> {
    if ids.len() != data.len() {
        bail!("partition has {} rows but the data has {}", ids.len(), data.len());
    }
    let mut assignment = vec![usize::MAX; data.len()];
    for (&id, &g) in ids.iter().zip(part.assignment()) {
        let row = data
            .ids()
            .iter()
            .position(|&x| x == id)
            .with_context(|| format!("partition id {id} is not a data row"))?;
        if assignment[row] != usize::MAX {
            bail!("id {id} appears twice in the partition");
        }
        assignment[row] = g;
    }
    Ok(Partition::from_assignment(assignment, part.num_groups())?)
}

fn run(cli: Cli) -> Result<std::result::Result<(), PropertyFailure>> {
    match cli.command {
        Command::Partition {
            input,
            method,
            groups,
            seed,
            out,
            strict,
        } => {
            let data = input.load()?;
            let method: Method = method.parse()?;
            let mut cfg = PartitionerSettings::default().to_config();
            cfg.strict_divisibility = strict;
            let req = SubgroupRequest {
                num_subgroups: groups,
                seed,
                method,
            };
            let part = partition_subgroups(&data, &req, &cfg)?;
            part.write_csv(&out, data.ids())?;
            eprintln!("{} rows -> {} subgroups of sizes {:?}", data.len(), groups, part.sizes());
        }
        Command::Evaluate {
            input,
            partition,
            json,
            csv,
        } => {
            let data = input.load()?;
            let (ids, part) = Partition::read_csv(&partition)?;
            let part = align(&data, &ids, &part)?;
            let report = homogeneity_report(&data, &part)?;
            let mut value = serde_json::to_value(&report)?;
            if let Some(labels) = data.labels() {
                let classes = labels.iter().copied().max().unwrap_or(0).max(0) as usize + 1;
                value["normalized_entropy"] = serde_json::to_value(normalized_entropy(labels, &part, classes)?)?;
            }
            let text = serde_json::to_string_pretty(&value)?;
            match json {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
            if let Some(p) = csv {
                let mut w = ::csv::Writer::from_path(p)?;
                w.write_record(HomogeneityReport::CSV_HEADER)?;
                for row in report.csv_rows() {
                    w.write_record(&row)?;
                }
                w.flush()?;
            }
        }
        Command::Experiment { config, out } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            if cfg.kind == ExperimentKind::PropertySuite {
                let opts = SuiteOptions {
                    scale: cfg.scale,
                    seed: cfg.seed,
                    inject_fault: false,
                };
                let json = cfg.output_dir.as_ref().map(|d| d.join("property_suite.json"));
                if let Some(d) = &cfg.output_dir {
                    std::fs::create_dir_all(d)?;
                    RunManifest::new(&cfg).write(d)?;
                }
                return run_suite(opts, json.as_ref());
            }
            let table = run_table(&cfg)?;
            print!("{}", table.render(headline_metric(cfg.kind)));
            if let Some(dir) = &cfg.output_dir {
                write_table(&table, dir)?;
                RunManifest::new(&cfg).write(dir)?;
                eprintln!("wrote {}", dir.display());
            }
        }
        Command::Selftest {
            scale,
            seed,
            inject_fault,
            json,
        } => {
            return run_suite(
                SuiteOptions {
                    scale,
                    seed,
                    inject_fault,
                },
                json.as_ref(),
            );
        }
        Command::Generate { kind, rows, seed, out } => {
            let mut rng = Rng::new(seed);
            match kind {
                Synthetic::Survey => write_survey_csv(&out, rows, &mut rng)?,
                Synthetic::Embedding => write_embedding_csv(&out, rows, &mut rng)?,
            }
        }
    }
    Ok(Ok(()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(PropertyFailure)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
