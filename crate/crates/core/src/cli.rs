//! Command-line driver. Exit status: 0 success, 1 runtime failure, 2 usage
//! or configuration error.

use crate::config::{ConfigError, RunConfig};
use crate::evolution::{load_checkpoint, save_checkpoint, CheckpointError, Evolution, EvolutionError, GaConfig};
use crate::fitness::{genome_fitness, FitnessBreakdown};
use crate::genome::{decode, encode, Preset};
use crate::interpreter::DEFAULT_CLIP;
use crate::serial::fmt_f64;
use crate::tasks::{default_data_dir, PreparedTask, TaskError, TaskSpec};
use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "evo-opt", version, about = "Evolve optimizers as genomes of primitive update terms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the genetic algorithm described by a config file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Report the fitness breakdown of one genome file.
    Eval {
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "blobs")]
        tasks: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Evaluate presets side by side and write a CSV table.
    Compare {
        #[arg(long, value_delimiter = ',')]
        presets: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "blobs")]
        tasks: Vec<String>,
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Write a built-in optimizer in the genome file format.
    ExportPreset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::Config(_) | EvolutionError::Task(_) => CliError::Usage(e.to_string()),
            EvolutionError::Checkpoint(CheckpointError::Io { .. }) | EvolutionError::Evaluation { .. } => {
                CliError::Runtime(e.to_string())
            }
            EvolutionError::Checkpoint(_) => CliError::Usage(e.to_string()),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evolve { config, out, resume, jobs } => cmd_evolve(&config, out.as_deref(), resume.as_deref(), jobs),
        Command::Eval { genome, tasks, seeds, steps, data_dir } => {
            cmd_eval(&genome, &tasks, seeds, steps, data_dir.as_deref())
        }
        Command::Compare { presets, tasks, seeds, steps, out, data_dir } => {
            cmd_compare(&presets, &tasks, seeds, steps, &out, data_dir.as_deref())
        }
        Command::ExportPreset { name, out } => cmd_export_preset(&name, &out),
    }
}

fn print_breakdown(label: &str, fitness: &FitnessBreakdown) {
    println!("{label}: aggregate fitness {}", fmt_f64(fitness.aggregate));
    for (task, mean) in &fitness.per_task_mean {
        println!("  {task}: {}", fmt_f64(*mean));
    }
}

pub fn cmd_evolve(
    config_path: &Path,
    out: Option<&Path>,
    resume: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set out_dir".into()))?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;

    let ga = config.ga.clone();
    let mut evolution = match resume {
        Some(path) => {
            let ckpt = load_checkpoint(path, &ga.digest()).map_err(|e| CliError::Usage(e.to_string()))?;
            Evolution::resume(ga, ckpt)?
        }
        None => Evolution::new(ga)?,
    };
    if let Some(jobs) = jobs {
        evolution = evolution.with_jobs(jobs);
    }

    let every = config.checkpoint_every;
    let ckpt_path = out_dir.join("checkpoint.json");
    let total = evolution.config().generations;
    evolution.run_until(total, |evo| {
        let r = evo.log().generations.last().expect("a generation was just logged");
        eprintln!("generation {:>3}: best {:.4}  mean {:.4}", r.generation, r.best_fitness, r.mean_fitness);
        if every > 0 && (evo.generation() % every == 0 || evo.is_finished()) {
            save_checkpoint(&evo.checkpoint(), &ckpt_path)?;
        }
        Ok(())
    })?;

    let result = evolution.result();
    write(&out_dir.join("log.csv"), &result.log.to_csv())?;
    write(&out_dir.join("best_genome.json"), &encode(&result.best))?;
    write(&out_dir.join("best_fitness.json"), &result.best_fitness.to_json())?;
    print_breakdown(&format!("best genome (generation {})", result.best_generation), &result.best_fitness);
    Ok(())
}

fn prepare_tasks(
    names: &[String],
    steps: Option<usize>,
    data_dir: Option<&Path>,
) -> Result<Vec<PreparedTask>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage("no tasks given".into()));
    }
    let dir = data_dir.map(Path::to_path_buf).unwrap_or_else(default_data_dir);
    names
        .iter()
        .map(|name| {
            let mut spec = TaskSpec::builtin(name)?;
            if let Some(s) = steps {
                spec = spec.with_steps(s);
            }
            Ok(spec.prepare(&dir)?)
        })
        .collect()
}

fn seed_list(count: usize) -> Result<Vec<u64>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    Ok(GaConfig { seeds_per_eval: count, ..GaConfig::default() }.eval_seeds())
}

pub fn cmd_eval(
    genome_path: &Path,
    tasks: &[String],
    seeds: usize,
    steps: Option<usize>,
    data_dir: Option<&Path>,
) -> Result<(), CliError> {
    let text =
        fs::read_to_string(genome_path).map_err(|e| CliError::Usage(format!("{}: {e}", genome_path.display())))?;
    let genome = decode(&text).map_err(|e| CliError::Usage(format!("{}: {e}", genome_path.display())))?;
    let tasks = prepare_tasks(tasks, steps, data_dir)?;
    let seeds = seed_list(seeds)?;
    let fitness =
        genome_fitness(&genome, &tasks, &seeds, DEFAULT_CLIP).map_err(|e| CliError::Runtime(e.to_string()))?;
    print!("{}", fitness.to_json());
    Ok(())
}

pub fn cmd_compare(
    presets: &[String],
    tasks: &[String],
    seeds: usize,
    steps: Option<usize>,
    out: &Path,
    data_dir: Option<&Path>,
) -> Result<(), CliError> {
    if presets.is_empty() {
        return Err(CliError::Usage("no presets given".into()));
    }
    let presets: Vec<Preset> = presets
        .iter()
        .map(|p| p.parse::<Preset>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let tasks = prepare_tasks(tasks, steps, data_dir)?;
    let seeds = seed_list(seeds)?;

    let mut csv = String::from("optimizer");
    for t in &tasks {
        csv.push(',');
        csv.push_str(t.name());
    }
    csv.push_str(",overall\n");
    for p in presets {
        let f =
            genome_fitness(&p.genome(), &tasks, &seeds, DEFAULT_CLIP).map_err(|e| CliError::Runtime(e.to_string()))?;
        csv.push_str(p.name());
        for t in &tasks {
            csv.push(',');
            csv.push_str(&fmt_f64(f.per_task_mean[t.name()]));
        }
        csv.push(',');
        csv.push_str(&fmt_f64(f.aggregate));
        csv.push('\n');
        print_breakdown(p.name(), &f);
    }
    write(out, &csv)
}

pub fn cmd_export_preset(name: &str, out: &Path) -> Result<(), CliError> {
    let preset: Preset = name.parse().map_err(|e: crate::genome::GenomeError| CliError::Usage(e.to_string()))?;
    write(out, &encode(&preset.genome()))
}

