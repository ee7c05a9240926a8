use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hfc_core::mitigation::CalibrationShots;
use hfc_core::noise::{NoiseModel, PRESETS};
use hfc_core::rdm::{occupation_numbers, Pipeline};
use hfc_core::statevector::bitstring;
use hfc_core::workbench::{
    load_experiments, report, run_records, shot_noise_study, summarize, Experiment, ExperimentConfig,
    MoleculeDataset,
};
use hfc_core::{HfcError, Spin};

#[derive(Parser)]
#[command(name = "hfc", version, about = "Hyperfine coupling emulation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// Shipped molecule: oh, no or oh+.
    #[arg(long, default_value = "oh")]
    molecule: String,
    /// Dataset JSON file to use instead of a shipped molecule.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

impl DatasetArgs {
    fn load(&self) -> Result<MoleculeDataset> {
        Ok(match &self.dataset {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                MoleculeDataset::from_json(&text)?
            }
            None => MoleculeDataset::load(&self.molecule)?,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the ansatz state and print its amplitudes.
    Simulate {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Also print the exact RDM, occupation numbers and HFCs.
        #[arg(long)]
        exact: bool,
        /// Write the full state vector to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run independent noisy emulations of the measurement campaign.
    Emulate {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Steps joined by '+': em, ps, puri, es; or raw.
        #[arg(long, default_value = "em+ps+es")]
        pipeline: Pipeline,
        #[arg(long, default_value_t = 15)]
        runs: usize,
        /// Preset name or a JSON noise-model file.
        #[arg(long, default_value = "torino-like")]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shots per measured string; defaults to the dataset value.
        #[arg(long)]
        shots: Option<u64>,
        /// Shots per calibration circuit; defaults to the shots per string.
        #[arg(long, conflicts_with = "exact_calibration")]
        calibration_shots: Option<u64>,
        /// Use expected calibration distributions instead of sampling.
        #[arg(long)]
        exact_calibration: bool,
        /// Filter tolerance on occupation numbers.
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        #[arg(long)]
        twirl_instances: Option<usize>,
        /// Write the experiment record JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noiseless sampling statistics at the dataset shot counts.
    ShotNoise {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the study JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render tables and plot data from saved experiment files.
    Report {
        /// Directory of experiment JSON files.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn noise_model(arg: &str) -> Result<NoiseModel> {
    if PRESETS.contains(&arg) {
        return Ok(NoiseModel::preset(arg)?);
    }
    let path = Path::new(arg);
    if !path.exists() {
        anyhow::bail!("'{arg}' is neither a noise preset ({}) nor a file", PRESETS.join(", "));
    }
    let nm: NoiseModel = serde_json::from_str(&fs::read_to_string(path)?)
        .with_context(|| format!("parsing noise model {}", path.display()))?;
    nm.validate()?;
    Ok(nm)
}

fn write_json(path: &Path, mut text: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(ds: &MoleculeDataset, exact: bool, dump: Option<&Path>) -> Result<()> {
    let s = ds.state()?;
    let n = s.n_qubits();
    let mut amps: Vec<(u64, f64)> = s
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-6)
        .map(|(i, a)| (i as u64, a.re))
        .collect();
    amps.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    println!("{} ({} qubits, {} parameters)", ds.display_name, n, ds.circuit.n_params());
    for (b, a) in amps {
        println!("  |{}>  {a:+.6}", bitstring(b, n));
    }
    if exact {
        let d = ds.exact_rdm()?;
        let occ = occupation_numbers(&d);
        for spin in Spin::BOTH {
            println!("{spin} occupations: {:?}", occ.block(spin).iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>());
        }
        for nuc in &ds.nuclei {
            let active = ds.active_hfc(nuc, &d)?;
            println!(
                "{}: active {active:.3} MHz, inactive {:.3} MHz, total {:.3} MHz",
                nuc.label,
                nuc.inactive_offset,
                active + nuc.inactive_offset
            );
        }
    }
    if let Some(p) = dump {
        fs::write(p, s.dump()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn print_summary(exp: &Experiment) {
    let Some(sum) = &exp.summary else { return };
    println!("{} {}: {}/{} runs accepted", exp.molecule, sum.pipeline, sum.accepted, sum.n_runs);
    for r in &sum.rejections {
        for v in &r.violations {
            println!("  run {} rejected: {} occupation {} = {:.5}", r.run, v.spin, v.index, v.eigenvalue);
        }
    }
    for n in &sum.nuclei {
        println!(
            "  {}: {:.2} +- {:.2} MHz (exact {:.2}, tabulated {:.1})",
            n.nucleus, n.mean, n.std, n.exact_total, n.reference_total
        );
    }
    println!("  mean diagonal bias {:.3e}", sum.mean_diagonal_bias);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { dataset, exact, dump } => simulate(&dataset.load()?, exact, dump.as_deref()),
        Command::Emulate {
            dataset,
            pipeline,
            runs,
            noise,
            seed,
            shots,
            calibration_shots,
            exact_calibration,
            epsilon,
            twirl_instances,
            out,
        } => {
            let ds = dataset.load()?;
            let mut cfg = ExperimentConfig::new(pipeline, runs, noise_model(&noise)?, seed);
            cfg.shots_per_string = shots;
            cfg.calibration = if exact_calibration {
                Some(CalibrationShots::Exact)
            } else {
                calibration_shots.map(CalibrationShots::Shots)
            };
            if let Some(e) = epsilon {
                cfg.epsilon = e;
            }
            if let Some(k) = twirl_instances {
                cfg.twirl_instances = k;
            }
            let records = run_records(&ds, &cfg)?;
            let summary = summarize(&ds, &records);
            let exp = Experiment {
                molecule: ds.name.clone(),
                config: cfg,
                records,
                summary: summary.as_ref().ok().cloned(),
            };
            // rejected batches are still worth keeping
            if let Some(p) = &out {
                write_json(p, serde_json::to_string_pretty(&exp)?)?;
            }
            print_summary(&exp);
            summary?;
            Ok(())
        }
        Command::ShotNoise { dataset, reps, seed, out } => {
            let ds = dataset.load()?;
            let study = shot_noise_study(&ds, reps, seed)?;
            println!("{}: {} repetitions, {} shots per string", study.molecule, study.n_reps, study.shots_per_string);
            for r in &study.rows {
                println!(
                    "  {}: mean {:.3} MHz (exact {:.3}), std {:.4} MHz (tabulated {}), standard error {:.4}",
                    r.nucleus, r.mean, r.exact_total, r.std, r.reference_std, r.std_error
                );
            }
            if let Some(p) = &out {
                write_json(p, serde_json::to_string_pretty(&study)?)?;
            }
            Ok(())
        }
        Command::Report { input, out } => {
            let exps = load_experiments(&input)?;
            let rep = report(&exps)?;
            for p in rep.write_to(&out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<HfcError>() {
        Some(HfcError::AllRunsRejected { .. }) => 2,
        Some(HfcError::SelfCheck { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // keep exit code 2 for rejected batches
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
