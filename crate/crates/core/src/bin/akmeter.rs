use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use akmeter::kernel::{appendix_suite, COARSE_N};
use akmeter::measurement::{chi_square_test, sample_outcomes};
use akmeter::phase_space::PhaseSpaceDist;
use akmeter::report::{emit, emit_distribution, write_samples_csv, Format, MeasurementReport, Verdict};
use akmeter::scenario::{run_scenario_full, Scenario};

#[derive(Parser)]
#[command(name = "akmeter", version, about = "Arthurs-Kelly joint measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Sampling seed
    #[arg(long)]
    seed: Option<u64>,
    /// Reduced Planck constant
    #[arg(long)]
    hbar: Option<f64>,
    /// Number of lattice points per axis
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the report and distributions
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw Monte-Carlo outcomes from a scenario's outcome distribution
    Sample {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Number of draws; defaults to the scenario's [sampling] count
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every scenario in a file or directory and list failing verdicts
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Measurement-kernel checks over the Arthurs-Kelly families
    Kernels {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long = "grid-n", default_value_t = COARSE_N)]
        grid_n: usize,
    },
}

fn load(path: &Path, o: &Overrides) -> akmeter::Result<Scenario> {
    Scenario::load(path)?.with_overrides(o.seed, o.hbar, o.grid_n)
}

fn print_failures(label: &str, verdicts: &[&Verdict]) {
    for v in verdicts {
        eprintln!(
            "FAIL {label}: {} value={:.12e} target={:.12e} margin={:.3e}",
            v.name, v.value, v.target, v.margin
        );
    }
}

fn finish(label: &str, report: &MeasurementReport) -> ExitCode {
    let failures = report.failures();
    print_failures(label, &failures);
    if let Some(c) = report.chi_square.as_ref().filter(|c| !c.passed) {
        eprintln!("FAIL {label}: chi_square statistic={:.4} critical={:.4}", c.statistic, c.critical);
    }
    if report.all_passed() {
        println!("{label}: {} verdicts passed", report.verdicts.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn write_dist(dir: &Path, stem: &str, dist: &PhaseSpaceDist, format: Format) -> akmeter::Result<()> {
    emit_distribution(dist, format, &dir.join(format!("{stem}.{}", format.extension())))
}

fn run(cli: Cli) -> akmeter::Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            overrides,
        } => {
            let sc = load(&scenario, &overrides)?;
            let run = run_scenario_full(&sc)?;
            std::fs::create_dir_all(&out)?;
            emit(&run.report, Format::Json, &out.join("report.json"))?;
            write_dist(&out, "rho", &run.rho, format)?;
            write_dist(&out, "wigner_initial", &run.wigner_initial, format)?;
            if let Some(w) = &run.wigner_final {
                write_dist(&out, "wigner_final", w, format)?;
            }
            if let Some(s) = &run.samples {
                write_samples_csv(s, BufWriter::new(File::create(out.join("samples.csv"))?))?;
            }
            Ok(finish(&sc.name, &run.report))
        }
        Command::Sample {
            scenario,
            out,
            count,
            overrides,
        } => {
            let mut sc = load(&scenario, &overrides)?;
            let spec = sc
                .sampling
                .ok_or_else(|| akmeter::Error::Scenario("scenario has no [sampling] section".into()))?;
            sc.sampling = None;
            let run = run_scenario_full(&sc)?;
            let count = count.unwrap_or(spec.count);
            let samples = sample_outcomes(&run.rho, count, spec.seed)?;
            let t = chi_square_test(&run.rho, &samples, spec.significance)?;
            std::fs::create_dir_all(&out)?;
            write_samples_csv(&samples, BufWriter::new(File::create(out.join("samples.csv"))?))?;
            println!(
                "{}: {count} samples, seed {}, chi-square {:.4} (dof {}, critical {:.4}) {}",
                sc.name,
                spec.seed,
                t.statistic,
                t.dof,
                t.critical,
                if t.passed { "PASS" } else { "FAIL" }
            );
            Ok(if t.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify {
            scenario,
            out,
            overrides,
        } => {
            let mut paths = if scenario.is_dir() {
                std::fs::read_dir(&scenario)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                    .collect::<Vec<_>>()
            } else {
                vec![scenario]
            };
            paths.sort();
            let results: Vec<(PathBuf, akmeter::Result<MeasurementReport>)> = paths
                .into_par_iter()
                .map(|p| {
                    let r = load(&p, &overrides).and_then(|s| Ok(run_scenario_full(&s)?.report));
                    (p, r)
                })
                .collect();
            let mut ok = true;
            for (p, r) in &results {
                let label = p.display().to_string();
                match r {
                    Ok(report) => {
                        ok &= finish(&label, report) == ExitCode::SUCCESS;
                        if let Some(dir) = &out {
                            std::fs::create_dir_all(dir)?;
                            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
                            emit(report, Format::Json, &dir.join(format!("{stem}.json")))?;
                        }
                    }
                    Err(e) => {
                        ok = false;
                        eprintln!("ERROR {label}: {e}");
                    }
                }
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Kernels { out, hbar, grid_n } => {
            let verdicts = appendix_suite(grid_n, hbar)?;
            for v in &verdicts {
                println!(
                    "{} {}: value={:.12e} target={:.12e} margin={:.3e}",
                    if v.passed { "PASS" } else { "FAIL" },
                    v.name,
                    v.value,
                    v.target,
                    v.margin
                );
            }
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&verdicts)?;
                std::fs::write(path, text + "\n")?;
            }
            Ok(if verdicts.iter().all(|v| v.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("AKMETER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: AKMETER_THREADS ignored: {e}");
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
