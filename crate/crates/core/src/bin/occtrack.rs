use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use occtrack::experiment::{
    run_detections, run_highway, simulate, write_simulation_csv, DetectionExperiment,
    ExperimentReport, HighwayExperiment,
};
use occtrack::foursquare::{classify_outcomes, posterior_table, render_table};
use occtrack::highway::SenseMode;
use occtrack::metrics::mot::{load_mot_detections, write_mot};
use occtrack::occlusion::StrategyKind;
use occtrack::par::ExecMode;
use occtrack::{selftest, Error, Result};

#[derive(Parser)]
#[command(
    name = "occtrack",
    version,
    about = "Multi-object tracking with occlusion-aware PMB filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Occlusion model of the tracker.
    #[arg(long)]
    occlusion: Option<StrategyKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the four-square posterior table.
    Foursquare {
        #[arg(long)]
        json: bool,
    },
    /// Simulate the highway scene and score trackers with GOSPA.
    Highway {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
        /// Occlusion model of the simulated sensor.
        #[arg(long, value_parser = parse_sim)]
        sim: Option<SenseMode>,
        /// Also write readings and ground truth as CSV.
        #[arg(long)]
        readings_csv: Option<PathBuf>,
        /// Print an aligned text summary instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Track pedestrians from a MOT detection file; writes MOT result rows.
    TrackDets {
        #[command(flatten)]
        common: Common,
        /// MOT detection CSV.
        #[arg(long)]
        dets: PathBuf,
        /// Where to write the JSON run summary (stderr when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the enumeration oracles.
    Selftest {
        #[arg(long)]
        json: bool,
    },
}

fn parse_sim(s: &str) -> std::result::Result<SenseMode, String> {
    match s {
        "owo" => Ok(SenseMode::Owo),
        "mwo" => Ok(SenseMode::Mwo),
        _ => Err(format!("expected owo or mwo, got {s:?}")),
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_json::from_reader(io::BufReader::new(File::open(p)?))?),
        None => Ok(T::default()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(mut w: impl Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn summary(report: &ExperimentReport) -> String {
    let e = &report.experiment;
    let mut s = format!(
        "sim {:?}, {} steps, seed {}, {} readings\n{:<12}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
        e.sim,
        e.steps,
        e.seed,
        report.readings,
        "tracker",
        "gospa",
        "loc",
        "missed",
        "false",
        "card.ratio"
    );
    for t in &report.trackers {
        s.push_str(&format!(
            "{:<12}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
            t.strategy.name(),
            fmt_opt(t.mean_gospa),
            fmt_opt(t.mean_localization),
            fmt_opt(t.mean_missed),
            fmt_opt(t.mean_false),
            fmt_opt(t.cardinality_ratio)
        ));
    }
    s
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Foursquare { json } => {
            let mut w = output(None)?;
            if json {
                #[derive(Serialize)]
                struct Out {
                    table: Vec<occtrack::foursquare::TableRow>,
                    possibility: Vec<(String, occtrack::foursquare::Possibility)>,
                }
                let out = Out {
                    table: posterior_table(),
                    possibility: classify_outcomes()
                        .into_iter()
                        .map(|(o, p)| (o.to_string(), p))
                        .collect(),
                };
                write_json(w, &out)?;
            } else {
                write!(w, "{}", render_table())?;
                w.flush()?;
            }
        }
        Command::Highway {
            common,
            steps,
            sim,
            readings_csv,
            text,
        } => {
            let mut exp: HighwayExperiment = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                exp.seed = s;
            }
            if let Some(n) = steps {
                exp.steps = n;
            }
            if let Some(m) = sim {
                exp.sim = m;
            }
            if let Some(k) = common.occlusion {
                exp.strategies = vec![k];
            }
            if let Some(path) = readings_csv {
                let run = simulate(&exp.world, exp.steps, exp.sim, exp.seed)?;
                write_simulation_csv(BufWriter::new(File::create(path)?), &run)?;
            }
            let report = run_highway(&exp, ExecMode::Parallel)?;
            let mut w = output(common.out.as_deref())?;
            if text {
                write!(w, "{}", summary(&report))?;
                w.flush()?;
            } else {
                write_json(w, &report)?;
            }
        }
        Command::TrackDets {
            common,
            dets,
            report,
        } => {
            let mut exp: DetectionExperiment = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                exp.seed = s;
            }
            if let Some(k) = common.occlusion {
                exp.occlusion = k;
            }
            let frames = load_mot_detections(&dets)?;
            let (summary, rows) = run_detections(&exp, &frames)?;
            write_mot(output(common.out.as_deref())?, &rows)?;
            match report {
                Some(p) => write_json(BufWriter::new(File::create(p)?), &summary)?,
                None => write_json(io::stderr().lock(), &summary)?,
            }
        }
        Command::Selftest { json } => {
            let checks = selftest::run_all();
            let ok = checks.iter().all(|c| c.passed);
            let mut w = output(None)?;
            if json {
                write_json(w, &checks)?;
            } else {
                for c in &checks {
                    writeln!(
                        w,
                        "{} {:<46}{}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    )?;
                }
                w.flush()?;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("occtrack: {e}");
            if let Error::InvalidConfig(_) | Error::Json(_) = e {
                eprintln!("check the --config file against the documented schema");
            }
            ExitCode::FAILURE
        }
    }
}
