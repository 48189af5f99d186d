//! The `pcf` command line.
//!
//! Exit codes: 0 success, 2 input error, 3 the requested method has not
//! been computed for the state.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::baselines::{pcf_fresh_run, refresh_baselines, truthfinder_run, voting_run, Method};
use crate::bench::{self, EpsilonRange, ScalingOptions};
use crate::corpus::{load_claims, load_knowledge_base, EngineConfig, TrustState};
use crate::engine::Engine;
use crate::error::Error;
use crate::gen::{generate, GenSpec};
use crate::par::Execution;
use crate::serp;

#[derive(Debug, Parser)]
#[command(name = "pcf", version, about = "Rank websites by the correctness of the facts they publish")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a knowledge base and a claims table into a fresh state file.
    Ingest {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Run engine epochs on a state file and refresh the baselines.
    Run {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        epochs: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the ranked result page for an ISBN or title fragment as TSV.
    Query {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        needle: String,
        #[arg(long, default_value = "pcf")]
        method: Method,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Print a per-website trust table for all three methods as CSV.
    Compare {
        #[arg(long)]
        state: PathBuf,
    },
    /// Write a seeded synthetic knowledge base and claims table.
    Gen {
        #[arg(long)]
        websites: usize,
        #[arg(long)]
        objects: usize,
        #[arg(long)]
        claims_per_site: usize,
        #[arg(long)]
        corruption: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_kb: PathBuf,
        #[arg(long)]
        out_claims: PathBuf,
    },
    /// Time the pipeline across corpus sizes and sweep the threshold.
    Bench {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
        websites_list: Vec<usize>,
        #[arg(long, default_value = "0:0.5:0.05")]
        sweep_epsilon: EpsilonRange,
        #[arg(long, default_value_t = 10)]
        claims_per_site: usize,
        #[arg(long, default_value_t = 10)]
        epochs: u32,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Stale(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            message: format!("writing output: {e}"),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { kb, claims, state } => ingest(&kb, &claims, &state, out),
        Command::Run {
            state,
            epochs,
            epsilon,
            tol,
        } => run(&state, epochs, epsilon, tol, out),
        Command::Query {
            state,
            needle,
            method,
            top,
        } => {
            let state = TrustState::load(&state)?;
            let rows = serp::query(&state, &needle, method, top)?;
            serp::write_tsv(&rows, out)?;
            Ok(())
        }
        Command::Compare { state } => compare(&TrustState::load(&state)?, out),
        Command::Gen {
            websites,
            objects,
            claims_per_site,
            corruption,
            seed,
            out_kb,
            out_claims,
        } => {
            let corpus = generate(&GenSpec {
                n_websites: websites,
                n_objects: objects,
                claims_per_site,
                corruption_rate: corruption,
                seed,
            })?;
            corpus.save(&out_kb, &out_claims)?;
            writeln!(
                out,
                "books={} listings={} corrupted={}",
                corpus.books.len(),
                corpus.listings.len(),
                corpus.listings.iter().filter(|l| l.corrupted).count()
            )?;
            Ok(())
        }
        Command::Bench {
            state,
            websites_list,
            sweep_epsilon,
            claims_per_site,
            epochs,
            repeats,
        } => {
            let state = TrustState::load(&state)?;
            let options = ScalingOptions {
                claims_per_site,
                epochs,
                repeats,
                seed: state.config.seed,
                ..ScalingOptions::default()
            };
            let rows = bench::scaling_sweep(&websites_list, &options, &Engine::sequential())?;
            bench::write_scaling_csv(&rows, out)?;
            writeln!(out)?;
            bench::write_sweep_csv(&bench::epsilon_sweep(&state, &sweep_epsilon), out)?;
            Ok(())
        }
    }
}

fn ingest(
    kb: &std::path::Path,
    claims: &std::path::Path,
    state_path: &std::path::Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let kb = load_knowledge_base(kb)?;
    let claims = load_claims(claims)?;
    let engine = Engine::default();
    let state = engine.assign_pcf(TrustState::from_corpus(kb, &claims, EngineConfig::default()));
    state.save(state_path)?;
    writeln!(
        out,
        "objects={} websites={} facts={} unknown_object_facts={}",
        state.kb.len(),
        state.websites.len(),
        state.facts.len(),
        state.facts.iter().filter(|f| f.unknown_object).count()
    )?;
    Ok(())
}

fn run(
    state_path: &std::path::Path,
    epochs: Option<u32>,
    epsilon: Option<f64>,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut state = TrustState::load(state_path)?;
    if let Some(e) = epsilon {
        state.config.epsilon = e;
    }
    if let Some(t) = tol {
        state.config.convergence_tol = t;
    }
    if let Some(n) = epochs {
        state.config.max_epochs = n;
    }
    state.config.validate().map_err(|e| input_error(e.to_string()))?;

    let engine = Engine::default();
    let (max_epochs, tol) = (state.config.max_epochs, state.config.convergence_tol);
    let (mut state, reports) = engine.run(state, max_epochs, tol);
    refresh_baselines(&mut state, Execution::default());
    state.save(state_path)?;

    for r in &reports {
        writeln!(
            out,
            "epoch={} max_trust_delta={:.3e} converged={} trust_ms={:.3} confidence_ms={:.3} implication_ms={:.3}",
            r.epoch,
            r.max_trust_delta,
            r.converged,
            r.trust_time.as_secs_f64() * 1e3,
            r.confidence_time.as_secs_f64() * 1e3,
            r.implication_time.as_secs_f64() * 1e3,
        )?;
    }
    let converged = reports.last().is_some_and(|r| r.converged);
    writeln!(out, "epochs_run={} converged={converged}", reports.len())?;
    Ok(())
}

fn compare(state: &TrustState, out: &mut dyn Write) -> Result<(), CliError> {
    let config = &state.config;
    let exec = Execution::default();
    let voting = voting_run(state);
    let truthfinder = truthfinder_run(state, config, exec);
    let pcf = pcf_fresh_run(state, config, exec);

    let mut csv = csv::Writer::from_writer(out);
    let header = ["url", Method::Voting.as_str(), Method::Truthfinder.as_str(), Method::Pcf.as_str()];
    csv.write_record(header).map_err(|e| input_error(e.to_string()))?;
    let mut urls: Vec<&str> = state.websites.iter().map(|w| w.url.as_str()).collect();
    urls.sort_unstable();
    for url in urls {
        let cell = |r: &crate::baselines::BaselineResult| format!("{:.6}", r.trust_of(url).unwrap_or(0.0));
        csv.write_record([url.to_owned(), cell(&voting), cell(&truthfinder), cell(&pcf)])
            .map_err(|e| input_error(e.to_string()))?;
    }
    csv.flush()?;
    Ok(())
}
