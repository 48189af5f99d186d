//! Scaling and threshold sweeps behind `pcf bench`.

use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::corpus::{read_claims, read_knowledge_base, EngineConfig, TrustState};
use crate::engine::{implication_factor, Engine};
use crate::error::Result;
use crate::gen::{generate, GenSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub websites: usize,
    pub facts: usize,
    /// Parsing the serialized corpus and building the fact table.
    pub load_time: Duration,
    /// PCF assignment plus the fixed number of epochs.
    pub engine_time: Duration,
}

#[derive(Clone, Debug)]
pub struct ScalingOptions {
    pub claims_per_site: usize,
    pub corruption_rate: f64,
    pub epochs: u32,
    /// Each size is timed this many times and the median kept.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            claims_per_site: 10,
            corruption_rate: 0.3,
            epochs: 10,
            repeats: 3,
            seed: 0,
        }
    }
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[samples.len() / 2]
}

/// Times the pipeline on generated corpora of each size. The object count
/// tracks the website count, so every object keeps about `claims_per_site`
/// providers as the corpus grows.
pub fn scaling_sweep(
    sizes: &[usize],
    options: &ScalingOptions,
    engine: &Engine,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &websites in sizes {
        let corpus = generate(&GenSpec {
            n_websites: websites,
            n_objects: websites.max(options.claims_per_site),
            claims_per_site: options.claims_per_site,
            corruption_rate: options.corruption_rate,
            seed: options.seed,
        })?;
        let mut kb_bytes = Vec::new();
        corpus.write_kb(&mut kb_bytes).expect("writing to memory");
        let mut claim_bytes = Vec::new();
        corpus.write_claims(&mut claim_bytes).expect("writing to memory");

        let mut load_samples = Vec::with_capacity(options.repeats);
        let mut engine_samples = Vec::with_capacity(options.repeats);
        let mut facts = 0;
        for _ in 0..options.repeats.max(1) {
            let started = Instant::now();
            let kb = read_knowledge_base(kb_bytes.as_slice(), Path::new("<generated kb>"))?;
            let claims = read_claims(claim_bytes.as_slice(), Path::new("<generated claims>"))?;
            let state = TrustState::from_corpus(kb, &claims, EngineConfig::default());
            load_samples.push(started.elapsed());

            let started = Instant::now();
            let state = engine.assign_pcf(state);
            let (state, _) = engine.run(state, options.epochs, 0.0);
            engine_samples.push(started.elapsed());
            facts = state.facts.len();
        }
        rows.push(ScalingRow {
            websites,
            facts,
            load_time: median(load_samples),
            engine_time: median(engine_samples),
        });
    }
    Ok(rows)
}

/// Mean implication factor over every unordered pair of facts on the same
/// object, taking the lower fact id as the influenced fact. `None` when the
/// state has no such pair.
pub fn mean_implication_factor(state: &TrustState, epsilon: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for ids in state.object_groups().values() {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                sum += implication_factor(state.facts[a].pcf, state.facts[b].pcf, epsilon);
                pairs += 1;
            }
        }
    }
    (pairs > 0).then(|| sum / pairs as f64)
}

/// Inclusive `lo:hi:step` range of thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl EpsilonRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for EpsilonRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got {s:?}"));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("{v:?} is not a number: {e}"))
        };
        let range = EpsilonRange {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(range.step > 0.0) {
            return Err("step must be positive".into());
        }
        if !(0.0 <= range.lo && range.lo <= range.hi && range.hi <= 1.0) {
            return Err("need 0 <= lo <= hi <= 1".into());
        }
        Ok(range)
    }
}

pub fn epsilon_sweep(state: &TrustState, range: &EpsilonRange) -> Vec<(f64, Option<f64>)> {
    range
        .values()
        .into_iter()
        .map(|eps| (eps, mean_implication_factor(state, eps)))
        .collect()
}

pub fn write_scaling_csv<W: Write + ?Sized>(rows: &[ScalingRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "websites,facts,load_seconds,engine_seconds")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6}",
            r.websites,
            r.facts,
            r.load_time.as_secs_f64(),
            r.engine_time.as_secs_f64()
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write + ?Sized>(rows: &[(f64, Option<f64>)], out: &mut W) -> io::Result<()> {
    writeln!(out, "epsilon,mean_implication_factor")?;
    for (eps, mean) in rows {
        match mean {
            Some(m) => writeln!(out, "{eps:.4},{m:.9}")?,
            None => writeln!(out, "{eps:.4},")?,
        }
    }
    Ok(())
}
