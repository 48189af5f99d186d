//! The trust / confidence / implication epoch.
//!
//! One epoch runs three stages in order:
//!
//! 1. website trust: the mean claim PCF for a website whose trust is still
//!    zero, otherwise the mean adjusted confidence of its facts;
//! 2. fact confidence `s = 1 - prod(1 - t(w))` over the providers, and its
//!    score `-ln(1 - s)`;
//! 3. implication between facts on the same object, giving the adjusted
//!    confidence `s'`, damped back into `[0, 1]`, and its score.
//!
//! Implication is recomputed from the raw confidence every epoch; the damped
//! `s'` is what the next epoch's trust average consumes.

use std::time::{Duration, Instant};

use crate::corpus::{FactRecord, TrustState};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::similarity;

/// Absolute tolerance for the `delta == epsilon` case.
pub const CASE_TWO_TOLERANCE: f64 = 1e-9;

/// Which claim-versus-truth score populates `FactRecord::pcf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Similarity {
    /// Substring-gated length ratio.
    Substring,
    /// First/middle/last weighted name agreement.
    WeightedName,
}

/// Influence of `source_fact` on `target_fact` for one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicationTerm {
    pub source_fact: usize,
    pub target_fact: usize,
    /// `p(target) - p(source)`.
    pub delta: f64,
    pub factor: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: u64,
    pub max_trust_delta: f64,
    pub converged: bool,
    pub trust_time: Duration,
    pub confidence_time: Duration,
    pub implication_time: Duration,
}

/// Fills `pcf` for every fact. Facts on unknown objects get 0.
pub fn assign_pcf(mut state: TrustState, similarity: Similarity, exec: Execution) -> TrustState {
    let kb = &state.kb;
    let pcfs = par::map_indexed(exec, &state.facts, |_, fact| match kb.get(&fact.object) {
        None => 0.0,
        Some(truth) => match similarity {
            Similarity::Substring => similarity::fact_pcf(&fact.authors, &truth.authors),
            Similarity::WeightedName => similarity::tf_name_score(&fact.authors, &truth.authors),
        },
    });
    for (fact, pcf) in state.facts.iter_mut().zip(pcfs) {
        fact.pcf = pcf;
    }
    state
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// New trust for every website, in id order.
pub fn update_trust(state: &TrustState, exec: Execution) -> Vec<f64> {
    par::map_indexed(exec, &state.websites, |_, site| {
        let facts = site.fact_ids.iter().map(|&id| &state.facts[id]);
        if site.trust == 0.0 {
            mean(facts.filter(|f| !f.unknown_object).map(|f| f.pcf))
        } else {
            mean(facts.map(|f| f.adjusted_confidence))
        }
    })
}

/// `1 - prod(1 - t)` over provider trusts, capped at `1 - clamp`.
pub fn fact_confidence(provider_trusts: impl IntoIterator<Item = f64>, clamp: f64) -> f64 {
    let distrust: f64 = provider_trusts.into_iter().map(|t| 1.0 - t).product();
    (1.0 - distrust).clamp(0.0, 1.0 - clamp)
}

/// `-ln(1 - s)`, defined for `s` in `[0, 1)`.
pub fn confidence_score(s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain {
            function: "confidence_score",
            value: s,
        });
    }
    Ok(-(1.0 - s).ln())
}

/// Same log form as [`confidence_score`], applied to the adjusted confidence.
pub fn adjusted_score(s_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s_prime) {
        return Err(Error::Domain {
            function: "adjusted_score",
            value: s_prime,
        });
    }
    Ok(-(1.0 - s_prime).ln())
}

fn is_case_two(delta: f64, epsilon: f64) -> bool {
    delta > 0.0 && (delta - epsilon).abs() < CASE_TWO_TOLERANCE
}

/// How strongly a fact with PCF `p1` is influenced by one with PCF `p2`.
///
/// `delta == epsilon` yields `epsilon`; `delta == 0` also yields `epsilon`;
/// everything else yields `|epsilon - delta|`.
pub fn implication_factor(p1: f64, p2: f64, epsilon: f64) -> f64 {
    let delta = p1 - p2;
    if is_case_two(delta, epsilon) || delta == 0.0 {
        epsilon
    } else {
        (epsilon - delta).abs()
    }
}

/// Influence of `source` on `target` given this epoch's raw confidences.
///
/// At `delta == epsilon` the contribution is `epsilon` itself; otherwise it
/// is the factor weighted by the source's confidence.
pub fn implication_term(target: &FactRecord, source: &FactRecord, epsilon: f64) -> ImplicationTerm {
    let delta = target.pcf - source.pcf;
    let factor = implication_factor(target.pcf, source.pcf, epsilon);
    let contribution = if is_case_two(delta, epsilon) {
        epsilon
    } else {
        factor * source.confidence
    };
    ImplicationTerm {
        source_fact: source.fact_id,
        target_fact: target.fact_id,
        delta,
        factor,
        contribution,
    }
}

/// Damped `s + sum of contributions` from the siblings, summed in the order
/// given (callers pass ascending fact id).
pub fn adjust_confidence<'a>(
    fact: &FactRecord,
    siblings: impl IntoIterator<Item = &'a FactRecord>,
    epsilon: f64,
) -> f64 {
    let raw = siblings
        .into_iter()
        .filter(|s| s.fact_id != fact.fact_id)
        .fold(fact.confidence, |acc, s| {
            acc + implication_term(fact, s, epsilon).contribution
        });
    damp(raw)
}

/// Scales by `10^-alpha` for the smallest non-negative integer `alpha` that
/// brings the value to at most 1.
pub fn damp(s_prime: f64) -> f64 {
    if !(s_prime > 1.0) || !s_prime.is_finite() {
        return s_prime;
    }
    let mut alpha = 1;
    loop {
        let scaled = s_prime / 10f64.powi(alpha);
        if scaled <= 1.0 {
            return scaled;
        }
        alpha += 1;
    }
}

/// Runs epochs over a state snapshot.
#[derive(Clone, Copy, Debug, Default)]
pub struct Engine {
    execution: Execution,
}

impl Engine {
    pub fn new(execution: Execution) -> Self {
        Engine { execution }
    }

    pub fn sequential() -> Self {
        Engine::new(Execution::Sequential)
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// Scores every claim against the knowledge base with the PCF ratio.
    pub fn assign_pcf(&self, state: TrustState) -> TrustState {
        assign_pcf(state, Similarity::Substring, self.execution)
    }

    /// One pass of trust, confidence and implication. Epsilon and the clamp
    /// come from `state.config`; `converged` uses its tolerance.
    pub fn run_epoch(&self, mut state: TrustState) -> (TrustState, EpochReport) {
        let exec = self.execution;
        let epsilon = state.config.epsilon;
        let clamp = state.config.confidence_clamp;

        let started = Instant::now();
        let trusts = update_trust(&state, exec);
        let mut max_trust_delta = 0.0f64;
        for (site, trust) in state.websites.iter_mut().zip(trusts) {
            max_trust_delta = max_trust_delta.max((trust - site.trust).abs());
            site.trust = trust;
        }
        let trust_time = started.elapsed();

        let started = Instant::now();
        let confidences = par::map_indexed(exec, &state.facts, |_, fact| {
            let s = fact_confidence(
                fact.providers.iter().map(|&w| state.websites[w].trust),
                clamp,
            );
            (s, -(1.0 - s).ln())
        });
        for (fact, (s, score)) in state.facts.iter_mut().zip(confidences) {
            fact.confidence = s;
            fact.confidence_score = score;
        }
        let confidence_time = started.elapsed();

        let started = Instant::now();
        let siblings = state.siblings();
        let adjusted = par::map_indexed(exec, &state.facts, |i, fact| {
            let s_prime = adjust_confidence(
                fact,
                siblings[i].iter().map(|&j| &state.facts[j]),
                epsilon,
            );
            (s_prime, -(1.0 - s_prime.min(1.0 - clamp)).ln())
        });
        for (fact, (s_prime, score)) in state.facts.iter_mut().zip(adjusted) {
            fact.adjusted_confidence = s_prime;
            fact.adjusted_score = score;
        }
        let implication_time = started.elapsed();

        state.epoch += 1;
        let report = EpochReport {
            epoch: state.epoch,
            max_trust_delta,
            converged: max_trust_delta < state.config.convergence_tol,
            trust_time,
            confidence_time,
            implication_time,
        };
        (state, report)
    }

    /// Repeats [`Engine::run_epoch`] until the largest trust change drops
    /// below `tol` or `max_epochs` epochs have run.
    pub fn run(
        &self,
        mut state: TrustState,
        max_epochs: u32,
        tol: f64,
    ) -> (TrustState, Vec<EpochReport>) {
        let mut reports = Vec::new();
        for _ in 0..max_epochs.max(1) {
            let (next, mut report) = self.run_epoch(state);
            state = next;
            report.converged = report.max_trust_delta < tol;
            let done = report.converged;
            reports.push(report);
            if done {
                break;
            }
        }
        (state, reports)
    }
}
