//! Voting and TruthFinder-style comparison methods.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EngineConfig, ObjectId, TrustState};
use crate::engine::{assign_pcf, Engine, Similarity};
use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Voting,
    Truthfinder,
    Pcf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Voting, Method::Truthfinder, Method::Pcf];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Voting => "voting",
            Method::Truthfinder => "truthfinder",
            Method::Pcf => "pcf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "voting" => Ok(Method::Voting),
            "truthfinder" => Ok(Method::Truthfinder),
            "pcf" => Ok(Method::Pcf),
            other => Err(format!("unknown method {other:?} (expected pcf, truthfinder or voting)")),
        }
    }
}

/// Website trusts produced by one method, plus the per-fact confidence it
/// assigns and the winning fact on each object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: Method,
    pub trusts: BTreeMap<String, f64>,
    pub fact_confidence: Vec<f64>,
    pub winners: BTreeMap<ObjectId, usize>,
}

impl BaselineResult {
    pub fn trust_of(&self, url: &str) -> Option<f64> {
        self.trusts.get(url).copied()
    }
}

/// Highest-confidence fact per object, ties to the smaller id.
fn winners(state: &TrustState, confidence: &[f64]) -> BTreeMap<ObjectId, usize> {
    state
        .object_groups()
        .into_iter()
        .map(|(object, ids)| {
            let best = ids
                .iter()
                .copied()
                .fold(None::<usize>, |best, id| match best {
                    Some(b) if confidence[b] >= confidence[id] => Some(b),
                    _ => Some(id),
                })
                .expect("object groups are never empty");
            (object.clone(), best)
        })
        .collect()
}

/// Reads the engine's own trusts and adjusted confidences off the state.
pub fn pcf_result(state: &TrustState) -> Result<BaselineResult> {
    if state.epoch == 0 {
        return Err(Error::Stale(Method::Pcf));
    }
    Ok(from_engine_state(Method::Pcf, state))
}

fn from_engine_state(method: Method, state: &TrustState) -> BaselineResult {
    let confidence: Vec<f64> = state.facts.iter().map(|f| f.adjusted_confidence).collect();
    BaselineResult {
        method,
        trusts: state
            .websites
            .iter()
            .map(|w| (w.url.clone(), w.trust))
            .collect(),
        winners: winners(state, &confidence),
        fact_confidence: confidence,
    }
}

/// Each fact's share of the providers on its object; a website's trust is
/// the mean share of the facts it provides.
pub fn voting_run(state: &TrustState) -> BaselineResult {
    let mut totals: BTreeMap<&ObjectId, usize> = BTreeMap::new();
    for fact in &state.facts {
        *totals.entry(&fact.object).or_default() += fact.providers.len();
    }
    let share: Vec<f64> = state
        .facts
        .iter()
        .map(|f| f.providers.len() as f64 / totals[&f.object] as f64)
        .collect();
    let trusts = state
        .websites
        .iter()
        .map(|w| {
            let trust = if w.fact_ids.is_empty() {
                0.0
            } else {
                w.fact_ids.iter().map(|&id| share[id]).sum::<f64>() / w.fact_ids.len() as f64
            };
            (w.url.clone(), trust)
        })
        .collect();
    BaselineResult {
        method: Method::Voting,
        trusts,
        winners: winners(state, &share),
        fact_confidence: share,
    }
}

/// The engine pipeline from a zeroed state, with each fact scored by the
/// weighted first/middle/last name agreement instead of the PCF ratio.
pub fn truthfinder_run(state: &TrustState, config: &EngineConfig, exec: Execution) -> BaselineResult {
    let (state, _) = run_fresh(state, config, Similarity::WeightedName, exec);
    from_engine_state(Method::Truthfinder, &state)
}

/// The PCF pipeline from a zeroed state, independent of any epochs already
/// run on `state`.
pub fn pcf_fresh_run(state: &TrustState, config: &EngineConfig, exec: Execution) -> BaselineResult {
    let (state, _) = run_fresh(state, config, Similarity::Substring, exec);
    from_engine_state(Method::Pcf, &state)
}

fn run_fresh(
    state: &TrustState,
    config: &EngineConfig,
    similarity: Similarity,
    exec: Execution,
) -> (TrustState, Vec<crate::engine::EpochReport>) {
    let mut fresh = state.clone();
    fresh.reset();
    fresh.config = config.clone();
    let fresh = assign_pcf(fresh, similarity, exec);
    Engine::new(exec).run(fresh, config.max_epochs, config.convergence_tol)
}

/// Stores Voting and TruthFinder results on the state for later queries.
pub fn refresh_baselines(state: &mut TrustState, exec: Execution) {
    let config = state.config.clone();
    let voting = voting_run(state);
    let truthfinder = truthfinder_run(state, &config, exec);
    state.baselines.insert(Method::Voting, voting);
    state.baselines.insert(Method::Truthfinder, truthfinder);
}

/// Trusts for `method` as currently recorded on the state.
pub fn result_for(state: &TrustState, method: Method) -> Result<BaselineResult> {
    match method {
        Method::Pcf => pcf_result(state),
        other => state.baselines.get(&other).cloned().ok_or(Error::Stale(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{normalize_name, Claim, TrueFact};

    fn claim(site: &str, isbn: &str, authors: &[&str]) -> Claim {
        Claim {
            website: site.into(),
            object: ObjectId::new(isbn).unwrap(),
            authors: authors.iter().map(|a| normalize_name(a)).collect(),
            publisher: None,
            price: None,
            quantity: None,
        }
    }

    fn state(truth: &[(&str, &[&str])], claims: &[Claim]) -> TrustState {
        let kb = truth
            .iter()
            .map(|(isbn, authors)| {
                let object = ObjectId::new(isbn).unwrap();
                let tf = TrueFact {
                    object: object.clone(),
                    title: String::new(),
                    authors: authors.iter().map(|a| normalize_name(a)).collect(),
                    publisher: String::new(),
                    price: 0.0,
                };
                (object, tf)
            })
            .collect();
        let s = TrustState::from_corpus(kb, claims, EngineConfig::default());
        Engine::sequential().assign_pcf(s)
    }

    #[test]
    fn voting_shares() {
        let s = state(
            &[("1", &["a b"])],
            &[
                claim("w1", "1", &["a b"]),
                claim("w2", "1", &["a b"]),
                claim("w3", "1", &["a b"]),
                claim("w4", "1", &["x y"]),
            ],
        );
        let r = voting_run(&s);
        for w in ["w1", "w2", "w3"] {
            assert_eq!(r.trust_of(w), Some(0.75));
        }
        assert_eq!(r.trust_of("w4"), Some(0.25));
        assert_eq!(r.winners[&ObjectId::new("1").unwrap()], 0);

        // shares on an object sum to one, so share x object total recovers
        // every provider exactly once
        let recovered: f64 = s.facts.iter().map(|f| r.fact_confidence[f.fact_id] * 4.0).sum();
        assert!((recovered - 4.0).abs() < 1e-12);
        let providers: Vec<f64> = s.facts.iter().map(|f| r.fact_confidence[f.fact_id] * 4.0).collect();
        assert_eq!(providers, [3.0, 1.0]);
    }

    #[test]
    fn voting_unanimous_and_single() {
        let s = state(
            &[("1", &["a b"]), ("2", &["c"])],
            &[
                claim("w1", "1", &["a b"]),
                claim("w2", "1", &["a b"]),
                claim("w1", "2", &["zzz"]),
                claim("w2", "2", &["zzz"]),
            ],
        );
        assert!(voting_run(&s).trusts.values().all(|&t| t == 1.0));

        let one = state(&[("1", &["a b"])], &[claim("w1", "1", &["q"])]);
        assert_eq!(voting_run(&one).trust_of("w1"), Some(1.0));
    }

    #[test]
    fn voting_ties_pick_smaller_fact() {
        let s = state(
            &[("1", &["a b"])],
            &[claim("w1", "1", &["x"]), claim("w2", "1", &["a b"])],
        );
        assert_eq!(voting_run(&s).winners[&ObjectId::new("1").unwrap()], 0);
    }

    #[test]
    fn truthfinder_exact_copies() {
        let s = state(
            &[("1", &["a b"]), ("2", &["c d e"])],
            &[claim("w1", "1", &["a b"]), claim("w1", "2", &["c d e"])],
        );
        let cfg = EngineConfig {
            max_epochs: 1,
            ..EngineConfig::default()
        };
        let tf = truthfinder_run(&s, &cfg, Execution::Sequential);
        let pcf = pcf_fresh_run(&s, &cfg, Execution::Sequential);
        assert_eq!(tf.trust_of("w1"), Some(1.0));
        assert_eq!(pcf.trust_of("w1"), Some(1.0));
    }

    #[test]
    fn truthfinder_dropped_middle_names() {
        let s = state(
            &[("1", &["Graeme C Simsion"]), ("2", &["Cay S Horstmenn"])],
            &[
                claim("w1", "1", &["Graeme Simsion"]),
                claim("w1", "2", &["Cay Horstmenn"]),
            ],
        );
        let cfg = EngineConfig {
            max_epochs: 1,
            ..EngineConfig::default()
        };
        let tf = truthfinder_run(&s, &cfg, Execution::Sequential);
        assert!((tf.trust_of("w1").unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn misspelled_surnames_favour_truthfinder() {
        let s = state(
            &[("1", &["Graeme C Simsion"])],
            &[
                claim("good", "1", &["Graeme C Simsion"]),
                claim("bad", "1", &["Graeme C Simsoin"]),
            ],
        );
        let cfg = EngineConfig {
            max_epochs: 1,
            ..EngineConfig::default()
        };
        let tf = truthfinder_run(&s, &cfg, Execution::Sequential);
        let pcf = pcf_fresh_run(&s, &cfg, Execution::Sequential);
        assert_eq!(pcf.trust_of("bad"), Some(0.0));
        assert!((tf.trust_of("bad").unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn stale_until_computed() {
        let mut s = state(&[("1", &["a b"])], &[claim("w1", "1", &["a b"])]);
        for m in Method::ALL {
            assert!(matches!(result_for(&s, m), Err(Error::Stale(x)) if x == m));
        }
        let (next, _) = Engine::sequential().run_epoch(s);
        s = next;
        refresh_baselines(&mut s, Execution::Sequential);
        for m in Method::ALL {
            assert_eq!(result_for(&s, m).unwrap().method, m);
        }
    }

    #[test]
    fn method_parsing() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("pagerank".parse::<Method>().is_err());
    }
}
