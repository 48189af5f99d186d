//! Claim-versus-truth scoring.
//!
//! [`name_pcf`] is the substring-gated length ratio used by the PCF engine.
//! [`tf_name_score`] is the first/middle/last weighted scorer used by the
//! TruthFinder-style baseline.

use std::collections::BTreeMap;

use crate::corpus::{FactRecord, ObjectId, TrueFact, Website};

/// Best true author for one claimed name.
#[derive(Clone, Debug, PartialEq)]
pub struct NameMatch {
    pub claim_name: String,
    pub matched_true_name: Option<String>,
    pub ratio: f64,
}

/// Number of characters, spaces included.
pub fn char_length(name: &str) -> usize {
    name.chars().count()
}

/// Finds the true author that contains `claim_name` with the highest length
/// ratio. Ties go to the lexicographically smallest true name.
pub fn best_match(claim_name: &str, true_authors: &[String]) -> NameMatch {
    let mut best: Option<(&str, f64)> = None;
    if !claim_name.is_empty() {
        let claim_len = char_length(claim_name) as f64;
        for truth in true_authors {
            if !truth.contains(claim_name) {
                continue;
            }
            let ratio = claim_len / char_length(truth) as f64;
            best = match best {
                Some((name, r)) if r > ratio || (r == ratio && name <= truth.as_str()) => {
                    Some((name, r))
                }
                _ => Some((truth.as_str(), ratio)),
            };
        }
    }
    NameMatch {
        claim_name: claim_name.to_owned(),
        matched_true_name: best.map(|(n, _)| n.to_owned()),
        ratio: best.map_or(0.0, |(_, r)| r),
    }
}

pub fn name_pcf(claim_name: &str, true_authors: &[String]) -> f64 {
    best_match(claim_name, true_authors).ratio
}

/// Mean of [`name_pcf`] over the claimed authors.
pub fn fact_pcf(claim_authors: &[String], true_authors: &[String]) -> f64 {
    if claim_authors.is_empty() {
        return 0.0;
    }
    let total: f64 = claim_authors
        .iter()
        .map(|name| name_pcf(name, true_authors))
        .sum();
    total / claim_authors.len() as f64
}

/// Mean [`fact_pcf`] over the website's facts whose object is in the
/// knowledge base; 0 when there are none.
pub fn website_sim(
    website: &Website,
    facts: &[FactRecord],
    kb: &BTreeMap<ObjectId, TrueFact>,
) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for &id in &website.fact_ids {
        let fact = &facts[id];
        if let Some(truth) = kb.get(&fact.object) {
            total += fact_pcf(&fact.authors, &truth.authors);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

const FIRST_WEIGHT: f64 = 2.0;
const MIDDLE_WEIGHT: f64 = 1.0;
const LAST_WEIGHT: f64 = 3.0;
const PARTIAL_EDIT_DISTANCE: usize = 2;

#[derive(Debug, Default, PartialEq)]
struct NameParts {
    first: Option<String>,
    middle: Option<String>,
    last: Option<String>,
}

impl NameParts {
    fn split(name: &str) -> Self {
        let tokens: Vec<&str> = name.split_whitespace().collect();
        match tokens.as_slice() {
            [] => NameParts::default(),
            [last] => NameParts {
                last: Some((*last).to_owned()),
                ..NameParts::default()
            },
            [first, last] => NameParts {
                first: Some((*first).to_owned()),
                middle: None,
                last: Some((*last).to_owned()),
            },
            [first, middle @ .., last] => NameParts {
                first: Some((*first).to_owned()),
                middle: Some(middle.join(" ")),
                last: Some((*last).to_owned()),
            },
        }
    }
}

fn is_partial(a: &str, b: &str) -> bool {
    a != b
        && (a.contains(b)
            || b.contains(a)
            || strsim::levenshtein(a, b) <= PARTIAL_EDIT_DISTANCE)
}

/// Weighted first/middle/last agreement of one claimed name with one true
/// name, in [0, 1]. Only parts present in the true name carry weight.
pub fn weighted_name_score(claim_name: &str, true_name: &str) -> f64 {
    let claim = NameParts::split(claim_name);
    let truth = NameParts::split(true_name);
    let mut granted = 0.0;
    let mut total = 0.0;
    for (weight, c, t) in [
        (FIRST_WEIGHT, &claim.first, &truth.first),
        (MIDDLE_WEIGHT, &claim.middle, &truth.middle),
        (LAST_WEIGHT, &claim.last, &truth.last),
    ] {
        let Some(t) = t else { continue };
        total += weight;
        match c {
            Some(c) if c == t => granted += weight,
            Some(c) if is_partial(c, t) => granted += weight / 2.0,
            _ => {}
        }
    }
    if total == 0.0 {
        0.0
    } else {
        granted / total
    }
}

/// Pairs each claimed author with its best-scoring true author and averages.
pub fn tf_name_score(claim_authors: &[String], true_authors: &[String]) -> f64 {
    if claim_authors.is_empty() {
        return 0.0;
    }
    let total: f64 = claim_authors
        .iter()
        .map(|c| {
            true_authors
                .iter()
                .map(|t| weighted_name_score(c, t))
                .fold(0.0, f64::max)
        })
        .sum();
    total / claim_authors.len() as f64
}
