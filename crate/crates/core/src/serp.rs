//! Trust-ordered result pages.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::io::{self, Write};

use crate::baselines::{result_for, Method};
use crate::corpus::{normalize_name, ObjectId, TrustState};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct SerpRow {
    pub rank: usize,
    pub url: String,
    pub trust: f64,
    pub object: ObjectId,
    pub claimed_authors: Vec<String>,
    pub confidence: f64,
}

/// Descending trust, then ascending url.
fn by_trust_then_url(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

pub fn rank_trusts(trusts: impl IntoIterator<Item = (String, f64)>) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = trusts.into_iter().collect();
    ranked.sort_by(|a, b| by_trust_then_url((&a.0, a.1), (&b.0, b.1)));
    ranked
}

pub fn rank_websites(state: &TrustState, method: Method) -> Result<Vec<(String, f64)>> {
    let result = result_for(state, method)?;
    Ok(rank_trusts(result.trusts))
}

fn matching_objects<'a>(state: &'a TrustState, needle: &str) -> BTreeSet<&'a ObjectId> {
    let isbn = needle.trim();
    let title_needle = normalize_name(needle);
    let mut matched: BTreeSet<&ObjectId> = state
        .kb
        .values()
        .filter(|tf| {
            tf.object.as_str() == isbn
                || (!title_needle.is_empty() && normalize_name(&tf.title).contains(&title_needle))
        })
        .map(|tf| &tf.object)
        .collect();
    matched.extend(
        state
            .facts
            .iter()
            .filter(|f| f.object.as_str() == isbn)
            .map(|f| &f.object),
    );
    matched
}

/// One row per (website, fact) on an object whose ISBN equals `needle` or
/// whose normalized title contains it, best trust first.
pub fn query(
    state: &TrustState,
    needle: &str,
    method: Method,
    top_k: usize,
) -> Result<Vec<SerpRow>> {
    let result = result_for(state, method)?;
    let objects = matching_objects(state, needle);
    let mut rows: Vec<(usize, SerpRow)> = Vec::new();
    for fact in state.facts.iter().filter(|f| objects.contains(&f.object)) {
        for &site in &fact.providers {
            let url = &state.websites[site].url;
            rows.push((
                fact.fact_id,
                SerpRow {
                    rank: 0,
                    url: url.clone(),
                    trust: result.trust_of(url).unwrap_or(0.0),
                    object: fact.object.clone(),
                    claimed_authors: fact.authors.clone(),
                    confidence: result.fact_confidence.get(fact.fact_id).copied().unwrap_or(0.0),
                },
            ));
        }
    }
    rows.sort_by(|(fa, a), (fb, b)| {
        by_trust_then_url((&a.url, a.trust), (&b.url, b.trust))
            .then_with(|| a.object.cmp(&b.object))
            .then_with(|| fa.cmp(fb))
    });
    Ok(rows
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (_, mut row))| {
            row.rank = i + 1;
            row
        })
        .collect())
}

/// `rank url trust isbn authors confidence`, tab separated.
pub fn write_tsv<W: Write + ?Sized>(rows: &[SerpRow], out: &mut W) -> io::Result<()> {
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{:.6}",
            row.rank,
            row.url,
            row.trust,
            row.object,
            row.claimed_authors.join(";"),
            row.confidence
        )?;
    }
    Ok(())
}
