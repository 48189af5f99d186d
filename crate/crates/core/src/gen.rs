//! Seeded synthetic bookseller corpora.
//!
//! Website `i` claims the `claims_per_site` objects starting at
//! `i * claims_per_site` (wrapping), so coverage is even and, when
//! `n_websites * claims_per_site <= n_objects`, every claim is on a distinct
//! object. Each claim copies the true author list and is then corrupted with
//! the site's corruption probability.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{normalize_name, Claim, EngineConfig, ObjectId, TrueFact, TrustState};
use crate::engine::Engine;
use crate::error::{Error, Result};

const FIRST_NAMES: &[&str] = &[
    "Alice", "Bruno", "Chandra", "Dmitri", "Elena", "Farid", "Grace", "Hiroshi", "Ingrid",
    "Jamal", "Kavya", "Lars", "Marta", "Nikhil", "Olga", "Pedro", "Quentin", "Rosa", "Sanjay",
    "Tamsin", "Ulrich", "Vera", "Wen", "Ximena", "Yusuf", "Zofia", "Graeme", "Ivan", "Gary",
    "Cay",
];

const LAST_NAMES: &[&str] = &[
    "Abernathy", "Bayross", "Castellano", "Dubois", "Eriksen", "Fujimoto", "Gallagher",
    "Horstmann", "Iyer", "Jablonski", "Kowalczyk", "Lindqvist", "Moreau", "Nakamura", "Okafor",
    "Petrov", "Quiroga", "Ramanathan", "Simsion", "Takahashi", "Underwood", "Valdivia",
    "Whitfield", "Xenakis", "Yamamoto", "Zimmermann", "Cornell", "Harrington", "Mistry",
    "Oyelaran",
];

const TITLE_WORDS: &[&str] = &[
    "Advanced", "Applied", "Core", "Data", "Design", "Distributed", "Foundations", "Guide",
    "Java", "Learning", "Modeling", "Networks", "Principles", "Programming", "Systems",
    "Theory", "Web", "Databases", "Algorithms", "Practical", "Introduction", "Enterprise",
];

const PUBLISHERS: &[&str] = &[
    "Pearson", "O'Reilly", "Springer", "Wiley", "McGraw Hill", "BPB Publications",
    "Addison Wesley", "Prentice Hall",
];

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n_websites: usize,
    pub n_objects: usize,
    pub claims_per_site: usize,
    pub corruption_rate: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_websites == 0 || self.n_objects == 0 || self.claims_per_site == 0 {
            return Err(Error::Config(
                "websites, objects and claims per site must all be at least 1".into(),
            ));
        }
        if self.claims_per_site > self.n_objects {
            return Err(Error::Config(format!(
                "claims per site ({}) exceeds the number of objects ({})",
                self.claims_per_site, self.n_objects
            )));
        }
        check_rate(self.corruption_rate)
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Config(format!("corruption rate must lie in [0, 1], got {rate}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Book {
    pub isbn: String,
    pub title: String,
    pub authors: Vec<String>,
    pub publisher: String,
    pub price: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Listing {
    pub website_url: String,
    pub isbn: String,
    pub authors: Vec<String>,
    pub publisher: String,
    pub price: f64,
    pub quantity: u32,
    /// Whether the author list was altered.
    pub corrupted: bool,
}

/// A generated knowledge base and the listings that disagree with it.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub books: Vec<Book>,
    pub listings: Vec<Listing>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    TruncateTail,
    DropMiddle,
    DropAuthor,
    Replace,
}

pub fn site_url(index: usize) -> String {
    format!("http://www.example-books.com/seller-{index:04}/sf")
}

pub fn generate(spec: &GenSpec) -> Result<Corpus> {
    spec.validate()?;
    generate_with_site_rates(spec, &vec![spec.corruption_rate; spec.n_websites])
}

/// Like [`generate`] but with a corruption probability per website.
/// `spec.corruption_rate` is ignored.
pub fn generate_with_site_rates(spec: &GenSpec, rates: &[f64]) -> Result<Corpus> {
    GenSpec {
        corruption_rate: 0.0,
        ..spec.clone()
    }
    .validate()?;
    if rates.len() != spec.n_websites {
        return Err(Error::Config(format!(
            "{} corruption rates given for {} websites",
            rates.len(),
            spec.n_websites
        )));
    }
    for &r in rates {
        check_rate(r)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let books = generate_books(&mut rng, spec.n_objects);
    let mut listings = Vec::with_capacity(spec.n_websites * spec.claims_per_site);
    for (site, &rate) in rates.iter().enumerate() {
        let url = site_url(site);
        for j in 0..spec.claims_per_site {
            let book = &books[(site * spec.claims_per_site + j) % spec.n_objects];
            let mut authors = book.authors.clone();
            let corrupted = rng.random_bool(rate);
            if corrupted {
                corrupt(&mut rng, &mut authors);
            }
            listings.push(Listing {
                website_url: url.clone(),
                isbn: book.isbn.clone(),
                authors,
                publisher: book.publisher.clone(),
                price: cents(rng.random_range(100..=100_000)),
                quantity: rng.random_range(1..=20),
                corrupted,
            });
        }
    }
    Ok(Corpus { books, listings })
}

fn cents(c: u32) -> f64 {
    f64::from(c) / 100.0
}

fn random_name<R: Rng>(rng: &mut R) -> String {
    let first = FIRST_NAMES.choose(rng).unwrap();
    let last = LAST_NAMES.choose(rng).unwrap();
    if rng.random_bool(0.4) {
        let initial = char::from(b'A' + rng.random_range(0..26u8));
        format!("{first} {initial} {last}")
    } else {
        format!("{first} {last}")
    }
}

fn generate_books<R: Rng>(rng: &mut R, n: usize) -> Vec<Book> {
    let mut seen = BTreeSet::new();
    let mut books = Vec::with_capacity(n);
    while books.len() < n {
        let isbn = format!("{:010}", rng.random_range(0..10_000_000_000u64));
        if !seen.insert(isbn.clone()) {
            continue;
        }
        let n_authors = rng.random_range(1..=3);
        let mut authors: Vec<String> = Vec::with_capacity(n_authors);
        while authors.len() < n_authors {
            let name = random_name(rng);
            if !authors.iter().any(|a| normalize_name(a) == normalize_name(&name)) {
                authors.push(name);
            }
        }
        let n_words = rng.random_range(2..=4);
        let title = TITLE_WORDS
            .choose_multiple(rng, n_words)
            .copied()
            .collect::<Vec<_>>()
            .join(" ");
        books.push(Book {
            isbn,
            title,
            authors,
            publisher: PUBLISHERS.choose(rng).unwrap().to_string(),
            price: cents(rng.random_range(100..=100_000)),
        });
    }
    books
}

fn applicable(authors: &[String]) -> Vec<Corruption> {
    let mut ops = Vec::with_capacity(4);
    if authors.iter().any(|a| a.chars().count() >= 2) {
        ops.push(Corruption::TruncateTail);
    }
    if authors.iter().any(|a| a.split_whitespace().count() >= 3) {
        ops.push(Corruption::DropMiddle);
    }
    if authors.len() >= 2 {
        ops.push(Corruption::DropAuthor);
    }
    ops.push(Corruption::Replace);
    ops
}

/// Applies one randomly chosen applicable corruption and returns it.
pub fn corrupt<R: Rng>(rng: &mut R, authors: &mut Vec<String>) -> Corruption {
    let op = *applicable(authors).choose(rng).unwrap();
    match op {
        Corruption::TruncateTail => {
            let candidates: Vec<usize> = (0..authors.len())
                .filter(|&i| authors[i].chars().count() >= 2)
                .collect();
            let i = *candidates.choose(rng).unwrap();
            let len = authors[i].chars().count();
            let cut = rng.random_range(1..=4.min(len - 1));
            let kept: String = authors[i].chars().take(len - cut).collect();
            authors[i] = kept.trim_end().to_owned();
        }
        Corruption::DropMiddle => {
            let candidates: Vec<usize> = (0..authors.len())
                .filter(|&i| authors[i].split_whitespace().count() >= 3)
                .collect();
            let i = *candidates.choose(rng).unwrap();
            let mut tokens: Vec<&str> = authors[i].split_whitespace().collect();
            let middle = rng.random_range(1..tokens.len() - 1);
            tokens.remove(middle);
            authors[i] = tokens.join(" ");
        }
        Corruption::DropAuthor => {
            let i = rng.random_range(0..authors.len());
            authors.remove(i);
        }
        Corruption::Replace => {
            let i = rng.random_range(0..authors.len());
            let taken: BTreeSet<String> = authors.iter().map(|a| normalize_name(a)).collect();
            let replacement = loop {
                let name = random_name(rng);
                if !taken.contains(&normalize_name(&name)) {
                    break name;
                }
            };
            authors[i] = replacement;
        }
    }
    op
}

impl Corpus {
    pub fn knowledge_base(&self) -> BTreeMap<ObjectId, TrueFact> {
        self.books
            .iter()
            .map(|b| {
                let object = ObjectId::new(&b.isbn).expect("generated isbns are non-empty");
                let tf = TrueFact {
                    object: object.clone(),
                    title: b.title.clone(),
                    authors: b.authors.iter().map(|a| normalize_name(a)).collect(),
                    publisher: b.publisher.clone(),
                    price: b.price,
                };
                (object, tf)
            })
            .collect()
    }

    pub fn claims(&self) -> Vec<Claim> {
        self.listings
            .iter()
            .map(|l| Claim {
                website: l.website_url.clone(),
                object: ObjectId::new(&l.isbn).expect("generated isbns are non-empty"),
                authors: l.authors.iter().map(|a| normalize_name(a)).collect(),
                publisher: Some(l.publisher.clone()),
                price: Some(l.price),
                quantity: Some(u64::from(l.quantity)),
            })
            .collect()
    }

    /// Epoch-0 state with PCFs assigned, as `pcf ingest` would produce.
    pub fn into_state(&self, config: EngineConfig, engine: &Engine) -> TrustState {
        engine.assign_pcf(TrustState::from_corpus(self.knowledge_base(), &self.claims(), config))
    }

    pub fn write_kb<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for book in &self.books {
            serde_json::to_writer(&mut *out, book)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_claims<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(["website_url", "isbn", "authors", "publisher", "price", "quantity"])?;
        for l in &self.listings {
            csv.write_record([
                l.website_url.as_str(),
                l.isbn.as_str(),
                l.authors.join(";").as_str(),
                l.publisher.as_str(),
                format!("{:.2}", l.price).as_str(),
                l.quantity.to_string().as_str(),
            ])?;
        }
        csv.flush()
    }

    pub fn save(&self, kb_path: &Path, claims_path: &Path) -> Result<()> {
        let file = File::create(kb_path).map_err(|e| Error::io(kb_path, e))?;
        let mut out = BufWriter::new(file);
        self.write_kb(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(kb_path, e))?;
        let file = File::create(claims_path).map_err(|e| Error::io(claims_path, e))?;
        self.write_claims(BufWriter::new(file))
            .map_err(|e| Error::io(claims_path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_claims, read_knowledge_base};

    fn spec(rate: f64) -> GenSpec {
        GenSpec {
            n_websites: 12,
            n_objects: 20,
            claims_per_site: 4,
            corruption_rate: rate,
            seed: 7,
        }
    }

    fn bytes(c: &Corpus) -> (Vec<u8>, Vec<u8>) {
        let mut kb = Vec::new();
        c.write_kb(&mut kb).unwrap();
        let mut claims = Vec::new();
        c.write_claims(&mut claims).unwrap();
        (kb, claims)
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&spec(0.5)).unwrap();
        let b = generate(&spec(0.5)).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        let c = generate(&GenSpec { seed: 8, ..spec(0.5) }).unwrap();
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn written_files_parse_back() {
        let corpus = generate(&spec(0.5)).unwrap();
        let (kb, claims) = bytes(&corpus);
        let kb = read_knowledge_base(kb.as_slice(), Path::new("kb")).unwrap();
        let claims = read_claims(claims.as_slice(), Path::new("claims")).unwrap();
        assert_eq!(kb, corpus.knowledge_base());
        assert_eq!(claims.len(), corpus.listings.len());
        for (parsed, built) in claims.iter().zip(corpus.claims()) {
            assert_eq!(parsed.authors, built.authors);
            assert_eq!(parsed.object, built.object);
        }
    }

    #[test]
    fn zero_corruption_is_exact() {
        let corpus = generate(&spec(0.0)).unwrap();
        assert!(corpus.listings.iter().all(|l| !l.corrupted));
        let state = corpus.into_state(EngineConfig::default(), &Engine::sequential());
        assert!(state.facts.iter().all(|f| f.pcf == 1.0));
        let (state, _) = Engine::sequential().run_epoch(state);
        assert!(state.websites.iter().all(|w| w.trust == 1.0));
    }

    #[test]
    fn full_corruption_changes_every_claim() {
        let corpus = generate(&spec(1.0)).unwrap();
        let kb = corpus.knowledge_base();
        for claim in corpus.claims() {
            let mut truth = kb[&claim.object].authors.clone();
            truth.sort();
            let mut got = claim.authors.clone();
            got.sort();
            assert_ne!(got, truth);
        }
    }

    #[test]
    fn fifty_sites_two_claims_hundred_facts() {
        let corpus = generate(&GenSpec {
            n_websites: 50,
            n_objects: 100,
            claims_per_site: 2,
            corruption_rate: 0.3,
            seed: 1,
        })
        .unwrap();
        let state = corpus.into_state(EngineConfig::default(), &Engine::sequential());
        assert_eq!(state.websites.len(), 50);
        assert_eq!(state.facts.len(), 100);
    }

    #[test]
    fn every_operator_keeps_lists_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = BTreeSet::new();
        for _ in 0..500 {
            let mut authors = vec!["Graeme C Simsion".to_string(), "Gary Cornell".to_string()];
            let op = corrupt(&mut rng, &mut authors);
            seen.insert(format!("{op:?}"));
            assert!(!authors.is_empty());
            assert!(authors.iter().all(|a| !normalize_name(a).is_empty()));
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&GenSpec { n_websites: 0, ..spec(0.1) }).is_err());
        assert!(generate(&GenSpec { claims_per_site: 21, ..spec(0.1) }).is_err());
        assert!(generate(&spec(1.5)).is_err());
        assert!(generate_with_site_rates(&spec(0.0), &[0.1]).is_err());
    }
}
