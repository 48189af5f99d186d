//! Domain types, knowledge-base and claims ingestion, fact deduplication and
//! state persistence.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineResult, Method};
use crate::error::{Error, Result};

pub const STATE_VERSION: u64 = 1;

/// ISBN of a book. Never empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    /// Trims surrounding whitespace; `None` if nothing is left.
    pub fn new(isbn: &str) -> Option<Self> {
        let isbn = isbn.trim();
        if isbn.is_empty() {
            None
        } else {
            Some(ObjectId(isbn.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ground truth for one object, as held in the knowledge base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueFact {
    pub object: ObjectId,
    pub title: String,
    /// Normalized, non-empty, no duplicates.
    pub authors: Vec<String>,
    pub publisher: String,
    pub price: f64,
}

/// One website's assertion about the authors of one object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub website: String,
    pub object: ObjectId,
    /// Normalized names in the order the website listed them.
    pub authors: Vec<String>,
    pub publisher: Option<String>,
    pub price: Option<f64>,
    pub quantity: Option<u64>,
}

/// A distinct fact: one object plus one canonical author list, with every
/// website that asserts it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactRecord {
    pub fact_id: usize,
    pub object: ObjectId,
    /// Canonical key: normalized names sorted lexicographically.
    pub authors: Vec<String>,
    pub providers: BTreeSet<usize>,
    /// Set when the object has no entry in the knowledge base.
    pub unknown_object: bool,
    pub pcf: f64,
    pub confidence: f64,
    pub adjusted_confidence: f64,
    pub confidence_score: f64,
    pub adjusted_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Website {
    pub id: usize,
    pub url: String,
    pub trust: f64,
    pub fact_ids: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Allowed PCF deviation between two facts on the same object.
    pub epsilon: f64,
    pub convergence_tol: f64,
    pub max_epochs: u32,
    /// Confidences are capped at `1 - confidence_clamp` before any logarithm.
    pub confidence_clamp: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            epsilon: 0.4,
            convergence_tol: 1e-6,
            max_epochs: 10,
            confidence_clamp: 1e-10,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::Config(format!(
                "convergence tolerance must be non-negative, got {}",
                self.convergence_tol
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if !(self.confidence_clamp > 0.0 && self.confidence_clamp < 1.0) {
            return Err(Error::Config(format!(
                "confidence clamp must lie in (0, 1), got {}",
                self.confidence_clamp
            )));
        }
        Ok(())
    }
}

/// Complete engine state between epochs.
///
/// `websites[i].id == i` and `facts[j].fact_id == j`; both are kept in
/// ascending id order, which is also the order every reduction runs in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustState {
    pub config: EngineConfig,
    pub epoch: u64,
    pub kb: BTreeMap<ObjectId, TrueFact>,
    pub websites: Vec<Website>,
    pub facts: Vec<FactRecord>,
    /// Voting / TruthFinder results computed against this snapshot.
    #[serde(default)]
    pub baselines: BTreeMap<Method, BaselineResult>,
}

impl TrustState {
    pub fn empty(config: EngineConfig) -> Self {
        TrustState {
            config,
            epoch: 0,
            kb: BTreeMap::new(),
            websites: Vec::new(),
            facts: Vec::new(),
            baselines: BTreeMap::new(),
        }
    }

    /// Builds a fresh epoch-0 state. PCFs are not assigned yet.
    pub fn from_corpus(
        kb: BTreeMap<ObjectId, TrueFact>,
        claims: &[Claim],
        config: EngineConfig,
    ) -> Self {
        let (websites, facts) = build_fact_table(claims, &kb);
        TrustState {
            config,
            epoch: 0,
            kb,
            websites,
            facts,
            baselines: BTreeMap::new(),
        }
    }

    pub fn website(&self, url: &str) -> Option<&Website> {
        self.websites.iter().find(|w| w.url == url)
    }

    pub fn facts_of<'a>(&'a self, website: &'a Website) -> impl Iterator<Item = &'a FactRecord> {
        website.fact_ids.iter().map(move |&id| &self.facts[id])
    }

    /// Fact ids grouped by object, each group ascending.
    pub fn object_groups(&self) -> BTreeMap<&ObjectId, Vec<usize>> {
        let mut groups: BTreeMap<&ObjectId, Vec<usize>> = BTreeMap::new();
        for fact in &self.facts {
            groups.entry(&fact.object).or_default().push(fact.fact_id);
        }
        groups
    }

    /// For every fact, the ids of the other facts on the same object.
    pub fn siblings(&self) -> Vec<Vec<usize>> {
        let groups = self.object_groups();
        self.facts
            .iter()
            .map(|f| {
                groups[&f.object]
                    .iter()
                    .copied()
                    .filter(|&id| id != f.fact_id)
                    .collect()
            })
            .collect()
    }

    /// Zeroes every trust and confidence and drops computed results, keeping
    /// the corpus and the assigned PCFs.
    pub fn reset(&mut self) {
        self.epoch = 0;
        self.baselines.clear();
        for w in &mut self.websites {
            w.trust = 0.0;
        }
        for f in &mut self.facts {
            f.confidence = 0.0;
            f.adjusted_confidence = 0.0;
            f.confidence_score = 0.0;
            f.adjusted_score = 0.0;
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            pcf_state_version: u64,
            #[serde(flatten)]
            state: &'a TrustState,
        }
        serde_json::to_writer_pretty(
            &mut *out,
            &Doc {
                pcf_state_version: STATE_VERSION,
                state: self,
            },
        )?;
        out.write_all(b"\n")
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut doc: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| Error::Schema(e.to_string()))?;
        let version = doc
            .as_object_mut()
            .and_then(|m| m.remove("pcf_state_version"))
            .ok_or_else(|| Error::Schema("missing pcf_state_version".into()))?;
        let version = version
            .as_u64()
            .ok_or_else(|| Error::Schema("pcf_state_version is not an integer".into()))?;
        if version != STATE_VERSION {
            return Err(Error::SchemaVersion {
                found: version,
                expected: STATE_VERSION,
            });
        }
        let state: TrustState =
            serde_json::from_value(doc).map_err(|e| Error::Schema(e.to_string()))?;
        state.check_consistency()?;
        Ok(state)
    }

    fn check_consistency(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Schema(msg));
        for (i, w) in self.websites.iter().enumerate() {
            if w.id != i {
                return bad(format!("website {} stored at position {i}", w.id));
            }
            if let Some(&f) = w.fact_ids.iter().find(|&&f| f >= self.facts.len()) {
                return bad(format!("website {} references unknown fact {f}", w.url));
            }
        }
        for (i, f) in self.facts.iter().enumerate() {
            if f.fact_id != i {
                return bad(format!("fact {} stored at position {i}", f.fact_id));
            }
            if f.providers.is_empty() {
                return bad(format!("fact {i} has no providers"));
            }
            if let Some(&w) = f.providers.iter().find(|&&w| w >= self.websites.len()) {
                return bad(format!("fact {i} references unknown website {w}"));
            }
            if !f.unknown_object && !self.kb.contains_key(&f.object) {
                return bad(format!("fact {i} references object {} missing from the knowledge base", f.object));
            }
        }
        Ok(())
    }
}

/// Lowercases, drops periods and commas, and collapses whitespace runs.
pub fn normalize_name(raw: &str) -> String {
    let lowered = raw.to_lowercase().replace(['.', ','], "");
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn canonical_authors(authors: &[String]) -> Vec<String> {
    let mut key = authors.to_vec();
    key.sort();
    key
}

#[derive(Deserialize)]
struct KbRecord {
    isbn: String,
    #[serde(default)]
    title: String,
    authors: Vec<String>,
    #[serde(default)]
    publisher: String,
    #[serde(default)]
    price: f64,
}

pub fn load_knowledge_base(path: impl AsRef<Path>) -> Result<BTreeMap<ObjectId, TrueFact>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_knowledge_base(BufReader::new(file), path)
}

/// Reads JSON Lines knowledge-base records. `source` only labels errors.
pub fn read_knowledge_base<R: BufRead>(
    reader: R,
    source: &Path,
) -> Result<BTreeMap<ObjectId, TrueFact>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_owned(),
        line,
        message,
    };
    let mut kb = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: KbRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        let object =
            ObjectId::new(&rec.isbn).ok_or_else(|| parse_err(lineno, "empty isbn".into()))?;
        if !(rec.price >= 0.0) {
            return Err(parse_err(lineno, format!("negative price {}", rec.price)));
        }
        let mut authors: Vec<String> = Vec::with_capacity(rec.authors.len());
        for name in rec.authors.iter().map(|a| normalize_name(a)) {
            if name.is_empty() {
                continue;
            }
            if authors.contains(&name) {
                return Err(parse_err(lineno, format!("duplicate author {name:?}")));
            }
            authors.push(name);
        }
        if authors.is_empty() {
            return Err(parse_err(lineno, "empty author list".into()));
        }
        if kb.contains_key(&object) {
            return Err(Error::DuplicateIsbn {
                path: source.to_owned(),
                line: lineno,
                isbn: object.0,
            });
        }
        kb.insert(
            object.clone(),
            TrueFact {
                object,
                title: rec.title,
                authors,
                publisher: rec.publisher,
                price: rec.price,
            },
        );
    }
    Ok(kb)
}

#[derive(Deserialize)]
struct ClaimRow {
    website_url: String,
    isbn: String,
    authors: String,
    publisher: Option<String>,
    price: Option<f64>,
    quantity: Option<u64>,
}

pub fn load_claims(path: impl AsRef<Path>) -> Result<Vec<Claim>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_claims(file, path)
}

/// Reads the claims CSV. Row numbers in errors count data rows from 1.
pub fn read_claims<R: Read>(reader: R, source: &Path) -> Result<Vec<Claim>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut claims = Vec::new();
    for (idx, row) in csv.deserialize::<ClaimRow>().enumerate() {
        let rowno = idx + 1;
        let row_err = |message: String| Error::Parse {
            path: source.to_owned(),
            line: rowno,
            message: format!("row {rowno}: {message}"),
        };
        let row = row.map_err(|e| row_err(e.to_string()))?;
        if row.website_url.is_empty() {
            return Err(row_err("empty website_url".into()));
        }
        let object = ObjectId::new(&row.isbn).ok_or_else(|| row_err("empty isbn".into()))?;
        let authors: Vec<String> = row
            .authors
            .split(';')
            .map(normalize_name)
            .filter(|a| !a.is_empty())
            .collect();
        if authors.is_empty() {
            return Err(Error::EmptyAuthors {
                path: source.to_owned(),
                row: rowno,
            });
        }
        claims.push(Claim {
            website: row.website_url,
            object,
            authors,
            publisher: row.publisher.filter(|p| !p.is_empty()),
            price: row.price,
            quantity: row.quantity,
        });
    }
    Ok(claims)
}

/// Deduplicates claims into distinct facts and indexes the websites.
///
/// Ids follow first appearance in `claims`. All trust and confidence fields
/// start at zero; PCFs are assigned by the engine.
pub fn build_fact_table(
    claims: &[Claim],
    kb: &BTreeMap<ObjectId, TrueFact>,
) -> (Vec<Website>, Vec<FactRecord>) {
    let mut websites: Vec<Website> = Vec::new();
    let mut facts: Vec<FactRecord> = Vec::new();
    let mut site_index: HashMap<&str, usize> = HashMap::new();
    let mut fact_index: HashMap<(&ObjectId, Vec<String>), usize> = HashMap::new();

    for claim in claims {
        let site = *site_index.entry(claim.website.as_str()).or_insert_with(|| {
            websites.push(Website {
                id: websites.len(),
                url: claim.website.clone(),
                trust: 0.0,
                fact_ids: BTreeSet::new(),
            });
            websites.len() - 1
        });
        let key = canonical_authors(&claim.authors);
        let fact = *fact_index
            .entry((&claim.object, key.clone()))
            .or_insert_with(|| {
                facts.push(FactRecord {
                    fact_id: facts.len(),
                    object: claim.object.clone(),
                    authors: key,
                    providers: BTreeSet::new(),
                    unknown_object: !kb.contains_key(&claim.object),
                    pcf: 0.0,
                    confidence: 0.0,
                    adjusted_confidence: 0.0,
                    confidence_score: 0.0,
                    adjusted_score: 0.0,
                });
                facts.len() - 1
            });
        facts[fact].providers.insert(site);
        websites[site].fact_ids.insert(fact);
    }
    (websites, facts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

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

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_name("Cay S Horstmenn"), "cay s horstmenn");
        assert_eq!(normalize_name("  Graeme C.  Simsion "), "graeme c simsion");
        assert_eq!(normalize_name(""), "");
        assert_eq!(normalize_name("Cornell, Gary"), "cornell gary");
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "[A-Za-z .,\t]{0,30}") {
            let once = normalize_name(&raw);
            prop_assert_eq!(normalize_name(&once), once);
        }
    }

    #[test]
    fn kb_core_java_record() {
        let src = r#"{"isbn": "8131701621", "title": "Core Java", "authors": ["Cay S Horstmenn", "Gary Cornell"], "publisher": "Pearson", "price": 450}"#;
        let kb = read_knowledge_base(src.as_bytes(), Path::new("kb.jsonl")).unwrap();
        assert_eq!(kb.len(), 1);
        let tf = &kb[&ObjectId::new("8131701621").unwrap()];
        assert_eq!(tf.authors, ["cay s horstmenn", "gary cornell"]);
    }

    #[test]
    fn kb_empty_and_errors() {
        assert!(read_knowledge_base("".as_bytes(), Path::new("kb")).unwrap().is_empty());

        let dup = "{\"isbn\":\"1\",\"authors\":[\"a\"]}\n{\"isbn\":\"1\",\"authors\":[\"b\"]}\n";
        match read_knowledge_base(dup.as_bytes(), Path::new("kb")) {
            Err(Error::DuplicateIsbn { line: 2, isbn, .. }) => assert_eq!(isbn, "1"),
            other => panic!("expected duplicate isbn, got {other:?}"),
        }

        let empty = "{\"isbn\":\"1\",\"authors\":[]}\n";
        assert!(matches!(
            read_knowledge_base(empty.as_bytes(), Path::new("kb")),
            Err(Error::Parse { line: 1, .. })
        ));

        let garbage = "\n{\"isbn\":\"1\",\"authors\":[\"a\"]}\nnot json\n";
        assert!(matches!(
            read_knowledge_base(garbage.as_bytes(), Path::new("kb")),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn claims_parse() {
        let src = "website_url,isbn,authors,publisher,price,quantity\n\
                   w1,8131701621,Cay S Horstmenn;Gary,Pearson,450.5,3\n\
                   w2,8131701621,Horstmenn;Corne,,,\n";
        let claims = read_claims(src.as_bytes(), Path::new("c.csv")).unwrap();
        assert_eq!(claims.len(), 2);
        assert_eq!(claims[0].authors, ["cay s horstmenn", "gary"]);
        assert_eq!(claims[0].price, Some(450.5));
        assert_eq!(claims[0].quantity, Some(3));
        assert_eq!(claims[1].publisher, None);
        assert_eq!(claims[1].price, None);
    }

    #[test]
    fn claims_empty_and_errors() {
        let header = "website_url,isbn,authors,publisher,price,quantity\n";
        assert!(read_claims(header.as_bytes(), Path::new("c")).unwrap().is_empty());
        assert!(read_claims("".as_bytes(), Path::new("c")).unwrap().is_empty());

        let blank = format!("{header}w1,1,a,,,\nw2,1, ; ,,,\n");
        assert!(matches!(
            read_claims(blank.as_bytes(), Path::new("c")),
            Err(Error::EmptyAuthors { row: 2, .. })
        ));

        let bad_price = format!("{header}w1,1,a,,cheap,\n");
        assert!(matches!(
            read_claims(bad_price.as_bytes(), Path::new("c")),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn fact_dedup() {
        let kb = BTreeMap::new();
        let same = [claim("w1", "1", &["a", "b"]), claim("w2", "1", &["b", "a"])];
        let (sites, facts) = build_fact_table(&same, &kb);
        assert_eq!(sites.len(), 2);
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].providers.len(), 2);
        assert!(facts[0].unknown_object);

        let different = [claim("w1", "1", &["a"]), claim("w2", "1", &["b"])];
        let (_, facts) = build_fact_table(&different, &kb);
        assert_eq!(facts.len(), 2);

        let repeated = [claim("w1", "1", &["a"]), claim("w1", "1", &["a"])];
        let (sites, facts) = build_fact_table(&repeated, &kb);
        assert_eq!(facts.len(), 1);
        assert_eq!(sites[0].fact_ids.len(), 1);
    }

    #[test]
    fn fifty_sites_two_distinct_claims_each() {
        let claims: Vec<Claim> = (0..50)
            .flat_map(|w| {
                (0..2).map(move |c| claim(&format!("w{w}"), &format!("{}", w * 2 + c), &["x"]))
            })
            .collect();
        let (sites, facts) = build_fact_table(&claims, &BTreeMap::new());
        assert_eq!(sites.len(), 50);
        assert_eq!(facts.len(), 100);
    }

    proptest! {
        #[test]
        fn provider_pairs_counted_once(
            rows in prop::collection::vec((0usize..5, 0usize..4, 0usize..3), 0..40)
        ) {
            let names = ["a", "b", "c"];
            let claims: Vec<Claim> = rows
                .iter()
                .map(|&(w, o, n)| claim(&format!("w{w}"), &format!("{o}"), &[names[n]]))
                .collect();
            let (sites, facts) = build_fact_table(&claims, &BTreeMap::new());
            let distinct: BTreeSet<_> = rows.iter().collect();
            let pairs: usize = sites.iter().map(|w| w.fact_ids.len()).sum();
            let provider_pairs: usize = facts.iter().map(|f| f.providers.len()).sum();
            prop_assert_eq!(pairs, distinct.len());
            prop_assert_eq!(provider_pairs, distinct.len());
        }
    }

    #[test]
    fn state_round_trip() {
        let state = TrustState::empty(EngineConfig::default());
        let mut buf = Vec::new();
        state.write_to(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("\"pcf_state_version\": 1"));
        assert_eq!(TrustState::read_from(buf.as_slice()).unwrap(), state);
    }

    #[test]
    fn state_rejects_corruption() {
        assert!(matches!(
            TrustState::read_from("{ not json".as_bytes()),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            TrustState::read_from("{\"epoch\": 0}".as_bytes()),
            Err(Error::Schema(_))
        ));
        let mut buf = Vec::new();
        TrustState::empty(EngineConfig::default()).write_to(&mut buf).unwrap();
        let bumped = String::from_utf8(buf).unwrap().replace(
            "\"pcf_state_version\": 1",
            "\"pcf_state_version\": 7",
        );
        assert!(matches!(
            TrustState::read_from(bumped.as_bytes()),
            Err(Error::SchemaVersion { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        let bad = EngineConfig {
            epsilon: 1.5,
            ..EngineConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = EngineConfig {
            max_epochs: 0,
            ..EngineConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
