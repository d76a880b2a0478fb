//! Seeded bibliographic corpus with injected duplicates and their ground
//! truth: clean papers and authors, then perturbed copies (typos, shifted
//! years, abbreviated names and venues, moved affiliations).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::merge::DuplicatePairSet;
use crate::relcore::{write_relation_csv, AttributeSpec, Instance, RelationSchema, Tid, Tuple, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub papers: usize,
    pub authors: usize,
    /// Fraction of papers that get a duplicate.
    pub duplicate_rate: f64,
    /// Chance that a duplicated paper's author is itself duplicated.
    pub author_duplicate_rate: f64,
    pub typo_rate: f64,
    pub year_shift_rate: f64,
    pub abbreviation_rate: f64,
    pub affiliation_change_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            papers: 300,
            authors: 200,
            duplicate_rate: 0.25,
            author_duplicate_rate: 0.6,
            typo_rate: 0.6,
            year_shift_rate: 0.3,
            abbreviation_rate: 0.5,
            affiliation_change_rate: 0.5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub instance: Instance,
    pub truth: BTreeMap<String, DuplicatePairSet>,
    /// Training sample `(id1, id2, label)`.
    pub labels: Vec<(Tid, Tid, u8)>,
}

impl SynthCorpus {
    pub fn record_count(&self) -> usize {
        ["Author", "Paper"]
            .iter()
            .map(|r| self.instance.relation(r).map_or(0, |x| x.len()))
            .sum()
    }
}

pub const SYNTH_RULES: &str = "\
# Papers: similar titles in the same year
md paper_title:
  Paper(p1, t1, y, v1, b1), Paper(p2, t2, y, v2, b2),
  sim(Title: t1, t2) -> ident(b1, b2);

# Authors: similar names and affiliations
md author_name_aff:
  Author(a1, n1, f1, b1), Author(a2, n2, f2, b2),
  sim(Name: n1, n2), sim(Affiliation: f1, f2) -> ident(b1, b2);

# Papers: similar titles whose authors share a block
md paper_by_authors:
  Paper(p1, t1, y1, v1, b1), Paper(p2, t2, y2, v2, b2),
  Writes(w1, p1, a1), Writes(w2, p2, a2),
  Author(a1, n1, f1, b3), Author(a2, n2, f2, b3),
  sim(Title: t1, t2) -> ident(b1, b2);

# Authors: similar names whose papers share a block
md author_by_papers:
  Author(a1, n1, f1, b1), Author(a2, n2, f2, b2),
  Writes(w1, p1, a1), Writes(w2, p2, a2),
  Paper(p1, t1, y1, v1, b3), Paper(p2, t2, y2, v2, b3),
  sim(Name: n1, n2) -> ident(b1, b2);
";

pub const SYNTH_CONFIG: &str = r#"seed = 42
truth = "truth.csv"

[schemas.Author]
attributes = ["AID:rid", "Name:short-string", "Affiliation:short-string", "Bl:block"]
file = "author.csv"

[schemas.Paper]
attributes = ["PID:rid", "Title:long-text", "Year:numeric-string", "Venue:short-string", "Bl:block"]
file = "paper.csv"

[schemas.Writes]
attributes = ["WID:rid", "PID:short-string", "AID:short-string"]
file = "writes.csv"

[similarity.rules]
Title = { function = "jaro-winkler", threshold = 0.9 }
Name = { function = "jaro-winkler", threshold = 0.8 }
Affiliation = { function = "jaro-winkler", threshold = 0.9 }

[[features]]
relation = "Paper"
attribute = "Title"
function = "jaro-winkler"

[[features]]
relation = "Paper"
attribute = "Year"
function = "equality"

[[features]]
relation = "Paper"
attribute = "Venue"
function = "jaro-winkler"

[[features]]
relation = "Author"
attribute = "Name"
function = "jaro-winkler"

[[features]]
relation = "Author"
attribute = "Name"
function = "levenshtein"

[[features]]
relation = "Author"
attribute = "Affiliation"
function = "jaro-winkler"

[blocking]
mode = "MDCB"
rules = "blocking.md"
keys = { Paper = ["Title", "Year"], Author = ["Name", "Affiliation"] }

[svm]
max_epochs = 10000
training = "labels.csv"
"#;

const WORDS: &[&str] = &[
    "adaptive", "algebraic", "analysis", "approximate", "architecture", "asynchronous", "bayesian", "benchmark",
    "bounded", "cache", "calculus", "classification", "clustering", "compiler", "complexity", "compression",
    "concurrent", "consistency", "constraint", "data", "database", "decision", "deductive", "dependency",
    "design", "detection", "distributed", "dynamic", "efficient", "embedded", "energy", "entity", "estimation",
    "evaluation", "evolution", "federated", "formal", "framework", "functional", "graph", "heuristic",
    "hierarchical", "incremental", "index", "inference", "integration", "interactive", "kernel", "knowledge",
    "language", "latency", "learning", "linear", "logic", "matching", "memory", "mining", "model", "network",
    "neural", "optimal", "optimization", "parallel", "pattern", "planning", "privacy", "probabilistic",
    "processing", "program", "protocol", "quantum", "query", "random", "reasoning", "recursive", "relational",
    "reliable", "resolution", "robust", "routing", "scalable", "scheduling", "search", "secure", "semantic",
    "sensor", "sequential", "signal", "simulation", "sparse", "spatial", "statistical", "storage", "streaming",
    "structured", "synthesis", "system", "temporal", "theory", "transaction", "uncertain", "verification",
    "visual", "wireless", "workload",
];

const FIRST: &[&str] = &[
    "Alice", "Bruno", "Carmen", "Dmitri", "Elena", "Farid", "Greta", "Hiroshi", "Ingrid", "Jonas", "Katarina",
    "Leandro", "Mariam", "Nikolai", "Olga", "Pablo", "Quentin", "Rosa", "Stefan", "Tamara", "Umberto", "Valeria",
    "Wojciech", "Ximena", "Yusuf", "Zofia", "Anders", "Beatriz", "Cedric", "Daniela", "Emeka", "Fatima",
    "Gustavo", "Helena", "Ivan", "Julia", "Kenji", "Lucia", "Mateo", "Nadia",
];

const LAST: &[&str] = &[
    "Abernathy", "Bertolucci", "Castellanos", "Dubrovsky", "Eriksen", "Fontaine", "Gallagher", "Halvorsen",
    "Ishikawa", "Jablonski", "Kowalczyk", "Lindqvist", "Montgomery", "Nakamura", "Oyelaran", "Petrakis",
    "Quiroga", "Rasmussen", "Santorini", "Thibodeaux", "Uchenna", "Vasquez", "Wainwright", "Xenakis",
    "Yamamoto", "Zielinski", "Achterberg", "Blackwood", "Cavendish", "Delacroix", "Esposito", "Fairbanks",
    "Grimaldi", "Hargreaves", "Iwasaki", "Jorgensen", "Kristiansen", "Lombardi", "Marchetti", "Novak",
    "Okonkwo", "Pemberton", "Rothschild", "Sorensen", "Tanaka", "Underwood", "Valdivia", "Whitaker",
    "Yoshida", "Zamora",
];

const AFFILIATIONS: &[&str] = &[
    "University of Toronto", "Carleton University", "ETH Zurich", "University of Oxford", "MIT CSAIL",
    "Stanford University", "Tsinghua University", "University of Tokyo", "TU Munich", "EPFL Lausanne",
    "University of Edinburgh", "INRIA Paris", "Max Planck Institute", "University of Waterloo",
    "Imperial College London", "University of Melbourne", "KAIST Daejeon", "University of Cape Town",
    "National University of Singapore", "Sorbonne University", "University of Chile", "IIT Bombay",
    "University of Warsaw", "Technion Haifa", "University of Helsinki", "McGill University",
    "University of Sao Paulo", "Seoul National University", "University of Vienna", "Aalborg University",
];

const VENUES: &[&str] = &[
    "International Conference on Data Engineering",
    "Very Large Data Bases Conference",
    "Symposium on Principles of Database Systems",
    "Knowledge Discovery and Data Mining",
    "International Conference on Machine Learning",
    "Conference on Information and Knowledge Management",
    "European Conference on Artificial Intelligence",
    "International Joint Conference on Artificial Intelligence",
    "Symposium on Theory of Computing",
    "Conference on Neural Information Processing Systems",
    "Journal of Data Semantics",
    "Transactions on Database Systems",
    "Information Systems Journal",
    "Journal of Web Semantics",
    "Data and Knowledge Engineering",
    "Theory and Practice of Logic Programming",
];

pub fn synth_schemas() -> [RelationSchema; 3] {
    let mk = |name: &str, specs: &[&str]| {
        RelationSchema::new(name, specs.iter().map(|s| AttributeSpec::parse(s).expect("valid spec")).collect())
            .expect("valid schema")
    };
    [
        mk("Author", &["AID:rid", "Name:short-string", "Affiliation:short-string", "Bl:block"]),
        mk("Paper", &["PID:rid", "Title:long-text", "Year:numeric-string", "Venue:short-string", "Bl:block"]),
        mk("Writes", &["WID:rid", "PID:short-string", "AID:short-string"]),
    ]
}

fn typo(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut c: Vec<char> = s.chars().collect();
    if c.len() < 4 {
        return s.to_string();
    }
    let i = rng.gen_range(1..c.len() - 1);
    match rng.gen_range(0..3) {
        0 => c.swap(i, i + 1),
        1 => {
            c.remove(i);
        }
        _ => c.insert(i, c[i]),
    }
    c.into_iter().collect()
}

fn abbreviate_name(name: &str) -> String {
    match name.split_once(' ') {
        Some((first, last)) => format!("{}. {last}", first.chars().next().unwrap_or('X')),
        None => name.to_string(),
    }
}

fn initials(s: &str) -> String {
    s.split_whitespace()
        .filter(|w| w.len() > 3)
        .filter_map(|w| w.chars().next())
        .collect()
}

struct Builder {
    rng: ChaCha8Rng,
    inst: Instance,
    next: Tid,
    /// Entity id of each generated tuple, per relation.
    entity: BTreeMap<&'static str, BTreeMap<Tid, usize>>,
}

impl Builder {
    fn add(&mut self, rel: &'static str, cells: Vec<String>, entity: Option<usize>) -> Tid {
        self.next += 1;
        let tid = self.next;
        let mut tail: Vec<Value> = cells.into_iter().map(Value::Atomic).collect();
        if self.inst.schema(rel).and_then(|s| s.block_position()).is_some() {
            tail.push(Value::Atomic(tid.to_string()));
        }
        self.inst.insert(rel, Tuple::new(tid, tail)).expect("fresh tid");
        if let Some(e) = entity {
            self.entity.entry(rel).or_default().insert(tid, e);
        }
        tid
    }
}

pub fn generate(p: &SynthParams) -> SynthCorpus {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(p.seed),
        inst: Instance::with_schemas(synth_schemas()).expect("distinct relations"),
        next: 0,
        entity: BTreeMap::new(),
    };

    let mut names: Vec<String> = FIRST
        .iter()
        .flat_map(|f| LAST.iter().map(move |l| format!("{f} {l}")))
        .collect();
    names.shuffle(&mut b.rng);
    let mut authors = Vec::new();
    for (e, name) in names.into_iter().take(p.authors).enumerate() {
        let aff = AFFILIATIONS[b.rng.gen_range(0..AFFILIATIONS.len())].to_string();
        let tid = b.add("Author", vec![name.clone(), aff.clone()], Some(e));
        authors.push((tid, name, aff, e));
    }

    let mut titles = BTreeSet::new();
    let mut papers = Vec::new();
    for e in 0..p.papers {
        let title = loop {
            let k = b.rng.gen_range(4..8);
            let mut words: Vec<&str> = WORDS.choose_multiple(&mut b.rng, k).copied().collect();
            words.shuffle(&mut b.rng);
            let mut t = words.join(" ");
            if let Some(first) = t.get_mut(0..1) {
                first.make_ascii_uppercase();
            }
            if titles.insert(t.clone()) {
                break t;
            }
        };
        let year = b.rng.gen_range(1995..2016).to_string();
        let venue = VENUES[b.rng.gen_range(0..VENUES.len())].to_string();
        let tid = b.add("Paper", vec![title.clone(), year.clone(), venue.clone()], Some(e));
        let k = b.rng.gen_range(1..4);
        let team: Vec<usize> = (0..authors.len()).collect::<Vec<_>>().choose_multiple(&mut b.rng, k).copied().collect();
        for a in &team {
            b.add("Writes", vec![tid.to_string(), authors[*a].0.to_string()], None);
        }
        papers.push((title, year, venue, team, e));
    }

    let n_dups = (p.duplicate_rate * p.papers as f64).round() as usize;
    let chosen: Vec<usize> = (0..papers.len()).collect::<Vec<_>>().choose_multiple(&mut b.rng, n_dups).copied().collect();
    for i in chosen {
        let (title, year, venue, team, e) = papers[i].clone();
        let title = if b.rng.gen_bool(p.typo_rate) { typo(&mut b.rng, &title) } else { title };
        let year = if b.rng.gen_bool(p.year_shift_rate) {
            (year.parse::<i32>().unwrap_or(2000) + if b.rng.gen_bool(0.5) { 1 } else { -1 }).to_string()
        } else {
            year
        };
        let venue = if b.rng.gen_bool(p.abbreviation_rate) { initials(&venue) } else { venue };
        let tid = b.add("Paper", vec![title, year, venue], Some(e));
        for a in team {
            let (orig, name, aff, ae) = authors[a].clone();
            let aid = if b.rng.gen_bool(p.author_duplicate_rate) {
                let name = if b.rng.gen_bool(p.abbreviation_rate) {
                    abbreviate_name(&name)
                } else {
                    typo(&mut b.rng, &name)
                };
                let aff = if b.rng.gen_bool(p.affiliation_change_rate) {
                    AFFILIATIONS[b.rng.gen_range(0..AFFILIATIONS.len())].to_string()
                } else {
                    aff
                };
                b.add("Author", vec![name, aff], Some(ae))
            } else {
                orig
            };
            b.add("Writes", vec![tid.to_string(), aid.to_string()], None);
        }
    }

    let mut truth = BTreeMap::new();
    for (rel, ents) in &b.entity {
        let mut groups: BTreeMap<usize, Vec<Tid>> = BTreeMap::new();
        for (t, e) in ents {
            groups.entry(*e).or_default().push(*t);
        }
        let mut m = DuplicatePairSet::new();
        for g in groups.values() {
            for (i, x) in g.iter().enumerate() {
                for y in &g[i + 1..] {
                    m.insert(*x, *y);
                }
            }
        }
        truth.insert(rel.to_string(), m);
    }

    let mut labels = Vec::new();
    for (rel, m) in &truth {
        let tids: Vec<Tid> = b.entity[rel.as_str()].keys().copied().collect();
        let ent = &b.entity[rel.as_str()];
        let mut positives = 0;
        for (x, y) in m.iter() {
            if b.rng.gen_bool(0.5) {
                labels.push((x, y, 1));
                positives += 1;
            }
        }
        // Half of the negatives share the first word of the first
        // attribute, so the classifier sees look-alikes as well as strangers.
        let first_word = |t: &Tid| -> String {
            let v = b.inst.tuple(*t).map(|t| t.get(1).render()).unwrap_or_default();
            v.split_whitespace().next().unwrap_or("").to_string()
        };
        let mut by_word: BTreeMap<String, Vec<Tid>> = BTreeMap::new();
        for t in &tids {
            by_word.entry(first_word(t)).or_default().push(*t);
        }
        let mut negatives = BTreeSet::new();
        let mut attempts = 0;
        while negatives.len() < 2 * positives.max(1) && attempts < 100_000 {
            attempts += 1;
            let x = tids[b.rng.gen_range(0..tids.len())];
            let y = if negatives.len() % 2 == 0 {
                let peers = &by_word[&first_word(&x)];
                peers[b.rng.gen_range(0..peers.len())]
            } else {
                tids[b.rng.gen_range(0..tids.len())]
            };
            if x != y && ent[&x] != ent[&y] {
                negatives.insert((x.min(y), x.max(y)));
            }
        }
        labels.extend(negatives.into_iter().map(|(x, y)| (x, y, 0)));
    }
    labels.sort();

    SynthCorpus {
        instance: b.inst,
        truth,
        labels,
    }
}

/// Relation CSVs, `truth.csv`, `labels.csv`, `blocking.md` and
/// `config.toml`, ready for `run` and `compare`.
pub fn write_corpus(c: &SynthCorpus, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let io_err = |e: crate::relcore::RelError| std::io::Error::other(e.to_string());
    for (rel, file) in [("Author", "author.csv"), ("Paper", "paper.csv"), ("Writes", "writes.csv")] {
        let mut buf = Vec::new();
        write_relation_csv(&c.instance, rel, &mut buf).map_err(io_err)?;
        fs::write(dir.join(file), buf)?;
    }
    let mut truth = String::from("id1,id2\n");
    for m in c.truth.values() {
        for (a, b) in m.iter() {
            truth.push_str(&format!("{a},{b}\n"));
        }
    }
    fs::write(dir.join("truth.csv"), truth)?;
    let mut labels = String::from("id1,id2,label\n");
    for (a, b, l) in &c.labels {
        labels.push_str(&format!("{a},{b},{l}\n"));
    }
    fs::write(dir.join("labels.csv"), labels)?;
    fs::write(dir.join("blocking.md"), SYNTH_RULES)?;
    fs::write(dir.join("config.toml"), SYNTH_CONFIG)?;
    Ok(())
}
