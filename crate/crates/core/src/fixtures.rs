//! Small worked instances used by tests, examples and the CLI smoke runs.

use crate::classify::{TrainingExample, WeightVector};
use crate::mdlang::{parse_mds, MatchDependency, MatchingFunctionDef, MfRegistry};
use crate::relcore::{
    load_csv_reader, load_sim_facts_reader, AttributeSpec, Instance, ObjectSet, RelationSchema,
    SimilarityFactStore, Tid, Value,
};

pub struct ChaseFixture {
    pub instance: Instance,
    pub mds: Vec<MatchDependency>,
    pub sims: SimilarityFactStore,
    pub mfs: MfRegistry,
}

pub fn schema_from_specs(name: &str, specs: &[&str]) -> RelationSchema {
    let attrs = specs
        .iter()
        .map(|s| AttributeSpec::parse(s).unwrap_or_else(|| panic!("bad attribute spec {s}")))
        .collect();
    RelationSchema::new(name, attrs).expect("fixture schema")
}

fn subset_name(prefix: &str, mask: u32) -> String {
    let digits: String = (1..=3).filter(|i| mask & (1 << (i - 1)) != 0).map(|i| i.to_string()).collect();
    format!("{prefix}{digits}")
}

/// Table MF over `{prefix}S` for non-empty `S ⊆ {1,2,3}`, merging by union
/// of index sets (`b1`, `b2` → `b12`).
pub fn subset_union_mf(tag: &str, prefix: &str) -> MatchingFunctionDef {
    let mut entries = Vec::new();
    for a in 1..8u32 {
        for b in 1..8u32 {
            entries.push((subset_name(prefix, a), subset_name(prefix, b), subset_name(prefix, a | b)));
        }
    }
    let refs: Vec<(&str, &str, &str)> = entries.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    MatchingFunctionDef::table(tag, &refs)
}

/// Entries of the two merge tables as printed alongside the classical example.
pub const WORKED_PRINTED_MF: [(&str, &str, &str, &str); 8] = [
    ("B", "b1", "b2", "b12"),
    ("B", "b2", "b3", "b23"),
    ("B", "b12", "b123", "b123"),
    ("B", "b12", "b3", "b123"),
    ("C", "c1", "c2", "c12"),
    ("C", "c2", "c3", "c23"),
    ("C", "c12", "c3", "c123"),
    ("C", "c12", "c123", "c123"),
];

pub const WORKED_RULES: &str = "md phi1: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(A: a1, a2) -> ident(b1, b2);\n\
                                  md phi2: R(t1, a1, b1, c1), R(t2, a2, b2, c2), sim(B: b1, b2) -> ident(c1, c2);\n";

/// First printed enforcement order, `D0 … D6`.
pub const WORKED_SEQUENCE_ONE: [(&str, Tid, Tid); 6] = [
    ("phi1", 1, 2),
    ("phi2", 1, 2),
    ("phi1", 1, 3),
    ("phi1", 1, 2),
    ("phi2", 2, 3),
    ("phi2", 1, 2),
];

/// Second printed order, starting with `φ1` on `(t1, t3)`.
pub const WORKED_SEQUENCE_TWO: [(&str, Tid, Tid); 6] = [
    ("phi1", 1, 3),
    ("phi1", 1, 2),
    ("phi1", 1, 3),
    ("phi2", 2, 3),
    ("phi2", 1, 3),
    ("phi2", 1, 2),
];

fn r_instance(rows: &[[&str; 3]]) -> Instance {
    let mut inst = Instance::with_schemas([RelationSchema::simple("R", &["A", "B", "C"], false).unwrap()]).unwrap();
    for (i, row) in rows.iter().enumerate() {
        inst.insert_row("R", i as Tid + 1, row).unwrap();
    }
    inst
}

/// `R(A,B,C)` with `t1..t3`, rules `φ1: A≈A → B≐B`, `φ2: B≈B → C≐C`,
/// similarities `a1≈a2`, `a1≈a3`, `b3≈b4`.
pub fn worked_classical() -> ChaseFixture {
    let mut sims = SimilarityFactStore::new();
    sims.add("A", "a1", "a2");
    sims.add("A", "a1", "a3");
    sims.add("B", "b3", "b4");
    ChaseFixture {
        instance: r_instance(&[["a1", "b1", "c1"], ["a2", "b2", "c2"], ["a3", "b3", "c3"]]),
        mds: parse_mds(WORKED_RULES).unwrap(),
        sims,
        mfs: MfRegistry::new().with(subset_union_mf("B", "b")).with(subset_union_mf("C", "c")),
    }
}

/// Every instance along the first printed order, `D0` through `D6`.
pub fn worked_sequence_one_states() -> Vec<Instance> {
    [
        [["a1", "b1", "c1"], ["a2", "b2", "c2"], ["a3", "b3", "c3"]],
        [["a1", "b12", "c1"], ["a2", "b12", "c2"], ["a3", "b3", "c3"]],
        [["a1", "b12", "c12"], ["a2", "b12", "c12"], ["a3", "b3", "c3"]],
        [["a1", "b123", "c12"], ["a2", "b12", "c12"], ["a3", "b123", "c3"]],
        [["a1", "b123", "c12"], ["a2", "b123", "c12"], ["a3", "b123", "c3"]],
        [["a1", "b123", "c12"], ["a2", "b123", "c123"], ["a3", "b123", "c123"]],
        [["a1", "b123", "c123"], ["a2", "b123", "c123"], ["a3", "b123", "c123"]],
    ]
    .iter()
    .map(|rows| r_instance(rows))
    .collect()
}

/// Every instance along the second printed order.
pub fn worked_sequence_two_states() -> Vec<Instance> {
    [
        [["a1", "b1", "c1"], ["a2", "b2", "c2"], ["a3", "b3", "c3"]],
        [["a1", "b13", "c1"], ["a2", "b2", "c2"], ["a3", "b13", "c3"]],
        [["a1", "b123", "c1"], ["a2", "b123", "c2"], ["a3", "b13", "c3"]],
        [["a1", "b123", "c1"], ["a2", "b123", "c2"], ["a3", "b123", "c3"]],
        [["a1", "b123", "c1"], ["a2", "b123", "c23"], ["a3", "b123", "c23"]],
        [["a1", "b123", "c123"], ["a2", "b123", "c23"], ["a3", "b123", "c123"]],
        [["a1", "b123", "c123"], ["a2", "b123", "c123"], ["a3", "b123", "c123"]],
    ]
    .iter()
    .map(|rows| r_instance(rows))
    .collect()
}

/// The relational example: Author/Paper with shared-block joins, facts
/// `n2≈n3` and `title1≈title3`.
pub fn worked_relational() -> ChaseFixture {
    let author = schema_from_specs(
        "Author",
        &["tid:rid", "Name:short", "Aff:short", "PID:short", "Bl:block"],
    );
    let paper = schema_from_specs("Paper", &["tid:rid", "PID:short", "Title:short", "Key:short", "Bl:block"]);
    let mut inst = Instance::with_schemas([author, paper]).unwrap();
    for (t, row) in [
        (1, ["n1", "a1", "120", "250"]),
        (2, ["n2", "a2", "121", "251"]),
        (3, ["n3", "a3", "122", "252"]),
    ] {
        inst.insert_row("Author", t, &row).unwrap();
    }
    for (t, row) in [
        (4, ["120", "title1", "k1", "302"]),
        (5, ["122", "title2", "k2", "300"]),
        (6, ["121", "title3", "k3", "300"]),
    ] {
        inst.insert_row("Paper", t, &row).unwrap();
    }
    let mds = parse_mds(
        "md phi1: Author(t1, x1, y1, p1, bl1), Author(t2, x2, y2, p2, bl2), \
                  Paper(t3, p1, z1, w1, bl4), Paper(t4, p2, z2, w2, bl4), sim(Name: x1, x2) -> ident(bl1, bl2);\n\
         md phi2: Paper(t1, p1, z1, w1, bl1), Paper(t2, p2, z2, w2, bl2), \
                  Author(t3, x1, y1, p1, bl3), Author(t4, x2, y2, p2, bl3), sim(Title: z1, z2) -> ident(bl1, bl2);",
    )
    .unwrap();
    let mut sims = SimilarityFactStore::new();
    sims.add("Name", "n2", "n3");
    sims.add("Title", "title1", "title3");
    ChaseFixture {
        instance: inst,
        mds,
        sims,
        mfs: block_mfs(&["Author", "Paper"]),
    }
}

/// The same rules over the second instance, where a fourth author shares
/// paper 121 and authors 1 and 2 start in one block.
pub fn worked_relational_d1() -> ChaseFixture {
    let base = worked_relational();
    let schemas: Vec<RelationSchema> = base.instance.schemas().cloned().collect();
    let mut inst = Instance::with_schemas(schemas).unwrap();
    for (t, row) in [
        (1, ["n1", "a1", "120", "250"]),
        (2, ["n2", "a2", "121", "250"]),
        (3, ["n3", "a3", "122", "252"]),
        (4, ["n4", "a4", "121", "253"]),
    ] {
        inst.insert_row("Author", t, &row).unwrap();
    }
    for (t, row) in [
        (5, ["120", "title1", "k1", "302"]),
        (6, ["122", "title2", "k2", "300"]),
        (7, ["121", "title3", "k3", "300"]),
    ] {
        inst.insert_row("Paper", t, &row).unwrap();
    }
    ChaseFixture { instance: inst, ..base }
}

/// `R(B, C)` with `b1≈b2`, rules `B≈B → C≐C` and `C≈C → B≐B`. The second
/// rule applies nowhere initially, so the combination is SFAI, yet the clean
/// instance depends on which `B`-similar pair is enforced first.
pub fn sfai_order_dependent() -> ChaseFixture {
    let mut inst = Instance::with_schemas([RelationSchema::simple("R", &["B", "C"], false).unwrap()]).unwrap();
    for (t, row) in [(1, ["b1", "c1"]), (2, ["b2", "c2"]), (3, ["b1", "c3"])] {
        inst.insert_row("R", t, &row).unwrap();
    }
    let mut sims = SimilarityFactStore::new();
    sims.add("B", "b1", "b2");
    ChaseFixture {
        instance: inst,
        mds: parse_mds(
            "md m0: R(t1, b1, c1), R(t2, b2, c2), sim(B: b1, b2) -> ident(c1, c2);\n\
             md m1: R(t1, b1, c1), R(t2, b2, c2), sim(C: c1, c2) -> ident(b1, b2);",
        )
        .unwrap(),
        sims,
        mfs: MfRegistry::new().with(subset_union_mf("B", "b")).with(subset_union_mf("C", "c")),
    }
}

pub fn block_mfs(relations: &[&str]) -> MfRegistry {
    let mut reg = MfRegistry::new();
    for r in relations {
        reg.register(MatchingFunctionDef::max_numeric(&format!("{r}.Bl")));
    }
    reg
}

pub const MINI_MAS_AUTHOR: &str = include_str!("../data/mini_mas/author.csv");
pub const MINI_MAS_PAPER: &str = include_str!("../data/mini_mas/paper.csv");
pub const MINI_MAS_PAPER_AUTHOR: &str = include_str!("../data/mini_mas/paper_author.csv");
pub const MINI_MAS_TITLE_SIM: &str = include_str!("../data/mini_mas/title_sim.csv");
pub const MINI_MAS_BLOCKING_RULES: &str = include_str!("../data/mini_mas/blocking.md");

pub fn mini_mas_schemas() -> [RelationSchema; 3] {
    [
        schema_from_specs(
            "Author",
            &["AID:rid", "Name:short-string", "Affiliation:short-string", "Bl:block"],
        ),
        schema_from_specs(
            "Paper",
            &[
                "PID:rid",
                "Title:long-text",
                "Year:numeric-string",
                "CID:short-string?",
                "JID:short-string?",
                "Keyword:long-text?",
                "Bl:block",
            ],
        ),
        schema_from_specs(
            "PaperAuthor",
            &["PAID:rid", "PID:short-string", "AID:short-string", "Name:short-string", "Affiliation:short-string"],
        ),
    ]
}

/// Author, Paper and PaperAuthor rows of the MAS excerpt with the four
/// blocking rules and the two title similarities.
pub fn mini_mas() -> ChaseFixture {
    let schemas = mini_mas_schemas();
    let mut inst = Instance::with_schemas(schemas.clone()).unwrap();
    for (schema, text) in schemas.iter().zip([MINI_MAS_AUTHOR, MINI_MAS_PAPER, MINI_MAS_PAPER_AUTHOR]) {
        for t in load_csv_reader(text.as_bytes(), schema).unwrap() {
            inst.insert(schema.name(), t).unwrap();
        }
    }
    ChaseFixture {
        instance: inst,
        mds: parse_mds(MINI_MAS_BLOCKING_RULES).unwrap(),
        sims: load_sim_facts_reader(MINI_MAS_TITLE_SIM.as_bytes()).unwrap(),
        mfs: block_mfs(&["Author", "Paper"]),
    }
}

/// The two address objects whose union renders as
/// "250 Hamilton Str., Peterbook, K2J5G3".
pub fn address_objects() -> (Value, Value) {
    let mut a = ObjectSet::new();
    a.insert("number", "250");
    a.insert("stName", "Hamilton Str.");
    a.insert("areaCode", "K2J5G3");
    let mut b = ObjectSet::new();
    b.insert("stName", "Hamilton Str.");
    b.insert("city", "Peterbook");
    (Value::ObjectSet(a), Value::ObjectSet(b))
}

/// Street-address rendering of an address object.
pub fn render_address(v: &Value) -> Option<String> {
    let Value::ObjectSet(o) = v else { return None };
    let part = |k: &str| o.get(k).map(|vs| vs.iter().cloned().collect::<Vec<_>>().join("/"));
    let street = match (part("number"), part("stName")) {
        (Some(n), Some(s)) => format!("{n} {s}"),
        (None, Some(s)) => s,
        (Some(n), None) => n,
        (None, None) => return None,
    };
    let mut parts = vec![street];
    parts.extend(part("city"));
    parts.extend(part("areaCode"));
    Some(parts.join(", "))
}

/// Paper-pair weight vectors over (Title, Year, Venue, Keyword): the two
/// labelled duplicates of the MAS excerpt plus hand-made non-duplicates.
pub const PAPER_TRAINING_VECTORS: [((Tid, Tid), [f64; 4], u8); 8] = [
    ((123, 205), [0.8, 1.0, 1.0, 0.7], 1),
    ((195, 769), [0.93, 1.0, 1.0, 0.5], 1),
    ((123, 195), [0.41, 0.0, 0.0, 0.0], 0),
    ((123, 769), [0.45, 0.0, 0.0, 0.0], 0),
    ((205, 195), [0.43, 0.0, 0.0, 0.1], 0),
    ((205, 769), [0.47, 0.0, 0.0, 0.0], 0),
    ((11, 12), [0.6, 1.0, 0.0, 0.2], 0),
    ((13, 14), [0.92, 1.0, 1.0, 0.9], 1),
];

pub fn paper_training_examples() -> Vec<TrainingExample> {
    PAPER_TRAINING_VECTORS
        .iter()
        .map(|(id, v, label)| TrainingExample {
            vector: WeightVector {
                id: *id,
                entries: v.to_vec(),
            },
            label: *label,
        })
        .collect()
}
