use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use super::{Instance, RelError, RelationSchema, SimilarityFactStore, Tuple, Value};

pub fn load_csv(path: &Path, schema: &RelationSchema) -> Result<Vec<Tuple>, RelError> {
    let file = std::fs::File::open(path).map_err(|e| RelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_csv_reader(file, schema)
}

/// Header must list the schema's attributes in order; the trailing block
/// column may be omitted and is then synthesized from the tid.
pub fn load_csv_reader<R: Read>(reader: R, schema: &RelationSchema) -> Result<Vec<Tuple>, RelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let names: Vec<&str> = schema.attrs().iter().map(|a| a.name.as_str()).collect();
    let synth_block = match schema.block_position() {
        Some(_) if header.len() + 1 == names.len() => true,
        _ => false,
    };
    let expected = if synth_block { &names[..names.len() - 1] } else { &names[..] };
    if header.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(RelError::HeaderMismatch {
            relation: schema.name().to_string(),
            expected: expected.join(","),
            found: header.join(","),
        });
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != expected.len() {
            return Err(RelError::MalformedRow {
                line,
                expected: expected.len(),
                found: rec.len(),
            });
        }
        let tid: u64 = rec[0]
            .trim()
            .parse()
            .ok()
            .filter(|t| *t > 0)
            .ok_or_else(|| RelError::BadTid(rec[0].to_string()))?;
        if !seen.insert(tid) {
            return Err(RelError::DuplicateTid(tid));
        }
        let mut tail = Vec::with_capacity(names.len() - 1);
        for (pos, cell) in rec.iter().enumerate().skip(1) {
            if cell.is_empty() {
                if !schema.attr(pos).nullable {
                    return Err(RelError::NonNullableNull {
                        tid,
                        attribute: schema.attr(pos).name.clone(),
                    });
                }
                tail.push(Value::Null);
            } else {
                tail.push(Value::atomic(cell));
            }
        }
        if synth_block {
            tail.push(Value::Atomic(tid.to_string()));
        }
        out.push(Tuple::new(tid, tail));
    }
    Ok(out)
}

/// Writes one relation with a header row; object-sets use their rendered form.
pub fn write_relation_csv<W: Write>(inst: &Instance, relation: &str, out: W) -> Result<(), RelError> {
    let rel = inst
        .relation(relation)
        .ok_or_else(|| RelError::UnknownRelation(relation.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(rel.schema.attrs().iter().map(|a| a.name.as_str()))?;
    for t in rel.iter() {
        w.write_record(t.values.iter().map(Value::render))?;
    }
    w.flush().map_err(|e| RelError::Io {
        path: relation.to_string(),
        source: e,
    })?;
    Ok(())
}

/// Similarity facts as `tag,left,right` rows.
pub fn load_sim_facts_reader<R: Read>(reader: R) -> Result<SimilarityFactStore, RelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["tag", "left", "right"] {
        return Err(RelError::HeaderMismatch {
            relation: "similarity facts".into(),
            expected: "tag,left,right".into(),
            found: header.join(","),
        });
    }
    let mut store = SimilarityFactStore::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(RelError::MalformedRow {
                line: i + 2,
                expected: 3,
                found: rec.len(),
            });
        }
        store.add(&rec[0], &rec[1], &rec[2]);
    }
    Ok(store)
}

pub fn load_sim_facts(path: &Path) -> Result<SimilarityFactStore, RelError> {
    let file = std::fs::File::open(path).map_err(|e| RelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_sim_facts_reader(file)
}

/// One row per unordered non-reflexive fact, sorted.
pub fn write_sim_facts<W: Write>(store: &SimilarityFactStore, out: W) -> Result<(), RelError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tag", "left", "right"])?;
    for (tag, a, b) in store.distinct_pairs() {
        w.write_record([tag, a.render(), b.render()])?;
    }
    w.flush().map_err(|e| RelError::Io {
        path: "similarity facts".into(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::{AttrKind, AttributeSpec};

    fn author() -> RelationSchema {
        RelationSchema::new(
            "Author",
            vec![
                AttributeSpec::new("AID", AttrKind::ReferenceId),
                AttributeSpec::new("Name", AttrKind::ShortString),
                AttributeSpec::new("Affiliation", AttrKind::ShortString).nullable(),
                AttributeSpec::new("Bl", AttrKind::BlockNumber),
            ],
        )
        .unwrap()
    }

    #[test]
    fn header_only_gives_no_rows() {
        let rows = load_csv_reader("AID,Name,Affiliation\n".as_bytes(), &author()).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn short_row_is_malformed() {
        let data = "AID,Name,Affiliation,Bl\n1,a,b\n";
        assert!(matches!(
            load_csv_reader(data.as_bytes(), &author()),
            Err(RelError::MalformedRow { line: 2, expected: 4, found: 3 })
        ));
    }

    #[test]
    fn empty_cell_is_null_when_allowed() {
        let data = "AID,Name,Affiliation\n7,\"Doe, J\",\n";
        let rows = load_csv_reader(data.as_bytes(), &author()).unwrap();
        assert_eq!(rows[0].values[1], Value::atomic("Doe, J"));
        assert_eq!(rows[0].values[2], Value::Null);
        assert_eq!(rows[0].values[3], Value::atomic("7"));
        let bad = "AID,Name,Affiliation\n7,,x\n";
        assert!(matches!(
            load_csv_reader(bad.as_bytes(), &author()),
            Err(RelError::NonNullableNull { tid: 7, .. })
        ));
    }

    #[test]
    fn duplicate_and_bad_tids() {
        let dup = "AID,Name,Affiliation\n1,a,b\n1,c,d\n";
        assert!(matches!(
            load_csv_reader(dup.as_bytes(), &author()),
            Err(RelError::DuplicateTid(1))
        ));
        let neg = "AID,Name,Affiliation\n-1,a,b\n";
        assert!(matches!(
            load_csv_reader(neg.as_bytes(), &author()),
            Err(RelError::BadTid(_))
        ));
    }

    #[test]
    fn sim_facts_round_trip() {
        let mut s = SimilarityFactStore::new();
        s.add("Title", "a, b", "c");
        s.add("Name", "x", "y");
        let mut buf = Vec::new();
        write_sim_facts(&s, &mut buf).unwrap();
        assert_eq!(load_sim_facts_reader(buf.as_slice()).unwrap(), s);
    }
}
