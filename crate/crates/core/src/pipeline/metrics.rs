use std::io::Write;

use crate::blocking::BlockingMode;
use crate::merge::DuplicatePairSet;
use crate::relcore::RelError;

/// `(precision, recall)`. Precision is 1 when nothing is predicted and
/// recall is 1 when there is nothing to find.
pub fn precision_recall(predicted: &DuplicatePairSet, truth: &DuplicatePairSet) -> (f64, f64) {
    let tp = predicted.iter().filter(|(a, b)| truth.contains(*a, *b)).count();
    let ratio = |den: usize| if den == 0 { 1.0 } else { tp as f64 / den as f64 };
    (ratio(predicted.len()), ratio(truth.len()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub records: usize,
    /// Candidate pairs S.
    pub candidates: usize,
    /// n², summed over relations for aggregate rows.
    pub total_pairs: usize,
    pub predicted: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl PairCounts {
    pub fn new(records: usize, candidates: usize, predicted: &DuplicatePairSet, truth: Option<&DuplicatePairSet>) -> Self {
        let (tp, fp, fn_) = match truth {
            Some(t) => {
                let tp = predicted.iter().filter(|(a, b)| t.contains(*a, *b)).count();
                (tp, predicted.len() - tp, t.len() - tp)
            }
            None => (0, 0, 0),
        };
        PairCounts {
            records,
            candidates,
            total_pairs: records * records,
            predicted: predicted.len(),
            tp,
            fp,
            fn_,
        }
    }

    pub fn add(&mut self, o: &PairCounts) {
        self.records += o.records;
        self.candidates += o.candidates;
        self.total_pairs += o.total_pairs;
        self.predicted += o.predicted;
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mode: BlockingMode,
    pub relation: String,
    pub counts: PairCounts,
    pub reduction_ratio: f64,
    /// Absent without ground truth.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl MetricsReport {
    pub fn new(mode: BlockingMode, relation: &str, counts: PairCounts, has_truth: bool) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let rr = match counts.total_pairs {
            0 => 1.0,
            n => 1.0 - counts.candidates as f64 / n as f64,
        };
        MetricsReport {
            mode,
            relation: relation.to_string(),
            counts,
            reduction_ratio: rr,
            precision: has_truth.then(|| ratio(counts.tp, counts.tp + counts.fp)),
            recall: has_truth.then(|| ratio(counts.tp, counts.tp + counts.fn_)),
        }
    }
}

/// `mode,relation,records,candidates,total_pairs,reduction_ratio,predicted,tp,fp,fn,precision,recall`,
/// ratios to six decimals, blank when undefined.
pub fn write_metrics_csv<W: Write>(rows: &[MetricsReport], out: W) -> Result<(), RelError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mode",
        "relation",
        "records",
        "candidates",
        "total_pairs",
        "reduction_ratio",
        "predicted",
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
    ])?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.6}"));
    for r in rows {
        let c = &r.counts;
        w.write_record([
            r.mode.name().to_string(),
            r.relation.clone(),
            c.records.to_string(),
            c.candidates.to_string(),
            c.total_pairs.to_string(),
            format!("{:.6}", r.reduction_ratio),
            c.predicted.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            opt(r.precision),
            opt(r.recall),
        ])?;
    }
    w.flush().map_err(|e| RelError::Io {
        path: "metrics".into(),
        source: e,
    })?;
    Ok(())
}
