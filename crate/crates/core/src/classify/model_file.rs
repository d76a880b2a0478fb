//! Line-oriented model format:
//!
//! ```text
//! mder-svm 1
//! features Title Year Venue Keyword
//! weights 1.5 0.25 0 -0.5
//! bias -1.25
//! params c=10 max_epochs=2000 tol=0.000001 seed=42
//! converged true epochs=312
//! support <alpha> <y> <x1> ... <xk>
//! ```
//!
//! `support` lines are optional and repeatable. Feature names may not
//! contain whitespace.

use std::fmt::Write;

use super::svm::{SupportVector, SvmModel, SvmParams};
use super::ClassifyError;

const MAGIC: &str = "mder-svm 1";

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn render_model(m: &SvmModel) -> String {
    let mut s = String::new();
    let p = &m.params;
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "features {}", m.feature_names.join(" "));
    let _ = writeln!(s, "weights {}", join(&m.weights));
    let _ = writeln!(s, "bias {}", m.bias);
    let _ = writeln!(s, "params c={} max_epochs={} tol={} seed={}", p.c, p.max_epochs, p.tol, p.seed);
    let _ = writeln!(s, "converged {} epochs={}", m.converged, m.epochs);
    for sv in &m.support {
        let _ = writeln!(s, "support {} {} {}", sv.alpha, sv.y, join(&sv.x));
    }
    s
}

pub fn parse_model(text: &str) -> Result<SvmModel, ClassifyError> {
    let bad = |line: usize, reason: &str| ClassifyError::BadModelFile {
        line,
        reason: reason.to_string(),
    };
    let floats = |line: usize, words: &[&str]| -> Result<Vec<f64>, ClassifyError> {
        words
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| bad(line, &format!("not a number: {w}"))))
            .collect()
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, _)) => return Err(bad(n, "expected `mder-svm 1` header")),
        None => return Err(bad(1, "empty model file")),
    }
    let mut model = SvmModel {
        feature_names: Vec::new(),
        weights: Vec::new(),
        bias: 0.0,
        support: Vec::new(),
        params: SvmParams::default(),
        converged: false,
        epochs: 0,
        loss_history: Vec::new(),
    };
    let mut seen_weights = false;
    for (n, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "features" => model.feature_names = words[1..].iter().map(|w| w.to_string()).collect(),
            "weights" => {
                model.weights = floats(n, &words[1..])?;
                seen_weights = true;
            }
            "bias" if words.len() == 2 => model.bias = floats(n, &words[1..])?[0],
            "params" => {
                for kv in &words[1..] {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad(n, "expected key=value"))?;
                    let num = || v.parse::<f64>().map_err(|_| bad(n, &format!("bad value for {k}")));
                    let int = || v.parse::<u64>().map_err(|_| bad(n, &format!("bad value for {k}")));
                    match k {
                        "c" => model.params.c = num()?,
                        "tol" => model.params.tol = num()?,
                        "max_epochs" => model.params.max_epochs = int()? as usize,
                        "seed" => model.params.seed = int()?,
                        _ => return Err(bad(n, &format!("unknown parameter {k}"))),
                    }
                }
            }
            "converged" if words.len() >= 2 => {
                model.converged = words[1] == "true";
                if let Some(e) = words.get(2).and_then(|w| w.strip_prefix("epochs=")) {
                    model.epochs = e.parse().map_err(|_| bad(n, "bad epoch count"))?;
                }
            }
            "support" if words.len() >= 3 => {
                let v = floats(n, &words[1..])?;
                model.support.push(SupportVector {
                    alpha: v[0],
                    y: v[1],
                    x: v[2..].to_vec(),
                });
            }
            other => return Err(bad(n, &format!("unexpected line starting with {other}"))),
        }
    }
    if !seen_weights {
        return Err(bad(0, "no weights line"));
    }
    if model.feature_names.len() != model.weights.len() {
        return Err(bad(0, "feature and weight counts differ"));
    }
    if model.support.iter().any(|s| s.x.len() != model.weights.len()) {
        return Err(bad(0, "support vector length differs from weights"));
    }
    Ok(model)
}
