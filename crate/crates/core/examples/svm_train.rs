//! Trains the linear SVM on labelled paper-pair weight vectors, prints the
//! model file and classifies two new pairs with both decision forms.

use mder::classify::{build_training_matrix, render_model, svm_predict, svm_predict_dual, svm_train, SvmParams, WeightVector};
use mder::fixtures::paper_training_examples;

fn main() -> anyhow::Result<()> {
    let (x, y) = build_training_matrix(&paper_training_examples())?;
    let names: Vec<String> = ["Title", "Year", "Venue", "Keyword"].iter().map(|s| s.to_string()).collect();
    let model = svm_train(&x, &y, &names, SvmParams { max_epochs: 10_000, ..SvmParams::default() })?;
    print!("{}", render_model(&model));
    for entries in [vec![0.9, 1.0, 1.0, 0.6], vec![0.5, 0.0, 1.0, 0.1]] {
        let v = WeightVector { id: (0, 0), entries };
        println!("{:?} -> primal {} dual {}", v.entries, svm_predict(&model, &v)?, svm_predict_dual(&model, &v)?);
    }
    Ok(())
}
