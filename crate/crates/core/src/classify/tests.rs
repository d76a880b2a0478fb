use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures::mini_mas;
use crate::relcore::Value;

fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
    (
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
        vec![0, 0, 1, 1],
    )
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("f{i}")).collect()
}

fn wv(entries: &[f64]) -> WeightVector {
    WeightVector {
        id: (0, 0),
        entries: entries.to_vec(),
    }
}

fn fixed_model(w: &[f64], b: f64) -> SvmModel {
    SvmModel {
        feature_names: names(w.len()),
        weights: w.to_vec(),
        bias: b,
        support: Vec::new(),
        params: SvmParams::default(),
        converged: true,
        epochs: 0,
        loss_history: Vec::new(),
    }
}

fn hinge_total(m: &SvmModel, x: &[Vec<f64>], labels: &[u8]) -> f64 {
    x.iter()
        .zip(labels)
        .map(|(xi, l)| {
            let y = if *l == 1 { 1.0 } else { -1.0 };
            let s: f64 = m.weights.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + m.bias;
            (1.0 - y * s).max(0.0)
        })
        .sum()
}

#[test]
fn separable_set_is_learned_exactly() {
    let (x, y) = separable();
    let m = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    for (xi, yi) in x.iter().zip(&y) {
        assert_eq!(svm_predict(&m, &wv(xi)).unwrap(), *yi);
    }
    assert!(hinge_total(&m, &x, &y) < 1e-12, "model {:?} {}", m.weights, m.bias);
    assert_eq!(svm_predict(&m, &wv(&[1.0, 1.0])).unwrap(), 1);
    assert!(m.converged);
}

#[test]
fn loss_history_never_increases() {
    let (x, y) = separable();
    let m = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    assert!(!m.loss_history.is_empty());
    for w in m.loss_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn single_class_is_rejected() {
    let err = svm_train(&[vec![1.0], vec![2.0]], &[1, 1], &names(1), SvmParams::default()).unwrap_err();
    assert!(matches!(err, ClassifyError::SingleClassTraining { label: 1 }));
    let err = svm_train(&[vec![1.0]], &[0], &names(1), SvmParams::default()).unwrap_err();
    assert!(matches!(err, ClassifyError::SingleClassTraining { label: 0 }));
    assert!(matches!(
        svm_train(&[], &[], &names(1), SvmParams::default()),
        Err(ClassifyError::SingleClassTraining { .. })
    ));
}

#[test]
fn ragged_and_bad_labels_are_rejected() {
    let err = svm_train(&[vec![1.0], vec![2.0, 0.0]], &[0, 1], &names(1), SvmParams::default()).unwrap_err();
    assert!(matches!(err, ClassifyError::RaggedVectors { expected: 1, found: 2 }));
    assert!(matches!(
        svm_train(&[vec![1.0], vec![2.0]], &[0, 2], &names(1), SvmParams::default()),
        Err(ClassifyError::BadLabel(2))
    ));
}

#[test]
fn duplicating_every_example_keeps_the_hyperplane() {
    let (x, y) = separable();
    let once = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
    let y2: Vec<u8> = y.iter().chain(&y).copied().collect();
    let twice = svm_train(&x2, &y2, &names(2), SvmParams::default()).unwrap();
    for (a, b) in once.weights.iter().zip(&twice.weights) {
        assert!((a - b).abs() < 0.05, "{:?} vs {:?}", once.weights, twice.weights);
    }
    assert!((once.bias - twice.bias).abs() < 0.05);
    for xi in &x {
        assert_eq!(svm_predict(&once, &wv(xi)).unwrap(), svm_predict(&twice, &wv(xi)).unwrap());
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    let (x, y) = separable();
    let a = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    let b = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn predict_examples() {
    let m = fixed_model(&[1.0, 0.0], 0.0);
    assert_eq!(svm_predict(&m, &wv(&[2.0, 3.0])).unwrap(), 1);
    assert_eq!(svm_predict(&m, &wv(&[-2.0, 3.0])).unwrap(), 0);
    assert_eq!(svm_predict(&m, &wv(&[0.0, 3.0])).unwrap(), 0);
    assert!(matches!(
        svm_predict(&m, &wv(&[1.0])),
        Err(ClassifyError::DimensionMismatch { expected: 2, found: 1 })
    ));
}

#[test]
fn subgradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<Vec<f64>> = (0..12).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = (0..12).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
    let lambda = 0.05;
    let h = 1e-6;
    let mut checked = 0;
    while checked < 20 {
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let near_kink = x.iter().zip(&y).any(|(xi, yi)| {
            let s: f64 = w.iter().zip(xi).map(|(a, c)| a * c).sum::<f64>() + b;
            (yi * s - 1.0).abs() < 1e-3
        });
        if near_kink {
            continue;
        }
        let (gw, gb) = objective_subgradient(&w, b, &x, &y, lambda);
        let mut analytic = gw.clone();
        analytic.push(gb);
        for (k, g) in analytic.iter().enumerate() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            let (mut bp, mut bm) = (b, b);
            if k < 3 {
                wp[k] += h;
                wm[k] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            let fd = (objective(&wp, bp, &x, &y, lambda) - objective(&wm, bm, &x, &y, lambda)) / (2.0 * h);
            let rel = (fd - g).abs() / g.abs().max(fd.abs()).max(1e-8);
            assert!(rel < 1e-4 || (fd - g).abs() < 1e-9, "coordinate {k}: {g} vs {fd}");
        }
        checked += 1;
    }
}

#[test]
fn dual_prediction_agrees_with_primal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    let y: Vec<u8> = x.iter().map(|v| u8::from(v[0] + 0.5 * v[1] > 0.8)).collect();
    let m = svm_train(&x, &y, &names(3), SvmParams::default()).unwrap();
    assert!(!m.support.is_empty());
    let mut w = vec![0.0; 3];
    for sv in &m.support {
        for (wi, xi) in w.iter_mut().zip(&sv.x) {
            *wi += sv.alpha * sv.y * xi;
        }
    }
    for (a, b) in w.iter().zip(&m.weights) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{w:?} vs {:?}", m.weights);
    }
    for _ in 0..200 {
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let primal = svm_predict(&m, &wv(&v)).unwrap();
        let dual = svm_predict_dual(&m, &wv(&v)).unwrap();
        let margin = super::svm::decision(&m, &v).unwrap().abs();
        if margin > 1e-9 {
            assert_eq!(primal, dual);
        }
    }
}

#[test]
fn model_file_round_trips() {
    let (x, y) = separable();
    let m = svm_train(&x, &y, &names(2), SvmParams::default()).unwrap();
    let text = render_model(&m);
    assert!(text.starts_with("mder-svm 1\n"));
    let back = parse_model(&text).unwrap();
    assert_eq!(back.weights, m.weights);
    assert_eq!(back.bias, m.bias);
    assert_eq!(back.support, m.support);
    assert_eq!(back.params, m.params);
    assert_eq!(back.feature_names, m.feature_names);
    assert_eq!((back.converged, back.epochs), (m.converged, m.epochs));
}

#[test]
fn malformed_model_files_are_rejected() {
    assert!(matches!(parse_model(""), Err(ClassifyError::BadModelFile { .. })));
    assert!(matches!(parse_model("svm 2\nweights 1\n"), Err(ClassifyError::BadModelFile { line: 1, .. })));
    assert!(matches!(
        parse_model("mder-svm 1\nfeatures a b\nweights 1 x\n"),
        Err(ClassifyError::BadModelFile { line: 3, .. })
    ));
    assert!(parse_model("mder-svm 1\nfeatures a b\nweights 1\n").is_err());
    assert!(parse_model("mder-svm 1\nfeatures a\nweights 1\nbias 0.5\n").is_ok());
}

proptest! {
    #[test]
    fn decision_is_scale_invariant(
        w in prop::collection::vec(-5.0f64..5.0, 3),
        b in -5.0f64..5.0,
        v in prop::collection::vec(-5.0f64..5.0, 3),
        scale in 0.01f64..100.0,
    ) {
        let m = fixed_model(&w, b);
        let scaled: Vec<f64> = w.iter().map(|x| x * scale).collect();
        let ms = fixed_model(&scaled, b * scale);
        let d = super::svm::decision(&m, &v).unwrap();
        prop_assume!(d.abs() > 1e-9);
        prop_assert_eq!(svm_predict(&m, &wv(&v)).unwrap(), svm_predict(&ms, &wv(&v)).unwrap());
    }
}

fn paper_spec() -> FeatureSpec {
    FeatureSpec::new("Paper")
        .with("Title", SimFunction::JaroWinkler, 1.0)
        .with("Year", SimFunction::Equality, 1.0)
        .with("CID", SimFunction::Equality, 1.0)
        .with("Keyword", SimFunction::TfidfCosine, 1.0)
}

#[test]
fn weight_vector_is_symmetric_and_weighted() {
    let f = mini_mas();
    let schema = f.instance.schema("Paper").unwrap();
    let spec = paper_spec();
    let pos = spec.positions(schema).unwrap();
    let tuples: Vec<&Tuple> = f.instance.relation("Paper").unwrap().iter().collect();
    let stats = feature_stats(&spec, schema, tuples.iter().copied());
    let (a, b) = (f.instance.tuple(123).unwrap(), f.instance.tuple(205).unwrap());
    let ab = weight_vector(a, b, &spec, &pos, &stats);
    let ba = weight_vector(b, a, &spec, &pos, &stats);
    assert_eq!(ab.entries, ba.entries);
    assert_eq!(ab.id, (123, 205));
    assert_eq!(ab.entries.len(), 4);
    assert_eq!(&ab.entries[1..3], &[1.0, 1.0]);
    assert!(ab.entries[0] > 0.8 && ab.entries[0] < 1.0);

    let doubled = FeatureSpec {
        relation: "Paper".into(),
        features: spec.features.iter().map(|x| Feature { weight: 2.0, ..x.clone() }).collect(),
    };
    let ab2 = weight_vector(a, b, &doubled, &pos, &stats);
    for (x, y) in ab.entries.iter().zip(&ab2.entries) {
        assert!((2.0 * x - y).abs() < 1e-12);
    }

    let same = weight_vector(a, a, &spec, &pos, &stats);
    assert!(same.entries.iter().all(|e| (e - 1.0).abs() < 1e-12), "{:?}", same.entries);
}

#[test]
fn null_feature_scores_zero() {
    let f = mini_mas();
    let schema = f.instance.schema("Paper").unwrap();
    let spec = FeatureSpec::new("Paper").with("JID", SimFunction::Equality, 1.0);
    let pos = spec.positions(schema).unwrap();
    let a = f.instance.tuple(123).unwrap();
    let v = weight_vector(a, a, &spec, &pos, &FeatureStats::new());
    assert_eq!(a.get(pos[0]), &Value::Null);
    assert_eq!(v.entries, vec![0.0]);
}

#[test]
fn bad_features_are_rejected() {
    let f = mini_mas();
    let schema = f.instance.schema("Paper").unwrap();
    for spec in [
        FeatureSpec::new("Paper").with("Nope", SimFunction::Equality, 1.0),
        FeatureSpec::new("Paper").with("PID", SimFunction::Equality, 1.0),
        FeatureSpec::new("Paper").with("Bl", SimFunction::Equality, 1.0),
        FeatureSpec::new("Paper").with("Title", SimFunction::Equality, 0.0),
    ] {
        assert!(matches!(spec.positions(schema), Err(ClassifyError::BadFeature { .. })));
    }
}

#[test]
fn author_features_keep_declared_order() {
    let spec = FeatureSpec::new("Author")
        .with("Fname", SimFunction::JaroWinkler, 1.0)
        .with("Lname", SimFunction::JaroWinkler, 1.0)
        .with("Affiliation", SimFunction::TfidfCosine, 1.0);
    assert_eq!(spec.names(), vec!["Fname", "Lname", "Affiliation"]);
}

#[test]
fn example_vectors_are_classified_as_duplicates() {
    let examples = crate::fixtures::paper_training_examples();
    let (x, y) = build_training_matrix(&examples).unwrap();
    let m = svm_train(&x, &y, &names(4), SvmParams::default()).unwrap();
    for (a, b) in [((123, 205), [0.8, 1.0, 1.0, 0.7]), ((195, 769), [0.93, 1.0, 1.0, 0.5])] {
        let v = WeightVector {
            id: a,
            entries: b.to_vec(),
        };
        assert_eq!(svm_predict(&m, &v).unwrap(), 1, "{a:?}");
    }
}

#[test]
fn training_matrix_shapes() {
    let ex = |e: &[f64], l| TrainingExample {
        vector: wv(e),
        label: l,
    };
    let (m, l) = build_training_matrix(&[ex(&[1.0, 2.0, 3.0], 1), ex(&[0.0, 0.0, 0.0], 0)]).unwrap();
    assert_eq!((m.len(), m[0].len()), (2, 3));
    assert_eq!(l, vec![1, 0]);
    let (m, l) = build_training_matrix(&[]).unwrap();
    assert!(m.is_empty() && l.is_empty());
    assert!(matches!(
        build_training_matrix(&[ex(&[1.0], 1), ex(&[1.0, 2.0], 0)]),
        Err(ClassifyError::RaggedVectors { expected: 1, found: 2 })
    ));

    let mut buf = Vec::new();
    write_training_csv(&[ex(&[0.5, 1.0], 1)], &names(2), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "id1,id2,f0,f1,label\n0,0,0.5,1,1\n");
}

#[test]
fn split_is_seventy_thirty_and_deterministic() {
    let items: Vec<(usize, u8)> = (0..10).map(|i| (i, u8::from(i < 2))).collect();
    let (train, test) = split_70_30(&items, |e| e.1, 9);
    assert_eq!((train.len(), test.len()), (7, 3));
    assert!(train.iter().any(|e| e.1 == 1) && test.iter().any(|e| e.1 == 1));
    assert!(train.iter().any(|e| e.1 == 0) && test.iter().any(|e| e.1 == 0));
    assert_eq!(split_70_30(&items, |e| e.1, 9), (train, test));
    let (a, b) = split_70_30(&Vec::<(usize, u8)>::new(), |e| e.1, 1);
    assert!(a.is_empty() && b.is_empty());
}

proptest! {
    #[test]
    fn split_keeps_every_example_once(n in 0usize..40, seed in any::<u64>(), positives in 0usize..40) {
        let items: Vec<(usize, u8)> = (0..n).map(|i| (i, u8::from(i < positives))).collect();
        let (train, test) = split_70_30(&items, |e| e.1, seed);
        prop_assert_eq!(train.len(), (7 * n).div_ceil(10));
        let mut all: Vec<usize> = train.iter().chain(&test).map(|e| e.0).collect();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for c in [0u8, 1] {
            let total = items.iter().filter(|e| e.1 == c).count();
            if total >= 2 && test.len() >= 2 {
                prop_assert!(train.iter().any(|e| e.1 == c));
                prop_assert!(test.iter().any(|e| e.1 == c));
            }
        }
    }
}
