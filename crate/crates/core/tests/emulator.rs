use yeastloc_core::{
    build_training_pairs, cross_validate, generate, localize, predict_nn, train_emulator,
    Compartment, Dataset, EngineKind, Mlp, MlpConfig, PipelineConfig, SynthSpec,
};

fn small(seed: u64) -> (Dataset, PipelineConfig) {
    let d = generate(&SynthSpec {
        seed,
        n_proteins: 42,
        ..Default::default()
    })
    .unwrap();
    let order: Vec<String> = d.features.iter().map(|f| f.name.clone()).collect();
    (d, PipelineConfig::with_features(&order))
}

#[test]
fn pairs_are_teacher_forced() {
    let (d, cfg) = small(3);
    let pairs = build_training_pairs(&d, &cfg).unwrap();
    let train = d.proteins.iter().filter(|p| p.subset < 6).count();
    assert_eq!(pairs.len(), train * cfg.feature_order.len());
    for p in d.proteins.iter().filter(|p| p.subset < 6) {
        let trace = localize(p, &cfg.feature_order, &d, &cfg.bayes).unwrap();
        let mine: Vec<_> = pairs.iter().filter(|x| x.protein == p.id).collect();
        for (step, pair) in trace.steps.iter().zip(&mine) {
            assert_eq!(&pair.input[..5], step.input.components());
            assert_eq!(&pair.target, step.output.components());
        }
        // Each step starts from the previous oracle output, not a prediction.
        for w in mine.windows(2) {
            assert_eq!(w[0].target[..], w[1].input[..5]);
        }
    }
}

#[test]
fn zero_network_yields_uniform_steps() {
    let (d, cfg) = small(4);
    let m = Mlp::zeros(&cfg.mlp).unwrap();
    for p in &d.proteins {
        let t = predict_nn(&m, p, &cfg, &d).unwrap();
        for s in &t.steps {
            for v in s.output.components() {
                assert!((v - 0.2).abs() < 1e-15);
            }
        }
        assert_eq!(t.predicted, Compartment::C);
    }
}

#[test]
fn empty_order_returns_prior() {
    let (d, cfg) = small(5);
    let m = Mlp::init(&cfg.mlp).unwrap();
    let empty = PipelineConfig {
        feature_order: vec![],
        ..cfg
    };
    for p in &d.proteins {
        let t = predict_nn(&m, p, &empty, &d).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.predicted, p.prior.argmax());
    }
}

#[test]
fn huge_threshold_stops_after_one_epoch() {
    let (d, mut cfg) = small(6);
    cfg.train.mse_threshold = 1e9;
    let pairs = build_training_pairs(&d, &cfg).unwrap();
    let run = train_emulator(&pairs, &cfg).unwrap();
    assert_eq!(run.history.len(), 1);
    assert!(run.converged);
}

#[test]
fn training_lowers_epoch_error() {
    let (d, mut cfg) = small(7);
    cfg.train.max_epochs = 300;
    cfg.mlp = MlpConfig {
        hidden_sizes: vec![8],
        seed: 2,
    };
    let pairs = build_training_pairs(&d, &cfg).unwrap();
    let run = train_emulator(&pairs, &cfg).unwrap();
    assert_eq!(run.history.len(), 300);
    assert!(!run.converged);
    assert!(run.history[299] < 0.5 * run.history[0]);
    let again = train_emulator(&pairs, &cfg).unwrap();
    assert_eq!(again, run);
}

#[test]
fn network_cross_validation_covers_every_fold() {
    let (d, mut cfg) = small(8);
    cfg.train.max_epochs = 20;
    let cv = cross_validate(&d, &cfg, EngineKind::Nn).unwrap();
    assert_eq!(cv.folds.len(), 7);
    assert_eq!(cv.folds.iter().map(|f| f.n_proteins).sum::<usize>(), 42);
    let mean = cv.folds.iter().map(|f| f.accuracy).sum::<f64>() / 7.0;
    assert!((mean - cv.mean_accuracy).abs() < 1e-12);
}
