use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use antsel::beam::anchor_set;
use antsel::layout::{align_layout, ArrayGeometry};
use antsel::neural::{
    generate_dataset, load_model, save_model, select_tra_dl, train, AdamConfig, MlpModel, DEFAULT_HIDDEN,
};
use antsel::selector::{SelectionQuery, Selector, SelectorConfig, TraEvaluator};
use antsel::signal::db_to_linear;

fn template(m: usize) -> SelectionQuery {
    SelectionQuery::new(anchor_set(0.0, 0.0, 1).unwrap(), 1.0, ArrayGeometry::new(21, 0.5).unwrap(), m, 2048)
        .unwrap()
}

#[test]
fn dataset_is_deterministic_and_labels_have_m_ones() {
    let selector = Selector::new(SelectorConfig::default());
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate_dataset(12, (-0.9, 0.9), (-10.0, 20.0), &template(4), &selector, &mut rng).unwrap()
    };
    let a = draw(5);
    assert_eq!(a, draw(5));
    assert_eq!(a.len(), 12);
    for s in &a {
        assert_eq!(s.label.popcount(), 4);
        assert_eq!(align_layout(&s.label), s.label);
        assert!((-0.9..0.9).contains(&s.u) && (-10.0..20.0).contains(&s.snr_db));
    }
    assert_eq!(generate_one(5), generate_one(5));
}

fn generate_one(seed: u64) -> Vec<antsel::neural::TrainingSample> {
    let selector = Selector::new(SelectorConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_dataset(1, (-0.9, 0.9), (-10.0, 20.0), &template(4), &selector, &mut rng).unwrap()
}

#[test]
fn saved_model_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let model = MlpModel::init(MlpModel::dims_for(&DEFAULT_HIDDEN, 21), &mut rng).unwrap();
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);

    let text = std::fs::read_to_string(&path).unwrap();
    for key in ["layer_dims", "weights", "biases", "input_scale", "metadata"] {
        assert!(text.contains(key));
    }
    std::fs::write(&path, &text[..text.len() - 40]).unwrap();
    assert!(load_model(&path).is_err());
    assert!(load_model(&dir.path().join("absent.json")).is_err());
}

// Trains on the reference distribution and compares the network's picks
// with the greedy labels on held-out draws.
#[test]
fn trained_network_imitates_greedy() {
    let m = 6;
    let t = template(m);
    let selector = Selector::new(SelectorConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = generate_dataset(10_000, (-0.9, 0.9), (-10.0, 20.0), &t, &selector, &mut rng).unwrap();
    let held_out = generate_dataset(1000, (-0.9, 0.9), (-10.0, 20.0), &t, &selector, &mut rng).unwrap();

    let mut model = MlpModel::init(MlpModel::dims_for(&DEFAULT_HIDDEN, 21), &mut rng).unwrap();
    let mut replay = model.clone();
    let report = train(&mut model, &data, &AdamConfig::default(), &mut rng).unwrap();
    assert_eq!(report.loss_history.len(), 200);
    assert!(report.loss_history.last().unwrap() <= &report.loss_history[0]);

    // same seed, same trajectory
    let mut rng_a = ChaCha8Rng::seed_from_u64(9);
    let mut rng_b = ChaCha8Rng::seed_from_u64(9);
    let short = AdamConfig { iterations: 5, ..AdamConfig::default() };
    let mut other = replay.clone();
    train(&mut replay, &data, &short, &mut rng_a).unwrap();
    train(&mut other, &data, &short, &mut rng_b).unwrap();
    assert_eq!(replay.params(), other.params());

    let config = SelectorConfig::default();
    let close = held_out
        .iter()
        .filter(|s| {
            let q = SelectionQuery {
                anchors: anchor_set(s.u, 0.0, 1).unwrap(),
                snr: db_to_linear(s.snr_db),
                ..t.clone()
            };
            let mut eval = TraEvaluator::new(&q, &config).unwrap();
            let picked = select_tra_dl(&model, s.u, s.snr_db, m).unwrap();
            eval.worst_case(&picked).unwrap() <= 3.0 * eval.worst_case(&s.label).unwrap()
        })
        .count();
    assert!(close >= 700, "{close} of 1000 within a factor of 3");
}
