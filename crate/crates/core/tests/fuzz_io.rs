use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};
use submatch::fuzz::{add_attribute_noise, add_structural_noise, plant_query, score_pairs};
use submatch::io::{graph_to_json, parse_graph, ConfigDocument, GraphDocument, MappingDocument};
use submatch::synth::{cfg_like, random_connected};
use submatch::{match_graphs, AttributeMap, GraphBuilder, MatchParams, NodeId};

#[test]
fn added_edges_follow_the_binomial_mixture() {
    // Without edges, a trial adds Binomial(C(s, 2), level / 4) edges where s
    // is the Binomial(n, 1 - level) number of surviving nodes.
    let n = 30u64;
    let level = 0.08;
    let trials = 4000;
    let mut b = GraphBuilder::new(false);
    for i in 0..n {
        b.add_node(format!("n{i:02}"), AttributeMap::new());
    }
    let g = b.build().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut observed = vec![0usize; 64];
    for _ in 0..trials {
        let (_, stats) = add_structural_noise(&g, level, &mut rng).unwrap();
        observed[stats.edges_added.min(63)] += 1;
    }

    let survivors = Binomial::new(1.0 - level, n).unwrap();
    let mut expected = vec![0.0; 64];
    for s in 0..=n {
        let ws = survivors.pmf(s);
        let pairs = s * s.saturating_sub(1) / 2;
        let added = Binomial::new(level / 4.0, pairs).unwrap();
        for (k, e) in expected.iter_mut().enumerate().take(63) {
            *e += ws * added.pmf(k as u64);
        }
    }
    expected[63] = 1.0 - expected[..63].iter().sum::<f64>();

    // Merge bins until each expects at least five trials.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for k in 0..64 {
        o += observed[k] as f64;
        e += expected[k] * trials as f64;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    let chi2: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (bins.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2 {chi2} over {df} df, p = {p}");
}

#[test]
fn noise_is_seeded() {
    let g = random_connected(80, 3.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    for seed in 0..5 {
        let a = add_structural_noise(&g, 0.1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = add_structural_noise(&g, 0.1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(a, b);
        let a = add_attribute_noise(&g, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = add_attribute_noise(&g, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn truth_scores_perfectly() {
    let t = cfg_like(300, 500, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..10 {
        let seed = NodeId::new(format!("bb{:03}", i * 29));
        let (q, truth) = plant_query(&t, &seed, 12, &mut rng).unwrap();
        let r = score_pairs(&truth.pairs, &q, &truth);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }
}

#[test]
fn mapping_document_recomputes_its_costs() {
    let t = random_connected(200, 3.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let seed = NodeId::new("n100");
    let (q, _) = plant_query(&t, &seed, 10, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let (q, _) = add_attribute_noise(&q, 0.3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let params = MatchParams::default();
    let r = match_graphs(&t, &q, &params).unwrap();
    let doc = MappingDocument::from_result(&r, &t, &q, &params, false).unwrap();
    doc.verify(&t, &q).unwrap();
    let back = MappingDocument::parse(&doc.to_json(), "mem").unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_json(), doc.to_json());

    let mut tampered = doc.clone();
    tampered.mappings[0].global_cost += 0.01;
    assert!(tampered.verify(&t, &q).is_err());
}

#[test]
fn config_echo_round_trips() {
    let params = MatchParams {
        k: 5,
        gamma: 0.25,
        ..MatchParams::exact()
    };
    let c = ConfigDocument::from_parts(&params, &Default::default(), 7);
    let text = c.to_toml();
    let back = submatch::io::parse_config(&text, "mem").unwrap();
    assert_eq!(back.params(), params);
    assert_eq!(back.trials, 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_json_round_trips(n in 1usize..40, deg in 1.0f64..4.0, seed: u64, directed: bool) {
        let g = if directed {
            cfg_like(n.max(3), n.max(3), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        } else {
            random_connected(n, deg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        let text = graph_to_json(&g);
        let back = parse_graph(&text, "mem").unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(GraphDocument::from_graph(&back), GraphDocument::from_graph(&g));
        prop_assert_eq!(graph_to_json(&back), text);
    }
}
