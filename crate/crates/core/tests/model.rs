use relay_auction::experiments::ScenarioConfig;
use relay_auction::model::{
    generate_bids, generate_topology, valuation, Position, RadioParams,
};
use relay_auction::seed;

fn cfg(m: usize, n: usize, size: usize) -> ScenarioConfig {
    ScenarioConfig {
        num_scbs: m,
        num_sues: n,
        mues_per_group: size,
        ..ScenarioConfig::default()
    }
}

#[test]
fn budgets_average_half_the_valuation() {
    let config = cfg(10, 10, 1000);
    let top = generate_topology(&config, &mut seed::rng(4, &[1])).unwrap();
    let bids = generate_bids(&top, &config.radio, (1, 10), &mut seed::rng(4, &[2])).unwrap();
    let (mut ratio_sum, mut count) = (0.0, 0usize);
    for g in 0..10 {
        for j in 0..1000 {
            for k in 0..10 {
                let b = bids.get(g, j, k);
                assert!(b.budget > 0.0 && b.budget < b.valuation);
                assert!((1..=10).contains(&b.demand));
                ratio_sum += b.budget / b.valuation;
                count += 1;
            }
        }
    }
    assert_eq!(count, 100_000);
    let mean = ratio_sum / count as f64;
    assert!((mean - 0.5).abs() <= 0.5 * 0.02, "mean budget/valuation {mean}");
}

#[test]
fn different_seeds_give_different_topologies() {
    let config = cfg(10, 10, 50);
    for s in 0..100u64 {
        let a = generate_topology(&config, &mut seed::rng(s, &[1])).unwrap();
        let b = generate_topology(&config, &mut seed::rng(s + 1000, &[1])).unwrap();
        assert_ne!(a, b);
        let again = generate_topology(&config, &mut seed::rng(s, &[1])).unwrap();
        assert_eq!(a, again);
        let inside = |p: &Position| (0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y);
        assert!(a.scb_positions.iter().chain(&a.sue_positions).all(inside));
        assert!(a.mue_positions.iter().flatten().all(inside));
        assert_eq!(a.group_of_mue().len(), 500);
    }
}

#[test]
fn midpoint_relay_beats_direct_link_beyond_a_crossover() {
    let p = RadioParams::default();
    let s = Position::new(0.0, 0.0);
    let mut crossover = None;
    for d in 1..=200 {
        let d = d as f64;
        let e = Position::new(d, 0.0);
        let r = Position::new(d / 2.0, 0.0);
        let v = valuation(&s, &r, &e, &p);
        assert!(v >= 0.0);
        if v > 1.0 && crossover.is_none() {
            crossover = Some(d);
        }
        if let Some(c) = crossover {
            assert!(v > 1.0, "relay advantage lost at {d} after crossover {c}");
        }
    }
    let c = crossover.expect("relay never wins");
    assert!(c > 1.0 && c < 200.0, "crossover at {c}");
}

#[test]
fn generated_valuations_often_exceed_one() {
    let config = cfg(10, 10, 50);
    let top = generate_topology(&config, &mut seed::rng(8, &[1])).unwrap();
    let bids = generate_bids(&top, &config.radio, (1, 10), &mut seed::rng(8, &[2])).unwrap();
    let above = (0..10)
        .flat_map(|g| (0..50).flat_map(move |j| (0..10).map(move |k| (g, j, k))))
        .filter(|&(g, j, k)| bids.get(g, j, k).valuation > 1.0)
        .count();
    assert!(above > 0, "no relay ever improves the direct rate");
}
