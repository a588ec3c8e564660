use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use pvauction_core::linkage::{LinkageConfig, LinkageInputs, Reliability};
use pvauction_core::metrics::{programme_aggregates, MetricsConfig};
use pvauction_core::pipeline::{run_pipeline, PipelineRun};
use pvauction_core::registers::PricingRule;
use pvauction_core::synth::{generate_world, World, WorldConfig};
use pvauction_core::Price;

fn small_world(seed: u64, rounds: usize) -> World {
    let mut cfg = WorldConfig::programme(seed);
    cfg.auctions.truncate(rounds);
    generate_world(&cfg).unwrap()
}

fn pipeline(world: &World, small_threshold_kw: f64) -> PipelineRun {
    let r = &world.registers;
    let inputs = LinkageInputs {
        auction_results: &r.auction_results,
        units: &r.units,
        payments: &r.payments,
        market_values: &r.market_values,
        tariffs: &r.tariffs,
    };
    run_pipeline(&inputs, &r.pv_index, &LinkageConfig::default(), &MetricsConfig { small_threshold_kw }).unwrap()
}

#[test]
fn generation_is_deterministic() {
    let a = small_world(11, 5);
    let b = small_world(11, 5);
    assert_eq!(a, b);
    assert_ne!(a.registers.payments, small_world(12, 5).registers.payments);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn linkage_invariants(seed in any::<u64>(), rounds in 2usize..5) {
        let world = small_world(seed, rounds);
        let run = pipeline(&world, 2_000.0);
        let l = &run.linkage;

        // one full value per bid among projects carrying a value
        let mut per_bid: BTreeMap<_, BTreeSet<Price>> = BTreeMap::new();
        for e in &l.estimates {
            if e.reliability != Reliability::Unreliable {
                if let Some(v) = e.consolidated_full {
                    per_bid.entry(e.project_id.bid).or_default().insert(v);
                }
            }
        }
        prop_assert!(per_bid.values().all(|v| v.len() == 1));

        // uniform-price rounds: one value per round
        let rule: BTreeMap<u32, PricingRule> =
            run.specs.iter().map(|(k, s)| (*k, s.pricing_rule)).collect();
        let mut uniform: BTreeMap<u32, BTreeSet<Price>> = BTreeMap::new();
        for (p, e) in l.projects.iter().zip(&l.estimates) {
            prop_assert_eq!(p.project_id, e.project_id);
            if rule[&p.auction_index] == PricingRule::UniformPrice {
                if let Some(v) = e.consolidated_full {
                    prop_assert_eq!(e.reliability, Reliability::Excluded);
                    uniform.entry(p.auction_index).or_default().insert(v);
                }
            }
        }
        prop_assert!(uniform.values().all(|v| v.len() == 1));

        for c in &l.counts {
            prop_assert!(c.awarded_projects >= c.built_projects);
            prop_assert!(c.built_projects >= c.unit_ids);
            prop_assert!(c.unit_ids >= c.payments_found);
            prop_assert!(c.payments_found >= c.reliable_payment);
            prop_assert!(c.final_bid_values >= c.reliable_payment);
        }
    }

    #[test]
    fn outcome_invariants(seed in any::<u64>(), rounds in 2usize..5, threshold in 1_000.0f64..5_000.0) {
        let world = small_world(seed, rounds);
        let run = pipeline(&world, threshold);

        let mut exp_seen: BTreeMap<_, Vec<(u32, bool)>> = BTreeMap::new();
        let mut small: BTreeMap<_, BTreeSet<bool>> = BTreeMap::new();
        for o in &run.outcomes {
            prop_assert_eq!(o.dur_days.is_some(), o.status);
            prop_assert_eq!(o.exp, !o.new_dev);
            if o.auction_index == 1 {
                prop_assert!(!o.exp);
            }
            exp_seen.entry(o.developer_key.clone()).or_default().push((o.auction_index, o.exp));
            small.entry(o.developer_key.clone()).or_default().insert(o.small_dev);
            if let Some(bmg) = o.bmg {
                match run.specs[&o.auction_index].pricing_rule {
                    PricingRule::PayAsBid => prop_assert!(bmg >= Price::ZERO),
                    PricingRule::UniformPrice => prop_assert_eq!(bmg, Price::ZERO),
                }
            }
        }
        for mut seen in exp_seen.into_values() {
            seen.sort();
            let first_exp = seen.iter().position(|(_, e)| *e).unwrap_or(seen.len());
            prop_assert!(seen[first_exp..].iter().all(|(_, e)| *e));
        }
        prop_assert!(small.values().all(|s| s.len() == 1));

        for m in &run.auctions {
            let mine: Vec<_> = run.outcomes.iter().filter(|o| o.auction_index == m.auction_index).collect();
            let built = mine.iter().filter(|o| o.status).count();
            let late = mine.iter().filter(|o| o.status && o.pen_dline).count();
            let moved = mine.iter().filter(|o| o.status && o.pen_loc).count();
            if built > 0 {
                prop_assert_eq!(m.bl, Some(late as f64 / built as f64));
                prop_assert_eq!(m.lchg, Some(moved as f64 / built as f64));
            } else {
                prop_assert_eq!(m.bl, None);
            }
            prop_assert!(m.rr >= 0.0 && m.bcr >= 0.0);
            for share in [m.bl, m.lchg, m.bl_capacity, m.lchg_capacity].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&share));
            }
            let single = programme_aggregates(&run.auctions, m.auction_index..=m.auction_index).unwrap();
            prop_assert_eq!(&single.metrics, m);
        }
    }
}
