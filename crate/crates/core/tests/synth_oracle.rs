use std::time::Instant;

use pvauction_core::linkage::{LinkageConfig, LinkageInputs, Reliability};
use pvauction_core::metrics::{programme_aggregates, MetricsConfig};
use pvauction_core::oracle::oracle_diff;
use pvauction_core::pipeline::{run_pipeline, PipelineRun};
use pvauction_core::registers::PricingRule;
use pvauction_core::synth::{generate_world, World, WorldConfig};

fn pipeline(world: &World) -> PipelineRun {
    let r = &world.registers;
    let inputs = LinkageInputs {
        auction_results: &r.auction_results,
        units: &r.units,
        payments: &r.payments,
        market_values: &r.market_values,
        tariffs: &r.tariffs,
    };
    run_pipeline(&inputs, &r.pv_index, &LinkageConfig::default(), &MetricsConfig::default()).unwrap()
}

#[test]
fn untampered_world_has_empty_diff() {
    let start = Instant::now();
    let world = generate_world(&WorldConfig::programme(42)).unwrap();
    let run = pipeline(&world);
    let diff = oracle_diff(&world.truth, &run.linkage, &run.outcomes, &run.auctions).unwrap();
    assert!(world.truth.projects.len() >= 500, "{} projects", world.truth.projects.len());
    assert!(diff.is_clean(), "{:#?}", &diff.entries[..diff.entries.len().min(10)]);
    assert_eq!(diff.pass_rate(), 1.0);
    assert!(diff.checked_bid_values > 400);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn several_seeds_pass() {
    for seed in [1, 2, 3] {
        let mut cfg = WorldConfig::programme(seed);
        cfg.auctions.truncate(4);
        let world = generate_world(&cfg).unwrap();
        let run = pipeline(&world);
        let diff = oracle_diff(&world.truth, &run.linkage, &run.outcomes, &run.auctions).unwrap();
        assert!(diff.is_clean(), "seed {seed}: {:?}", diff.entries.first());
    }
}

#[test]
fn zero_premium_path_is_exercised() {
    let mut cfg = WorldConfig::programme(9);
    cfg.auctions.truncate(3);
    cfg.market.spike_probability = 0.0;
    cfg.market.mean = 20.0;
    let world = generate_world(&cfg).unwrap();
    let run = pipeline(&world);
    let with_payments = run.linkage.estimates.iter().filter(|e| e.evidence != Reliability::NoData).count();
    assert!(with_payments > 0);
    assert!(run
        .linkage
        .estimates
        .iter()
        .filter(|e| e.evidence != Reliability::NoData)
        .all(|e| e.evidence == Reliability::ZeroPremium && e.consolidated_full.is_none()));
    let diff = oracle_diff(&world.truth, &run.linkage, &run.outcomes, &run.auctions).unwrap();
    assert!(diff.is_clean());
}

#[test]
fn perturbed_market_value_hits_only_exposed_projects() {
    let mut cfg = WorldConfig::programme(5);
    cfg.auctions.truncate(3);
    let mut world = generate_world(&cfg).unwrap();
    let target = world.registers.market_values[30].month;
    world.registers.market_values[30].value += pvauction_core::Price::from_hundredths(10);
    let run = pipeline(&world);
    let diff = oracle_diff(&world.truth, &run.linkage, &run.outcomes, &run.auctions).unwrap();
    assert!(!diff.is_clean());

    // projects with a positive premium in the perturbed month
    let exposed: std::collections::BTreeSet<_> = world
        .registers
        .payments
        .iter()
        .filter(|p| p.month == target && p.tariff_id == "MP-FIP" && p.payment_ct > 0.0)
        .map(|p| p.unit_id)
        .collect();
    let flagged = diff.flagged_projects();
    for t in world.truth.projects.iter().filter(|t| t.unit_id.is_some_and(|u| exposed.contains(&u))) {
        assert!(flagged.contains(&t.project_id) || diff.entries.iter().any(|e| e.project_id.map(|p| p.bid) == Some(t.project_id.bid)));
        let est = run.linkage.estimates.iter().find(|e| e.project_id == t.project_id).unwrap();
        assert_eq!(est.evidence, Reliability::Unreliable);
    }
    // every flagged project shares a bid with an exposed project
    let exposed_bids: std::collections::BTreeSet<_> = world
        .truth
        .projects
        .iter()
        .filter(|t| t.unit_id.is_some_and(|u| exposed.contains(&u)))
        .map(|t| t.project_id.bid)
        .collect();
    assert!(flagged.iter().all(|p| exposed_bids.contains(&p.bid)));
}

#[test]
fn deleted_payments_isolate_one_project() {
    let mut cfg = WorldConfig::programme(6);
    cfg.auctions.truncate(3);
    cfg.behaviour.missing_payment_probability = 0.0;
    let mut world = generate_world(&cfg).unwrap();
    let victim = world.truth.projects.iter().find(|t| t.built && t.positive_premium_months > 0).unwrap().clone();
    let unit = victim.unit_id.unwrap();
    world.registers.payments.retain(|p| p.unit_id != unit);
    let run = pipeline(&world);
    let flag = run.linkage.payment_flags.iter().find(|(id, _)| *id == victim.project_id).unwrap().1;
    assert_eq!(flag, pvauction_core::linkage::PaymentFlag::NoPayments);
    let diff = oracle_diff(&world.truth, &run.linkage, &run.outcomes, &run.auctions).unwrap();
    assert_eq!(diff.flagged_projects().into_iter().collect::<Vec<_>>(), vec![victim.project_id]);
}

#[test]
fn pooled_rates_match_ground_truth() {
    let world = generate_world(&WorldConfig::programme(17)).unwrap();
    let run = pipeline(&world);
    for range in [1..=8, 9..=12, 1..=12] {
        let pooled = programme_aggregates(&run.auctions, range.clone()).unwrap().metrics;
        let truth: Vec<_> = world.truth.auctions.iter().filter(|a| range.contains(&a.auction_index)).collect();
        let awarded: f64 = truth.iter().map(|a| a.awarded_capacity_kw).sum();
        let built: f64 = truth.iter().map(|a| a.built_capacity_kw).sum();
        assert!((pooled.rr - built / awarded).abs() < 1e-9);
        let projects: Vec<_> =
            world.truth.projects.iter().filter(|p| p.built && range.contains(&p.auction_index)).collect();
        let reloc = projects.iter().filter(|p| p.relocated).count() as f64 / projects.len() as f64;
        let late = projects.iter().filter(|p| p.late).count() as f64 / projects.len() as f64;
        assert!((pooled.lchg.unwrap() - reloc).abs() < 1e-12);
        assert!((pooled.bl.unwrap() - late).abs() < 1e-12);
    }
}

#[test]
fn uniform_price_values_equal_the_marginal() {
    let world = generate_world(&WorldConfig::programme(21)).unwrap();
    let run = pipeline(&world);
    for (index, spec) in &run.specs {
        if spec.pricing_rule != PricingRule::UniformPrice {
            continue;
        }
        let marginal = run.awards[index].max_awarded_bid.unwrap();
        let ids: Vec<_> = run.linkage.projects.iter().filter(|p| p.auction_index == *index).map(|p| p.project_id).collect();
        let values: Vec<_> = run
            .linkage
            .estimates
            .iter()
            .filter(|e| ids.contains(&e.project_id))
            .filter_map(|e| e.consolidated_full.map(|v| (v, e.reliability)))
            .collect();
        assert!(!values.is_empty());
        assert!(values.iter().all(|(v, r)| *v == marginal && *r == Reliability::Excluded));
    }
}

/// Planted shares at a first-round level come back within binomial noise.
#[test]
fn planted_penalty_shares_are_recovered() {
    let mut cfg = WorldConfig::programme(23);
    cfg.behaviour.relocation_probability = 0.68;
    cfg.behaviour.late_probability = 0.54;
    let world = generate_world(&cfg).unwrap();
    let run = pipeline(&world);
    let pooled = programme_aggregates(&run.auctions, 1..=12).unwrap().metrics;
    let n = pooled.n_built as f64;
    for (observed, planted) in [(pooled.lchg.unwrap(), 0.68), (pooled.bl.unwrap(), 0.54)] {
        let sd = (planted * (1.0 - planted) / n).sqrt();
        assert!((observed - planted).abs() < 4.0 * sd, "{observed} vs {planted} (n {n})");
    }
}
