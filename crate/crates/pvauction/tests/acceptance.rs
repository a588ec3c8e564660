//! One pass/fail line per acceptance criterion.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::*;
use pvauction_core::clearing::{assess_penalty, clear_auction, ClearingConfig};
use pvauction_core::ids::Programme;
use pvauction_core::linkage::{full_bid_value, LinkageConfig, LinkageInputs};
use pvauction_core::metrics::{programme_aggregates, MetricsConfig};
use pvauction_core::pipeline::{run_pipeline, PipelineRun};
use pvauction_core::registers::{AuctionSpec, PostalCode, PricingRule, SubmittedBid};
use pvauction_core::stats::{mann_whitney, ols_normalized};
use pvauction_core::synth::{generate_world, World, WorldConfig};
use pvauction_core::{BidId, Price};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

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

fn round_trip_oracle() -> Outcome {
    let start = Instant::now();
    let world = generate_world(&WorldConfig::programme(42)).unwrap();
    let run = pipeline(&world);
    let elapsed = start.elapsed().as_secs_f64();
    let values: BTreeMap<_, _> = run.linkage.estimates.iter().map(|e| (e.project_id, e.consolidated_full)).collect();
    let planted: Vec<_> = world.truth.projects.iter().filter(|p| p.built && p.positive_premium_months > 0).collect();
    let matched = planted
        .iter()
        .filter(|p| {
            values[&p.project_id].is_some_and(|v| (v.to_f64() - p.tariff.to_f64()).abs() <= 1e-9)
        })
        .count();
    let auctions = world.truth.auctions.len();
    let projects = world.truth.projects.len();
    check(
        auctions == 12 && projects >= 500 && matched == planted.len() && elapsed < 10.0,
        format!(
            "{auctions} auctions, {projects} projects, {matched}/{} positive-premium values within 1e-9, {elapsed:.2} s",
            planted.len()
        ),
    )
}

fn spec(tc: f64, rule: PricingRule, ceiling: Price) -> AuctionSpec {
    AuctionSpec {
        auction_index: 1,
        date: date("2015-04-15"),
        tendered_capacity_kw: tc,
        pricing_rule: rule,
        ceiling_price: ceiling,
        first_announcement: date("2015-04-21"),
    }
}

fn bid(seq: u32, kw: f64, price: Price) -> SubmittedBid {
    SubmittedBid {
        bid_id: BidId::new(Programme::Ffa, 15, 1, seq).unwrap(),
        developer_name: format!("B{seq}"),
        developer_address: format!("S{seq}"),
        capacity_kw: kw,
        price,
        postal_code: PostalCode::from_number(80_000 + seq).unwrap(),
        land_use_docs: false,
    }
}

/// The award set by listing all subsets: the one that contains every
/// admissible bid ranked ahead of any member, still needed its worst
/// member to reach the volume, and either reaches it or holds every
/// admissible bid.
fn enumerate_awards(s: &AuctionSpec, bids: &[SubmittedBid]) -> Vec<usize> {
    let key = |b: &SubmittedBid| (b.price, b.capacity_kw as i64, b.bid_id.sequence);
    let admissible: Vec<usize> = (0..bids.len()).filter(|&i| bids[i].price <= s.ceiling_price).collect();
    let mut found = Vec::new();
    for mask in 0u32..1 << bids.len() {
        let set: Vec<usize> = (0..bids.len()).filter(|i| mask >> i & 1 == 1).collect();
        if set.iter().any(|i| !admissible.contains(i)) {
            continue;
        }
        let closed = set.iter().all(|&i| admissible.iter().all(|&j| key(&bids[j]) >= key(&bids[i]) || set.contains(&j)));
        let cap: f64 = set.iter().map(|&i| bids[i].capacity_kw).sum();
        let needed = set
            .iter()
            .max_by_key(|&&i| key(&bids[i]))
            .is_none_or(|&w| cap - bids[w].capacity_kw < s.tendered_capacity_kw);
        let complete = cap >= s.tendered_capacity_kw || set.len() == admissible.len();
        if closed && needed && complete {
            found.push(set);
        }
    }
    assert_eq!(found.len(), 1, "{bids:?}");
    found.pop().unwrap()
}

fn clearing_matches_enumeration() -> Outcome {
    let caps = [1_000.0, 4_000.0, 6_000.0];
    let prices = [500, 600, 700].map(Price::from_hundredths);
    let mut checked = 0;
    let mut mismatches = 0;
    for tc in [5_000.0, 8_000.0, 10_000.0, 12_000.0, 20_000.0] {
        for ceiling in [Price::from_hundredths(650), Price::from_hundredths(900)] {
            for rule in [PricingRule::PayAsBid, PricingRule::UniformPrice] {
                for code in 0..729usize {
                    let bids: Vec<SubmittedBid> = (0..3u32)
                        .map(|i| {
                            let c = code / 9usize.pow(i) % 9;
                            bid(i + 1, caps[c / 3], prices[c % 3])
                        })
                        .collect();
                    let s = spec(tc, rule, ceiling);
                    let out = clear_auction(&s, &bids, &ClearingConfig::default()).unwrap().outcome;
                    let set = enumerate_awards(&s, &bids);
                    let marginal = set.iter().map(|&i| bids[i].price).max();
                    let mut expected: Vec<(BidId, Price)> = set
                        .iter()
                        .map(|&i| {
                            let pay = if rule == PricingRule::PayAsBid { bids[i].price } else { marginal.unwrap() };
                            (bids[i].bid_id, pay)
                        })
                        .collect();
                    let mut got: Vec<(BidId, Price)> = out.awarded_bids.iter().map(|a| (a.bid_id, a.pay_tariff)).collect();
                    expected.sort();
                    got.sort();
                    mismatches += (expected != got) as u32;
                    checked += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = spec(60_000.0, PricingRule::PayAsBid, Price::from_hundredths(1_109));
    let mut bids: Vec<SubmittedBid> = (0..40u32)
        .map(|i| bid(i + 1, 1_000.0 + 250.0 * (i % 29) as f64, Price::from_hundredths(600 + ((i * 37) % 450) as i64)))
        .collect();
    let reference = clear_auction(&s, &bids, &ClearingConfig::default()).unwrap().outcome;
    let mut stable = 0;
    for _ in 0..100 {
        // Fisher-Yates with the seeded generator
        for i in (1..bids.len()).rev() {
            let j = (rand_chacha::rand_core::RngCore::next_u64(&mut rng) % (i as u64 + 1)) as usize;
            bids.swap(i, j);
        }
        stable += (clear_auction(&s, &bids, &ClearingConfig::default()).unwrap().outcome == reference) as u32;
    }
    check(
        mismatches == 0 && stable == 100,
        format!("{checked} three-bid fixtures, {mismatches} mismatches; {stable}/100 shuffles identical"),
    )
}

fn penalty_arithmetic() -> Outcome {
    let b = bid(1, 1_000.0, Price::from_hundredths(850));
    let reduction = assess_penalty(&b, 1_000.0, true, true, true).unwrap().tariff_reduction;
    let net = price("8.31");
    let full = full_bid_value(net, true, true);
    let mut gaps = Vec::new();
    for seed in [42, 43, 44] {
        let world = generate_world(&WorldConfig::programme(seed)).unwrap();
        let run = pipeline(&world);
        gaps.push(programme_aggregates(&run.auctions, 1..=12).unwrap().metrics.net_vs_full_gap.unwrap());
    }
    check(
        reduction == Price::from_hundredths(60)
            && full - net == Price::from_hundredths(60)
            && gaps.iter().all(|g| (g - 0.2).abs() <= 0.05),
        format!("reduction {reduction}, full - net {}, calibrated gaps {gaps:.3?}", full - net),
    )
}

fn link_and_analyze(f: &Fixture, dir: &Path) -> PathBuf {
    let regs = f.write(&dir.join("in"));
    let (linked, out) = (dir.join("link"), dir.join("analysis"));
    run_ok(&["link", "--input", p(&regs), "--out", p(&linked)]);
    run_ok(&["analyze", "--registers", p(&regs), "--linkage", p(&linked), "--out", p(&out)]);
    out
}

fn metrics_fixtures() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = link_and_analyze(&penalty_rounds(&PENALTY_ROWS[..1]), &dir.path().join("first"));
    let m = &rows(&out.join("auction_metrics.csv"))[0];
    let (lchg1, bl1) = (num(m, "lchg"), num(m, "bl"));

    let out = link_and_analyze(&penalty_rounds(&PENALTY_ROWS), &dir.path().join("pooled"));
    let aggregates = rows(&out.join("aggregates.csv"));
    let all = row_for(&aggregates, "range", "AU1-AU12");
    let (lchg, bl) = (num(all, "lchg"), num(all, "bl"));
    let per_row_late: u32 = [20, 16, 14, 8, 8, 18, 15, 8, 2, 4, 1, 6].iter().sum();
    println!(
        "    note: lateness shares rounded per round would pool to {per_row_late}/422 = {:.1}%; the pooled fixture uses the tabulated 27%",
        100.0 * per_row_late as f64 / 422.0
    );
    check(
        lchg1 == 25.0 / 37.0 && bl1 == 20.0 / 37.0 && lchg == 195.0 / 422.0 && bl == 114.0 / 422.0,
        format!(
            "first round lchg {:.0}% bl {:.0}%; pooled lchg {:.0}% bl {:.0}% (ratios exact)",
            100.0 * lchg1,
            100.0 * bl1,
            100.0 * lchg,
            100.0 * bl
        ),
    )
}

fn u_of(a: &[f64], b: &[f64]) -> usize {
    a.iter().map(|x| b.iter().filter(|y| x > y).count()).sum()
}

fn z(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    x.iter().map(|v| (v - m) / sd).collect()
}

fn split(values: &[f64], mask: u32) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, v) in values.iter().enumerate() {
        if mask >> i & 1 == 1 { a.push(*v) } else { b.push(*v) }
    }
    (a, b)
}

fn statistics() -> Outcome {
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=12usize {
        let values: Vec<f64> = (0..n).map(|i| (i * i) as f64 + 0.5 * i as f64).collect();
        for n1 in 1..n {
            let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() as usize == n1).collect();
            let split = |mask: u32| split(&values, mask);
            let us: Vec<usize> = masks.iter().map(|&m| { let (a, b) = split(m); u_of(&a, &b) }).collect();
            let total = us.len() as f64;
            for (&mask, &u) in masks.iter().zip(&us) {
                let lower = us.iter().filter(|&&v| v <= u).count() as f64 / total;
                let upper = us.iter().filter(|&&v| v >= u).count() as f64 / total;
                let expected = (2.0 * lower.min(upper)).min(1.0);
                let (a, b) = split(mask);
                worst = worst.max((mann_whitney(&a, &b).unwrap().p_value - expected).abs());
                pairs += 1;
            }
        }
    }

    const PLANTED: [f64; 3] = [6.13, 1.70, -0.24];
    let sigma = 0.247;
    let covariates = |rng: &mut ChaCha8Rng| -> (Vec<f64>, Vec<f64>) {
        let cost = Normal::new(0.55, 0.08).unwrap();
        let cover = Normal::new(4.0, 1.2).unwrap();
        (0..185).map(|_| (cost.sample(rng), cover.sample(rng))).unzip()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(185);
    let (cost, cover) = covariates(&mut rng);
    let (z1, z2) = (z(&cost), z(&cover));
    let y: Vec<f64> = (0..185).map(|i| PLANTED[0] + PLANTED[1] * z1[i] + PLANTED[2] * z2[i]).collect();
    let fit = ols_normalized(&y, &cost, &cover).unwrap();
    let coef_err = fit.coefficients.iter().zip(PLANTED).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);

    let noise = Normal::new(0.0, sigma).unwrap();
    let (mut within, mut sum) = (0, 0.0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cost, cover) = covariates(&mut rng);
        let (z1, z2) = (z(&cost), z(&cover));
        let y: Vec<f64> =
            (0..185).map(|i| PLANTED[0] + PLANTED[1] * z1[i] + PLANTED[2] * z2[i] + noise.sample(&mut rng)).collect();
        let se = ols_normalized(&y, &cost, &cover).unwrap().residual_se;
        within += ((se - sigma).abs() <= 0.1 * sigma) as u32;
        sum += se;
    }
    let mean_se = sum / 100.0;
    check(
        worst < 1e-12 && coef_err < 1e-8 && (fit.r_squared - 1.0).abs() < 1e-12 && within >= 90
            && (mean_se - sigma).abs() <= 0.1 * sigma,
        format!(
            "{pairs} group pairs, max p error {worst:.1e}; noiseless coefficient error {coef_err:.1e}, R2 {:.12}; \
             residual SE mean {mean_se:.4}, {within}/100 seeds within 10%",
            fit.r_squared
        ),
    )
}

fn uniform_price_values() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut f = Fixture::new();
    add_uniform_round(&mut f);
    let regs = f.write(&dir.path().join("in"));
    let linked = dir.path().join("link");
    run_ok(&["link", "--input", p(&regs), "--out", p(&linked)]);
    let values = rows(&linked.join("bid_values.csv"));
    let full: Vec<&str> = values.iter().map(|v| v["bv_full"].as_str()).collect();
    let fixture_ok = full.len() == 4 && full.iter().all(|v| *v == "8.4900");

    let mut cfg = WorldConfig::programme(7);
    cfg.auctions.truncate(4);
    let world = generate_world(&cfg).unwrap();
    let run = pipeline(&world);
    let marginal: BTreeMap<u32, Option<Price>> =
        world.truth.auctions.iter().map(|a| (a.auction_index, a.marginal)).collect();
    let mut synth_checked = 0;
    let mut synth_ok = true;
    for (p, e) in run.linkage.projects.iter().zip(&run.linkage.estimates) {
        if run.specs[&p.auction_index].pricing_rule == PricingRule::UniformPrice {
            if let Some(v) = e.consolidated_full {
                synth_ok &= Some(v) == marginal[&p.auction_index];
                synth_checked += 1;
            }
        }
    }
    check(
        fixture_ok && synth_ok && synth_checked > 0,
        format!("fixture values {full:?}; {synth_checked} synthetic uniform-price values equal their marginal"),
    )
}

fn disclosure(formulas_verified: bool) -> Outcome {
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = std::fs::read_to_string(&readme).unwrap_or_default();
    let section = text.find("## What the test suite cannot reproduce").map(|i| &text[i..]).unwrap_or("");
    let section = section.get(2..).and_then(|rest| rest.find("\n## ")).map_or(section, |end| &section[..end + 2]);
    let named = ["82%", "97%", "56%", "542", "-0.18", "185"];
    let missing: Vec<&str> = named.iter().copied().filter(|n| !section.contains(n)).collect();
    check(
        !section.is_empty() && missing.is_empty() && formulas_verified,
        format!(
            "README disclosure section {}; headline numbers missing from it: {missing:?}; formula fixtures {}",
            if section.is_empty() { "absent" } else { "present" },
            if formulas_verified { "pass" } else { "fail" }
        ),
    )
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let mut trees = Vec::new();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        // relative paths, so the recorded paths agree between the two runs
        for args in [
            &["synth", "--seed", "2024", "--out", "world"][..],
            &["link", "--input", "world", "--out", "link"],
            &["analyze", "--registers", "world", "--linkage", "link", "--out", "analysis"],
        ] {
            let out = Command::new(env!("CARGO_BIN_EXE_pvauction")).args(args).current_dir(dir.path()).output().unwrap();
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        trees.push(tree(dir.path()));
    }
    let differing: Vec<_> = trees[0].iter().filter(|(k, v)| trees[1].get(*k) != Some(v)).map(|(k, _)| k.clone()).collect();
    check(
        trees[0].len() == trees[1].len() && differing.is_empty(),
        format!("{} files per tree, {} differ", trees[0].len(), differing.len()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "round-trip oracle", round_trip_oracle()),
        (2, "clearing", clearing_matches_enumeration()),
        (3, "penalty arithmetic", penalty_arithmetic()),
        (4, "metrics fixtures", metrics_fixtures()),
        (5, "statistics", statistics()),
        (6, "uniform-price invariant", uniform_price_values()),
    ];
    let formulas = results.iter().all(|(_, _, r)| r.is_ok());
    results.push((7, "non-reproducible headline numbers disclosed", disclosure(formulas)));
    results.push((8, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
