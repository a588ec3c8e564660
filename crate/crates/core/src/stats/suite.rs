//! The hypothesis suite on duration, location, region, developer
//! structure and competition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{mann_whitney, ols_normalized, pearson_test, RegressionResult};
use crate::metrics::{developer_shares, AuctionMetrics, ProjectOutcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Smallest group (or series) size for which a test is run.
    pub min_group_size: usize,
    /// First auction of the developer-share trend series.
    pub trend_from_auction: u32,
    /// Inclusive auction range of the regression sample; all when `None`.
    pub regression_auctions: Option<(u32, u32)>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { min_group_size: 2, trend_from_auction: 1, regression_auctions: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypothesisMethod {
    MannWhitney,
    /// Pearson correlation of a per-auction share with the auction index.
    Trend,
    Pearson,
    Regression,
}

impl HypothesisMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisMethod::MannWhitney => "mann_whitney",
            HypothesisMethod::Trend => "trend_pearson",
            HypothesisMethod::Pearson => "pearson",
            HypothesisMethod::Regression => "ols_normalized",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntryStatus {
    Tested,
    Untestable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub method: HypothesisMethod,
    pub sample_filter: &'static str,
    pub group_labels: [&'static str; 2],
    pub group_ns: [usize; 2],
    pub group_means: [Option<f64>; 2],
    /// U, r or F depending on the method.
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub status: EntryStatus,
}

impl HypothesisEntry {
    /// Whether the null is rejected at `alpha`; `None` when untestable.
    pub fn rejected_at(&self, alpha: f64) -> Option<bool> {
        self.p_value.map(|p| p < alpha)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub entries: Vec<HypothesisEntry>,
    pub regression: Option<RegressionResult>,
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() { None } else { Some(v.iter().sum::<f64>() / v.len() as f64) }
}

struct Spec {
    id: &'static str,
    description: &'static str,
    sample_filter: &'static str,
    labels: [&'static str; 2],
}

fn rank_entry(spec: Spec, a: &[f64], b: &[f64], config: &SuiteConfig) -> HypothesisEntry {
    let mut entry = HypothesisEntry {
        id: spec.id,
        description: spec.description,
        method: HypothesisMethod::MannWhitney,
        sample_filter: spec.sample_filter,
        group_labels: spec.labels,
        group_ns: [a.len(), b.len()],
        group_means: [mean(a), mean(b)],
        statistic: None,
        p_value: None,
        status: EntryStatus::Tested,
    };
    if a.len() < config.min_group_size || b.len() < config.min_group_size {
        entry.status = EntryStatus::Untestable(format!(
            "group sizes {}/{} below minimum {}",
            a.len(),
            b.len(),
            config.min_group_size
        ));
        return entry;
    }
    match mann_whitney(a, b) {
        Ok(r) => {
            entry.statistic = Some(r.u_statistic);
            entry.p_value = Some(r.p_value);
        }
        Err(e) => entry.status = EntryStatus::Untestable(format!("{e}")),
    }
    entry
}

fn correlation_entry(spec: Spec, method: HypothesisMethod, x: &[f64], y: &[f64]) -> HypothesisEntry {
    let mut entry = HypothesisEntry {
        id: spec.id,
        description: spec.description,
        method,
        sample_filter: spec.sample_filter,
        group_labels: spec.labels,
        group_ns: [x.len(), y.len()],
        group_means: [mean(x), mean(y)],
        statistic: None,
        p_value: None,
        status: EntryStatus::Tested,
    };
    match pearson_test(x, y) {
        Ok(r) => {
            entry.statistic = Some(r.r);
            entry.p_value = Some(r.p_value);
        }
        Err(e) => entry.status = EntryStatus::Untestable(format!("{e}")),
    }
    entry
}

fn split<F, V>(outcomes: &[&ProjectOutcome], group: F, value: V) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&ProjectOutcome) -> bool,
    V: Fn(&ProjectOutcome) -> Option<f64>,
{
    let mut a = Vec::new();
    let mut b = Vec::new();
    for o in outcomes {
        if let Some(v) = value(o) {
            if group(o) { a.push(v) } else { b.push(v) }
        }
    }
    (a, b)
}

/// Runs every hypothesis in a fixed order. Entries whose samples are too
/// small are marked untestable; the suite never fails as a whole.
pub fn hypothesis_suite(outcomes: &[ProjectOutcome], auctions: &[AuctionMetrics], config: &SuiteConfig) -> SuiteReport {
    let mut sorted: Vec<&ProjectOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.project_id);
    let built: Vec<&ProjectOutcome> = sorted.iter().copied().filter(|o| o.status).collect();
    let bid_sample: Vec<&ProjectOutcome> =
        sorted.iter().copied().filter(|o| o.in_bid_sample && o.bv_full.is_some()).collect();
    let dur = |o: &ProjectOutcome| o.dur_days.map(|d| d as f64);
    let bv = |o: &ProjectOutcome| o.bv_full.map(|p| p.to_f64());
    let bmg = |o: &ProjectOutcome| o.bmg.map(|p| p.to_f64());

    let mut entries = Vec::new();

    let (a, b) = split(&built, |o| o.pen_loc, dur);
    entries.push(rank_entry(
        Spec {
            id: "H5.1",
            description: "duration does not differ with location change",
            sample_filter: "built projects",
            labels: ["relocated", "not_relocated"],
        },
        &a,
        &b,
        config,
    ));
    let (a, b) = split(&bid_sample, |o| o.pen_loc, bmg);
    entries.push(rank_entry(
        Spec {
            id: "H5.2",
            description: "distance to the marginal bid does not differ with location change",
            sample_filter: "built projects with a reliable full bid value",
            labels: ["relocated", "not_relocated"],
        },
        &a,
        &b,
        config,
    ));
    let (a, b) = split(&built, |o| o.reg, dur);
    entries.push(rank_entry(
        Spec {
            id: "H5.3",
            description: "duration does not differ between south and north",
            sample_filter: "built projects",
            labels: ["south", "north"],
        },
        &a,
        &b,
        config,
    ));
    let (a, b) = split(&bid_sample, |o| o.reg, bv);
    entries.push(rank_entry(
        Spec {
            id: "H5.4",
            description: "full bid value does not differ between south and north",
            sample_filter: "built projects with a reliable full bid value",
            labels: ["south", "north"],
        },
        &a,
        &b,
        config,
    ));

    let shares: Vec<_> =
        developer_shares(outcomes).into_iter().filter(|s| s.auction_index >= config.trend_from_auction).collect();
    let index: Vec<f64> = shares.iter().map(|s| s.auction_index as f64).collect();
    let new: Vec<f64> = shares.iter().map(|s| s.new_share).collect();
    let small: Vec<f64> = shares.iter().map(|s| s.small_share).collect();
    entries.push(correlation_entry(
        Spec {
            id: "H6.1",
            description: "share of projects by new developers trends with the auction index",
            sample_filter: "awarded projects, per auction",
            labels: ["auction_index", "new_share"],
        },
        HypothesisMethod::Trend,
        &index,
        &new,
    ));
    entries.push(correlation_entry(
        Spec {
            id: "H6.2",
            description: "share of projects by small developers trends with the auction index",
            sample_filter: "awarded projects, per auction",
            labels: ["auction_index", "small_share"],
        },
        HypothesisMethod::Trend,
        &index,
        &small,
    ));

    let with_bmg: Vec<&ProjectOutcome> = bid_sample.iter().copied().filter(|o| o.bmg.is_some()).collect();
    let size: Vec<f64> = with_bmg.iter().map(|o| o.developer_size_kw).collect();
    let gap: Vec<f64> = with_bmg.iter().filter_map(|o| bmg(o)).collect();
    entries.push(correlation_entry(
        Spec {
            id: "H6.3",
            description: "developer size is uncorrelated with distance to the marginal bid",
            sample_filter: "built projects with a reliable full bid value",
            labels: ["developer_size_kw", "bmg"],
        },
        HypothesisMethod::Pearson,
        &size,
        &gap,
    ));

    let (a, b) = split(&built, |o| o.exp, dur);
    entries.push(rank_entry(
        Spec {
            id: "H6.4",
            description: "duration does not differ with developer experience",
            sample_filter: "built projects",
            labels: ["experienced", "new"],
        },
        &a,
        &b,
        config,
    ));
    let (a, b) = split(&bid_sample, |o| o.exp, bv);
    entries.push(rank_entry(
        Spec {
            id: "H6.5",
            description: "full bid value does not differ with developer experience",
            sample_filter: "built projects with a reliable full bid value",
            labels: ["experienced", "new"],
        },
        &a,
        &b,
        config,
    ));

    // regression of full bid values on normalised cost index and competition
    let by_auction: BTreeMap<u32, &AuctionMetrics> = auctions.iter().map(|m| (m.auction_index, m)).collect();
    let (mut y, mut x1, mut x2) = (Vec::new(), Vec::new(), Vec::new());
    for o in &bid_sample {
        if let Some((lo, hi)) = config.regression_auctions {
            if o.auction_index < lo || o.auction_index > hi {
                continue;
            }
        }
        let Some(m) = by_auction.get(&o.auction_index) else { continue };
        let (Some(pv), Some(v)) = (m.pvc6, bv(o)) else { continue };
        y.push(v);
        x1.push(pv);
        x2.push(m.bcr);
    }
    let mut entry = HypothesisEntry {
        id: "H7",
        description: "cost index and competition do not explain full bid values",
        method: HypothesisMethod::Regression,
        sample_filter: "built projects with a reliable full bid value and a cost index",
        group_labels: ["bv_full", ""],
        group_ns: [y.len(), 0],
        group_means: [mean(&y), None],
        statistic: None,
        p_value: None,
        status: EntryStatus::Tested,
    };
    let regression = match ols_normalized(&y, &x1, &x2) {
        Ok(r) => {
            entry.statistic = Some(r.f_statistic);
            entry.p_value = Some(r.f_p_value);
            Some(r)
        }
        Err(e) => {
            entry.status = EntryStatus::Untestable(format!("{e}"));
            None
        }
    };
    entries.push(entry);

    SuiteReport { entries, regression }
}
