//! Compares pipeline outputs against the ground truth of a synthetic world.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ids::ProjectId;
use crate::linkage::{BidValueEstimate, DeveloperKey, LinkageOutput, Reliability};
use crate::metrics::{AuctionMetrics, ProjectOutcome};
use crate::synth::{GroundTruth, TrueProject};

pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffEntry {
    pub project_id: Option<ProjectId>,
    pub auction_index: u32,
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
    /// Projects with at least one positive-premium month.
    pub checked_bid_values: usize,
    pub matched_bid_values: usize,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }

    /// Share of checkable bid values reconstructed exactly.
    pub fn pass_rate(&self) -> f64 {
        if self.checked_bid_values == 0 { 1.0 } else { self.matched_bid_values as f64 / self.checked_bid_values as f64 }
    }

    pub fn flagged_projects(&self) -> BTreeSet<ProjectId> {
        self.entries.iter().filter_map(|e| e.project_id).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    MissingOutputs(&'static str),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::MissingOutputs(what) => write!(f, "pipeline outputs missing: {what}"),
        }
    }
}

impl core::error::Error for OracleError {}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= ORACLE_TOLERANCE,
        (None, None) => true,
        _ => false,
    }
}

/// The evidence class the pipeline should assign to a truth project.
pub fn expected_evidence(p: &TrueProject, bid_observed: bool) -> Reliability {
    if !p.built {
        Reliability::NoData
    } else if p.positive_premium_months > 0 {
        Reliability::Observed
    } else if bid_observed {
        Reliability::PropagatedFromBid
    } else if p.has_payments {
        Reliability::ZeroPremium
    } else {
        Reliability::NoData
    }
}

pub fn oracle_diff(
    truth: &GroundTruth,
    linkage: &LinkageOutput,
    outcomes: &[ProjectOutcome],
    metrics: &[AuctionMetrics],
) -> Result<DiffReport, OracleError> {
    if !truth.projects.is_empty() {
        if linkage.projects.is_empty() {
            return Err(OracleError::MissingOutputs("linked projects"));
        }
        if linkage.estimates.len() != linkage.projects.len() {
            return Err(OracleError::MissingOutputs("bid value estimates"));
        }
        if outcomes.is_empty() {
            return Err(OracleError::MissingOutputs("project outcomes"));
        }
        if metrics.is_empty() {
            return Err(OracleError::MissingOutputs("auction metrics"));
        }
    }
    let mut report = DiffReport::default();
    let mut push = |project_id, auction_index, field, expected: String, actual: String| {
        report.entries.push(DiffEntry { project_id, auction_index, field, expected, actual })
    };

    let estimates: BTreeMap<ProjectId, &BidValueEstimate> =
        linkage.estimates.iter().map(|e| (e.project_id, e)).collect();
    let records: BTreeMap<ProjectId, usize> =
        linkage.projects.iter().enumerate().map(|(i, p)| (p.project_id, i)).collect();
    let outcome_of: BTreeMap<ProjectId, &ProjectOutcome> = outcomes.iter().map(|o| (o.project_id, o)).collect();

    let observed_bids: BTreeSet<_> =
        truth.projects.iter().filter(|p| p.built && p.positive_premium_months > 0).map(|p| p.project_id.bid).collect();

    let mut checked = 0;
    let mut matched = 0;
    for t in &truth.projects {
        let id = t.project_id;
        let a = t.auction_index;
        let Some(&ri) = records.get(&id) else {
            push(Some(id), a, "project", "present".into(), "missing".into());
            continue;
        };
        let record = &linkage.projects[ri];
        if record.is_built() != t.built {
            push(Some(id), a, "status", t.built.to_string(), record.is_built().to_string());
        }
        if t.built && record.unit_id != t.unit_id {
            push(Some(id), a, "unit_id", opt(t.unit_id.as_ref()), opt(record.unit_id.as_ref()));
        }

        let est = estimates[&id];
        let observed = observed_bids.contains(&id.bid);
        let evidence = expected_evidence(t, observed);
        if est.evidence != evidence {
            push(Some(id), a, "evidence", evidence.as_str().into(), est.evidence.as_str().into());
        }
        let expected_full = if evidence.has_value() { Some(t.tariff) } else { None };
        let actual_full = est.consolidated_full;
        let full_ok = close(expected_full.map(|p| p.to_f64()), actual_full.map(|p| p.to_f64()));
        if t.built && t.positive_premium_months > 0 {
            checked += 1;
            if full_ok {
                matched += 1;
            }
        }
        if !full_ok {
            push(Some(id), a, "consolidated_full", opt(expected_full), opt(actual_full));
        }
        if let (Some(net), Some(full)) = (est.consolidated_net, est.consolidated_full) {
            if full - net != t.reduction {
                push(Some(id), a, "reduction", t.reduction.to_string(), (full - net).to_string());
            }
        }

        let Some(o) = outcome_of.get(&id) else {
            push(Some(id), a, "outcome", "present".into(), "missing".into());
            continue;
        };
        if o.pen_loc != t.relocated {
            push(Some(id), a, "pen_loc", t.relocated.to_string(), o.pen_loc.to_string());
        }
        if o.pen_dline != t.late {
            push(Some(id), a, "pen_dline", t.late.to_string(), o.pen_dline.to_string());
        }
        if o.dur_days != t.dur_days {
            push(Some(id), a, "dur_days", opt(t.dur_days), opt(o.dur_days));
        }
    }
    let truth_ids: BTreeSet<ProjectId> = truth.projects.iter().map(|t| t.project_id).collect();
    for p in &linkage.projects {
        if !truth_ids.contains(&p.project_id) {
            push(Some(p.project_id), p.auction_index, "project", "absent".into(), "present".into());
        }
    }

    // developer grouping must be a bijection with the true identities
    let mut key_of_dev: BTreeMap<u32, BTreeSet<&DeveloperKey>> = BTreeMap::new();
    let mut dev_of_key: BTreeMap<&DeveloperKey, BTreeSet<u32>> = BTreeMap::new();
    for t in &truth.projects {
        if let Some(&ri) = records.get(&t.project_id) {
            let key = &linkage.projects[ri].developer_key;
            key_of_dev.entry(t.developer).or_default().insert(key);
            dev_of_key.entry(key).or_default().insert(t.developer);
        }
    }
    for (dev, keys) in &key_of_dev {
        if keys.len() > 1 {
            push(None, 0, "developer_split", format!("developer {dev}"), format!("{} keys", keys.len()));
        }
    }
    for (key, devs) in &dev_of_key {
        if devs.len() > 1 {
            push(None, 0, "developer_merge", key.as_str().into(), format!("{} developers", devs.len()));
        }
    }

    let by_index: BTreeMap<u32, &AuctionMetrics> = metrics.iter().map(|m| (m.auction_index, m)).collect();
    for ta in &truth.auctions {
        let a = ta.auction_index;
        let Some(m) = by_index.get(&a) else {
            push(None, a, "auction_metrics", "present".into(), "missing".into());
            continue;
        };
        if !close(Some(ta.rr), Some(m.rr)) {
            push(None, a, "rr", ta.rr.to_string(), m.rr.to_string());
        }
        if !close(ta.lchg, m.lchg) {
            push(None, a, "lchg", opt(ta.lchg), opt(m.lchg));
        }
        if !close(ta.bl, m.bl) {
            push(None, a, "bl", opt(ta.bl), opt(m.bl));
        }
    }

    report.checked_bid_values = checked;
    report.matched_bid_values = matched;
    Ok(report)
}
