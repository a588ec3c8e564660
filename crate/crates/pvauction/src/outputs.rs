//! Layouts of every file the commands write, and readers for the ones a
//! later stage consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use pvauction_core::clearing::{AwardOutcome, RejectionReason};
use pvauction_core::linkage::{
    BidValueEstimate, DeveloperKey, DeveloperProfile, LinkageOutput, LinkageWarning, PipelineCounts, ProjectRecord,
    ProjectStatus, Reliability,
};
use pvauction_core::metrics::{
    developer_shares, programme_aggregates, realisation_curve, AuctionMetrics, ProgrammeAggregate, ProjectOutcome,
};
use pvauction_core::oracle::DiffReport;
use pvauction_core::registers::{AuctionSpec, GermanState, PostalCode, PricingRule};
use pvauction_core::stats::{EntryStatus, SuiteReport};
use pvauction_core::synth::{GroundTruth, TrueAuction, TrueProject};
use pvauction_core::validation::ValidationReport;
use pvauction_core::{BidId, Date, Price, ProjectId, UnitId, YearMonth};
use serde::{Deserialize, Serialize};

use crate::csv_io::{read_all, write_rows, write_rows_with_header};

pub const PROJECTS: &str = "projects.csv";
pub const DEVELOPERS: &str = "developers.csv";
pub const BID_VALUES: &str = "bid_values.csv";
pub const MONTHLY_BID_VALUES: &str = "monthly_bid_values.csv";
pub const PIPELINE_COUNTS: &str = "pipeline_counts.csv";
pub const WARNINGS: &str = "warnings.csv";
pub const ORACLE_DIFF: &str = "oracle_diff.csv";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const GROUND_TRUTH_AUCTIONS: &str = "ground_truth_auctions.csv";
pub const PROJECT_OUTCOMES: &str = "project_outcomes.csv";
pub const AUCTION_METRICS: &str = "auction_metrics.csv";
pub const AGGREGATES: &str = "aggregates.csv";
pub const HYPOTHESES: &str = "hypotheses.csv";
pub const REGRESSION: &str = "regression.csv";
pub const REALISATION_CURVE: &str = "realisation_curve.csv";
pub const DEVELOPER_SHARES: &str = "developer_shares.csv";
pub const BID_VALUES_BY_AUCTION: &str = "bid_values_by_auction.csv";
pub const VALIDATION: &str = "validation.csv";
pub const AWARD_SUMMARY: &str = "award_summary.csv";
pub const SUMMARY: &str = "summary.json";

// ---- linkage ----

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectCsv {
    pub project_id: ProjectId,
    pub auction_index: u32,
    pub status: String,
    pub unit_id: Option<UnitId>,
    pub capacity_kw: f64,
    pub commissioning_date: Option<Date>,
    pub loc_in: PostalCode,
    pub loc_out: Option<PostalCode>,
    pub state: Option<GermanState>,
    pub developer_key: String,
    pub payment_flag: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeveloperCsv {
    pub developer_key: String,
    pub canonical_address: String,
    /// Bidder names joined by " | ".
    pub member_names: String,
    pub n_projects: usize,
    pub size_kw: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BidValueCsv {
    pub project_id: ProjectId,
    pub reliability: Reliability,
    pub evidence: Reliability,
    pub bv_net: Option<Price>,
    pub bv_full: Option<Price>,
    pub premium_months: usize,
    pub zero_premium_months: u32,
}

#[derive(Debug, Serialize)]
struct MonthlyCsv {
    project_id: ProjectId,
    month: YearMonth,
    bv_net: Price,
    bv_full: Price,
}

#[derive(Debug, Serialize)]
struct CountsCsv {
    auction_index: u32,
    date: Option<Date>,
    deadline: Option<Date>,
    awarded_capacity_kw: f64,
    awarded_bids: u32,
    awarded_projects: u32,
    built_projects: u32,
    unit_ids: u32,
    payments_found: u32,
    reliable_payment: u32,
    final_bid_values: u32,
}

impl From<&PipelineCounts> for CountsCsv {
    fn from(c: &PipelineCounts) -> Self {
        CountsCsv {
            auction_index: c.auction_index,
            date: c.date,
            deadline: c.deadline,
            awarded_capacity_kw: c.awarded_capacity_kw,
            awarded_bids: c.awarded_bids,
            awarded_projects: c.awarded_projects,
            built_projects: c.built_projects,
            unit_ids: c.unit_ids,
            payments_found: c.payments_found,
            reliable_payment: c.reliable_payment,
            final_bid_values: c.final_bid_values,
        }
    }
}

#[derive(Debug, Serialize)]
struct WarningCsv {
    kind: &'static str,
    message: String,
}

fn warning_kind(w: &LinkageWarning) -> &'static str {
    match w {
        LinkageWarning::UnitForUnknownBid { .. } => "unit_for_unknown_bid",
        LinkageWarning::UnitForUnawardedBid { .. } => "unit_for_unawarded_bid",
        LinkageWarning::EmptyDeveloperAddress { .. } => "empty_developer_address",
        LinkageWarning::ConflictingBidValues { .. } => "conflicting_bid_values",
    }
}

pub fn write_linkage(dir: &Path, out: &LinkageOutput) -> anyhow::Result<Vec<PathBuf>> {
    let flags: BTreeMap<ProjectId, &'static str> = out.payment_flags.iter().map(|(id, f)| (*id, f.as_str())).collect();
    let mut written = Vec::new();

    let path = dir.join(PROJECTS);
    write_rows(
        &path,
        out.projects.iter().map(|p| ProjectCsv {
            project_id: p.project_id,
            auction_index: p.auction_index,
            status: p.status.as_str().into(),
            unit_id: p.unit_id,
            capacity_kw: p.capacity_kw,
            commissioning_date: p.commissioning_date,
            loc_in: p.loc_in,
            loc_out: p.loc_out,
            state: p.state,
            developer_key: p.developer_key.as_str().into(),
            payment_flag: flags.get(&p.project_id).copied().unwrap_or("").into(),
        }),
    )?;
    written.push(path);

    let path = dir.join(DEVELOPERS);
    write_rows(
        &path,
        out.developers.iter().map(|d| DeveloperCsv {
            developer_key: d.developer_key.as_str().into(),
            canonical_address: d.canonical_address.clone(),
            member_names: d.member_names.iter().cloned().collect::<Vec<_>>().join(" | "),
            n_projects: d.projects.len(),
            size_kw: d.size_kw,
        }),
    )?;
    written.push(path);

    let path = dir.join(BID_VALUES);
    write_rows(
        &path,
        out.estimates.iter().map(|e| BidValueCsv {
            project_id: e.project_id,
            reliability: e.reliability,
            evidence: e.evidence,
            bv_net: e.consolidated_net,
            bv_full: e.consolidated_full,
            premium_months: e.monthly_full.len(),
            zero_premium_months: e.zero_premium_months,
        }),
    )?;
    written.push(path);

    let path = dir.join(MONTHLY_BID_VALUES);
    let monthly = out.estimates.iter().flat_map(|e| {
        e.monthly_full.iter().filter_map(move |(m, full)| {
            e.monthly_net.get(m).map(|net| MonthlyCsv { project_id: e.project_id, month: *m, bv_net: *net, bv_full: *full })
        })
    });
    write_rows_with_header(&path, &["project_id", "month", "bv_net", "bv_full"], monthly)?;
    written.push(path);

    let path = dir.join(PIPELINE_COUNTS);
    write_rows(&path, out.counts.iter().map(CountsCsv::from))?;
    written.push(path);

    let path = dir.join(WARNINGS);
    let warnings = out.warnings.iter().map(|w| WarningCsv { kind: warning_kind(w), message: w.to_string() });
    write_rows_with_header(&path, &["kind", "message"], warnings)?;
    written.push(path);
    Ok(written)
}

/// Linkage results as read back by `analyze`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkedProjects {
    pub projects: Vec<ProjectRecord>,
    pub developers: Vec<DeveloperProfile>,
    pub estimates: Vec<BidValueEstimate>,
    pub files: Vec<PathBuf>,
}

pub fn read_linkage(dir: &Path) -> anyhow::Result<LinkedProjects> {
    let files = vec![dir.join(PROJECTS), dir.join(DEVELOPERS), dir.join(BID_VALUES)];
    let projects: Vec<ProjectRecord> = read_all::<ProjectCsv>(&files[0])?
        .into_iter()
        .map(|p| {
            let status = match p.status.as_str() {
                "built" => ProjectStatus::Built,
                "not_found" => ProjectStatus::NotFound,
                other => anyhow::bail!("{}: unknown status {other:?}", p.project_id),
            };
            Ok(ProjectRecord {
                project_id: p.project_id,
                auction_index: p.auction_index,
                unit_id: p.unit_id,
                status,
                capacity_kw: p.capacity_kw,
                commissioning_date: p.commissioning_date,
                loc_in: p.loc_in,
                loc_out: p.loc_out,
                state: p.state,
                developer_key: DeveloperKey::from_raw(p.developer_key),
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let mut members: BTreeMap<String, BTreeSet<ProjectId>> = BTreeMap::new();
    for p in &projects {
        members.entry(p.developer_key.as_str().into()).or_default().insert(p.project_id);
    }
    let developers = read_all::<DeveloperCsv>(&files[1])?
        .into_iter()
        .map(|d| DeveloperProfile {
            projects: members.get(&d.developer_key).cloned().unwrap_or_default(),
            developer_key: DeveloperKey::from_raw(d.developer_key),
            canonical_address: d.canonical_address,
            member_names: d.member_names.split(" | ").filter(|s| !s.is_empty()).map(String::from).collect(),
            size_kw: d.size_kw,
        })
        .collect();
    let estimates = read_all::<BidValueCsv>(&files[2])?
        .into_iter()
        .map(|b| BidValueEstimate {
            project_id: b.project_id,
            monthly_net: BTreeMap::new(),
            monthly_full: BTreeMap::new(),
            consolidated_net: b.bv_net,
            consolidated_full: b.bv_full,
            reliability: b.reliability,
            evidence: b.evidence,
            zero_premium_months: b.zero_premium_months,
        })
        .collect();
    Ok(LinkedProjects { projects, developers, estimates, files })
}

// ---- ground truth and oracle ----

#[derive(Debug, Serialize, Deserialize)]
pub struct TruthProjectCsv {
    pub project_id: ProjectId,
    pub auction_index: u32,
    pub developer: u32,
    pub submitted_bid: Price,
    pub tariff: Price,
    pub built: bool,
    pub unit_id: Option<UnitId>,
    pub capacity_kw: f64,
    pub commissioning_date: Option<Date>,
    pub dur_days: Option<i64>,
    pub relocated: bool,
    pub late: bool,
    pub reduction: Price,
    pub positive_premium_months: u32,
    pub has_payments: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TruthAuctionCsv {
    pub auction_index: u32,
    pub awarded_capacity_kw: f64,
    pub built_capacity_kw: f64,
    pub rr: f64,
    pub lchg: Option<f64>,
    pub bl: Option<f64>,
    pub marginal: Option<Price>,
}

pub fn write_ground_truth(dir: &Path, truth: &GroundTruth) -> anyhow::Result<Vec<PathBuf>> {
    let projects = dir.join(GROUND_TRUTH);
    write_rows(
        &projects,
        truth.projects.iter().map(|p| TruthProjectCsv {
            project_id: p.project_id,
            auction_index: p.auction_index,
            developer: p.developer,
            submitted_bid: p.submitted_bid,
            tariff: p.tariff,
            built: p.built,
            unit_id: p.unit_id,
            capacity_kw: p.capacity_kw,
            commissioning_date: p.commissioning_date,
            dur_days: p.dur_days,
            relocated: p.relocated,
            late: p.late,
            reduction: p.reduction,
            positive_premium_months: p.positive_premium_months,
            has_payments: p.has_payments,
        }),
    )?;
    let auctions = dir.join(GROUND_TRUTH_AUCTIONS);
    write_rows(
        &auctions,
        truth.auctions.iter().map(|a| TruthAuctionCsv {
            auction_index: a.auction_index,
            awarded_capacity_kw: a.awarded_capacity_kw,
            built_capacity_kw: a.built_capacity_kw,
            rr: a.rr,
            lchg: a.lchg,
            bl: a.bl,
            marginal: a.marginal,
        }),
    )?;
    Ok(vec![projects, auctions])
}

/// Reads `ground_truth.csv` and `ground_truth_auctions.csv` from `dir`.
pub fn read_ground_truth(dir: &Path) -> anyhow::Result<(GroundTruth, Vec<PathBuf>)> {
    let files = vec![dir.join(GROUND_TRUTH), dir.join(GROUND_TRUTH_AUCTIONS)];
    let projects = read_all::<TruthProjectCsv>(&files[0])?
        .into_iter()
        .map(|p| TrueProject {
            project_id: p.project_id,
            auction_index: p.auction_index,
            developer: p.developer,
            submitted_bid: p.submitted_bid,
            tariff: p.tariff,
            built: p.built,
            unit_id: p.unit_id,
            capacity_kw: p.capacity_kw,
            commissioning_date: p.commissioning_date,
            dur_days: p.dur_days,
            relocated: p.relocated,
            late: p.late,
            reduction: p.reduction,
            positive_premium_months: p.positive_premium_months,
            has_payments: p.has_payments,
        })
        .collect();
    let auctions = read_all::<TruthAuctionCsv>(&files[1])?
        .into_iter()
        .map(|a| TrueAuction {
            auction_index: a.auction_index,
            awarded_capacity_kw: a.awarded_capacity_kw,
            built_capacity_kw: a.built_capacity_kw,
            rr: a.rr,
            lchg: a.lchg,
            bl: a.bl,
            marginal: a.marginal,
        })
        .collect();
    Ok((GroundTruth { projects, auctions }, files))
}

#[derive(Debug, Serialize)]
struct DiffCsv<'a> {
    project_id: Option<ProjectId>,
    auction_index: u32,
    field: &'a str,
    expected: &'a str,
    actual: &'a str,
}

pub fn write_oracle_diff(path: &Path, report: &DiffReport) -> anyhow::Result<()> {
    let rows = report.entries.iter().map(|e| DiffCsv {
        project_id: e.project_id,
        auction_index: e.auction_index,
        field: e.field,
        expected: &e.expected,
        actual: &e.actual,
    });
    write_rows_with_header(path, &["project_id", "auction_index", "field", "expected", "actual"], rows)
}

// ---- analysis ----

#[derive(Debug, Serialize)]
struct OutcomeCsv<'a> {
    project_id: ProjectId,
    auction_index: u32,
    capacity_kw: f64,
    built: bool,
    dur_days: Option<i64>,
    pen_dline: bool,
    pen_loc: bool,
    reg: bool,
    exp: bool,
    new_dev: bool,
    small_dev: bool,
    developer_key: &'a str,
    developer_size_kw: f64,
    bv_net: Option<Price>,
    bv_full: Option<Price>,
    in_bid_sample: bool,
    bmg: Option<Price>,
}

#[derive(Debug, Serialize)]
struct AuctionMetricsCsv {
    auction_index: u32,
    date: Date,
    pricing_rule: PricingRule,
    tendered_kw: f64,
    bid_kw: f64,
    awarded_kw: f64,
    built_kw: f64,
    n_projects: u32,
    n_built: u32,
    n_late: u32,
    n_relocated: u32,
    rr: f64,
    bcr: f64,
    bl: Option<f64>,
    bl_capacity: Option<f64>,
    lchg: Option<f64>,
    lchg_capacity: Option<f64>,
    dur_mean_days: Option<f64>,
    dur_capacity_weighted_days: Option<f64>,
    pvc6: Option<f64>,
    net_vs_full_gap: Option<f64>,
    min_awarded_bid: Option<Price>,
    max_awarded_bid: Option<Price>,
    weighted_avg_bid: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AggregateCsv {
    range: String,
    first_auction: u32,
    last_auction: u32,
    n_auctions: u32,
    n_projects: u32,
    n_built: u32,
    n_late: u32,
    n_relocated: u32,
    awarded_kw: f64,
    built_kw: f64,
    rr: f64,
    bl: Option<f64>,
    bl_capacity: Option<f64>,
    lchg: Option<f64>,
    lchg_capacity: Option<f64>,
    dur_mean_days: Option<f64>,
    dur_capacity_weighted_days: Option<f64>,
    net_vs_full_gap: Option<f64>,
}

impl From<&ProgrammeAggregate> for AggregateCsv {
    fn from(a: &ProgrammeAggregate) -> Self {
        let m = &a.metrics;
        AggregateCsv {
            range: format!("AU{}-AU{}", a.first_auction, a.last_auction),
            first_auction: a.first_auction,
            last_auction: a.last_auction,
            n_auctions: a.n_auctions,
            n_projects: m.n_projects,
            n_built: m.n_built,
            n_late: m.n_late,
            n_relocated: m.n_relocated,
            awarded_kw: m.awarded_capacity_kw,
            built_kw: m.built_capacity_kw,
            rr: m.rr,
            bl: m.bl,
            bl_capacity: m.bl_capacity,
            lchg: m.lchg,
            lchg_capacity: m.lchg_capacity,
            dur_mean_days: m.dur_mean_days,
            dur_capacity_weighted_days: m.dur_capacity_weighted_days,
            net_vs_full_gap: m.net_vs_full_gap,
        }
    }
}

#[derive(Debug, Serialize)]
struct HypothesisCsv<'a> {
    id: &'a str,
    description: &'a str,
    method: &'a str,
    sample_filter: &'a str,
    group_a: &'a str,
    n_a: usize,
    mean_a: Option<f64>,
    group_b: &'a str,
    n_b: usize,
    mean_b: Option<f64>,
    statistic: Option<f64>,
    p_value: Option<f64>,
    status: String,
    reject_at_1pct: Option<bool>,
    reject_at_5pct: Option<bool>,
}

#[derive(Debug, Serialize)]
struct RegressionCsv {
    term: &'static str,
    coefficient: Option<f64>,
    std_error: Option<f64>,
    t_value: Option<f64>,
    p_value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CurveCsv {
    dur_days: i64,
    project_share: f64,
    capacity_share: f64,
}

#[derive(Debug, Serialize)]
struct SharesCsv {
    auction_index: u32,
    n_projects: u32,
    new_share: f64,
    small_share: f64,
}

#[derive(Debug, Serialize)]
struct BidSeriesCsv {
    auction_index: u32,
    n_values: usize,
    mean_bv_net: Option<f64>,
    mean_bv_full: Option<f64>,
    max_bv_net: Option<Price>,
    max_bv_full: Option<Price>,
    max_awarded_bid: Option<Price>,
}

pub struct AnalysisFiles<'a> {
    pub specs: &'a BTreeMap<u32, AuctionSpec>,
    pub awards: &'a BTreeMap<u32, AwardOutcome>,
    pub outcomes: &'a [ProjectOutcome],
    pub auctions: &'a [AuctionMetrics],
    pub ranges: &'a [[u32; 2]],
    pub suite: &'a SuiteReport,
}

pub fn write_analysis(dir: &Path, a: &AnalysisFiles<'_>) -> anyhow::Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let path = dir.join(PROJECT_OUTCOMES);
    write_rows(
        &path,
        a.outcomes.iter().map(|o| OutcomeCsv {
            project_id: o.project_id,
            auction_index: o.auction_index,
            capacity_kw: o.capacity_kw,
            built: o.status,
            dur_days: o.dur_days,
            pen_dline: o.pen_dline,
            pen_loc: o.pen_loc,
            reg: o.reg,
            exp: o.exp,
            new_dev: o.new_dev,
            small_dev: o.small_dev,
            developer_key: o.developer_key.as_str(),
            developer_size_kw: o.developer_size_kw,
            bv_net: o.bv_net,
            bv_full: o.bv_full,
            in_bid_sample: o.in_bid_sample,
            bmg: o.bmg,
        }),
    )?;
    written.push(path);

    let path = dir.join(AUCTION_METRICS);
    write_rows(
        &path,
        a.auctions.iter().map(|m| {
            let spec = &a.specs[&m.auction_index];
            let award = &a.awards[&m.auction_index];
            AuctionMetricsCsv {
                auction_index: m.auction_index,
                date: spec.date,
                pricing_rule: spec.pricing_rule,
                tendered_kw: m.tendered_capacity_kw,
                bid_kw: m.bid_capacity_kw,
                awarded_kw: m.awarded_capacity_kw,
                built_kw: m.built_capacity_kw,
                n_projects: m.n_projects,
                n_built: m.n_built,
                n_late: m.n_late,
                n_relocated: m.n_relocated,
                rr: m.rr,
                bcr: m.bcr,
                bl: m.bl,
                bl_capacity: m.bl_capacity,
                lchg: m.lchg,
                lchg_capacity: m.lchg_capacity,
                dur_mean_days: m.dur_mean_days,
                dur_capacity_weighted_days: m.dur_capacity_weighted_days,
                pvc6: m.pvc6,
                net_vs_full_gap: m.net_vs_full_gap,
                min_awarded_bid: award.min_awarded_bid,
                max_awarded_bid: award.max_awarded_bid,
                weighted_avg_bid: award.weighted_avg_bid,
            }
        }),
    )?;
    written.push(path);

    let path = dir.join(AGGREGATES);
    let mut aggregates = Vec::new();
    for [first, last] in a.ranges {
        // ranges outside the data are skipped rather than failing the run
        if let Ok(agg) = programme_aggregates(a.auctions, *first..=*last) {
            aggregates.push(AggregateCsv::from(&agg));
        }
    }
    write_rows_with_header(
        &path,
        &[
            "range",
            "first_auction",
            "last_auction",
            "n_auctions",
            "n_projects",
            "n_built",
            "n_late",
            "n_relocated",
            "awarded_kw",
            "built_kw",
            "rr",
            "bl",
            "bl_capacity",
            "lchg",
            "lchg_capacity",
            "dur_mean_days",
            "dur_capacity_weighted_days",
            "net_vs_full_gap",
        ],
        aggregates,
    )?;
    written.push(path);

    let path = dir.join(HYPOTHESES);
    write_rows(
        &path,
        a.suite.entries.iter().map(|e| HypothesisCsv {
            id: e.id,
            description: e.description,
            method: e.method.as_str(),
            sample_filter: e.sample_filter,
            group_a: e.group_labels[0],
            n_a: e.group_ns[0],
            mean_a: e.group_means[0],
            group_b: e.group_labels[1],
            n_b: e.group_ns[1],
            mean_b: e.group_means[1],
            statistic: e.statistic,
            p_value: e.p_value,
            status: match &e.status {
                EntryStatus::Tested => "tested".into(),
                EntryStatus::Untestable(why) => format!("untestable: {why}"),
            },
            reject_at_1pct: e.rejected_at(0.01),
            reject_at_5pct: e.rejected_at(0.05),
        }),
    )?;
    written.push(path);

    let path = dir.join(REGRESSION);
    let mut rows = Vec::new();
    if let Some(r) = &a.suite.regression {
        for (i, term) in ["intercept", "pvc6", "bcr"].into_iter().enumerate() {
            rows.push(RegressionCsv {
                term,
                coefficient: r.coefficients.get(i).copied(),
                std_error: r.std_errors.get(i).copied(),
                t_value: r.t_values.get(i).copied(),
                p_value: r.p_values.get(i).copied(),
            });
        }
        let fit = |term, v: f64, p: Option<f64>| RegressionCsv {
            term,
            coefficient: Some(v),
            std_error: None,
            t_value: None,
            p_value: p,
        };
        rows.push(fit("r_squared", r.r_squared, None));
        rows.push(fit("adj_r_squared", r.adj_r_squared, None));
        rows.push(fit("residual_se", r.residual_se, None));
        rows.push(fit("f_statistic", r.f_statistic, Some(r.f_p_value)));
        rows.push(fit("n", r.n as f64, None));
    }
    write_rows_with_header(&path, &["term", "coefficient", "std_error", "t_value", "p_value"], rows)?;
    written.push(path);

    let path = dir.join(REALISATION_CURVE);
    let curve = realisation_curve(a.outcomes).into_iter().map(|p| CurveCsv {
        dur_days: p.dur_days,
        project_share: p.project_share,
        capacity_share: p.capacity_share,
    });
    write_rows_with_header(&path, &["dur_days", "project_share", "capacity_share"], curve)?;
    written.push(path);

    let path = dir.join(DEVELOPER_SHARES);
    let shares = developer_shares(a.outcomes).into_iter().map(|s| SharesCsv {
        auction_index: s.auction_index,
        n_projects: s.n_projects,
        new_share: s.new_share,
        small_share: s.small_share,
    });
    write_rows_with_header(&path, &["auction_index", "n_projects", "new_share", "small_share"], shares)?;
    written.push(path);

    let path = dir.join(BID_VALUES_BY_AUCTION);
    write_rows(&path, bid_series(a))?;
    written.push(path);
    Ok(written)
}

fn bid_series(a: &AnalysisFiles<'_>) -> Vec<BidSeriesCsv> {
    a.awards
        .keys()
        .map(|index| {
            let pairs: Vec<(Price, Price)> = a
                .outcomes
                .iter()
                .filter(|o| o.auction_index == *index)
                .filter_map(|o| Some((o.bv_net?, o.bv_full?)))
                .collect();
            let n = pairs.len();
            let mean = |f: fn(&(Price, Price)) -> Price| {
                if n == 0 { None } else { Some(pairs.iter().map(|p| f(p).to_f64()).sum::<f64>() / n as f64) }
            };
            BidSeriesCsv {
                auction_index: *index,
                n_values: n,
                mean_bv_net: mean(|p| p.0),
                mean_bv_full: mean(|p| p.1),
                max_bv_net: pairs.iter().map(|p| p.0).max(),
                max_bv_full: pairs.iter().map(|p| p.1).max(),
                max_awarded_bid: a.awards[index].max_awarded_bid,
            }
        })
        .collect()
}

// ---- validation and clearing ----

#[derive(Debug, Serialize)]
struct ValidationCsv {
    auction_index: u32,
    published: Option<f64>,
    reconstructed: Option<f64>,
    n_values: u32,
    capacity_kw: f64,
    abs_gap: Option<f64>,
    status: &'static str,
    flagged: bool,
}

pub fn write_validation(path: &Path, report: &ValidationReport) -> anyhow::Result<()> {
    let rows = report.rows.iter().map(|r| ValidationCsv {
        auction_index: r.auction_index,
        published: r.published,
        reconstructed: r.reconstructed,
        n_values: r.n_values,
        capacity_kw: r.capacity_kw,
        abs_gap: r.abs_gap,
        status: r.status.as_str(),
        flagged: r.status.is_flagged(),
    });
    write_rows_with_header(
        path,
        &["auction_index", "published", "reconstructed", "n_values", "capacity_kw", "abs_gap", "status", "flagged"],
        rows,
    )
}

/// Published weighted-average award per auction: `auction_index,weighted_avg_bid`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PublishedAverageCsv {
    pub auction_index: u32,
    pub weighted_avg_bid: f64,
}

pub fn read_published(path: &Path) -> anyhow::Result<BTreeMap<u32, f64>> {
    let mut out = BTreeMap::new();
    for row in read_all::<PublishedAverageCsv>(path)? {
        if out.insert(row.auction_index, row.weighted_avg_bid).is_some() {
            anyhow::bail!("{}: auction {} listed twice", path.display(), row.auction_index);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct AwardCsv {
    bid_id: BidId,
    capacity_kw: f64,
    bid_price: Price,
    pay_tariff: Option<Price>,
    awarded_kw: f64,
    status: &'static str,
}

#[derive(Debug, Serialize)]
struct AwardSummaryCsv {
    auction_index: u32,
    date: Date,
    pricing_rule: PricingRule,
    tendered_kw: f64,
    bid_kw: f64,
    awarded_kw: f64,
    n_bids: usize,
    n_awarded: usize,
    min_awarded_bid: Option<Price>,
    max_awarded_bid: Option<Price>,
    weighted_avg_bid: Option<f64>,
    bid_to_cover: f64,
}

/// One file per auction plus the programme series.
pub fn write_awards(
    dir: &Path,
    cleared: &[(AuctionSpec, Vec<(BidId, f64, Price)>, AwardOutcome, Vec<(BidId, RejectionReason)>)],
) -> anyhow::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut summary = Vec::new();
    for (spec, bids, outcome, rejected) in cleared {
        let awarded: BTreeMap<BidId, (f64, Price)> =
            outcome.awarded_bids.iter().map(|b| (b.bid_id, (b.capacity_kw, b.pay_tariff))).collect();
        let rejected: BTreeMap<BidId, RejectionReason> = rejected.iter().copied().collect();
        let mut rows: Vec<AwardCsv> = bids
            .iter()
            .map(|(id, kw, price)| {
                let (awarded_kw, pay_tariff, status) = match (awarded.get(id), rejected.get(id)) {
                    (Some((kw, tariff)), _) => (*kw, Some(*tariff), "awarded"),
                    (None, Some(RejectionReason::AboveCeiling)) => (0.0, None, "above_ceiling"),
                    (None, Some(RejectionReason::Marginal)) => (0.0, None, "marginal_rejected"),
                    (None, None) => (0.0, None, "not_awarded"),
                };
                AwardCsv { bid_id: *id, capacity_kw: *kw, bid_price: *price, pay_tariff, awarded_kw, status }
            })
            .collect();
        rows.sort_by(|a, b| a.bid_price.cmp(&b.bid_price).then(a.bid_id.cmp(&b.bid_id)));
        let path = dir.join(format!("award_outcome_AU{}.csv", spec.auction_index));
        write_rows(&path, rows)?;
        written.push(path);
        summary.push(AwardSummaryCsv {
            auction_index: spec.auction_index,
            date: spec.date,
            pricing_rule: spec.pricing_rule,
            tendered_kw: outcome.tendered_capacity_kw,
            bid_kw: outcome.total_bid_capacity_kw,
            awarded_kw: outcome.awarded_capacity_kw,
            n_bids: bids.len(),
            n_awarded: outcome.awarded_bids.len(),
            min_awarded_bid: outcome.min_awarded_bid,
            max_awarded_bid: outcome.max_awarded_bid,
            weighted_avg_bid: outcome.weighted_avg_bid,
            bid_to_cover: outcome.bid_to_cover(),
        });
    }
    let path = dir.join(AWARD_SUMMARY);
    write_rows_with_header(
        &path,
        &[
            "auction_index",
            "date",
            "pricing_rule",
            "tendered_kw",
            "bid_kw",
            "awarded_kw",
            "n_bids",
            "n_awarded",
            "min_awarded_bid",
            "max_awarded_bid",
            "weighted_avg_bid",
            "bid_to_cover",
        ],
        summary,
    )?;
    written.push(path);
    Ok(written)
}
