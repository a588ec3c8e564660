//! Per-project indicators and per-auction aggregates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use crate::calendar::YearMonth;
use crate::clearing::AwardOutcome;
use crate::ids::ProjectId;
use crate::linkage::{BidValueEstimate, DeveloperKey, DeveloperProfile, ProjectRecord};
use crate::price::Price;
use crate::registers::AuctionSpec;

/// Default small-developer threshold in kW.
pub const DEFAULT_SMALL_THRESHOLD_KW: f64 = 2_000.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsConfig {
    /// Developers whose programme-wide realised capacity is at most this
    /// are small.
    pub small_threshold_kw: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { small_threshold_kw: DEFAULT_SMALL_THRESHOLD_KW }
    }
}

/// Built somewhere other than the bid's postal code.
pub fn location_changed(project: &ProjectRecord) -> bool {
    match project.loc_out {
        Some(out) if project.is_built() => out != project.loc_in,
        _ => false,
    }
}

/// Commissioned after the deadline without reduction.
pub fn built_late(project: &ProjectRecord, spec: &AuctionSpec) -> bool {
    match project.commissioning_date {
        Some(end) if project.is_built() => end > spec.deadline_no_reduction(),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectOutcome {
    pub project_id: ProjectId,
    pub auction_index: u32,
    pub capacity_kw: f64,
    pub status: bool,
    pub dur_days: Option<i64>,
    pub pen_dline: bool,
    pub pen_loc: bool,
    /// Built in a southern state.
    pub reg: bool,
    pub exp: bool,
    pub new_dev: bool,
    pub small_dev: bool,
    pub developer_key: DeveloperKey,
    /// Programme-wide realised capacity of the developer, kW.
    pub developer_size_kw: f64,
    pub bv_net: Option<Price>,
    pub bv_full: Option<Price>,
    /// Bid value usable for bid-value hypotheses (reliable, not from a
    /// uniform-price auction).
    pub in_bid_sample: bool,
    /// Maximum awarded bid minus the full bid value.
    pub bmg: Option<Price>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricsError {
    MissingCommissioningDate(ProjectId),
    UnknownAuction(u32),
    UnknownDeveloper(ProjectId),
    EmptyRange,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::MissingCommissioningDate(p) => write!(f, "built project {p} has no commissioning date"),
            MetricsError::UnknownAuction(a) => write!(f, "no auction parameters or outcome for AU{a}"),
            MetricsError::UnknownDeveloper(p) => write!(f, "project {p} belongs to no developer profile"),
            MetricsError::EmptyRange => f.write_str("aggregation range contains no auction"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Derives every project indicator. `estimates` may be empty or partial;
/// projects without a consolidated full value get no bmg.
pub fn project_outcomes(
    projects: &[ProjectRecord],
    developers: &[DeveloperProfile],
    specs: &BTreeMap<u32, AuctionSpec>,
    awards: &BTreeMap<u32, AwardOutcome>,
    estimates: &[BidValueEstimate],
    config: &MetricsConfig,
) -> Result<Vec<ProjectOutcome>, MetricsError> {
    let sizes: BTreeMap<&DeveloperKey, f64> = developers.iter().map(|d| (&d.developer_key, d.size_kw)).collect();
    let by_project: BTreeMap<ProjectId, &BidValueEstimate> = estimates.iter().map(|e| (e.project_id, e)).collect();

    // auctions in which each developer won at least one bid
    let mut wins: BTreeMap<&DeveloperKey, BTreeSet<u32>> = BTreeMap::new();
    for p in projects {
        wins.entry(&p.developer_key).or_default().insert(p.auction_index);
    }

    let mut out = Vec::with_capacity(projects.len());
    for p in projects {
        let spec = specs.get(&p.auction_index).ok_or(MetricsError::UnknownAuction(p.auction_index))?;
        let award = awards.get(&p.auction_index).ok_or(MetricsError::UnknownAuction(p.auction_index))?;
        let size = *sizes.get(&p.developer_key).ok_or(MetricsError::UnknownDeveloper(p.project_id))?;
        let dur_days = if p.is_built() {
            let end = p.commissioning_date.ok_or(MetricsError::MissingCommissioningDate(p.project_id))?;
            Some(end.days_since(spec.first_announcement))
        } else {
            None
        };
        let exp = wins[&p.developer_key].range(..p.auction_index).next().is_some();
        let est = by_project.get(&p.project_id);
        let bv_full = est.and_then(|e| e.consolidated_full);
        let bv_net = est.and_then(|e| e.consolidated_net);
        out.push(ProjectOutcome {
            project_id: p.project_id,
            auction_index: p.auction_index,
            capacity_kw: p.capacity_kw,
            status: p.is_built(),
            dur_days,
            pen_dline: built_late(p, spec),
            pen_loc: location_changed(p),
            reg: p.state.is_some_and(|s| s.is_southern()),
            exp,
            new_dev: !exp,
            small_dev: size <= config.small_threshold_kw,
            developer_key: p.developer_key.clone(),
            developer_size_kw: size,
            bv_net,
            bv_full,
            in_bid_sample: est.is_some_and(|e| e.in_bid_sample()),
            bmg: match (award.max_awarded_bid, bv_full) {
                (Some(mbid), Some(bv)) => Some(mbid - bv),
                _ => None,
            },
        });
    }
    out.sort_by_key(|o| o.project_id);
    Ok(out)
}

/// Per-auction aggregates. Raw sums are kept so that ranges of auctions
/// can be pooled exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuctionMetrics {
    pub auction_index: u32,
    pub n_projects: u32,
    pub n_built: u32,
    pub n_late: u32,
    pub n_relocated: u32,
    pub awarded_capacity_kw: f64,
    pub built_capacity_kw: f64,
    pub late_capacity_kw: f64,
    pub relocated_capacity_kw: f64,
    pub dur_sum_days: f64,
    pub dur_capacity_sum: f64,
    pub bid_capacity_kw: f64,
    pub tendered_capacity_kw: f64,
    pub gap_sum: f64,
    pub gap_n: u32,
    pub rr: f64,
    pub dur_mean_days: Option<f64>,
    pub dur_capacity_weighted_days: Option<f64>,
    pub bl: Option<f64>,
    pub lchg: Option<f64>,
    pub bl_capacity: Option<f64>,
    pub lchg_capacity: Option<f64>,
    pub bcr: f64,
    pub pvc6: Option<f64>,
    /// Mean of full minus net bid value over projects with both.
    pub net_vs_full_gap: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 { Some(num / den) } else { None }
}

impl AuctionMetrics {
    fn finish(mut self) -> Self {
        self.rr = if self.awarded_capacity_kw > 0.0 { self.built_capacity_kw / self.awarded_capacity_kw } else { 0.0 };
        let built = self.n_built as f64;
        self.dur_mean_days = ratio(self.dur_sum_days, built);
        self.dur_capacity_weighted_days = ratio(self.dur_capacity_sum, self.built_capacity_kw);
        self.bl = ratio(self.n_late as f64, built);
        self.lchg = ratio(self.n_relocated as f64, built);
        self.bl_capacity = ratio(self.late_capacity_kw, self.built_capacity_kw);
        self.lchg_capacity = ratio(self.relocated_capacity_kw, self.built_capacity_kw);
        self.bcr = if self.tendered_capacity_kw > 0.0 { self.bid_capacity_kw / self.tendered_capacity_kw } else { 0.0 };
        self.net_vs_full_gap = ratio(self.gap_sum, self.gap_n as f64);
        self
    }
}

/// Cost index value six months after the auction month.
pub fn pvc6(spec: &AuctionSpec, pv_index: &BTreeMap<YearMonth, f64>) -> Option<f64> {
    pv_index.get(&spec.date.year_month().add_months(6)).copied()
}

/// Aggregates one auction's outcomes. Outcomes of other auctions are
/// ignored.
pub fn auction_metrics(
    outcomes: &[ProjectOutcome],
    award: &AwardOutcome,
    spec: &AuctionSpec,
    pv_index: &BTreeMap<YearMonth, f64>,
) -> AuctionMetrics {
    let mut m = AuctionMetrics {
        auction_index: award.auction_index,
        awarded_capacity_kw: award.awarded_capacity_kw,
        bid_capacity_kw: award.total_bid_capacity_kw,
        tendered_capacity_kw: award.tendered_capacity_kw,
        pvc6: pvc6(spec, pv_index),
        ..Default::default()
    };
    let mut mine: Vec<&ProjectOutcome> = outcomes.iter().filter(|o| o.auction_index == award.auction_index).collect();
    mine.sort_by_key(|o| o.project_id);
    for o in mine {
        m.n_projects += 1;
        if o.status {
            m.n_built += 1;
            m.built_capacity_kw += o.capacity_kw;
            let dur = o.dur_days.unwrap_or(0) as f64;
            m.dur_sum_days += dur;
            m.dur_capacity_sum += dur * o.capacity_kw;
            if o.pen_dline {
                m.n_late += 1;
                m.late_capacity_kw += o.capacity_kw;
            }
            if o.pen_loc {
                m.n_relocated += 1;
                m.relocated_capacity_kw += o.capacity_kw;
            }
        }
        if let (Some(full), Some(net)) = (o.bv_full, o.bv_net) {
            m.gap_sum += (full - net).to_f64();
            m.gap_n += 1;
        }
    }
    m.finish()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProgrammeAggregate {
    pub first_auction: u32,
    pub last_auction: u32,
    pub n_auctions: u32,
    pub metrics: AuctionMetrics,
}

/// Pools the raw sums of every auction whose index falls in `range`.
pub fn programme_aggregates(
    metrics: &[AuctionMetrics],
    range: RangeInclusive<u32>,
) -> Result<ProgrammeAggregate, MetricsError> {
    let mut selected: Vec<&AuctionMetrics> = metrics.iter().filter(|m| range.contains(&m.auction_index)).collect();
    if selected.is_empty() {
        return Err(MetricsError::EmptyRange);
    }
    selected.sort_by_key(|m| m.auction_index);
    let mut pooled = AuctionMetrics::default();
    for m in &selected {
        pooled.n_projects += m.n_projects;
        pooled.n_built += m.n_built;
        pooled.n_late += m.n_late;
        pooled.n_relocated += m.n_relocated;
        pooled.awarded_capacity_kw += m.awarded_capacity_kw;
        pooled.built_capacity_kw += m.built_capacity_kw;
        pooled.late_capacity_kw += m.late_capacity_kw;
        pooled.relocated_capacity_kw += m.relocated_capacity_kw;
        pooled.dur_sum_days += m.dur_sum_days;
        pooled.dur_capacity_sum += m.dur_capacity_sum;
        pooled.bid_capacity_kw += m.bid_capacity_kw;
        pooled.tendered_capacity_kw += m.tendered_capacity_kw;
        pooled.gap_sum += m.gap_sum;
        pooled.gap_n += m.gap_n;
    }
    let mut pooled = pooled.finish();
    pooled.auction_index = 0;
    pooled.pvc6 = None;
    if selected.len() == 1 {
        pooled = selected[0].clone();
    }
    Ok(ProgrammeAggregate {
        first_auction: selected[0].auction_index,
        last_auction: selected[selected.len() - 1].auction_index,
        n_auctions: selected.len() as u32,
        metrics: pooled,
    })
}

/// One point of the cumulative realisation curve: share of built projects
/// and of built capacity commissioned within `dur_days`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealisationPoint {
    pub dur_days: i64,
    pub project_share: f64,
    pub capacity_share: f64,
}

pub fn realisation_curve(outcomes: &[ProjectOutcome]) -> Vec<RealisationPoint> {
    let mut built: Vec<(i64, f64, ProjectId)> =
        outcomes.iter().filter_map(|o| o.dur_days.map(|d| (d, o.capacity_kw, o.project_id))).collect();
    built.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    let n = built.len() as f64;
    let total: f64 = built.iter().map(|b| b.1).sum();
    let mut out: Vec<RealisationPoint> = Vec::new();
    let mut cap = 0.0;
    for (i, (d, c, _)) in built.iter().enumerate() {
        cap += c;
        let point = RealisationPoint { dur_days: *d, project_share: (i + 1) as f64 / n, capacity_share: cap / total };
        match out.last_mut() {
            Some(last) if last.dur_days == *d => *last = point,
            _ => out.push(point),
        }
    }
    out
}

/// Shares of projects by new and by small developers in one auction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeveloperShares {
    pub auction_index: u32,
    pub n_projects: u32,
    pub new_share: f64,
    pub small_share: f64,
}

pub fn developer_shares(outcomes: &[ProjectOutcome]) -> Vec<DeveloperShares> {
    let mut acc: BTreeMap<u32, (u32, u32, u32)> = BTreeMap::new();
    for o in outcomes {
        let e = acc.entry(o.auction_index).or_default();
        e.0 += 1;
        e.1 += o.new_dev as u32;
        e.2 += o.small_dev as u32;
    }
    acc.into_iter()
        .map(|(auction_index, (n, new, small))| DeveloperShares {
            auction_index,
            n_projects: n,
            new_share: new as f64 / n as f64,
            small_share: small as f64 / n as f64,
        })
        .collect()
}
