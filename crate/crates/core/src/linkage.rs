//! Unit identification and bid-value reconstruction.
//!
//! The pipeline runs in stages over immutable register snapshots:
//!
//! 1. awarded bids are matched to commissioned units through the bid id the
//!    unit register carries; each matching unit becomes one project;
//! 2. the units' monthly payment rows are attached;
//! 3. side payments are dropped, the per-kWh market premium is computed,
//!    the month's market value is added back (net bid value) and the tariff
//!    reductions are undone (full bid value);
//! 4. monthly values are consolidated per project and then per bid.
//!
//! Every stage emits its results ordered by [`ProjectId`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::calendar::{Date, YearMonth};
use crate::ids::{BidId, ProjectId, UnitId};
use crate::metrics::{built_late, location_changed};
use crate::price::Price;
use crate::registers::{
    AuctionResultRow, AuctionSpec, GermanState, PaymentRecord, PostalCode, PricingRule, TariffCategory, TariffEntry,
    UnitRecord,
};

/// Default agreement tolerance between monthly values: 0.005 ct/kWh.
pub const DEFAULT_TOLERANCE: Price = Price::from_units(50);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjectStatus {
    Built,
    /// Not in the unit register; treated as cancelled or unfinished.
    NotFound,
}

impl ProjectStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectStatus::Built => "built",
            ProjectStatus::NotFound => "not_found",
        }
    }
}

/// Aggregated developer identity: the normalised office address, or the
/// raw bidder name when no address was published.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeveloperKey(String);

impl DeveloperKey {
    pub fn for_bidder(name: &str, address: &str) -> Self {
        let normalized = normalize_address(address);
        if normalized.is_empty() {
            let mut key = String::from("name:");
            key.push_str(name.trim());
            DeveloperKey(key)
        } else {
            let mut key = String::from("addr:");
            key.push_str(&normalized);
            DeveloperKey(key)
        }
    }

    /// Rebuilds a key from its serialised form.
    pub fn from_raw(raw: String) -> Self {
        DeveloperKey(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeveloperKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Case-folds, strips punctuation and collapses whitespace. No fuzzy
/// matching: two addresses group only if they are equal after this.
pub fn normalize_address(address: &str) -> String {
    let mut out = String::with_capacity(address.len());
    let mut pending_space = false;
    for c in address.chars() {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else if c.is_whitespace() {
            pending_space = true;
        }
        // other punctuation is dropped without introducing a break
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectRecord {
    pub project_id: ProjectId,
    pub auction_index: u32,
    pub unit_id: Option<UnitId>,
    pub status: ProjectStatus,
    pub capacity_kw: f64,
    pub commissioning_date: Option<Date>,
    pub loc_in: PostalCode,
    pub loc_out: Option<PostalCode>,
    pub state: Option<GermanState>,
    pub developer_key: DeveloperKey,
}

impl ProjectRecord {
    pub fn bid_id(&self) -> BidId {
        self.project_id.bid
    }

    pub fn is_built(&self) -> bool {
        self.status == ProjectStatus::Built
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinkageWarning {
    UnitForUnknownBid { unit_id: UnitId, bid_id: BidId },
    UnitForUnawardedBid { unit_id: UnitId, bid_id: BidId },
    EmptyDeveloperAddress { bid_id: BidId, developer_name: String },
    ConflictingBidValues { bid_id: BidId, min: Price, max: Price },
}

impl fmt::Display for LinkageWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkageWarning::UnitForUnknownBid { unit_id, bid_id } => {
                write!(f, "unit {unit_id} references bid {bid_id} absent from the auction results")
            }
            LinkageWarning::UnitForUnawardedBid { unit_id, bid_id } => {
                write!(f, "unit {unit_id} references bid {bid_id} which was not awarded")
            }
            LinkageWarning::EmptyDeveloperAddress { bid_id, developer_name } => {
                write!(f, "bid {bid_id}: empty developer address, grouped by name {developer_name:?}")
            }
            LinkageWarning::ConflictingBidValues { bid_id, min, max } => {
                write!(f, "bid {bid_id}: observed full bid values range {min}..{max}; whole bid unreliable")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinkageError {
    DuplicateAwardedBid(BidId),
    UnknownTariff(String),
    UnknownAuction(u32),
    InvalidAuctionResults(crate::registers::InvariantError),
}

impl fmt::Display for LinkageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkageError::DuplicateAwardedBid(id) => write!(f, "bid {id} appears more than once among awarded bids"),
            LinkageError::UnknownTariff(id) => write!(f, "tariff id {id:?} is not in the tariff register"),
            LinkageError::UnknownAuction(a) => write!(f, "auction AU{a} has no auction parameters"),
            LinkageError::InvalidAuctionResults(e) => write!(f, "auction results: {e}"),
        }
    }
}

impl core::error::Error for LinkageError {}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Identification {
    pub projects: Vec<ProjectRecord>,
    pub warnings: Vec<LinkageWarning>,
}

/// Fans every awarded bid out to its commissioned units. Units of one bid
/// are indexed 1..k by commissioning date, then unit id. An awarded bid
/// without any unit becomes a single `NotFound` project with the bid's
/// capacity.
pub fn identify_projects(results: &[AuctionResultRow], units: &[UnitRecord]) -> Result<Identification, LinkageError> {
    let mut awarded: BTreeMap<BidId, &AuctionResultRow> = BTreeMap::new();
    let mut known: BTreeSet<BidId> = BTreeSet::new();
    for row in results {
        known.insert(row.bid.bid_id);
        if row.awarded && awarded.insert(row.bid.bid_id, row).is_some() {
            return Err(LinkageError::DuplicateAwardedBid(row.bid.bid_id));
        }
    }

    let mut warnings = Vec::new();
    let mut by_bid: BTreeMap<BidId, Vec<&UnitRecord>> = BTreeMap::new();
    for unit in units {
        let Some(bid_id) = unit.bid_id else { continue };
        if awarded.contains_key(&bid_id) {
            by_bid.entry(bid_id).or_default().push(unit);
        } else if known.contains(&bid_id) {
            warnings.push(LinkageWarning::UnitForUnawardedBid { unit_id: unit.unit_id, bid_id });
        } else {
            warnings.push(LinkageWarning::UnitForUnknownBid { unit_id: unit.unit_id, bid_id });
        }
    }

    let mut projects = Vec::new();
    for (bid_id, row) in &awarded {
        let bid = &row.bid;
        if normalize_address(&bid.developer_address).is_empty() {
            warnings.push(LinkageWarning::EmptyDeveloperAddress {
                bid_id: *bid_id,
                developer_name: bid.developer_name.clone(),
            });
        }
        let developer_key = DeveloperKey::for_bidder(&bid.developer_name, &bid.developer_address);
        match by_bid.get_mut(bid_id) {
            Some(matched) => {
                matched.sort_by(|a, b| {
                    a.commissioning_date.cmp(&b.commissioning_date).then(a.unit_id.cmp(&b.unit_id))
                });
                for (i, unit) in matched.iter().enumerate() {
                    projects.push(ProjectRecord {
                        project_id: ProjectId { bid: *bid_id, index: i as u32 + 1 },
                        auction_index: row.auction.auction_index,
                        unit_id: Some(unit.unit_id),
                        status: ProjectStatus::Built,
                        capacity_kw: unit.capacity_kw,
                        commissioning_date: Some(unit.commissioning_date),
                        loc_in: bid.postal_code,
                        loc_out: Some(unit.postal_code),
                        state: Some(unit.state),
                        developer_key: developer_key.clone(),
                    });
                }
            }
            None => projects.push(ProjectRecord {
                project_id: ProjectId { bid: *bid_id, index: 1 },
                auction_index: row.auction.auction_index,
                unit_id: None,
                status: ProjectStatus::NotFound,
                capacity_kw: bid.capacity_kw,
                commissioning_date: None,
                loc_in: bid.postal_code,
                loc_out: None,
                state: None,
                developer_key,
            }),
        }
    }
    projects.sort_by_key(|p| p.project_id);
    Ok(Identification { projects, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeveloperProfile {
    pub developer_key: DeveloperKey,
    pub canonical_address: String,
    pub member_names: BTreeSet<String>,
    /// All won projects of the developer.
    pub projects: BTreeSet<ProjectId>,
    /// Realised capacity over the whole programme, kW.
    pub size_kw: f64,
}

/// Groups identified projects into developers by their key. The bidder
/// names come from the awarded result rows.
pub fn developer_profiles(results: &[AuctionResultRow], projects: &[ProjectRecord]) -> Vec<DeveloperProfile> {
    let names: BTreeMap<BidId, &AuctionResultRow> =
        results.iter().filter(|r| r.awarded).map(|r| (r.bid.bid_id, r)).collect();
    let mut profiles: BTreeMap<DeveloperKey, DeveloperProfile> = BTreeMap::new();
    for p in projects {
        let profile = profiles.entry(p.developer_key.clone()).or_insert_with(|| DeveloperProfile {
            developer_key: p.developer_key.clone(),
            canonical_address: String::new(),
            member_names: BTreeSet::new(),
            projects: BTreeSet::new(),
            size_kw: 0.0,
        });
        if let Some(row) = names.get(&p.bid_id()) {
            profile.member_names.insert(String::from(row.bid.developer_name.trim()));
            profile.canonical_address = normalize_address(&row.bid.developer_address);
        }
        profile.projects.insert(p.project_id);
    }
    // sizes summed in project order so they do not depend on input order
    let capacity: BTreeMap<ProjectId, &ProjectRecord> = projects.iter().map(|p| (p.project_id, p)).collect();
    for profile in profiles.values_mut() {
        profile.size_kw = profile
            .projects
            .iter()
            .filter_map(|id| capacity.get(id))
            .filter(|p| p.is_built())
            .map(|p| p.capacity_kw)
            .sum();
    }
    profiles.into_values().collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeveloperAggregation {
    pub profiles: Vec<DeveloperProfile>,
    pub warnings: Vec<LinkageWarning>,
}

/// Aggregates winning bidders registered under the same address.
pub fn aggregate_developers(
    results: &[AuctionResultRow],
    units: &[UnitRecord],
) -> Result<DeveloperAggregation, LinkageError> {
    let ident = identify_projects(results, units)?;
    let warnings = ident
        .warnings
        .into_iter()
        .filter(|w| matches!(w, LinkageWarning::EmptyDeveloperAddress { .. }))
        .collect();
    Ok(DeveloperAggregation { profiles: developer_profiles(results, &ident.projects), warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PaymentFlag {
    Matched,
    NoPayments,
    NotBuilt,
}

impl PaymentFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PaymentFlag::Matched => "matched",
            PaymentFlag::NoPayments => "no_payments",
            PaymentFlag::NotBuilt => "not_built",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaymentStream {
    pub project_id: ProjectId,
    pub unit_id: Option<UnitId>,
    /// Rows ordered by month, then tariff id.
    pub rows: Vec<PaymentRecord>,
    pub flag: PaymentFlag,
}

pub fn attach_payments(projects: &[ProjectRecord], payments: &[PaymentRecord]) -> Vec<PaymentStream> {
    let mut by_unit: BTreeMap<UnitId, Vec<&PaymentRecord>> = BTreeMap::new();
    for row in payments {
        by_unit.entry(row.unit_id).or_default().push(row);
    }
    let mut streams: Vec<PaymentStream> = projects
        .iter()
        .map(|p| {
            let rows: Vec<PaymentRecord> = match (p.status, p.unit_id) {
                (ProjectStatus::Built, Some(unit)) => {
                    let mut rows: Vec<PaymentRecord> =
                        by_unit.get(&unit).map(|r| r.iter().map(|x| (*x).clone()).collect()).unwrap_or_default();
                    rows.sort_by(|a, b| a.month.cmp(&b.month).then_with(|| a.tariff_id.cmp(&b.tariff_id)));
                    rows
                }
                _ => Vec::new(),
            };
            let flag = if !p.is_built() {
                PaymentFlag::NotBuilt
            } else if rows.is_empty() {
                PaymentFlag::NoPayments
            } else {
                PaymentFlag::Matched
            };
            PaymentStream { project_id: p.project_id, unit_id: p.unit_id, rows, flag }
        })
        .collect();
    streams.sort_by_key(|s| s.project_id);
    streams
}

/// Tariff id to category lookup.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TariffRegister(BTreeMap<String, TariffCategory>);

impl TariffRegister {
    pub fn new(entries: &[TariffEntry]) -> Self {
        TariffRegister(entries.iter().map(|e| (e.tariff_id.clone(), e.category)).collect())
    }

    pub fn category(&self, tariff_id: &str) -> Option<TariffCategory> {
        self.0.get(tariff_id).copied()
    }
}

/// Keeps only rows paid under the regular market premium model.
pub fn select_market_premium(
    rows: &[PaymentRecord],
    tariffs: &TariffRegister,
) -> Result<Vec<PaymentRecord>, LinkageError> {
    let mut kept = Vec::with_capacity(rows.len());
    for row in rows {
        match tariffs.category(&row.tariff_id) {
            Some(TariffCategory::MarketPremium) => kept.push(row.clone()),
            Some(TariffCategory::SidePayment) => {}
            None => return Err(LinkageError::UnknownTariff(row.tariff_id.clone())),
        }
    }
    Ok(kept)
}

/// Market premium actually paid per kWh: payment (ct) over generation.
/// `None` when nothing was generated.
pub fn effective_premium(row: &PaymentRecord) -> Option<Price> {
    premium_from_totals(row.payment_ct, row.generation_kwh)
}

fn premium_from_totals(payment_ct: f64, generation_kwh: f64) -> Option<Price> {
    if !(generation_kwh > 0.0) {
        return None;
    }
    Price::from_f64(payment_ct / generation_kwh)
}

/// Adds the month's market value back onto the premium.
pub fn net_bid_value(premium: Price, market_value: Price) -> Price {
    premium + market_value
}

/// Undoes the tariff reductions for relocation and late commissioning.
pub fn full_bid_value(net: Price, pen_loc: bool, pen_dline: bool) -> Price {
    net + crate::clearing::tariff_reduction(pen_dline, pen_loc)
}

/// Monthly net and full bid values of one project before consolidation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonthlySeries {
    pub project_id: Option<ProjectId>,
    pub monthly_net: BTreeMap<YearMonth, Price>,
    pub monthly_full: BTreeMap<YearMonth, Price>,
    /// Months with a zero (or negative) premium: the market value reached
    /// the bid, so no bid value can be read off.
    pub zero_premium_months: u32,
    pub zero_generation_months: u32,
    pub missing_market_value_months: u32,
    /// Months with at least one premium row.
    pub premium_months: u32,
}

/// Turns a project's market-premium rows into monthly bid values.
pub fn monthly_bid_values(
    project: &ProjectRecord,
    spec: &AuctionSpec,
    premium_rows: &[PaymentRecord],
    market_values: &BTreeMap<YearMonth, Price>,
) -> MonthlySeries {
    let mut series = MonthlySeries { project_id: Some(project.project_id), ..Default::default() };
    let pen_loc = location_changed(project);
    let pen_dline = built_late(project, spec);

    let mut per_month: BTreeMap<YearMonth, (f64, f64)> = BTreeMap::new();
    for row in premium_rows {
        let e = per_month.entry(row.month).or_insert((0.0, 0.0));
        e.0 += row.payment_ct;
        e.1 += row.generation_kwh;
    }
    series.premium_months = per_month.len() as u32;
    for (month, (payment, generation)) in per_month {
        let Some(premium) = premium_from_totals(payment, generation) else {
            series.zero_generation_months += 1;
            continue;
        };
        if !premium.is_positive() {
            series.zero_premium_months += 1;
            continue;
        }
        let Some(mv) = market_values.get(&month) else {
            series.missing_market_value_months += 1;
            continue;
        };
        let net = net_bid_value(premium, *mv);
        series.monthly_net.insert(month, net);
        series.monthly_full.insert(month, full_bid_value(net, pen_loc, pen_dline));
    }
    series
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reliability {
    /// Time-invariant monthly values observed for the project itself.
    Observed,
    /// No usable months of its own; inherits its bid's observed value.
    PropagatedFromBid,
    /// Monthly values disagree, or the bid's projects disagree.
    Unreliable,
    /// Only zero-premium months; the bid cannot be read off.
    ZeroPremium,
    /// Part of a uniform-price auction: the value is the marginal bid, not
    /// the project's own bid.
    Excluded,
    /// Not built, or no usable payment months.
    NoData,
}

impl Reliability {
    pub fn as_str(self) -> &'static str {
        match self {
            Reliability::Observed => "observed",
            Reliability::PropagatedFromBid => "propagated_from_bid",
            Reliability::Unreliable => "unreliable",
            Reliability::ZeroPremium => "zero_premium",
            Reliability::Excluded => "excluded",
            Reliability::NoData => "no_data",
        }
    }

    pub fn has_value(self) -> bool {
        matches!(self, Reliability::Observed | Reliability::PropagatedFromBid)
    }
}

impl fmt::Display for Reliability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Reliability {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [
            Reliability::Observed,
            Reliability::PropagatedFromBid,
            Reliability::Unreliable,
            Reliability::ZeroPremium,
            Reliability::Excluded,
            Reliability::NoData,
        ]
        .into_iter()
        .find(|r| r.as_str() == s.trim())
        .ok_or(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BidValueEstimate {
    pub project_id: ProjectId,
    pub monthly_net: BTreeMap<YearMonth, Price>,
    pub monthly_full: BTreeMap<YearMonth, Price>,
    pub consolidated_net: Option<Price>,
    pub consolidated_full: Option<Price>,
    /// Final classification, including exclusion from the bid-value sample.
    pub reliability: Reliability,
    /// Classification from the payment evidence alone, before any
    /// uniform-price exclusion.
    pub evidence: Reliability,
    pub zero_premium_months: u32,
}

impl BidValueEstimate {
    /// Whether the value belongs in the bid-value analysis sample.
    pub fn in_bid_sample(&self) -> bool {
        self.reliability.has_value() && self.consolidated_full.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Consolidation {
    pub estimates: Vec<BidValueEstimate>,
    pub warnings: Vec<LinkageWarning>,
}

fn spread(values: impl Iterator<Item = Price>) -> Option<(Price, Price)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Consolidates monthly series into one net and one full value per
/// project, then enforces one full value per bid and propagates it to
/// siblings without an observation of their own.
pub fn consolidate_bid_values(
    projects: &[ProjectRecord],
    series: &[MonthlySeries],
    pricing: &BTreeMap<u32, PricingRule>,
    tolerance: Price,
) -> Consolidation {
    let by_project: BTreeMap<ProjectId, &MonthlySeries> =
        series.iter().filter_map(|s| s.project_id.map(|id| (id, s))).collect();
    let mut sorted: Vec<&ProjectRecord> = projects.iter().collect();
    sorted.sort_by_key(|p| p.project_id);

    let mut estimates: Vec<BidValueEstimate> = Vec::with_capacity(sorted.len());
    for p in &sorted {
        let s = by_project.get(&p.project_id);
        let mut est = BidValueEstimate {
            project_id: p.project_id,
            monthly_net: s.map(|s| s.monthly_net.clone()).unwrap_or_default(),
            monthly_full: s.map(|s| s.monthly_full.clone()).unwrap_or_default(),
            consolidated_net: None,
            consolidated_full: None,
            reliability: Reliability::NoData,
            evidence: Reliability::NoData,
            zero_premium_months: s.map_or(0, |s| s.zero_premium_months),
        };
        if p.is_built() {
            if let Some((lo, hi)) = spread(est.monthly_full.values().copied()) {
                if hi - lo <= tolerance {
                    est.consolidated_full = Price::mean(est.monthly_full.values().copied());
                    est.consolidated_net = Price::mean(est.monthly_net.values().copied());
                    est.evidence = Reliability::Observed;
                } else {
                    est.evidence = Reliability::Unreliable;
                }
            } else if est.zero_premium_months > 0 {
                est.evidence = Reliability::ZeroPremium;
            }
        }
        estimates.push(est);
    }

    // per-bid uniformity and propagation
    let mut warnings = Vec::new();
    let mut by_bid: BTreeMap<BidId, Vec<usize>> = BTreeMap::new();
    for (i, p) in sorted.iter().enumerate() {
        by_bid.entry(p.bid_id()).or_default().push(i);
    }
    for (bid_id, members) in &by_bid {
        let observed = members
            .iter()
            .filter(|&&i| estimates[i].evidence == Reliability::Observed)
            .filter_map(|&i| estimates[i].consolidated_full);
        let Some((lo, hi)) = spread(observed.clone()) else { continue };
        if hi - lo > tolerance {
            warnings.push(LinkageWarning::ConflictingBidValues { bid_id: *bid_id, min: lo, max: hi });
            for &i in members {
                if sorted[i].is_built() {
                    estimates[i].evidence = Reliability::Unreliable;
                    estimates[i].consolidated_full = None;
                    estimates[i].consolidated_net = None;
                }
            }
            continue;
        }
        let bid_value = Price::mean(observed);
        for &i in members {
            let est = &mut estimates[i];
            match est.evidence {
                Reliability::Observed => est.consolidated_full = bid_value,
                Reliability::NoData | Reliability::ZeroPremium if sorted[i].is_built() => {
                    est.evidence = Reliability::PropagatedFromBid;
                    est.consolidated_full = bid_value;
                }
                _ => {}
            }
        }
    }

    for (est, p) in estimates.iter_mut().zip(&sorted) {
        est.reliability = est.evidence;
        if p.is_built() && pricing.get(&p.auction_index) == Some(&PricingRule::UniformPrice) {
            est.reliability = Reliability::Excluded;
        }
    }
    Consolidation { estimates, warnings }
}

/// Per-auction counts at each pipeline stage.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineCounts {
    pub auction_index: u32,
    pub date: Option<Date>,
    pub deadline: Option<Date>,
    pub awarded_capacity_kw: f64,
    pub awarded_bids: u32,
    pub awarded_projects: u32,
    pub built_projects: u32,
    pub unit_ids: u32,
    pub payments_found: u32,
    pub reliable_payment: u32,
    pub final_bid_values: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkageConfig {
    pub tolerance: Price,
}

impl Default for LinkageConfig {
    fn default() -> Self {
        LinkageConfig { tolerance: DEFAULT_TOLERANCE }
    }
}

/// Borrowed view of the registers the linkage needs.
#[derive(Clone, Copy, Debug)]
pub struct LinkageInputs<'a> {
    pub auction_results: &'a [AuctionResultRow],
    pub units: &'a [UnitRecord],
    pub payments: &'a [PaymentRecord],
    pub market_values: &'a [crate::registers::MarketValue],
    pub tariffs: &'a [TariffEntry],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkageOutput {
    pub projects: Vec<ProjectRecord>,
    pub developers: Vec<DeveloperProfile>,
    pub payment_flags: Vec<(ProjectId, PaymentFlag)>,
    pub series: Vec<MonthlySeries>,
    pub estimates: Vec<BidValueEstimate>,
    pub counts: Vec<PipelineCounts>,
    pub warnings: Vec<LinkageWarning>,
}

/// Runs identification, payment attachment, cleaning, reconstruction and
/// consolidation end to end.
pub fn run_linkage(inputs: &LinkageInputs<'_>, config: &LinkageConfig) -> Result<LinkageOutput, LinkageError> {
    let auctions =
        crate::registers::group_auctions(inputs.auction_results).map_err(LinkageError::InvalidAuctionResults)?;
    let ident = identify_projects(inputs.auction_results, inputs.units)?;
    let developers = developer_profiles(inputs.auction_results, &ident.projects);
    let streams = attach_payments(&ident.projects, inputs.payments);
    let tariffs = TariffRegister::new(inputs.tariffs);
    let market_values = crate::registers::market_value_table(inputs.market_values);

    let mut series = Vec::with_capacity(streams.len());
    for (project, stream) in ident.projects.iter().zip(&streams) {
        let spec = &auctions.get(&project.auction_index).ok_or(LinkageError::UnknownAuction(project.auction_index))?.spec;
        let premium_rows = select_market_premium(&stream.rows, &tariffs)?;
        series.push(monthly_bid_values(project, spec, &premium_rows, &market_values));
    }
    let pricing: BTreeMap<u32, PricingRule> = auctions.iter().map(|(k, a)| (*k, a.spec.pricing_rule)).collect();
    let consolidation = consolidate_bid_values(&ident.projects, &series, &pricing, config.tolerance);

    let mut counts: BTreeMap<u32, PipelineCounts> = BTreeMap::new();
    for (index, data) in &auctions {
        let c = counts.entry(*index).or_default();
        c.auction_index = *index;
        c.date = Some(data.spec.date);
        c.deadline = Some(data.spec.deadline_expiry());
        for bid in data.awarded_bids() {
            c.awarded_bids += 1;
            c.awarded_capacity_kw += bid.capacity_kw;
        }
    }
    for ((project, stream), est) in ident.projects.iter().zip(&streams).zip(&consolidation.estimates) {
        let c = counts.entry(project.auction_index).or_default();
        c.awarded_projects += 1;
        if project.is_built() {
            c.built_projects += 1;
            if project.unit_id.is_some() {
                c.unit_ids += 1;
            }
        }
        if stream.flag == PaymentFlag::Matched {
            c.payments_found += 1;
        }
        match est.evidence {
            Reliability::Observed => {
                c.reliable_payment += 1;
                c.final_bid_values += 1;
            }
            Reliability::PropagatedFromBid => c.final_bid_values += 1,
            _ => {}
        }
    }

    let mut warnings = ident.warnings;
    warnings.extend(consolidation.warnings);
    Ok(LinkageOutput {
        payment_flags: streams.iter().map(|s| (s.project_id, s.flag)).collect(),
        projects: ident.projects,
        developers,
        series,
        estimates: consolidation.estimates,
        counts: counts.into_values().collect(),
        warnings,
    })
}
