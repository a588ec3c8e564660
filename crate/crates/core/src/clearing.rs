//! Auction clearing, securities, non-compliance penalties and the annual
//! tender-volume schedule.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::ids::BidId;
use crate::price::Price;
use crate::registers::{AuctionSpec, InvariantError, PricingRule, SubmittedBid};

/// What happens to the bid that straddles the remaining tendered volume.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MarginalBidRule {
    /// Award the straddling bid in full, then stop.
    #[default]
    AwardInFull,
    /// Award only the remaining volume of the straddling bid, then stop.
    Curtail,
    /// Drop the straddling bid and stop.
    Reject,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClearingConfig {
    pub marginal: MarginalBidRule,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwardedBid {
    pub bid_id: BidId,
    pub capacity_kw: f64,
    /// The bid as submitted.
    pub bid_price: Price,
    /// The tariff the bid is paid under the auction's pricing rule.
    pub pay_tariff: Price,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AwardOutcome {
    pub auction_index: u32,
    pub pricing_rule: PricingRule,
    pub tendered_capacity_kw: f64,
    pub awarded_bids: Vec<AwardedBid>,
    pub awarded_capacity_kw: f64,
    /// Highest awarded bid (the marginal bid).
    pub max_awarded_bid: Option<Price>,
    pub min_awarded_bid: Option<Price>,
    /// Capacity-weighted average of the awarded pay tariffs, ct/kWh.
    pub weighted_avg_bid: Option<f64>,
    /// Capacity of every submitted bid, rejected ones included.
    pub total_bid_capacity_kw: f64,
}

impl AwardOutcome {
    /// Recomputes the capacity-weighted average tariff from `awarded_bids`.
    pub fn recompute_weighted_avg(&self) -> Option<f64> {
        weighted_average(&self.awarded_bids)
    }

    pub fn bid_to_cover(&self) -> f64 {
        self.total_bid_capacity_kw / self.tendered_capacity_kw
    }

    /// Rebuilds the outcome of an already-held auction from its published
    /// award flags.
    pub fn from_published<'a, I>(spec: &AuctionSpec, bids: I) -> AwardOutcome
    where
        I: IntoIterator<Item = (&'a SubmittedBid, bool)>,
    {
        let mut caps = Vec::new();
        let mut awarded = Vec::new();
        for (bid, won) in bids {
            caps.push(bid.capacity_kw);
            if won {
                awarded.push(AwardedBid {
                    bid_id: bid.bid_id,
                    capacity_kw: bid.capacity_kw,
                    bid_price: bid.price,
                    pay_tariff: bid.price,
                });
            }
        }
        awarded.sort_by(|a, b| a.bid_price.cmp(&b.bid_price).then(a.bid_id.cmp(&b.bid_id)));
        finish_outcome(spec, awarded, order_independent_sum(caps))
    }
}

/// Sums after sorting so the result does not depend on input order.
fn order_independent_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectionReason {
    AboveCeiling,
    /// Would have been awarded but dropped under [`MarginalBidRule::Reject`].
    Marginal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clearing {
    pub outcome: AwardOutcome,
    pub rejected: Vec<(BidId, RejectionReason)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClearingError {
    DuplicateBid(BidId),
    InvalidBid(BidId, InvariantError),
    InvalidAuction(InvariantError),
}

impl fmt::Display for ClearingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClearingError::DuplicateBid(id) => write!(f, "duplicate bid id {id}"),
            ClearingError::InvalidBid(id, e) => write!(f, "bid {id}: {e}"),
            ClearingError::InvalidAuction(e) => write!(f, "auction: {e}"),
        }
    }
}

impl core::error::Error for ClearingError {}

fn weighted_average(awarded: &[AwardedBid]) -> Option<f64> {
    let cap: f64 = awarded.iter().map(|a| a.capacity_kw).sum();
    if awarded.is_empty() || cap <= 0.0 {
        return None;
    }
    Some(awarded.iter().map(|a| a.pay_tariff.to_f64() * a.capacity_kw).sum::<f64>() / cap)
}

fn finish_outcome(spec: &AuctionSpec, mut awarded: Vec<AwardedBid>, total_bid_kw: f64) -> AwardOutcome {
    let max = awarded.iter().map(|a| a.bid_price).max();
    let min = awarded.iter().map(|a| a.bid_price).min();
    if let (PricingRule::UniformPrice, Some(marginal)) = (spec.pricing_rule, max) {
        for a in &mut awarded {
            a.pay_tariff = marginal;
        }
    }
    AwardOutcome {
        auction_index: spec.auction_index,
        pricing_rule: spec.pricing_rule,
        tendered_capacity_kw: spec.tendered_capacity_kw,
        awarded_capacity_kw: awarded.iter().map(|a| a.capacity_kw).sum(),
        max_awarded_bid: max,
        min_awarded_bid: min,
        weighted_avg_bid: weighted_average(&awarded),
        awarded_bids: awarded,
        total_bid_capacity_kw: total_bid_kw,
    }
}

/// Merit order: price ascending, then smaller capacity, then arrival order.
fn merit_order(a: &SubmittedBid, b: &SubmittedBid) -> Ordering {
    a.price
        .cmp(&b.price)
        .then(a.capacity_kw.total_cmp(&b.capacity_kw))
        .then(a.bid_id.sequence.cmp(&b.bid_id.sequence))
        .then(a.bid_id.cmp(&b.bid_id))
}

/// Clears one sealed-bid auction.
///
/// Bids above the ceiling are rejected up front. The rest are awarded in
/// merit order until the tendered volume is used up; the bid that crosses
/// the remaining volume is handled by `config.marginal`.
pub fn clear_auction(
    spec: &AuctionSpec,
    bids: &[SubmittedBid],
    config: &ClearingConfig,
) -> Result<Clearing, ClearingError> {
    spec.validate().map_err(ClearingError::InvalidAuction)?;
    let mut seen = BTreeSet::new();
    for bid in bids {
        if !seen.insert(bid.bid_id) {
            return Err(ClearingError::DuplicateBid(bid.bid_id));
        }
        bid.validate().map_err(|e| ClearingError::InvalidBid(bid.bid_id, e))?;
    }

    let mut rejected = Vec::new();
    let mut admissible: Vec<&SubmittedBid> = Vec::with_capacity(bids.len());
    for bid in bids {
        if bid.price > spec.ceiling_price {
            rejected.push((bid.bid_id, RejectionReason::AboveCeiling));
        } else {
            admissible.push(bid);
        }
    }
    admissible.sort_by(|a, b| merit_order(a, b));

    let mut remaining = spec.tendered_capacity_kw;
    let mut awarded = Vec::new();
    for bid in admissible {
        if remaining <= 0.0 {
            break;
        }
        let mut award = AwardedBid {
            bid_id: bid.bid_id,
            capacity_kw: bid.capacity_kw,
            bid_price: bid.price,
            pay_tariff: bid.price,
        };
        if bid.capacity_kw <= remaining {
            remaining -= bid.capacity_kw;
            awarded.push(award);
            continue;
        }
        match config.marginal {
            MarginalBidRule::AwardInFull => awarded.push(award),
            MarginalBidRule::Curtail => {
                award.capacity_kw = remaining;
                awarded.push(award);
            }
            MarginalBidRule::Reject => rejected.push((bid.bid_id, RejectionReason::Marginal)),
        }
        break;
    }
    rejected.sort_by_key(|(id, _)| *id);

    let total = order_independent_sum(bids.iter().map(|b| b.capacity_kw));
    Ok(Clearing { outcome: finish_outcome(spec, awarded, total), rejected })
}

/// Security deposits per kW of bid capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecuritySchedule {
    pub first_eur_per_kw: f64,
    pub second_eur_per_kw: f64,
    pub total_eur_per_kw: f64,
}

impl SecuritySchedule {
    pub fn total_eur(&self, capacity_kw: f64) -> f64 {
        self.total_eur_per_kw * capacity_kw
    }
}

pub const FIRST_SECURITY_EUR_PER_KW: f64 = 5.0;
const SECOND_SECURITY_EUR_PER_KW: f64 = 45.0;
const SECOND_SECURITY_WITH_DOCS_EUR_PER_KW: f64 = 15.0;
const CANCELLATION_PENALTY_EUR_PER_KW: f64 = 50.0;
const CANCELLATION_PENALTY_WITH_DOCS_EUR_PER_KW: f64 = 25.0;
/// Cancelled share of a bid from which the cancellation penalty applies.
pub const CANCELLATION_THRESHOLD: f64 = 0.05;

pub fn security_schedule(bid: &SubmittedBid) -> SecuritySchedule {
    let second = if bid.land_use_docs { SECOND_SECURITY_WITH_DOCS_EUR_PER_KW } else { SECOND_SECURITY_EUR_PER_KW };
    SecuritySchedule {
        first_eur_per_kw: FIRST_SECURITY_EUR_PER_KW,
        second_eur_per_kw: second,
        total_eur_per_kw: FIRST_SECURITY_EUR_PER_KW + second,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyAssessment {
    pub forfeited_first_security_eur: f64,
    pub cancellation_penalty_eur: f64,
    pub tariff_reduction: Price,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyError {
    RealisedExceedsBid { realised_kw: f64, bid_kw: f64 },
    NegativeCapacity,
}

impl fmt::Display for PenaltyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyError::RealisedExceedsBid { realised_kw, bid_kw } => {
                write!(f, "realised capacity {realised_kw} kW exceeds bid capacity {bid_kw} kW")
            }
            PenaltyError::NegativeCapacity => f.write_str("realised capacity is negative"),
        }
    }
}

impl core::error::Error for PenaltyError {}

/// Tariff reduction for a realised project: 0.3 ct/kWh each for late
/// commissioning and for relocation.
pub fn tariff_reduction(late: bool, relocated: bool) -> Price {
    let steps = late as i64 + relocated as i64;
    Price::from_units(Price::REDUCTION_STEP.units() * steps)
}

pub fn assess_penalty(
    bid: &SubmittedBid,
    realised_capacity_kw: f64,
    second_security_paid: bool,
    late: bool,
    relocated: bool,
) -> Result<PenaltyAssessment, PenaltyError> {
    if realised_capacity_kw < 0.0 {
        return Err(PenaltyError::NegativeCapacity);
    }
    if realised_capacity_kw > bid.capacity_kw {
        return Err(PenaltyError::RealisedExceedsBid { realised_kw: realised_capacity_kw, bid_kw: bid.capacity_kw });
    }
    if !second_security_paid {
        return Ok(PenaltyAssessment {
            forfeited_first_security_eur: FIRST_SECURITY_EUR_PER_KW * bid.capacity_kw,
            cancellation_penalty_eur: 0.0,
            tariff_reduction: Price::ZERO,
        });
    }
    let cancelled = bid.capacity_kw - realised_capacity_kw;
    let rate = if bid.land_use_docs { CANCELLATION_PENALTY_WITH_DOCS_EUR_PER_KW } else { CANCELLATION_PENALTY_EUR_PER_KW };
    let penalty = if cancelled >= CANCELLATION_THRESHOLD * bid.capacity_kw { rate * cancelled } else { 0.0 };
    let reduction = if realised_capacity_kw > 0.0 { tariff_reduction(late, relocated) } else { Price::ZERO };
    Ok(PenaltyAssessment { forfeited_first_security_eur: 0.0, cancellation_penalty_eur: penalty, tariff_reduction: reduction })
}

/// Capacities deducted from a year's tender volume, all in MW and taken
/// from the previous year.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VolumeReductions {
    /// Installed in Germany, won in other EU countries' auctions.
    pub eu_cross_border_mw: f64,
    /// Large installations registered outside any auction.
    pub non_auction_large_pv_mw: f64,
    /// Solar won in the technology-neutral auctions; counts at half weight.
    pub neutral_auction_solar_mw: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleError {
    Negative(&'static str),
    EmptyPlan,
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::Negative(what) => write!(f, "{what} must not be negative"),
            ScheduleError::EmptyPlan => f.write_str("tender plan has no dates"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// Adjusts a year's per-date tender volumes (MW): last year's unawarded
/// volume is added and the reductions subtracted, both spread equally over
/// the tender dates. Volumes never go below zero.
pub fn tender_schedule(
    base_plan_mw: &[f64],
    prior_year_unawarded_mw: f64,
    reductions: &VolumeReductions,
) -> Result<Vec<f64>, ScheduleError> {
    if base_plan_mw.is_empty() {
        return Err(ScheduleError::EmptyPlan);
    }
    if base_plan_mw.iter().any(|v| *v < 0.0) {
        return Err(ScheduleError::Negative("planned volume"));
    }
    let checks = [
        (prior_year_unawarded_mw, "prior-year unawarded volume"),
        (reductions.eu_cross_border_mw, "cross-border capacity"),
        (reductions.non_auction_large_pv_mw, "non-auction capacity"),
        (reductions.neutral_auction_solar_mw, "neutral-auction capacity"),
    ];
    for (v, name) in checks {
        if v < 0.0 {
            return Err(ScheduleError::Negative(name));
        }
    }
    let total_reduction =
        reductions.eu_cross_border_mw + reductions.non_auction_large_pv_mw + 0.5 * reductions.neutral_auction_solar_mw;
    let n = base_plan_mw.len() as f64;
    let shift = (prior_year_unawarded_mw - total_reduction) / n;
    Ok(base_plan_mw.iter().map(|v| (v + shift).max(0.0)).collect())
}

/// Statutory tender dates and volumes (MW) for a calendar year; years from
/// 2022 on repeat the 2022 plan.
pub fn statutory_plan(year: i32) -> Option<&'static [(u8, f64)]> {
    const Y2015: &[(u8, f64)] = &[(4, 800.0), (8, 150.0), (12, 200.0)];
    const Y2016: &[(u8, f64)] = &[(4, 125.0), (8, 125.0), (12, 160.0)];
    const Y2017: &[(u8, f64)] = &[(2, 200.0), (6, 200.0), (10, 200.0)];
    const Y2019: &[(u8, f64)] = &[(2, 175.0), (3, 500.0), (6, 150.0), (10, 150.0), (12, 500.0)];
    const Y2020: &[(u8, f64)] = &[(2, 100.0), (3, 300.0), (6, 150.0), (7, 300.0), (9, 400.0), (10, 150.0), (12, 400.0)];
    const Y2021: &[(u8, f64)] = &[(2, 150.0), (3, 400.0), (6, 100.0), (7, 400.0), (9, 400.0), (10, 100.0), (12, 400.0)];
    match year {
        2015 => Some(Y2015),
        2016 => Some(Y2016),
        2017 | 2018 => Some(Y2017),
        2019 => Some(Y2019),
        2020 => Some(Y2020),
        2021 => Some(Y2021),
        y if y >= 2022 => Some(Y2017),
        _ => None,
    }
}
