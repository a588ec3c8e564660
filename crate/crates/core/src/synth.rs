//! Seeded synthetic worlds: developers, bids, awards, realisation
//! behaviour and payment streams, with the ground truth they were built
//! from.
//!
//! Payments invert the premium rule: for every month after commissioning a
//! unit is paid `(tariff - reduction - market value) * generation`, rounded
//! to whole ct, or nothing when the market value reaches the reduced
//! tariff. Bids carry two decimals, market values three and monthly
//! generation stays above 20,000 kWh, so the pipeline's per-kWh division
//! recovers the planted values exactly at the 1e-4 ct/kWh price grid.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::{Date, YearMonth};
use crate::clearing::{clear_auction, tariff_reduction, ClearingConfig, ClearingError};
use crate::ids::{BidId, ProjectId, Programme, UnitId};
use crate::price::Price;
use crate::registers::{
    AuctionResultRow, AuctionSpec, GermanState, MarketValue, PaymentRecord, PostalCode, PricingRule, PvCostIndex,
    SubmittedBid, TariffCategory, TariffEntry, UnitRecord, MAX_BID_KW, MIN_BID_KW,
};

pub const MARKET_PREMIUM_TARIFF: &str = "MP-FIP";
pub const SIDE_PAYMENT_TARIFF: &str = "ANC";

const SERIAL_BASE: u128 = 100_000_000_000_000_000_000_000_000_000;
/// Full-load hours in the darkest month; a unit of `min_project_kw`
/// therefore never generates less than 0.9 * 50 h * 500 kW.
const BASE_HOURS: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub seed: u64,
    /// Last month covered by market values, cost index and payments.
    pub horizon_end: YearMonth,
    /// Months of payment data per unit after its commissioning month.
    #[serde(default = "default_payment_months")]
    pub payment_months: u32,
    pub auctions: Vec<AuctionConfig>,
    #[serde(default)]
    pub developers: DeveloperConfig,
    #[serde(default)]
    pub behaviour: BehaviourConfig,
    #[serde(default)]
    pub market: MarketConfig,
    #[serde(default)]
    pub cost: CostConfig,
}

fn default_payment_months() -> u32 {
    24
}

fn default_lag() -> i64 {
    15
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionConfig {
    pub date: Date,
    pub tendered_capacity_kw: f64,
    pub pricing_rule: PricingRule,
    pub ceiling: Price,
    #[serde(default)]
    pub n_bids: u32,
    /// Mean and spread of submitted bids, ct/kWh.
    #[serde(default)]
    pub bid_mean: f64,
    #[serde(default)]
    pub bid_sd: f64,
    /// Days from the auction to the first announcement of winners.
    #[serde(default = "default_lag")]
    pub announcement_lag_days: i64,
    /// Explicit bids; when present, `n_bids`, `bid_mean` and `bid_sd` are
    /// ignored.
    #[serde(default)]
    pub planted_bids: Vec<PlantedBid>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedBid {
    pub capacity_kw: f64,
    pub price: Price,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeveloperConfig {
    pub count: u32,
    /// Probability that a developer bids under a second company name
    /// registered at the same address.
    pub address_sharing_rate: f64,
    /// Bidder selection weight falls off as rank^-skew.
    pub size_skew: f64,
}

impl Default for DeveloperConfig {
    fn default() -> Self {
        DeveloperConfig { count: 120, address_sharing_rate: 0.2, size_skew: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum DurationModel {
    /// On-time projects finish uniformly between `min_duration_days` and
    /// the deadline, late ones uniformly between the deadline and expiry.
    DeadlineMix,
    /// Normally distributed duration, shifted for relocated projects.
    Normal { mean_days: f64, sd_days: f64, relocation_extra_days: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviourConfig {
    pub relocation_probability: f64,
    /// Used by [`DurationModel::DeadlineMix`] only.
    pub late_probability: f64,
    pub cancellation_probability: f64,
    pub duration: DurationModel,
    pub min_duration_days: i64,
    /// Relative frequency of bids realised as 1, 2 or 3 projects.
    pub split_weights: [f64; 3],
    pub min_project_kw: f64,
    pub min_bid_kw: f64,
    pub max_bid_kw: f64,
    pub land_use_docs_probability: f64,
    /// Probability that a built unit has no payment rows at all.
    pub missing_payment_probability: f64,
    pub side_payment_probability: f64,
    /// Probability that a site lies in a southern state.
    pub south_share: f64,
}

impl Default for BehaviourConfig {
    fn default() -> Self {
        BehaviourConfig {
            relocation_probability: 0.46,
            late_probability: 0.28,
            cancellation_probability: 0.1,
            duration: DurationModel::DeadlineMix,
            min_duration_days: 120,
            split_weights: [0.6, 0.3, 0.1],
            min_project_kw: 500.0,
            min_bid_kw: 750.0,
            max_bid_kw: 10_000.0,
            land_use_docs_probability: 0.3,
            missing_payment_probability: 0.02,
            side_payment_probability: 0.3,
            south_share: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    /// Mean monthly market value, ct/kWh.
    pub mean: f64,
    pub seasonal_amplitude: f64,
    pub trend_per_year: f64,
    pub noise_sd: f64,
    /// Probability of a month whose market value jumps to `spike_level`.
    pub spike_probability: f64,
    pub spike_level: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            mean: 3.5,
            seasonal_amplitude: 0.6,
            trend_per_year: 0.2,
            noise_sd: 0.3,
            spike_probability: 0.02,
            spike_level: 12.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub start: f64,
    /// Relative decline per month.
    pub monthly_decline: f64,
    pub noise_sd: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig { start: 0.6, monthly_decline: 0.01, noise_sd: 0.005 }
    }
}

impl WorldConfig {
    /// Twelve auctions shaped after the 2015-2018 ground-mounted rounds.
    pub fn programme(seed: u64) -> Self {
        let rounds: [(&str, f64, PricingRule, i64, f64); 12] = [
            ("2015-04-15", 150_000.0, PricingRule::PayAsBid, 1129, 9.6),
            ("2015-08-01", 150_000.0, PricingRule::UniformPrice, 1109, 8.9),
            ("2015-12-01", 200_000.0, PricingRule::UniformPrice, 1109, 8.4),
            ("2016-04-01", 125_000.0, PricingRule::PayAsBid, 1109, 7.8),
            ("2016-08-01", 125_000.0, PricingRule::PayAsBid, 1109, 7.6),
            ("2016-12-01", 160_000.0, PricingRule::PayAsBid, 1109, 7.3),
            ("2017-02-01", 200_000.0, PricingRule::PayAsBid, 891, 7.0),
            ("2017-06-01", 200_000.0, PricingRule::PayAsBid, 891, 6.1),
            ("2017-10-01", 200_000.0, PricingRule::PayAsBid, 891, 5.4),
            ("2018-02-01", 200_000.0, PricingRule::PayAsBid, 891, 4.8),
            ("2018-06-01", 182_000.0, PricingRule::PayAsBid, 891, 5.0),
            ("2018-10-01", 182_000.0, PricingRule::PayAsBid, 891, 5.1),
        ];
        let auctions = rounds
            .iter()
            .map(|(date, tc, rule, ceiling, mean)| AuctionConfig {
                date: date.parse().expect("valid preset date"),
                tendered_capacity_kw: *tc,
                pricing_rule: *rule,
                ceiling: Price::from_hundredths(*ceiling),
                n_bids: (tc * 4.0 / 5_400.0) as u32,
                bid_mean: *mean,
                bid_sd: 0.7,
                announcement_lag_days: 15,
                planted_bids: Vec::new(),
            })
            .collect();
        WorldConfig {
            seed,
            horizon_end: "2022-12".parse().expect("valid preset month"),
            payment_months: 24,
            auctions,
            developers: DeveloperConfig::default(),
            behaviour: BehaviourConfig::default(),
            market: MarketConfig::default(),
            cost: CostConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what: &'static str| Err(SynthError::InvalidConfig(what));
        let b = &self.behaviour;
        let probabilities = [
            b.relocation_probability,
            b.late_probability,
            b.cancellation_probability,
            b.land_use_docs_probability,
            b.missing_payment_probability,
            b.side_payment_probability,
            b.south_share,
            self.developers.address_sharing_rate,
            self.market.spike_probability,
        ];
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.auctions.is_empty() {
            return bad("at least one auction is required");
        }
        if self.developers.count == 0 {
            return bad("developer count must be positive");
        }
        if !(self.developers.size_skew >= 0.0) {
            return bad("size_skew must be non-negative");
        }
        if b.split_weights.iter().any(|w| !(*w >= 0.0)) || b.split_weights.iter().sum::<f64>() <= 0.0 {
            return bad("split_weights must be non-negative with a positive sum");
        }
        if !(b.min_project_kw >= 500.0) {
            return bad("min_project_kw must be at least 500");
        }
        if !(b.min_bid_kw >= MIN_BID_KW && b.max_bid_kw <= MAX_BID_KW && b.min_bid_kw <= b.max_bid_kw) {
            return bad("bid size range must lie within 750-10000 kW");
        }
        if b.min_project_kw > b.min_bid_kw {
            return bad("min_project_kw exceeds min_bid_kw");
        }
        if b.min_duration_days < 0 {
            return bad("min_duration_days must be non-negative");
        }
        if let DurationModel::Normal { mean_days, sd_days, relocation_extra_days } = b.duration {
            if !(mean_days.is_finite() && sd_days >= 0.0 && relocation_extra_days.is_finite()) {
                return bad("invalid duration distribution");
            }
        }
        let m = &self.market;
        if ![m.mean, m.seasonal_amplitude, m.trend_per_year, m.spike_level].iter().all(|v| v.is_finite())
            || !(m.noise_sd >= 0.0)
        {
            return bad("invalid market value path");
        }
        if !(self.cost.start > 0.0 && self.cost.monthly_decline.is_finite() && self.cost.noise_sd >= 0.0) {
            return bad("invalid cost index path");
        }
        if self.payment_months == 0 {
            return bad("payment_months must be positive");
        }
        for (i, a) in self.auctions.iter().enumerate() {
            if !(a.tendered_capacity_kw > 0.0) || !a.ceiling.is_positive() || a.announcement_lag_days < 0 {
                return bad("auction needs positive tendered capacity and ceiling and a non-negative lag");
            }
            if a.planted_bids.is_empty() && (a.n_bids == 0 || !(a.bid_mean > 0.0) || !(a.bid_sd >= 0.0)) {
                return bad("auction needs n_bids, bid_mean and bid_sd or planted bids");
            }
            if i > 0 && a.date <= self.auctions[i - 1].date {
                return bad("auction dates must increase");
            }
            let spec = self.spec(i);
            let needed = spec.deadline_expiry().year_month().add_months(self.payment_months as i32);
            if needed > self.horizon_end {
                return Err(SynthError::HorizonTooShort {
                    auction_index: spec.auction_index,
                    needed,
                    horizon_end: self.horizon_end,
                });
            }
        }
        Ok(())
    }

    fn spec(&self, i: usize) -> AuctionSpec {
        let a = &self.auctions[i];
        AuctionSpec {
            auction_index: i as u32 + 1,
            date: a.date,
            tendered_capacity_kw: a.tendered_capacity_kw,
            pricing_rule: a.pricing_rule,
            ceiling_price: a.ceiling,
            first_announcement: a.date.add_days(a.announcement_lag_days),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthError {
    InvalidConfig(&'static str),
    HorizonTooShort { auction_index: u32, needed: YearMonth, horizon_end: YearMonth },
    Clearing(ClearingError),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::InvalidConfig(what) => write!(f, "invalid world config: {what}"),
            SynthError::HorizonTooShort { auction_index, needed, horizon_end } => write!(
                f,
                "horizon ends {horizon_end} but payment windows of AU{auction_index} run to {needed}"
            ),
            SynthError::Clearing(e) => write!(f, "clearing failed: {e}"),
        }
    }
}

impl core::error::Error for SynthError {}

/// The five registers plus the cost index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Registers {
    pub auction_results: Vec<AuctionResultRow>,
    pub units: Vec<UnitRecord>,
    pub payments: Vec<PaymentRecord>,
    pub market_values: Vec<MarketValue>,
    pub tariffs: Vec<TariffEntry>,
    pub pv_index: Vec<PvCostIndex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrueProject {
    pub project_id: ProjectId,
    pub auction_index: u32,
    /// Index of the developer behind the bid.
    pub developer: u32,
    pub submitted_bid: Price,
    /// The tariff the project is paid before reductions: the bid under
    /// pay-as-bid, the marginal bid under uniform pricing.
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

#[derive(Clone, Debug, PartialEq)]
pub struct TrueAuction {
    pub auction_index: u32,
    pub awarded_capacity_kw: f64,
    pub built_capacity_kw: f64,
    pub rr: f64,
    pub lchg: Option<f64>,
    pub bl: Option<f64>,
    pub marginal: Option<Price>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub projects: Vec<TrueProject>,
    pub auctions: Vec<TrueAuction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub registers: Registers,
    pub truth: GroundTruth,
}

/// The four transmission system operators, each publishing its own
/// payment file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tso {
    FiftyHertz,
    Amprion,
    Tennet,
    TransnetBw,
}

impl Tso {
    pub const ALL: [Tso; 4] = [Tso::FiftyHertz, Tso::Amprion, Tso::Tennet, Tso::TransnetBw];

    pub fn as_str(self) -> &'static str {
        match self {
            Tso::FiftyHertz => "50hertz",
            Tso::Amprion => "amprion",
            Tso::Tennet => "tennet",
            Tso::TransnetBw => "transnetbw",
        }
    }
}

/// Control area a state's grid connection falls into (coarse).
pub fn tso_for_state(state: GermanState) -> Tso {
    use GermanState::*;
    match state {
        Berlin | Brandenburg | Hamburg | MecklenburgWesternPomerania | Saxony | SaxonyAnhalt | Thuringia => {
            Tso::FiftyHertz
        }
        NorthRhineWestphalia | RhinelandPalatinate | Saarland => Tso::Amprion,
        Bavaria | Bremen | Hesse | LowerSaxony | SchleswigHolstein => Tso::Tennet,
        BadenWuerttemberg => Tso::TransnetBw,
    }
}

/// Leading two postal digits used for each state's synthetic sites.
fn postal_prefixes(state: GermanState) -> &'static [u32] {
    use GermanState::*;
    match state {
        BadenWuerttemberg => &[70, 71, 72, 73, 74, 75, 76, 77, 78, 79, 88, 89],
        Bavaria => &[80, 81, 82, 83, 84, 85, 86, 87, 90, 91, 92, 93, 94, 95, 96, 97],
        Berlin => &[10, 12, 13],
        Brandenburg => &[14, 15, 16, 03],
        Bremen => &[28],
        Hamburg => &[20, 22],
        Hesse => &[34, 35, 36, 60, 61, 63, 64, 65],
        LowerSaxony => &[21, 26, 27, 29, 30, 31, 37, 38, 49],
        MecklenburgWesternPomerania => &[17, 18, 19],
        NorthRhineWestphalia => &[32, 33, 40, 41, 42, 44, 45, 46, 47, 48, 50, 51, 52, 53, 57, 58, 59],
        RhinelandPalatinate => &[54, 55, 56, 67],
        Saarland => &[66],
        Saxony => &[01, 02, 04, 08, 09],
        SaxonyAnhalt => &[06, 39],
        SchleswigHolstein => &[23, 24, 25],
        Thuringia => &[07, 98, 99],
    }
}

fn southern_states() -> impl Iterator<Item = GermanState> {
    GermanState::ALL.into_iter().filter(|s| s.is_southern())
}

fn other_states() -> impl Iterator<Item = GermanState> {
    GermanState::ALL.into_iter().filter(|s| !s.is_southern())
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    fn normal(&mut self) -> f64 {
        // Box-Muller; u1 in (0, 1]
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
    }

    fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        if hi <= lo { lo } else { self.rng.random_range(lo..=hi) }
    }

    fn pick_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut x = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                return i;
            }
            x -= w;
        }
        weights.len() - 1
    }

    fn site(&mut self, south_share: f64) -> (PostalCode, GermanState) {
        let pool: Vec<GermanState> =
            if self.bernoulli(south_share) { southern_states().collect() } else { other_states().collect() };
        let state = pool[self.rng.random_range(0..pool.len())];
        let prefixes = postal_prefixes(state);
        let prefix = prefixes[self.rng.random_range(0..prefixes.len())];
        let code = prefix * 1000 + self.rng.random_range(0..1000u32);
        (PostalCode::from_number(code).expect("five digits"), state)
    }
}

struct Developer {
    names: Vec<String>,
    addresses: Vec<String>,
}

const CITIES: [&str; 8] = ["Berlin", "Hamburg", "Leipzig", "Freiburg", "Kassel", "Erfurt", "Rostock", "Regensburg"];
const STREETS: [&str; 6] = ["Sonnenweg", "Hauptstr.", "Am Solarpark", "Industriestr.", "Lindenallee", "Feldweg"];

fn make_developers(g: &mut Gen, cfg: &DeveloperConfig, south_share: f64) -> Vec<Developer> {
    (0..cfg.count)
        .map(|d| {
            let (postal, _) = g.site(south_share);
            let street = STREETS[d as usize % STREETS.len()];
            let city = CITIES[(d as usize / STREETS.len()) % CITIES.len()];
            let address = format!("{street} {}, {postal} {city}", d + 1);
            let mut names = vec![format!("Solarpark Projekt {} GmbH", d + 1)];
            let mut addresses = vec![address.clone()];
            if g.bernoulli(cfg.address_sharing_rate) {
                names.push(format!("PV Invest {} GmbH & Co. KG", d + 1));
                // same address, different spelling
                addresses.push(address.to_uppercase().replace(',', "  ").replace('.', ""));
            }
            Developer { names, addresses }
        })
        .collect()
}

fn round_kw(v: f64) -> f64 {
    libm::round(v)
}

fn split_capacity(g: &mut Gen, total: f64, k: usize, min_kw: f64) -> Vec<f64> {
    if k == 1 {
        return vec![total];
    }
    let weights: Vec<f64> = (0..k).map(|_| 0.5 + g.uniform()).collect();
    let sum: f64 = weights.iter().sum();
    let mut parts: Vec<f64> = weights[..k - 1].iter().map(|w| round_kw(total * w / sum)).collect();
    let rest = total - parts.iter().sum::<f64>();
    parts.push(rest);
    if parts.iter().any(|p| *p < min_kw) {
        let even = round_kw(total / k as f64);
        parts = vec![even; k - 1];
        parts.push(total - even * (k - 1) as f64);
    }
    parts
}

fn monthly_generation(g: &mut Gen, capacity_kw: f64, month: YearMonth) -> u64 {
    let season = libm::cos(2.0 * PI * (month.month() as f64 - 6.5) / 12.0);
    let hours = BASE_HOURS * (1.0 + 0.5 * season);
    let factor = 0.9 + 0.2 * g.uniform();
    libm::round(capacity_kw * hours * factor) as u64
}

/// Whole-ct payment for a premium of `premium` ct/kWh on `generation` kWh.
fn payment_ct(premium: Price, generation: u64) -> i64 {
    let units = premium.units() as i128 * generation as i128;
    let scale = 10_000i128;
    let rounded = if units >= 0 { (units + scale / 2) / scale } else { -((-units + scale / 2) / scale) };
    rounded as i64
}

fn market_path(g: &mut Gen, cfg: &MarketConfig, first: YearMonth, last: YearMonth) -> Vec<MarketValue> {
    first
        .through(last)
        .map(|m| {
            let years = m.months_since(first) as f64 / 12.0;
            let season = libm::cos(2.0 * PI * (m.month() as f64 - 1.0) / 12.0);
            let mut v = cfg.mean + cfg.seasonal_amplitude * season + cfg.trend_per_year * years + cfg.noise_sd * g.normal();
            if g.bernoulli(cfg.spike_probability) {
                v = cfg.spike_level;
            }
            let v = libm::round(v.max(0.5) * 1000.0) as i64;
            MarketValue { month: m, value: Price::from_units(v * 10) }
        })
        .collect()
}

fn cost_path(g: &mut Gen, cfg: &CostConfig, first: YearMonth, last: YearMonth) -> Vec<PvCostIndex> {
    first
        .through(last)
        .map(|m| {
            let t = m.months_since(first) as f64;
            let v = cfg.start * libm::exp(-cfg.monthly_decline * t) + cfg.noise_sd * g.normal();
            PvCostIndex { month: m, index_value: libm::round(v.max(0.01) * 10_000.0) / 10_000.0 }
        })
        .collect()
}

pub fn tariff_register() -> Vec<TariffEntry> {
    vec![
        TariffEntry {
            tariff_id: MARKET_PREMIUM_TARIFF.into(),
            description: "sliding market premium, auctioned plant".into(),
            category: TariffCategory::MarketPremium,
        },
        TariffEntry {
            tariff_id: SIDE_PAYMENT_TARIFF.into(),
            description: "avoided network charges".into(),
            category: TariffCategory::SidePayment,
        },
    ]
}

struct PlannedUnit {
    unit_id: UnitId,
    capacity_kw: f64,
    date: Date,
    site: (PostalCode, GermanState),
    relocated: bool,
}

/// Generates a complete world. Identical configs give identical worlds.
pub fn generate_world(config: &WorldConfig) -> Result<World, SynthError> {
    config.validate()?;
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(config.seed) };
    let b = &config.behaviour;
    let developers = make_developers(&mut g, &config.developers, b.south_share);
    let dev_weights: Vec<f64> =
        (0..developers.len()).map(|d| libm::pow(d as f64 + 1.0, -config.developers.size_skew)).collect();

    let first_month = config.auctions[0].date.year_month();
    let market_values = market_path(&mut g, &config.market, first_month, config.horizon_end);
    let mv: BTreeMap<YearMonth, Price> = market_values.iter().map(|r| (r.month, r.value)).collect();
    let pv_index = cost_path(&mut g, &config.cost, first_month, config.horizon_end);

    let mut registers = Registers { market_values, pv_index, tariffs: tariff_register(), ..Default::default() };
    let mut truth = GroundTruth::default();
    let mut serial: u128 = 0;
    let mut rounds_per_year: BTreeMap<i32, u32> = BTreeMap::new();

    for (i, acfg) in config.auctions.iter().enumerate() {
        let spec = config.spec(i);
        let year = spec.date.year();
        let round = {
            let r = rounds_per_year.entry(year).or_insert(0);
            *r += 1;
            *r
        };
        let programme = if year <= 2016 { Programme::Ffa } else { Programme::Sol };
        let yy = year.rem_euclid(100) as u8;

        // bids
        let planted: Vec<(f64, Price)> = if acfg.planted_bids.is_empty() {
            (0..acfg.n_bids)
                .map(|_| {
                    let kw = round_kw(b.min_bid_kw + g.uniform() * (b.max_bid_kw - b.min_bid_kw));
                    let price = acfg.bid_mean + acfg.bid_sd * g.normal();
                    let hundredths = (libm::round(price * 100.0) as i64).max(100);
                    (kw, Price::from_hundredths(hundredths))
                })
                .collect()
        } else {
            acfg.planted_bids.iter().map(|p| (p.capacity_kw, p.price)).collect()
        };
        let mut bids = Vec::with_capacity(planted.len());
        let mut bid_developer: BTreeMap<BidId, u32> = BTreeMap::new();
        for (seq, (kw, price)) in planted.into_iter().enumerate() {
            let bid_id = BidId::new(programme, yy, round, seq as u32 + 1).expect("valid generated id");
            let d = g.pick_weighted(&dev_weights);
            let dev = &developers[d];
            let alias = g.rng.random_range(0..dev.names.len());
            let (postal, _) = g.site(b.south_share);
            bid_developer.insert(bid_id, d as u32);
            bids.push(SubmittedBid {
                bid_id,
                developer_name: dev.names[alias].clone(),
                developer_address: dev.addresses[alias].clone(),
                capacity_kw: kw,
                price,
                postal_code: postal,
                land_use_docs: g.bernoulli(b.land_use_docs_probability),
            });
        }
        let clearing = clear_auction(&spec, &bids, &ClearingConfig::default()).map_err(SynthError::Clearing)?;
        let outcome = clearing.outcome;
        let awarded: BTreeMap<BidId, Price> = outcome.awarded_bids.iter().map(|a| (a.bid_id, a.pay_tariff)).collect();
        for bid in &bids {
            registers.auction_results.push(AuctionResultRow {
                auction: spec.clone(),
                bid: bid.clone(),
                awarded: awarded.contains_key(&bid.bid_id),
            });
        }

        // realisation
        let dline = spec.deadline_no_reduction();
        let expiry = spec.deadline_expiry();
        let start = spec.first_announcement;
        let dline_days = dline.days_since(start);
        let expiry_days = expiry.days_since(start);
        let mut auction_truth: Vec<TrueProject> = Vec::new();
        for bid in &bids {
            let Some(&tariff) = awarded.get(&bid.bid_id) else { continue };
            let max_k = ((bid.capacity_kw / b.min_project_kw) as usize).clamp(1, 3);
            let k = (g.pick_weighted(&b.split_weights) + 1).min(max_k);
            let parts = split_capacity(&mut g, bid.capacity_kw, k, b.min_project_kw);
            let bid_site_state = {
                // the bid's own site keeps a consistent state for unmoved units
                let prefix = bid.postal_code.as_str()[..2].parse::<u32>().unwrap_or(0);
                GermanState::ALL
                    .into_iter()
                    .find(|s| postal_prefixes(*s).contains(&prefix))
                    .unwrap_or(GermanState::Brandenburg)
            };
            let mut planned: Vec<PlannedUnit> = Vec::new();
            for cap in parts {
                if g.bernoulli(b.cancellation_probability) {
                    continue;
                }
                let relocated = g.bernoulli(b.relocation_probability);
                let site = if relocated {
                    loop {
                        let s = g.site(b.south_share);
                        if s.0 != bid.postal_code {
                            break s;
                        }
                    }
                } else {
                    (bid.postal_code, bid_site_state)
                };
                let min_days = b.min_duration_days.min(expiry_days);
                let dur = match b.duration {
                    DurationModel::DeadlineMix => {
                        if g.bernoulli(b.late_probability) {
                            g.range_i64(dline_days + 1, expiry_days)
                        } else {
                            g.range_i64(min_days, dline_days)
                        }
                    }
                    DurationModel::Normal { mean_days, sd_days, relocation_extra_days } => {
                        let mean = mean_days + if relocated { relocation_extra_days } else { 0.0 };
                        (libm::round(mean + sd_days * g.normal()) as i64).clamp(min_days, expiry_days)
                    }
                };
                serial += 1;
                planned.push(PlannedUnit {
                    unit_id: UnitId::from_serial(SERIAL_BASE + serial),
                    capacity_kw: cap,
                    date: start.add_days(dur),
                    site,
                    relocated,
                });
            }
            planned.sort_by(|a, b| a.date.cmp(&b.date).then(a.unit_id.cmp(&b.unit_id)));

            let developer = bid_developer[&bid.bid_id];
            if planned.is_empty() {
                auction_truth.push(TrueProject {
                    project_id: ProjectId { bid: bid.bid_id, index: 1 },
                    auction_index: spec.auction_index,
                    developer,
                    submitted_bid: bid.price,
                    tariff,
                    built: false,
                    unit_id: None,
                    capacity_kw: bid.capacity_kw,
                    commissioning_date: None,
                    dur_days: None,
                    relocated: false,
                    late: false,
                    reduction: Price::ZERO,
                    positive_premium_months: 0,
                    has_payments: false,
                });
                continue;
            }
            for (idx, u) in planned.into_iter().enumerate() {
                let late = u.date > dline;
                let reduction = tariff_reduction(late, u.relocated);
                registers.units.push(UnitRecord {
                    unit_id: u.unit_id,
                    bid_id: Some(bid.bid_id),
                    capacity_kw: u.capacity_kw,
                    commissioning_date: u.date,
                    postal_code: u.site.0,
                    state: u.site.1,
                    developer_address: bid.developer_address.clone(),
                });
                let mut positive = 0;
                let has_payments = !g.bernoulli(b.missing_payment_probability);
                if has_payments {
                    let first = u.date.year_month().add_months(1);
                    let last = u.date.year_month().add_months(config.payment_months as i32);
                    for month in first.through(last) {
                        let generation = monthly_generation(&mut g, u.capacity_kw, month);
                        let premium = tariff - reduction - mv[&month];
                        let paid = if premium.is_positive() { payment_ct(premium, generation) } else { 0 };
                        if paid > 0 {
                            positive += 1;
                        }
                        registers.payments.push(PaymentRecord {
                            unit_id: u.unit_id,
                            month,
                            tariff_id: MARKET_PREMIUM_TARIFF.into(),
                            generation_kwh: generation as f64,
                            payment_ct: paid as f64,
                        });
                        if g.bernoulli(b.side_payment_probability) {
                            registers.payments.push(PaymentRecord {
                                unit_id: u.unit_id,
                                month,
                                tariff_id: SIDE_PAYMENT_TARIFF.into(),
                                generation_kwh: generation as f64,
                                payment_ct: libm::round(0.05 * generation as f64 * g.uniform()),
                            });
                        }
                    }
                }
                auction_truth.push(TrueProject {
                    project_id: ProjectId { bid: bid.bid_id, index: idx as u32 + 1 },
                    auction_index: spec.auction_index,
                    developer,
                    submitted_bid: bid.price,
                    tariff,
                    built: true,
                    unit_id: Some(u.unit_id),
                    capacity_kw: u.capacity_kw,
                    commissioning_date: Some(u.date),
                    dur_days: Some(u.date.days_since(start)),
                    relocated: u.relocated,
                    late,
                    reduction,
                    positive_premium_months: positive,
                    has_payments,
                });
            }
        }

        auction_truth.sort_by_key(|p| p.project_id);
        let built: Vec<&TrueProject> = auction_truth.iter().filter(|p| p.built).collect();
        let n_built = built.len() as f64;
        let built_capacity_kw: f64 = built.iter().map(|p| p.capacity_kw).sum();
        let share = |f: fn(&TrueProject) -> bool| {
            if built.is_empty() { None } else { Some(built.iter().filter(|p| f(p)).count() as f64 / n_built) }
        };
        truth.auctions.push(TrueAuction {
            auction_index: spec.auction_index,
            awarded_capacity_kw: outcome.awarded_capacity_kw,
            built_capacity_kw,
            rr: if outcome.awarded_capacity_kw > 0.0 { built_capacity_kw / outcome.awarded_capacity_kw } else { 0.0 },
            lchg: share(|p| p.relocated),
            bl: share(|p| p.late),
            marginal: outcome.max_awarded_bid,
        });
        truth.projects.extend(auction_truth);
    }
    truth.projects.sort_by_key(|p| p.project_id);
    Ok(World { registers, truth })
}

impl GroundTruth {
    /// Developers (by index) winning in each auction.
    pub fn winners_by_auction(&self) -> BTreeMap<u32, BTreeSet<u32>> {
        let mut out: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for p in &self.projects {
            out.entry(p.auction_index).or_default().insert(p.developer);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> WorldConfig {
        let mut c = WorldConfig::programme(seed);
        c.auctions.truncate(3);
        c
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_world(&small(42)).unwrap();
        let b = generate_world(&small(42)).unwrap();
        assert_eq!(a, b);
        let c = generate_world(&small(43)).unwrap();
        assert_ne!(a.registers.payments, c.registers.payments);
    }

    #[test]
    fn registers_validate() {
        let w = generate_world(&small(7)).unwrap();
        for row in &w.registers.auction_results {
            row.auction.validate().unwrap();
            row.bid.validate().unwrap();
        }
        for u in &w.registers.units {
            u.validate().unwrap();
        }
        for p in &w.registers.payments {
            p.validate().unwrap();
            if p.tariff_id == MARKET_PREMIUM_TARIFF {
                assert!(p.generation_kwh >= 20_000.0);
            }
        }
        let keys: BTreeSet<_> = w.registers.payments.iter().map(|p| p.key()).collect();
        assert_eq!(keys.len(), w.registers.payments.len());
    }

    #[test]
    fn no_relocation_knob() {
        let mut c = small(3);
        c.behaviour.relocation_probability = 0.0;
        let w = generate_world(&c).unwrap();
        assert!(w.truth.auctions.iter().all(|a| a.lchg == Some(0.0)));
    }

    #[test]
    fn short_horizon_is_an_error() {
        let mut c = small(1);
        c.horizon_end = "2017-06".parse().unwrap();
        assert!(matches!(generate_world(&c), Err(SynthError::HorizonTooShort { auction_index: 1, .. })));
    }

    #[test]
    fn invalid_probability_is_rejected() {
        let mut c = small(1);
        c.behaviour.late_probability = 1.5;
        assert!(matches!(c.validate(), Err(SynthError::InvalidConfig(_))));
    }

    #[test]
    fn uniform_price_pays_marginal() {
        let w = generate_world(&small(11)).unwrap();
        for a in w.truth.auctions.iter().filter(|a| a.auction_index >= 2) {
            let m = a.marginal.unwrap();
            assert!(w.truth.projects.iter().filter(|p| p.auction_index == a.auction_index).all(|p| p.tariff == m));
        }
    }

    #[test]
    fn payment_rounding() {
        assert_eq!(payment_ct(Price::from_units(35_000), 1000), 3500);
        assert_eq!(payment_ct(Price::from_units(5), 1000), 1);
        assert_eq!(payment_ct(Price::from_units(4), 1000), 0);
    }

    #[test]
    fn capacity_splits_preserve_total() {
        let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(5) };
        for _ in 0..200 {
            let total = round_kw(1500.0 + g.uniform() * 8500.0);
            let parts = split_capacity(&mut g, total, 3, 500.0);
            assert_eq!(parts.iter().sum::<f64>(), total);
            assert!(parts.iter().all(|p| *p >= 500.0));
        }
    }
}
