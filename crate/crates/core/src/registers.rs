//! Row types for the five public data sources: auction results, the unit
//! register, TSO payment data, monthly market values and the tariff
//! register, plus the PV module cost index used as a cost proxy.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::calendar::{Date, YearMonth};
use crate::ids::{BidId, UnitId};
use crate::price::Price;

/// Smallest admissible bid in kW.
pub const MIN_BID_KW: f64 = 750.0;
/// Largest admissible bid in kW.
pub const MAX_BID_KW: f64 = 10_000.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl InvariantError {
    pub const fn new(field: &'static str, reason: &'static str) -> Self {
        InvariantError { field, reason }
    }
}

impl fmt::Display for InvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl core::error::Error for InvariantError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PricingRule {
    PayAsBid,
    UniformPrice,
}

impl PricingRule {
    pub fn as_str(self) -> &'static str {
        match self {
            PricingRule::PayAsBid => "pay_as_bid",
            PricingRule::UniformPrice => "uniform_price",
        }
    }
}

impl FromStr for PricingRule {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "pay_as_bid" | "payasbid" => Ok(PricingRule::PayAsBid),
            "uniform_price" | "uniformprice" | "uniform" => Ok(PricingRule::UniformPrice),
            _ => Err(InvariantError::new("pricing_rule", "expected pay_as_bid or uniform_price")),
        }
    }
}

impl fmt::Display for PricingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GermanState {
    BadenWuerttemberg,
    Bavaria,
    Berlin,
    Brandenburg,
    Bremen,
    Hamburg,
    Hesse,
    LowerSaxony,
    MecklenburgWesternPomerania,
    NorthRhineWestphalia,
    RhinelandPalatinate,
    Saarland,
    Saxony,
    SaxonyAnhalt,
    SchleswigHolstein,
    Thuringia,
}

impl GermanState {
    pub const ALL: [GermanState; 16] = [
        GermanState::BadenWuerttemberg,
        GermanState::Bavaria,
        GermanState::Berlin,
        GermanState::Brandenburg,
        GermanState::Bremen,
        GermanState::Hamburg,
        GermanState::Hesse,
        GermanState::LowerSaxony,
        GermanState::MecklenburgWesternPomerania,
        GermanState::NorthRhineWestphalia,
        GermanState::RhinelandPalatinate,
        GermanState::Saarland,
        GermanState::Saxony,
        GermanState::SaxonyAnhalt,
        GermanState::SchleswigHolstein,
        GermanState::Thuringia,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GermanState::BadenWuerttemberg => "Baden-Wuerttemberg",
            GermanState::Bavaria => "Bavaria",
            GermanState::Berlin => "Berlin",
            GermanState::Brandenburg => "Brandenburg",
            GermanState::Bremen => "Bremen",
            GermanState::Hamburg => "Hamburg",
            GermanState::Hesse => "Hesse",
            GermanState::LowerSaxony => "Lower Saxony",
            GermanState::MecklenburgWesternPomerania => "Mecklenburg-Western Pomerania",
            GermanState::NorthRhineWestphalia => "North-Rhine Westphalia",
            GermanState::RhinelandPalatinate => "Rhineland-Palatinate",
            GermanState::Saarland => "Saarland",
            GermanState::Saxony => "Saxony",
            GermanState::SaxonyAnhalt => "Saxony-Anhalt",
            GermanState::SchleswigHolstein => "Schleswig-Holstein",
            GermanState::Thuringia => "Thuringia",
        }
    }

    fn german_name(self) -> &'static str {
        match self {
            GermanState::BadenWuerttemberg => "Baden-Württemberg",
            GermanState::Bavaria => "Bayern",
            GermanState::Berlin => "Berlin",
            GermanState::Brandenburg => "Brandenburg",
            GermanState::Bremen => "Bremen",
            GermanState::Hamburg => "Hamburg",
            GermanState::Hesse => "Hessen",
            GermanState::LowerSaxony => "Niedersachsen",
            GermanState::MecklenburgWesternPomerania => "Mecklenburg-Vorpommern",
            GermanState::NorthRhineWestphalia => "Nordrhein-Westfalen",
            GermanState::RhinelandPalatinate => "Rheinland-Pfalz",
            GermanState::Saarland => "Saarland",
            GermanState::Saxony => "Sachsen",
            GermanState::SaxonyAnhalt => "Sachsen-Anhalt",
            GermanState::SchleswigHolstein => "Schleswig-Holstein",
            GermanState::Thuringia => "Thüringen",
        }
    }

    /// Southern partition used for the north/south comparison. Berlin,
    /// Bremen and Hamburg belong to neither list and count as not southern.
    pub fn is_southern(self) -> bool {
        matches!(
            self,
            GermanState::BadenWuerttemberg
                | GermanState::Bavaria
                | GermanState::Hesse
                | GermanState::RhinelandPalatinate
                | GermanState::Thuringia
                | GermanState::Saarland
                | GermanState::Saxony
        )
    }

    pub fn is_northern(self) -> bool {
        matches!(
            self,
            GermanState::MecklenburgWesternPomerania
                | GermanState::SaxonyAnhalt
                | GermanState::SchleswigHolstein
                | GermanState::Brandenburg
                | GermanState::NorthRhineWestphalia
                | GermanState::LowerSaxony
        )
    }
}

fn state_key(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'ü' | 'Ü' => out.push_str("ue"),
            'ä' | 'Ä' => out.push_str("ae"),
            'ö' | 'Ö' => out.push_str("oe"),
            c if c.is_ascii_alphanumeric() => out.push(c.to_ascii_lowercase()),
            _ => {}
        }
    }
    out
}

impl FromStr for GermanState {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = state_key(s);
        GermanState::ALL
            .into_iter()
            .find(|st| state_key(st.name()) == key || state_key(st.german_name()) == key)
            .ok_or(InvariantError::new("state", "unknown German state"))
    }
}

impl fmt::Display for GermanState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Five-digit German postal code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PostalCode([u8; 5]);

impl PostalCode {
    pub fn as_str(&self) -> &str {
        core::str::from_utf8(&self.0).unwrap_or("")
    }

    pub fn from_number(n: u32) -> Option<Self> {
        if n > 99_999 {
            return None;
        }
        let mut digits = [b'0'; 5];
        let mut v = n;
        for slot in digits.iter_mut().rev() {
            *slot = b'0' + (v % 10) as u8;
            v /= 10;
        }
        Some(PostalCode(digits))
    }
}

impl FromStr for PostalCode {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.trim().as_bytes();
        if b.len() != 5 || !b.iter().all(u8::is_ascii_digit) {
            return Err(InvariantError::new("postal_code", "expected 5 digits"));
        }
        let mut digits = [0u8; 5];
        digits.copy_from_slice(b);
        Ok(PostalCode(digits))
    }
}

impl fmt::Display for PostalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One auction round as announced and published.
#[derive(Clone, Debug, PartialEq)]
pub struct AuctionSpec {
    pub auction_index: u32,
    pub date: Date,
    pub tendered_capacity_kw: f64,
    pub pricing_rule: PricingRule,
    pub ceiling_price: Price,
    /// First public announcement of the winners; project durations count
    /// from this date.
    pub first_announcement: Date,
}

impl AuctionSpec {
    pub fn validate(&self) -> Result<(), InvariantError> {
        if self.auction_index == 0 {
            return Err(InvariantError::new("auction_index", "must be positive"));
        }
        if !(self.tendered_capacity_kw > 0.0) || !self.tendered_capacity_kw.is_finite() {
            return Err(InvariantError::new("tendered_kw", "must be positive"));
        }
        if !self.ceiling_price.is_positive() {
            return Err(InvariantError::new("ceiling", "must be positive"));
        }
        if self.first_announcement < self.date {
            return Err(InvariantError::new("first_announcement", "precedes the auction date"));
        }
        Ok(())
    }

    /// The final announcement follows the first by one week; both
    /// construction deadlines count from it.
    pub fn final_announcement(&self) -> Date {
        self.first_announcement.add_days(7)
    }

    /// Last commissioning date without a tariff reduction.
    pub fn deadline_no_reduction(&self) -> Date {
        self.final_announcement().add_months(18)
    }

    /// The award expires for capacity not commissioned by this date.
    pub fn deadline_expiry(&self) -> Date {
        self.final_announcement().add_months(24)
    }

    /// Auction label as used in reports (`AU7`).
    pub fn label(&self) -> AuctionLabel {
        AuctionLabel(self.auction_index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AuctionLabel(pub u32);

impl fmt::Display for AuctionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AU{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmittedBid {
    pub bid_id: BidId,
    pub developer_name: String,
    pub developer_address: String,
    pub capacity_kw: f64,
    pub price: Price,
    /// Planned construction site.
    pub postal_code: PostalCode,
    pub land_use_docs: bool,
}

impl SubmittedBid {
    pub fn validate(&self) -> Result<(), InvariantError> {
        if !(MIN_BID_KW..=MAX_BID_KW).contains(&self.capacity_kw) {
            return Err(InvariantError::new("capacity_kw", "bid size outside 750-10000 kW"));
        }
        if !self.price.is_positive() {
            return Err(InvariantError::new("price_ct_kwh", "must be positive"));
        }
        Ok(())
    }
}

/// One row of the published auction results: the auction, one bid, and
/// whether it was awarded.
#[derive(Clone, Debug, PartialEq)]
pub struct AuctionResultRow {
    pub auction: AuctionSpec,
    pub bid: SubmittedBid,
    pub awarded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitRecord {
    pub unit_id: UnitId,
    pub bid_id: Option<BidId>,
    pub capacity_kw: f64,
    pub commissioning_date: Date,
    pub postal_code: PostalCode,
    pub state: GermanState,
    pub developer_address: String,
}

impl UnitRecord {
    pub fn validate(&self) -> Result<(), InvariantError> {
        if !(self.capacity_kw > 0.0) || !self.capacity_kw.is_finite() {
            return Err(InvariantError::new("capacity_kw", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaymentRecord {
    pub unit_id: UnitId,
    pub month: YearMonth,
    pub tariff_id: String,
    pub generation_kwh: f64,
    /// Gross payment in ct.
    pub payment_ct: f64,
}

impl PaymentRecord {
    pub fn validate(&self) -> Result<(), InvariantError> {
        if !(self.generation_kwh >= 0.0) || !self.generation_kwh.is_finite() {
            return Err(InvariantError::new("generation_kwh", "must be a non-negative number"));
        }
        if !self.payment_ct.is_finite() {
            return Err(InvariantError::new("payment_ct", "must be finite"));
        }
        if self.tariff_id.trim().is_empty() {
            return Err(InvariantError::new("tariff_id", "must not be empty"));
        }
        Ok(())
    }

    pub fn key(&self) -> (UnitId, YearMonth, &str) {
        (self.unit_id, self.month, self.tariff_id.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TariffCategory {
    MarketPremium,
    SidePayment,
}

impl TariffCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            TariffCategory::MarketPremium => "market_premium",
            TariffCategory::SidePayment => "side_payment",
        }
    }
}

impl FromStr for TariffCategory {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "market_premium" | "marketpremium" => Ok(TariffCategory::MarketPremium),
            "side_payment" | "sidepayment" => Ok(TariffCategory::SidePayment),
            _ => Err(InvariantError::new("category", "expected market_premium or side_payment")),
        }
    }
}

impl fmt::Display for TariffCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TariffEntry {
    pub tariff_id: String,
    pub description: String,
    pub category: TariffCategory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarketValue {
    pub month: YearMonth,
    /// Monthly market value of solar generation in ct/kWh.
    pub value: Price,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvCostIndex {
    pub month: YearMonth,
    pub index_value: f64,
}

/// All bids of one auction together with the auction's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AuctionData {
    pub spec: AuctionSpec,
    pub bids: Vec<SubmittedBid>,
    pub awarded: Vec<bool>,
}

impl AuctionData {
    pub fn awarded_bids(&self) -> impl Iterator<Item = &SubmittedBid> {
        self.bids.iter().zip(&self.awarded).filter(|(_, a)| **a).map(|(b, _)| b)
    }
}

/// Groups result rows by auction, checking that every row of an auction
/// repeats identical auction parameters.
pub fn group_auctions(rows: &[AuctionResultRow]) -> Result<BTreeMap<u32, AuctionData>, InvariantError> {
    let mut out: BTreeMap<u32, AuctionData> = BTreeMap::new();
    for row in rows {
        let entry = out.entry(row.auction.auction_index).or_insert_with(|| AuctionData {
            spec: row.auction.clone(),
            bids: Vec::new(),
            awarded: Vec::new(),
        });
        if entry.spec != row.auction {
            return Err(InvariantError::new("auction_index", "rows of one auction disagree on auction parameters"));
        }
        entry.bids.push(row.bid.clone());
        entry.awarded.push(row.awarded);
    }
    Ok(out)
}

/// Month-indexed lookup built from market value rows.
pub fn market_value_table(rows: &[MarketValue]) -> BTreeMap<YearMonth, Price> {
    rows.iter().map(|r| (r.month, r.value)).collect()
}
