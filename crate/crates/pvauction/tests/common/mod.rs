//! Hand-built register fixtures and a runner for the binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pvauction::register_files::write_register_dir;
use pvauction_core::ids::Programme;
use pvauction_core::registers::{
    AuctionResultRow, AuctionSpec, GermanState, MarketValue, PaymentRecord, PostalCode, PricingRule, PvCostIndex,
    SubmittedBid, UnitRecord,
};
use pvauction_core::synth::{tariff_register, Registers, MARKET_PREMIUM_TARIFF};
use pvauction_core::{BidId, Date, Price, UnitId, YearMonth};
use serde::de::DeserializeOwned;

pub const GENERATION_KWH: f64 = 100_000.0;
pub const MARKET_VALUE: &str = "3.0000";

pub fn date(s: &str) -> Date {
    s.parse().unwrap()
}

pub fn price(s: &str) -> Price {
    s.parse().unwrap()
}

pub fn spec(index: u32, date_str: &str, rule: PricingRule, tendered_kw: f64) -> AuctionSpec {
    let d = date(date_str);
    AuctionSpec {
        auction_index: index,
        date: d,
        tendered_capacity_kw: tendered_kw,
        pricing_rule: rule,
        ceiling_price: price("11.29"),
        first_announcement: d.add_days(14),
    }
}

/// Accumulates register rows for hand-made auctions.
pub struct Fixture {
    pub registers: Registers,
    next_unit: u128,
}

impl Default for Fixture {
    fn default() -> Self {
        Self::new()
    }
}

impl Fixture {
    /// Constant market value and a gently falling cost index over 2015-2022.
    pub fn new() -> Self {
        let first = YearMonth::new(2015, 1).unwrap();
        let months: Vec<YearMonth> = (0..96).map(|k| first.add_months(k)).collect();
        let registers = Registers {
            market_values: months.iter().map(|&m| MarketValue { month: m, value: price(MARKET_VALUE) }).collect(),
            tariffs: tariff_register(),
            pv_index: months
                .iter()
                .enumerate()
                .map(|(k, &m)| PvCostIndex { month: m, index_value: 0.70 - 0.004 * k as f64 })
                .collect(),
            ..Registers::default()
        };
        Fixture { registers, next_unit: 1 }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn bid(
        &mut self,
        spec: &AuctionSpec,
        seq: u32,
        developer: &str,
        kw: f64,
        bid_price: Price,
        postal: u32,
        awarded: bool,
    ) -> BidId {
        let year = (spec.date.year() - 2000) as u8;
        let bid_id = BidId::new(Programme::Ffa, year, spec.auction_index, seq).unwrap();
        self.registers.auction_results.push(AuctionResultRow {
            auction: spec.clone(),
            bid: SubmittedBid {
                bid_id,
                developer_name: format!("{developer} GmbH"),
                developer_address: format!("{developer}strasse 1, 10115 Berlin"),
                capacity_kw: kw,
                price: bid_price,
                postal_code: PostalCode::from_number(postal).unwrap(),
                land_use_docs: false,
            },
            awarded,
        });
        bid_id
    }

    pub fn unit(&mut self, bid: BidId, kw: f64, commissioned: Date, postal: u32, state: GermanState) -> UnitId {
        let unit_id = UnitId::from_serial(self.next_unit);
        self.next_unit += 1;
        let address = self
            .registers
            .auction_results
            .iter()
            .find(|r| r.bid.bid_id == bid)
            .map(|r| r.bid.developer_address.clone())
            .unwrap_or_default();
        self.registers.units.push(UnitRecord {
            unit_id,
            bid_id: Some(bid),
            capacity_kw: kw,
            commissioning_date: commissioned,
            postal_code: PostalCode::from_number(postal).unwrap(),
            state,
            developer_address: address,
        });
        unit_id
    }

    /// Market-premium rows for `months` months after commissioning, paying
    /// `net` per kWh against the constant market value.
    pub fn pay(&mut self, unit: UnitId, net: Price, months: i32) {
        let start = self.registers.units.iter().find(|u| u.unit_id == unit).unwrap().commissioning_date;
        let premium = net - price(MARKET_VALUE);
        let premium = if premium.is_positive() { premium } else { Price::ZERO };
        for k in 1..=months {
            self.registers.payments.push(PaymentRecord {
                unit_id: unit,
                month: start.year_month().add_months(k),
                tariff_id: MARKET_PREMIUM_TARIFF.into(),
                generation_kwh: GENERATION_KWH,
                payment_ct: premium.units() as f64 * GENERATION_KWH / 10_000.0,
            });
        }
    }

    pub fn write(&self, dir: &Path) -> PathBuf {
        write_register_dir(dir, &self.registers).unwrap();
        dir.to_path_buf()
    }
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvauction")).args(args).output().expect("binary runs")
}

/// Runs the binary and panics with its stderr on failure.
pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Vec<T> {
    csv::Reader::from_path(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub type Row = std::collections::HashMap<String, String>;

pub fn rows(path: &Path) -> Vec<Row> {
    read_csv(path)
}

pub fn num(row: &Row, col: &str) -> f64 {
    let v = row.get(col).unwrap_or_else(|| panic!("no column {col}"));
    v.parse().unwrap_or_else(|_| panic!("{col}: {v:?}"))
}

pub fn opt(row: &Row, col: &str) -> Option<f64> {
    row.get(col).filter(|v| !v.is_empty()).map(|v| v.parse().unwrap())
}

pub fn row_for<'a>(rows: &'a [Row], col: &str, value: &str) -> &'a Row {
    rows.iter().find(|r| r.get(col).map(String::as_str) == Some(value)).unwrap_or_else(|| panic!("{col}={value}"))
}

const ON_TIME_DAYS: i64 = 300;

fn commissioning(spec: &AuctionSpec, late: bool) -> Date {
    if late {
        spec.deadline_no_reduction().add_days(20)
    } else {
        spec.first_announcement.add_days(ON_TIME_DAYS)
    }
}

/// First-round counts: 25 awarded bids, 24 of them carrying 36 units in
/// all, one never built. One unit has no payments but a paid sibling; one
/// single-unit bid is only ever paid a zero premium.
pub fn first_round_linkage() -> Fixture {
    let mut f = Fixture::new();
    let s = spec(1, "2015-04-15", PricingRule::PayAsBid, 150_000.0);
    for seq in 1..=30u32 {
        let awarded = seq <= 25;
        let n_units = match seq {
            1..=12 => 2,
            13..=24 => 1,
            _ => 0,
        };
        let kw = 1_000.0 * n_units.max(1) as f64;
        let bid_price = Price::from_hundredths(800 + 2 * seq as i64);
        let bid = f.bid(&s, seq, &format!("Dev{}", seq % 9), kw, bid_price, 10_115 + seq, awarded);
        if !awarded {
            continue;
        }
        for k in 0..n_units {
            let moved = seq <= 6;
            let late = (13..=16).contains(&seq);
            let postal = if moved { 39_104 + seq } else { 10_115 + seq };
            let u = f.unit(bid, 1_000.0, commissioning(&s, late), postal, GermanState::Brandenburg);
            let reduction = pvauction_core::clearing::tariff_reduction(late, moved);
            match (seq, k) {
                (1, 1) => {}
                (24, _) => f.pay(u, price("2.50"), 6),
                _ => f.pay(u, bid_price - reduction, 6),
            }
        }
    }
    f
}

/// One auction of `built` single-unit projects, the first `relocated` of
/// them moved and the last `late` of them late.
pub fn add_penalty_round(f: &mut Fixture, s: &AuctionSpec, built: u32, relocated: u32, late: u32) {
    for i in 0..built {
        let bid = f.bid(s, i + 1, &format!("R{}D{}", s.auction_index, i % 7), 1_000.0, price("7.00"), 80_331, true);
        let moved = i < relocated;
        let is_late = i >= built - late;
        let postal = if moved { 90_402 } else { 80_331 };
        f.unit(bid, 1_000.0, commissioning(s, is_late), postal, GermanState::Bavaria);
    }
}

pub const ROUND_DATES: [&str; 12] = [
    "2015-04-15",
    "2015-08-01",
    "2015-12-01",
    "2016-04-01",
    "2016-08-01",
    "2016-12-01",
    "2017-02-01",
    "2017-06-01",
    "2017-10-01",
    "2018-02-01",
    "2018-06-01",
    "2018-10-01",
];

pub fn round_spec(index: u32) -> AuctionSpec {
    let rule = if matches!(index, 2 | 3) { PricingRule::UniformPrice } else { PricingRule::PayAsBid };
    spec(index, ROUND_DATES[index as usize - 1], rule, 150_000.0)
}

/// Built, relocated and late projects per round: the first-round row as
/// tabulated, relocations per round as tabulated, lateness per round as
/// tabulated up to round 8 and thinned afterwards so the pooled share is
/// the tabulated 114 of 422.
pub const PENALTY_ROWS: [(u32, u32, u32); 12] = [
    (37, 25, 20),
    (41, 28, 16),
    (41, 13, 14),
    (30, 8, 8),
    (27, 13, 8),
    (49, 26, 18),
    (66, 38, 15),
    (42, 17, 8),
    (19, 4, 1),
    (21, 9, 2),
    (23, 7, 1),
    (26, 7, 3),
];

pub fn penalty_rounds(rounds: &[(u32, u32, u32)]) -> Fixture {
    let mut f = Fixture::new();
    for (k, &(built, relocated, late)) in rounds.iter().enumerate() {
        add_penalty_round(&mut f, &round_spec(k as u32 + 1), built, relocated, late);
    }
    f
}

/// Uniform-price round whose marginal awarded bid is 8.49, with relocated
/// and late projects among the winners.
pub fn add_uniform_round(f: &mut Fixture) -> AuctionSpec {
    let s = spec(2, "2015-08-01", PricingRule::UniformPrice, 9_000.0);
    let bids = [
        ("7.80", 2_000.0),
        ("8.10", 3_000.0),
        ("8.30", 2_000.0),
        ("8.49", 3_000.0),
        ("8.60", 2_000.0),
        ("8.90", 1_000.0),
    ];
    let marginal = price("8.49");
    for (k, (b, kw)) in bids.into_iter().enumerate() {
        let seq = k as u32 + 1;
        let awarded = price(b) <= marginal;
        let bid = f.bid(&s, seq, &format!("U{seq}"), kw, price(b), 60_311, awarded);
        if awarded {
            let (moved, late) = (seq % 2 == 0, seq >= 3);
            let postal = if moved { 34_117 } else { 60_311 };
            let u = f.unit(bid, kw, commissioning(&s, late), postal, GermanState::Hesse);
            f.pay(u, marginal - pvauction_core::clearing::tariff_reduction(late, moved), 8);
        }
    }
    s
}

/// Capacity-weighted mean bid of the first-round fixture over projects
/// that end up with a value: every unit except the zero-premium one.
pub fn first_round_weighted_bid() -> f64 {
    let (mut sum, mut kw) = (0.0, 0.0);
    for seq in 1..=23u32 {
        let units = if seq <= 12 { 2.0 } else { 1.0 };
        sum += units * (8.0 + 0.02 * seq as f64);
        kw += units;
    }
    sum / kw
}
