//! CSV layouts of the five registers and the cost index.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::Context;
use pvauction_core::registers::{
    AuctionResultRow, AuctionSpec, GermanState, MarketValue, PaymentRecord, PostalCode, PricingRule, PvCostIndex,
    SubmittedBid, TariffCategory, TariffEntry, UnitRecord,
};
use pvauction_core::synth::{tso_for_state, Registers, Tso};
use pvauction_core::{BidId, Date, Price, UnitId, YearMonth};
use serde::{Deserialize, Serialize};

use crate::csv_io::{read_rows, write_rows, write_rows_with_header, LoadError, Loaded};
use crate::state_map::StateMap;

pub const AUCTION_RESULTS: &str = "auction_results.csv";
pub const UNIT_REGISTER: &str = "unit_register.csv";
pub const PAYMENTS: &str = "payments.csv";
pub const MARKET_VALUES: &str = "market_values.csv";
pub const TARIFFS: &str = "tariffs.csv";
pub const PV_COST_INDEX: &str = "pv_cost_index.csv";

#[derive(Debug, Serialize, Deserialize)]
pub struct AuctionResultCsv {
    pub auction_index: u32,
    pub date: Date,
    pub tendered_kw: f64,
    pub pricing_rule: PricingRule,
    pub ceiling: Price,
    pub first_announcement: Date,
    pub bid_id: BidId,
    pub developer_name: String,
    pub developer_address: String,
    pub capacity_kw: f64,
    pub price_ct_kwh: Price,
    pub postal_code: PostalCode,
    pub land_use_docs: bool,
    /// Optional for bid files fed to the clearing engine.
    #[serde(default)]
    pub awarded: Option<bool>,
}

const AUCTION_COLUMNS: [&str; 13] = [
    "auction_index",
    "date",
    "tendered_kw",
    "pricing_rule",
    "ceiling",
    "first_announcement",
    "bid_id",
    "developer_name",
    "developer_address",
    "capacity_kw",
    "price_ct_kwh",
    "postal_code",
    "land_use_docs",
];

impl From<&AuctionResultRow> for AuctionResultCsv {
    fn from(r: &AuctionResultRow) -> Self {
        let a = &r.auction;
        let b = &r.bid;
        AuctionResultCsv {
            auction_index: a.auction_index,
            date: a.date,
            tendered_kw: a.tendered_capacity_kw,
            pricing_rule: a.pricing_rule,
            ceiling: a.ceiling_price,
            first_announcement: a.first_announcement,
            bid_id: b.bid_id,
            developer_name: b.developer_name.clone(),
            developer_address: b.developer_address.clone(),
            capacity_kw: b.capacity_kw,
            price_ct_kwh: b.price,
            postal_code: b.postal_code,
            land_use_docs: b.land_use_docs,
            awarded: Some(r.awarded),
        }
    }
}

fn split_auction_row(r: AuctionResultCsv) -> Result<(AuctionSpec, SubmittedBid, Option<bool>), (String, String)> {
    let spec = AuctionSpec {
        auction_index: r.auction_index,
        date: r.date,
        tendered_capacity_kw: r.tendered_kw,
        pricing_rule: r.pricing_rule,
        ceiling_price: r.ceiling,
        first_announcement: r.first_announcement,
    };
    let bid = SubmittedBid {
        bid_id: r.bid_id,
        developer_name: r.developer_name,
        developer_address: r.developer_address,
        capacity_kw: r.capacity_kw,
        price: r.price_ct_kwh,
        postal_code: r.postal_code,
        land_use_docs: r.land_use_docs,
    };
    spec.validate().map_err(invariant)?;
    bid.validate().map_err(invariant)?;
    Ok((spec, bid, r.awarded))
}

fn invariant(e: pvauction_core::registers::InvariantError) -> (String, String) {
    (e.field.to_string(), e.reason.to_string())
}

pub fn load_auction_results(path: &Path) -> Result<Loaded<AuctionResultRow>, LoadError> {
    let mut columns = AUCTION_COLUMNS.to_vec();
    columns.push("awarded");
    read_rows(path, &columns, |r: AuctionResultCsv, _| {
        let (auction, bid, awarded) = split_auction_row(r)?;
        let awarded = awarded.ok_or(("awarded".to_string(), "missing value".to_string()))?;
        Ok(AuctionResultRow { auction, bid, awarded })
    })
}

/// Bids for the clearing engine: the auction-results layout, `awarded`
/// optional and ignored.
pub fn load_bids(path: &Path) -> Result<Loaded<(AuctionSpec, SubmittedBid)>, LoadError> {
    read_rows(path, &AUCTION_COLUMNS, |r: AuctionResultCsv, _| {
        let (spec, bid, _) = split_auction_row(r)?;
        Ok((spec, bid))
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UnitCsv {
    pub unit_id: UnitId,
    pub bid_id: Option<BidId>,
    pub capacity_kw: f64,
    pub commissioning_date: Date,
    pub postal_code: PostalCode,
    pub state: Option<GermanState>,
    pub developer_address: String,
}

pub fn load_units(path: &Path, state_map: Option<&StateMap>) -> Result<Loaded<UnitRecord>, LoadError> {
    let columns =
        ["unit_id", "bid_id", "capacity_kw", "commissioning_date", "postal_code", "state", "developer_address"];
    read_rows(path, &columns, |r: UnitCsv, _| {
        let state = match r.state.or_else(|| state_map.and_then(|m| m.lookup(&r.postal_code))) {
            Some(s) => s,
            None => return Err(("state".into(), "empty and not resolvable from the state map".into())),
        };
        let unit = UnitRecord {
            unit_id: r.unit_id,
            bid_id: r.bid_id,
            capacity_kw: r.capacity_kw,
            commissioning_date: r.commissioning_date,
            postal_code: r.postal_code,
            state,
            developer_address: r.developer_address,
        };
        unit.validate().map_err(invariant)?;
        Ok(unit)
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PaymentCsv {
    pub unit_id: UnitId,
    pub month: YearMonth,
    pub tariff_id: String,
    pub generation_kwh: f64,
    /// ct
    pub payment: f64,
}

/// Loads and concatenates payment files; a (unit, month, tariff) key seen
/// earlier, in the same or a previous file, rejects the later row.
pub fn load_payments(paths: &[PathBuf]) -> Result<Loaded<PaymentRecord>, LoadError> {
    let mut seen: HashMap<(UnitId, YearMonth, String), (PathBuf, u64)> = HashMap::new();
    let mut all = Loaded { rows: Vec::new(), rejected: Vec::new() };
    let columns = ["unit_id", "month", "tariff_id", "generation_kwh", "payment"];
    for path in paths {
        let loaded = read_rows(path, &columns, |r: PaymentCsv, line| {
            let row = PaymentRecord {
                unit_id: r.unit_id,
                month: r.month,
                tariff_id: r.tariff_id,
                generation_kwh: r.generation_kwh,
                payment_ct: r.payment,
            };
            row.validate().map_err(invariant)?;
            let key = (row.unit_id, row.month, row.tariff_id.clone());
            if let Some((first, first_line)) = seen.get(&key) {
                return Err((
                    "unit_id,month,tariff_id".into(),
                    format!("duplicate key, first seen at {}:{}", first.display(), first_line),
                ));
            }
            seen.insert(key, (path.clone(), line));
            Ok(row)
        })?;
        all.rows.extend(loaded.rows);
        all.rejected.extend(loaded.rejected);
    }
    Ok(all)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MarketValueCsv {
    pub month: YearMonth,
    pub value: Price,
}

pub fn load_market_values(path: &Path) -> Result<Loaded<MarketValue>, LoadError> {
    let mut seen = BTreeMap::new();
    read_rows(path, &["month", "value"], |r: MarketValueCsv, _| {
        if seen.insert(r.month, ()).is_some() {
            return Err(("month".into(), format!("duplicate month {}", r.month)));
        }
        Ok(MarketValue { month: r.month, value: r.value })
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TariffCsv {
    pub tariff_id: String,
    pub description: String,
    pub category: TariffCategory,
}

pub fn load_tariffs(path: &Path) -> Result<Loaded<TariffEntry>, LoadError> {
    let mut seen = BTreeMap::new();
    read_rows(path, &["tariff_id", "description", "category"], |r: TariffCsv, _| {
        if r.tariff_id.is_empty() {
            return Err(("tariff_id".into(), "empty".into()));
        }
        if seen.insert(r.tariff_id.clone(), ()).is_some() {
            return Err(("tariff_id".into(), format!("duplicate tariff id {}", r.tariff_id)));
        }
        Ok(TariffEntry { tariff_id: r.tariff_id, description: r.description, category: r.category })
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PvIndexCsv {
    pub month: YearMonth,
    pub index_value: f64,
}

pub fn load_pv_index(path: &Path) -> Result<Loaded<PvCostIndex>, LoadError> {
    let mut seen = BTreeMap::new();
    read_rows(path, &["month", "index_value"], |r: PvIndexCsv, _| {
        if seen.insert(r.month, ()).is_some() {
            return Err(("month".into(), format!("duplicate month {}", r.month)));
        }
        if !r.index_value.is_finite() {
            return Err(("index_value".into(), "must be finite".into()));
        }
        Ok(PvCostIndex { month: r.month, index_value: r.index_value })
    })
}

/// Payment files in a register directory: `payments.csv` and any
/// `payments_*.csv`, in name order.
pub fn payment_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if name == PAYMENTS || (name.starts_with("payments_") && name.ends_with(".csv")) {
            files.push(dir.join(name));
        }
    }
    files.sort();
    Ok(files)
}

/// Every register of a directory, plus the files that were read.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegisterSet {
    pub registers: Registers,
    pub files: Vec<PathBuf>,
}

/// Loads a register directory. The cost index is optional; any rejected
/// row anywhere fails the load with all diagnostics.
pub fn load_register_dir(dir: &Path, state_map: Option<&StateMap>) -> anyhow::Result<RegisterSet> {
    let mut rejected = Vec::new();
    let mut files = Vec::new();
    let mut take = |path: PathBuf| {
        files.push(path.clone());
        path
    };
    let auction_results = load_auction_results(&take(dir.join(AUCTION_RESULTS)))?;
    let units = load_units(&take(dir.join(UNIT_REGISTER)), state_map)?;
    let payment_paths: Vec<PathBuf> = payment_files(dir)?.into_iter().map(&mut take).collect();
    let payments = load_payments(&payment_paths)?;
    let market_values = load_market_values(&take(dir.join(MARKET_VALUES)))?;
    let tariffs = load_tariffs(&take(dir.join(TARIFFS)))?;
    let pv_path = dir.join(PV_COST_INDEX);
    let pv_index = if pv_path.exists() { load_pv_index(&take(pv_path))? } else { Loaded { rows: vec![], rejected: vec![] } };

    rejected.extend(auction_results.rejected);
    rejected.extend(units.rejected);
    rejected.extend(payments.rejected);
    rejected.extend(market_values.rejected);
    rejected.extend(tariffs.rejected);
    rejected.extend(pv_index.rejected);
    if !rejected.is_empty() {
        let shown: Vec<String> = rejected.iter().take(20).map(|r| r.to_string()).collect();
        anyhow::bail!("{} rejected row(s):\n{}", rejected.len(), shown.join("\n"));
    }
    Ok(RegisterSet {
        registers: Registers {
            auction_results: auction_results.rows,
            units: units.rows,
            payments: payments.rows,
            market_values: market_values.rows,
            tariffs: tariffs.rows,
            pv_index: pv_index.rows,
        },
        files,
    })
}

/// Writes a register directory, splitting payments into one file per
/// transmission system operator. Returns the files written.
pub fn write_register_dir(dir: &Path, r: &Registers) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join(AUCTION_RESULTS);
    write_rows(&path, r.auction_results.iter().map(AuctionResultCsv::from))?;
    written.push(path);

    let path = dir.join(UNIT_REGISTER);
    write_rows(
        &path,
        r.units.iter().map(|u| UnitCsv {
            unit_id: u.unit_id,
            bid_id: u.bid_id,
            capacity_kw: u.capacity_kw,
            commissioning_date: u.commissioning_date,
            postal_code: u.postal_code,
            state: Some(u.state),
            developer_address: u.developer_address.clone(),
        }),
    )?;
    written.push(path);

    let tso: HashMap<UnitId, Tso> = r.units.iter().map(|u| (u.unit_id, tso_for_state(u.state))).collect();
    for operator in Tso::ALL {
        let path = dir.join(format!("payments_{}.csv", operator.as_str()));
        let rows = r.payments.iter().filter(|p| tso.get(&p.unit_id).copied().unwrap_or(Tso::Tennet) == operator).map(|p| {
            PaymentCsv {
                unit_id: p.unit_id,
                month: p.month,
                tariff_id: p.tariff_id.clone(),
                generation_kwh: p.generation_kwh,
                payment: p.payment_ct,
            }
        });
        write_rows_with_header(&path, &["unit_id", "month", "tariff_id", "generation_kwh", "payment"], rows)?;
        written.push(path);
    }

    let path = dir.join(MARKET_VALUES);
    write_rows(&path, r.market_values.iter().map(|m| MarketValueCsv { month: m.month, value: m.value }))?;
    written.push(path);
    let path = dir.join(TARIFFS);
    write_rows(
        &path,
        r.tariffs.iter().map(|t| TariffCsv {
            tariff_id: t.tariff_id.clone(),
            description: t.description.clone(),
            category: t.category,
        }),
    )?;
    written.push(path);
    let path = dir.join(PV_COST_INDEX);
    write_rows(&path, r.pv_index.iter().map(|p| PvIndexCsv { month: p.month, index_value: p.index_value }))?;
    written.push(path);
    Ok(written)
}
