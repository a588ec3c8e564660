//! One function per subcommand. Each reads its inputs, writes its
//! outputs under the output directory and finishes with a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _};
use pvauction_core::clearing::clear_auction;
use pvauction_core::linkage::{run_linkage, LinkageInputs};
use pvauction_core::oracle::oracle_diff;
use pvauction_core::pipeline::{analyse_linked, run_pipeline};
use pvauction_core::registers::{AuctionSpec, SubmittedBid};
use pvauction_core::stats::hypothesis_suite;
use pvauction_core::synth::{generate_world, WorldConfig};
use pvauction_core::validation::validate_against_published;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::csv_io::Loaded;
use crate::manifest::RunManifest;
use crate::outputs::{self, AnalysisFiles};
use crate::register_files::{self, load_bids, load_register_dir, write_register_dir, AUCTION_RESULTS, PV_COST_INDEX};
use crate::state_map::StateMap;

pub const DEFAULT_SEED: u64 = 42;

/// Global options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub small_threshold_kw: Option<f64>,
    pub state_map: Option<PathBuf>,
}

impl Context {
    pub fn new(
        config_path: Option<PathBuf>,
        out: PathBuf,
        seed: Option<u64>,
        small_threshold_kw: Option<f64>,
        state_map: Option<PathBuf>,
    ) -> anyhow::Result<Self> {
        let config = RunConfig::load(config_path.as_deref())?;
        Ok(Context { config, config_path, out, seed, small_threshold_kw, state_map })
    }

    fn manifest(&self, command: &str, seed: Option<u64>) -> anyhow::Result<RunManifest> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let mut m = RunManifest::new(command, self.config_path.as_deref(), seed, &self.out);
        m.add_inputs(self.config_path.iter())?;
        m.add_inputs(self.state_map.iter())?;
        Ok(m)
    }

    fn load_state_map(&self) -> anyhow::Result<Option<StateMap>> {
        self.state_map.as_deref().map(StateMap::load).transpose().map_err(Into::into)
    }

    fn analysis(&self) -> crate::config::AnalysisSettings {
        let mut a = self.config.analysis.clone();
        if let Some(kw) = self.small_threshold_kw {
            a.small_threshold_kw = kw;
        }
        a
    }
}

fn rejected_rows<T>(loaded: Loaded<T>) -> anyhow::Result<Vec<T>> {
    if loaded.rejected.is_empty() {
        return Ok(loaded.rows);
    }
    let shown: Vec<String> = loaded.rejected.iter().take(20).map(|r| r.to_string()).collect();
    bail!("{} rejected row(s):\n{}", loaded.rejected.len(), shown.join("\n"))
}

/// Clears every auction of a bid file.
pub fn simulate(ctx: &Context, bids: &Path) -> anyhow::Result<RunManifest> {
    let mut manifest = ctx.manifest("simulate", None)?;
    manifest.add_inputs([&bids.to_path_buf()])?;
    let rows = rejected_rows(load_bids(bids)?)?;

    let mut auctions: BTreeMap<u32, (AuctionSpec, Vec<SubmittedBid>)> = BTreeMap::new();
    for (spec, bid) in rows {
        let entry = auctions.entry(spec.auction_index).or_insert_with(|| (spec.clone(), Vec::new()));
        if entry.0 != spec {
            bail!("{}: rows of AU{} disagree on auction parameters", bids.display(), spec.auction_index);
        }
        entry.1.push(bid);
    }
    let clearing = ctx.config.simulate.clearing();
    let mut cleared = Vec::new();
    for (spec, bids) in auctions.into_values() {
        let result = clear_auction(&spec, &bids, &clearing).map_err(|e| anyhow::anyhow!("AU{}: {e}", spec.auction_index))?;
        let listed = bids.iter().map(|b| (b.bid_id, b.capacity_kw, b.price)).collect();
        cleared.push((spec, listed, result.outcome, result.rejected));
    }
    let written = outputs::write_awards(&ctx.out, &cleared)?;
    eprintln!("cleared {} auction(s)", cleared.len());
    manifest.finish(&written)
}

/// Generates a synthetic world and writes its registers and ground truth.
pub fn synth(ctx: &Context) -> anyhow::Result<RunManifest> {
    let mut world_config = match &ctx.config.world {
        Some(w) => w.clone(),
        None => WorldConfig::programme(DEFAULT_SEED),
    };
    if let Some(seed) = ctx.seed {
        world_config.seed = seed;
    }
    let manifest = ctx.manifest("synth", Some(world_config.seed))?;
    let world = generate_world(&world_config)?;
    let mut written = write_register_dir(&ctx.out, &world.registers)?;
    written.extend(outputs::write_ground_truth(&ctx.out, &world.truth)?);
    eprintln!(
        "synthesised {} auctions, {} projects, {} payment rows",
        world.truth.auctions.len(),
        world.truth.projects.len(),
        world.registers.payments.len()
    );
    manifest.finish(&written)
}

/// Runs the linkage on a register directory; with a ground-truth
/// directory, also writes the oracle diff.
pub fn link(ctx: &Context, input: &Path, ground_truth: Option<&Path>) -> anyhow::Result<RunManifest> {
    let mut manifest = ctx.manifest("link", None)?;
    let state_map = ctx.load_state_map()?;
    let set = load_register_dir(input, state_map.as_ref())?;
    manifest.add_inputs(set.files.iter())?;
    let r = &set.registers;
    let inputs = LinkageInputs {
        auction_results: &r.auction_results,
        units: &r.units,
        payments: &r.payments,
        market_values: &r.market_values,
        tariffs: &r.tariffs,
    };
    let linkage_config = ctx.config.link.linkage();
    let mut written;
    match ground_truth {
        None => {
            let out = run_linkage(&inputs, &linkage_config)?;
            written = outputs::write_linkage(&ctx.out, &out)?;
            report_linkage(&out);
        }
        Some(dir) => {
            let (truth, files) = outputs::read_ground_truth(dir)?;
            manifest.add_inputs(files.iter())?;
            let run = run_pipeline(&inputs, &r.pv_index, &linkage_config, &ctx.analysis().metrics())?;
            written = outputs::write_linkage(&ctx.out, &run.linkage)?;
            report_linkage(&run.linkage);
            let diff = oracle_diff(&truth, &run.linkage, &run.outcomes, &run.auctions)?;
            let path = ctx.out.join(outputs::ORACLE_DIFF);
            outputs::write_oracle_diff(&path, &diff)?;
            written.push(path);
            eprintln!(
                "oracle: {} difference(s); {}/{} positive-premium bid values reconstructed",
                diff.entries.len(),
                diff.matched_bid_values,
                diff.checked_bid_values
            );
        }
    }
    manifest.finish(&written)
}

fn report_linkage(out: &pvauction_core::linkage::LinkageOutput) {
    let with_value = out.estimates.iter().filter(|e| e.consolidated_full.is_some()).count();
    eprintln!(
        "linked {} projects ({} with a bid value), {} developers, {} warning(s)",
        out.projects.len(),
        with_value,
        out.developers.len(),
        out.warnings.len()
    );
}

/// Derived metrics, aggregates, hypothesis tests and plot series.
pub fn analyze(ctx: &Context, registers: &Path, linkage: &Path) -> anyhow::Result<RunManifest> {
    let mut manifest = ctx.manifest("analyze", None)?;
    let results_path = registers.join(AUCTION_RESULTS);
    let results = rejected_rows(register_files::load_auction_results(&results_path)?)?;
    let pv_path = registers.join(PV_COST_INDEX);
    let pv_index = if pv_path.exists() { rejected_rows(register_files::load_pv_index(&pv_path)?)? } else { Vec::new() };
    manifest.add_inputs([&results_path])?;
    if pv_path.exists() {
        manifest.add_inputs([&pv_path])?;
    }
    let linked = outputs::read_linkage(linkage)?;
    manifest.add_inputs(linked.files.iter())?;

    let settings = ctx.analysis();
    let analysis = analyse_linked(
        &results,
        &pv_index,
        &linked.projects,
        &linked.developers,
        &linked.estimates,
        &settings.metrics(),
    )?;
    let suite = hypothesis_suite(&analysis.outcomes, &analysis.auctions, &settings.suite());
    let files = AnalysisFiles {
        specs: &analysis.specs,
        awards: &analysis.awards,
        outcomes: &analysis.outcomes,
        auctions: &analysis.auctions,
        ranges: &settings.ranges,
        suite: &suite,
    };
    let written = outputs::write_analysis(&ctx.out, &files)?;
    let untestable =
        suite.entries.iter().filter(|e| matches!(e.status, pvauction_core::stats::EntryStatus::Untestable(_))).count();
    eprintln!(
        "analysed {} projects in {} auctions; {} hypothesis entries ({} untestable)",
        analysis.outcomes.len(),
        analysis.auctions.len(),
        suite.entries.len(),
        untestable
    );
    manifest.finish(&written)
}

/// Reconstructed against published weighted-average awards.
pub fn validate(ctx: &Context, linkage: &Path, published: &Path, bound: Option<f64>) -> anyhow::Result<RunManifest> {
    let mut manifest = ctx.manifest("validate", None)?;
    let linked = outputs::read_linkage(linkage)?;
    let published_avgs = outputs::read_published(published)?;
    manifest.add_inputs(linked.files.iter())?;
    manifest.add_inputs([&published.to_path_buf()])?;
    let bound = bound.unwrap_or(ctx.config.validate.bound);
    let report = validate_against_published(&linked.projects, &linked.estimates, &published_avgs, bound);
    let path = ctx.out.join(outputs::VALIDATION);
    outputs::write_validation(&path, &report)?;
    eprintln!("validated {} auction(s); {} flagged", report.rows.len(), report.flagged().count());
    manifest.finish(&[path])
}

const REPORTED: [&str; 8] = [
    outputs::PIPELINE_COUNTS,
    outputs::AUCTION_METRICS,
    outputs::AGGREGATES,
    outputs::HYPOTHESES,
    outputs::REGRESSION,
    outputs::VALIDATION,
    outputs::ORACLE_DIFF,
    outputs::WARNINGS,
];

fn cell(s: &str) -> Value {
    if s.is_empty() {
        Value::Null
    } else if let Ok(b) = s.parse::<bool>() {
        Value::Bool(b)
    } else if let Ok(i) = s.parse::<i64>() {
        Value::from(i)
    } else if let Some(f) = s.parse::<f64>().ok().filter(|f| f.is_finite()) {
        Value::from(f)
    } else {
        Value::String(s.into())
    }
}

/// Collects the tabular outputs found in `inputs` into one `summary.json`.
pub fn report(ctx: &Context, inputs: &[PathBuf]) -> anyhow::Result<RunManifest> {
    let mut manifest = ctx.manifest("report", None)?;
    let mut tables = Map::new();
    let mut read = Vec::new();
    for dir in inputs {
        for name in REPORTED {
            let path = dir.join(name);
            if !path.exists() {
                continue;
            }
            let mut reader = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
            let headers = reader.headers()?.clone();
            let mut rows = Vec::new();
            for record in reader.records() {
                let record = record?;
                let obj: Map<String, Value> =
                    headers.iter().zip(record.iter()).map(|(h, v)| (h.to_string(), cell(v))).collect();
                rows.push(Value::Object(obj));
            }
            let key = name.trim_end_matches(".csv").to_string();
            if tables.insert(key, Value::Array(rows)).is_some() {
                bail!("{name} found in more than one input directory");
            }
            read.push(path);
        }
    }
    if read.is_empty() {
        bail!("no report inputs found in {:?}", inputs);
    }
    manifest.add_inputs(read.iter())?;
    let mut summary = Map::new();
    summary.insert("tool_version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    summary.insert("tables".into(), Value::Object(tables));
    let path = ctx.out.join(outputs::SUMMARY);
    let mut json = serde_json::to_string_pretty(&Value::Object(summary))?;
    json.push('\n');
    std::fs::write(&path, json)?;
    manifest.finish(&[path])
}
