//! Linkage, project outcomes and per-auction metrics in one pass.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::calendar::YearMonth;
use crate::clearing::AwardOutcome;
use crate::linkage::{
    run_linkage, BidValueEstimate, DeveloperProfile, LinkageConfig, LinkageError, LinkageInputs, LinkageOutput,
    ProjectRecord,
};
use crate::metrics::{auction_metrics, project_outcomes, AuctionMetrics, MetricsConfig, MetricsError, ProjectOutcome};
use crate::registers::{group_auctions, AuctionResultRow, AuctionSpec, PvCostIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub linkage: LinkageOutput,
    pub specs: BTreeMap<u32, AuctionSpec>,
    pub awards: BTreeMap<u32, AwardOutcome>,
    pub outcomes: Vec<ProjectOutcome>,
    pub auctions: Vec<AuctionMetrics>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PipelineError {
    Linkage(LinkageError),
    Metrics(MetricsError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Linkage(e) => write!(f, "linkage: {e}"),
            PipelineError::Metrics(e) => write!(f, "metrics: {e}"),
        }
    }
}

impl core::error::Error for PipelineError {}

/// Derived variables for already-linked projects.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub specs: BTreeMap<u32, AuctionSpec>,
    pub awards: BTreeMap<u32, AwardOutcome>,
    pub outcomes: Vec<ProjectOutcome>,
    pub auctions: Vec<AuctionMetrics>,
}

pub fn analyse_linked(
    results: &[AuctionResultRow],
    pv_index: &[PvCostIndex],
    projects: &[ProjectRecord],
    developers: &[DeveloperProfile],
    estimates: &[BidValueEstimate],
    config: &MetricsConfig,
) -> Result<Analysis, PipelineError> {
    let grouped =
        group_auctions(results).map_err(|e| PipelineError::Linkage(LinkageError::InvalidAuctionResults(e)))?;
    let specs: BTreeMap<u32, AuctionSpec> = grouped.iter().map(|(k, d)| (*k, d.spec.clone())).collect();
    let awards: BTreeMap<u32, AwardOutcome> = grouped
        .iter()
        .map(|(k, d)| (*k, AwardOutcome::from_published(&d.spec, d.bids.iter().zip(d.awarded.iter().copied()))))
        .collect();
    let outcomes =
        project_outcomes(projects, developers, &specs, &awards, estimates, config).map_err(PipelineError::Metrics)?;
    let index: BTreeMap<YearMonth, f64> = pv_index.iter().map(|r| (r.month, r.index_value)).collect();
    let auctions = awards.iter().map(|(k, award)| auction_metrics(&outcomes, award, &specs[k], &index)).collect();
    Ok(Analysis { specs, awards, outcomes, auctions })
}

pub fn run_pipeline(
    inputs: &LinkageInputs<'_>,
    pv_index: &[PvCostIndex],
    linkage_config: &LinkageConfig,
    metrics_config: &MetricsConfig,
) -> Result<PipelineRun, PipelineError> {
    let linkage = run_linkage(inputs, linkage_config).map_err(PipelineError::Linkage)?;
    let Analysis { specs, awards, outcomes, auctions } = analyse_linked(
        inputs.auction_results,
        pv_index,
        &linkage.projects,
        &linkage.developers,
        &linkage.estimates,
        metrics_config,
    )?;
    Ok(PipelineRun { linkage, specs, awards, outcomes, auctions })
}
