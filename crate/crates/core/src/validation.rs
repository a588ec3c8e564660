//! Reconstructed bid values against published weighted-average awards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::ids::ProjectId;
use crate::linkage::{BidValueEstimate, ProjectRecord};

pub const DEFAULT_BOUND: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValidationStatus {
    Ok,
    GapExceedsBound,
    MissingPublished,
    MissingReconstructed,
}

impl ValidationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationStatus::Ok => "ok",
            ValidationStatus::GapExceedsBound => "gap_exceeds_bound",
            ValidationStatus::MissingPublished => "missing_published",
            ValidationStatus::MissingReconstructed => "missing_reconstructed",
        }
    }

    pub fn is_flagged(self) -> bool {
        self != ValidationStatus::Ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub auction_index: u32,
    pub published: Option<f64>,
    pub reconstructed: Option<f64>,
    /// Projects contributing to the reconstructed average.
    pub n_values: u32,
    pub capacity_kw: f64,
    pub abs_gap: Option<f64>,
    pub status: ValidationStatus,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub bound: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| r.status.is_flagged())
    }
}

/// Capacity-weighted average full bid value per auction. Every project
/// with a consolidated value counts, including uniform-price projects
/// excluded from the hypothesis sample.
pub fn reconstructed_averages(
    projects: &[ProjectRecord],
    estimates: &[BidValueEstimate],
) -> BTreeMap<u32, (f64, u32, f64)> {
    let by_id: BTreeMap<ProjectId, &ProjectRecord> = projects.iter().map(|p| (p.project_id, p)).collect();
    let mut sums: BTreeMap<u32, (f64, u32, f64)> = BTreeMap::new();
    for e in estimates {
        let (Some(full), Some(p)) = (e.consolidated_full, by_id.get(&e.project_id)) else { continue };
        let s = sums.entry(p.auction_index).or_insert((0.0, 0, 0.0));
        s.0 += full.to_f64() * p.capacity_kw;
        s.1 += 1;
        s.2 += p.capacity_kw;
    }
    sums.into_iter()
        .filter(|(_, s)| s.2 > 0.0)
        .map(|(a, (weighted, n, cap))| (a, (weighted / cap, n, cap)))
        .collect()
}

pub fn validate_against_published(
    projects: &[ProjectRecord],
    estimates: &[BidValueEstimate],
    published: &BTreeMap<u32, f64>,
    bound: f64,
) -> ValidationReport {
    let reconstructed = reconstructed_averages(projects, estimates);
    let auctions: BTreeSet<u32> = reconstructed.keys().chain(published.keys()).copied().collect();
    let rows = auctions
        .into_iter()
        .map(|a| {
            let pubv = published.get(&a).copied();
            let rec = reconstructed.get(&a).copied();
            let abs_gap = match (pubv, rec) {
                (Some(p), Some((r, _, _))) => Some((r - p).abs()),
                _ => None,
            };
            let status = match (pubv, rec, abs_gap) {
                (None, _, _) => ValidationStatus::MissingPublished,
                (_, None, _) => ValidationStatus::MissingReconstructed,
                (_, _, Some(g)) if g > bound => ValidationStatus::GapExceedsBound,
                _ => ValidationStatus::Ok,
            };
            ValidationRow {
                auction_index: a,
                published: pubv,
                reconstructed: rec.map(|r| r.0),
                n_values: rec.map_or(0, |r| r.1),
                capacity_kw: rec.map_or(0.0, |r| r.2),
                abs_gap,
                status,
            }
        })
        .collect();
    ValidationReport { bound, rows }
}
