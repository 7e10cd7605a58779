//! Cross-module regression over the catalog: every stored expectation is compared with
//! the verdict the analysis modules compute for the entry.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{standard_catalog, CatalogEntry, Expected};
use crate::error::Result;
use crate::estimates::{energy_blocks, EnergyClass};
use crate::radial::Grid;
use crate::scalar::Real;
use crate::stability::semistability_verdict;
use crate::weak::classify_weak_solution;

/// Closed-form residual accepted for a catalog entry.
pub const CATALOG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, expected: impl Into<String>, computed: impl Into<String>) -> Self {
        let (expected, computed) = (expected.into(), computed.into());
        let pass = expected == computed;
        Check { name: name.into(), expected, computed, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub id: String,
    pub checks: Vec<Check>,
}

impl VerifyRow {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyMatrix {
    pub rows: Vec<VerifyRow>,
}

impl VerifyMatrix {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(VerifyRow::pass)
    }

    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    /// One line per entry; mismatched cells show `expected->computed`.
    pub fn to_table(&self) -> String {
        let cell = |c: &Check| if c.pass { c.computed.clone() } else { format!("{}->{}", c.expected, c.computed) };
        let names: Vec<&str> = self.rows.first().map(|r| r.checks.iter().map(|c| c.name.as_str()).collect()).unwrap_or_default();
        let mut widths: Vec<usize> = names.iter().map(|n| n.len()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(&row.checks) {
                *w = (*w).max(cell(c).len());
            }
        }
        let id_width = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
        let mut out = format!("{:<id_width$}", "id");
        for (n, w) in names.iter().zip(&widths) {
            out.push_str(&format!("  {n:<w$}"));
        }
        out.push_str("  result\n");
        for row in &self.rows {
            out.push_str(&format!("{:<id_width$}", row.id));
            for (c, w) in row.checks.iter().zip(&widths) {
                out.push_str(&format!("  {:<w$}", cell(c)));
            }
            out.push_str(if row.pass() { "  pass\n" } else { "  FAIL\n" });
        }
        out.push_str(&format!("{} entries, {} mismatched\n", self.rows.len(), self.mismatches()));
        out
    }
}

fn row<T: Real>(entry: &CatalogEntry<T>, expected: &Expected) -> VerifyRow {
    let residual = entry.closed_form_residual();
    let residual_ok = residual.as_f64() <= CATALOG_RESIDUAL_TOL;
    let stability = match semistability_verdict(&entry.profile, &entry.nl) {
        Ok(r) => r.verdict.as_str().to_string(),
        Err(e) => format!("error: {e}"),
    };
    let energy = match energy_blocks(&entry.profile) {
        Ok(e) => match e.classification {
            EnergyClass::NonEnergy => "non-energy",
            EnergyClass::Energy => "energy",
            EnergyClass::Undetermined => "undetermined",
        }
        .to_string(),
        Err(e) => format!("error: {e}"),
    };
    let weak = match classify_weak_solution(&entry.profile, &entry.nl) {
        Ok(c) => c.verdict.as_str().to_string(),
        Err(e) => format!("error: {e}"),
    };
    VerifyRow {
        id: entry.id.clone(),
        checks: vec![
            Check::new("residual", "ok", if residual_ok { "ok".to_string() } else { format!("{:.1e}", residual.as_f64()) }),
            Check::new("stability", expected.stability.as_str(), stability),
            Check::new("energy", if expected.non_energy { "non-energy" } else { "energy" }, energy),
            Check::new("weak", expected.weak.as_str(), weak),
            Check::new("consistent", "yes", if expected.is_consistent() { "yes" } else { "no" }),
        ],
    }
}

/// Runs the entries in parallel; `overrides` replaces stored expectations by id.
pub fn verify_entries<T: Real>(entries: &[CatalogEntry<T>], overrides: &BTreeMap<String, Expected>) -> VerifyMatrix {
    let rows = entries
        .par_iter()
        .map(|e| row(e, overrides.get(&e.id).unwrap_or(&e.expected)))
        .collect();
    VerifyMatrix { rows }
}

/// The standard catalog on `grid`, restricted to ids starting with `only` if given.
pub fn verify_catalog<T: Real>(grid: &Grid<T>, only: Option<&str>, overrides: &BTreeMap<String, Expected>) -> Result<VerifyMatrix> {
    let entries: Vec<_> = standard_catalog(grid)?
        .into_iter()
        .filter(|e| only.is_none_or(|p| e.id.starts_with(p)))
        .collect();
    Ok(verify_entries(&entries, overrides))
}
