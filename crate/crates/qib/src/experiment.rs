//! Batch experiments over seeded state families.
//!
//! States are numbered in family order (pure, product, bell, ghz, mixed) and
//! state `i` uses seed `base_seed + i`. Results are merged in that order, so
//! the CSV does not depend on the worker count apart from `wall_ms`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use qib_core::posterior::posterior_info;
use qib_core::states::{Family, StateSpec};
use qib_core::Tolerances;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::svg;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub pure: usize,
    pub product: usize,
    pub bell: usize,
    pub ghz: usize,
    pub mixed: usize,
}

impl FamilyCounts {
    pub fn total(&self) -> usize {
        self.pure + self.product + self.bell + self.ghz + self.mixed
    }

    fn per_family(&self) -> [(Family, usize); 5] {
        [
            (Family::Pure, self.pure),
            (Family::Product, self.product),
            (Family::Bell, self.bell),
            (Family::Ghz, self.ghz),
            (Family::Mixed, self.mixed),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub counts: FamilyCounts,
    pub seed: u64,
    /// Rank of mixed states; full rank when `None`.
    pub mixed_rank: Option<usize>,
    /// Visiting order; natural when `None`.
    pub order: Option<Vec<usize>>,
    pub tolerances: Tolerances,
    /// Worker threads; rayon's default when `None`.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(n: usize, counts: FamilyCounts, seed: u64) -> Self {
        Self {
            n,
            counts,
            seed,
            mixed_rank: None,
            order: None,
            tolerances: Tolerances::default(),
            jobs: None,
        }
    }

    /// Every state of the run, validated up front.
    pub fn specs(&self) -> Result<Vec<StateSpec>> {
        let mut specs = Vec::with_capacity(self.counts.total());
        for (family, count) in self.counts.per_family() {
            for _ in 0..count {
                let seed = self.seed.wrapping_add(specs.len() as u64);
                let mut spec = StateSpec::new(family, self.n, seed);
                if family == Family::Mixed {
                    spec.rank = self.mixed_rank;
                }
                spec.validate()
                    .map_err(|e| CliError::Usage(format!("{} states: {e}", family.name())))?;
                specs.push(spec);
            }
        }
        Ok(specs)
    }
}

/// One state's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub family: Family,
    pub seed: u64,
    pub n: usize,
    pub posterior_total: Option<f64>,
    pub prior_total: Option<f64>,
    pub max_component_contribution: Option<f64>,
    pub num_degenerate: Option<usize>,
    /// `converged`, `boundary_degenerate` or `error`.
    pub solver_status: String,
    pub wall_ms: u64,
    pub failed: bool,
    #[serde(skip)]
    pub error: Option<String>,
}

fn run_one(index: usize, spec: &StateSpec, order: Option<&[usize]>, tol: &Tolerances) -> Row {
    let start = Instant::now();
    let outcome = spec.generate().and_then(|rho| posterior_info(&rho, order, tol));
    let wall_ms = start.elapsed().as_millis() as u64;
    let mut row = Row {
        index,
        family: spec.family,
        seed: spec.seed,
        n: spec.n,
        posterior_total: None,
        prior_total: None,
        max_component_contribution: None,
        num_degenerate: None,
        solver_status: "error".into(),
        wall_ms,
        failed: true,
        error: None,
    };
    match outcome {
        Ok(r) => {
            row.posterior_total = Some(r.posterior_total);
            row.prior_total = Some(r.prior_total);
            row.max_component_contribution = Some(r.max_contribution());
            row.num_degenerate = Some(r.num_degenerate());
            row.solver_status = r.worst_status.name().into();
            row.failed = false;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every state, in parallel, and returns rows in input order.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let specs = cfg.specs()?;
    let order = cfg.order.as_deref();
    let work = || -> Vec<Row> {
        specs
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_one(i, s, order, &cfg.tolerances))
            .collect()
    };
    match cfg.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "index",
    "family",
    "seed",
    "n",
    "posterior_total",
    "prior_total",
    "max_component_contribution",
    "num_degenerate",
    "solver_status",
    "wall_ms",
    "failed",
];

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    // written by hand so an empty run still gets a header
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub count: usize,
    pub failed: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Largest `|posterior_total - n|`.
    pub max_deviation_from_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub states: usize,
    pub failed: usize,
    /// States with `posterior_total > n + slack`.
    pub violations: usize,
    pub slack: f64,
    pub families: BTreeMap<String, FamilyStats>,
}

impl Summary {
    pub fn from_rows(n: usize, rows: &[Row], slack: f64) -> Self {
        let mut families = BTreeMap::new();
        for family in Family::ALL {
            let mine: Vec<&Row> = rows.iter().filter(|r| r.family == family).collect();
            if mine.is_empty() {
                continue;
            }
            let totals: Vec<f64> = mine.iter().filter_map(|r| r.posterior_total).collect();
            let stat = |f: fn(f64, f64) -> f64| totals.iter().copied().reduce(f);
            families.insert(
                family.name().to_string(),
                FamilyStats {
                    count: mine.len(),
                    failed: mine.iter().filter(|r| r.failed).count(),
                    min: stat(f64::min),
                    max: stat(f64::max),
                    mean: (!totals.is_empty()).then(|| totals.iter().sum::<f64>() / totals.len() as f64),
                    max_deviation_from_n: totals.iter().map(|t| (t - n as f64).abs()).reduce(f64::max),
                },
            );
        }
        Self {
            n,
            states: rows.len(),
            failed: rows.iter().filter(|r| r.failed).count(),
            violations: rows
                .iter()
                .filter_map(|r| r.posterior_total)
                .filter(|&t| t > n as f64 + slack)
                .count(),
            slack,
            families,
        }
    }
}

fn create(path: &PathBuf) -> Result<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

/// Runs the experiment and writes CSV, summary JSON and the optional SVG.
/// Failed states are reported through the returned summary, not as errors.
pub fn cmd_experiment(cfg: &ExperimentConfig, out: &Outputs) -> Result<(Vec<Row>, Summary)> {
    cfg.specs()?;
    // open outputs first so an unwritable path fails before the long run
    let csv_file = create(&out.csv)?;
    let summary_file = create(&out.summary)?;
    let svg_file = out.svg.as_ref().map(create).transpose()?;

    let rows = run(cfg)?;
    let summary = Summary::from_rows(cfg.n, &rows, cfg.tolerances.bound_slack);

    write_csv(&rows, io::BufWriter::new(csv_file))?;
    let mut w = io::BufWriter::new(summary_file);
    serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| CliError::io(&out.summary, e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&out.summary, e))?;
    if let (Some(file), Some(path)) = (svg_file, &out.svg) {
        let points: Vec<svg::Point> = rows
            .iter()
            .filter_map(|r| {
                r.posterior_total.map(|y| svg::Point {
                    index: r.index,
                    value: y,
                    family: r.family,
                })
            })
            .collect();
        let mut w = io::BufWriter::new(file);
        w.write_all(svg::scatter(&points, cfg.n, rows.len()).as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path, e))?;
    }
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_follow_family_order() {
        let counts = FamilyCounts {
            pure: 2,
            product: 1,
            bell: 1,
            ..Default::default()
        };
        let specs = ExperimentConfig::new(2, counts, 40).specs().unwrap();
        let got: Vec<(Family, u64)> = specs.iter().map(|s| (s.family, s.seed)).collect();
        assert_eq!(
            got,
            vec![
                (Family::Pure, 40),
                (Family::Pure, 41),
                (Family::Product, 42),
                (Family::Bell, 43)
            ]
        );
    }

    #[test]
    fn family_constraints_are_checked_before_running() {
        let counts = FamilyCounts {
            bell: 1,
            ..Default::default()
        };
        assert!(ExperimentConfig::new(3, counts, 0).specs().is_err());
        let counts = FamilyCounts {
            ghz: 1,
            ..Default::default()
        };
        assert!(ExperimentConfig::new(2, counts, 0).specs().is_err());
    }

    #[test]
    fn empty_run_writes_only_the_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn summary_counts_violations_and_failures() {
        let row = |index, total: Option<f64>| Row {
            index,
            family: Family::Pure,
            seed: index as u64,
            n: 1,
            posterior_total: total,
            prior_total: total.map(|_| 1.0),
            max_component_contribution: total,
            num_degenerate: Some(0),
            solver_status: if total.is_some() { "converged" } else { "error" }.into(),
            wall_ms: 0,
            failed: total.is_none(),
            error: None,
        };
        let rows = [row(0, Some(0.5)), row(1, Some(1.01)), row(2, None)];
        let s = Summary::from_rows(1, &rows, 1e-3);
        assert_eq!((s.states, s.failed, s.violations), (3, 1, 1));
        let pure = &s.families["pure"];
        assert_eq!((pure.count, pure.failed), (3, 1));
        assert_eq!((pure.min, pure.max), (Some(0.5), Some(1.01)));
        assert!((pure.mean.unwrap() - 0.755).abs() < 1e-12);
        assert!((pure.max_deviation_from_n.unwrap() - 0.5).abs() < 1e-12);
    }
}
