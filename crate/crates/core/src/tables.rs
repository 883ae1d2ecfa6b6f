//! Data tables behind the threshold, noise, scheme-ratio and run-count plots.
//!
//! Tables are in long format: curves for several parameter values are
//! stacked and told apart by a parameter column.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certification::VacuumPair;
use crate::error::{check_open_unit, Error, Result};
use crate::exec::Exec;
use crate::gaussian_boundary::{
    approx_delta_threshold, boundary_cap, boundary_lambda, boundary_one_minus_p0,
    boundary_one_minus_q0, boundary_p0, boundary_q0, solve_v_for_p0,
};
use crate::planner::{rds_min_on_boundary, required_runs};
use crate::state_models::{eta_threshold, noisy_single_photon_vacuum_pair, NoisySinglePhotonModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureTable {
    pub figure_id: String,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub columns: Vec<Column>,
}

impl FigureTable {
    fn from_rows(figure_id: &str, names: &[&str], rows: Vec<Vec<f64>>) -> Result<Self> {
        let columns = names
            .iter()
            .enumerate()
            .map(|(i, name)| Column {
                name: (*name).to_string(),
                values: rows.iter().map(|r| r[i]).collect(),
            })
            .collect();
        let table = Self {
            figure_id: figure_id.to_string(),
            params: BTreeMap::new(),
            seed: None,
            columns,
        };
        table.validate()?;
        Ok(table)
    }

    fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Checks that all columns have equal length and only finite values.
    pub fn validate(&self) -> Result<()> {
        let len = self.len();
        for c in &self.columns {
            if c.values.len() != len {
                return Err(Error::InvalidParams(format!(
                    "column {} has {} rows, expected {len}",
                    c.name,
                    c.values.len()
                )));
            }
            if let Some(i) = c.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "column {} row {i} is not finite",
                    c.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig5" => Ok(Self::Fig5),
            _ => Err(Error::InvalidParams(format!(
                "unknown figure {s:?}, expected fig2, fig3, fig4 or fig5"
            ))),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        };
        f.write_str(s)
    }
}

/// Transmittances of the noisy single-photon threshold curves.
pub const FIG3_T: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
pub const FIG2_T: [f64; 2] = [0.5, 0.25];
pub const FIG4_T: [f64; 3] = [0.25, 0.5, 0.75];
pub const FIG5_NBAR: [f64; 2] = [1e-2, 1e-3];

/// Smallest boundary `p0` a sweep goes down to. Below it the tangent slope
/// overflows.
pub const BOUNDARY_P0_FLOOR: f64 = 1e-150;

/// Variances for a boundary sweep at transmittance `t`: geometric in `V` from
/// where `p0` reaches [`BOUNDARY_P0_FLOOR`] (but not below 1e-3) up to 0.5,
/// then geometric in `1 - V` down to 1e-6, ending exactly at `V = 1`.
pub fn boundary_v_grid(t: f64, points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::InvalidParams(format!(
            "need at least 3 grid points, got {points}"
        )));
    }
    let lower = (points - 1) / 2;
    let upper = points - 1 - lower;
    let mut grid = Vec::with_capacity(points);
    let v_min = solve_v_for_p0(BOUNDARY_P0_FLOOR, t)?.clamp(1e-3, 0.25);
    let (lo, hi) = (v_min.ln(), 0.5f64.ln());
    for i in 0..lower {
        grid.push((lo + (hi - lo) * i as f64 / lower as f64).exp());
    }
    let (lo, hi) = (0.5f64.ln(), 1e-6f64.ln());
    for i in 0..upper {
        let frac = if upper > 1 {
            i as f64 / (upper - 1) as f64
        } else {
            0.0
        };
        grid.push(1.0 - (lo + (hi - lo) * frac).exp());
    }
    grid.push(1.0);
    Ok(grid)
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect()
}

fn linear(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1).max(1) as f64)
        .collect()
}

fn boundary_row(v: f64, t: f64) -> Vec<f64> {
    let (p0, q0) = (boundary_p0(v, t), boundary_q0(v, t));
    let (a, b) = (boundary_one_minus_p0(v, t), boundary_one_minus_q0(v, t));
    let delta = b - t * a;
    // When the approximate test has no switching point it never passes, so
    // its threshold is the whole physical range down to q0 = p0.
    let delta_approx = approx_delta_threshold(p0, t).unwrap_or((1.0 - t) * a);
    vec![
        v,
        p0,
        q0,
        boundary_lambda(v, t),
        boundary_cap(v, t),
        delta,
        delta_approx,
    ]
}

pub const BOUNDARY_COLUMNS: [&str; 7] = ["V", "p0", "q0", "lambda", "W_G", "delta", "delta_approx"];

/// Gaussian boundary at transmittance `t`: one row per variance.
pub fn boundary_table(t: f64, v_points: usize, exec: Exec) -> Result<FigureTable> {
    check_open_unit("T", t)?;
    let grid = boundary_v_grid(t, v_points)?;
    let rows = exec.map_slice(&grid, |&v| boundary_row(v, t));
    Ok(FigureTable::from_rows("boundary", &BOUNDARY_COLUMNS, rows)?.with_param("T", t))
}

/// Boundaries for `T = 0.5` and `T = 0.25`, with the physical upper bound.
pub fn fig2_table(v_points: usize, exec: Exec) -> Result<FigureTable> {
    let mut jobs = Vec::new();
    for &t in &FIG2_T {
        jobs.extend(boundary_v_grid(t, v_points)?.into_iter().map(|v| (t, v)));
    }
    let rows = exec.map_slice(&jobs, |&(t, v)| {
        let mut row = vec![t];
        row.extend(boundary_row(v, t));
        row.push(1.0 - t * boundary_one_minus_p0(v, t));
        row
    });
    let mut names = vec!["T"];
    names.extend(BOUNDARY_COLUMNS);
    names.push("q0_physical_max");
    FigureTable::from_rows("fig2", &names, rows)
}

/// Threshold single-photon fraction against background noise for five
/// transmittances. The first row of each curve is the noiseless case.
pub fn fig3_table(points: usize, exec: Exec) -> Result<FigureTable> {
    fig3_table_for(&FIG3_T, points, exec)
}

pub fn fig3_table_for(ts: &[f64], points: usize, exec: Exec) -> Result<FigureTable> {
    if points < 2 {
        return Err(Error::InvalidParams("need at least 2 noise levels".into()));
    }
    let mut nbars = vec![0.0];
    nbars.extend(geometric(1e-5, 1e-1, points - 1));
    let jobs: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| nbars.iter().map(move |&n| (t, n)))
        .collect();
    let rows: Vec<Option<Vec<f64>>> = exec
        .map_slice(&jobs, |&(t, nbar)| {
            eta_threshold(nbar, t).map(|th| th.value().map(|eta| vec![t, nbar, eta]))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    FigureTable::from_rows(
        "fig3",
        &["T", "nbar", "eta_th"],
        rows.into_iter().flatten().collect(),
    )
}

/// Lower bound on the scheme ratio along the Gaussian boundary for three
/// transmittances. The `V = 1` rows carry the vacuum limit.
pub fn fig4_table(v_points: usize, exec: Exec) -> Result<FigureTable> {
    let mut jobs = Vec::new();
    for &t in &FIG4_T {
        jobs.extend(boundary_v_grid(t, v_points)?.into_iter().map(|v| (t, v)));
    }
    let rows = exec
        .map_slice(&jobs, |&(t, v)| {
            rds_min_on_boundary(v, t).map(|r| vec![t, v, boundary_p0(v, t), r.value])
        })
        .into_iter()
        .collect::<Result<_>>()?;
    FigureTable::from_rows("fig4", &["T", "V", "p0", "R_DS_min"], rows)
}

pub const FIG5_COLUMNS: [&str; 8] = [
    "panel", "nbar", "eta", "T", "N_S", "N_D", "R_DS", "R_DS_min",
];

/// Required runs for noisy single photons. Panel 0 sweeps the efficiency at
/// `T = 0.5`, panel 1 sweeps `T` at `eta = 0.1`. Points that cannot be
/// certified are left out. The efficiency stops at 0.99 because a state
/// without vacuum has no defined witness variance ratio.
pub fn fig5_table(points: usize, exec: Exec) -> Result<FigureTable> {
    if points < 2 {
        return Err(Error::InvalidParams(
            "need at least 2 points per curve".into(),
        ));
    }
    let mut jobs = Vec::new();
    for &nbar in &FIG5_NBAR {
        for eta in geometric(1e-2, 0.99, points) {
            jobs.push((0.0, nbar, eta, 0.5));
        }
        for t in linear(0.02, 0.98, points) {
            jobs.push((1.0, nbar, 0.1, t));
        }
    }
    let rows: Vec<Option<Vec<f64>>> = exec
        .map_slice(
            &jobs,
            |&(panel, nbar, eta, t)| -> Result<Option<Vec<f64>>> {
                let (p0, q0) =
                    noisy_single_photon_vacuum_pair(&NoisySinglePhotonModel::new(eta, nbar)?, t)?;
                match required_runs(&VacuumPair::new(p0, q0, t)?) {
                    Ok(plan) => Ok(Some(vec![
                        panel,
                        nbar,
                        eta,
                        t,
                        plan.n_s,
                        plan.n_d,
                        plan.r_ds,
                        plan.r_ds_min,
                    ])),
                    Err(Error::NotCertifiable(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            },
        )
        .into_iter()
        .collect::<Result<_>>()?;
    FigureTable::from_rows("fig5", &FIG5_COLUMNS, rows.into_iter().flatten().collect())
}

pub fn figure_table(id: FigureId, points: usize, exec: Exec) -> Result<FigureTable> {
    match id {
        FigureId::Fig2 => fig2_table(points, exec),
        FigureId::Fig3 => fig3_table(points, exec),
        FigureId::Fig4 => fig4_table(points, exec),
        FigureId::Fig5 => fig5_table(points, exec),
    }
}
