//! Tabulated parameter sweeps.
//!
//! Each scan returns a [`ScanTable`]: fixed column names and rows of
//! optional floats (`None` marks a cell with no defined value, e.g. a
//! `min_ratio` where `λ−` never goes negative). Rows are computed in
//! parallel and kept in grid order.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{expectation, C64};
use crate::states::chi_state;
use crate::witnesses::{
    bell_chsh, cos2_theta_bound, min_ratio_over_theta, qubit_qw, shifted_swap, shifted_swap_factors,
    standard_bell_settings, swap_operator, QubitQWParams, ShiftedSwapParams, Sign, FIG1_THETA_POINTS,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ScanTable {
    fn new(columns: &[&str], rows: Vec<Vec<Option<f64>>>) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Points where column `y` changes sign, located by linear interpolation
/// in column `x`. Exact zeros are skipped, so a sign change across a zero
/// row is interpolated between its nonzero neighbours.
pub fn sign_crossings(table: &ScanTable, x: &str, y: &str) -> Option<Vec<f64>> {
    let xi = table.column_index(x)?;
    let yi = table.column_index(y)?;
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for row in &table.rows {
        let (Some(xv), Some(yv)) = (row[xi], row[yi]) else { continue };
        if yv == 0.0 {
            continue;
        }
        if let Some((x0, y0)) = last {
            if (y0 < 0.0) != (yv < 0.0) {
                out.push(x0 + (xv - x0) * y0 / (y0 - yv));
            }
        }
        last = Some((xv, yv));
    }
    Some(out)
}

/// `χ = a|+−⟩ + b|−+⟩` with `a = cos t`, `b = sin t`, `t = 2πj/points`.
/// Columns `re_ab, exp_S, exp_EBell` (Bell operator with the `+` sign), rows
/// in order of `t`.
pub fn chi_threshold_scan(points: usize) -> Result<ScanTable> {
    if points < 4 {
        return Err(invalid("chi-threshold scan needs at least 4 points"));
    }
    let s = swap_operator(2)?;
    let e = bell_chsh(&standard_bell_settings(Sign::Plus));
    let rows = (0..points)
        .into_par_iter()
        .map(|j| {
            let t = 2.0 * PI * j as f64 / points as f64;
            let (a, b) = (t.cos(), t.sin());
            let chi = chi_state(C64::new(a, 0.0), C64::new(b, 0.0))?;
            Ok(vec![Some(a * b), Some(expectation(&chi, &s)?), Some(expectation(&chi, &e)?)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable::new(&["re_ab", "exp_S", "exp_EBell"], rows))
}

/// Columns `u, v, bound, min_ratio` on the grid `u, v ∈ {1/n, …, 1}`.
pub fn fig1_scan(grid_n: usize) -> Result<ScanTable> {
    if grid_n < 2 {
        return Err(invalid("fig1 grid needs at least 2 points per axis"));
    }
    let rows = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let u = (idx / grid_n + 1) as f64 / grid_n as f64;
            let v = (idx % grid_n + 1) as f64 / grid_n as f64;
            vec![Some(u), Some(v), Some(cos2_theta_bound(u, v)), min_ratio_over_theta(u, v, FIG1_THETA_POINTS)]
        })
        .collect();
    Ok(ScanTable::new(&["u", "v", "bound", "min_ratio"], rows))
}

/// Unit Bloch vectors at angle `θ = π j/(points+1)`, `j = 1..=points`;
/// `ratio_formula = −tan²(θ/4)`.
pub fn ratio_theta_scan(points: usize) -> Result<ScanTable> {
    if points == 0 {
        return Err(invalid("ratio-theta scan needs at least 1 point"));
    }
    let rows = (1..=points)
        .into_par_iter()
        .map(|j| {
            let theta = PI * j as f64 / (points + 1) as f64;
            let p = QubitQWParams::from_lengths(1.0, 1.0, 1.0, 1.0, theta)?;
            let w = qubit_qw(&p);
            let formula = -(theta / 4.0).tan().powi(2);
            Ok(vec![
                Some(theta),
                Some(w.lambda_plus),
                Some(w.lambda_minus),
                Some(w.lambda_minus / w.lambda_plus),
                Some(formula),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable::new(&["theta", "lambda_plus", "lambda_minus", "ratio", "ratio_formula"], rows))
}

/// `ξ = j/(points+1)`, `j = 1..=points`, for the shifted swap on `C^d ⊗ C^d`.
pub fn xi_sweep_scan(points: usize, d: usize, phi: f64) -> Result<ScanTable> {
    if points == 0 {
        return Err(invalid("xi-sweep needs at least 1 point"));
    }
    let rows = (1..=points)
        .into_par_iter()
        .map(|j| {
            let xi = j as f64 / (points + 1) as f64;
            let f = shifted_swap_factors(&ShiftedSwapParams::new(xi, phi, d)?)?;
            Ok(vec![
                Some(xi),
                Some(f.residual),
                Some(f.x.min_eigenvalue()),
                Some(f.y.min_eigenvalue()),
                Some(shifted_swap(d, xi)?.min_eigenvalue()),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable::new(&["xi", "residual", "min_eig_X", "min_eig_Y", "min_eig_shifted"], rows))
}
