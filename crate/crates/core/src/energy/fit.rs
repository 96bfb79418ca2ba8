// SPDX-License-Identifier: Apache-2.0

//! Least-squares fit of `power ≈ base + c_in * H_i + c_out * H_o`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::report::Report;

use super::grid::Measurement;
use super::EnergyError;

const COLUMNS: [&str; 3] = ["intercept", "h_in", "h_out"];

/// Relative size below which an R diagonal entry counts as zero.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub base_mw: f64,
    pub c_in_mw: f64,
    pub c_out_mw: f64,
    pub mean_abs_error_mw: f64,
    /// `power - base - c_in * h_in - c_out * h_out`, one per measurement.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn predict(&self, h_in: u32, h_out: u32) -> f64 {
        self.base_mw + self.c_in_mw * f64::from(h_in) + self.c_out_mw * f64::from(h_out)
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.push("base_mw", format!("{:.3}", self.base_mw))
            .push("c_in_mw", format!("{:.3}", self.c_in_mw))
            .push("c_out_mw", format!("{:.3}", self.c_out_mw))
            .push("mae_mw", format!("{:.3}", self.mean_abs_error_mw));
        r
    }
}

/// Ordinary least squares with an explicit intercept, solved by QR.
pub fn fit_hamming_model(measurements: &[Measurement]) -> Result<FitResult, EnergyError> {
    let n = measurements.len();
    if n < 3 {
        return Err(EnergyError::TooFewMeasurements(n));
    }
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => f64::from(measurements[i].h_in),
        _ => f64::from(measurements[i].h_out),
    });
    let power = DVector::from_iterator(n, measurements.iter().map(|m| m.power_mw));

    let qr = design.clone().qr();
    let r = qr.r();
    for (k, name) in COLUMNS.iter().enumerate() {
        let scale = design.column(k).norm().max(1.0);
        if r[(k, k)].abs() <= RANK_TOL * scale {
            return Err(EnergyError::RankDeficient(name));
        }
    }
    let qty = qr.q().transpose() * &power;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(EnergyError::RankDeficient(COLUMNS[2]))?;

    let residuals: Vec<f64> = (&power - &design * &coef).iter().copied().collect();
    let mean_abs_error_mw = residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64;
    Ok(FitResult {
        base_mw: coef[0],
        c_in_mw: coef[1],
        c_out_mw: coef[2],
        mean_abs_error_mw,
        residuals,
    })
}

/// Views of a grid with fitted terms removed, mirroring the step-by-step
/// heat-map decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Measured power.
    Raw,
    /// Power minus `c_out * h_out`.
    MinusOut,
    /// Power minus `c_in * h_in`.
    MinusIn,
    /// Power minus base and both Hamming terms.
    Residual,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Raw, Stage::MinusOut, Stage::MinusIn, Stage::Residual];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::MinusOut => "minus-out",
            Stage::MinusIn => "minus-in",
            Stage::Residual => "residual",
        }
    }

    pub fn values(self, measurements: &[Measurement], fit: &FitResult) -> Vec<f64> {
        measurements
            .iter()
            .map(|m| {
                let (hi, ho) = (f64::from(m.h_in), f64::from(m.h_out));
                match self {
                    Stage::Raw => m.power_mw,
                    Stage::MinusOut => m.power_mw - fit.c_out_mw * ho,
                    Stage::MinusIn => m.power_mw - fit.c_in_mw * hi,
                    Stage::Residual => {
                        m.power_mw - fit.base_mw - fit.c_in_mw * hi - fit.c_out_mw * ho
                    }
                }
            })
            .collect()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}` (raw, minus-out, minus-in, residual)"))
    }
}

/// All four stages, in `Stage::ALL` order.
pub fn decompose(measurements: &[Measurement], fit: &FitResult) -> Vec<(Stage, Vec<f64>)> {
    Stage::ALL
        .into_iter()
        .map(|s| (s, s.values(measurements, fit)))
        .collect()
}
