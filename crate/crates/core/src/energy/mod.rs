// SPDX-License-Identifier: Apache-2.0

//! Hamming-weight instruction power model.
//!
//! Power for one instruction is modelled as
//! `base + c_in * H_i + c_out * H_o`, where `H_i` counts set bits across the
//! input operands and `H_o` the set bits of the result, both measured against
//! an all-zero previous cycle. Along a real trace the weights become Hamming
//! distances between consecutive cycles.

mod fit;
mod grid;
mod summary;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::machine::{Assignment, ExecError, Machine};
use crate::program::{Mnemonic, Program};
use crate::report::Report;

pub use fit::{decompose, fit_hamming_model, FitResult, Stage};
pub use grid::{
    gen_synthetic_grid, heatmap_csv, read_measurements_csv, write_measurements_csv, GridSpec,
    Measurement, MAX_GRID_WIDTH,
};
pub use summary::{summarize_power, PowerSummary};

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("no test powers given")]
    EmptyPowers,
    #[error("power {0} mW is negative or not finite")]
    BadPower(f64),
    #[error("need at least 3 measurements, got {0}")]
    TooFewMeasurements(usize),
    #[error("design matrix is rank deficient: column `{0}` is collinear with the others")]
    RankDeficient(&'static str),
    #[error("grid width {0} is outside 1..={MAX_GRID_WIDTH}")]
    GridTooWide(u32),
    #[error("`{0}` is not a two-operand ALU instruction")]
    UnsupportedOp(Mnemonic),
    #[error("noise sigma {0} must be finite and non-negative")]
    BadSigma(f64),
    #[error("activity factor {0} is outside [0, 1]")]
    BadActivity(f64),
    #[error("invalid energy model: {0}")]
    BadModel(String),
    #[error("measurements do not form a complete square grid: {0}")]
    IncompleteGrid(String),
    #[error("measurement CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

impl From<csv::Error> for EnergyError {
    fn from(e: csv::Error) -> Self {
        EnergyError::Csv(e.to_string())
    }
}

/// Per-bit power coefficients and clocking of one core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Idle power of a single core, mW.
    pub p_idle_single_mw: f64,
    /// mW per input-operand Hamming unit.
    pub c_in_mw: f64,
    /// mW per output Hamming unit.
    pub c_out_mw: f64,
    pub v_dd: f64,
    pub freq_hz: f64,
}

impl EnergyModel {
    /// Name of the built-in preset holding the published XS1-L coefficients.
    pub const XS1L_PRESET: &'static str = "xs1l-paper";

    /// 164 mW single-core idle power, 1.3 mW per input bit, 4.4 mW per
    /// output bit, 1.0 V at 500 MHz.
    pub fn xs1l() -> Self {
        Self {
            p_idle_single_mw: 164.0,
            c_in_mw: 1.3,
            c_out_mw: 4.4,
            v_dd: 1.0,
            freq_hz: 500e6,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        (name == Self::XS1L_PRESET).then(Self::xs1l)
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.p_idle_single_mw) || !nonneg(self.c_in_mw) || !nonneg(self.c_out_mw) {
            return Err(EnergyError::BadModel(
                "power coefficients must be finite and non-negative".into(),
            ));
        }
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(EnergyError::BadModel("frequency must be positive".into()));
        }
        Ok(())
    }

    /// Clock period in nanoseconds.
    pub fn period_ns(&self) -> f64 {
        1e9 / self.freq_hz
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.push("p_idle_mw", self.p_idle_single_mw)
            .push("c_in_mw", self.c_in_mw)
            .push("c_out_mw", self.c_out_mw)
            .push("v_dd", self.v_dd)
            .push("freq_hz", self.freq_hz);
        r
    }
}

impl fmt::Display for EnergyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.report().to_text())
    }
}

/// Parses `key=value` lines (`p_idle_mw`, `c_in_mw`, `c_out_mw`, `v_dd`,
/// `freq_hz`); keys left out keep the preset's value.
impl FromStr for EnergyModel {
    type Err = EnergyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut model = Self::xs1l();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| EnergyError::BadModel(format!("expected key=value: `{line}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| EnergyError::BadModel(format!("bad number for `{}`", k.trim())))?;
            match k.trim() {
                "p_idle_mw" => model.p_idle_single_mw = v,
                "c_in_mw" => model.c_in_mw = v,
                "c_out_mw" => model.c_out_mw = v,
                "v_dd" => model.v_dd = v,
                "freq_hz" => model.freq_hz = v,
                other => return Err(EnergyError::BadModel(format!("unknown key `{other}`"))),
            }
        }
        model.validate()?;
        Ok(model)
    }
}

/// `base + c_in * h_in + c_out * h_out`, in mW.
pub fn predict_power(model: &EnergyModel, base_mw: f64, h_in: f64, h_out: f64) -> f64 {
    base_mw + model.c_in_mw * h_in + model.c_out_mw * h_out
}

/// Dynamic switching power `alpha * C_sw * V_dd^2 * f`, in watts.
///
/// Static power is treated as a constant folded into the idle figure;
/// leakage is not modelled.
pub fn dynamic_power(alpha: f64, c_sw: f64, v_dd: f64, freq_hz: f64) -> Result<f64, EnergyError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EnergyError::BadActivity(alpha));
    }
    Ok(alpha * c_sw * v_dd * v_dd * freq_hz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceEnergyOptions {
    /// Also charge `c_in` per bit of Hamming distance between the operands
    /// of consecutive instructions, position by position (missing operands
    /// count as zero).
    pub include_input: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEnergy {
    pub energy_nj: f64,
    /// Number of cycles charged: one per adjacent instruction pair.
    pub cycles: u64,
    pub output_switching: u64,
    pub input_switching: u64,
}

impl TraceEnergy {
    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.push("energy_nj", format!("{:.6}", self.energy_nj))
            .push("cycles", self.cycles)
            .push("switching", self.output_switching)
            .push("input_switching", self.input_switching);
        r
    }
}

/// Energy of one execution, one instruction per clock cycle. Each
/// transition between consecutive instructions costs
/// `(p_idle + c_out * h_out [+ c_in * h_in]) * period`.
pub fn trace_energy(
    program: &Program,
    assignment: &Assignment,
    model: &EnergyModel,
    options: TraceEnergyOptions,
) -> Result<TraceEnergy, EnergyError> {
    model.validate()?;
    let trace = Machine::new(program)?.execute(assignment)?;
    let mut out_total = 0u64;
    let mut in_total = 0u64;
    let mut power_sum_mw = 0.0;
    for i in 1..trace.outputs.len() {
        let h_out =
            u64::from((trace.outputs[i - 1].value() ^ trace.outputs[i].value()).count_ones());
        let (prev, cur) = (&trace.operands[i - 1], &trace.operands[i]);
        let h_in: u64 = (0..prev.len().max(cur.len()))
            .map(|k| {
                let a = prev.get(k).map_or(0, |b| b.value());
                let b = cur.get(k).map_or(0, |b| b.value());
                u64::from((a ^ b).count_ones())
            })
            .sum();
        out_total += h_out;
        in_total += h_in;
        power_sum_mw += model.p_idle_single_mw + model.c_out_mw * h_out as f64;
        if options.include_input {
            power_sum_mw += model.c_in_mw * h_in as f64;
        }
    }
    let cycles = trace.outputs.len().saturating_sub(1) as u64;
    // mW * ns = pJ
    let energy_nj = power_sum_mw * model.period_ns() * 1e-3;
    Ok(TraceEnergy {
        energy_nj,
        cycles,
        output_switching: out_total,
        input_switching: in_total,
    })
}
