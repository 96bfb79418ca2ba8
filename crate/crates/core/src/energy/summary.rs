// SPDX-License-Identifier: Apache-2.0

use crate::report::Report;

use super::EnergyError;

/// Split of measured power into idle and operand-dependent dynamic parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSummary {
    pub p_tdual: f64,
    pub p_tsingle: f64,
    pub p_dmin: f64,
    pub p_dmax: f64,
    pub p_drng: f64,
    /// `p_dmin / (p_tsingle + p_dmin)`
    pub pct_min: f64,
    /// `p_dmax / (p_tsingle + p_dmax)`
    pub pct_max: f64,
}

impl PowerSummary {
    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.push("p_tdual_mw", format!("{:.3}", self.p_tdual))
            .push("p_tsingle_mw", format!("{:.3}", self.p_tsingle))
            .push("p_dmin_mw", format!("{:.3}", self.p_dmin))
            .push("p_dmax_mw", format!("{:.3}", self.p_dmax))
            .push("p_drng_mw", format!("{:.3}", self.p_drng))
            .push("pct_min", format!("{:.4}", self.pct_min))
            .push("pct_max", format!("{:.4}", self.pct_max));
        r
    }
}

/// `p_tdual` is the idle power of the whole (dual-core) device; each test
/// power was measured with one core running the test and the other idle.
pub fn summarize_power(p_tdual: f64, test_powers: &[f64]) -> Result<PowerSummary, EnergyError> {
    if let Some(&bad) = std::iter::once(&p_tdual)
        .chain(test_powers)
        .find(|p| !p.is_finite() || **p < 0.0)
    {
        return Err(EnergyError::BadPower(bad));
    }
    let min = test_powers
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(EnergyError::EmptyPowers)?;
    let max = test_powers.iter().copied().fold(min, f64::max);
    let p_tsingle = p_tdual / 2.0;
    let p_dmin = min - p_tdual;
    let p_dmax = max - p_tdual;
    let pct = |p: f64| {
        let total = p_tsingle + p;
        if total == 0.0 {
            0.0
        } else {
            p / total
        }
    };
    Ok(PowerSummary {
        p_tdual,
        p_tsingle,
        p_dmin,
        p_dmax,
        p_drng: p_dmax - p_dmin,
        pct_min: pct(p_dmin),
        pct_max: pct(p_dmax),
    })
}
