// SPDX-License-Identifier: Apache-2.0

//! Synthetic operand grids and their CSV forms.
//!
//! A grid holds one measurement for every operand pair `(a, b)` of a
//! `width`-bit instruction, as if each test instruction alternated with an
//! all-zero one: input and output weights are then plain popcounts.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::machine::apply;
use crate::program::Mnemonic;

use super::fit::{FitResult, Stage};
use super::EnergyError;

/// Widest grid: 2^8 x 2^8 = 65536 points.
pub const MAX_GRID_WIDTH: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub op_a: u64,
    pub op_b: u64,
    /// Set bits across both operands.
    pub h_in: u32,
    /// Set bits of the result.
    pub h_out: u32,
    pub power_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: u32,
    pub op: Mnemonic,
    pub base_mw: f64,
    pub c_in_mw: f64,
    pub c_out_mw: f64,
    /// Standard deviation of zero-mean Gaussian noise, mW.
    pub sigma_mw: f64,
    pub seed: u64,
}

impl GridSpec {
    /// Noiseless add grid at the published coefficients.
    pub fn new(op: Mnemonic, width: u32) -> Self {
        Self {
            width,
            op,
            base_mw: 0.0,
            c_in_mw: 1.3,
            c_out_mw: 4.4,
            sigma_mw: 0.0,
            seed: 0,
        }
    }
}

fn is_grid_op(op: Mnemonic) -> bool {
    matches!(
        op,
        Mnemonic::Add
            | Mnemonic::Sub
            | Mnemonic::And
            | Mnemonic::Or
            | Mnemonic::Xor
            | Mnemonic::Shl
            | Mnemonic::Shr
    )
}

/// Every operand pair in row-major order (`op_a` outer). Noise is drawn in
/// the same order from a ChaCha stream seeded with `spec.seed`.
pub fn gen_synthetic_grid(spec: &GridSpec) -> Result<Vec<Measurement>, EnergyError> {
    if !(1..=MAX_GRID_WIDTH).contains(&spec.width) {
        return Err(EnergyError::GridTooWide(spec.width));
    }
    if !is_grid_op(spec.op) {
        return Err(EnergyError::UnsupportedOp(spec.op));
    }
    if !(spec.sigma_mw.is_finite() && spec.sigma_mw >= 0.0) {
        return Err(EnergyError::BadSigma(spec.sigma_mw));
    }
    let mut noise = (spec.sigma_mw > 0.0).then(|| {
        let normal = Normal::new(0.0, spec.sigma_mw).expect("sigma checked above");
        let rng = ChaCha8Rng::seed_from_u64(spec.seed);
        normal.sample_iter(rng)
    });
    let side = 1u64 << spec.width;
    let mut out = Vec::with_capacity((side * side) as usize);
    for a in 0..side {
        for b in 0..side {
            let result = apply(spec.op, &[a, b], spec.width);
            let h_in = a.count_ones() + b.count_ones();
            let h_out = result.count_ones();
            let mut power =
                spec.base_mw + spec.c_in_mw * f64::from(h_in) + spec.c_out_mw * f64::from(h_out);
            if let Some(n) = noise.as_mut() {
                power += n.next().expect("normal sampling never ends");
            }
            out.push(Measurement {
                op_a: a,
                op_b: b,
                h_in,
                h_out,
                power_mw: power,
            });
        }
    }
    Ok(out)
}

const HEADER: [&str; 5] = ["op_a", "op_b", "h_in", "h_out", "power_mw"];

/// `op_a,op_b,h_in,h_out,power_mw` with hex operands. Powers are written in
/// shortest round-trip form so reading them back is lossless.
pub fn write_measurements_csv<W: Write>(
    writer: W,
    measurements: &[Measurement],
) -> Result<(), EnergyError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for m in measurements {
        w.write_record([
            format!("{:#x}", m.op_a),
            format!("{:#x}", m.op_b),
            m.h_in.to_string(),
            m.h_out.to_string(),
            m.power_mw.to_string(),
        ])?;
    }
    w.flush().map_err(|e| EnergyError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_measurements_csv<R: Read>(reader: R) -> Result<Vec<Measurement>, EnergyError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(HEADER) {
        return Err(EnergyError::Csv(format!(
            "expected header `{}`",
            HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |field: &str| EnergyError::Csv(format!("row {row}: invalid {field}"));
        let hex = |s: &str, field: &str| {
            s.strip_prefix("0x")
                .and_then(|h| u64::from_str_radix(h, 16).ok())
                .ok_or_else(|| bad(field))
        };
        out.push(Measurement {
            op_a: hex(&rec[0], "op_a")?,
            op_b: hex(&rec[1], "op_b")?,
            h_in: rec[2].parse().map_err(|_| bad("h_in"))?,
            h_out: rec[3].parse().map_err(|_| bad("h_out"))?,
            power_mw: rec[4]
                .parse::<f64>()
                .ok()
                .filter(|p| p.is_finite())
                .ok_or_else(|| bad("power_mw"))?,
        });
    }
    Ok(out)
}

/// Dense matrix of one decomposition stage: rows are `op_a`, columns `op_b`.
/// The measurements must cover every pair of a `w`-bit grid exactly once.
pub fn heatmap_csv(
    measurements: &[Measurement],
    fit: &FitResult,
    stage: Stage,
) -> Result<String, EnergyError> {
    let n = measurements.len();
    let width = (1..=MAX_GRID_WIDTH)
        .find(|w| 1usize << (2 * w) == n)
        .ok_or_else(|| EnergyError::IncompleteGrid(format!("{n} points is not 4^w")))?;
    let side = 1usize << width;
    let mut cells = vec![None; n];
    for (m, value) in measurements.iter().zip(stage.values(measurements, fit)) {
        let (a, b) = (m.op_a as usize, m.op_b as usize);
        if a >= side || b >= side {
            return Err(EnergyError::IncompleteGrid(format!(
                "operand pair ({a:#x}, {b:#x}) outside a {width}-bit grid"
            )));
        }
        if cells[a * side + b].replace(value).is_some() {
            return Err(EnergyError::IncompleteGrid(format!(
                "operand pair ({a:#x}, {b:#x}) appears twice"
            )));
        }
    }
    let mut out = String::from("op_a");
    for b in 0..side {
        write!(out, ",{b:#x}").unwrap();
    }
    out.push('\n');
    for a in 0..side {
        write!(out, "{a:#x}").unwrap();
        for b in 0..side {
            let v = cells[a * side + b].expect("every cell filled once n = side^2");
            write!(out, ",{v:.6}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(grid: &[Measurement], a: u64, b: u64) -> Measurement {
        *grid.iter().find(|m| m.op_a == a && m.op_b == b).unwrap()
    }

    #[test]
    fn add_grid_points() {
        let spec = GridSpec {
            base_mw: 50.0,
            ..GridSpec::new(Mnemonic::Add, 8)
        };
        let g = gen_synthetic_grid(&spec).unwrap();
        assert_eq!(g.len(), 65536);
        let zero = find(&g, 0, 0);
        assert_eq!((zero.h_in, zero.h_out, zero.power_mw), (0, 0, 50.0));
        let wrap = find(&g, 0x80, 0x80);
        assert_eq!((wrap.h_in, wrap.h_out), (2, 0));
    }

    #[test]
    fn sub_zero_minus_one_sets_every_output_bit() {
        let g = gen_synthetic_grid(&GridSpec::new(Mnemonic::Sub, 8)).unwrap();
        let m = find(&g, 0, 1);
        assert_eq!(m.h_out, 8);
        assert_eq!(g.iter().map(|m| m.h_out).max(), Some(8));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GridSpec {
            sigma_mw: 1.5,
            seed: 7,
            ..GridSpec::new(Mnemonic::Add, 4)
        };
        let csv = |g: &[Measurement]| {
            let mut buf = Vec::new();
            write_measurements_csv(&mut buf, g).unwrap();
            buf
        };
        let a = csv(&gen_synthetic_grid(&spec).unwrap());
        let b = csv(&gen_synthetic_grid(&spec).unwrap());
        assert_eq!(a, b);
        let other = csv(&gen_synthetic_grid(&GridSpec { seed: 8, ..spec }).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let spec = GridSpec {
            sigma_mw: 2.0,
            ..GridSpec::new(Mnemonic::Xor, 3)
        };
        let g = gen_synthetic_grid(&spec).unwrap();
        let mut buf = Vec::new();
        write_measurements_csv(&mut buf, &g).unwrap();
        assert!(buf.starts_with(b"op_a,op_b,h_in,h_out,power_mw\n0x0,0x0,0,0,"));
        assert_eq!(read_measurements_csv(&buf[..]).unwrap(), g);
    }

    #[test]
    fn rejects_bad_specs_and_csv() {
        assert!(matches!(
            gen_synthetic_grid(&GridSpec::new(Mnemonic::Add, 9)),
            Err(EnergyError::GridTooWide(9))
        ));
        assert!(matches!(
            gen_synthetic_grid(&GridSpec::new(Mnemonic::Not, 4)),
            Err(EnergyError::UnsupportedOp(Mnemonic::Not))
        ));
        assert!(read_measurements_csv("a,b\n".as_bytes()).is_err());
        assert!(
            read_measurements_csv("op_a,op_b,h_in,h_out,power_mw\n12,0x0,0,0,1\n".as_bytes())
                .is_err()
        );
    }
}
