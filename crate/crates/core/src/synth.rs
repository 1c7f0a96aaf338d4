//! Synthetic Taylor-Green vortex data: a volume with velocity, pressure,
//! vorticity magnitude and a Q-like scalar, plus a sampled table of the
//! same point values.

use crate::probe::vti_writer::{write_vti, VtiArray, VtiEncoding};
use crate::probe::Scalar;
use std::f64::consts::PI;
use std::fmt::Write;

/// Upper end of the rescaled vorticity magnitude.
pub const VORTICITY_MAX: f64 = 28.82;

/// Table column order.
pub const TABLE_COLUMNS: [&str; 6] = ["ux", "uy", "uz", "vorticity", "pp", "critq"];

/// Point arrays of an `n`³ grid over [0, 2π]³, x varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorGreen {
    pub n: usize,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub uz: Vec<f64>,
    pub vorticity: Vec<f64>,
    pub pp: Vec<f64>,
    pub critq: Vec<f64>,
}

impl TaylorGreen {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "grid needs at least two points per axis");
        let total = n * n * n;
        let step = 2.0 * PI / (n - 1) as f64;
        let mut tg = TaylorGreen {
            n,
            ux: Vec::with_capacity(total),
            uy: Vec::with_capacity(total),
            uz: Vec::with_capacity(total),
            vorticity: Vec::with_capacity(total),
            pp: Vec::with_capacity(total),
            critq: Vec::with_capacity(total),
        };
        for k in 0..n {
            let z = k as f64 * step;
            for j in 0..n {
                let y = j as f64 * step;
                for i in 0..n {
                    let x = i as f64 * step;
                    let (sx, cx, sy, cy, sz, cz) =
                        (x.sin(), x.cos(), y.sin(), y.cos(), z.sin(), z.cos());
                    let u = sx * cy * cz;
                    let v = -cx * sy * cz;
                    let wx = -cx * sy * sz;
                    let wy = -sx * cy * sz;
                    let wz = 2.0 * sx * sy * cz;
                    let omega2 = wx * wx + wy * wy + wz * wz;
                    tg.ux.push(u);
                    tg.uy.push(v);
                    tg.uz.push(0.0);
                    tg.vorticity.push(omega2.sqrt());
                    tg.pp.push(
                        (f64::cos(2.0 * x) + f64::cos(2.0 * y)) * (f64::cos(2.0 * z) + 2.0) / 16.0,
                    );
                    tg.critq.push(0.25 * omega2 - 0.5 * (u * u + v * v));
                }
            }
        }
        let (lo, hi) = tg
            .vorticity
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| {
                (a.min(w), b.max(w))
            });
        for w in &mut tg.vorticity {
            *w = (*w - lo) / (hi - lo) * VORTICITY_MAX;
        }
        tg
    }

    /// Arrays in alphabetical name order.
    pub fn arrays(&self) -> Vec<VtiArray> {
        [
            ("critq", &self.critq),
            ("pp", &self.pp),
            ("ux", &self.ux),
            ("uy", &self.uy),
            ("uz", &self.uz),
            ("vorticity", &self.vorticity),
        ]
        .into_iter()
        .map(|(name, values)| VtiArray::new(name, Scalar::Float64, 1, values.clone()))
        .collect()
    }

    pub fn extent(&self) -> [i64; 6] {
        let hi = self.n as i64 - 1;
        [0, hi, 0, hi, 0, hi]
    }

    /// Volume document with raw appended Float64 arrays.
    pub fn vti(&self) -> Vec<u8> {
        write_vti(self.extent(), &self.arrays(), VtiEncoding::AppendedRaw)
    }

    /// Every `stride`-th grid point as a CSV row, columns in [`TABLE_COLUMNS`]
    /// order. Numbers are written in shortest round-trip form.
    pub fn csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = TABLE_COLUMNS.join(",");
        out.push('\n');
        for p in (0..self.ux.len()).step_by(stride) {
            let row = [
                self.ux[p],
                self.uy[p],
                self.uz[p],
                self.vorticity[p],
                self.pp[p],
                self.critq[p],
            ];
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{probe_table, probe_vti, TableFormat};

    #[test]
    fn small_grid_round_trips_through_probes() {
        let tg = TaylorGreen::new(9);
        let meta = probe_vti(&tg.vti()).unwrap();
        assert_eq!(meta.dimensions, Some([9, 9, 9]));
        let names: Vec<_> = meta.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["critq", "pp", "ux", "uy", "uz", "vorticity"]);
        assert_eq!(
            meta.variable("vorticity").unwrap().range,
            Some([0.0, VORTICITY_MAX])
        );

        let table = probe_table(tg.csv(7).as_bytes(), TableFormat::Csv).unwrap();
        let names: Vec<_> = table.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, TABLE_COLUMNS);
    }
}
