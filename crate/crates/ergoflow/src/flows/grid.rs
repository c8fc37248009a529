//! Gridded 2-D velocity data: text ingestion, bilinear interpolation in
//! space, nearest-frame selection in time.
//!
//! File format (all values decimal text, one record per line):
//!
//! ```text
//! gridflow v1 nx ny nt x0 x1 y0 y1 t0 dt_frame
//! i j vx vy        # nt blocks of nx*ny rows, row-major (i fastest)
//! ```
//!
//! Queries outside the grid clamp to the boundary values so that planner
//! line searches may probe slightly outside the data extent.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flows::field::VectorField;

#[derive(Debug, Clone)]
pub struct GriddedField {
    nx: usize,
    ny: usize,
    nt: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    t0: f64,
    dt_frame: f64,
    /// `frames[f][j * nx + i]` is the velocity at grid node `(i, j)`.
    frames: Vec<Vec<[f64; 2]>>,
}

impl GriddedField {
    pub fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty grid file"))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 11 || f[0] != "gridflow" || f[1] != "v1" {
            return Err(parse_err(
                hline + 1,
                "expected header `gridflow v1 nx ny nt x0 x1 y0 y1 t0 dt_frame`",
            ));
        }
        let nx: usize = parse_field(f[2], hline + 1, "nx")?;
        let ny: usize = parse_field(f[3], hline + 1, "ny")?;
        let nt: usize = parse_field(f[4], hline + 1, "nt")?;
        let x0: f64 = parse_field(f[5], hline + 1, "x0")?;
        let x1: f64 = parse_field(f[6], hline + 1, "x1")?;
        let y0: f64 = parse_field(f[7], hline + 1, "y0")?;
        let y1: f64 = parse_field(f[8], hline + 1, "y1")?;
        let t0: f64 = parse_field(f[9], hline + 1, "t0")?;
        let dt_frame: f64 = parse_field(f[10], hline + 1, "dt_frame")?;

        if nx < 2 || ny < 2 {
            return Err(parse_err(hline + 1, format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if nt < 1 {
            return Err(parse_err(hline + 1, "nt must be >= 1"));
        }
        if !(x1 > x0) {
            return Err(parse_err(hline + 1, format!("x axis not increasing: x0={x0}, x1={x1}")));
        }
        if !(y1 > y0) {
            return Err(parse_err(hline + 1, format!("y axis not increasing: y0={y0}, y1={y1}")));
        }
        if !(dt_frame > 0.0) {
            return Err(parse_err(hline + 1, format!("dt_frame must be positive, got {dt_frame}")));
        }

        let mut frames = Vec::with_capacity(nt);
        for frame in 0..nt {
            let mut cells = vec![[f64::NAN; 2]; nx * ny];
            for j in 0..ny {
                for i in 0..nx {
                    let (lno, line) = lines.next().ok_or_else(|| {
                        parse_err(
                            0,
                            format!("file ends before frame {frame} cell ({i}, {j})"),
                        )
                    })?;
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 4 {
                        return Err(parse_err(lno + 1, "expected `i j vx vy`"));
                    }
                    let ri: usize = parse_field(parts[0], lno + 1, "i")?;
                    let rj: usize = parse_field(parts[1], lno + 1, "j")?;
                    if ri != i || rj != j {
                        return Err(parse_err(
                            lno + 1,
                            format!("cell out of order: expected ({i}, {j}), got ({ri}, {rj})"),
                        ));
                    }
                    let vx: f64 = parse_field(parts[2], lno + 1, "vx")?;
                    let vy: f64 = parse_field(parts[3], lno + 1, "vy")?;
                    if !vx.is_finite() || !vy.is_finite() {
                        return Err(parse_err(
                            lno + 1,
                            format!("non-finite velocity in cell ({i}, {j})"),
                        ));
                    }
                    cells[j * nx + i] = [vx, vy];
                }
            }
            frames.push(cells);
        }
        if let Some((lno, _)) = lines.next() {
            return Err(parse_err(lno + 1, "trailing data after last frame"));
        }

        Ok(Self { nx, ny, nt, x0, x1, y0, y1, t0, dt_frame, frames })
    }

    pub fn velocity(&self, point: &[f64], t: f64) -> Result<Vec<f64>> {
        if point.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: point.len() });
        }
        let frame = if self.nt == 1 {
            0
        } else {
            (((t - self.t0) / self.dt_frame).round() as i64).clamp(0, self.nt as i64 - 1) as usize
        };
        let grid = &self.frames[frame];

        let sx = ((point[0] - self.x0) / (self.x1 - self.x0) * (self.nx - 1) as f64)
            .clamp(0.0, (self.nx - 1) as f64);
        let sy = ((point[1] - self.y0) / (self.y1 - self.y0) * (self.ny - 1) as f64)
            .clamp(0.0, (self.ny - 1) as f64);
        let i0 = (sx.floor() as usize).min(self.nx - 2);
        let j0 = (sy.floor() as usize).min(self.ny - 2);
        let fx = sx - i0 as f64;
        let fy = sy - j0 as f64;

        let at = |i: usize, j: usize| grid[j * self.nx + i];
        let v00 = at(i0, j0);
        let v10 = at(i0 + 1, j0);
        let v01 = at(i0, j0 + 1);
        let v11 = at(i0 + 1, j0 + 1);
        let mut out = vec![0.0; 2];
        for c in 0..2 {
            let lo = v00[c] * (1.0 - fx) + v10[c] * fx;
            let hi = v01[c] * (1.0 - fx) + v11[c] * fx;
            out[c] = lo * (1.0 - fy) + hi * fy;
        }
        Ok(out)
    }

    pub fn time_varying(&self) -> bool {
        self.nt > 1
    }
}

/// Loads a gridded field from a file and wraps it as a `VectorField`.
pub fn load_gridded_field(path: &Path) -> Result<VectorField> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    Ok(VectorField::Gridded(Some(Arc::new(GriddedField::from_str(&text)?))))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| parse_err(line, format!("cannot parse {name} from `{s}`")))
}
