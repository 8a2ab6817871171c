//! Uniform `n x n` grids on `[-L, L]^2`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    half_width: f64,
    n: usize,
    values: Vec<f64>,
}

impl PlanarGrid {
    pub fn new(half_width: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("planar grid needs n >= 2, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::domain(format!("half-width {half_width} must be positive")));
        }
        if values.len() != n * n {
            return Err(Error::domain(format!("expected {} values, got {}", n * n, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("planar grid contains non-finite values"));
        }
        Ok(PlanarGrid { half_width, n, values })
    }

    /// Sample `f(x, y)` at the grid points.
    pub fn from_fn(half_width: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = 2.0 * half_width / (n as f64 - 1.0);
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(-half_width + h * i as f64, -half_width + h * j as f64));
            }
        }
        Self::new(half_width, n, values)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n as f64 - 1.0)
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    /// Coordinates of point `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (-self.half_width + h * i as f64, -self.half_width + h * j as f64)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Cell-counted `∑ |f|^q A`.
    pub fn lq_mass(&self, q: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>() * self.cell_area()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("L={}\nn={}\n", fmt_f64(self.half_width), self.n);
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(text: &str, file: &str) -> Result<Self> {
        let schema = |message: String| Error::Schema { file: file.into(), message };
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            match lines.next() {
                Some((_, l)) if l.trim().starts_with(&format!("{key}=")) => Ok(l.trim()[key.len() + 1..].to_string()),
                Some((_, l)) => Err(schema(format!("expected header `{key}=<value>`, found `{}`", l.trim()))),
                None => Err(schema(format!("missing header `{key}=<value>`"))),
            }
        };
        let l_text = header("L")?;
        let n_text = header("n")?;
        let half_width: f64 = l_text.parse().map_err(|_| Error::Parse { file: file.into(), line: 1, message: format!("bad L `{l_text}`") })?;
        let n: usize = n_text.parse().map_err(|_| Error::Parse { file: file.into(), line: 2, message: format!("bad n `{n_text}`") })?;
        let mut values = Vec::with_capacity(n * n);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { file: file.into(), line: lineno, message: format!("bad value: {e}") })?;
            if row.len() != n {
                return Err(Error::Parse { file: file.into(), line: lineno, message: format!("expected {n} columns, found {}", row.len()) });
            }
            values.extend(row);
        }
        Self::new(half_width, n, values).map_err(|e| schema(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
