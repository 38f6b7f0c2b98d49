//! Uniform-grid tabulations.
//!
//! A [`GridFunction`] stores values at `x0 + k*h` for `k = 0..len`. Between
//! nodes it is evaluated by linear interpolation; outside the grid it is zero.
//! The same type is used for densities, special-function tables and (with
//! `T = Complex64`) characteristic functions on a `u` grid.

use std::io::Write;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T = f64> {
    pub x0: f64,
    pub h: f64,
    #[serde(rename = "f")]
    pub values: Vec<T>,
}

pub type ComplexGrid = GridFunction<Complex64>;

impl<T> GridFunction<T> {
    pub fn new(x0: f64, h: f64, values: Vec<T>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "grid step must be finite and > 0",
            });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x0",
                value: x0,
                reason: "grid origin must be finite",
            });
        }
        if values.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "grid needs at least 2 nodes, got {}",
                values.len()
            )));
        }
        Ok(Self { x0, h, values })
    }

    /// Tabulates `f` at `n` nodes starting from `x0`.
    pub fn tabulate(x0: f64, h: f64, n: usize, f: impl Fn(f64) -> T) -> Result<Self> {
        let values = (0..n).map(|k| f(x0 + k as f64 * h)).collect();
        Self::new(x0, h, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, &T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.x0 + k as f64 * self.h, v))
    }

    pub fn map<U>(&self, f: impl Fn(f64, &T) -> U) -> GridFunction<U> {
        GridFunction {
            x0: self.x0,
            h: self.h,
            values: self.nodes().map(|(x, v)| f(x, v)).collect(),
        }
    }
}

impl<T> GridFunction<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    /// Linear interpolation between nodes, zero outside `[x0, x_max]`.
    pub fn eval(&self, x: f64) -> T {
        let s = (x - self.x0) / self.h;
        let last = self.values.len() - 1;
        if !(s >= -1e-9 && s <= last as f64 + 1e-9) {
            return T::default();
        }
        let s = s.clamp(0.0, last as f64);
        let k = (s.floor() as usize).min(last - 1);
        let w = s - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// Composite trapezoid rule over the whole grid.
    pub fn trapezoid(&self) -> T {
        let n = self.values.len();
        let mut acc = (self.values[0] + self.values[n - 1]) * 0.5;
        for v in &self.values[1..n - 1] {
            acc = acc + *v;
        }
        acc * self.h
    }

    /// Running trapezoid integral; entry `k` is the integral over `[x0, x_k]`.
    pub fn cumulative(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = T::default();
        out.push(acc);
        for w in self.values.windows(2) {
            acc = acc + (w[0] + w[1]) * (0.5 * self.h);
            out.push(acc);
        }
        out
    }
}

impl GridFunction<f64> {
    /// Writes `x,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W, value_name: &str) -> Result<()> {
        writeln!(out, "x,{value_name}")?;
        for (x, v) in self.nodes() {
            writeln!(out, "{x},{v}")?;
        }
        Ok(())
    }

    /// Node index closest to `x`, if `x` is on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x0) / self.h;
        let k = s.round();
        if (s - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.values.len() {
            Some(k as usize)
        } else {
            None
        }
    }
}
