//! Composite Gauss-Legendre quadrature.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

const ORDER: usize = 10;

fn nodes() -> &'static [(f64, f64); ORDER] {
    static NODES: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for (i, slot) in out.iter_mut().enumerate() {
            // Newton on P_n starting from the Chebyshev guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// Integrates `f` over `[lo, hi]` split into `panels` equal panels.
pub fn integrate<T, F>(lo: f64, hi: f64, panels: usize, f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let panels = panels.max(1);
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let mut acc = T::default();
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        for &(x, w) in nodes() {
            acc = acc + f(mid + half * x) * (w * half);
        }
    }
    acc
}
