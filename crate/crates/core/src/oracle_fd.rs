//! Finite-difference march away from the singular line, used as an
//! independent check of the analytic solvers.
//!
//! The unknown is split as `U = S + V`, where `S` is the near-diagonal
//! expansion implied by the diagonal data (through the `r² ln r` terms) and
//! `V` is marched with the characteristic-cell scheme
//!
//! ```text
//! V_xy + β/s V_x − α/s V_y = −L[S]
//! ```
//!
//! on the grid `x_i = a + i h`, `y = x_i + ε + k h`. Both seed levels carry
//! `V = 0`. Each cell is centred at distance `s_c ≥ ε + h` from the diagonal.

use std::f64::consts::LN_2;
use std::io::Write;

use rayon::prelude::*;

use crate::cauchy::CauchyData;
use crate::epd::{residual_of_jet, CaseTag, ParamCase, ScalarField};
use crate::error::{contract, Error, Result};
use crate::expr::ScalarFn;
use crate::scalar::{Real, Taylor2};

/// Near-diagonal expansion of the solution with given diagonal data, in
/// `t = (x+y)/2`, `r = (y−x)/2`:
///
/// * C1: `P + Q ln r + r² ((P'' − Q'')/4 + (Q''/4) ln r)`, `P = τ − (3/2) ln 2 ν`, `Q = ν/2`
/// * C2: `τ + r (a₁ + ε τ' ln r) + r² (a₂ + (τ''/2) ln r)`,
///   `a₁ = ν − 3ε ln 2 τ'`, `a₂ = (ε a₁' − τ''/2)/2`
/// * C3: `τ + r² (ν + (1/4 − (3/2) ln 2) τ'' + (τ''/2) ln r)`
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub case: ParamCase,
    pub tau: ScalarFn,
    pub nu: ScalarFn,
}

impl Expansion {
    pub fn new(data: &CauchyData) -> Expansion {
        Expansion { case: data.case, tau: data.tau.clone(), nu: data.nu.clone() }
    }
}

impl ScalarField for Expansion {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        let t = (x + y).scale(0.5);
        let r = (y - x).scale(0.5);
        let ln_r = r.ln();
        let r2 = r * r;
        let k = 1.5 * LN_2;
        let tau = |n| self.tau.deriv(t, n);
        let nu = |n| self.nu.deriv(t, n);
        match self.case.tag {
            CaseTag::C1 => {
                let (p, q) = (tau(0) - nu(0).scale(k), nu(0).scale(0.5));
                let (p2, q2) = (tau(2) - nu(2).scale(k), nu(2).scale(0.5));
                p + q * ln_r + r2 * ((p2 - q2).scale(0.25) + q2.scale(0.25) * ln_r)
            }
            CaseTag::C2 => {
                let e = self.case.epsilon();
                let (d1, d2) = (tau(1), tau(2));
                let a1 = nu(0) - d1.scale(2.0 * e * k);
                let da1 = nu(1) - d2.scale(2.0 * e * k);
                let a2 = (da1.scale(e) - d2.scale(0.5)).scale(0.5);
                tau(0) + r * (a1 + d1.scale(e) * ln_r) + r2 * (a2 + d2.scale(0.5) * ln_r)
            }
            CaseTag::C3 => {
                let d2 = tau(2);
                tau(0) + r2 * (nu(0) + d2.scale(0.25 - k) + d2.scale(0.5) * ln_r)
            }
        }
    }
}

/// Values on the levels `s_k = ε + k h` at the nodes `x_i = a + i h`; level `k`
/// holds the nodes with `x_i + s_k ≤ b`, so row lengths decrease by one.
#[derive(Clone, Debug, PartialEq)]
pub struct MarchGrid {
    pub h: f64,
    pub eps: f64,
    pub x: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl MarchGrid {
    pub fn level_offset(&self, k: usize) -> f64 {
        self.eps + k as f64 * self.h
    }

    /// `(x, y, U)` for every stored point, level by level.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().flat_map(move |(k, row)| {
            let s = self.level_offset(k);
            row.iter().enumerate().map(move |(i, &u)| (self.x[i], self.x[i] + s, u))
        })
    }

    /// Largest `|U − f|` over stored points with `y − x ≤ s_max`.
    pub fn sup_error(&self, s_max: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points()
            .filter(|(x, y, _)| y - x <= s_max + 1e-12)
            .map(|(x, y, u)| (u - f(x, y)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `x,y,U`, 17 significant digits.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,y,U")?;
        for (x, y, u) in self.points() {
            writeln!(out, "{x:.16e},{y:.16e},{u:.16e}")?;
        }
        Ok(())
    }
}

/// The two starting levels of a march together with the expansion they
/// came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub expansion: Expansion,
    pub grid: MarchGrid,
}

/// Seeds levels `ε` and `ε + h` on `n` equal steps of the data domain.
pub fn seed_from_data(data: &CauchyData, eps: f64, n: usize) -> Result<Seed> {
    let (a, b) = data.domain();
    if !(eps > 0.0) || eps > 1e-2 * (b - a) {
        return contract(format!("seed offset {eps} must lie in (0, 1e-2 X]"));
    }
    if n < 3 {
        return contract("a march needs at least 3 steps");
    }
    let h = (b - a) / n as f64;
    let x: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    let expansion = Expansion::new(data);
    let values = (0..2)
        .map(|k| {
            let s = eps + k as f64 * h;
            x[..n - k].iter().map(|&xi| expansion.eval(xi, xi + s)).collect()
        })
        .collect();
    Ok(Seed { expansion, grid: MarchGrid { h, eps, x, values } })
}

/// Advances `steps` levels past the seeds (fewer if the domain runs out).
pub fn march(seed: &Seed, steps: usize) -> Result<MarchGrid> {
    let Seed { expansion, grid } = seed;
    let ParamCase { alpha, beta, .. } = expansion.case;
    let h = grid.h;
    let n = grid.x.len();
    let levels = (steps + 2).min(n);
    // remainder V on the last two levels
    let mut prev2 = vec![0.0; n];
    let mut prev1 = vec![0.0; n - 1];
    let mut values = grid.values.clone();
    for k in 2..levels {
        let sc = grid.level_offset(k - 1);
        let c = h / (2.0 * sc);
        let den = 1.0 + c * (alpha + beta);
        let next = (0..n - k)
            .into_par_iter()
            .map(|i| {
                // E = (x_{i+1}, y), W = (x_i, y − h), D = (x_{i+1}, y − h)
                let (e, w, d) = (prev1[i + 1], prev1[i], prev2[i + 1]);
                let xc = grid.x[i] + 0.5 * h;
                let jet = expansion.eval(Taylor2::var_x(xc), Taylor2::var_y(xc + sc));
                let g = -residual_of_jet(&jet, expansion.case, xc, xc + sc);
                let v = (e - d + w + c * (beta * (e + d - w) - alpha * (e - w - d)) - h * h * g) / den;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Breakdown(format!("march produced {v} at level {k}, node {i}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let s = grid.level_offset(k);
        values.push(next.iter().enumerate().map(|(i, v)| v + expansion.eval(grid.x[i], grid.x[i] + s)).collect());
        prev2 = std::mem::replace(&mut prev1, next);
    }
    Ok(MarchGrid { values, ..grid.clone() })
}
