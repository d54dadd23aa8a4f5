//! Solvers for the three modified Cauchy problems on the singular line.
//!
//! With `t = (x+y)/2`, `r = (y−x)/2` and `σ = t + rμ`:
//!
//! * C1 uses the Riemann-method field of [`crate::riemann`].
//! * C2 (ε = β − α = ±1):
//!   `U = D[τ] + (r/π) ∫ [ν(σ) + ε τ'(σ) ln(r(1−μ²)/2)] sqrt((1+εμ)/(1−εμ)) dμ`.
//! * C3: `U = τ(t) + E[2ν − (ln 2 − 1) τ''] + G[τ'']` with
//!   `E[a] = (r²/π) ∫ a sqrt(1−μ²) dμ` and
//!   `G[b] = (r²/π) ∫ b (m ln r + 2m ln m − m − |μ| arccos|μ|) dμ`, `m = sqrt(1−μ²)`.
//!
//! Here `D[f] = (1/π) ∫ f(σ) (1−μ²)^(−1/2) dμ` and all integrals run over
//! `μ ∈ (−1, 1)`.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::epd::{limit_nu, limit_tau, CaseTag, LimitProbe, ParamCase, ScalarField, Side};
use crate::error::{contract, domain, Result};
use crate::expr::ScalarFn;
use crate::quad::{gauss_legendre, ThetaNodes, DEFAULT_NODES};
use crate::riemann::C1Field;
use crate::scalar::Real;

/// A modified Cauchy problem: case plus diagonal data on a common domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub case: ParamCase,
    pub tau: ScalarFn,
    pub nu: ScalarFn,
}

impl CauchyData {
    pub fn new(case: ParamCase, tau: ScalarFn, nu: ScalarFn) -> Result<CauchyData> {
        let (a, b) = tau.domain();
        let (c, d) = nu.domain();
        if (a - c).abs() > 1e-12 || (b - d).abs() > 1e-12 {
            return contract(format!("tau on [{a}, {b}] and nu on [{c}, {d}] must share a domain"));
        }
        Ok(CauchyData { case, tau, nu })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.tau.domain()
    }

    /// `a·self + b·other`, both problems in the same case.
    pub fn combine(&self, a: f64, other: &CauchyData, b: f64) -> Result<CauchyData> {
        use crate::expr::{Backing, Expr};
        if self.case != other.case {
            return contract("cannot superpose data from different cases");
        }
        let mix = |f: &ScalarFn, g: &ScalarFn| -> Result<ScalarFn> {
            match (f.backing(), g.backing()) {
                (Backing::Expr(p), Backing::Expr(q)) => ScalarFn::from_expr(
                    Expr::Add(
                        Box::new(Expr::Mul(Box::new(Expr::Num(a)), Box::new(p.clone()))),
                        Box::new(Expr::Mul(Box::new(Expr::Num(b)), Box::new(q.clone()))),
                    ),
                    f.domain(),
                ),
                _ => contract("superposition needs expression-backed data"),
            }
        };
        CauchyData::new(self.case, mix(&self.tau, &other.tau)?, mix(&self.nu, &other.nu)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Riemann,
    GeneralSolution,
}

/// General-solution field of the mixed case.
#[derive(Clone, Debug, PartialEq)]
pub struct C2Field {
    tau: ScalarFn,
    nu: ScalarFn,
    eps: f64,
    nodes: ThetaNodes,
}

impl ScalarField for C2Field {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        // σ = x + L sin²θ, μ = −cos 2θ; the weight sqrt((1+εμ)/(1−εμ)) dμ is
        // 4 sin²θ dθ for ε = 1 and 4 cos²θ dθ for ε = −1.
        let l = y - x;
        let r = l.scale(0.5);
        let ln_r2 = r.ln() + T::from_f64(LN_2);
        let n = &self.nodes;
        let (mut d, mut i) = (T::zero(), T::zero());
        for j in 0..n.len() {
            let s = n.sin2[j];
            let w = 4.0 * if self.eps > 0.0 { s } else { 1.0 - s };
            let sig = x + l.scale(s);
            let tau = self.tau.eval(sig);
            let dtau = self.tau.deriv(sig, 1).scale(self.eps);
            d += tau.scale(2.0 * n.plain[j]);
            i += (self.nu.eval(sig) + dtau * ln_r2).scale(n.plain[j] * w) + dtau.scale(n.log[j] * w);
        }
        (d + r * i).scale(1.0 / PI)
    }
}

/// General-solution field of the case α = β = −1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct C3Field {
    tau: ScalarFn,
    nu: ScalarFn,
    nodes: ThetaNodes,
    /// Gauss-Legendre nodes (sin²θ) and weights on each half of (0, π/2),
    /// for the term with a kink at θ = π/4.
    kink_sin2: Vec<f64>,
    kink_w: Vec<f64>,
}

impl C3Field {
    fn new(tau: ScalarFn, nu: ScalarFn, nodes: ThetaNodes) -> C3Field {
        let (gx, gw) = gauss_legendre(nodes.len().max(16) / 2);
        let quarter = 0.25 * PI;
        let mut kink_sin2 = Vec::with_capacity(2 * gx.len());
        let mut kink_w = Vec::with_capacity(2 * gx.len());
        for (lo, hi) in [(0.0, quarter), (quarter, 2.0 * quarter)] {
            for (g, w) in gx.iter().zip(&gw) {
                let th: f64 = lo + 0.5 * (hi - lo) * (g + 1.0);
                let mu = -(2.0 * th).cos();
                // |μ| arccos|μ| dμ with dμ = 2 sin 2θ dθ
                let weight = 0.5 * (hi - lo) * w * mu.abs() * mu.abs().acos() * 2.0 * (2.0 * th).sin();
                kink_sin2.push(th.sin().powi(2));
                kink_w.push(weight);
            }
        }
        C3Field { tau, nu, nodes, kink_sin2, kink_w }
    }
}

impl ScalarField for C3Field {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        let l = y - x;
        let r = l.scale(0.5);
        let t = (x + y).scale(0.5);
        let ln_r = r.ln();
        let n = &self.nodes;
        let mut acc = T::zero();
        for j in 0..n.len() {
            let s = n.sin2[j];
            // m dμ = 8 sin²θ cos²θ dθ
            let m8 = 8.0 * s * (1.0 - s);
            let sig = x + l.scale(s);
            let b = self.tau.deriv(sig, 2);
            let a = self.nu.eval(sig).scale(2.0) - b.scale(LN_2 - 1.0);
            // E[a] + G[b] without the kink term; 2m ln m = m (2 ln 2 + 2 ln sin + 2 ln cos)
            let smooth = a + b * (ln_r - T::one() + T::from_f64(2.0 * LN_2));
            acc += smooth.scale(n.plain[j] * m8) + b.scale(n.log[j] * m8);
        }
        for (s, w) in self.kink_sin2.iter().zip(&self.kink_w) {
            acc -= self.tau.deriv(x + l.scale(*s), 2).scale(*w);
        }
        self.tau.eval(t) + r * r * acc.scale(1.0 / PI)
    }
}

/// Solution field of any of the three problems.
#[derive(Clone, Debug, PartialEq)]
pub enum CauchyField {
    C1(C1Field),
    C2(C2Field),
    C3(C3Field),
}

impl ScalarField for CauchyField {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        match self {
            CauchyField::C1(f) => f.eval(x, y),
            CauchyField::C2(f) => f.eval(x, y),
            CauchyField::C3(f) => f.eval(x, y),
        }
    }

    fn side(&self) -> Side {
        Side::Upper
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchySolution {
    pub data: CauchyData,
    pub field: CauchyField,
    pub method: Method,
}

impl CauchySolution {
    /// Checked evaluation inside the data triangle `a ≤ x < y ≤ b`.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let (a, b) = self.data.domain();
        if !(y > x) || x < a - 1e-12 || y > b + 1e-12 {
            return domain(format!("({x}, {y}) outside the triangle {a} <= x < y <= {b}"));
        }
        Ok(self.field.eval(x, y))
    }
}

pub fn solve_cauchy(data: &CauchyData) -> Result<CauchySolution> {
    solve_cauchy_with(data, DEFAULT_NODES)
}

/// As [`solve_cauchy`] with `nodes` quadrature nodes in θ.
pub fn solve_cauchy_with(data: &CauchyData, nodes: usize) -> Result<CauchySolution> {
    let need_tau = if data.case.tag == CaseTag::C3 { 3 } else { 2 };
    if data.tau.smoothness() < need_tau || data.nu.smoothness() < 2 {
        return contract(format!(
            "{} needs tau in C^{need_tau} and nu in C^2; got C^{} and C^{}",
            data.case.label(),
            data.tau.smoothness(),
            data.nu.smoothness()
        ));
    }
    let nodes = ThetaNodes::new(nodes)?;
    let (tau, nu) = (data.tau.clone(), data.nu.clone());
    let (field, method) = match data.case.tag {
        CaseTag::C1 => (CauchyField::C1(C1Field::new(tau, nu, nodes)), Method::Riemann),
        CaseTag::C2 => {
            let eps = data.case.epsilon();
            (CauchyField::C2(C2Field { tau, nu, eps, nodes }), Method::GeneralSolution)
        }
        CaseTag::C3 => (CauchyField::C3(C3Field::new(tau, nu, nodes)), Method::GeneralSolution),
    };
    Ok(CauchySolution { data: data.clone(), field, method })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Tau,
    Nu,
}

/// Limit functionals of the solution at every grid point.
pub fn solution_trace(sol: &CauchySolution, which: Which, grid: &[f64], probe: &LimitProbe) -> Result<Vec<f64>> {
    let (a, b) = sol.data.domain();
    if let Some(x) = grid.iter().find(|&&x| x < a || x + probe.s0 > b + 1e-12) {
        return domain(format!("trace point {x} needs [x, x + s0] inside [{a}, {b}]"));
    }
    grid.par_iter()
        .map(|&x| match which {
            Which::Tau => limit_tau(&sol.field, sol.data.case, x, probe),
            Which::Nu => limit_nu(&sol.field, sol.data.case, x, probe),
        })
        .collect()
}
