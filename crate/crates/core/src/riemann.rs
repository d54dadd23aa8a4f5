//! Riemann function of the symmetric case α = β = 1/2 and the Riemann-method
//! representation of its modified Cauchy problem.
//!
//! For the point `(x, y)`, `x < y`, and `(ξ, η)` in its characteristic
//! triangle `x ≤ ξ < η ≤ y`,
//!
//! ```text
//! R(ξ, η; x, y) = (η − ξ) / sqrt((y − ξ)(η − x)) · F(1/2, 1/2; 1; z),
//! z = (ξ − x)(y − η) / ((y − ξ)(η − x)).
//! ```
//!
//! Near the diagonal, with `σ = ξ` and `δ = η − ξ → 0`,
//! `R ≈ δ K(σ) (ln(16/δ) + ln((y − σ)(σ − x)/(y − x))) / π` where
//! `K(σ) = 1/sqrt((y − σ)(σ − x))`. The diagonal kernel `K` and the log
//! factor give the representation
//!
//! ```text
//! U(x, y) = (1/π) ∫_x^y [τ(σ) + ν(σ)/2 · ln((y − σ)(σ − x)/(y − x))] K(σ) dσ,
//! ```
//!
//! evaluated in the Abel form `σ = x + (y − x) sin²θ`.

use std::f64::consts::PI;

use crate::epd::{CaseTag, ParamCase, ScalarField, Side};
use crate::error::{contract, domain, Result};
use crate::expr::ScalarFn;
use crate::quad::{QuadratureRule, ThetaNodes};
use crate::scalar::Real;
use crate::specfun::gauss_2f1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannFn {
    pub case: ParamCase,
    /// Smallest admissible `(η − ξ)/(y − x)` away from the vertex.
    pub margin: f64,
}

impl RiemannFn {
    pub fn new(case: ParamCase) -> Result<RiemannFn> {
        if case.tag != CaseTag::C1 {
            return contract(format!("Riemann function implemented for c1 only, got {}", case.label()));
        }
        Ok(RiemannFn { case, margin: 1e-3 })
    }

    /// Coefficients of the equation at `(ξ, η)`: `U_xy + a U_x + b U_y`.
    pub fn coefficients(&self, xi: f64, eta: f64) -> (f64, f64) {
        let d = eta - xi;
        (self.case.beta / d, -self.case.alpha / d)
    }
}

pub fn riemann_eval(r: &RiemannFn, xi: f64, eta: f64, x: f64, y: f64) -> Result<f64> {
    let l = y - x;
    if !(l > 0.0) {
        return domain(format!("vertex ({x}, {y}) must satisfy x < y"));
    }
    let tol = 1e-14 * l.max(1.0);
    if xi < x - tol || eta > y + tol || !(eta > xi) || (eta - xi) < r.margin * l {
        return domain(format!(
            "({xi}, {eta}) outside the admissible triangle of ({x}, {y}) with margin {}",
            r.margin
        ));
    }
    let (a, b) = ((y - xi).max(0.0), (eta - x).max(0.0));
    let z = (xi - x).max(0.0) * (y - eta).max(0.0) / (a * b);
    Ok((eta - xi) / (a * b).sqrt() * gauss_2f1(0.5, 0.5, 1.0, z)?)
}

/// Classical fourth-order Runge-Kutta for the characteristic ODEs.
fn rk4(f: impl Fn(f64, f64) -> f64, t0: f64, t1: f64, v0: f64, steps: usize) -> f64 {
    let h = (t1 - t0) / steps as f64;
    let mut v = v0;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(t, v);
        let k2 = f(t + 0.5 * h, v + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, v + 0.5 * h * k2);
        let k4 = f(t + h, v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    v
}

/// Largest deviation between `R` and the ODE solutions along both
/// characteristics through the vertex: `R_ξ = b R` on `η = y` and
/// `R_η = a R` on `ξ = x`, both starting from 1 at the vertex.
pub fn characteristic_check(r: &RiemannFn, x: f64, y: f64, samples: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=samples {
        let frac = k as f64 / (samples + 1) as f64;
        let xi = x + frac * (y - x) * (1.0 - 2.0 * r.margin);
        let ode = rk4(|t, v| r.coefficients(t, y).1 * v, x, xi, 1.0, 2000);
        worst = worst.max((riemann_eval(r, xi, y, x, y)? - ode).abs());
        let eta = y - frac * (y - x) * (1.0 - 2.0 * r.margin);
        let ode = rk4(|t, v| r.coefficients(x, t).0 * v, y, eta, 1.0, 2000);
        worst = worst.max((riemann_eval(r, x, eta, x, y)? - ode).abs());
    }
    Ok(worst)
}

/// Adjoint operator `v_ξη − (a v)_ξ − (b v)_η` applied to `R(·, ·; x, y)` by
/// central differences, Richardson-extrapolated from steps `2h` and `h`.
pub fn adjoint_residual(r: &RiemannFn, xi: f64, eta: f64, x: f64, y: f64, h: f64) -> Result<f64> {
    let coarse = adjoint_fd(r, xi, eta, x, y, 2.0 * h)?;
    let fine = adjoint_fd(r, xi, eta, x, y, h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn adjoint_fd(r: &RiemannFn, xi: f64, eta: f64, x: f64, y: f64, h: f64) -> Result<f64> {
    let v = |p: f64, q: f64| riemann_eval(r, p, q, x, y);
    let av = |p: f64, q: f64| -> Result<f64> { Ok(r.coefficients(p, q).0 * v(p, q)?) };
    let bv = |p: f64, q: f64| -> Result<f64> { Ok(r.coefficients(p, q).1 * v(p, q)?) };
    let vxe = (v(xi + h, eta + h)? - v(xi + h, eta - h)? - v(xi - h, eta + h)? + v(xi - h, eta - h)?) / (4.0 * h * h);
    let ax = (av(xi + h, eta)? - av(xi - h, eta)?) / (2.0 * h);
    let be = (bv(xi, eta + h)? - bv(xi, eta - h)?) / (2.0 * h);
    Ok(vxe - ax - be)
}

/// Diagonal kernel `K(σ)` and log factor `ln((y−σ)(σ−x)/(y−x))` read off
/// the Riemann function's expansion at the diagonal.
pub fn diagonal_kernel(sigma: f64, x: f64, y: f64) -> (f64, f64) {
    let p = (y - sigma) * (sigma - x);
    (1.0 / p.sqrt(), (p / (y - x)).ln())
}

/// Riemann-method field for the symmetric case, on either side of the
/// diagonal. Below the diagonal the field is `W(y, x)` where `W` is built
/// from `(τ, −ν)`.
#[derive(Clone, Debug, PartialEq)]
pub struct C1Field {
    tau: ScalarFn,
    nu: ScalarFn,
    nodes: ThetaNodes,
    side: Side,
}

impl C1Field {
    pub fn new(tau: ScalarFn, nu: ScalarFn, nodes: ThetaNodes) -> C1Field {
        C1Field { tau, nu, nodes, side: Side::Upper }
    }

    /// Lower-triangle companion whose limits from below are `(τ, −ν)` in the
    /// orientation `(x − y)(U_x − U_y)`.
    pub fn lower(tau: ScalarFn, nu: ScalarFn, nodes: ThetaNodes) -> C1Field {
        C1Field { tau, nu: nu.scaled(-1.0), nodes, side: Side::Lower }
    }

    pub fn tau(&self) -> &ScalarFn {
        &self.tau
    }

    pub fn nu(&self) -> &ScalarFn {
        &self.nu
    }

    fn upper_eval<T: Real>(&self, x: T, y: T) -> T {
        let l = y - x;
        let half_ln = l.ln().scale(0.5);
        let n = &self.nodes;
        let mut acc = T::zero();
        for j in 0..n.len() {
            let sig = x + l.scale(n.sin2[j]);
            let (t, v) = (self.tau.eval(sig), self.nu.eval(sig));
            acc += (t + half_ln * v).scale(2.0 * n.plain[j]) + v.scale(n.log[j]);
        }
        acc.scale(1.0 / PI)
    }
}

impl ScalarField for C1Field {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        match self.side {
            Side::Upper => self.upper_eval(x, y),
            Side::Lower => self.upper_eval(y, x),
        }
    }

    fn side(&self) -> Side {
        self.side
    }
}

/// `U(x, y)` from symmetric-case data on `[0, X]` by the Riemann method.
///
/// The rule's nodes carry both the plain and log weights. Points closer to
/// the diagonal than `1e-6 X` are rejected.
pub fn riemann_represent(tau: &ScalarFn, nu: &ScalarFn, x: f64, y: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(y > x) {
        return domain(format!("riemann_represent needs x < y, got ({x}, {y})"));
    }
    let (a, b) = tau.domain();
    let (c, d) = nu.domain();
    let lo = a.max(c);
    let hi = b.min(d);
    if x < lo - 1e-12 || y > hi + 1e-12 {
        return domain(format!("segment [{x}, {y}] not covered by the data domain [{lo}, {hi}]"));
    }
    if y - x < 1e-6 * hi.abs().max(1e-300) {
        return domain(format!("({x}, {y}) inside the diagonal margin 1e-6 X"));
    }
    let f = C1Field::new(tau.clone(), nu.clone(), ThetaNodes::from_rule(rule));
    Ok(f.eval(x, y))
}
