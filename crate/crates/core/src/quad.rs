//! Product integration for the Abel weight `t^(-1/2) (x-t)^(-1/2)` on `(0, x)`
//! and its logarithmic companion with the extra factor `ln(t/x)`.
//!
//! With `t = x sin²θ` the plain integral is `∫₀^{π/2} 2 f dθ` and the log
//! integral is `∫₀^{π/2} 4 f ln(sin θ) dθ`. Because `f(x sin²θ)` is even and
//! π-periodic in θ, the midpoint rule in θ is spectrally accurate for the
//! plain weight, and the log weight is absorbed into Fourier product weights
//! built on the same nodes from `ln sin θ = −ln 2 − Σ cos(2kθ)/k`.

use std::f64::consts::{LN_2, PI};

use crate::error::{contract, domain, Result};
use crate::expr::ScalarFn;
use crate::scalar::Real;
use crate::specfun::{clausen2, SpecialConstant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    AbelPlain,
    AbelLog,
}

impl KernelKind {
    /// Exact value of the rule applied to `f ≡ 1`.
    pub fn unit_integral(self) -> f64 {
        match self {
            KernelKind::AbelPlain => PI,
            KernelKind::AbelLog => -2.0 * PI * LN_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub kernel: KernelKind,
    /// θ_j in (0, π/2)
    pub theta: Vec<f64>,
    /// sin²θ_j
    pub sin2: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn node_count(&self) -> usize {
        self.theta.len()
    }

    /// `∫₀^x f(t) w(t) dt` for the rule's weight `w`.
    pub fn apply(&self, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.sin2.iter().zip(&self.weights).map(|(s, w)| w * f(x * s)).sum()
    }

    /// Same sum over generic scalars; `map` receives `sin²θ_j`.
    pub fn sum<T: Real>(&self, mut map: impl FnMut(f64) -> T) -> T {
        let mut acc = T::zero();
        for (s, w) in self.sin2.iter().zip(&self.weights) {
            acc += map(*s).scale(*w);
        }
        acc
    }

    /// The rule for `ln cos θ` in place of `ln sin θ`, on the same nodes.
    pub fn reflected(&self) -> QuadratureRule {
        let mut r = self.clone();
        r.weights.reverse();
        r
    }
}

pub const DEFAULT_NODES: usize = 64;

pub fn build_rule(kernel: KernelKind, node_count: usize) -> Result<QuadratureRule> {
    if node_count < 4 {
        return contract(format!("quadrature needs at least 4 nodes, got {node_count}"));
    }
    let n = node_count;
    let nf = n as f64;
    let theta: Vec<f64> = (1..=n).map(|j| (2 * j - 1) as f64 * PI / (4.0 * nf)).collect();
    let sin2 = theta.iter().map(|t| t.sin().powi(2)).collect();
    let weights = match kernel {
        KernelKind::AbelPlain => vec![PI / nf; n],
        KernelKind::AbelLog => theta
            .iter()
            .map(|&t| {
                let mut w = -0.5 * PI * LN_2 / nf;
                for k in 1..n {
                    let kf = k as f64;
                    w -= PI / (2.0 * nf * kf) * (2.0 * kf * t).cos();
                }
                4.0 * w
            })
            .collect(),
    };
    Ok(QuadratureRule { kernel, theta, sin2, weights })
}

/// Midpoint nodes in θ with the plain and log weights the field
/// representations use, for integrands that are functions of `sin²θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaNodes {
    pub sin2: Vec<f64>,
    /// `∫₀^{π/2} g dθ ≈ Σ plain_j g_j`
    pub plain: Vec<f64>,
    /// `∫₀^{π/2} g (2 ln sin θ + 2 ln cos θ) dθ ≈ Σ log_j g_j`
    pub log: Vec<f64>,
}

impl ThetaNodes {
    pub fn new(node_count: usize) -> Result<ThetaNodes> {
        Ok(ThetaNodes::from_rule(&build_rule(KernelKind::AbelLog, node_count)?))
    }

    /// Companion weights on the nodes of an existing rule.
    pub fn from_rule(rule: &QuadratureRule) -> ThetaNodes {
        let n = rule.node_count();
        let log = match rule.kernel {
            KernelKind::AbelLog => (0..n).map(|j| 0.5 * (rule.weights[j] + rule.weights[n - 1 - j])).collect(),
            KernelKind::AbelPlain => {
                let l = build_rule(KernelKind::AbelLog, n.max(4)).expect("n >= 4");
                (0..n).map(|j| 0.5 * (l.weights[j] + l.weights[n - 1 - j])).collect()
            }
        };
        ThetaNodes { sin2: rule.sin2.clone(), plain: vec![0.5 * PI / n as f64; n], log }
    }

    pub fn len(&self) -> usize {
        self.sin2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sin2.is_empty()
    }
}

/// `(1/Γ(1/2)²) ∫₀^x ν(t) t^(-1/2) (x-t)^(-1/2) ln(t/x) dt`.
pub fn abel_log_operator(nu: &ScalarFn, x: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("abel_log_operator needs x > 0, got {x}"));
    }
    if rule.kernel != KernelKind::AbelLog {
        return contract("abel_log_operator needs an ABEL_LOG rule");
    }
    Ok(rule.apply(x, |t| nu.eval(t)) / SpecialConstant::GammaHalfSq.value())
}

/// θ-form integrand of `kernel` for `f` on `(0, x)`.
fn theta_integrand(kernel: KernelKind, f: &ScalarFn, x: f64) -> impl Fn(f64) -> f64 + '_ {
    move |t: f64| {
        let s = t.sin();
        let v = f.eval(x * s * s);
        match kernel {
            KernelKind::AbelPlain => 2.0 * v,
            KernelKind::AbelLog => 4.0 * v * s.ln(),
        }
    }
}

/// Adaptive reference value of the weighted integral on `(0, x)`.
pub fn reference_integral(kernel: KernelKind, f: &ScalarFn, x: f64) -> Result<f64> {
    reference::integrate(theta_integrand(kernel, f, x), 0.0, 0.5 * PI, 1e-13).map(|r| r.0)
}

/// Empirical order from node counts n0, 2n0, 4n0 against the adaptive
/// reference at `x`. Returns `f64::INFINITY` when the errors reach the
/// rounding floor before a ratio can be formed.
pub fn convergence_order(kernel: KernelKind, f: &ScalarFn, x: f64, n0: usize) -> Result<f64> {
    let exact = reference_integral(kernel, f, x)?;
    let floor = 1e-13 * exact.abs().max(1.0);
    let err = |n| -> Result<f64> { Ok((build_rule(kernel, n)?.apply(x, |t| f.eval(t)) - exact).abs()) };
    let (e1, e2, e4) = (err(n0)?, err(2 * n0)?, err(4 * n0)?);
    if e4 > floor {
        Ok((e2 / e4).log2())
    } else if e2 > floor {
        Ok((e1 / e2).log2())
    } else {
        Ok(f64::INFINITY)
    }
}

/// Antiderivatives in θ of the Abel panel moments, all vanishing at θ = 0:
/// `[∫2, ∫2 sin², ∫4 ln sin, ∫4 sin² ln sin, ∫4 ln cos, ∫4 sin² ln cos]`.
///
/// Used for exact integration of piecewise-linear data against the plain and
/// log weights.
pub fn panel_antiderivatives(theta: f64) -> Result<[f64; 6]> {
    if !(0.0..=0.5 * PI + 1e-14).contains(&theta) {
        return domain(format!("panel moments need θ in [0, π/2], got {theta}"));
    }
    let theta = theta.min(0.5 * PI);
    let s2t = (2.0 * theta).sin();
    // ∫₀^θ ln sin and ∫₀^θ ln cos via the Clausen function
    let f_ls = -theta * LN_2 - 0.5 * clausen2(2.0 * theta)?;
    let f_lc = -theta * LN_2 + 0.5 * clausen2((PI - 2.0 * theta).max(0.0))?;
    let sq = 0.5 * theta - 0.25 * s2t;
    let b_s = if theta == 0.0 { 0.0 } else { 0.5 * s2t * theta.sin().ln() };
    let b_c = if theta >= 0.5 * PI { 0.0 } else { 0.5 * s2t * theta.cos().ln() };
    let sls = 0.5 * f_ls - 0.5 * (b_s - 0.5 * theta - 0.25 * s2t);
    let slc = 0.5 * f_lc - 0.5 * (b_c + 0.5 * theta - 0.25 * s2t);
    Ok([2.0 * theta, 2.0 * sq, 4.0 * f_ls, 4.0 * sls, 4.0 * f_lc, 4.0 * slc])
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Adaptive Gauss-Kronrod integration, independent of the production rules.
pub mod reference {
    use crate::error::{Error, Result};

    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728_0,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];

    /// Kronrod value, |Kronrod − Gauss| and the Kronrod sum of |f|.
    fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        let mut abs = WGK[7] * fc.abs();
        for j in 0..7 {
            let d = h * XGK[j];
            let (f1, f2) = (f(c - d), f(c + d));
            k += WGK[j] * (f1 + f2);
            abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                g += WG[j / 2] * (f1 + f2);
            }
        }
        (k * h, ((k - g) * h).abs(), abs * h.abs())
    }

    /// Returns `(value, error estimate)`.
    pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
        let f: &dyn Fn(f64) -> f64 = &f;
        let mut stack = vec![(a, b, 0u32)];
        let (mut total, mut err) = (0.0, 0.0);
        let mut evals = 0usize;
        while let Some((lo, hi, depth)) = stack.pop() {
            let (v, e, abs) = gk15(f, lo, hi);
            evals += 1;
            if !v.is_finite() {
                return Err(Error::Breakdown(format!("non-finite integrand on [{lo}, {hi}]")));
            }
            let local_tol = tol * (hi - lo) / (b - a);
            // below 50 ulps of the panel magnitude the estimate is rounding noise
            if e <= local_tol.max(50.0 * f64::EPSILON * abs) || depth >= 60 {
                total += v;
                err += e;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((lo, mid, depth + 1));
                stack.push((mid, hi, depth + 1));
            }
            if evals > 2_000_000 {
                return Err(Error::Breakdown("adaptive quadrature exceeded its budget".into()));
            }
        }
        if !total.is_finite() {
            return Err(Error::Breakdown("adaptive quadrature produced a non-finite value".into()));
        }
        Ok((total, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_integrals() {
        let p = build_rule(KernelKind::AbelPlain, 16).unwrap();
        for x in [0.1, 1.0, 10.0] {
            assert!((p.apply(x, |_| 1.0) - PI).abs() <= 1e-10);
        }
        assert!((p.apply(1.0, |t| t) - 0.5 * PI).abs() <= 1e-9);
        let l = build_rule(KernelKind::AbelLog, 32).unwrap();
        assert!((l.apply(2.5, |_| 1.0) + 2.0 * PI * LN_2).abs() <= 1e-8);
        assert!(build_rule(KernelKind::AbelLog, 3).is_err());
    }

    #[test]
    fn abel_log_operator_examples() {
        let rule = build_rule(KernelKind::AbelLog, DEFAULT_NODES).unwrap();
        let d = (0.0, 5.0);
        let one = abel_log_operator(&ScalarFn::constant(1.0, d), 0.7, &rule).unwrap();
        assert!((one + 2.0 * LN_2).abs() <= 1e-8);
        let zero = abel_log_operator(&ScalarFn::constant(0.0, d), 0.7, &rule).unwrap();
        assert_eq!(zero, 0.0);
        let m2 = abel_log_operator(&ScalarFn::constant(-2.0, d), 3.0, &rule).unwrap();
        assert!((m2 - 4.0 * LN_2).abs() <= 1e-8);
        assert!(abel_log_operator(&ScalarFn::constant(1.0, d), 0.0, &rule).is_err());
        let plain = build_rule(KernelKind::AbelPlain, 16).unwrap();
        assert!(abel_log_operator(&ScalarFn::constant(1.0, d), 1.0, &plain).is_err());
    }

    #[test]
    fn log_rule_matches_reference_on_smooth_data() {
        let f = ScalarFn::parse("exp(x)*cos(3*x)", (0.0, 2.0)).unwrap();
        let rule = build_rule(KernelKind::AbelLog, 64).unwrap();
        let want = reference_integral(KernelKind::AbelLog, &f, 1.7).unwrap();
        assert_relative_eq!(rule.apply(1.7, |t| f.eval(t)), want, epsilon = 1e-12);
    }

    #[test]
    fn reflected_rule_integrates_log_cos() {
        // ∫₀^{π/2} 4 sin²θ ln cos θ dθ = -π ln 2 - π/2 ... checked against GK
        let r = build_rule(KernelKind::AbelLog, 48).unwrap().reflected();
        let got: f64 = r.sin2.iter().zip(&r.weights).map(|(s, w)| w * s).sum();
        let want = reference::integrate(|t: f64| 4.0 * t.sin().powi(2) * t.cos().ln(), 0.0, 0.5 * PI, 1e-14)
            .unwrap()
            .0;
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn convergence_orders() {
        let one = ScalarFn::parse("1", (0.0, 1.0)).unwrap();
        assert!(convergence_order(KernelKind::AbelPlain, &one, 1.0, 4).unwrap() >= 2.0);
        let rough = ScalarFn::parse("sqrt(x)^3 + 1", (0.0, 1.0)).unwrap();
        for k in [KernelKind::AbelPlain, KernelKind::AbelLog] {
            let p = convergence_order(k, &rough, 1.0, 8).unwrap();
            assert!(p >= 2.0 && p.is_finite(), "{k:?}: {p}");
        }
    }

    #[test]
    fn panel_antiderivatives_match_reference() {
        for th in [0.0, 0.2, 0.785, 1.3, 0.5 * PI] {
            let a = panel_antiderivatives(th).unwrap();
            let q = |g: &dyn Fn(f64) -> f64| reference::integrate(g, 0.0, th.max(1e-300), 1e-14).unwrap().0;
            let want = [
                2.0 * th,
                q(&|t: f64| 2.0 * t.sin().powi(2)),
                q(&|t: f64| 4.0 * t.sin().ln()),
                q(&|t: f64| 4.0 * t.sin().powi(2) * t.sin().ln()),
                q(&|t: f64| 4.0 * t.cos().ln()),
                q(&|t: f64| 4.0 * t.sin().powi(2) * t.cos().ln()),
            ];
            for k in 0..6 {
                assert!((a[k] - want[k]).abs() <= 1e-12, "θ={th} k={k}: {} vs {}", a[k], want[k]);
            }
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert_relative_eq!(s, 2.0 / 19.0, epsilon = 1e-14);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    fn poly(c: &[f64]) -> impl Fn(f64) -> f64 + '_ {
        move |t| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck)
    }

    proptest! {
        #[test]
        fn linearity(
            f in prop::collection::vec(-1.0f64..1.0, 1..6),
            g in prop::collection::vec(-1.0f64..1.0, 1..6),
            a in -10.0f64..10.0,
            b in -10.0f64..10.0,
            x in 0.05f64..3.0,
        ) {
            for kind in [KernelKind::AbelPlain, KernelKind::AbelLog] {
                let r = build_rule(kind, DEFAULT_NODES).unwrap();
                let (pf, pg) = (poly(&f), poly(&g));
                let lhs = r.apply(x, |t| a * pf(t) + b * pg(t));
                let rhs = a * r.apply(x, &pf) + b * r.apply(x, &pg);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn log_kernel_sign(c in prop::collection::vec(0.0f64..1.0, 1..6), x in 0.05f64..3.0) {
            let r = build_rule(KernelKind::AbelLog, DEFAULT_NODES).unwrap();
            prop_assert!(r.apply(x, poly(&c)) <= 1e-14);
        }
    }
}
