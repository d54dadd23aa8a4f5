//! The equation `U_xy + β/(y−x) U_x − α/(y−x) U_y = 0`, its residual, and the
//! log-corrected limit functionals on the singular line.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, domain, Error, Result};
use crate::expr::{parse_xy, Expr, ScalarFn};
use crate::scalar::{Real, Taylor2};
use crate::specfun::SpecialConstant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    C1,
    C2,
    C3,
}

/// Sign assignment for the mixed case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum C2Ordering {
    /// α = +1/2, β = −1/2
    #[default]
    AlphaPlus,
    /// α = −1/2, β = +1/2
    AlphaMinus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamCase {
    pub tag: CaseTag,
    pub alpha: f64,
    pub beta: f64,
}

impl ParamCase {
    pub const C1: ParamCase = ParamCase { tag: CaseTag::C1, alpha: 0.5, beta: 0.5 };
    pub const C3: ParamCase = ParamCase { tag: CaseTag::C3, alpha: -0.5, beta: -0.5 };

    pub fn c2(ordering: C2Ordering) -> ParamCase {
        match ordering {
            C2Ordering::AlphaPlus => ParamCase { tag: CaseTag::C2, alpha: 0.5, beta: -0.5 },
            C2Ordering::AlphaMinus => ParamCase { tag: CaseTag::C2, alpha: -0.5, beta: 0.5 },
        }
    }

    /// Classifies `(α, β)`; both must have modulus exactly 1/2.
    pub fn new(alpha: f64, beta: f64) -> Result<ParamCase> {
        if alpha.abs() != 0.5 || beta.abs() != 0.5 {
            return contract(format!("|alpha| = |beta| = 1/2 required, got ({alpha}, {beta})"));
        }
        let tag = match (alpha > 0.0, beta > 0.0) {
            (true, true) => CaseTag::C1,
            (false, false) => CaseTag::C3,
            _ => CaseTag::C2,
        };
        Ok(ParamCase { tag, alpha, beta })
    }

    /// `c1`, `c2` (α = +1/2), `c2-alt` (α = −1/2), `c3`.
    pub fn parse(s: &str) -> Result<ParamCase> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(ParamCase::C1),
            "c2" => Ok(ParamCase::c2(C2Ordering::AlphaPlus)),
            "c2-alt" => Ok(ParamCase::c2(C2Ordering::AlphaMinus)),
            "c3" => Ok(ParamCase::C3),
            other => contract(format!("unknown case `{other}` (expected c1, c2, c2-alt or c3)")),
        }
    }

    /// `β − α`: ±1 in the mixed case, 0 otherwise.
    pub fn epsilon(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn label(&self) -> &'static str {
        match (self.tag, self.alpha > 0.0) {
            (CaseTag::C1, _) => "c1",
            (CaseTag::C2, true) => "c2",
            (CaseTag::C2, false) => "c2-alt",
            (CaseTag::C3, _) => "c3",
        }
    }
}

impl fmt::Display for ParamCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (alpha = {}, beta = {})", self.label(), self.alpha, self.beta)
    }
}

/// Which side of the diagonal a field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// `x < y`
    Upper,
    /// `y < x`
    Lower,
}

/// A field written once against [`Real`], so derivatives come from jets.
pub trait ScalarField: Send + Sync {
    fn eval<T: Real>(&self, x: T, y: T) -> T;

    fn side(&self) -> Side {
        Side::Upper
    }
}

/// Object-safe view of a solution field: value and second-order jet.
pub trait Field: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn jet(&self, x: f64, y: f64) -> Taylor2<f64>;
    fn region(&self) -> Side;
}

impl<F: ScalarField> Field for F {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)
    }

    fn jet(&self, x: f64, y: f64) -> Taylor2<f64> {
        self.eval(Taylor2::var_x(x), Taylor2::var_y(y))
    }

    fn region(&self) -> Side {
        self.side()
    }
}

/// Field given by a two-variable expression.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprField {
    pub expr: Expr,
    pub side: Side,
}

impl ExprField {
    pub fn parse(src: &str) -> Result<ExprField> {
        Ok(ExprField { expr: parse_xy(src)?, side: Side::Upper })
    }
}

impl ScalarField for ExprField {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        self.expr.eval(x, y)
    }

    fn side(&self) -> Side {
        self.side
    }
}

/// Value-only field whose derivatives come from central differences.
///
/// The step is `s/10` with `s = |y − x|`, kept within `[1e-5, 1e-4]` for
/// accuracy and capped at `s/4` so the stencil never reaches the diagonal.
pub struct FdField<F> {
    pub f: F,
    pub side: Side,
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> FdField<F> {
    pub fn new(f: F, side: Side) -> Self {
        FdField { f, side }
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Field for FdField<F> {
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    fn jet(&self, x: f64, y: f64) -> Taylor2<f64> {
        let s = (y - x).abs();
        let h = (s / 10.0).clamp(1e-5, 1e-4).min(s / 4.0);
        let f = &self.f;
        let c = f(x, y);
        let (xp, xm, yp, ym) = (f(x + h, y), f(x - h, y), f(x, y + h), f(x, y - h));
        let xy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        Taylor2 {
            v: c,
            x: (xp - xm) / (2.0 * h),
            y: (yp - ym) / (2.0 * h),
            xx: (xp - 2.0 * c + xm) / (h * h),
            xy,
            yy: (yp - 2.0 * c + ym) / (h * h),
        }
    }

    fn region(&self) -> Side {
        self.side
    }
}

/// `U_xy + β/(y−x) U_x − α/(y−x) U_y` at `(x, y)`.
pub fn residual(field: &dyn Field, case: ParamCase, x: f64, y: f64) -> Result<f64> {
    if x == y {
        return domain(format!("residual undefined on the diagonal (x = y = {x})"));
    }
    let inside = match field.region() {
        Side::Upper => y > x,
        Side::Lower => y < x,
    };
    if !inside {
        return domain(format!("({x}, {y}) lies outside the field's triangle"));
    }
    Ok(residual_of_jet(&field.jet(x, y), case, x, y))
}

pub fn residual_of_jet(j: &Taylor2<f64>, case: ParamCase, x: f64, y: f64) -> f64 {
    let d = y - x;
    j.xy + case.beta / d * j.x - case.alpha / d * j.y
}

/// Settings of the geometric ladder `s_k = s0 2^(−k)`, `k = 0..=levels`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitProbe {
    pub s0: f64,
    pub levels: usize,
    /// Largest admissible fit residual, relative to `max(1, |limit|)`.
    pub tolerance: f64,
    /// Source of the trace derivatives needed by C2 and C3.
    pub trace: TraceDerivative,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum TraceDerivative {
    /// Ladder limits of `U_x + U_y` and `U_xx + 2U_xy + U_yy`.
    #[default]
    Ladder,
    /// Derivatives of a known trace function.
    Given(ScalarFn),
}

impl Default for LimitProbe {
    fn default() -> Self {
        LimitProbe { s0: 1e-3, levels: 10, tolerance: 1e-6, trace: TraceDerivative::Ladder }
    }
}

impl LimitProbe {
    fn offsets(&self) -> Vec<f64> {
        (0..=self.levels).map(|k| self.s0 * 0.5f64.powi(k as i32)).collect()
    }
}

/// Least-squares fit of `g(s) ≈ c0 + c1 s ln s + c2 s + c3 s² ln s + c4 s²` on
/// the ladder; returns
/// `c0` and the largest fit residual.
pub fn ladder_fit(s: &[f64], g: &[f64]) -> Result<(f64, f64)> {
    let n = s.len();
    if n < 6 || g.len() != n {
        return contract("ladder fit needs at least 6 matching samples");
    }
    let s0 = s.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(n, 5, |i, j| {
        let u = s[i] / s0;
        match j {
            0 => 1.0,
            1 => u * u.ln(),
            2 => u,
            3 => u * u * u.ln(),
            _ => u * u,
        }
    });
    let b = DVector::from_column_slice(g);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Breakdown(format!("ladder least squares failed: {e}")))?;
    let r = (&a * &c - &b).amax();
    Ok((c[0], r))
}

fn ladder_limit(x: f64, probe: &LimitProbe, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let s = probe.offsets();
    let vals = s.iter().map(|&s| g(s)).collect::<Result<Vec<_>>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::LimitNotFound { x, residual: f64::INFINITY, tolerance: probe.tolerance });
    }
    let (c0, r) = ladder_fit(&s, &vals)?;
    let tol = probe.tolerance * c0.abs().max(1.0);
    if r > tol {
        return Err(Error::LimitNotFound { x, residual: r, tolerance: tol });
    }
    Ok(c0)
}

fn point(field: &dyn Field, x: f64, s: f64) -> (f64, f64, f64) {
    match field.region() {
        Side::Upper => (x, x + s, 1.0),
        Side::Lower => (x, x - s, -1.0),
    }
}

/// Normal derivative toward the interior: `U_y − U_x` above the diagonal,
/// `U_x − U_y` below it.
fn normal(field: &dyn Field, x: f64, s: f64) -> Taylor2<f64> {
    let (px, py, sign) = point(field, x, s);
    let j = field.jet(px, py);
    Taylor2 { v: sign * (j.y - j.x), ..j }
}

/// `d/dx U(x,x)` or `d²/dx² U(x,x)` as configured in the probe.
pub fn trace_derivative(field: &dyn Field, x: f64, order: usize, probe: &LimitProbe) -> Result<f64> {
    match &probe.trace {
        TraceDerivative::Given(f) => f.eval_deriv(x, order),
        TraceDerivative::Ladder => ladder_limit(x, probe, |s| {
            let (px, py, _) = point(field, x, s);
            let j = field.jet(px, py);
            Ok(match order {
                1 => j.x + j.y,
                2 => j.xx + 2.0 * j.xy + j.yy,
                _ => return contract("trace derivative order must be 1 or 2"),
            })
        }),
    }
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() {
        return domain(format!("limit point {x} is not finite"));
    }
    Ok(())
}

/// The case-specific `ν` functional at `x`.
pub fn limit_nu(field: &dyn Field, case: ParamCase, x: f64, probe: &LimitProbe) -> Result<f64> {
    check_x(x)?;
    match case.tag {
        CaseTag::C1 => ladder_limit(x, probe, |s| Ok(s * normal(field, x, s).v)),
        CaseTag::C2 => {
            let dtau = trace_derivative(field, x, 1, probe)?;
            let c2 = SpecialConstant::C2Const.value();
            let eps = case.epsilon();
            ladder_limit(x, probe, |s| Ok(normal(field, x, s).v - eps * dtau * (s.ln() + c2)))
        }
        CaseTag::C3 => {
            let d2tau = trace_derivative(field, x, 2, probe)?;
            let c3 = SpecialConstant::C3Const.value();
            ladder_limit(x, probe, |s| Ok(normal(field, x, s).v / s - d2tau * (0.5 * s.ln() + c3)))
        }
    }
}

/// The case-specific `τ` functional at `x`; for C1 this evaluates `ν` first.
pub fn limit_tau(field: &dyn Field, case: ParamCase, x: f64, probe: &LimitProbe) -> Result<f64> {
    check_x(x)?;
    let value = |s: f64| {
        let (px, py, _) = point(field, x, s);
        field.value(px, py)
    };
    match case.tag {
        CaseTag::C1 => {
            let nu = limit_nu(field, case, x, probe)?;
            let c = SpecialConstant::PsiHalfMinusPsiOne.value();
            ladder_limit(x, probe, |s| Ok(value(s) - nu * (0.5 * s.ln() + c)))
        }
        CaseTag::C2 | CaseTag::C3 => ladder_limit(x, probe, |s| Ok(value(s))),
    }
}

/// Both functionals at `x`, as `(τ, ν)`.
pub fn limits(field: &dyn Field, case: ParamCase, x: f64, probe: &LimitProbe) -> Result<(f64, f64)> {
    Ok((limit_tau(field, case, x, probe)?, limit_nu(field, case, x, probe)?))
}

/// Closed-form solutions with known diagonal data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Catalogue {
    Const(f64),
    /// `x + y`, for C1 and C3
    Sum,
    /// `ln(y − x)`, for C1
    LogGap,
    /// `y − x`, for C2
    Gap,
    /// `(x − y)²`, for C3
    GapSquared,
}

impl Catalogue {
    pub fn all() -> [Catalogue; 5] {
        [Catalogue::Const(1.5), Catalogue::Sum, Catalogue::LogGap, Catalogue::Gap, Catalogue::GapSquared]
    }

    pub fn source(&self) -> String {
        match self {
            Catalogue::Const(c) => format!("{c}"),
            Catalogue::Sum => "x + y".into(),
            Catalogue::LogGap => "ln(y - x)".into(),
            Catalogue::Gap => "y - x".into(),
            Catalogue::GapSquared => "(x - y)^2".into(),
        }
    }

    pub fn field(&self) -> ExprField {
        ExprField::parse(&self.source()).expect("catalogue sources parse")
    }

    pub fn solves(&self, case: CaseTag) -> bool {
        matches!(
            (self, case),
            (Catalogue::Const(_), _)
                | (Catalogue::Sum, CaseTag::C1 | CaseTag::C3)
                | (Catalogue::LogGap, CaseTag::C1)
                | (Catalogue::Gap, CaseTag::C2)
                | (Catalogue::GapSquared, CaseTag::C3)
        )
    }

    /// Diagonal data `(τ(x), ν(x))` in `case`.
    pub fn trace(&self, case: CaseTag, x: f64) -> Option<(f64, f64)> {
        if !self.solves(case) {
            return None;
        }
        Some(match self {
            Catalogue::Const(c) => (*c, 0.0),
            Catalogue::Sum => (2.0 * x, 0.0),
            Catalogue::LogGap => (4.0 * LN_2, 2.0),
            Catalogue::Gap => (0.0, 2.0),
            Catalogue::GapSquared => (0.0, 4.0),
        })
    }

    /// Diagonal data as functions on `domain`.
    pub fn data(&self, case: CaseTag, domain: (f64, f64)) -> Option<(ScalarFn, ScalarFn)> {
        if !self.solves(case) {
            return None;
        }
        let (t, n) = match self {
            Catalogue::Const(c) => (format!("{c}"), "0".to_string()),
            Catalogue::Sum => ("2*x".into(), "0".into()),
            Catalogue::LogGap => ("4*ln2".into(), "2".into()),
            Catalogue::Gap => ("0".into(), "2".into()),
            Catalogue::GapSquared => ("0".into(), "4".into()),
        };
        Some((ScalarFn::parse(&t, domain).ok()?, ScalarFn::parse(&n, domain).ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn probe() -> LimitProbe {
        LimitProbe::default()
    }

    fn cases() -> [ParamCase; 4] {
        [ParamCase::C1, ParamCase::c2(C2Ordering::AlphaPlus), ParamCase::c2(C2Ordering::AlphaMinus), ParamCase::C3]
    }

    #[test]
    fn case_invariants() {
        for c in cases() {
            assert_eq!(c.alpha.abs(), 0.5);
            assert_eq!(c.beta.abs(), 0.5);
            assert_eq!(ParamCase::new(c.alpha, c.beta).unwrap(), c);
            assert_eq!(ParamCase::parse(c.label()).unwrap(), c);
        }
        assert_eq!(ParamCase::c2(C2Ordering::AlphaPlus).alpha * ParamCase::c2(C2Ordering::AlphaPlus).beta, -0.25);
        assert!(ParamCase::new(0.3, 0.5).is_err());
        assert!(ParamCase::parse("c4").is_err());
    }

    #[test]
    fn residual_examples() {
        let c = ExprField::parse("5").unwrap();
        for case in cases() {
            assert_eq!(residual(&c, case, 0.2, 0.7).unwrap(), 0.0);
        }
        let r = |src: &str, case| residual(&ExprField::parse(src).unwrap(), case, 0.2, 0.7).unwrap();
        assert!(r("x + y", ParamCase::C1).abs() < 1e-15);
        assert!(r("ln(y - x)", ParamCase::C1).abs() < 1e-14);
        assert!(r("(x - y)^2", ParamCase::C3).abs() < 1e-14);
        assert!(r("ln(y - x)", ParamCase::C3).abs() > 1.0);
        assert!(residual(&c, ParamCase::C1, 0.4, 0.4).is_err());
        assert!(residual(&c, ParamCase::C1, 0.5, 0.4).is_err());
    }

    #[test]
    fn limit_examples() {
        let p = probe();
        let f = |s: &str| ExprField::parse(s).unwrap();
        let c2 = ParamCase::c2(C2Ordering::AlphaPlus);
        assert!((limit_nu(&f("ln(y-x)"), ParamCase::C1, 0.4, &p).unwrap() - 2.0).abs() <= 1e-6);
        assert!((limit_tau(&f("ln(y-x)"), ParamCase::C1, 0.4, &p).unwrap() - 4.0 * LN_2).abs() <= 1e-6);
        assert!((limit_nu(&f("y-x"), c2, 0.4, &p).unwrap() - 2.0).abs() <= 1e-6);
        assert!((limit_nu(&f("(x-y)^2"), ParamCase::C3, 0.4, &p).unwrap() - 4.0).abs() <= 1e-6);
        assert!((limit_tau(&f("x+y"), ParamCase::C1, 0.3, &p).unwrap() - 0.6).abs() <= 1e-6);
        assert!((limit_tau(&f("x+y"), ParamCase::C3, 0.3, &p).unwrap() - 0.6).abs() <= 1e-6);
        for case in cases() {
            let (t, n) = limits(&f("3"), case, 0.1, &p).unwrap();
            assert!((t - 3.0).abs() <= 1e-12 && n.abs() <= 1e-12);
        }
    }

    #[test]
    fn divergent_functional_is_reported() {
        // 1/sqrt(y-x) has no C2 limit at all
        let f = ExprField::parse("1/sqrt(y-x)").unwrap();
        let e = limit_tau(&f, ParamCase::c2(C2Ordering::AlphaPlus), 0.2, &probe()).unwrap_err();
        assert!(matches!(e, Error::LimitNotFound { .. }), "{e:?}");
    }

    #[test]
    fn lower_side_limits_mirror_upper() {
        // V(x,y) = W(y,x) with W = -ln(y-x) + 8 ln 2 satisfies the lower conditions
        let lower = ExprField { expr: parse_xy("-ln(x - y) + 8*ln2").unwrap(), side: Side::Lower };
        let (t, n) = limits(&lower, ParamCase::C1, 0.5, &probe()).unwrap();
        assert!((t - 4.0 * LN_2).abs() <= 1e-6);
        assert!((n + 2.0).abs() <= 1e-6);
    }

    #[test]
    fn fd_field_matches_jets_away_from_diagonal() {
        let e = ExprField::parse("sin(x)*ln(y-x)").unwrap();
        let fd = FdField::new(|x, y| e.value(x, y), Side::Upper);
        let (a, b) = (e.jet(0.3, 0.9), fd.jet(0.3, 0.9));
        assert!((a.xy - b.xy).abs() < 1e-6 && (a.y - b.y).abs() < 1e-8);
    }

    #[test]
    fn given_trace_derivative_agrees_with_ladder() {
        let f = ExprField::parse("cos(x+y) + (y-x)*ln(y-x)*sin(x+y)").unwrap();
        let ladder = trace_derivative(&f, 0.3, 1, &probe()).unwrap();
        let tau = ScalarFn::parse("cos(2*x)", (0.0, 1.0)).unwrap();
        let given = LimitProbe { trace: TraceDerivative::Given(tau), ..probe() };
        let exact = trace_derivative(&f, 0.3, 1, &given).unwrap();
        assert!((ladder - exact).abs() < 1e-6, "{ladder} vs {exact}");
    }

    proptest! {
        #[test]
        fn catalogue_residuals_vanish(x in 0.0f64..1.0, gap in 1e-3f64..1.0) {
            let y = x + gap;
            for entry in Catalogue::all() {
                for case in cases() {
                    if entry.solves(case.tag) {
                        let r = residual(&entry.field(), case, x, y).unwrap();
                        prop_assert!(r.abs() <= 1e-9, "{entry:?} {case}: {r}");
                    }
                }
            }
        }

        #[test]
        fn limits_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x in 0.05f64..0.9) {
            let p = probe();
            let pairs = [
                (ParamCase::C1, "ln(y-x)", "x+y"),
                (ParamCase::c2(C2Ordering::AlphaPlus), "y-x", "1"),
                (ParamCase::C3, "(x-y)^2", "x+y"),
            ];
            for (case, u, v) in pairs {
                let fu = ExprField::parse(u).unwrap();
                let fv = ExprField::parse(v).unwrap();
                let combo = ExprField::parse(&format!("({a})*({u}) + ({b})*({v})")).unwrap();
                let (tu, nu) = limits(&fu, case, x, &p).unwrap();
                let (tv, nv) = limits(&fv, case, x, &p).unwrap();
                let (tc, nc) = limits(&combo, case, x, &p).unwrap();
                prop_assert!((tc - a * tu - b * tv).abs() <= 1e-6);
                prop_assert!((nc - a * nu - b * nv).abs() <= 1e-6);
            }
        }
    }
}
