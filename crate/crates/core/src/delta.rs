//! The quadrant problem with displaced boundary conditions.
//!
//! Find `U` on both triangles of the first quadrant, split by `y = x`, with
//!
//! ```text
//! U(0, y) = φ₁(y),
//! U(x, 0) − (1/Γ(1/2)²) ∫₀^x ν₂(t) t^(−1/2) (x−t)^(−1/2) ln(t/x) dt = φ₂(x),
//! τ₁ = τ₂,  ν₁ = −ν₂  on the diagonal.
//! ```
//!
//! Both triangles carry the symmetric case. One stored trace `(τ, ν)`
//! represents both sides: the upper field is built from `(τ, ν)` and the lower
//! one from `(τ, −ν)` with the coordinates swapped. The boundary values are
//! then Volterra operators of the trace, collocated at the grid nodes on the
//! hat-function basis and solved by block forward substitution.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, Matrix2, Vector2};
use rayon::prelude::*;

use crate::epd::{limits, residual, LimitProbe, ScalarField};
use crate::error::{contract, domain, Error, Result};
use crate::expr::{check_data_conditions, CubicSpline, ScalarFn};
use crate::quad::{abel_log_operator, build_rule, panel_antiderivatives, KernelKind, ThetaNodes};
use crate::riemann::C1Field;

/// Diagonal trace sampled on a grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalTrace {
    pub grid: Vec<f64>,
    pub tau: Vec<f64>,
    pub nu: Vec<f64>,
}

impl DiagonalTrace {
    pub fn new(grid: Vec<f64>, tau: Vec<f64>, nu: Vec<f64>) -> Result<DiagonalTrace> {
        check_grid(&grid)?;
        if tau.len() != grid.len() || nu.len() != grid.len() {
            return contract("trace vectors must match the grid length");
        }
        Ok(DiagonalTrace { grid, tau, nu })
    }

    pub fn zero(grid: Vec<f64>) -> Result<DiagonalTrace> {
        let n = grid.len();
        DiagonalTrace::new(grid, vec![0.0; n], vec![0.0; n])
    }

    /// Samples `τ` and `ν` at the grid nodes.
    pub fn sample(grid: Vec<f64>, tau: impl Fn(f64) -> f64, nu: impl Fn(f64) -> f64) -> Result<DiagonalTrace> {
        let t = grid.iter().map(|&x| tau(x)).collect();
        let v = grid.iter().map(|&x| nu(x)).collect();
        DiagonalTrace::new(grid, t, v)
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn scaled(&self, k: f64) -> DiagonalTrace {
        DiagonalTrace {
            grid: self.grid.clone(),
            tau: self.tau.iter().map(|v| k * v).collect(),
            nu: self.nu.iter().map(|v| k * v).collect(),
        }
    }

    /// Not-a-knot cubic splines through the samples. Grids with fewer than
    /// four nodes are filled in linearly first.
    pub fn splines(&self) -> Result<(ScalarFn, ScalarFn)> {
        let (mut g, mut t, mut v) = (self.grid.clone(), self.tau.clone(), self.nu.clone());
        while g.len() < 4 {
            let refine = |w: &[f64]| -> Vec<f64> {
                let mut out = vec![w[0]];
                for p in w.windows(2) {
                    out.extend([0.5 * (p[0] + p[1]), p[1]]);
                }
                out
            };
            (g, t, v) = (refine(&g), refine(&t), refine(&v));
        }
        let spline = |v| CubicSpline::not_a_knot(g.clone(), v).map(ScalarFn::from_spline);
        Ok((spline(t)?, spline(v)?))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return contract("trace grid needs at least 2 nodes and must start at 0");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid.iter().all(|g| g.is_finite()) {
        return contract("trace grid must be finite and strictly increasing");
    }
    Ok(())
}

/// Uniform grid of `n` steps on `[0, X]`.
pub fn uniform_grid(x_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| x_end * i as f64 / n as f64).collect()
}

/// Weights of the hat function at each node against the kernels
/// `dσ / sqrt(σ(z−σ))` times `1`, `2 ln sin θ` and `2 ln cos θ`, where
/// `σ = z sin²θ`. Only nodes below `z` (plus the one above it) appear.
fn hat_weights(z: f64, grid: &[f64]) -> Result<Vec<(usize, [f64; 3])>> {
    let theta = |s: f64| (s / z).sqrt().clamp(0.0, 1.0).asin();
    let mut cuts = vec![0.0];
    cuts.extend(grid.iter().copied().filter(|&g| g > 0.0 && g < z));
    cuts.push(z);
    let mut out: Vec<(usize, [f64; 3])> = Vec::new();
    let mut add = |node: usize, w: [f64; 3]| match out.last_mut() {
        Some((k, acc)) if *k == node => (0..3).for_each(|i| acc[i] += w[i]),
        _ => out.push((node, w)),
    };
    for p in cuts.windows(2) {
        let mid = 0.5 * (p[0] + p[1]);
        let k = grid.partition_point(|&g| g < mid) - 1;
        let (ga, gb) = (grid[k], grid[k + 1]);
        let hk = gb - ga;
        let fa = panel_antiderivatives(theta(p[0]))?;
        let fb = panel_antiderivatives(theta(p[1]))?;
        let m: Vec<f64> = (0..6).map(|i| fb[i] - fa[i]).collect();
        // on the panel the hat functions are (gb − σ)/hk and (σ − ga)/hk
        for (node, c0, c1) in [(k, gb / hk, -z / hk), (k + 1, -ga / hk, z / hk)] {
            add(node, [c0 * m[0] + c1 * m[1], c0 * m[2] + c1 * m[3], c0 * m[4] + c1 * m[5]]);
        }
    }
    Ok(out)
}

/// Coefficients of `(τ_j, ν_j)` in `B1(z)` and `B2(z)`.
fn operator_rows(z: f64, grid: &[f64]) -> Result<Vec<(usize, [f64; 4])>> {
    let ln2z = (2.0 * z).ln();
    Ok(hat_weights(z, grid)?
        .into_iter()
        .map(|(j, [wp, wls, wlc])| {
            let wlog = ln2z * wp + wls + wlc;
            let b1 = (-0.5 * LN_2 * wp + 0.5 * wlog) / PI;
            let b2 = (0.5 * LN_2 * wp - 0.5 * wlog + wls) / PI;
            (j, [wp / PI, b1, wp / PI, b2])
        })
        .collect())
}

fn check_point(trace: &DiagonalTrace, z: f64) -> Result<()> {
    if !(z > 0.0 && z <= trace.end() * (1.0 + 1e-14)) {
        return domain(format!("boundary point {z} outside (0, {}]", trace.end()));
    }
    Ok(())
}

/// `U(0, y)` of the upper field built from the piecewise-linear trace.
pub fn boundary_operator_b1(trace: &DiagonalTrace, y: f64) -> Result<f64> {
    check_point(trace, y)?;
    Ok(operator_rows(y, &trace.grid)?.iter().map(|(j, c)| c[0] * trace.tau[*j] + c[1] * trace.nu[*j]).sum())
}

/// Left side of the displaced condition at `x` for the piecewise-linear
/// trace: the lower field at `(x, 0)` minus the log-Abel term of `ν₂ = −ν`.
/// Both parts are integrated exactly panel by panel.
pub fn boundary_operator_b2(trace: &DiagonalTrace, x: f64) -> Result<f64> {
    check_point(trace, x)?;
    Ok(operator_rows(x, &trace.grid)?.iter().map(|(j, c)| c[2] * trace.tau[*j] + c[3] * trace.nu[*j]).sum())
}

/// Settings of the quadrant solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaOptions {
    /// Trace at the origin; defaults to `(φ₁(0), 0)`.
    pub start: Option<(f64, f64)>,
    /// Accept data violating `φ(0) = 0`, `φ ∈ C³`.
    pub verification_override: bool,
    /// Quadrature nodes of the rebuilt fields and of the report's log-Abel rule.
    pub nodes: usize,
    pub probe: LimitProbe,
    /// Largest admissible condition number of a diagonal block.
    pub max_condition: f64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            start: None,
            verification_override: false,
            nodes: 256,
            probe: LimitProbe::default(),
            max_condition: 1e12,
        }
    }
}

/// Collocated system: unknowns `(τ_0, ν_0, τ_1, ν_1, …)`, rows
/// `(pin τ_0, pin ν_0, B1(g_1), B2(g_1), …)`. Block lower-triangular.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSystem {
    pub grid: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub rhs: Vec<f64>,
}

impl DeltaSystem {
    /// Largest entry above the diagonal blocks.
    pub fn causality_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    worst = worst.max(self.matrix[(2 * i + a, 2 * j + b)].abs());
                }
            }
        }
        worst
    }

    /// Forward substitution over the 2×2 diagonal blocks.
    pub fn solve(&self, max_condition: f64) -> Result<DiagonalTrace> {
        let n = self.grid.len();
        let mut u = vec![0.0; 2 * n];
        for i in 0..n {
            let (r0, r1) = (2 * i, 2 * i + 1);
            let mut b = Vector2::new(self.rhs[r0], self.rhs[r1]);
            for k in 0..2 * i {
                b[0] -= self.matrix[(r0, k)] * u[k];
                b[1] -= self.matrix[(r1, k)] * u[k];
            }
            let m = Matrix2::new(
                self.matrix[(r0, r0)],
                self.matrix[(r0, r1)],
                self.matrix[(r1, r0)],
                self.matrix[(r1, r1)],
            );
            let sv = m.singular_values();
            let condition = sv.max() / sv.min();
            if !(condition <= max_condition) {
                return Err(Error::Singular { node: i, condition });
            }
            let v = m.lu().solve(&b).ok_or(Error::Singular { node: i, condition })?;
            u[r0] = v[0];
            u[r1] = v[1];
        }
        DiagonalTrace::new(self.grid.clone(), u.iter().step_by(2).copied().collect(), u.iter().skip(1).step_by(2).copied().collect())
    }
}

fn admit(phi: &ScalarFn, name: &str, opts: &DeltaOptions) -> Result<()> {
    let rep = check_data_conditions(phi);
    if !rep.passes() && !opts.verification_override {
        return contract(format!("{name} fails the data conditions ({}); set the verification override", rep.warnings.join("; ")));
    }
    Ok(())
}

pub fn assemble_system(phi1: &ScalarFn, phi2: &ScalarFn, grid: &[f64], opts: &DeltaOptions) -> Result<DeltaSystem> {
    check_grid(grid)?;
    admit(phi1, "phi1", opts)?;
    admit(phi2, "phi2", opts)?;
    let start = match opts.start {
        Some(s) => s,
        None => (phi1.eval(0.0), 0.0),
    };
    if !(start.0.is_finite() && start.1.is_finite()) {
        return contract("trace at the origin is not finite; supply it explicitly");
    }
    let n = grid.len();
    let rows = (1..n)
        .into_par_iter()
        .map(|i| {
            let z = grid[i];
            Ok((operator_rows(z, grid)?, phi1.eval_deriv(z, 0)?, phi2.eval_deriv(z, 0)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    let mut rhs = vec![0.0; 2 * n];
    matrix[(0, 0)] = 1.0;
    matrix[(1, 1)] = 1.0;
    (rhs[0], rhs[1]) = start;
    for (i, (row, p1, p2)) in rows.into_iter().enumerate().map(|(k, r)| (k + 1, r)) {
        for (j, c) in row {
            matrix[(2 * i, 2 * j)] += c[0];
            matrix[(2 * i, 2 * j + 1)] += c[1];
            matrix[(2 * i + 1, 2 * j)] += c[2];
            matrix[(2 * i + 1, 2 * j + 1)] += c[3];
        }
        rhs[2 * i] = p1;
        rhs[2 * i + 1] = p2;
    }
    Ok(DeltaSystem { grid: grid.to_vec(), matrix, rhs })
}

/// Sup-norms of the defects in every condition of the problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub pde_residual_sup: f64,
    pub bc19_sup: f64,
    pub bc20_sup: f64,
    pub conj21_sup: f64,
    pub conj22_sup: f64,
    pub grid_meta: String,
}

impl ResidualReport {
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("pde_residual_sup", self.pde_residual_sup),
            ("bc19_sup", self.bc19_sup),
            ("bc20_sup", self.bc20_sup),
            ("conj21_sup", self.conj21_sup),
            ("conj22_sup", self.conj22_sup),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrantSolution {
    pub trace: DiagonalTrace,
    pub upper: C1Field,
    pub lower: C1Field,
    pub report: ResidualReport,
}

impl QuadrantSolution {
    /// `U` anywhere off the diagonal in the quadrant.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let end = self.trace.end() * (1.0 + 1e-12);
        if x < 0.0 || y < 0.0 || x > end || y > end || x == y {
            return domain(format!("({x}, {y}) outside the quadrant square or on the diagonal"));
        }
        Ok(if y > x { self.upper.eval(x, y) } else { self.lower.eval(x, y) })
    }
}

pub fn solve_delta1s(phi1: &ScalarFn, phi2: &ScalarFn, grid: &[f64], opts: &DeltaOptions) -> Result<QuadrantSolution> {
    let trace = assemble_system(phi1, phi2, grid, opts)?.solve(opts.max_condition)?;
    let (tau, nu) = trace.splines()?;
    let nodes = ThetaNodes::new(opts.nodes)?;
    let upper = C1Field::new(tau.clone(), nu.clone(), nodes.clone());
    let lower = C1Field::lower(tau, nu.clone(), nodes);
    let report = residual_report(&trace, &upper, &lower, phi1, phi2, opts)?;
    Ok(QuadrantSolution { trace, upper, lower, report })
}

fn residual_report(
    trace: &DiagonalTrace,
    upper: &C1Field,
    lower: &C1Field,
    phi1: &ScalarFn,
    phi2: &ScalarFn,
    opts: &DeltaOptions,
) -> Result<ResidualReport> {
    let g = &trace.grid;
    let end = trace.end();
    // collocation nodes and the midpoints between them
    let mut pts: Vec<f64> = g[1..].to_vec();
    pts.extend(g[1..].windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let rule = build_rule(KernelKind::AbelLog, opts.nodes)?;
    let nu2 = lower.nu().clone();
    let sup = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    let bc19 = pts
        .par_iter()
        .map(|&y| Ok((upper.eval(0.0, y) - phi1.eval_deriv(y, 0)?).abs()))
        .collect::<Result<Vec<_>>>()?;
    let bc20 = pts
        .par_iter()
        .map(|&x| Ok((lower.eval(x, 0.0) - abel_log_operator(&nu2, x, &rule)? - phi2.eval_deriv(x, 0)?).abs()))
        .collect::<Result<Vec<_>>>()?;
    let s0 = opts.probe.s0;
    let diag: Vec<f64> = g.iter().copied().filter(|&x| x >= s0 && x + s0 <= end).collect();
    let conj = diag
        .par_iter()
        .map(|&x| {
            let (t1, n1) = limits(upper, crate::epd::ParamCase::C1, x, &opts.probe)?;
            let (t2, n2) = limits(lower, crate::epd::ParamCase::C1, x, &opts.probe)?;
            Ok(((t1 - t2).abs(), (n1 + n2).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = 8;
    let lattice: Vec<(f64, f64)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (end * (i as f64 + 0.5) / m as f64, end * (j as f64 + 0.5) / m as f64)))
        .filter(|(x, y)| (y - x).abs() >= 1e-3)
        .collect();
    let pde = lattice
        .par_iter()
        .map(|&(x, y)| {
            let f = if y > x { upper } else { lower };
            residual(f, crate::epd::ParamCase::C1, x, y).map(f64::abs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport {
        pde_residual_sup: sup(pde),
        bc19_sup: sup(bc19),
        bc20_sup: sup(bc20),
        conj21_sup: sup(conj.iter().map(|c| c.0).collect()),
        conj22_sup: sup(conj.iter().map(|c| c.1).collect()),
        grid_meta: format!(
            "nodes={} X={} first_collocation={} theta_nodes={} verification_override={}",
            g.len(),
            end,
            g[1],
            opts.nodes,
            opts.verification_override
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(src: &str) -> ScalarFn {
        ScalarFn::parse(src, (0.0, 1.0)).unwrap()
    }

    fn log_trace(grid: Vec<f64>) -> DiagonalTrace {
        let n = grid.len();
        DiagonalTrace::new(grid, vec![4.0 * LN_2; n], vec![2.0; n]).unwrap()
    }

    fn shifted_grid(n: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend((0..n).map(|i| 0.1 + 0.9 * i as f64 / n as f64));
        g.push(1.0);
        g
    }

    #[test]
    fn operator_examples() {
        let g = uniform_grid(1.0, 16);
        let zero = DiagonalTrace::zero(g.clone()).unwrap();
        let logt = log_trace(g.clone());
        let sum = DiagonalTrace::sample(g.clone(), |x| 2.0 * x, |_| 0.0).unwrap();
        for z in [0.1, 0.33, 0.5, 0.999, 1.0] {
            assert_eq!(boundary_operator_b1(&zero, z).unwrap(), 0.0);
            assert_eq!(boundary_operator_b2(&zero, z).unwrap(), 0.0);
            assert!((boundary_operator_b1(&logt, z).unwrap() - z.ln()).abs() <= 1e-12);
            assert!((boundary_operator_b2(&logt, z).unwrap() - (4.0 * LN_2 - z.ln())).abs() <= 1e-12);
            assert!((boundary_operator_b1(&sum, z).unwrap() - z).abs() <= 1e-12);
            let (a, b) = (boundary_operator_b2(&logt.scaled(-3.5), z).unwrap(), boundary_operator_b2(&logt, z).unwrap());
            assert!((a + 3.5 * b).abs() <= 1e-8);
        }
        assert!(boundary_operator_b1(&zero, 0.0).is_err());
        assert!(boundary_operator_b2(&zero, 1.5).is_err());
    }

    #[test]
    fn operators_match_rebuilt_fields_on_smooth_traces() {
        // for a linear trace the hat interpolant is exact
        let g = uniform_grid(1.0, 7);
        let tr = DiagonalTrace::sample(g, |x| 1.0 - 0.5 * x, |x| 0.25 + x).unwrap();
        let (tau, nu) = tr.splines().unwrap();
        let nodes = ThetaNodes::new(64).unwrap();
        let up = C1Field::new(tau.clone(), nu.clone(), nodes.clone());
        let lo = C1Field::lower(tau, nu.clone(), nodes);
        let rule = build_rule(KernelKind::AbelLog, 64).unwrap();
        for z in [0.2, 0.45, 0.9] {
            assert!((boundary_operator_b1(&tr, z).unwrap() - up.eval(0.0, z)).abs() <= 1e-12);
            let b2 = lo.eval(z, 0.0) - abel_log_operator(&nu.scaled(-1.0), z, &rule).unwrap();
            assert!((boundary_operator_b2(&tr, z).unwrap() - b2).abs() <= 1e-12);
        }
    }

    #[test]
    fn causality_and_homogeneous_data() {
        let z = ScalarFn::constant(0.0, (0.0, 1.0));
        let opts = DeltaOptions::default();
        let sys = assemble_system(&z, &z, &[0.0, 1.0], &opts).unwrap();
        let t = sys.solve(1e12).unwrap();
        assert!(t.tau.iter().chain(&t.nu).all(|v| *v == 0.0));
        let sys = assemble_system(&z, &z, &uniform_grid(1.0, 12), &opts).unwrap();
        assert!(sys.causality_defect() <= 1e-12);
        let sol = solve_delta1s(&z, &z, &uniform_grid(1.0, 12), &opts).unwrap();
        for (name, v) in sol.report.entries() {
            assert!(v <= 1e-10, "{name} = {v}");
        }
        assert_eq!(sol.value(0.3, 0.8).unwrap(), 0.0);
        assert_eq!(sol.value(0.8, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn data_conditions_enforced() {
        let g = shifted_grid(9);
        let (p1, p2) = (unit("ln(x)"), unit("-ln(x) + 4*ln2"));
        assert!(assemble_system(&p1, &p2, &g, &DeltaOptions::default()).is_err());
        let opts = DeltaOptions { verification_override: true, ..DeltaOptions::default() };
        assert!(assemble_system(&p1, &p2, &g, &opts).is_err());
        let opts = DeltaOptions { start: Some((4.0 * LN_2, 2.0)), ..opts };
        assert!(assemble_system(&p1, &p2, &g, &opts).is_ok());
        assert!(assemble_system(&unit("1 + x"), &unit("x"), &g, &DeltaOptions::default()).is_err());
    }

    #[test]
    fn manufactured_log_pair() {
        let opts = DeltaOptions { start: Some((4.0 * LN_2, 2.0)), verification_override: true, ..DeltaOptions::default() };
        let sol = solve_delta1s(&unit("ln(x)"), &unit("-ln(x) + 4*ln2"), &shifted_grid(18), &opts).unwrap();
        for k in 0..sol.trace.grid.len() {
            assert!((sol.trace.tau[k] - 4.0 * LN_2).abs() <= 1e-3);
            assert!((sol.trace.nu[k] - 2.0).abs() <= 1e-3);
        }
        for (x, y) in [(0.1, 0.5), (0.3, 0.9), (0.0, 0.7), (0.5, 0.6)] {
            assert!((sol.value(x, y).unwrap() - (y - x).ln()).abs() <= 1e-3);
        }
    }

    #[test]
    fn smooth_data_report() {
        let opts = DeltaOptions::default();
        let p = unit("x^2");
        let sols: Vec<_> = [64, 128].iter().map(|&n| solve_delta1s(&p, &p, &uniform_grid(1.0, n), &opts).unwrap()).collect();
        for (name, v) in sols[1].report.entries() {
            assert!(v <= 1e-4, "{name} = {v}");
        }
        for s in &sols {
            assert!(s.report.conj21_sup <= 2e-6 && s.report.conj22_sup <= 2e-6);
        }
        let (a, b) = (&sols[0].report, &sols[1].report);
        assert!(a.bc19_sup / b.bc19_sup >= 1.8, "{} {}", a.bc19_sup, b.bc19_sup);
        assert!(a.bc20_sup / b.bc20_sup >= 1.8, "{} {}", a.bc20_sup, b.bc20_sup);
        // symmetric data: τ = 8x²/3, ν = 0
        let t = &sols[1].trace;
        for k in 0..t.grid.len() {
            assert!((t.tau[k] - 8.0 * t.grid[k].powi(2) / 3.0).abs() <= 1e-4);
            assert!(t.nu[k].abs() <= 1e-10);
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let tau = |s: f64| s * s + 0.5 * s.powi(3);
        let nu = |s: f64| s * (1.0 - s) + 0.3 * (2.0 * s).sin();
        let fine = DiagonalTrace::sample(uniform_grid(1.0, 512), tau, nu).unwrap();
        let pts = uniform_grid(1.0, 512);
        let mut b1 = vec![0.0];
        let mut b2 = vec![0.0];
        for &z in &pts[1..] {
            b1.push(boundary_operator_b1(&fine, z).unwrap());
            b2.push(boundary_operator_b2(&fine, z).unwrap());
        }
        let p1 = ScalarFn::tabulated(pts.clone(), b1).unwrap();
        let p2 = ScalarFn::tabulated(pts, b2).unwrap();
        let sys = assemble_system(&p1, &p2, &uniform_grid(1.0, 128), &DeltaOptions::default()).unwrap();
        let t = sys.solve(1e12).unwrap();
        for k in 0..t.grid.len() {
            assert!((t.tau[k] - tau(t.grid[k])).abs() <= 1e-4, "tau at {}: {}", t.grid[k], t.tau[k]);
            assert!((t.nu[k] - nu(t.grid[k])).abs() <= 1e-4, "nu at {}: {}", t.grid[k], t.nu[k]);
        }
    }
}
