use std::f64::consts::{LN_2, PI};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use darboux_core::cauchy::{solve_cauchy_with, solution_trace, CauchyData, Which};
use darboux_core::delta::{solve_delta1s, uniform_grid, DeltaOptions};
use darboux_core::epd::{limits, residual, ExprField, LimitProbe, ParamCase, ScalarField};
use darboux_core::expr::ScalarFn;
use darboux_core::oracle_fd::{march, seed_from_data};
use darboux_core::quad::{abel_log_operator, build_rule, KernelKind, DEFAULT_NODES};
use darboux_core::Error;

use crate::config::{Command, Opts};
use crate::report::{csv, plot_script, Artifacts, Report};

/// Problems found before any solve starts.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub struct Outcome {
    pub report: Report,
    pub artifacts: Artifacts,
    /// Every checked quantity within its tolerance.
    pub pass: bool,
}

/// Validated settings shared by the commands.
struct Setup {
    cmd: Command,
    opts: Opts,
    x_end: f64,
    n: usize,
    nodes: usize,
    probe: LimitProbe,
    dir: PathBuf,
    prefix: String,
    started: SystemTime,
}

impl Setup {
    fn new(cmd: Command, opts: Opts) -> Result<Setup, ConfigError> {
        let x_end = opts.x_end.unwrap_or(1.0);
        let default_n = match cmd {
            Command::SolveDelta1s | Command::Verify => 64,
            _ => 32,
        };
        let n = opts.n.unwrap_or(default_n);
        let nodes = opts.nodes.unwrap_or(match cmd {
            Command::SolveDelta1s => 256,
            _ => DEFAULT_NODES,
        });
        let default_probe = LimitProbe::default();
        let probe = LimitProbe {
            s0: opts.s0.unwrap_or(default_probe.s0),
            levels: opts.levels.unwrap_or(default_probe.levels),
            tolerance: opts.limit_tol.unwrap_or(default_probe.tolerance),
            ..default_probe
        };
        for (name, v) in [
            ("X", Some(x_end)),
            ("eps", opts.eps),
            ("s0", Some(probe.s0)),
            ("limit-tol", Some(probe.tolerance)),
            ("tol", opts.tol),
            ("trace-tol", opts.trace_tol),
            ("min-ratio", opts.min_ratio),
            ("grid-start", opts.grid_start),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if n < 2 || nodes < 2 || probe.levels < 5 {
            return Err(ConfigError("n and nodes must be at least 2, levels at least 5".into()));
        }
        let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let prefix = opts.prefix.clone().unwrap_or_else(|| cmd.name().to_string());
        Ok(Setup { cmd, opts, x_end, n, nodes, probe, dir, prefix, started: SystemTime::now() })
    }

    fn required(&self, v: &Option<String>, name: &str) -> Result<String, ConfigError> {
        v.clone().ok_or_else(|| ConfigError(format!("{} needs --{name}", self.cmd.name())))
    }

    fn data_fn(&self, v: &Option<String>, name: &str) -> Result<ScalarFn, ConfigError> {
        Ok(ScalarFn::parse(&self.required(v, name)?, (0.0, self.x_end))?)
    }

    fn case(&self) -> Result<ParamCase, ConfigError> {
        Ok(ParamCase::parse(&self.required(&self.opts.case, "case")?)?)
    }

    fn header(&self, report: &mut Report) {
        report.text("command", self.cmd.name());
        report.text("version", env!("CARGO_PKG_VERSION"));
        report.extend(self.opts.echo());
        report.text("resolved.X", crate::report::fmt_f64(self.x_end));
        report.text("resolved.n", self.n.to_string());
        report.text("resolved.nodes", self.nodes.to_string());
    }

    /// Wall-clock entries, only when asked for, so reruns stay byte-identical.
    fn stamp(&self, report: &mut Report) {
        if self.opts.timestamp == Some(true) {
            let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            report.text("timestamp.start_unix", secs(self.started).to_string());
            report.text("timestamp.end_unix", secs(SystemTime::now()).to_string());
        }
    }

    fn report_name(&self) -> String {
        format!("{}_report.txt", self.prefix)
    }

    fn csv_name(&self, tag: &str) -> String {
        format!("{}{tag}.csv", self.prefix)
    }

    fn plot(&self, artifacts: &mut Artifacts, csvs: &[String]) {
        if self.opts.plot == Some(true) {
            artifacts.add(&self.dir, format!("{}_plot.py", self.prefix), plot_script(csvs));
        }
    }
}

/// Result of a run: `Ok` carries artifacts, `Err` is a configuration problem
/// (nothing gets written), and solver failures come back as
/// `Ok(Err(report))` with the diagnostic report.
pub type RunResult = Result<Result<Outcome, Report>, ConfigError>;


pub fn run(cmd: Command, opts: Opts) -> RunResult {
    let setup = Setup::new(cmd, opts)?;
    match cmd {
        Command::SolveCauchy => solve_cauchy_cmd(&setup),
        Command::SolveDelta1s => solve_delta_cmd(&setup),
        Command::Verify => verify_cmd(&setup),
        Command::Limits => limits_cmd(&setup),
        Command::QuadSelftest => Ok(Ok(quad_selftest(&setup))),
    }
}

fn failure(setup: &Setup, e: Error) -> Report {
    let mut r = Report::default();
    setup.header(&mut r);
    r.text("status", "error");
    r.text("error", e.to_string());
    setup.stamp(&mut r);
    r
}

fn check(report: &mut Report, key: &str, value: f64, tol: f64) -> bool {
    report.num(key, value);
    report.num(format!("{key}.tolerance"), tol);
    value <= tol
}

fn finish(setup: &Setup, mut report: Report, artifacts: Artifacts, pass: bool) -> Outcome {
    report.text("status", if pass { "ok" } else { "tolerance_exceeded" });
    setup.stamp(&mut report);
    let mut artifacts = artifacts;
    artifacts.add(&setup.dir, setup.report_name(), report.render());
    Outcome { report, artifacts, pass }
}

fn solve_cauchy_cmd(setup: &Setup) -> RunResult {
    let case = setup.case()?;
    let tau = setup.data_fn(&setup.opts.tau, "tau")?;
    let nu = setup.data_fn(&setup.opts.nu, "nu")?;
    let data = CauchyData::new(case, tau, nu)?;
    let tol = setup.opts.tol.unwrap_or(1e-6);
    let trace_tol = setup.opts.trace_tol.unwrap_or(2e-6);
    let body = || -> darboux_core::Result<Outcome> {
        let sol = solve_cauchy_with(&data, setup.nodes)?;
        let g = uniform_grid(setup.x_end, setup.n);
        let mut rows = Vec::new();
        let mut pde: f64 = 0.0;
        for (i, &x) in g.iter().enumerate() {
            for &y in &g[i + 1..] {
                rows.push((x, y, sol.value(x, y)?));
                if y - x >= 1e-3 {
                    pde = pde.max(residual(&sol.field, case, x, y)?.abs());
                }
            }
        }
        let diag: Vec<f64> = g.iter().copied().filter(|&x| x + setup.probe.s0 <= setup.x_end).collect();
        let tau_back = solution_trace(&sol, Which::Tau, &diag, &setup.probe)?;
        let nu_back = solution_trace(&sol, Which::Nu, &diag, &setup.probe)?;
        let sup = |v: &[f64], f: &ScalarFn| diag.iter().zip(v).map(|(&x, b)| (b - f.eval(x)).abs()).fold(0.0, f64::max);
        let mut report = Report::default();
        setup.header(&mut report);
        report.text("method", format!("{:?}", sol.method));
        let mut pass = check(&mut report, "pde_residual_sup", pde, tol);
        pass &= check(&mut report, "tau_roundtrip_sup", sup(&tau_back, &data.tau), trace_tol);
        pass &= check(&mut report, "nu_roundtrip_sup", sup(&nu_back, &data.nu), trace_tol);
        let mut artifacts = Artifacts::default();
        let name = setup.csv_name("");
        artifacts.add(&setup.dir, name.clone(), csv(rows));
        setup.plot(&mut artifacts, &[name]);
        Ok(finish(setup, report, artifacts, pass))
    };
    Ok(body().map_err(|e| failure(setup, e)))
}

fn solve_delta_cmd(setup: &Setup) -> RunResult {
    let phi1 = setup.data_fn(&setup.opts.phi1, "phi1")?;
    let phi2 = setup.data_fn(&setup.opts.phi2, "phi2")?;
    let start = match (setup.opts.start_tau, setup.opts.start_nu) {
        (None, None) => None,
        (t, v) => Some((t.unwrap_or(0.0), v.unwrap_or(0.0))),
    };
    let opts = DeltaOptions {
        start,
        verification_override: setup.opts.override_data == Some(true),
        nodes: setup.nodes,
        probe: setup.probe.clone(),
        ..DeltaOptions::default()
    };
    let grid = match setup.opts.grid_start {
        None => uniform_grid(setup.x_end, setup.n),
        Some(d) if d < setup.x_end => {
            let mut g = vec![0.0];
            g.extend((0..setup.n).map(|i| d + (setup.x_end - d) * i as f64 / setup.n as f64));
            g.push(setup.x_end);
            g
        }
        Some(d) => return Err(ConfigError(format!("grid-start {d} must lie below X"))),
    };
    let tol = setup.opts.tol.unwrap_or(1e-4);
    let trace_tol = setup.opts.trace_tol.unwrap_or(2e-6);
    let body = || -> darboux_core::Result<Outcome> {
        let sol = solve_delta1s(&phi1, &phi2, &grid, &opts)?;
        let g = uniform_grid(setup.x_end, setup.n);
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for &x in &g {
            for &y in &g {
                if y > x {
                    upper.push((x, y, sol.value(x, y)?));
                } else if y < x {
                    lower.push((x, y, sol.value(x, y)?));
                }
            }
        }
        let mut report = Report::default();
        setup.header(&mut report);
        report.text("grid_meta", sol.report.grid_meta.clone());
        let rr = &sol.report;
        let mut pass = check(&mut report, "pde_residual_sup", rr.pde_residual_sup, tol);
        pass &= check(&mut report, "bc19_sup", rr.bc19_sup, tol);
        pass &= check(&mut report, "bc20_sup", rr.bc20_sup, tol);
        pass &= check(&mut report, "conj21_sup", rr.conj21_sup, trace_tol);
        pass &= check(&mut report, "conj22_sup", rr.conj22_sup, trace_tol);
        let mut artifacts = Artifacts::default();
        let names = [setup.csv_name("_upper"), setup.csv_name("_lower")];
        artifacts.add(&setup.dir, names[0].clone(), csv(upper));
        artifacts.add(&setup.dir, names[1].clone(), csv(lower));
        let trace_rows = sol.trace.grid.iter().enumerate().map(|(k, &x)| (x, sol.trace.tau[k], sol.trace.nu[k]));
        let mut trace_csv = String::from("x,tau,nu\n");
        for (x, t, v) in trace_rows {
            trace_csv.push_str(&format!("{x:.16e},{t:.16e},{v:.16e}\n"));
        }
        artifacts.add(&setup.dir, setup.csv_name("_trace"), trace_csv);
        setup.plot(&mut artifacts, &names);
        Ok(finish(setup, report, artifacts, pass))
    };
    Ok(body().map_err(|e| failure(setup, e)))
}

fn verify_cmd(setup: &Setup) -> RunResult {
    let case = setup.case()?;
    let tau = setup.data_fn(&setup.opts.tau, "tau")?;
    let nu = setup.data_fn(&setup.opts.nu, "nu")?;
    let data = CauchyData::new(case, tau, nu)?;
    let exact = setup.opts.exact.as_deref().map(ExprField::parse).transpose()?;
    let eps = setup.opts.eps.unwrap_or(1e-4 * setup.x_end);
    let tol = setup.opts.tol.unwrap_or(5e-4);
    let min_ratio = setup.opts.min_ratio.unwrap_or(3.5);
    let body = || -> darboux_core::Result<Outcome> {
        let sol = solve_cauchy_with(&data, setup.nodes)?;
        let grid = march(&seed_from_data(&data, eps, setup.n)?, setup.n)?;
        let mut report = Report::default();
        setup.header(&mut report);
        report.num("resolved.eps", eps);
        let mut pass = check(&mut report, "fd_vs_analytic_sup", grid.sup_error(setup.x_end, |x, y| sol.field.eval(x, y)), tol);
        if let Some(f) = &exact {
            pass &= check(&mut report, "fd_vs_exact_sup", grid.sup_error(setup.x_end, |x, y| f.eval(x, y)), tol);
            let analytic = grid.points().map(|(x, y, _)| (sol.field.eval(x, y) - f.eval(x, y)).abs()).fold(0.0, f64::max);
            pass &= check(&mut report, "analytic_vs_exact_sup", analytic, tol);
            let mut res: f64 = 0.0;
            for (x, y, _) in grid.points().filter(|p| p.1 - p.0 >= 1e-3) {
                res = res.max(residual(f, case, x, y)?.abs());
            }
            report.num("exact_residual_sup", res);
            let fine = march(&seed_from_data(&data, eps, 2 * setup.n)?, 2 * setup.n)?;
            let (e1, e2) = (
                grid.sup_error(setup.x_end, |x, y| f.eval(x, y)),
                fine.sup_error(setup.x_end, |x, y| f.eval(x, y)),
            );
            report.num("fd_error_coarse", e1);
            report.num("fd_error_fine", e2);
            // an exact expansion leaves nothing to refine
            if e1 > 1e-12 {
                report.num("refinement_ratio", e1 / e2);
                report.num("refinement_ratio.minimum", min_ratio);
                pass &= e1 / e2 >= min_ratio;
            } else {
                report.text("refinement_ratio", "not applicable (march exact to rounding)");
            }
        }
        let mut artifacts = Artifacts::default();
        let name = setup.csv_name("");
        artifacts.add(&setup.dir, name.clone(), csv(grid.points()));
        setup.plot(&mut artifacts, &[name]);
        Ok(finish(setup, report, artifacts, pass))
    };
    Ok(body().map_err(|e| failure(setup, e)))
}

fn limits_cmd(setup: &Setup) -> RunResult {
    let case = setup.case()?;
    let field = ExprField::parse(&setup.required(&setup.opts.field, "field")?)?;
    let points = match &setup.opts.points {
        None => vec![0.5],
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| ConfigError(format!("bad point `{p}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let body = || -> darboux_core::Result<Outcome> {
        let mut report = Report::default();
        setup.header(&mut report);
        for (k, &x) in points.iter().enumerate() {
            let (t, v) = limits(&field, case, x, &setup.probe)?;
            report.num(format!("point.{k}.x"), x);
            report.num(format!("point.{k}.tau"), t);
            report.num(format!("point.{k}.nu"), v);
        }
        if points.len() == 1 {
            let (t, v) = limits(&field, case, points[0], &setup.probe)?;
            report.num("tau", t);
            report.num("nu", v);
        }
        Ok(finish(setup, report, Artifacts::default(), true))
    };
    Ok(body().map_err(|e| failure(setup, e)))
}

fn quad_selftest(setup: &Setup) -> Outcome {
    let mut report = Report::default();
    setup.header(&mut report);
    let mut pass = true;
    let one = ScalarFn::constant(1.0, (0.0, 10.0));
    let minus_two = ScalarFn::constant(-2.0, (0.0, 10.0));
    let run = |report: &mut Report| -> darboux_core::Result<bool> {
        let plain = build_rule(KernelKind::AbelPlain, setup.nodes)?;
        let log = build_rule(KernelKind::AbelLog, setup.nodes)?;
        let mut ok = true;
        for x in [0.1, 1.0, 10.0] {
            let v = plain.apply(x, |t| one.eval(t));
            report.num(format!("abel_plain_one.x{x}"), v);
            ok &= check(report, &format!("abel_plain_one.x{x}.error"), (v - PI).abs(), 1e-10);
            let v = log.apply(x, |t| one.eval(t));
            report.num(format!("abel_log_one.x{x}"), v);
            ok &= check(report, &format!("abel_log_one.x{x}.error"), (v + 2.0 * PI * LN_2).abs(), 1e-8);
            let v = abel_log_operator(&minus_two, x, &log)?;
            ok &= check(report, &format!("abel_log_operator_minus_two.x{x}.error"), (v - 4.0 * LN_2).abs(), 1e-8);
        }
        Ok(ok)
    };
    match run(&mut report) {
        Ok(ok) => pass &= ok,
        Err(e) => {
            report.text("error", e.to_string());
            pass = false;
        }
    }
    report.num("reference.pi", PI);
    report.num("reference.minus_two_pi_ln2", -2.0 * PI * LN_2);
    finish(setup, report, Artifacts::default(), pass)
}
