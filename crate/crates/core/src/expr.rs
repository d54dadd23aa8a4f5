//! Small expression language for data functions and manufactured fields.
//!
//! Tokens: `+ - * / ^ ( ) ,`, the variable `x` (and `y` in two-variable
//! mode), the constants `pi` and `ln2`, the functions `exp ln sqrt sin cos`
//! and unsigned decimal literals. Power is right-associative and binds tighter
//! than unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;

use crate::error::{contract, domain, Error, Result};
use crate::scalar::{Jet, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn apply<T: Real>(self, v: T) -> T {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
        }
    }
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Ln2,
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Which variables an expression may mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vars {
    X,
    XY,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{text}`") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    i: usize,
    end: usize,
    vars: Vars,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected `{op}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.i += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "y" if self.vars == Vars::XY => Ok(Expr::Y),
                    "pi" => Ok(Expr::Pi),
                    "ln2" => Ok(Expr::Ln2),
                    _ => match Func::from_name(&name) {
                        Some(f) => {
                            self.expect('(')?;
                            let arg = self.expr()?;
                            self.expect(')')?;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        None => Err(Error::UnknownIdentifier { pos, name }),
                    },
                }
            }
            Some(Tok::Op(c)) => Err(Error::Syntax { pos, msg: format!("unexpected `{c}`") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses a function of `x`.
pub fn parse(source: &str) -> Result<Expr> {
    parse_with(source, Vars::X)
}

/// Parses a function of `x` and `y`.
pub fn parse_xy(source: &str) -> Result<Expr> {
    parse_with(source, Vars::XY)
}

pub fn parse_with(source: &str, vars: Vars) -> Result<Expr> {
    if source.trim().is_empty() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let toks = lex(source)?;
    let mut p = Parser { toks: &toks, i: 0, end: source.len(), vars };
    let e = p.expr()?;
    if p.i != toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

impl Expr {
    pub fn eval<T: Real>(&self, x: T, y: T) -> T {
        match self {
            Expr::Num(v) => T::from_f64(*v),
            Expr::Pi => T::from_f64(std::f64::consts::PI),
            Expr::Ln2 => T::from_f64(std::f64::consts::LN_2),
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, b) => {
                let base = a.eval(x, y);
                match b.constant_value() {
                    Some(p) if p == p.round() && p.abs() <= 64.0 => base.powi(p as i32),
                    Some(0.5) => base.sqrt(),
                    Some(p) => base.powf(T::from_f64(p)),
                    None => base.powf(b.eval(x, y)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x, y)),
        }
    }

    /// Value of a variable-free subtree.
    pub fn constant_value(&self) -> Option<f64> {
        if self.mentions(&|e| matches!(e, Expr::X | Expr::Y)) {
            None
        } else {
            Some(self.eval(0.0, 0.0))
        }
    }

    pub fn uses_y(&self) -> bool {
        self.mentions(&|e| matches!(e, Expr::Y))
    }

    fn mentions(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions(pred),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.mentions(pred) || b.mentions(pred)
            }
            _ => false,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Canonical text; `parse(render(e))` rebuilds `e`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => write!(f, "(0-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Ln2 => f.write_str("ln2"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.prec() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { '+' } else { '-' };
                wrap(f, a, a.prec() < 1)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.prec() <= 1)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = if matches!(self, Expr::Mul(..)) { '*' } else { '/' };
                wrap(f, a, a.prec() < 2)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.prec() <= 2)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, a.prec() <= 4)?;
                f.write_str("^")?;
                wrap(f, b, b.prec() < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Cubic splines
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    grid: Vec<f64>,
    values: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Natural cubic spline through `(grid[i], values[i])`.
    pub fn natural(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, values, false)
    }

    /// Cubic spline with the third derivative continuous at the second and
    /// the second-to-last node; exact on cubics.
    pub fn not_a_knot(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, values, true)
    }

    fn build(grid: Vec<f64>, values: Vec<f64>, not_a_knot: bool) -> Result<Self> {
        let n = grid.len();
        if n < 4 {
            return contract(format!("tabulated function needs at least 4 nodes, got {n}"));
        }
        if values.len() != n {
            return contract("grid and values differ in length");
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return contract("tabulation grid must be strictly increasing");
        }
        let h: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
        // rows i = 1..n-2 of the tridiagonal system for the second derivatives
        let mut lo = vec![0.0; n];
        let mut di = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            lo[i] = h[i - 1] / 6.0;
            di[i] = (h[i - 1] + h[i]) / 3.0;
            up[i] = h[i] / 6.0;
            r[i] = (values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1];
        }
        // not-a-knot: m0 = (1 + q) m1 − q m2 with q = h0/h1, and likewise at the right end
        let ql = h[0] / h[1];
        let qr = h[n - 2] / h[n - 3];
        if not_a_knot {
            di[1] += lo[1] * (1.0 + ql);
            up[1] -= lo[1] * ql;
            lo[n - 2] -= up[n - 2] * qr;
            di[n - 2] += up[n - 2] * (1.0 + qr);
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, prev_c, prev_d) = if i == 1 { (0.0, 0.0, 0.0) } else { (lo[i], c[i - 1], d[i - 1]) };
            let denom = di[i] - a * prev_c;
            c[i] = up[i] / denom;
            d[i] = (r[i] - a * prev_d) / denom;
        }
        let mut m = vec![0.0; n];
        for i in (1..n - 1).rev() {
            m[i] = d[i] - if i == n - 2 { 0.0 } else { c[i] * m[i + 1] };
        }
        if not_a_knot {
            m[0] = (1.0 + ql) * m[1] - ql * m[2];
            m[n - 1] = (1.0 + qr) * m[n - 2] - qr * m[n - 3];
        }
        Ok(CubicSpline { grid, values, m })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        let g = &self.grid;
        let n = g.len();
        let xr = x.re();
        let i = g.partition_point(|&v| v <= xr).clamp(1, n - 1) - 1;
        let h = g[i + 1] - g[i];
        let a = T::from_f64(g[i + 1]) - x;
        let b = x - T::from_f64(g[i]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let cube = |t: T| t * t * t;
        cube(a).scale(m0 / (6.0 * h))
            + cube(b).scale(m1 / (6.0 * h))
            + a.scale(y0 / h - m0 * h / 6.0)
            + b.scale(y1 / h - m1 * h / 6.0)
    }
}

// ---------------------------------------------------------------------------
// ScalarFn
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Backing {
    Expr(Expr),
    Tabulated(CubicSpline),
}

/// One-dimensional data function on `[a, b]` with derivatives up to order 3.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFn {
    backing: Backing,
    domain: (f64, f64),
    smoothness: u32,
}

impl ScalarFn {
    pub fn from_expr(e: Expr, domain: (f64, f64)) -> Result<Self> {
        if e.uses_y() {
            return contract("data functions depend on x only");
        }
        check_domain(domain)?;
        Ok(ScalarFn { backing: Backing::Expr(e), domain, smoothness: 3 })
    }

    /// Parses `source` as a function of `x` on `[a, b]`.
    pub fn parse(source: &str, domain: (f64, f64)) -> Result<Self> {
        Self::from_expr(parse(source)?, domain)
    }

    pub fn constant(c: f64, domain: (f64, f64)) -> Self {
        ScalarFn { backing: Backing::Expr(Expr::Num(c)), domain, smoothness: 3 }
    }

    /// Natural cubic spline through samples; the domain is the sample range.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::from_spline(CubicSpline::natural(grid, values)?))
    }

    pub fn from_spline(s: CubicSpline) -> Self {
        let domain = (s.grid[0], *s.grid.last().unwrap());
        ScalarFn { backing: Backing::Tabulated(s), domain, smoothness: 3 }
    }

    pub fn with_smoothness(mut self, k: u32) -> Self {
        self.smoothness = k;
        self
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    /// Unchecked evaluation in any scalar type; tabulated backings extrapolate
    /// with the end cubic.
    pub fn eval<T: Real>(&self, x: T) -> T {
        match &self.backing {
            Backing::Expr(e) => e.eval(x, T::zero()),
            Backing::Tabulated(s) => s.eval(x),
        }
    }

    /// `order`-th derivative evaluated in `T`, by running the function on a jet.
    pub fn deriv<T: Real>(&self, x: T, order: usize) -> T {
        if order == 0 {
            return self.eval(x);
        }
        self.eval(Jet::variable(x)).derivative(order)
    }

    /// Checked evaluation of the value or a derivative at a point.
    pub fn eval_deriv(&self, x: f64, order: usize) -> Result<f64> {
        if order > 3 || order as u32 > self.smoothness {
            return contract(format!(
                "derivative order {order} exceeds smoothness class {}",
                self.smoothness.min(3)
            ));
        }
        let (a, b) = self.domain;
        let slack = 1e-12 * (b - a).abs().max(1.0);
        if !(x >= a - slack && x <= b + slack) {
            return domain(format!("x = {x} outside the domain [{a}, {b}]"));
        }
        Ok(self.deriv(x, order))
    }

    /// Same function scaled by `k` (tabulated backings rescale their samples).
    pub fn scaled(&self, k: f64) -> ScalarFn {
        let backing = match &self.backing {
            Backing::Expr(e) => Backing::Expr(Expr::Mul(Box::new(Expr::Num(k)), Box::new(e.clone()))),
            Backing::Tabulated(s) => Backing::Tabulated(CubicSpline {
                grid: s.grid.clone(),
                values: s.values.iter().map(|v| k * v).collect(),
                m: s.m.iter().map(|v| k * v).collect(),
            }),
        };
        ScalarFn { backing, domain: self.domain, smoothness: self.smoothness }
    }
}

fn check_domain(d: (f64, f64)) -> Result<()> {
    if !(d.0.is_finite() && d.1.is_finite() && d.1 > d.0) {
        return contract(format!("invalid domain [{}, {}]", d.0, d.1));
    }
    Ok(())
}

/// Outcome of the admissibility check `φ(0) = 0`, `φ ∈ C³`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataReport {
    /// `None` when 0 lies outside the domain and the condition cannot be tested.
    pub vanishes_at_zero: Option<bool>,
    pub value_at_zero: Option<f64>,
    pub third_order_available: bool,
    pub warnings: Vec<String>,
}

impl DataReport {
    pub fn passes(&self) -> bool {
        self.vanishes_at_zero == Some(true) && self.third_order_available
    }
}

/// Reports whether `f(0) = 0` and whether three derivatives are available.
/// Never fails; problems are returned as warnings.
pub fn check_data_conditions(f: &ScalarFn) -> DataReport {
    let mut warnings = Vec::new();
    let (a, b) = f.domain();
    let (vanishes_at_zero, value_at_zero) = if a <= 0.0 && 0.0 <= b {
        let v = f.eval(0.0);
        if v.abs() > 1e-10 {
            warnings.push(format!("f(0) = {v} is not zero"));
        }
        (Some(v.abs() <= 1e-10), Some(v))
    } else {
        warnings.push(format!("domain [{a}, {b}] excludes 0, condition f(0) = 0 untestable"));
        (None, None)
    };
    let third_order_available = f.smoothness() >= 3;
    if !third_order_available {
        warnings.push(format!("only {} derivatives claimed", f.smoothness()));
    }
    DataReport { vanishes_at_zero, value_at_zero, third_order_available, warnings }
}
