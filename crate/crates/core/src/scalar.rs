//! Scalar abstraction shared by every evaluator in the crate.
//!
//! Data functions and solution fields are written once against [`Real`] and
//! evaluated with plain floats, with [`Jet`] (univariate Taylor coefficients
//! up to degree 3) or with [`Taylor2`] (value plus all partial derivatives up
//! to second order in two variables). The jet types nest, so a
//! `Jet<Taylor2<f64>>` carries trace derivatives whose own partials are exact.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

/// Real-valued scalar: `f32`, `f64`, or a forward-mode jet over one of them.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    /// Value part, used for branching and interval lookup.
    fn re(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: Self) -> Self;
    fn abs(self) -> Self;

    #[inline]
    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    #[inline]
    fn recip(self) -> Self {
        Self::one() / self
    }
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn atan(self) -> Self {
                <$t>::atan(self)
            }
            #[inline]
            fn asin(self) -> Self {
                <$t>::asin(self)
            }
            #[inline]
            fn acos(self) -> Self {
                <$t>::acos(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            #[inline]
            fn powf(self, p: Self) -> Self {
                <$t>::powf(self, p)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

fn powi_by_squaring<T: Real>(x: T, n: i32) -> T {
    if n < 0 {
        return powi_by_squaring(x, -n).recip();
    }
    let mut base = x;
    let mut acc = T::one();
    let mut e = n as u32;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base = base * base;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Jet: truncated Taylor polynomial of degree 3 in one variable.
// ---------------------------------------------------------------------------

/// Degree-3 truncated Taylor polynomial. `c[k]` is `f^(k)(x0) / k!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub c: [T; 4],
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        let z = T::zero();
        Jet { c: [v, z, z, z] }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: T) -> Self {
        let z = T::zero();
        Jet { c: [x0, T::one(), z, z] }
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// `k`-th derivative (not the Taylor coefficient).
    pub fn derivative(&self, k: usize) -> T {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.c[k].scale(FACT[k])
    }

    /// `f(self)` given the Taylor coefficients of `f` at `self.c[0]`.
    fn compose(self, f: [T; 4]) -> Self {
        let [_, a1, a2, a3] = self.c;
        let two = T::from_f64(2.0);
        Jet {
            c: [
                f[0],
                f[1] * a1,
                f[1] * a2 + f[2] * a1 * a1,
                f[1] * a3 + two * f[2] * a1 * a2 + f[3] * a1 * a1 * a1,
            ],
        }
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet { c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2], self.c[3] + o.c[3]] }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Jet { c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2], self.c[3] - o.c[3]] }
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet { c: [-self.c[0], -self.c[1], -self.c[2], -self.c[3]] }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = self.c;
        let b = o.c;
        Jet {
            c: [
                a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
                a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
            ],
        }
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let r = o.c[0].recip();
        let r2 = r * r;
        let inv = o.compose([r, -r2, r2 * r, -(r2 * r2)]);
        self * inv
    }
}

impl<T: Real> Rem for Jet<T> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        let q = (self.c[0].re() / o.c[0].re()).trunc();
        self - o * Jet::constant(T::from_f64(q))
    }
}

impl<T: Real> Zero for Jet<T> {
    fn zero() -> Self {
        Jet::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.is_zero())
    }
}

impl<T: Real> One for Jet<T> {
    fn one() -> Self {
        Jet::constant(T::one())
    }
}

impl<T: Real> Num for Jet<T> {
    type FromStrRadixErr = ();
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ()> {
        if radix != 10 {
            return Err(());
        }
        s.parse::<f64>().map(|v| Jet::constant(T::from_f64(v))).map_err(|_| ())
    }
}

macro_rules! assign_ops {
    ($ty:ident) => {
        impl<T: Real> AddAssign for $ty<T> {
            fn add_assign(&mut self, o: Self) {
                *self = *self + o;
            }
        }
        impl<T: Real> SubAssign for $ty<T> {
            fn sub_assign(&mut self, o: Self) {
                *self = *self - o;
            }
        }
        impl<T: Real> MulAssign for $ty<T> {
            fn mul_assign(&mut self, o: Self) {
                *self = *self * o;
            }
        }
        impl<T: Real> DivAssign for $ty<T> {
            fn div_assign(&mut self, o: Self) {
                *self = *self / o;
            }
        }
    };
}

assign_ops!(Jet);
assign_ops!(Taylor2);

impl<T: Real> Real for Jet<T> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(T::from_f64(v))
    }

    fn re(self) -> f64 {
        self.c[0].re()
    }

    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e.scale(0.5), e.scale(1.0 / 6.0)])
    }

    fn ln(self) -> Self {
        let a = self.c[0];
        let r = a.recip();
        let r2 = r * r;
        self.compose([a.ln(), r, r2.scale(-0.5), (r2 * r).scale(1.0 / 3.0)])
    }

    fn sqrt(self) -> Self {
        let s = self.c[0].sqrt();
        let r = s.recip();
        let r3 = r * r * r;
        self.compose([s, r.scale(0.5), r3.scale(-0.125), (r3 * r * r).scale(0.0625)])
    }

    fn sin(self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        self.compose([s, c, s.scale(-0.5), c.scale(-1.0 / 6.0)])
    }

    fn cos(self) -> Self {
        let (s, c) = (self.c[0].sin(), self.c[0].cos());
        self.compose([c, -s, c.scale(-0.5), s.scale(1.0 / 6.0)])
    }

    fn atan(self) -> Self {
        let a = self.c[0];
        let d = (T::one() + a * a).recip();
        let three_a2_m1 = (a * a).scale(3.0) - T::one();
        self.compose([a.atan(), d, -(a * d * d), three_a2_m1 * d * d * d.scale(1.0 / 3.0)])
    }

    fn asin(self) -> Self {
        let a = self.c[0];
        let q = (T::one() - a * a).sqrt().recip();
        let q3 = q * q * q;
        let one_2a2 = T::one() + (a * a).scale(2.0);
        self.compose([a.asin(), q, (a * q3).scale(0.5), (one_2a2 * q3 * q * q).scale(1.0 / 6.0)])
    }

    fn acos(self) -> Self {
        let a = self.c[0];
        let q = (T::one() - a * a).sqrt().recip();
        let q3 = q * q * q;
        let one_2a2 = T::one() + (a * a).scale(2.0);
        self.compose([a.acos(), -q, (a * q3).scale(-0.5), (one_2a2 * q3 * q * q).scale(-1.0 / 6.0)])
    }

    fn powi(self, n: i32) -> Self {
        powi_by_squaring(self, n)
    }

    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }

    fn abs(self) -> Self {
        if self.c[0].re() < 0.0 {
            -self
        } else {
            self
        }
    }
}

// ---------------------------------------------------------------------------
// Taylor2: value and partials up to second order in (x, y).
// ---------------------------------------------------------------------------

/// Bivariate second-order truncated Taylor expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor2<T> {
    pub v: T,
    pub x: T,
    pub y: T,
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Taylor2<T> {
    pub fn constant(v: T) -> Self {
        let z = T::zero();
        Taylor2 { v, x: z, y: z, xx: z, xy: z, yy: z }
    }

    pub fn var_x(v: T) -> Self {
        Taylor2 { x: T::one(), ..Self::constant(v) }
    }

    pub fn var_y(v: T) -> Self {
        Taylor2 { y: T::one(), ..Self::constant(v) }
    }

    /// `f(self)` from `f`, `f'`, `f''` evaluated at the value part.
    fn chain(self, f: T, f1: T, f2: T) -> Self {
        Taylor2 {
            v: f,
            x: f1 * self.x,
            y: f1 * self.y,
            xx: f1 * self.xx + f2 * self.x * self.x,
            xy: f1 * self.xy + f2 * self.x * self.y,
            yy: f1 * self.yy + f2 * self.y * self.y,
        }
    }
}

impl<T: Real> Add for Taylor2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Taylor2 {
            v: self.v + o.v,
            x: self.x + o.x,
            y: self.y + o.y,
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yy: self.yy + o.yy,
        }
    }
}

impl<T: Real> Sub for Taylor2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Taylor2 {
            v: self.v - o.v,
            x: self.x - o.x,
            y: self.y - o.y,
            xx: self.xx - o.xx,
            xy: self.xy - o.xy,
            yy: self.yy - o.yy,
        }
    }
}

impl<T: Real> Neg for Taylor2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Taylor2 { v: -self.v, x: -self.x, y: -self.y, xx: -self.xx, xy: -self.xy, yy: -self.yy }
    }
}

impl<T: Real> Mul for Taylor2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = T::from_f64(2.0);
        Taylor2 {
            v: self.v * o.v,
            x: self.v * o.x + self.x * o.v,
            y: self.v * o.y + self.y * o.v,
            xx: self.v * o.xx + two * self.x * o.x + self.xx * o.v,
            xy: self.v * o.xy + self.x * o.y + self.y * o.x + self.xy * o.v,
            yy: self.v * o.yy + two * self.y * o.y + self.yy * o.v,
        }
    }
}

impl<T: Real> Div for Taylor2<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let r = o.v.recip();
        let inv = o.chain(r, -(r * r), (r * r * r).scale(2.0));
        self * inv
    }
}

impl<T: Real> Rem for Taylor2<T> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        let q = (self.v.re() / o.v.re()).trunc();
        self - o * Taylor2::constant(T::from_f64(q))
    }
}

impl<T: Real> Zero for Taylor2<T> {
    fn zero() -> Self {
        Taylor2::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        [self.v, self.x, self.y, self.xx, self.xy, self.yy].iter().all(|v| v.is_zero())
    }
}

impl<T: Real> One for Taylor2<T> {
    fn one() -> Self {
        Taylor2::constant(T::one())
    }
}

impl<T: Real> Num for Taylor2<T> {
    type FromStrRadixErr = ();
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ()> {
        if radix != 10 {
            return Err(());
        }
        s.parse::<f64>().map(|v| Taylor2::constant(T::from_f64(v))).map_err(|_| ())
    }
}

impl<T: Real> Real for Taylor2<T> {
    fn from_f64(v: f64) -> Self {
        Taylor2::constant(T::from_f64(v))
    }

    fn re(self) -> f64 {
        self.v.re()
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -(r * r))
    }

    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let r = s.recip();
        self.chain(s, r.scale(0.5), (r * r * r).scale(-0.25))
    }

    fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    fn atan(self) -> Self {
        let a = self.v;
        let d = (T::one() + a * a).recip();
        self.chain(a.atan(), d, (a * d * d).scale(-2.0))
    }

    fn asin(self) -> Self {
        let a = self.v;
        let q = (T::one() - a * a).sqrt().recip();
        self.chain(a.asin(), q, a * q * q * q)
    }

    fn acos(self) -> Self {
        let a = self.v;
        let q = (T::one() - a * a).sqrt().recip();
        self.chain(a.acos(), -q, -(a * q * q * q))
    }

    fn powi(self, n: i32) -> Self {
        powi_by_squaring(self, n)
    }

    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }

    fn abs(self) -> Self {
        if self.v.re() < 0.0 {
            -self
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd1(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn jet_elementary_derivatives_match_closed_forms() {
        let x = 0.37;
        let j = Jet::variable(x);
        let s = j.sin();
        assert_relative_eq!(s.derivative(3), -x.cos(), epsilon = 1e-14);
        let l = j.ln();
        assert_relative_eq!(l.derivative(3), 2.0 / x.powi(3), epsilon = 1e-12);
        let q = j.sqrt();
        assert_relative_eq!(q.derivative(2), -0.25 * x.powf(-1.5), epsilon = 1e-12);
        let a = j.asin();
        assert_relative_eq!(a.derivative(1), 1.0 / (1.0 - x * x).sqrt(), epsilon = 1e-14);
        let t = j.atan();
        assert_relative_eq!(t.derivative(2), -2.0 * x / (1.0 + x * x).powi(2), epsilon = 1e-14);
        let r = Jet::constant(1.0) / j;
        assert_relative_eq!(r.derivative(3), -6.0 / x.powi(4), epsilon = 1e-11);
    }

    #[test]
    fn jet_acos_third_derivative_matches_fd_of_second() {
        let f2 = |x: f64| Jet::variable(x).acos().derivative(2);
        let x = 0.21;
        assert_relative_eq!(Jet::variable(x).acos().derivative(3), fd1(f2, x), epsilon = 1e-7);
    }

    #[test]
    fn taylor2_mixed_partials() {
        // f = x^2 y + sin(x y)
        let (x0, y0) = (0.4, 1.3);
        let x = Taylor2::var_x(x0);
        let y = Taylor2::var_y(y0);
        let f = x * x * y + (x * y).sin();
        let c = (x0 * y0).cos();
        let s = (x0 * y0).sin();
        assert_relative_eq!(f.x, 2.0 * x0 * y0 + y0 * c, epsilon = 1e-14);
        assert_relative_eq!(f.xy, 2.0 * x0 + c - x0 * y0 * s, epsilon = 1e-14);
        assert_relative_eq!(f.yy, -x0 * x0 * s, epsilon = 1e-14);
        assert_relative_eq!(f.xx, 2.0 * y0 - y0 * y0 * s, epsilon = 1e-14);
    }

    #[test]
    fn nested_jet_over_taylor2() {
        // d^2/du^2 exp(u) at u = x*y, then differentiate the result in x.
        let (x0, y0) = (0.3, 0.8);
        let u = Taylor2::var_x(x0) * Taylor2::var_y(y0);
        let j = Jet::variable(u).exp();
        let d2 = j.derivative(2);
        let e = (x0 * y0).exp();
        assert_relative_eq!(d2.v, e, epsilon = 1e-14);
        assert_relative_eq!(d2.x, y0 * e, epsilon = 1e-14);
        assert_relative_eq!(d2.xy, e + x0 * y0 * e, epsilon = 1e-14);
    }

    #[test]
    fn powi_negative_base() {
        let j = Jet::variable(-2.0);
        let p = j.powi(3);
        assert_eq!(p.value(), -8.0);
        assert_eq!(p.derivative(1), 12.0);
        assert_eq!(p.derivative(2), -12.0);
        assert_eq!(Real::powi(-2.0f64, -2), 0.25);
    }

    #[test]
    fn f32_implements_real() {
        let v: f32 = Real::sqrt(Real::from_f64(2.0));
        assert!((v - std::f32::consts::SQRT_2).abs() < 1e-6);
    }
}
