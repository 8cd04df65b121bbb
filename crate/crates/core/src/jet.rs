//! Forward-mode jets built from nested dual numbers.
//!
//! `Dual<S>` carries a value and one directional derivative. Because `Dual<S>`
//! is itself a [`Scalar`], nesting gives truncated Taylor jets of any order:
//! `Dual<Dual<f64>>` seeded in directions `u` (outer) and `v` (inner) yields
//! `f`, `D_u f`, `D_v f` and the mixed term `D_u D_v f` in one evaluation.
//! Every quantity in the tensor chain (fundamental tensor, spray, connection,
//! curvature) is obtained this way, so there is no step-size error anywhere.

use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    #[inline]
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    #[inline]
    pub fn constant(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }

    #[inline]
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }

    /// Applies a scalar function with known value and derivative at `re`.
    #[inline]
    fn chain(self, value: S, slope: S) -> Self {
        Dual { re: value, eps: self.eps * slope }
    }
}

impl<S: Scalar> Zero for Dual<S> {
    #[inline]
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<S: Scalar> One for Dual<S> {
    #[inline]
    fn one() -> Self {
        Dual::constant(S::one())
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let re = self.re * inv;
        Dual { re, eps: (self.eps - re * o.eps) * inv }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Scalar> MulAssign for Dual<S> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<S: Scalar> DivAssign for Dual<S> {
    #[inline]
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    type Base = S::Base;

    #[inline]
    fn from_base(v: Self::Base) -> Self {
        Dual::constant(S::from_base(v))
    }

    #[inline]
    fn base(&self) -> Self::Base {
        self.re.base()
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual { re: s, eps: self.eps / (s + s) }
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => {
                let lower = self.re.powi(n - 1);
                Dual { re: lower * self.re, eps: self.eps * lower.scale(<Self::Base as Scalar>::lit(n as f64)) }
            }
        }
    }

    fn powc(self, p: Self::Base) -> Self {
        let lower = self.re.powc(p - <Self::Base as One>::one());
        Dual { re: lower * self.re, eps: self.eps * lower.scale(p) }
    }

    #[inline]
    fn scale(self, c: Self::Base) -> Self {
        Dual { re: self.re.scale(c), eps: self.eps.scale(c) }
    }
}

/// Embeds a point as constants one jet level up.
pub fn lift<S: Scalar>(v: &[S]) -> Vec<Dual<S>> {
    v.iter().map(|&c| Dual::constant(c)).collect()
}

/// Embeds a point with the coordinate direction `k` seeded.
pub fn seed<S: Scalar>(v: &[S], k: usize) -> Vec<Dual<S>> {
    v.iter()
        .enumerate()
        .map(|(i, &c)| if i == k { Dual::variable(c) } else { Dual::constant(c) })
        .collect()
}

/// Embeds a point moving with velocity `dir`.
pub fn seed_along<S: Scalar>(v: &[S], dir: &[S]) -> Vec<Dual<S>> {
    debug_assert_eq!(v.len(), dir.len());
    v.iter().zip(dir).map(|(&c, &d)| Dual::new(c, d)).collect()
}

pub fn values<S: Scalar>(v: &[Dual<S>]) -> Vec<S> {
    v.iter().map(|d| d.re).collect()
}

pub fn tangents<S: Scalar>(v: &[Dual<S>]) -> Vec<S> {
    v.iter().map(|d| d.eps).collect()
}
