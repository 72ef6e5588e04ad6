//! Reduced rational functions: elements of the field of fractions of the
//! polynomial ring.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::field::Field;
use super::poly::MPoly;
use crate::error::{Error, Result};

/// A quotient `num / den` with `gcd(num, den) = 1` and `den` monic under
/// graded-lex order. The normal form is unique, so structural equality is
/// field equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc<C> {
    num: MPoly<C>,
    den: MPoly<C>,
}

impl<C: Field> RatFunc<C> {
    /// Reduces and normalizes `num / den`.
    pub fn new(num: MPoly<C>, den: MPoly<C>) -> Result<Self> {
        if num.nvars() != den.nvars() {
            return Err(Error::NvarsMismatch(num.nvars(), den.nvars()));
        }
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: MPoly<C>, den: MPoly<C>) -> Self {
        let n = num.nvars();
        if num.is_zero() {
            return RatFunc {
                num,
                den: MPoly::one(n),
            };
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.inv();
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn from_poly(p: MPoly<C>) -> Self {
        let n = p.nvars();
        RatFunc {
            num: p,
            den: MPoly::one(n),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_poly(MPoly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_poly(MPoly::one(nvars))
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_poly(MPoly::constant(nvars, c))
    }

    pub fn var(nvars: usize, var: usize) -> Self {
        Self::from_poly(MPoly::var(nvars, var))
    }

    pub fn num(&self) -> &MPoly<C> {
        &self.num
    }

    pub fn den(&self) -> &MPoly<C> {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_constant() {
            Some(self.num.constant_value()? / self.den.constant_value()?)
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Variables that occur in the numerator or denominator.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&v| self.num.degree_in(v) > 0 || self.den.degree_in(v) > 0)
            .collect()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::normalize(self.num.scale(c), self.den.clone())
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i32) -> Result<Self> {
        if e >= 0 {
            Ok(RatFunc {
                num: self.num.pow(e as u32),
                den: self.den.pow(e as u32),
            }
            .renormalized())
        } else {
            self.inv()?.pow(-e)
        }
    }

    fn renormalized(self) -> Self {
        // Powers of a reduced fraction stay reduced; only the scale needs fixing.
        let lc = self.den.leading_coeff();
        if lc.is_one() {
            self
        } else {
            let inv = lc.inv();
            RatFunc {
                num: self.num.scale(&inv),
                den: self.den.scale(&inv),
            }
        }
    }

    /// Partial derivative by the quotient rule, with 0-based `var`.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        let dn = self.num.derivative(var)?;
        let dd = self.den.derivative(var)?;
        if dd.is_zero() {
            return Ok(Self::normalize(dn, self.den.clone()));
        }
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        Ok(Self::normalize(top, self.den.pow(2)))
    }

    /// The polynomial `num' * den - num * den'`, which is the derivative
    /// scaled by `den^2`. Used for Jacobian rows where row scaling is free.
    pub fn cleared_derivative(&self, var: usize) -> Result<MPoly<C>> {
        let dn = self.num.derivative(var)?;
        let dd = self.den.derivative(var)?;
        if dd.is_zero() {
            return Ok(&dn * &self.den);
        }
        Ok(&(&dn * &self.den) - &(&self.num * &dd))
    }

    /// Value at a point, or `None` when the denominator vanishes there.
    pub fn eval(&self, point: &[C]) -> Result<Option<C>> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return Ok(None);
        }
        Ok(Some(self.num.eval(point)? / d))
    }

    /// Substitutes `images[i]` for variable `i`. The images may live in a
    /// ring with a different number of variables.
    pub fn substitute(&self, images: &[RatFunc<C>]) -> Result<Self> {
        if images.len() != self.nvars() {
            return Err(Error::NvarsMismatch(self.nvars(), images.len()));
        }
        let target = images
            .first()
            .map_or(self.nvars(), RatFunc::nvars);
        if let Some(bad) = images.iter().find(|r| r.nvars() != target) {
            return Err(Error::NvarsMismatch(target, bad.nvars()));
        }
        let n = self.nvars();
        let degs: Vec<u32> = (0..n)
            .map(|v| self.num.degree_in(v).max(self.den.degree_in(v)))
            .collect();
        let num = substitute_poly(&self.num, images, &degs, target);
        let den = substitute_poly(&self.den, images, &degs, target);
        Self::new(num, den)
    }

    /// Re-embeds into a ring with `new_nvars` variables, sending variable
    /// `i` to variable `map[i]`.
    pub fn rename_vars(&self, new_nvars: usize, map: &[usize]) -> Result<Self> {
        Self::new(
            self.num.rename_vars(new_nvars, map)?,
            self.den.rename_vars(new_nvars, map)?,
        )
    }

    pub fn display_with<'a>(&'a self, labels: &'a [String]) -> RatFuncDisplay<'a, C> {
        RatFuncDisplay { f: self, labels }
    }
}

/// Evaluates `p` at rational-function arguments, homogenized so that the
/// common denominator is `prod den_i^degs[i]`; returns the numerator.
fn substitute_poly<C: Field>(
    p: &MPoly<C>,
    images: &[RatFunc<C>],
    degs: &[u32],
    target: usize,
) -> MPoly<C> {
    let mut out = MPoly::zero(target);
    for (m, c) in p.terms() {
        let mut t = MPoly::constant(target, c.clone());
        for (i, &e) in m.exponents().iter().enumerate() {
            let img = &images[i];
            if e > 0 {
                t = &t * &img.num.pow(e);
            }
            let rest = degs[i] - e;
            if rest > 0 && !img.den.is_one() {
                t = &t * &img.den.pow(rest);
            }
        }
        out = out + t;
    }
    out
}

impl<C: Field> Add<&RatFunc<C>> for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn add(self, rhs: &RatFunc<C>) -> RatFunc<C> {
        if self.den == rhs.den {
            return RatFunc::normalize(&self.num + &rhs.num, self.den.clone());
        }
        RatFunc::normalize(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<C: Field> Sub<&RatFunc<C>> for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn sub(self, rhs: &RatFunc<C>) -> RatFunc<C> {
        self + &(-rhs)
    }
}

impl<C: Field> Mul<&RatFunc<C>> for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn mul(self, rhs: &RatFunc<C>) -> RatFunc<C> {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero(self.nvars());
        }
        // Cross-cancel first so the products stay small.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RatFunc {
            num: &n1 * &n2,
            den: &d1 * &d2,
        }
        .renormalized()
    }
}

/// Panics on division by zero; use [`RatFunc::checked_div`] otherwise.
impl<C: Field> Div<&RatFunc<C>> for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn div(self, rhs: &RatFunc<C>) -> RatFunc<C> {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl<C: Field> Neg for &RatFunc<C> {
    type Output = RatFunc<C>;
    fn neg(self) -> RatFunc<C> {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Field> $tr for RatFunc<C> {
            type Output = RatFunc<C>;
            fn $m(self, rhs: RatFunc<C>) -> RatFunc<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl<C: Field> Neg for RatFunc<C> {
    type Output = RatFunc<C>;
    fn neg(self) -> RatFunc<C> {
        -&self
    }
}

pub struct RatFuncDisplay<'a, C> {
    f: &'a RatFunc<C>,
    labels: &'a [String],
}

impl<C: Field> fmt::Display for RatFuncDisplay<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.f.num.display_with(self.labels);
        if self.f.den.is_one() {
            return write!(f, "{num}");
        }
        let den = self.f.den.display_with(self.labels);
        let wrap_num = self.f.num.num_terms() > 1;
        let wrap_den = self.f.den.num_terms() > 1
            || self.f.den.terms().next().is_some_and(|(m, c)| {
                !c.is_one() || m.exponents().iter().filter(|&&e| e > 0).count() > 1
            });
        match (wrap_num, wrap_den) {
            (true, true) => write!(f, "({num})/({den})"),
            (true, false) => write!(f, "({num})/{den}"),
            (false, true) => write!(f, "{num}/({den})"),
            (false, false) => write!(f, "{num}/{den}"),
        }
    }
}

impl<C: Field> fmt::Display for RatFunc<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}
