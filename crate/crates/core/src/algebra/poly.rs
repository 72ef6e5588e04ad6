//! Sparse multivariate polynomials over an exact coefficient field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::Field;
use super::monomial::Monomial;
use crate::error::{Error, Result};

/// Sparse polynomial in `nvars` variables. Terms are kept in graded-lex
/// order; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MPoly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

/// Binary operation selector for [`poly_ops`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    Gcd,
}

/// Checked binary operation; rejects operands from different rings.
pub fn poly_ops<C: Field>(p: &MPoly<C>, q: &MPoly<C>, op: PolyOp) -> Result<MPoly<C>> {
    if p.nvars != q.nvars {
        return Err(Error::NvarsMismatch(p.nvars, q.nvars));
    }
    Ok(match op {
        PolyOp::Add => p + q,
        PolyOp::Sub => p - q,
        PolyOp::Mul => p * q,
        PolyOp::Gcd => p.gcd(q),
    })
}

impl<C: Field> MPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    /// The variable with 0-based index `var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        Self::term(Monomial::var(nvars, var, 1), C::one())
    }

    pub fn term(m: Monomial, c: C) -> Self {
        let nvars = m.nvars();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::NvarsMismatch(nvars, e.len()));
            }
            p.add_term(Monomial::from_exponents(e), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().is_one(),
            _ => false,
        }
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponents()[var])
            .max()
            .unwrap_or(0)
    }

    /// Variables that occur with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.degree_in(v) > 0).collect()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> C {
        self.leading_term()
            .map_or_else(C::zero, |(_, c)| c.clone())
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    /// Scales so that the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading_coeff();
        if lc.is_one() {
            self.clone()
        } else {
            self.scale(&lc.inv())
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.mul(m), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn eval(&self, point: &[C]) -> Result<C> {
        if point.len() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, point.len()));
        }
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to the 0-based variable `var`.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::VarOutOfRange {
                index: var,
                nvars: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponents()[var];
            if e > 0 {
                out.add_term(
                    m.with_exponent(var, e - 1),
                    c.clone() * C::from_i64(e as i64),
                );
            }
        }
        Ok(out)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.inv()));
        }
        let (lm_d, lc_d) = d.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let lc_inv = lc_d.inv();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((lm_r, lc_r)) = rem.leading_term() {
            let m = lm_r.div(&lm_d)?;
            let c = lc_r.clone() * lc_inv.clone();
            for (dm, dc) in &d.terms {
                rem.add_term(dm.mul(&m), -(dc.clone() * c.clone()));
            }
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Coefficients of `self` viewed as a polynomial in `var`, indexed by
    /// degree. Each coefficient is free of `var`.
    pub fn coeffs_in(&self, var: usize) -> Vec<Self> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponents()[var] as usize;
            out[e].add_term(m.with_exponent(var, 0), c.clone());
        }
        out
    }

    /// Inverse of [`coeffs_in`](Self::coeffs_in).
    pub fn from_coeffs_in(nvars: usize, var: usize, coeffs: &[Self]) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in coeffs.iter().enumerate() {
            for (m, a) in &c.terms {
                out.add_term(m.with_exponent(var, e as u32), a.clone());
            }
        }
        out
    }

    /// Re-embeds into a ring with `new_nvars` variables, sending variable
    /// `i` to variable `map[i]`.
    pub fn rename_vars(&self, new_nvars: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, map.len()));
        }
        if let Some(&bad) = map.iter().find(|&&v| v >= new_nvars) {
            return Err(Error::VarOutOfRange {
                index: bad,
                nvars: new_nvars,
            });
        }
        let mut out = Self::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (i, &x) in m.exponents().iter().enumerate() {
                e[map[i]] += x;
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        Ok(out)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        super::gcd::gcd(self, other)
    }

    /// Renders with the given variable names (defaults to `t1..tn`).
    pub fn display_with<'a>(&'a self, labels: &'a [String]) -> PolyDisplay<'a, C> {
        PolyDisplay { poly: self, labels }
    }

    fn add_assign_ref(&mut self, rhs: &Self) {
        assert_eq!(self.nvars, rhs.nvars, "polynomial ring mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "polynomial ring mismatch");
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Field> Neg for MPoly<C> {
    type Output = MPoly<C>;
    fn neg(mut self) -> MPoly<C> {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<C: Field> Neg for &MPoly<C> {
    type Output = MPoly<C>;
    fn neg(self) -> MPoly<C> {
        -self.clone()
    }
}

impl<C: Field> Add<&MPoly<C>> for &MPoly<C> {
    type Output = MPoly<C>;
    fn add(self, rhs: &MPoly<C>) -> MPoly<C> {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<C: Field> Add for MPoly<C> {
    type Output = MPoly<C>;
    fn add(mut self, rhs: MPoly<C>) -> MPoly<C> {
        self.add_assign_ref(&rhs);
        self
    }
}

impl<C: Field> Sub<&MPoly<C>> for &MPoly<C> {
    type Output = MPoly<C>;
    fn sub(self, rhs: &MPoly<C>) -> MPoly<C> {
        let mut out = self.clone();
        out.add_assign_ref(&-rhs);
        out
    }
}

impl<C: Field> Sub for MPoly<C> {
    type Output = MPoly<C>;
    fn sub(self, rhs: MPoly<C>) -> MPoly<C> {
        &self - &rhs
    }
}

impl<C: Field> Mul<&MPoly<C>> for &MPoly<C> {
    type Output = MPoly<C>;
    fn mul(self, rhs: &MPoly<C>) -> MPoly<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Field> Mul for MPoly<C> {
    type Output = MPoly<C>;
    fn mul(self, rhs: MPoly<C>) -> MPoly<C> {
        self.mul_ref(&rhs)
    }
}

pub struct PolyDisplay<'a, C> {
    poly: &'a MPoly<C>,
    labels: &'a [String],
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial, labels: &[String]) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        match labels.get(i) {
            Some(l) => write!(f, "{l}")?,
            None => write!(f, "t{}", i + 1)?,
        }
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl<C: Field> fmt::Display for PolyDisplay<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write_monomial(f, m, self.labels)?;
            }
        }
        Ok(())
    }
}

impl<C: Field> fmt::Display for MPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}
