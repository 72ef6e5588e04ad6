//! Annihilator search by exact linear algebra, independent of the Jacobian.
//!
//! For `xs = N_i / D_i` and a degree bound `d`, a relation
//! `sum_a c_a y^a` of degree at most `d` exists iff the polynomials
//! `prod_i N_i^{a_i} D_i^{d - a_i}` are linearly dependent over `Q(S)`.
//! Expanding them and collecting coefficients of monomials in the free
//! variables gives a matrix over `Q[S]` whose kernel is the relation space.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::ExtensionSpec;
use crate::algebra::{Monomial, MPoly};
use crate::error::{Error, Result};
use crate::{QFunc, QPoly, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_degree: u32,
    /// Cap on both the number of unknown coefficients and the number of
    /// distinct free monomials in the expanded system.
    pub monomial_cap: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_degree: 4,
            monomial_cap: 2000,
        }
    }
}

/// A nonzero `P(y1..yk)` with coefficients in `Q[S]` and `P(xs) = 0`.
///
/// The polynomial lives in `k + n` variables: `y1..yk` first, then the
/// ambient variables (only those in `S` occur).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annihilator {
    pub poly: QPoly,
    pub degree: u32,
    pub arity: usize,
}

impl Annihilator {
    pub fn labels(&self, spec: &ExtensionSpec) -> Vec<String> {
        (1..=self.arity)
            .map(|i| format!("y{i}"))
            .chain(spec.labels().iter().cloned())
            .collect()
    }

    pub fn show(&self, spec: &ExtensionSpec) -> String {
        self.poly.display_with(&self.labels(spec)).to_string()
    }

    /// True when `self` and `other` agree up to a nonzero factor in `Q(S)`.
    pub fn same_up_to_scalar(&self, other: &QPoly) -> bool {
        if self.poly.nvars() != other.nvars() || other.is_zero() {
            return false;
        }
        let (m, a) = self.poly.leading_term().expect("annihilator is nonzero");
        let b = other
            .terms()
            .find(|(mm, _)| *mm == m)
            .map(|(_, c)| c.clone());
        match b {
            Some(b) => self.poly.scale(&b) == other.scale(a),
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DependenceVerdict {
    Independent { up_to_degree: u32 },
    Annihilator(Annihilator),
}

impl DependenceVerdict {
    pub fn is_independent(&self) -> bool {
        matches!(self, DependenceVerdict::Independent { .. })
    }
}

pub fn dependence_oracle_bruteforce(
    spec: &ExtensionSpec,
    xs: &[QFunc],
    max_degree: u32,
) -> Result<DependenceVerdict> {
    dependence_oracle_with_limits(
        spec,
        xs,
        OracleLimits {
            max_degree,
            ..OracleLimits::default()
        },
    )
}

/// Tries degrees `1..=max_degree` in turn and returns the first relation
/// found, which therefore has minimal total degree.
pub fn dependence_oracle_with_limits(
    spec: &ExtensionSpec,
    xs: &[QFunc],
    limits: OracleLimits,
) -> Result<DependenceVerdict> {
    for x in xs {
        spec.check(x)?;
    }
    if xs.is_empty() {
        return Ok(DependenceVerdict::Independent {
            up_to_degree: limits.max_degree,
        });
    }
    for d in 1..=limits.max_degree {
        if let Some(rel) = search_degree(spec, xs, d, limits.monomial_cap)? {
            verify(spec, xs, &rel)?;
            return Ok(DependenceVerdict::Annihilator(Annihilator {
                poly: rel,
                degree: d,
                arity: xs.len(),
            }));
        }
    }
    Ok(DependenceVerdict::Independent {
        up_to_degree: limits.max_degree,
    })
}

/// Exponent vectors in `k` variables with total degree at most `d`.
fn exponents_up_to(k: usize, d: u32) -> Vec<Vec<u32>> {
    fn go(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            go(k, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, d, &mut Vec::with_capacity(k), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn search_degree(spec: &ExtensionSpec, xs: &[QFunc], d: u32, cap: usize) -> Result<Option<QPoly>> {
    let k = xs.len();
    let n = spec.nvars();
    let ncols = binomial(k + d as usize, d as usize).unwrap_or(usize::MAX);
    if ncols > cap {
        return Err(Error::SearchCap(format!(
            "{ncols} unknown coefficients at degree {d} exceed the cap {cap}"
        )));
    }
    let alphas = exponents_up_to(k, d);

    let num_pows: Vec<Vec<QPoly>> = xs.iter().map(|x| powers(x.num(), d)).collect();
    let den_pows: Vec<Vec<QPoly>> = xs.iter().map(|x| powers(x.den(), d)).collect();

    let k_vars = spec.k_vars();
    let mut rows: BTreeMap<Vec<u32>, Vec<QPoly>> = BTreeMap::new();
    for (col, alpha) in alphas.iter().enumerate() {
        let mut prod = QPoly::one(n);
        for i in 0..k {
            let a = alpha[i] as usize;
            prod = &prod * &num_pows[i][a];
            prod = &prod * &den_pows[i][d as usize - a];
        }
        for (m, c) in prod.terms() {
            let mut free = m.exponents().to_vec();
            let mut base = m.exponents().to_vec();
            for v in 0..n {
                if k_vars.contains(&v) {
                    free[v] = 0;
                } else {
                    base[v] = 0;
                }
            }
            let row = rows
                .entry(free)
                .or_insert_with(|| vec![QPoly::zero(n); alphas.len()]);
            row[col] = &row[col] + &QPoly::term(Monomial::from_exponents(base), c.clone());
            if rows.len() > cap {
                return Err(Error::SearchCap(format!(
                    "more than {cap} free monomials at degree {d}"
                )));
            }
        }
    }

    let kernel: Option<Vec<QPoly>> = if k_vars.is_empty() {
        let m: Vec<Vec<Q>> = rows
            .into_values()
            .map(|r| r.iter().map(|p| p.constant_value().unwrap_or_else(Q::zero)).collect())
            .collect();
        kernel_vector(m, alphas.len(), Q::zero(), Q::one()).map(|v| {
            let v = clear_scalar(v);
            v.into_iter().map(|c| QPoly::constant(n, c)).collect()
        })
    } else {
        let m: Vec<Vec<QFunc>> = rows
            .into_values()
            .map(|r| r.into_iter().map(QFunc::from_poly).collect())
            .collect();
        kernel_vector(m, alphas.len(), QFunc::zero(n), QFunc::one(n))
            .map(|v| clear_functions(v, n))
    };
    let Some(coeffs) = kernel else {
        return Ok(None);
    };

    // Assemble P in the ring y1..yk, t1..tn.
    let shift: Vec<usize> = (k..k + n).collect();
    let mut rel = QPoly::zero(k + n);
    for (alpha, c) in alphas.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let mut e = alpha.clone();
        e.resize(k + n, 0);
        let ymon = QPoly::term(Monomial::from_exponents(e), Q::one());
        rel = &rel + &(&ymon * &c.rename_vars(k + n, &shift)?);
    }
    Ok(Some(rel.monic()))
}

fn powers(p: &QPoly, d: u32) -> Vec<QPoly> {
    let mut out = vec![QPoly::one(p.nvars())];
    for i in 0..d as usize {
        out.push(&out[i] * p);
    }
    out
}

fn verify(spec: &ExtensionSpec, xs: &[QFunc], rel: &QPoly) -> Result<()> {
    let n = spec.nvars();
    let images: Vec<QFunc> = xs
        .iter()
        .cloned()
        .chain((0..n).map(|v| spec.var(v)))
        .collect();
    let value = QFunc::from_poly(rel.clone()).substitute(&images)?;
    if value.is_zero() {
        Ok(())
    } else {
        Err(Error::Internal(
            "annihilator search produced a non-vanishing polynomial".into(),
        ))
    }
}

/// Minimal field interface for the elimination below.
trait LinElem: Clone {
    fn is_zero_elem(&self) -> bool;
    fn sub_elem(&self, other: &Self) -> Self;
    fn mul_elem(&self, other: &Self) -> Self;
    fn div_elem(&self, other: &Self) -> Self;
    fn neg_elem(&self) -> Self;
}

macro_rules! lin_elem {
    ($t:ty) => {
        impl LinElem for $t {
            fn is_zero_elem(&self) -> bool {
                self.is_zero()
            }
            fn sub_elem(&self, other: &Self) -> Self {
                self - other
            }
            fn mul_elem(&self, other: &Self) -> Self {
                self * other
            }
            fn div_elem(&self, other: &Self) -> Self {
                self / other
            }
            fn neg_elem(&self) -> Self {
                -self
            }
        }
    };
}

lin_elem!(Q);
lin_elem!(QFunc);

/// One nonzero vector in the right kernel of `m`, or `None` if the
/// columns are independent. Gauss-Jordan with first-nonzero pivots.
fn kernel_vector<E: LinElem>(mut m: Vec<Vec<E>>, ncols: usize, zero: E, one: E) -> Option<Vec<E>> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero_elem()) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for j in c..ncols {
            m[r][j] = m[r][j].div_elem(&piv);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero_elem() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    if !m[r][j].is_zero_elem() {
                        m[i][j] = m[i][j].sub_elem(&f.mul_elem(&m[r][j]));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut v = vec![zero; ncols];
    v[free] = one;
    for (row, &pc) in pivots.iter().enumerate() {
        if pc < free {
            v[pc] = m[row][free].neg_elem();
        }
    }
    Some(v)
}

fn clear_scalar(v: Vec<Q>) -> Vec<Q> {
    use num_integer::Integer;
    let lcm = v
        .iter()
        .filter(|c| !c.is_zero())
        .fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
    v.into_iter()
        .map(|c| c * Q::from_integer(lcm.clone()))
        .collect()
}

fn clear_functions(v: Vec<QFunc>, n: usize) -> Vec<QPoly> {
    let mut lcm = QPoly::one(n);
    for c in v.iter().filter(|c| !c.is_zero()) {
        let g = lcm.gcd(c.den());
        lcm = &lcm * &c.den().div_exact(&g).expect("gcd divides");
    }
    let polys: Vec<QPoly> = v
        .iter()
        .map(|c| {
            let scaled = c * &QFunc::from_poly(lcm.clone());
            debug_assert!(scaled.is_polynomial());
            scaled.num().clone()
        })
        .collect();
    let g = polys
        .iter()
        .filter(|p| !p.is_zero())
        .fold(MPoly::zero(n), |acc: QPoly, p| if acc.is_zero() { p.clone() } else { acc.gcd(p) });
    if g.is_zero() || g.is_constant() {
        return polys;
    }
    polys
        .into_iter()
        .map(|p| p.div_exact(&g).expect("common factor divides"))
        .collect()
}
