//! The pregeometry `(L, acl_K)` for `K = Q(S) ⊂ L = Q(t1..tn)`.
//!
//! Transcendence degree is computed with the Jacobian criterion, which is
//! exact in characteristic zero: elements `x1..xk` are algebraically
//! independent over `Q` iff their Jacobian has rank `k` over `L`.
//! Independence over `K = Q(S)` is the same question with the `S` columns
//! deleted.

mod oracle;

pub use oracle::{dependence_oracle_bruteforce, Annihilator, DependenceVerdict, OracleLimits};

use std::collections::BTreeSet;

use crate::algebra::{default_labels, parse_with_labels, FFMatrix};
use crate::error::{Error, Result};
use crate::{QFunc, QMatrix};

/// Finite ordered list of elements of `L`.
pub type ElementSet = Vec<QFunc>;

/// The ambient extension `K = Q(S) ⊂ L = Q(t1..tn)`. Variables are
/// 0-based internally; labels default to `t1..tn`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExtensionSpec {
    nvars: usize,
    k_vars: BTreeSet<usize>,
    labels: Vec<String>,
}

impl ExtensionSpec {
    pub fn new(nvars: usize, k_vars: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::with_labels(nvars, k_vars, default_labels(nvars))
    }

    /// `K = Q`, `L = Q(t1..tn)`.
    pub fn rational(nvars: usize) -> Self {
        Self::new(nvars, []).expect("empty base is always valid")
    }

    pub fn with_labels(
        nvars: usize,
        k_vars: impl IntoIterator<Item = usize>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let k_vars: BTreeSet<usize> = k_vars.into_iter().collect();
        if let Some(&bad) = k_vars.iter().find(|&&v| v >= nvars) {
            return Err(Error::VarOutOfRange {
                index: bad,
                nvars,
            });
        }
        if labels.len() != nvars {
            return Err(Error::InvalidSpec(format!(
                "{} labels for {nvars} variables",
                labels.len()
            )));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidSpec("duplicate variable labels".into()));
        }
        if let Some(bad) = labels.iter().find(|l| !valid_label(l)) {
            return Err(Error::InvalidSpec(format!("invalid label `{bad}`")));
        }
        Ok(ExtensionSpec {
            nvars,
            k_vars,
            labels,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn k_vars(&self) -> &BTreeSet<usize> {
        &self.k_vars
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Variables outside `S`: a transcendence basis of `L` over `K`.
    pub fn free_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|v| !self.k_vars.contains(v)).collect()
    }

    pub fn trdeg_over_k(&self) -> usize {
        self.nvars - self.k_vars.len()
    }

    /// Fails unless `tr deg_K(L) >= min`.
    pub fn require_trdeg(&self, min: usize) -> Result<()> {
        if self.trdeg_over_k() < min {
            return Err(Error::Precondition(format!(
                "transcendence degree {} is below the required {min}",
                self.trdeg_over_k()
            )));
        }
        Ok(())
    }

    pub fn var(&self, v: usize) -> QFunc {
        QFunc::var(self.nvars, v)
    }

    pub fn parse(&self, src: &str) -> Result<QFunc> {
        parse_with_labels(src, &self.labels)
    }

    pub fn parse_all<S: AsRef<str>>(&self, srcs: &[S]) -> Result<ElementSet> {
        srcs.iter().map(|s| self.parse(s.as_ref())).collect()
    }

    pub fn show(&self, f: &QFunc) -> String {
        f.display_with(&self.labels).to_string()
    }

    pub fn check(&self, f: &QFunc) -> Result<()> {
        if f.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, f.nvars()));
        }
        Ok(())
    }

    fn check_all(&self, xs: &[QFunc]) -> Result<()> {
        xs.iter().try_for_each(|x| self.check(x))
    }
}

fn valid_label(l: &str) -> bool {
    let mut chars = l.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Jacobian of `xs` with respect to the free variables, each row scaled by
/// the square of its element's denominator so every entry is polynomial.
pub fn jacobian(spec: &ExtensionSpec, xs: &[QFunc]) -> QMatrix {
    let free = spec.free_vars();
    let rows = xs
        .iter()
        .map(|x| {
            free.iter()
                .map(|&v| x.cleared_derivative(v).expect("free variable in range"))
                .collect()
        })
        .collect();
    FFMatrix::new(spec.nvars, rows).expect("rows share the ring")
}

/// `tr deg_K K(xs)`.
///
/// Panics if an element lives in a ring of the wrong size; use
/// [`try_trdeg`] for untrusted input.
pub fn trdeg(spec: &ExtensionSpec, xs: &[QFunc]) -> usize {
    try_trdeg(spec, xs).expect("elements belong to the extension")
}

pub fn try_trdeg(spec: &ExtensionSpec, xs: &[QFunc]) -> Result<usize> {
    spec.check_all(xs)?;
    let nonconst: Vec<QFunc> = xs.iter().filter(|x| !x.is_constant()).cloned().collect();
    if nonconst.is_empty() || spec.trdeg_over_k() == 0 {
        return Ok(0);
    }
    Ok(jacobian(spec, &nonconst).rank())
}

/// `y ∈ acl_K(xs)`.
pub fn in_closure(spec: &ExtensionSpec, y: &QFunc, xs: &[QFunc]) -> bool {
    if y.is_constant() {
        return true;
    }
    let base = trdeg(spec, xs);
    if base == spec.trdeg_over_k() {
        return true;
    }
    let mut all = xs.to_vec();
    all.push(y.clone());
    trdeg(spec, &all) == base
}

pub fn is_independent(spec: &ExtensionSpec, xs: &[QFunc]) -> bool {
    xs.len() <= spec.trdeg_over_k() && trdeg(spec, xs) == xs.len()
}

/// Greedy maximal independent subset, scanning `xs` in order.
pub fn basis_of(spec: &ExtensionSpec, xs: &[QFunc]) -> ElementSet {
    basis_indices(spec, xs)
        .into_iter()
        .map(|i| xs[i].clone())
        .collect()
}

/// Positions in `xs` of the greedy basis.
pub fn basis_indices(spec: &ExtensionSpec, xs: &[QFunc]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut current: ElementSet = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if current.len() == spec.trdeg_over_k() {
            break;
        }
        current.push(x.clone());
        if trdeg(spec, &current) == current.len() {
            chosen.push(i);
        } else {
            current.pop();
        }
    }
    chosen
}

/// Evaluates the exchange implication on one instance:
/// `a ∈ acl(A ∪ {y}) \ acl(A)  ⇒  y ∈ acl(A ∪ {a})`.
pub fn exchange_check(spec: &ExtensionSpec, a: &QFunc, y: &QFunc, set: &[QFunc]) -> bool {
    let mut with_y = set.to_vec();
    with_y.push(y.clone());
    let antecedent = in_closure(spec, a, &with_y) && !in_closure(spec, a, set);
    if !antecedent {
        return true;
    }
    let mut with_a = set.to_vec();
    with_a.push(a.clone());
    in_closure(spec, y, &with_a)
}
