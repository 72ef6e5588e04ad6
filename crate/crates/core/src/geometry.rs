//! Points and flats of the geometry of `L/K`.
//!
//! A point is a class of transcendental elements under `x ~ y` iff
//! `acl(x) = acl(y)`; there is no canonical representative, so equality
//! is the two-way closure test. A flat is stored by generators.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pregeometry::{in_closure, trdeg, try_trdeg, ExtensionSpec};
use crate::QFunc;

#[derive(Clone, Debug)]
pub struct GeoPoint {
    rep: QFunc,
    spec: Arc<ExtensionSpec>,
}

impl GeoPoint {
    pub fn rep(&self) -> &QFunc {
        &self.rep
    }

    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    /// Same point with another representative; fails unless `rep ~ self.rep`.
    pub fn with_rep(&self, rep: QFunc) -> Result<GeoPoint> {
        let p = point_of(&self.spec, rep)?;
        if p != *self {
            return Err(Error::Precondition("representative of a different point".into()));
        }
        Ok(p)
    }
}

impl PartialEq for GeoPoint {
    fn eq(&self, other: &Self) -> bool {
        in_closure(&self.spec, &self.rep, std::slice::from_ref(&other.rep))
            && in_closure(&self.spec, &other.rep, std::slice::from_ref(&self.rep))
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.spec.show(&self.rep))
    }
}

pub fn point_of(spec: &Arc<ExtensionSpec>, x: QFunc) -> Result<GeoPoint> {
    match try_trdeg(spec, std::slice::from_ref(&x))? {
        1 => Ok(GeoPoint {
            rep: x,
            spec: Arc::clone(spec),
        }),
        _ => Err(Error::NotTranscendental(spec.show(&x))),
    }
}

/// Closed set `acl_K(gens)`.
#[derive(Clone, Debug)]
pub struct Flat {
    gens: Vec<QFunc>,
    rank: usize,
    spec: Arc<ExtensionSpec>,
}

impl Flat {
    pub fn gens(&self) -> &[QFunc] {
        &self.gens
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    pub fn contains_elem(&self, y: &QFunc) -> bool {
        in_closure(&self.spec, y, &self.gens)
    }

    /// The flat spanned by `self` and `other`.
    pub fn join(&self, other: &Flat) -> Flat {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        flat_of(&self.spec, gens).expect("both flats share the spec")
    }
}

impl PartialEq for Flat {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && flat_leq(self, other)
    }
}

pub fn flat_of(spec: &Arc<ExtensionSpec>, gens: Vec<QFunc>) -> Result<Flat> {
    let rank = try_trdeg(spec, &gens)?;
    Ok(Flat {
        gens,
        rank,
        spec: Arc::clone(spec),
    })
}

/// Flat spanned by a list of points.
pub fn flat_of_points(spec: &Arc<ExtensionSpec>, points: &[&GeoPoint]) -> Flat {
    flat_of(spec, points.iter().map(|p| p.rep.clone()).collect()).expect("points share the spec")
}

pub fn flat_contains(f: &Flat, p: &GeoPoint) -> bool {
    f.contains_elem(&p.rep)
}

/// `acl(f) ⊆ acl(g)`.
pub fn flat_leq(f: &Flat, g: &Flat) -> bool {
    if f.rank > g.rank {
        return false;
    }
    let mut all = g.gens.clone();
    all.extend(f.gens.iter().cloned());
    trdeg(&g.spec, &all) == g.rank
}

fn check_coordinate(spec: &ExtensionSpec, vars: &BTreeSet<usize>) -> Result<()> {
    for &v in vars {
        if v >= spec.nvars() {
            return Err(Error::VarOutOfRange {
                index: v,
                nvars: spec.nvars(),
            });
        }
        if spec.k_vars().contains(&v) {
            return Err(Error::Unsupported(format!(
                "{} lies in the base field, not in the transcendence basis",
                spec.labels()[v]
            )));
        }
    }
    Ok(())
}

/// Intersection of coordinate flats `acl(A) ∩ acl(B) = acl(A ∩ B)` for
/// subsets of the free variables.
pub fn coordinate_flat_intersection(
    spec: &ExtensionSpec,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>> {
    check_coordinate(spec, a)?;
    check_coordinate(spec, b)?;
    Ok(a.intersection(b).copied().collect())
}

/// If `elems` span a coordinate flat, the free variables it contains.
pub fn as_coordinate_flat(spec: &ExtensionSpec, elems: &[QFunc]) -> Option<BTreeSet<usize>> {
    let vars: BTreeSet<usize> = spec
        .free_vars()
        .into_iter()
        .filter(|&v| in_closure(spec, &spec.var(v), elems))
        .collect();
    (trdeg(spec, elems) == vars.len()).then_some(vars)
}

/// Checks a claimed intersection `C` of two arbitrary flats: both
/// containments, and the rank when it is known independently.
pub fn verify_intersection_claim(
    spec: &ExtensionSpec,
    a: &[QFunc],
    b: &[QFunc],
    c: &[QFunc],
    expected_rank: Option<usize>,
) -> bool {
    let inside = |set: &[QFunc]| c.iter().all(|x| in_closure(spec, x, set));
    inside(a) && inside(b) && expected_rank.is_none_or(|r| trdeg(spec, c) == r)
}

/// A pair `L1 ⊆ L2` where `L1 = Q(t1..tk)` sits inside `L2 = Q(t1..tm)`,
/// by default on the first `k` variables, over the same base field.
#[derive(Clone, Debug)]
pub struct Tower {
    lower: Arc<ExtensionSpec>,
    upper: Arc<ExtensionSpec>,
    embedding: Vec<usize>,
}

impl Tower {
    pub fn new(lower: ExtensionSpec, upper: ExtensionSpec) -> Result<Tower> {
        if lower.nvars() > upper.nvars() {
            return Err(Error::InvalidSpec(format!(
                "lower field has {} variables, upper only {}",
                lower.nvars(),
                upper.nvars()
            )));
        }
        if lower.k_vars() != upper.k_vars() {
            return Err(Error::InvalidSpec("tower levels have different base fields".into()));
        }
        let embedding = (0..lower.nvars()).collect();
        Ok(Tower {
            lower: Arc::new(lower),
            upper: Arc::new(upper),
            embedding,
        })
    }

    /// Embeds variable `i` of the lower field as variable `embedding[i]` of
    /// the upper one. Base variables must stay in place.
    pub fn with_embedding(lower: ExtensionSpec, upper: ExtensionSpec, embedding: Vec<usize>) -> Result<Tower> {
        let mut t = Tower::new(lower, upper)?;
        if embedding.len() != t.lower.nvars() {
            return Err(Error::NvarsMismatch(t.lower.nvars(), embedding.len()));
        }
        let distinct: BTreeSet<usize> = embedding.iter().copied().collect();
        if distinct.len() != embedding.len() || embedding.iter().any(|&v| v >= t.upper.nvars()) {
            return Err(Error::InvalidSpec("embedding is not injective into the upper variables".into()));
        }
        if t.lower.k_vars().iter().any(|&v| embedding[v] != v) {
            return Err(Error::InvalidSpec("embedding moves a base variable".into()));
        }
        t.embedding = embedding;
        Ok(t)
    }

    /// `Q(t1..tk) ⊆ Q(t1..tm)` over `Q`, `K` generated by `base`.
    pub fn rational(k: usize, m: usize, base: &[usize]) -> Result<Tower> {
        Tower::new(
            ExtensionSpec::new(k, base.iter().copied())?,
            ExtensionSpec::new(m, base.iter().copied())?,
        )
    }

    pub fn lower(&self) -> &Arc<ExtensionSpec> {
        &self.lower
    }

    pub fn upper(&self) -> &Arc<ExtensionSpec> {
        &self.upper
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    /// Whether the hypothesis `tr deg_K L1 = tr deg_K L2` holds.
    pub fn equal_trdeg(&self) -> bool {
        self.lower.trdeg_over_k() == self.upper.trdeg_over_k()
    }

    pub fn embed(&self, x: &QFunc) -> Result<QFunc> {
        self.lower.check(x)?;
        x.rename_vars(self.upper.nvars(), &self.embedding)
    }

    pub fn embed_all(&self, xs: &[QFunc]) -> Result<Vec<QFunc>> {
        xs.iter().map(|x| self.embed(x)).collect()
    }
}

/// Evaluates `acl(A) ∩ L1 ⊄ acl(B) ∩ L1` in `L1` and the same statement
/// in `L2`, and reports whether they agree. Since `A` lies in `L1`, the
/// non-containment holds iff some generator of `A` escapes `acl(B)`.
pub fn relative_containment_check(tower: &Tower, a: &[QFunc], b: &[QFunc]) -> Result<bool> {
    let (lower, upper) = relative_containment_sides(tower, a, b)?;
    Ok(lower == upper)
}

/// Both sides of the relative-containment equivalence, lower field first.
pub fn relative_containment_sides(tower: &Tower, a: &[QFunc], b: &[QFunc]) -> Result<(bool, bool)> {
    let escapes = |spec: &ExtensionSpec, a: &[QFunc], b: &[QFunc]| {
        a.iter().any(|x| !in_closure(spec, x, b))
    };
    for x in a.iter().chain(b) {
        tower.lower.check(x)?;
    }
    let lower = escapes(&tower.lower, a, b);
    let (ua, ub) = (tower.embed_all(a)?, tower.embed_all(b)?);
    let upper = escapes(&tower.upper, &ua, &ub);
    Ok((lower, upper))
}
