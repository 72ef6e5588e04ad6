//! The field interpreted inside the geometry, and recovery of a field
//! isomorphism from a closure-preserving map of points.
//!
//! Fix an anchor `a`. The class `J1 = { j(x, a) : x ∉ acl(a) }` carries
//! operations `j(x,a) ⊕ j(x',a) = j(x+x', a)` and `⊙` likewise, defined on
//! the generic domain where `x, x', a` are independent. Pairs of members
//! modulo equal ratio, plus a zero class, form a field isomorphic to `L`
//! via `mu(j(x,a), j(x',a)) = x/x'`.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::configurations::{flats_meet_in, j_map, JTuple};
use crate::error::{Error, Result};
use crate::geometry::{point_of, GeoPoint};
use crate::pregeometry::{in_closure, trdeg, ExtensionSpec};
use crate::{QFunc, Q};

/// The members `j(x, a)` for a fixed anchor `a`.
#[derive(Clone, Debug)]
pub struct J1Class {
    spec: Arc<ExtensionSpec>,
    anchor: QFunc,
}

impl J1Class {
    pub fn new(spec: &Arc<ExtensionSpec>, anchor: QFunc) -> Result<Self> {
        spec.require_trdeg(5)?;
        spec.check(&anchor)?;
        if trdeg(spec, std::slice::from_ref(&anchor)) != 1 {
            return Err(Error::NotTranscendental(spec.show(&anchor)));
        }
        Ok(J1Class {
            spec: Arc::clone(spec),
            anchor,
        })
    }

    /// Anchor on the last free variable.
    pub fn with_default_anchor(spec: &Arc<ExtensionSpec>) -> Result<Self> {
        let v = *spec
            .free_vars()
            .last()
            .ok_or_else(|| Error::InvalidSpec("no free variables".into()))?;
        Self::new(spec, spec.var(v))
    }

    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    pub fn anchor(&self) -> &QFunc {
        &self.anchor
    }

    pub fn member(&self, x: &QFunc) -> Result<JTuple> {
        j_map(&self.spec, x, &self.anchor)
    }

    pub fn zero(&self) -> RatioClass {
        RatioClass::Zero(self.spec.nvars())
    }

    pub fn contains(&self, t: &JTuple) -> bool {
        t.a == self.anchor
    }

    /// The class of `(j(x1, a), j(x2, a))`.
    pub fn ratio(&self, x1: &QFunc, x2: &QFunc) -> Result<RatioClass> {
        Ok(RatioClass::Pair(self.member(x1)?, self.member(x2)?))
    }

    /// A pair with ratio `r`, using the first helper `h` for which both
    /// `r h` and `h` are members.
    pub fn value(&self, r: &QFunc) -> Result<RatioClass> {
        self.spec.check(r)?;
        if r.is_zero() {
            return Ok(self.zero());
        }
        for h in self.helpers() {
            if let Ok(c) = self.ratio(&(r * &h), &h) {
                return Ok(c);
            }
        }
        Err(Error::Degenerate(format!(
            "no helper represents {} as a ratio",
            self.spec.show(r)
        )))
    }

    /// Deterministic candidates for auxiliary generic elements.
    pub fn helpers(&self) -> Vec<QFunc> {
        let free = self.spec.free_vars();
        let vars: Vec<QFunc> = free.iter().map(|&v| self.spec.var(v)).collect();
        let one = QFunc::one(self.spec.nvars());
        let mut out: Vec<QFunc> = vars.clone();
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                out.push(&vars[i] + &vars[j]);
            }
        }
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                out.push(&(&vars[i] * &vars[j]) + &one);
            }
        }
        out.retain(|h| !in_closure(&self.spec, h, std::slice::from_ref(&self.anchor)));
        out
    }

    fn check_anchor(&self, t: &JTuple) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::AnchorMismatch)
        }
    }

    /// `u ⊕ v`, or `u ⊙ v` through a helper `z` when `u, v` are not generic:
    /// `x + x' = (x + z) + (x' - z)` and `x x' = (x z)(x' / z)`.
    fn combine_members(&self, u: &JTuple, v: &JTuple, mul: bool) -> Result<JTuple> {
        let op = |p: &JTuple, q: &JTuple| if mul { odot(p, q) } else { oplus(p, q) };
        match op(u, v) {
            Err(Error::Dependent(_)) => {}
            other => return other,
        }
        for z in self.helpers() {
            let zt = self.member(&z)?;
            let inv = if mul { z.inv() } else { Ok(-&z) };
            let Ok(Ok(zi)) = inv.map(|w| self.member(&w)) else {
                continue;
            };
            let attempt = op(u, &zt).and_then(|l| op(v, &zi).and_then(|r| op(&l, &r)));
            if let Ok(t) = attempt {
                return Ok(t);
            }
        }
        Err(Error::Dependent(format!(
            "no helper makes {} and {} generic",
            self.spec.show(&u.x),
            self.spec.show(&v.x)
        )))
    }

    pub fn add_members(&self, u: &JTuple, v: &JTuple) -> Result<JTuple> {
        self.check_anchor(u)?;
        self.check_anchor(v)?;
        self.combine_members(u, v, false)
    }

    pub fn mul_members(&self, u: &JTuple, v: &JTuple) -> Result<JTuple> {
        self.check_anchor(u)?;
        self.check_anchor(v)?;
        self.combine_members(u, v, true)
    }

    /// Representations of a class with ratio `r`: the given one first, then
    /// `(r h, h)` over the helpers.
    fn reps_of(&self, p: &RatioClass) -> Vec<(JTuple, JTuple)> {
        let RatioClass::Pair(n, d) = p else {
            return Vec::new();
        };
        let r = mu(p);
        let mut out = vec![(n.clone(), d.clone())];
        for h in self.helpers() {
            if let Ok(RatioClass::Pair(n2, d2)) = self.ratio(&(&r * &h), &h) {
                out.push((n2, d2));
            }
        }
        out
    }

    fn check_class(&self, p: &RatioClass) -> Result<()> {
        match p {
            RatioClass::Zero(n) if *n == self.spec.nvars() => Ok(()),
            RatioClass::Zero(n) => Err(Error::NvarsMismatch(self.spec.nvars(), *n)),
            RatioClass::Pair(n, d) => {
                self.check_anchor(n)?;
                self.check_anchor(d)
            }
        }
    }

    /// `[x', x] · [y', y] = [x' ⊙ y', x ⊙ y]`, re-representing `q` when
    /// the products leave the generic domain.
    pub fn ratio_mul(&self, p: &RatioClass, q: &RatioClass) -> Result<RatioClass> {
        self.check_class(p)?;
        self.check_class(q)?;
        let RatioClass::Pair(pn, pd) = p else {
            return Ok(self.zero());
        };
        if q.is_zero() {
            return Ok(self.zero());
        }
        for (qn, qd) in self.reps_of(q) {
            let num = self.mul_members(pn, &qn);
            let den = self.mul_members(pd, &qd);
            if let (Ok(n), Ok(d)) = (num, den) {
                return Ok(RatioClass::Pair(n, d));
            }
        }
        Err(Error::Degenerate("no generic representation for the product".into()))
    }

    /// `[x', x] + [y', y] = [(x' ⊙ y) ⊕ (y' ⊙ x), x ⊙ y]`, with the zero
    /// class as identity and as the sum of opposite classes.
    pub fn ratio_add(&self, p: &RatioClass, q: &RatioClass) -> Result<RatioClass> {
        self.check_class(p)?;
        self.check_class(q)?;
        let (RatioClass::Pair(pn, pd), RatioClass::Pair(..)) = (p, q) else {
            return Ok(if p.is_zero() { q.clone() } else { p.clone() });
        };
        if (mu(p) + mu(q)).is_zero() {
            return Ok(self.zero());
        }
        for (qn, qd) in self.reps_of(q) {
            let attempt = (|| {
                let left = self.mul_members(pn, &qd)?;
                let right = self.mul_members(&qn, pd)?;
                let num = self.add_members(&left, &right)?;
                let den = self.mul_members(pd, &qd)?;
                Ok::<_, Error>(RatioClass::Pair(num, den))
            })();
            if let Ok(c) = attempt {
                return Ok(c);
            }
        }
        Err(Error::Degenerate("no generic representation for the sum".into()))
    }
}

/// `j(x, a) ⊕ j(x', a) = j(x + x', a)` for independent `x, x', a`.
pub fn oplus(u: &JTuple, v: &JTuple) -> Result<JTuple> {
    generic_op(u, v, |x, y| x + y)
}

/// `j(x, a) ⊙ j(x', a) = j(x x', a)` for independent `x, x', a`.
pub fn odot(u: &JTuple, v: &JTuple) -> Result<JTuple> {
    generic_op(u, v, |x, y| x * y)
}

fn generic_op(u: &JTuple, v: &JTuple, f: impl Fn(&QFunc, &QFunc) -> QFunc) -> Result<JTuple> {
    if u.a != v.a {
        return Err(Error::AnchorMismatch);
    }
    let spec = u.spec();
    if trdeg(spec, &[u.x.clone(), v.x.clone(), u.a.clone()]) != 3 {
        return Err(Error::Dependent(format!(
            "{}, {} and the anchor are not independent",
            spec.show(&u.x),
            spec.show(&v.x)
        )));
    }
    j_map(spec, &f(&u.x, &v.x), &u.a)
}

/// A pair of `J1` members up to equal ratio, or the zero class of the
/// field with the given number of variables.
#[derive(Clone, Debug)]
pub enum RatioClass {
    Zero(usize),
    Pair(JTuple, JTuple),
}

impl RatioClass {
    pub fn is_zero(&self) -> bool {
        matches!(self, RatioClass::Zero(_))
    }
}

impl PartialEq for RatioClass {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RatioClass::Zero(_), RatioClass::Zero(_)) => true,
            (RatioClass::Pair(n1, _), RatioClass::Pair(n2, _)) => n1.a == n2.a && mu(self) == mu(other),
            _ => false,
        }
    }
}

pub fn mu(p: &RatioClass) -> QFunc {
    match p {
        RatioClass::Zero(n) => QFunc::zero(*n),
        RatioClass::Pair(n, d) => &n.x / &d.x,
    }
}

/// A closure-preserving map on points, evaluated pointwise.
pub trait GeometryMap: Send + Sync {
    fn source(&self) -> &Arc<ExtensionSpec>;
    fn target(&self) -> &Arc<ExtensionSpec>;
    fn apply(&self, p: &GeoPoint) -> Result<GeoPoint>;

    fn apply_tuple(&self, t: &JTuple) -> Result<[GeoPoint; 5]> {
        let v = t.points.iter().map(|p| self.apply(p)).collect::<Result<Vec<_>>>()?;
        Ok(v.try_into().expect("five points"))
    }
}

/// The map on points induced by a substitution automorphism of `L` over
/// `K`: variable `i` goes to `images[i]`, base variables stay fixed.
#[derive(Clone, Debug)]
pub struct SubstitutionMap {
    spec: Arc<ExtensionSpec>,
    images: Vec<QFunc>,
    name: String,
}

impl SubstitutionMap {
    pub fn new(spec: &Arc<ExtensionSpec>, images: Vec<QFunc>, name: impl Into<String>) -> Result<Self> {
        if images.len() != spec.nvars() {
            return Err(Error::NvarsMismatch(spec.nvars(), images.len()));
        }
        for im in &images {
            spec.check(im)?;
        }
        for &v in spec.k_vars() {
            if images[v] != spec.var(v) {
                return Err(Error::Precondition(format!(
                    "{} generates the base field and must stay fixed",
                    spec.labels()[v]
                )));
            }
        }
        if trdeg(spec, &images) != spec.nvars() - spec.k_vars().len()
            && !(spec.free_vars().is_empty())
        {
            return Err(Error::Precondition("substitution is not invertible".into()));
        }
        Ok(SubstitutionMap {
            spec: Arc::clone(spec),
            images,
            name: name.into(),
        })
    }

    pub fn identity(spec: &Arc<ExtensionSpec>) -> Self {
        let images = (0..spec.nvars()).map(|v| spec.var(v)).collect();
        Self::new(spec, images, "identity").expect("identity is valid")
    }

    /// `t_i ↦ t_{perm[i]}`.
    pub fn permutation(spec: &Arc<ExtensionSpec>, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; spec.nvars()];
        if perm.len() != spec.nvars() {
            return Err(Error::NvarsMismatch(spec.nvars(), perm.len()));
        }
        for &p in perm {
            if p >= spec.nvars() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Precondition("not a permutation".into()));
            }
        }
        let images = perm.iter().map(|&p| spec.var(p)).collect();
        let name = format!(
            "perm({})",
            perm.iter().map(|&p| spec.labels()[p].as_str()).collect::<Vec<_>>().join(",")
        );
        Self::new(spec, images, name)
    }

    pub fn swap(spec: &Arc<ExtensionSpec>, i: usize, j: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..spec.nvars()).collect();
        if i >= perm.len() || j >= perm.len() {
            return Err(Error::VarOutOfRange {
                index: i.max(j),
                nvars: perm.len(),
            });
        }
        perm.swap(i, j);
        let mut m = Self::permutation(spec, &perm)?;
        m.name = format!("swap({},{})", spec.labels()[i], spec.labels()[j]);
        Ok(m)
    }

    /// `t_v ↦ alpha t_v + beta`.
    pub fn affine(spec: &Arc<ExtensionSpec>, v: usize, alpha: Q, beta: Q) -> Result<Self> {
        Self::mobius(spec, v, [alpha, beta, Q::zero(), Q::from_integer(1.into())])
    }

    /// `t_v ↦ (a t_v + b) / (c t_v + d)` with `ad - bc != 0`.
    pub fn mobius(spec: &Arc<ExtensionSpec>, v: usize, [a, b, c, d]: [Q; 4]) -> Result<Self> {
        if v >= spec.nvars() {
            return Err(Error::VarOutOfRange {
                index: v,
                nvars: spec.nvars(),
            });
        }
        if (&a * &d - &b * &c).is_zero() {
            return Err(Error::Precondition("singular Möbius coefficients".into()));
        }
        let n = spec.nvars();
        let t = spec.var(v);
        let num = &t.scale(&a) + &QFunc::constant(n, b.clone());
        let den = &t.scale(&c) + &QFunc::constant(n, d.clone());
        let mut images: Vec<QFunc> = (0..n).map(|i| spec.var(i)).collect();
        images[v] = num.checked_div(&den)?;
        let name = if c.is_zero() && d == Q::from_integer(1.into()) {
            format!("affine({},{a},{b})", spec.labels()[v])
        } else {
            format!("mobius({},{a},{b},{c},{d})", spec.labels()[v])
        };
        Self::new(spec, images, name)
    }

    /// Parses `identity`, `swap(t1,t2)`, `perm(t2,t3,t1,...)`,
    /// `affine(t1,alpha,beta)` or `mobius(t1,a,b,c,d)`.
    pub fn parse(spec: &Arc<ExtensionSpec>, src: &str) -> Result<Self> {
        let src = src.trim();
        let bad = |msg: &str| Error::parse(0, format!("{msg} in `{src}`"));
        if src == "identity" {
            return Ok(Self::identity(spec));
        }
        let open = src.find('(').ok_or_else(|| bad("expected `(`"))?;
        if !src.ends_with(')') {
            return Err(bad("expected `)`"));
        }
        let head = &src[..open];
        let args: Vec<&str> = src[open + 1..src.len() - 1].split(',').map(str::trim).collect();
        let var = |s: &str| {
            spec.labels()
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| bad(&format!("unknown variable `{s}`")))
        };
        let num = |s: &str| -> Result<Q> {
            let f = spec.parse(s).map_err(|_| bad(&format!("bad number `{s}`")))?;
            f.constant_value().ok_or_else(|| bad(&format!("`{s}` is not a rational number")))
        };
        match (head, args.len()) {
            ("swap", 2) => Self::swap(spec, var(args[0])?, var(args[1])?),
            ("perm", _) => {
                let perm = args.iter().map(|a| var(a)).collect::<Result<Vec<_>>>()?;
                Self::permutation(spec, &perm)
            }
            ("affine", 3) => Self::affine(spec, var(args[0])?, num(args[1])?, num(args[2])?),
            ("mobius", 5) => Self::mobius(
                spec,
                var(args[0])?,
                [num(args[1])?, num(args[2])?, num(args[3])?, num(args[4])?],
            ),
            _ => Err(bad("unknown automorphism")),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The underlying field automorphism.
    pub fn sigma(&self, x: &QFunc) -> Result<QFunc> {
        self.spec.check(x)?;
        x.substitute(&self.images)
    }
}

impl fmt::Display for SubstitutionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl GeometryMap for SubstitutionMap {
    fn source(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    fn target(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    fn apply(&self, p: &GeoPoint) -> Result<GeoPoint> {
        point_of(&self.spec, self.sigma(p.rep())?)
    }
}

/// Finds `(y, b)` with `pts = j(y, b)` among candidates read off the
/// representatives, each confirmed by recomputing `j(y, b)`.
pub fn extract_witness(target: &Arc<ExtensionSpec>, pts: &[GeoPoint; 5]) -> Result<JTuple> {
    let r: Vec<QFunc> = pts.iter().map(|p| p.rep().clone()).collect();
    let one = QFunc::one(target.nvars());
    let div = |a: &QFunc, b: &QFunc| a.checked_div(b).ok();
    let candidates: Vec<Option<(QFunc, QFunc)>> = vec![
        Some((r[0].clone(), r[4].clone())),
        Some((r[0].clone(), &r[1] - &r[0])),
        div(&r[2], &r[0]).map(|b| (r[0].clone(), b)),
        div(&r[2], &r[4]).map(|y| (y, r[4].clone())),
        Some((&r[1] - &r[4], r[4].clone())),
        div(&r[3], &r[0]).map(|q| (r[0].clone(), &q - &one)),
        div(&r[3], &(&r[4] + &one)).map(|y| (y, r[4].clone())),
    ];
    for (y, b) in candidates.into_iter().flatten() {
        if let Ok(t) = j_map(target, &y, &b) {
            if t.points.iter().zip(pts).all(|(p, q)| p == q) {
                return Ok(t);
            }
        }
    }
    Err(Error::MissingWitness(
        "image tuple does not reveal a pair (y, b) with j(y, b) equal to it".into(),
    ))
}

/// Checks that `map` preserves the rank of each sampled tuple.
pub fn check_rank_preservation<M: GeometryMap + ?Sized>(map: &M, tuples: &[Vec<QFunc>]) -> Result<()> {
    let src = map.source();
    for tuple in tuples {
        let images = tuple
            .iter()
            .map(|x| Ok(map.apply(&point_of(src, x.clone())?)?.rep().clone()))
            .collect::<Result<Vec<_>>>()?;
        let (r1, r2) = (trdeg(src, tuple), trdeg(map.target(), &images));
        if r1 != r2 {
            return Err(Error::RankNotPreserved(format!(
                "rank {r1} became {r2} on ({})",
                tuple.iter().map(|x| src.show(x)).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(())
}

/// Small tuples of points used to screen a map before recovery.
pub fn default_rank_samples(spec: &ExtensionSpec) -> Vec<Vec<QFunc>> {
    let free = spec.free_vars();
    let v: Vec<QFunc> = free.iter().map(|&i| spec.var(i)).collect();
    let mut out = Vec::new();
    for w in v.windows(2) {
        out.push(vec![w[0].clone(), w[1].clone()]);
        out.push(vec![w[0].clone(), &w[0] + &w[1], w[1].clone()]);
        out.push(vec![&w[0] * &w[1], &w[0] + &w[1]]);
    }
    for w in v.windows(3) {
        out.push(w.to_vec());
        out.push(vec![&w[0] + &w[1], &w[1] + &w[2], &w[0] - &w[2]]);
    }
    out
}

/// The field map recovered from a geometry map, evaluated on demand.
pub struct FieldRecovery<'m, M: GeometryMap + ?Sized> {
    map: &'m M,
    class: J1Class,
    target_class: J1Class,
    base_x: QFunc,
    calibration: QFunc,
}

/// Builds the recovered field map for `map`, with anchor `a` (default: the
/// last free variable) and base element `base_x` (default: the first free
/// variable outside `acl(a)`).
pub fn recover_field_map<'m, M: GeometryMap + ?Sized>(
    map: &'m M,
    anchor: Option<QFunc>,
    base_x: Option<QFunc>,
) -> Result<FieldRecovery<'m, M>> {
    let src = map.source();
    src.require_trdeg(5)?;
    map.target().require_trdeg(5)?;
    check_rank_preservation(map, &default_rank_samples(src))?;
    let class = match anchor {
        Some(a) => J1Class::new(src, a)?,
        None => J1Class::with_default_anchor(src)?,
    };
    let base_x = match base_x {
        Some(x) => x,
        None => class
            .helpers()
            .into_iter()
            .next()
            .ok_or_else(|| Error::Degenerate("no base element outside acl(a)".into()))?,
    };
    let image = extract_witness(map.target(), &map.apply_tuple(&class.member(&base_x)?)?)?;
    let target_class = J1Class::new(map.target(), image.a.clone())?;
    let mut rec = FieldRecovery {
        map,
        class,
        target_class,
        base_x,
        calibration: QFunc::one(map.target().nvars()),
    };
    // F(j(x, a)) = j(F~(x) t, b); t is fixed once on the base element.
    let f_base = rec.apply(&rec.base_x.clone())?;
    rec.calibration = image.x.checked_div(&f_base)?;
    Ok(rec)
}

impl<M: GeometryMap + ?Sized> FieldRecovery<'_, M> {
    pub fn class(&self) -> &J1Class {
        &self.class
    }

    /// The image anchor `b`.
    pub fn image_anchor(&self) -> &QFunc {
        self.target_class.anchor()
    }

    pub fn base_x(&self) -> &QFunc {
        &self.base_x
    }

    /// The scale `t` in `F(j(x, a)) = j(F~(x) t, b)`.
    pub fn calibration(&self) -> &QFunc {
        &self.calibration
    }

    /// The image of a member, read back as a target member.
    pub fn image_member(&self, t: &JTuple) -> Result<JTuple> {
        let img = extract_witness(self.map.target(), &self.map.apply_tuple(t)?)?;
        if img.a != *self.target_class.anchor() {
            return Err(Error::AnchorMismatch);
        }
        Ok(img)
    }

    /// Image of a ratio class under the map.
    pub fn image_class(&self, p: &RatioClass) -> Result<RatioClass> {
        match p {
            RatioClass::Zero(_) => Ok(RatioClass::Zero(self.map.target().nvars())),
            RatioClass::Pair(n, d) => Ok(RatioClass::Pair(self.image_member(n)?, self.image_member(d)?)),
        }
    }

    /// `F~(r) = mu(F[j(r h, a), j(h, a)])` for a helper `h`.
    pub fn apply(&self, r: &QFunc) -> Result<QFunc> {
        let class = self.class.value(r)?;
        Ok(mu(&self.image_class(&class)?))
    }

    /// `F(acl x) = acl(F~(x))`.
    pub fn point_contract(&self, x: &QFunc) -> Result<bool> {
        let src = self.map.source();
        let lhs = self.map.apply(&point_of(src, x.clone())?)?;
        let rhs = point_of(self.map.target(), self.apply(x)?)?;
        Ok(lhs == rhs)
    }

    /// `F(acl a')` for `a' ∈ acl(a) \ K`, as the meet of the images of the
    /// lines `acl(t, t a')` and `acl(s, s a')`.
    pub fn dependent_point_recovery(&self, a_prime: &QFunc) -> Result<GeoPoint> {
        let src = self.map.source();
        let tgt = self.map.target();
        src.check(a_prime)?;
        if trdeg(src, std::slice::from_ref(a_prime)) != 1
            || !in_closure(src, a_prime, std::slice::from_ref(self.class.anchor()))
        {
            return Err(Error::Precondition("a' must lie in acl(a) and outside K".into()));
        }
        let helpers = self.class.helpers();
        let mut pair = None;
        'search: for (i, t) in helpers.iter().enumerate() {
            for s in &helpers[i + 1..] {
                if trdeg(src, &[t.clone(), s.clone(), self.class.anchor().clone()]) == 3 {
                    pair = Some((t.clone(), s.clone()));
                    break 'search;
                }
            }
        }
        let (t, s) = pair.ok_or_else(|| Error::Degenerate("no independent helpers t, s".into()))?;
        let (ft, fta) = (self.apply(&t)?, self.apply(&(&t * a_prime))?);
        let (fs, fsa) = (self.apply(&s)?, self.apply(&(&s * a_prime))?);
        let via_t = fta.checked_div(&ft)?;
        let via_s = fsa.checked_div(&fs)?;
        if via_t != via_s {
            return Err(Error::Internal("helper lines disagree on the recovered point".into()));
        }
        if !flats_meet_in(tgt, &[ft, fta], &[fs, fsa], &via_t)? {
            return Err(Error::Degenerate("transported lines do not meet in one point".into()));
        }
        point_of(tgt, via_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qr};

    fn spec() -> Arc<ExtensionSpec> {
        Arc::new(ExtensionSpec::rational(5))
    }

    fn class(s: &Arc<ExtensionSpec>) -> J1Class {
        J1Class::with_default_anchor(s).unwrap()
    }

    fn e(s: &ExtensionSpec, src: &str) -> QFunc {
        s.parse(src).unwrap()
    }

    #[test]
    fn generic_operations() {
        let s = spec();
        let c = class(&s);
        let (u, v) = (c.member(&s.var(0)).unwrap(), c.member(&s.var(1)).unwrap());
        assert!(oplus(&u, &v).unwrap().same_points(&c.member(&e(&s, "t1 + t2")).unwrap()));
        assert!(odot(&u, &v).unwrap().same_points(&c.member(&e(&s, "t1*t2")).unwrap()));
        assert!(matches!(oplus(&u, &u), Err(Error::Dependent(_))));
        let other = J1Class::new(&s, s.var(3)).unwrap();
        assert!(matches!(
            oplus(&u, &other.member(&s.var(1)).unwrap()),
            Err(Error::AnchorMismatch)
        ));
    }

    #[test]
    fn helper_routes_cover_dependent_pairs() {
        let s = spec();
        let c = class(&s);
        let u = c.member(&s.var(0)).unwrap();
        let sum = c.add_members(&u, &u).unwrap();
        assert_eq!(sum.x, e(&s, "2*t1"));
        let sq = c.mul_members(&u, &u).unwrap();
        assert_eq!(sq.x, e(&s, "t1^2"));
    }

    #[test]
    fn ratio_arithmetic() {
        let s = spec();
        let c = class(&s);
        let two = c.value(&QFunc::constant(5, q(2))).unwrap();
        let three = c.value(&QFunc::constant(5, q(3))).unwrap();
        assert_eq!(mu(&c.ratio_mul(&two, &three).unwrap()), QFunc::constant(5, q(6)));

        let p = c.ratio(&s.var(0), &s.var(1)).unwrap();
        let r = c.ratio(&s.var(1), &s.var(2)).unwrap();
        assert_eq!(mu(&c.ratio_mul(&p, &r).unwrap()), e(&s, "t1/t3"));

        assert_eq!(c.ratio_add(&p, &c.zero()).unwrap(), p);
        assert_eq!(mu(&c.ratio_add(&two, &c.value(&QFunc::constant(5, q(-2))).unwrap()).unwrap()), QFunc::zero(5));
        assert_eq!(mu(&c.ratio_add(&two, &three).unwrap()), QFunc::constant(5, q(5)));
        assert_eq!(mu(&c.ratio_add(&p, &r).unwrap()), e(&s, "t1/t2 + t2/t3"));
        let neg = c.value(&-&mu(&p)).unwrap();
        assert!(c.ratio_add(&p, &neg).unwrap().is_zero());
    }

    #[test]
    fn mu_examples() {
        let s = spec();
        let c = class(&s);
        assert_eq!(mu(&c.ratio(&s.var(0), &s.var(1)).unwrap()), e(&s, "t1/t2"));
        assert_eq!(mu(&c.zero()), QFunc::zero(5));
        assert_eq!(
            mu(&c.ratio(&e(&s, "2*t1"), &s.var(0)).unwrap()),
            QFunc::constant(5, q(2))
        );
    }

    #[test]
    fn recovery_of_swap() {
        let s = spec();
        let f = SubstitutionMap::swap(&s, 0, 1).unwrap();
        let rec = recover_field_map(&f, None, None).unwrap();
        assert_eq!(rec.apply(&s.var(0)).unwrap(), s.var(1));
        assert!(rec.calibration().is_constant());
        assert_eq!(rec.calibration().constant_value(), Some(q(1)));
        assert!(rec.point_contract(&e(&s, "t1^2 + t3")).unwrap());
    }

    #[test]
    fn recovery_of_identity_and_translation() {
        let s = spec();
        let id = SubstitutionMap::identity(&s);
        let rec = recover_field_map(&id, None, None).unwrap();
        for src in ["t1", "t2*t3 + 1", "t5^2", "7/3"] {
            assert_eq!(rec.apply(&e(&s, src)).unwrap(), e(&s, src));
        }
        let shift = SubstitutionMap::affine(&s, 0, q(1), q(1)).unwrap();
        let rec = recover_field_map(&shift, None, None).unwrap();
        assert_eq!(rec.apply(&e(&s, "t1^2")).unwrap(), e(&s, "(t1 + 1)^2"));
        assert_eq!(rec.apply(&QFunc::constant(5, qr(-3, 4))).unwrap(), QFunc::constant(5, qr(-3, 4)));
    }

    #[test]
    fn dependent_points() {
        let s = spec();
        let swap = SubstitutionMap::swap(&s, 4, 0).unwrap();
        let rec = recover_field_map(&swap, None, None).unwrap();
        let p = rec.dependent_point_recovery(&e(&s, "t5^2")).unwrap();
        assert_eq!(p, point_of(&s, e(&s, "t1^2")).unwrap());

        let id = SubstitutionMap::identity(&s);
        let rec = recover_field_map(&id, None, None).unwrap();
        assert_eq!(rec.dependent_point_recovery(&s.var(4)).unwrap(), point_of(&s, s.var(4)).unwrap());

        let shift = SubstitutionMap::affine(&s, 4, q(1), q(1)).unwrap();
        let rec = recover_field_map(&shift, None, None).unwrap();
        let a1 = e(&s, "1/(t5 + 1)");
        let p = rec.dependent_point_recovery(&a1).unwrap();
        assert_eq!(p, shift.apply(&point_of(&s, a1).unwrap()).unwrap());
        assert!(rec.dependent_point_recovery(&s.var(0)).is_err());
    }

    struct Collapse(Arc<ExtensionSpec>);

    impl GeometryMap for Collapse {
        fn source(&self) -> &Arc<ExtensionSpec> {
            &self.0
        }
        fn target(&self) -> &Arc<ExtensionSpec> {
            &self.0
        }
        fn apply(&self, p: &GeoPoint) -> Result<GeoPoint> {
            let n = self.0.nvars();
            let mut images: Vec<QFunc> = (0..n).map(|v| self.0.var(v)).collect();
            images[1] = self.0.var(0);
            point_of(&self.0, p.rep().substitute(&images)?)
        }
    }

    #[test]
    fn rank_violation_aborts() {
        let s = spec();
        assert!(matches!(
            recover_field_map(&Collapse(s), None, None),
            Err(Error::RankNotPreserved(_))
        ));
    }

    #[test]
    fn small_extensions_rejected() {
        let s = Arc::new(ExtensionSpec::rational(4));
        assert!(J1Class::with_default_anchor(&s).is_err());
    }

    #[test]
    fn parse_maps() {
        let s = spec();
        let m = SubstitutionMap::parse(&s, "swap(t1,t2)").unwrap();
        assert_eq!(m.sigma(&s.var(0)).unwrap(), s.var(1));
        let m = SubstitutionMap::parse(&s, "mobius(t3, 1, 1, 1, -1)").unwrap();
        assert_eq!(m.sigma(&s.var(2)).unwrap(), e(&s, "(t3 + 1)/(t3 - 1)"));
        let m = SubstitutionMap::parse(&s, "affine(t2, 1/2, 3)").unwrap();
        assert_eq!(m.sigma(&s.var(1)).unwrap(), e(&s, "t2/2 + 3"));
        assert!(SubstitutionMap::parse(&s, "mobius(t3, 1, 1, 1, 1)").is_err());
        assert!(SubstitutionMap::parse(&s, "perm(t1,t1,t3,t4,t5)").is_err());
        assert!(SubstitutionMap::parse(&s, "rotate(t1)").is_err());
        let k = Arc::new(ExtensionSpec::new(6, [0]).unwrap());
        assert!(SubstitutionMap::parse(&k, "swap(t1,t2)").is_err());
    }
}
