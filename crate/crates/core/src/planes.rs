//! Projective planes: `P(F)` in homogeneous coordinates, and the planes
//! inside the geometry spanned by three independent elements, either
//! additively (`acl(ax + by + cz)`) or multiplicatively (`acl(x^a y^b z^c)`).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::Field;
use crate::error::{Error, Result};
use crate::geometry::{point_of, GeoPoint};
use crate::pregeometry::{in_closure, trdeg, ExtensionSpec};
use crate::{QFunc, Q};

/// Homogeneous coordinates `(a : b : c)`, equal up to a nonzero scalar.
/// Also used for lines, as the coefficients of `aX + bY + cZ = 0`.
#[derive(Clone, Debug)]
pub struct ProjPoint<T> {
    coords: [T; 3],
}

impl<T: Field> ProjPoint<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        if a.is_zero() && b.is_zero() && c.is_zero() {
            return Err(Error::Degenerate("zero vector has no projective point".into()));
        }
        Ok(ProjPoint { coords: [a, b, c] })
    }

    pub fn from_ints(v: [i64; 3]) -> Result<Self> {
        Self::new(T::from_i64(v[0]), T::from_i64(v[1]), T::from_i64(v[2]))
    }

    pub fn coords(&self) -> &[T; 3] {
        &self.coords
    }

    /// Representative whose first nonzero coordinate is 1.
    pub fn normalized(&self) -> Self {
        let lead = self
            .coords
            .iter()
            .find(|c| !c.is_zero())
            .expect("nonzero vector")
            .clone();
        ProjPoint {
            coords: self.coords.clone().map(|c| c / lead.clone()),
        }
    }

    pub fn cross(&self, other: &Self) -> [T; 3] {
        let [a1, a2, a3] = &self.coords;
        let [b1, b2, b3] = &other.coords;
        [
            a2.clone() * b3.clone() - a3.clone() * b2.clone(),
            a3.clone() * b1.clone() - a1.clone() * b3.clone(),
            a1.clone() * b2.clone() - a2.clone() * b1.clone(),
        ]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// `lambda * self + mu * other`; `None` if that is the zero vector.
    pub fn combine(&self, lambda: &T, other: &Self, mu: &T) -> Option<Self> {
        let c: [T; 3] = std::array::from_fn(|i| {
            lambda.clone() * self.coords[i].clone() + mu.clone() * other.coords[i].clone()
        });
        ProjPoint::new(c[0].clone(), c[1].clone(), c[2].clone()).ok()
    }

    /// Line through two distinct points, or point on two distinct lines.
    pub fn join(&self, other: &Self) -> Option<Self> {
        let [a, b, c] = self.cross(other);
        ProjPoint::new(a, b, c).ok()
    }

    pub fn meet(&self, other: &Self) -> Option<Self> {
        self.join(other)
    }

    pub fn incident(&self, line: &Self) -> bool {
        self.dot(line).is_zero()
    }
}

impl<T: Field> PartialEq for ProjPoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cross(other).iter().all(|c| c.is_zero())
    }
}

impl<T: Field> fmt::Display for ProjPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.coords;
        write!(f, "({a} : {b} : {c})")
    }
}

pub fn det3<T: Field>(p: &ProjPoint<T>, q: &ProjPoint<T>, r: &ProjPoint<T>) -> T {
    let [a, b, c] = p.cross(q);
    let [x, y, z] = r.coords.clone();
    a * x + b * y + c * z
}

pub fn collinear_proj<T: Field>(p: &ProjPoint<T>, q: &ProjPoint<T>, r: &ProjPoint<T>) -> bool {
    det3(p, q, r).is_zero()
}

/// Rank of a set of homogeneous vectors (0..=3).
pub fn proj_rank<T: Field>(pts: &[ProjPoint<T>]) -> usize {
    crate::algebra::scalar_rank(pts.iter().map(|p| p.coords.to_vec()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneMode {
    Additive,
    Multiplicative,
}

/// Three independent elements spanning a plane of the geometry.
#[derive(Clone, Debug)]
pub struct PlaneAnchor {
    pub x: QFunc,
    pub y: QFunc,
    pub z: QFunc,
    pub mode: PlaneMode,
    spec: Arc<ExtensionSpec>,
}

impl PlaneAnchor {
    pub fn new(spec: &Arc<ExtensionSpec>, x: QFunc, y: QFunc, z: QFunc, mode: PlaneMode) -> Result<Self> {
        for e in [&x, &y, &z] {
            spec.check(e)?;
        }
        if trdeg(spec, &[x.clone(), y.clone(), z.clone()]) != 3 {
            return Err(Error::Dependent("plane anchor is not independent".into()));
        }
        Ok(PlaneAnchor {
            x,
            y,
            z,
            mode,
            spec: Arc::clone(spec),
        })
    }

    /// Anchor on the variables `t_i, t_j, t_k`.
    pub fn on_vars(spec: &Arc<ExtensionSpec>, vars: [usize; 3], mode: PlaneMode) -> Result<Self> {
        for &v in &vars {
            if v >= spec.nvars() {
                return Err(Error::VarOutOfRange {
                    index: v,
                    nvars: spec.nvars(),
                });
            }
        }
        Self::new(spec, spec.var(vars[0]), spec.var(vars[1]), spec.var(vars[2]), mode)
    }

    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        &self.spec
    }

    /// The element `ax + by + cz`, or `x^a y^b z^c` after scaling the
    /// coordinates to coprime integers.
    pub fn element(&self, v: &QProjPoint) -> Result<QFunc> {
        let [a, b, c] = v.coords();
        match self.mode {
            PlaneMode::Additive => {
                Ok(&(&self.x.scale(a) + &self.y.scale(b)) + &self.z.scale(c))
            }
            PlaneMode::Multiplicative => {
                let e = integer_exponents(v)?;
                let pw = |f: &QFunc, k: i32| f.pow(k).expect("anchor elements are nonzero");
                Ok(&(&pw(&self.x, e[0]) * &pw(&self.y, e[1])) * &pw(&self.z, e[2]))
            }
        }
    }
}

pub use crate::QProjPoint;

/// Scales a rational vector to coprime integers.
pub fn integer_exponents(v: &QProjPoint) -> Result<[i32; 3]> {
    let l = v
        .coords()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = v.coords().iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let mut out = [0i32; 3];
    for (o, c) in out.iter_mut().zip(&ints) {
        *o = (c / &g)
            .to_i32()
            .ok_or_else(|| Error::Unsupported("exponent does not fit in 32 bits".into()))?;
    }
    Ok(out)
}

pub fn plane_point(anchor: &PlaneAnchor, v: &QProjPoint) -> Result<GeoPoint> {
    point_of(&anchor.spec, anchor.element(v)?)
}

/// Rank of three points of the geometry is at most 2.
pub fn collinear(p: &GeoPoint, q: &GeoPoint, r: &GeoPoint) -> bool {
    trdeg(p.spec(), &[p.rep().clone(), q.rep().clone(), r.rep().clone()]) <= 2
}

/// Linear dependence of the coefficient vectors agrees with collinearity
/// of the corresponding plane points.
pub fn coordinatization_check(anchor: &PlaneAnchor, vs: &[QProjPoint; 3]) -> Result<bool> {
    let dependent = collinear_proj(&vs[0], &vs[1], &vs[2]);
    let pts = vs
        .iter()
        .map(|v| plane_point(anchor, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(dependent == collinear(&pts[0], &pts[1], &pts[2]))
}

/// Witnesses for the four projective plane axioms on a finite sample.
#[derive(Clone, Debug)]
pub struct PlaneAxiomsReport {
    pub rank: usize,
    /// Indices of a noncollinear triple.
    pub noncollinear: Option<[usize; 3]>,
    /// For each pair of distinct sample points, a third point on their line.
    pub third_points: Vec<(usize, usize, QProjPoint)>,
    /// Distinct lines through sample pairs, and for each pair of them the
    /// common point.
    pub lines: Vec<QProjPoint>,
    pub meets: Vec<(usize, usize, QProjPoint)>,
    pub axiom3_ok: bool,
    pub axiom4_ok: bool,
}

impl PlaneAxiomsReport {
    pub fn axiom1(&self) -> bool {
        self.rank == 3
    }

    pub fn axiom2(&self) -> bool {
        self.noncollinear.is_some()
    }

    pub fn all_pass(&self) -> bool {
        self.axiom1() && self.axiom2() && self.axiom3_ok && self.axiom4_ok
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.axiom1() {
            out.push("axiom 1: rank is not 3");
        }
        if !self.axiom2() {
            out.push("axiom 2: no noncollinear triple");
        }
        if !self.axiom3_ok {
            out.push("axiom 3: a line lacks a third point");
        }
        if !self.axiom4_ok {
            out.push("axiom 4: two lines do not meet");
        }
        out
    }
}

/// Checks the plane axioms on `sample` in `P(Q)`. Samples of rank 0 or 1
/// are rejected; a sample of rank 2 yields a report with axioms 1 and 2
/// failing.
pub fn plane_axioms_check(sample: &[QProjPoint]) -> Result<PlaneAxiomsReport> {
    let mut pts: Vec<QProjPoint> = Vec::new();
    for p in sample {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    let rank = proj_rank(&pts);
    if rank < 2 {
        return Err(Error::Degenerate(format!(
            "sample of rank {rank} does not span a line"
        )));
    }

    let mut noncollinear = None;
    'outer: for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                if !collinear_proj(&pts[i], &pts[j], &pts[k]) {
                    noncollinear = Some([i, j, k]);
                    break 'outer;
                }
            }
        }
    }

    let one = Q::one();
    let mut third_points = Vec::new();
    let mut axiom3_ok = true;
    let mut lines: Vec<QProjPoint> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let line = pts[i].join(&pts[j]).expect("distinct points");
            let third = pts[i].combine(&one, &pts[j], &one).expect("distinct points");
            axiom3_ok &= third != pts[i] && third != pts[j] && third.incident(&line);
            third_points.push((i, j, third));
            if !lines.contains(&line) {
                lines.push(line);
            }
        }
    }

    let mut meets = Vec::new();
    let mut axiom4_ok = true;
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            match lines[a].meet(&lines[b]) {
                Some(m) => {
                    axiom4_ok &= m.incident(&lines[a]) && m.incident(&lines[b]);
                    meets.push((a, b, m));
                }
                None => axiom4_ok = false,
            }
        }
    }

    Ok(PlaneAxiomsReport {
        rank,
        noncollinear,
        third_points,
        lines,
        meets,
        axiom3_ok,
        axiom4_ok,
    })
}

/// Two triangles `a`, `b` in perspective from `center`.
#[derive(Clone, Debug)]
pub struct DesarguesConfig {
    pub center: QProjPoint,
    pub a: [QProjPoint; 3],
    pub b: [QProjPoint; 3],
}

impl DesarguesConfig {
    pub fn validate(&self) -> Result<()> {
        let all: Vec<&QProjPoint> = std::iter::once(&self.center)
            .chain(&self.a)
            .chain(&self.b)
            .collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i] == all[j] {
                    return Err(Error::Degenerate("configuration has coincident points".into()));
                }
            }
        }
        for (name, t) in [("first", &self.a), ("second", &self.b)] {
            if collinear_proj(&t[0], &t[1], &t[2]) {
                return Err(Error::Degenerate(format!("{name} triangle is flat")));
            }
        }
        for i in 0..3 {
            if !collinear_proj(&self.center, &self.a[i], &self.b[i]) {
                return Err(Error::Degenerate(format!(
                    "vertex pair {i} is not in perspective from the center"
                )));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let la = self.a[i].join(&self.a[j]).expect("distinct");
            let lb = self.b[i].join(&self.b[j]).expect("distinct");
            if la == lb {
                return Err(Error::Degenerate(format!("sides {i}{j} coincide")));
            }
        }
        Ok(())
    }

    /// Intersections of corresponding sides.
    pub fn axis_points(&self) -> Result<[QProjPoint; 3]> {
        self.validate()?;
        let side = |t: &[QProjPoint; 3], i: usize, j: usize| t[i].join(&t[j]).expect("validated");
        let pt = |i: usize, j: usize| {
            side(&self.a, i, j)
                .meet(&side(&self.b, i, j))
                .expect("validated distinct sides")
        };
        Ok([pt(0, 1), pt(0, 2), pt(1, 2)])
    }
}

pub fn desargues_check(config: &DesarguesConfig) -> Result<bool> {
    let [p, q, r] = config.axis_points()?;
    Ok(collinear_proj(&p, &q, &r))
}

/// The same configuration inside the plane of `anchor`: collinearity of
/// the three axis points as points of the geometry.
pub fn desargues_in_plane(anchor: &PlaneAnchor, config: &DesarguesConfig) -> Result<bool> {
    let axis = config.axis_points()?;
    let pts = axis
        .iter()
        .map(|v| plane_point(anchor, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(collinear(&pts[0], &pts[1], &pts[2]))
}

/// Random perspective configuration with small integer coordinates.
pub fn random_desargues(rng: &mut impl rand::Rng, bound: i64) -> DesarguesConfig {
    use crate::gen::{int_triple, nonzero_int};
    loop {
        let p = |t: [i64; 3]| QProjPoint::from_ints(t).expect("nonzero triple");
        let center = p(int_triple(rng, bound));
        let a: [QProjPoint; 3] = std::array::from_fn(|_| p(int_triple(rng, bound)));
        let b: [QProjPoint; 3] = std::array::from_fn(|i| {
            let l = Q::from_integer(nonzero_int(rng, bound).into());
            let m = Q::from_integer(nonzero_int(rng, bound).into());
            center.combine(&l, &a[i], &m).unwrap_or_else(|| center.clone())
        });
        let cfg = DesarguesConfig { center, a, b };
        if cfg.validate().is_ok() {
            return cfg;
        }
    }
}

/// The additive case of the affine-rigidity lemma, run forwards: from an
/// independent triple and `c, c' != 0`, `d_i in K`, builds
/// `x'_i = (c/c') x_i + d_i/c'` and checks every hypothesis and the
/// conclusion `c' x'_i = c x_i + d_i`.
#[derive(Clone, Debug)]
pub struct AdditiveWitness {
    pub x: [QFunc; 3],
    pub c: Q,
    pub c_prime: Q,
    pub d: [QFunc; 3],
}

impl AdditiveWitness {
    pub fn image(&self) -> Result<[QFunc; 3]> {
        if self.c.is_zero() || self.c_prime.is_zero() {
            return Err(Error::Precondition("c and c' must be nonzero".into()));
        }
        let ratio = &self.c / &self.c_prime;
        let inv = self.c_prime.inv();
        Ok(std::array::from_fn(|i| {
            &self.x[i].scale(&ratio) + &self.d[i].scale(&inv)
        }))
    }
}

/// The multiplicative case: independent pairs `x`, `x'` with
/// `x'_1^n = a x_1^m` and `x'_2^n = b x_2^m`, `a, b in K`.
#[derive(Clone, Debug)]
pub struct MultiplicativeWitness {
    pub x: [QFunc; 2],
    pub x_prime: [QFunc; 2],
    pub n: i32,
    pub m: i32,
    pub a: QFunc,
    pub b: QFunc,
}

impl MultiplicativeWitness {
    /// The witness with `n = 1`: `x'_1 = a x_1^m`, `x'_2 = b x_2^m`.
    pub fn build(x: [QFunc; 2], m: i32, a: QFunc, b: QFunc) -> Result<Self> {
        let x_prime = [
            &a * &x[0].pow(m).map_err(|_| Error::Precondition("x_1 is zero".into()))?,
            &b * &x[1].pow(m).map_err(|_| Error::Precondition("x_2 is zero".into()))?,
        ];
        Ok(MultiplicativeWitness {
            x,
            x_prime,
            n: 1,
            m,
            a,
            b,
        })
    }
}

#[derive(Clone, Debug)]
pub enum RigidityCase {
    Additive(AdditiveWitness),
    Multiplicative(MultiplicativeWitness),
}

fn in_base(spec: &ExtensionSpec, f: &QFunc) -> bool {
    f.support().iter().all(|v| spec.k_vars().contains(v))
}

fn same_point(spec: &ExtensionSpec, a: &QFunc, b: &QFunc) -> bool {
    in_closure(spec, a, std::slice::from_ref(b)) && in_closure(spec, b, std::slice::from_ref(a))
}

pub fn rigidity_verify(spec: &ExtensionSpec, case: &RigidityCase) -> Result<bool> {
    match case {
        RigidityCase::Additive(w) => {
            if trdeg(spec, &w.x) != 3 {
                return Err(Error::Dependent("input triple is dependent".into()));
            }
            if !w.d.iter().all(|d| in_base(spec, d)) {
                return Err(Error::Precondition("translations must lie in K".into()));
            }
            let xp = w.image()?;
            let sums_ok = same_point(spec, &(&w.x[0] + &w.x[1]), &(&xp[0] + &xp[1]))
                && same_point(spec, &(&w.x[0] + &w.x[2]), &(&xp[0] + &xp[2]));
            let axes_ok = (0..3).all(|i| same_point(spec, &w.x[i], &xp[i]));
            let conclusion = (0..3).all(|i| {
                xp[i].scale(&w.c_prime) == &w.x[i].scale(&w.c) + &w.d[i]
            });
            Ok(trdeg(spec, &xp) == 3 && sums_ok && axes_ok && conclusion)
        }
        RigidityCase::Multiplicative(w) => {
            if trdeg(spec, &w.x) != 2 {
                return Err(Error::Dependent("input pair is dependent".into()));
            }
            if w.n == 0 || w.m == 0 || w.a.is_zero() || w.b.is_zero() {
                return Err(Error::Precondition("n, m, a, b must be nonzero".into()));
            }
            if !in_base(spec, &w.a) || !in_base(spec, &w.b) {
                return Err(Error::Precondition("a and b must lie in K".into()));
            }
            let pw = |f: &QFunc, k: i32| f.pow(k);
            let rel1 = pw(&w.x_prime[0], w.n)? == &w.a * &pw(&w.x[0], w.m)?;
            let rel2 = pw(&w.x_prime[1], w.n)? == &w.b * &pw(&w.x[1], w.m)?;
            let hyps = trdeg(spec, &w.x_prime) == 2
                && same_point(spec, &w.x[0], &w.x_prime[0])
                && same_point(spec, &w.x[1], &w.x_prime[1])
                && same_point(spec, &(&w.x[0] * &w.x[1]), &(&w.x_prime[0] * &w.x_prime[1]));
            Ok(rel1 && rel2 && hyps)
        }
    }
}

/// Probes maximality of the additive plane at one candidate: if `cand`
/// lies on both the line `l1` and the line `l2` (each given by two plane
/// coordinates), it must be the plane point at their meet. Returns `None`
/// when the candidate is not on both lines.
pub fn maximality_probe(
    anchor: &PlaneAnchor,
    l1: (&QProjPoint, &QProjPoint),
    l2: (&QProjPoint, &QProjPoint),
    cand: &QFunc,
) -> Result<Option<bool>> {
    let spec = anchor.spec();
    let elems = |l: (&QProjPoint, &QProjPoint)| -> Result<Vec<QFunc>> {
        Ok(vec![anchor.element(l.0)?, anchor.element(l.1)?])
    };
    let (e1, e2) = (elems(l1)?, elems(l2)?);
    let line1 = l1.0.join(l1.1).ok_or_else(|| Error::Degenerate("first line repeats a point".into()))?;
    let line2 = l2.0.join(l2.1).ok_or_else(|| Error::Degenerate("second line repeats a point".into()))?;
    let meet = line1
        .meet(&line2)
        .ok_or_else(|| Error::Degenerate("the two lines coincide".into()))?;
    if trdeg(spec, std::slice::from_ref(cand)) != 1 {
        return Err(Error::NotTranscendental(spec.show(cand)));
    }
    if !(in_closure(spec, cand, &e1) && in_closure(spec, cand, &e2)) {
        return Ok(None);
    }
    let target = anchor.element(&meet)?;
    Ok(Some(same_point(spec, cand, &target)))
}
