//! The sets `Q`, `Q'`, `J` of 4- and 5-tuples of points, the map
//! `j(x, a)`, the multiplication construction and the formula `psi`.
//!
//! Membership is always checked against explicit witnesses; nothing here
//! searches `L` for them.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gen;
use crate::geometry::{point_of, GeoPoint};
use crate::pregeometry::{in_closure, trdeg, ExtensionSpec};
use crate::QFunc;

/// `j(x, a) = (acl x, acl(x+a), acl(xa), acl(x+xa), acl a)` with the
/// pair `(x, a)` kept as provenance.
#[derive(Clone, Debug)]
pub struct JTuple {
    pub points: [GeoPoint; 5],
    pub x: QFunc,
    pub a: QFunc,
}

impl JTuple {
    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        self.points[0].spec()
    }

    pub fn same_points(&self, other: &JTuple) -> bool {
        self.points.iter().zip(&other.points).all(|(p, q)| p == q)
    }
}

fn independent_pair(spec: &ExtensionSpec, x: &QFunc, y: &QFunc) -> bool {
    trdeg(spec, &[x.clone(), y.clone()]) == 2
}

pub fn j_map(spec: &Arc<ExtensionSpec>, x: &QFunc, a: &QFunc) -> Result<JTuple> {
    spec.check(x)?;
    spec.check(a)?;
    if !independent_pair(spec, x, a) {
        return Err(Error::Dependent(format!(
            "j({}, {}) needs an independent pair",
            spec.show(x),
            spec.show(a)
        )));
    }
    let xa = x * a;
    let elems = [x.clone(), x + a, xa.clone(), x + &xa, a.clone()];
    let points = elems.map(|e| point_of(spec, e).expect("independent pair gives transcendental points"));
    Ok(JTuple {
        points,
        x: x.clone(),
        a: a.clone(),
    })
}

fn matches(points: &[GeoPoint], elems: &[QFunc]) -> bool {
    points.iter().zip(elems).all(|(p, e)| {
        let spec = p.spec();
        in_closure(spec, e, std::slice::from_ref(p.rep()))
            && in_closure(spec, p.rep(), std::slice::from_ref(e))
    })
}

/// `(acl x, acl y, acl(x+y), acl(x/y))` for an independent witness.
pub fn q_membership(tuple: &[GeoPoint; 4], witness: (&QFunc, &QFunc)) -> bool {
    let (x, y) = witness;
    let spec = tuple[0].spec();
    if spec.check(x).is_err() || spec.check(y).is_err() || !independent_pair(spec, x, y) {
        return false;
    }
    matches(tuple, &[x.clone(), y.clone(), x + y, x / y])
}

/// `(acl x, acl y, acl(x+y), acl(xy))` for an independent witness.
pub fn qprime_membership(tuple: &[GeoPoint; 4], witness: (&QFunc, &QFunc)) -> bool {
    let (x, y) = witness;
    let spec = tuple[0].spec();
    if spec.check(x).is_err() || spec.check(y).is_err() || !independent_pair(spec, x, y) {
        return false;
    }
    matches(tuple, &[x.clone(), y.clone(), x + y, x * y])
}

/// From `acl x`, `acl y`, `acl(x/y)` and witnesses `x, y`, the point
/// `acl(xy)`, after confirming the inputs and the resulting `Q'` tuple.
pub fn mult_construct(
    px: &GeoPoint,
    py: &GeoPoint,
    pv: &GeoPoint,
    x: &QFunc,
    y: &QFunc,
) -> Result<GeoPoint> {
    let spec = px.spec();
    spec.check(x)?;
    spec.check(y)?;
    if !independent_pair(spec, x, y) {
        return Err(Error::Dependent("multiplication witnesses are dependent".into()));
    }
    if !matches(&[px.clone(), py.clone(), pv.clone()], &[x.clone(), y.clone(), x / y]) {
        return Err(Error::Precondition(
            "points do not match acl(x), acl(y), acl(x/y)".into(),
        ));
    }
    let prod = point_of(spec, x * y)?;
    let sum = point_of(spec, x + y)?;
    let tuple = [px.clone(), py.clone(), sum, prod.clone()];
    if !qprime_membership(&tuple, (x, y)) {
        return Err(Error::Internal("constructed product fails the Q' check".into()));
    }
    Ok(prod)
}

/// Both ways of deciding `J` membership for one witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JMembership {
    /// Equality with `j(x, a)`.
    pub direct: bool,
    /// `(X,Q,R,A) in Q`, `(X,A,P,Q) in Q'`, `(X,A,P,R) in Q'`.
    pub decomposition: bool,
}

impl JMembership {
    pub fn agree(&self) -> bool {
        self.direct == self.decomposition
    }
}

pub fn j_membership(points: &[GeoPoint; 5], witness: Option<(&QFunc, &QFunc)>) -> Result<JMembership> {
    let (x, a) = witness.ok_or_else(|| {
        Error::MissingWitness("J membership needs a witness pair or a tuple with provenance".into())
    })?;
    let spec = points[0].spec();
    spec.check(x)?;
    spec.check(a)?;
    let direct = independent_pair(spec, x, a) && {
        let xa = x * a;
        matches(points, &[x.clone(), x + a, xa.clone(), x + &xa, a.clone()])
    };
    let [px, pp, pq, pr, pa] = points.clone();
    let one = QFunc::one(spec.nvars());
    let decomposition = q_membership(&[px.clone(), pq.clone(), pr.clone(), pa.clone()], (x, &(x * a)))
        && qprime_membership(&[px.clone(), pa.clone(), pp.clone(), pq], (x, a))
        && qprime_membership(&[px, pa, pp, pr], (x, &(a + &one)));
    Ok(JMembership {
        direct,
        decomposition,
    })
}

/// Uses the tuple's own provenance as the witness.
pub fn j_membership_of(t: &JTuple) -> JMembership {
    j_membership(&t.points, Some((&t.x, &t.a))).expect("provenance is present")
}

pub const PSI_NAMES: [&str; 21] = [
    "A1", "A2", "B1", "B2", "C1", "C2", "D", "E", "F", "G", "H", "I", "P", "Q", "R", "S", "T", "U",
    "X", "Y", "Z",
];

/// An assignment of the 21 free variables of `psi`.
#[derive(Clone, Debug)]
pub struct PsiInstance {
    points: Vec<GeoPoint>,
}

impl PsiInstance {
    pub fn new(spec: &Arc<ExtensionSpec>, reps: Vec<QFunc>) -> Result<Self> {
        if reps.len() != PSI_NAMES.len() {
            return Err(Error::InvalidSpec(format!(
                "psi takes {} points, got {}",
                PSI_NAMES.len(),
                reps.len()
            )));
        }
        let points = reps
            .into_iter()
            .map(|r| point_of(spec, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(PsiInstance { points })
    }

    pub fn from_map(spec: &Arc<ExtensionSpec>, map: &BTreeMap<String, QFunc>) -> Result<Self> {
        let reps = PSI_NAMES
            .iter()
            .map(|n| {
                map.get(*n)
                    .cloned()
                    .ok_or_else(|| Error::InvalidSpec(format!("psi point {n} is missing")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = map.keys().find(|k| !PSI_NAMES.contains(&k.as_str())) {
            return Err(Error::InvalidSpec(format!("unknown psi point {extra}")));
        }
        Self::new(spec, reps)
    }

    /// The assignment attached to `(P, D, Y, I) = (acl b, acl(ax), acl(ax+b),
    /// acl(ax/b))` for elements `a, b, c, d, x`.
    pub fn standard(spec: &Arc<ExtensionSpec>, [a, b, c, d, x]: [QFunc; 5]) -> Result<Self> {
        let ax = &a * &x;
        let y = &ax + &b;
        let cy = &c * &y;
        let cbd = &(&c * &b) + &d;
        let reps = vec![
            a.clone(),       // A1
            b.clone(),       // A2
            c.clone(),       // B1
            d.clone(),       // B2
            &a * &c,         // C1
            cbd.clone(),     // C2
            ax.clone(),      // D
            cy.clone(),      // E
            &ax * &c,        // F
            &b * &c,         // G
            &a / &b,         // H
            &ax / &b,        // I
            b.clone(),       // P
            d.clone(),       // Q
            cbd,             // R
            a.clone(),       // S
            c.clone(),       // T
            &a * &c,         // U
            x,               // X
            y,               // Y
            &cy + &d,        // Z
        ];
        Self::new(spec, reps)
    }

    pub fn spec(&self) -> &Arc<ExtensionSpec> {
        self.points[0].spec()
    }

    pub fn get(&self, name: &str) -> &GeoPoint {
        let i = PSI_NAMES
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("unknown psi point {name}"));
        &self.points[i]
    }

    pub fn set(&mut self, name: &str, rep: QFunc) -> Result<()> {
        let i = PSI_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown psi point {name}")))?;
        self.points[i] = point_of(&Arc::clone(self.spec()), rep)?;
        Ok(())
    }

    fn rep(&self, name: &str) -> QFunc {
        self.get(name).rep().clone()
    }

    fn reps(&self, names: &[&str]) -> Vec<QFunc> {
        names.iter().map(|n| self.rep(n)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug)]
pub struct Conjunct {
    /// Position of the condition in the list defining `psi`, from 1.
    pub bullet: u8,
    pub name: String,
    pub outcome: Outcome,
    /// The condition is universally quantified and was checked on samples.
    pub sampled: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PsiReport {
    pub conjuncts: Vec<Conjunct>,
}

impl PsiReport {
    fn push(&mut self, bullet: u8, name: impl Into<String>, ok: bool, sampled: bool) {
        self.conjuncts.push(Conjunct {
            bullet,
            name: name.into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            sampled,
        });
    }

    /// Every conjunct that was evaluated passed.
    pub fn all_evaluable_pass(&self) -> bool {
        self.conjuncts.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn failed_bullets(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self
            .conjuncts
            .iter()
            .filter(|c| c.outcome == Outcome::Fail)
            .map(|c| c.bullet)
            .collect();
        out.dedup();
        out
    }
}

pub type QuadranglePredicate<'a> = &'a (dyn Fn(&PsiInstance) -> bool + Sync);

pub struct PsiOptions<'a> {
    /// Points sampled from each of the flats `A`, `B`, `C` for the
    /// universally quantified condition.
    pub samples: usize,
    pub seed: u64,
    /// Decides the partial-quadrangle condition; skipped when absent.
    pub partial_quadrangle: Option<QuadranglePredicate<'a>>,
}

impl Default for PsiOptions<'_> {
    fn default() -> Self {
        PsiOptions {
            samples: 8,
            seed: 0,
            partial_quadrangle: None,
        }
    }
}

/// Decides `acl(f1) ∩ acl(f2) = acl(p)` for flats of rank at most 2.
pub fn flats_meet_in(spec: &ExtensionSpec, f1: &[QFunc], f2: &[QFunc], p: &QFunc) -> Result<bool> {
    let (r1, r2) = (trdeg(spec, f1), trdeg(spec, f2));
    if r1 > 2 || r2 > 2 {
        return Err(Error::MissingWitness(
            "intersection of flats of rank above 2 needs an explicit witness".into(),
        ));
    }
    let leq = |a: &[QFunc], b: &[QFunc]| a.iter().all(|x| in_closure(spec, x, b));
    let p_in = |f: &[QFunc]| in_closure(spec, p, f);
    let (small, big, rs) = if r1 <= r2 { (f1, f2, r1) } else { (f2, f1, r2) };
    Ok(match rs {
        0 => false,
        // A point meets another flat in itself or in nothing.
        1 => leq(small, big) && p_in(small),
        // Two lines: distinct ones share at most one point.
        _ => !(leq(small, big) && leq(big, small)) && p_in(f1) && p_in(f2),
    })
}

/// Sample points of `acl(g1, g2)`: the generators, a few fixed
/// combinations, then seeded random rational expressions in them.
pub fn sample_flat_points(
    spec: &ExtensionSpec,
    g1: &QFunc,
    g2: &QFunc,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<QFunc> {
    let mut out = vec![g1.clone(), g2.clone(), g1 + g2, g1 * g2];
    out.truncate(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 20 * count {
        attempts += 1;
        let shape = gen::random_element(rng, 2, &[0, 1], 2, 0.3);
        let Ok(e) = shape.substitute(&[g1.clone(), g2.clone()]) else {
            continue;
        };
        if trdeg(spec, std::slice::from_ref(&e)) == 1 {
            out.push(e);
        }
    }
    out
}

pub fn psi_check(inst: &PsiInstance, opts: &PsiOptions<'_>) -> Result<PsiReport> {
    let spec = inst.spec();
    let r = |names: &[&str]| inst.reps(names);
    let cat = |parts: &[&[QFunc]]| parts.concat();
    let (a, b, c) = (r(&["A1", "A2"]), r(&["B1", "B2"]), r(&["C1", "C2"]));
    let abc = cat(&[&a, &b, &c]);
    let mut rep = PsiReport::default();

    let td = |xs: &[QFunc]| trdeg(spec, xs);
    rep.push(1, "trdeg(ABC) = 4", td(&abc) == 4, false);
    rep.push(1, "trdeg(AB) = 4", td(&cat(&[&a, &b])) == 4, false);
    rep.push(1, "trdeg(BC) = 4", td(&cat(&[&b, &c])) == 4, false);
    rep.push(1, "trdeg(AC) = 4", td(&cat(&[&a, &c])) == 4, false);

    let (x, y, z) = (inst.rep("X"), inst.rep("Y"), inst.rep("Z"));
    let inc = |e: &QFunc, set: &[QFunc]| in_closure(spec, e, set);
    rep.push(2, "X in acl(AY)", inc(&x, &cat(&[&a, std::slice::from_ref(&y)])), false);
    rep.push(2, "Z in acl(BY)", inc(&z, &cat(&[&b, std::slice::from_ref(&y)])), false);
    rep.push(2, "Z in acl(CX)", inc(&z, &cat(&[&c, std::slice::from_ref(&x)])), false);
    rep.push(2, "X, Y, Z not in acl(ABC)", ![&x, &y, &z].iter().any(|e| inc(e, &abc)), false);

    let mut rng = gen::fork(opts.seed, "psi-universal");
    let sa = sample_flat_points(spec, &a[0], &a[1], opts.samples, &mut rng);
    let sb = sample_flat_points(spec, &b[0], &b[1], opts.samples, &mut rng);
    let sc = sample_flat_points(spec, &c[0], &c[1], opts.samples, &mut rng);
    rep.push(
        3,
        "X not in acl(A'Y) for sampled A' in A",
        sa.iter().all(|p| !inc(&x, &[p.clone(), y.clone()])),
        true,
    );
    rep.push(
        3,
        "Z not in acl(B'Y) for sampled B' in B",
        sb.iter().all(|p| !inc(&z, &[p.clone(), y.clone()])),
        true,
    );
    rep.push(
        3,
        "Z not in acl(C'X) for sampled C' in C",
        sc.iter().all(|p| !inc(&z, &[p.clone(), x.clone()])),
        true,
    );

    let (s, t, u) = (inst.rep("S"), inst.rep("T"), inst.rep("U"));
    rep.push(4, "S in A", inc(&s, &a), false);
    rep.push(4, "T in B", inc(&t, &b), false);
    rep.push(4, "U in C", inc(&u, &c), false);
    rep.push(4, "trdeg(STU) = 2", td(&[s, t, u]) == 2, false);

    match opts.partial_quadrangle {
        Some(pred) => rep.push(5, "partial quadrangle", pred(inst), false),
        None => rep.conjuncts.push(Conjunct {
            bullet: 5,
            name: "partial quadrangle".into(),
            outcome: Outcome::Skipped,
            sampled: false,
        }),
    }

    let meets: [(u8, [&str; 2], &[&str], &str); 7] = [
        (6, ["P", "Y"], &["S", "X"], "D"),
        (6, ["T", "Y"], &["Q", "Z"], "E"),
        (7, ["U", "X"], &["T", "D"], "F"),
        (7, ["P", "T"], &["Q", "R"], "G"),
        (8, ["H", "X"], &["P", "Y"], "I"),
        (8, ["U", "G"], &["A1", "A2"], "H"),
        (8, ["F", "Z"], &["C1", "C2"], "R"),
    ];
    for (bullet, l1, l2, p) in meets {
        let ok = flats_meet_in(spec, &r(&l1), &r(l2), &inst.rep(p))?;
        let show = |ns: &[&str]| match ns {
            ["A1", "A2"] => "A".to_string(),
            ["C1", "C2"] => "C".to_string(),
            _ => format!("acl({})", ns.join(",")),
        };
        rep.push(bullet, format!("{} meets {} in {p}", show(&l1), show(l2)), ok, false);
    }
    Ok(rep)
}
