//! Seeded property families, one or more per acceptance criterion.
//!
//! Every instance draws from its own stream `fork(seed, "family/i")`, so
//! results do not depend on scheduling; families and instances run on the
//! rayon pool and are collected in order. The report carries no timings
//! and is a pure function of `(seed, scale, fault)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::configurations::{j_map, j_membership_of, mult_construct, q_membership};
use crate::error::Result;
use crate::gen::{fork, int_triple, nonzero_int, random_element, random_poly, SeededRng};
use crate::geometry::{point_of, Tower};
use crate::logic::{
    counterexample_family, default_pool, eval_exists, eval_exists_by_search, union_witness,
    random_normal_form, random_proper_flats, tower_harness, Assignment, GenShape, Sentence,
};
use crate::planes::{
    coordinatization_check, desargues_check, desargues_in_plane, maximality_probe, random_desargues,
    PlaneAnchor, PlaneMode,
};
use crate::pregeometry::{
    dependence_oracle_bruteforce, exchange_check, in_closure, is_independent, ExtensionSpec,
};
use crate::reconstruction::{mu, recover_field_map, GeometryMap, J1Class, SubstitutionMap};
use crate::{q, QFunc, QProjPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Smoke,
    Full,
}

impl Scale {
    pub fn parse(s: &str) -> Option<Scale> {
        match s {
            "smoke" => Some(Scale::Smoke),
            "full" => Some(Scale::Full),
            _ => None,
        }
    }

    fn pick(self, smoke: usize, full: usize) -> usize {
        match self {
            Scale::Smoke => smoke,
            Scale::Full => full,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    pub scale: Scale,
    /// Name of a family whose first verdict is flipped.
    pub fault: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub name: String,
    pub criterion: u8,
    pub invariant: String,
    pub instances: usize,
    /// Samples checked inside each instance.
    pub samples_per_instance: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl FamilyReport {
    pub fn ok(&self) -> bool {
        self.passed == self.instances
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub scale: Scale,
    pub fault: Option<String>,
    pub families: Vec<FamilyReport>,
    pub passed: bool,
}

impl SelftestReport {
    pub fn criterion_ok(&self, criterion: u8) -> bool {
        let fams: Vec<_> = self.families.iter().filter(|f| f.criterion == criterion).collect();
        !fams.is_empty() && fams.iter().all(|f| f.ok())
    }

    pub fn family(&self, name: &str) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.name == name)
    }
}

type Instance = dyn Fn(&mut SeededRng, usize) -> Result<bool> + Sync;

struct Family {
    name: &'static str,
    criterion: u8,
    invariant: &'static str,
    count: usize,
    samples: usize,
    run: Box<Instance>,
}

const MAX_LISTED_FAILURES: usize = 5;

impl Family {
    fn execute(&self, opts: &SelftestOptions) -> FamilyReport {
        let mut results: Vec<std::result::Result<bool, String>> = (0..self.count)
            .into_par_iter()
            .map(|i| {
                let mut rng = fork(opts.seed, &format!("{}/{i}", self.name));
                (self.run)(&mut rng, i).map_err(|e| e.to_string())
            })
            .collect();
        if opts.fault.as_deref() == Some(self.name) {
            if let Some(Ok(v)) = results.first_mut() {
                *v = !*v;
            }
        }
        let mut failures = Vec::new();
        let mut passed = 0;
        for (i, r) in results.iter().enumerate() {
            match r {
                Ok(true) => passed += 1,
                Ok(false) => failures.push(format!("instance {i}: {} violated", self.invariant)),
                Err(e) => failures.push(format!("instance {i}: {e}")),
            }
        }
        failures.truncate(MAX_LISTED_FAILURES);
        FamilyReport {
            name: self.name.into(),
            criterion: self.criterion,
            invariant: self.invariant.into(),
            instances: self.count,
            samples_per_instance: self.samples,
            passed,
            failures,
        }
    }
}

fn family(
    name: &'static str,
    criterion: u8,
    invariant: &'static str,
    count: usize,
    run: impl Fn(&mut SeededRng, usize) -> Result<bool> + Sync + 'static,
) -> Family {
    Family {
        name,
        criterion,
        invariant,
        count,
        samples: 1,
        run: Box::new(run),
    }
}

impl Family {
    fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

/// Names of every family, in report order.
pub fn family_names() -> Vec<&'static str> {
    families(Scale::Smoke).iter().map(|f| f.name).collect()
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let fams = families(opts.scale);
    let families: Vec<FamilyReport> = fams.par_iter().map(|f| f.execute(opts)).collect();
    let passed = families.iter().all(|f| f.ok());
    SelftestReport {
        seed: opts.seed,
        scale: opts.scale,
        fault: opts.fault.clone(),
        families,
        passed,
    }
}

fn random_spec(rng: &mut impl Rng, min_n: usize, max_n: usize, with_base: bool) -> ExtensionSpec {
    let n = rng.gen_range(min_n..=max_n);
    let k: Vec<usize> = if with_base && n > 2 && rng.gen_bool(0.3) { vec![0] } else { vec![] };
    ExtensionSpec::new(n, k).expect("valid spec")
}

fn random_subset(rng: &mut impl Rng, n: usize, min: usize) -> Vec<usize> {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let take = rng.gen_range(min.min(n)..=n);
    vars.truncate(take.max(1));
    vars
}

fn element(rng: &mut impl Rng, spec: &ExtensionSpec, max_deg: u32) -> QFunc {
    let vars = random_subset(rng, spec.nvars(), 1);
    random_element(rng, spec.nvars(), &vars, max_deg, 0.25)
}

/// An element built from `set`, hence in its closure.
fn element_over(rng: &mut impl Rng, spec: &ExtensionSpec, set: &[QFunc]) -> QFunc {
    let n = spec.nvars();
    let mut acc = QFunc::constant(n, q(nonzero_int(rng, 3)));
    for x in set {
        if rng.gen_bool(0.7) {
            let c = QFunc::constant(n, q(nonzero_int(rng, 3)));
            acc = if rng.gen_bool(0.5) { &acc + &(x * &c) } else { &(&acc * x) + &c };
        }
    }
    acc
}

fn families(scale: Scale) -> Vec<Family> {
    vec![
        family(
            "pregeometry.exchange",
            1,
            "exchange",
            scale.pick(60, 500),
            |rng, _| {
                let spec = random_spec(rng, 2, 6, true);
                let set: Vec<QFunc> = (0..rng.gen_range(0..=3)).map(|_| element(rng, &spec, 3)).collect();
                let y = element(rng, &spec, 3);
                let a = if rng.gen_bool(0.6) {
                    let mut with_y = set.clone();
                    with_y.push(y.clone());
                    element_over(rng, &spec, &with_y)
                } else {
                    element(rng, &spec, 3)
                };
                Ok(exchange_check(&spec, &a, &y, &set))
            },
        ),
        family(
            "pregeometry.monotone_idempotent",
            1,
            "closure monotonicity and idempotence",
            scale.pick(40, 300),
            |rng, _| {
                let spec = random_spec(rng, 2, 6, true);
                let set: Vec<QFunc> = (0..rng.gen_range(1..=3)).map(|_| element(rng, &spec, 3)).collect();
                let inner = element_over(rng, &spec, &set);
                let extra = element(rng, &spec, 2);
                let mut bigger = set.clone();
                bigger.push(extra);
                let monotone = in_closure(&spec, &inner, &bigger);
                // acl(acl(A)) = acl(A): anything over A ∪ {inner} is over A.
                let mut closed = set.clone();
                closed.push(inner);
                let deeper = element_over(rng, &spec, &closed);
                let idempotent = in_closure(&spec, &deeper, &set);
                let reflexive = set.iter().all(|x| in_closure(&spec, x, &set));
                Ok(monotone && idempotent && reflexive)
            },
        ),
        family(
            "pregeometry.oracle_agreement",
            2,
            "Jacobian verdict equals annihilator search",
            scale.pick(15, 100),
            |rng, _| {
                let n = rng.gen_range(2..=3);
                let spec = ExtensionSpec::rational(n);
                let count = rng.gen_range(1..=3);
                let all: Vec<usize> = (0..n).collect();
                let xs: Vec<QFunc> = if rng.gen_bool(0.5) && n == 3 {
                    // Dependent by construction: everything factors
                    // through two linear forms.
                    let u = random_poly(rng, n, &all, 1, 3);
                    let v = random_poly(rng, n, &all, 1, 3);
                    (0..count)
                        .map(|_| {
                            let a = q(nonzero_int(rng, 3));
                            let b = q(nonzero_int(rng, 3));
                            let e = match rng.gen_range(0..3) {
                                0 => u.scale(&a) + v.scale(&b),
                                1 => (u.clone() * v.clone()).scale(&a) + u.scale(&b),
                                _ => u.clone() * u.clone() + v.scale(&a),
                            };
                            QFunc::from_poly(e)
                        })
                        .collect()
                } else {
                    (0..count)
                        .map(|_| QFunc::from_poly(random_poly(rng, n, &all, 2, 2)))
                        .collect()
                };
                let jac = is_independent(&spec, &xs);
                let oracle = dependence_oracle_bruteforce(&spec, &xs, 4)?;
                Ok(jac == oracle.is_independent())
            },
        ),
        family(
            "planes.coordinatization_additive",
            3,
            "collinearity in the plane equals linear dependence",
            scale.pick(30, 200),
            |rng, _| coordinatization_instance(rng, PlaneMode::Additive),
        ),
        family(
            "planes.coordinatization_multiplicative",
            3,
            "collinearity in the plane equals linear dependence",
            scale.pick(30, 200),
            |rng, _| coordinatization_instance(rng, PlaneMode::Multiplicative),
        ),
        family(
            "planes.maximality_probe",
            3,
            "plane elements on two lines sit at their meet",
            scale.pick(20, 100),
            |rng, _| {
                let spec = Arc::new(ExtensionSpec::rational(3));
                let anchor = PlaneAnchor::on_vars(&spec, [0, 1, 2], PlaneMode::Additive)?;
                let pts: Vec<QProjPoint> = (0..4)
                    .map(|_| QProjPoint::from_ints(int_triple(rng, 3)))
                    .collect::<Result<_>>()?;
                let (Some(l1), Some(l2)) = (pts[0].join(&pts[1]), pts[2].join(&pts[3])) else {
                    return Ok(true);
                };
                let Some(meet) = l1.meet(&l2) else {
                    return Ok(true);
                };
                let m = anchor.element(&meet)?;
                let n = spec.nvars();
                let on_meet = &(&(&m * &m) * &QFunc::constant(n, q(nonzero_int(rng, 4))))
                    + &QFunc::constant(n, q(rng.gen_range(-5..=5)));
                let stray = element(rng, &spec, 2);
                for cand in [on_meet, m, stray] {
                    let probe = maximality_probe(&anchor, (&pts[0], &pts[1]), (&pts[2], &pts[3]), &cand);
                    match probe {
                        Ok(Some(false)) => return Ok(false),
                        Ok(_) | Err(crate::Error::NotTranscendental(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(true)
            },
        ),
        family(
            "planes.desargues",
            4,
            "axis points are collinear",
            scale.pick(10, 20),
            |rng, _| {
                let cfg = random_desargues(rng, 5);
                let spec = Arc::new(ExtensionSpec::rational(3));
                let anchor = PlaneAnchor::on_vars(&spec, [0, 1, 2], PlaneMode::Additive)?;
                Ok(desargues_check(&cfg)? && desargues_in_plane(&anchor, &cfg)?)
            },
        ),
        family(
            "configurations.q_presentations",
            5,
            "both presentations of Q give the same tuple",
            scale.pick(15, 50),
            |rng, _| {
                let spec = Arc::new(ExtensionSpec::rational(4));
                let (x, y) = independent_pair(rng, &spec);
                let pts = |es: [QFunc; 4]| -> Result<Vec<_>> { es.into_iter().map(|e| point_of(&spec, e)).collect() };
                let first = pts([x.clone(), y.clone(), &x + &y, &x / &y])?;
                let z = &y / &x;
                let second = pts([x.clone(), &x * &z, &(&x * &z) + &x, z.clone()])?;
                let tuple: [_; 4] = first.clone().try_into().expect("four points");
                Ok(first == second && q_membership(&tuple, (&x, &y)))
            },
        ),
        family(
            "configurations.j_decomposition",
            5,
            "J membership agrees with its Q/Q' decomposition",
            scale.pick(15, 50),
            |rng, _| {
                let spec = Arc::new(ExtensionSpec::rational(4));
                let (x, a) = independent_pair(rng, &spec);
                let t = j_map(&spec, &x, &a)?;
                let m = j_membership_of(&t);
                Ok(m.direct && m.agree())
            },
        ),
        family(
            "configurations.mult_construct",
            5,
            "constructed product equals acl(xy)",
            scale.pick(15, 50),
            |rng, _| {
                let spec = Arc::new(ExtensionSpec::rational(4));
                let (x, y) = independent_pair(rng, &spec);
                let p = |e: QFunc| point_of(&spec, e);
                let prod = mult_construct(&p(x.clone())?, &p(y.clone())?, &p(&x / &y)?, &x, &y)?;
                Ok(prod == p(&x * &y)?)
            },
        ),
        family(
            "reconstruction.mu_laws",
            6,
            "mu transports the interpreted field operations",
            scale.pick(20, 100),
            |rng, _| {
                let spec = Arc::new(ExtensionSpec::rational(5));
                let class = J1Class::with_default_anchor(&spec)?;
                let r = field_sample(rng, &spec);
                let s = field_sample(rng, &spec);
                let (p, pq) = (class.value(&r)?, class.value(&s)?);
                let sum = class.ratio_add(&p, &pq)?;
                let prod = class.ratio_mul(&p, &pq)?;
                let one = class.value(&QFunc::one(5))?;
                let neg = class.value(&-&r)?;
                Ok(mu(&p) == r
                    && class.ratio_add(&p, &neg)?.is_zero()
                    && mu(&sum) == &r + &s
                    && mu(&prod) == &r * &s
                    && class.ratio_mul(&p, &one)? == p
                    && (p == pq) == (r == s))
            },
        ),
        family(
            "reconstruction.roundtrip",
            6,
            "recovered field map equals the inducing automorphism",
            ROUNDTRIP_MAPS.len(),
            move |rng, i| roundtrip_instance(rng, ROUNDTRIP_MAPS[i], scale.pick(6, 20)),
        )
        .with_samples(scale.pick(6, 20)),
        family(
            "logic.tower_agreement",
            7,
            "one-quantifier sentences agree across the tower",
            scale.pick(25, 100),
            |rng, _| {
                let lower = ExtensionSpec::new(4, [0])?;
                let upper = ExtensionSpec::new(4, [0])?;
                let tower = Tower::with_embedding(lower, upper, vec![0, 3, 1, 2])?;
                let nf = random_normal_form(rng, tower.lower(), GenShape::default());
                let psi = nf.to_sentence();
                let report = tower_harness(&tower, std::slice::from_ref(&psi))?;
                let pool = default_pool(tower.lower());
                let searched = eval_exists_by_search(tower.lower(), &psi, &Assignment::new(), &pool)?;
                Ok(report.hypothesis && report.all_agree() && searched == report.rows[0].lower)
            },
        ),
        family(
            "logic.counterexample",
            7,
            "towers of unequal degree disagree on the escape sentence",
            counterexample_family().len(),
            |_, i| {
                let (tower, psi): (Tower, Sentence) = counterexample_family().swap_remove(i);
                let report = tower_harness(&tower, &[psi])?;
                let row = &report.rows[0];
                Ok(!report.hypothesis && !row.lower && row.upper)
            },
        ),
        family(
            "logic.union_witness",
            8,
            "witness escapes every proper coordinate flat",
            scale.pick(30, 200),
            |rng, _| {
                let spec = random_spec(rng, 2, 6, true);
                let count = rng.gen_range(1..=4);
                let flats = random_proper_flats(rng, &spec, count);
                let w = union_witness(&spec, &flats)?;
                Ok(flats_avoided(&spec, &flats, &w))
            },
        ),
        family(
            "logic.criterion_vs_search",
            7,
            "flat criterion equals explicit pool search",
            scale.pick(25, 100),
            |rng, _| {
                let spec = random_spec(rng, 2, 4, true);
                let nf = random_normal_form(rng, &spec, GenShape::default());
                let fast = eval_exists(&spec, &nf, None)?;
                let slow = eval_exists_by_search(&spec, &nf.to_sentence(), &Assignment::new(), &default_pool(&spec))?;
                Ok(fast == slow)
            },
        ),
    ]
}

fn flats_avoided(spec: &ExtensionSpec, flats: &[BTreeSet<usize>], w: &QFunc) -> bool {
    flats.iter().all(|f| {
        let gens: Vec<QFunc> = f.iter().map(|&v| spec.var(v)).collect();
        !in_closure(spec, w, &gens)
    })
}

fn coordinatization_instance(rng: &mut SeededRng, mode: PlaneMode) -> Result<bool> {
    let spec = Arc::new(ExtensionSpec::rational(3));
    let anchor = PlaneAnchor::on_vars(&spec, [0, 1, 2], mode)?;
    let p = |t: [i64; 3]| QProjPoint::from_ints(t);
    let a = p(int_triple(rng, 4))?;
    let b = p(int_triple(rng, 4))?;
    // Half the time force the third point onto the line through a and b.
    let c = if rng.gen_bool(0.5) {
        let l = q(nonzero_int(rng, 3));
        let m = q(nonzero_int(rng, 3));
        match a.combine(&l, &b, &m) {
            Some(c) => c,
            None => p(int_triple(rng, 4))?,
        }
    } else {
        p(int_triple(rng, 4))?
    };
    coordinatization_check(&anchor, &[a, b, c])
}

fn independent_pair(rng: &mut SeededRng, spec: &ExtensionSpec) -> (QFunc, QFunc) {
    loop {
        let x = element(rng, spec, 2);
        let y = element(rng, spec, 2);
        if is_independent(spec, &[x.clone(), y.clone()]) {
            return (x, y);
        }
    }
}

/// Nonzero element of `Q(t1..t5)`, sometimes a rational constant.
fn field_sample(rng: &mut SeededRng, spec: &ExtensionSpec) -> QFunc {
    if rng.gen_bool(0.2) {
        return QFunc::constant(spec.nvars(), q(nonzero_int(rng, 5)));
    }
    element(rng, spec, 2)
}

const ROUNDTRIP_MAPS: [&str; 8] = [
    "identity",
    "swap(t1,t2)",
    "swap(t1,t5)",
    "perm(t2,t3,t4,t5,t1)",
    "affine(t1,2,1)",
    "affine(t5,-1,3)",
    "affine(t3,1/2,-2)",
    "mobius(t2,1,1,1,-1)",
];

fn roundtrip_instance(rng: &mut SeededRng, map: &str, samples: usize) -> Result<bool> {
    let spec = Arc::new(ExtensionSpec::rational(5));
    let f = SubstitutionMap::parse(&spec, map)?;
    let rec = recover_field_map(&f, None, None)?;
    for _ in 0..samples {
        let x = field_sample(rng, &spec);
        if rec.apply(&x)? != f.sigma(&x)? {
            return Ok(false);
        }
    }
    let anchor = rec.class().anchor().clone();
    for _ in 0..3 {
        let g = random_element(rng, 1, &[0], 2, 0.4);
        let a_prime = g.substitute(std::slice::from_ref(&anchor))?;
        if a_prime.is_constant() {
            continue;
        }
        let got = rec.dependent_point_recovery(&a_prime)?;
        if got != f.apply(&point_of(&spec, a_prime.clone())?)? || got != point_of(&spec, f.sigma(&a_prime)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_passes_and_is_deterministic() {
        let opts = SelftestOptions {
            seed: 1,
            scale: Scale::Smoke,
            fault: None,
        };
        let a = run_selftest(&opts);
        for f in &a.families {
            assert!(f.ok(), "{f:?}");
        }
        assert_eq!(a, run_selftest(&opts));
    }

    #[test]
    fn injected_fault_is_named() {
        let opts = SelftestOptions {
            seed: 3,
            scale: Scale::Smoke,
            fault: Some("planes.desargues".into()),
        };
        let r = run_selftest(&opts);
        assert!(!r.passed);
        let f = r.family("planes.desargues").unwrap();
        assert_eq!(f.failures, vec!["instance 0: axis points are collinear violated".to_string()]);
        assert!(!r.criterion_ok(4));
        assert!(r.criterion_ok(3));
    }
}
