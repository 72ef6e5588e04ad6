//! Worked examples checked against small independent computations: a
//! numeric Jacobian rank built from raw polynomial terms, substitution
//! into annihilators, and integer cross products for plane geometry.

use std::collections::BTreeSet;
use std::sync::Arc;

use fieldgeom::algebra::{matrix_rank_ff, FFMatrix};
use fieldgeom::configurations::{j_map, mult_construct, psi_check, q_membership, PsiInstance, PsiOptions};
use fieldgeom::geometry::{relative_containment_sides, point_of, Tower};
use fieldgeom::logic::{
    eval_exists, eval_qf, parse_sentence, union_witness, tower_harness, Assignment, NormalForm,
};
use fieldgeom::planes::{
    coordinatization_check, desargues_check, rigidity_verify, plane_point, collinear, DesarguesConfig, RigidityCase,
    MultiplicativeWitness, PlaneAnchor, PlaneMode,
};
use fieldgeom::pregeometry::{
    basis_of, dependence_oracle_bruteforce, in_closure, trdeg, DependenceVerdict, ExtensionSpec,
};
use fieldgeom::reconstruction::{mu, oplus, odot, recover_field_map, J1Class, SubstitutionMap};
use fieldgeom::{q, QFunc, QPoly, QProjPoint, Q};
use num_traits::{One, Zero};

fn poly_at(p: &QPoly, pt: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (v, &e) in m.exponents().iter().enumerate() {
            for _ in 0..e {
                t *= &pt[v];
            }
        }
        acc += t;
    }
    acc
}

fn poly_diff_at(p: &QPoly, var: usize, pt: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (m, c) in p.terms() {
        let e = m.exponents()[var];
        if e == 0 {
            continue;
        }
        let mut t = c * q(e as i64);
        for (v, &k) in m.exponents().iter().enumerate() {
            let k = if v == var { k - 1 } else { k };
            for _ in 0..k {
                t *= &pt[v];
            }
        }
        acc += t;
    }
    acc
}

fn func_at(f: &QFunc, pt: &[Q]) -> Option<Q> {
    let d = poly_at(f.den(), pt);
    if d.is_zero() {
        return None;
    }
    Some(poly_at(f.num(), pt) / d)
}

/// Quotient rule evaluated at a point.
fn func_diff_at(f: &QFunc, var: usize, pt: &[Q]) -> Option<Q> {
    let (n, d) = (poly_at(f.num(), pt), poly_at(f.den(), pt));
    if d.is_zero() {
        return None;
    }
    let (dn, dd) = (poly_diff_at(f.num(), var, pt), poly_diff_at(f.den(), var, pt));
    Some((dn * &d - n * dd) / (&d * &d))
}

fn gauss_rank(mut m: Vec<Vec<Q>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in c..cols {
                    let sub = &f * &m[rank][k];
                    m[r][k] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Deterministic pseudo-random evaluation points, independent of the
/// library generators.
fn points(n: usize, count: usize) -> Vec<Vec<Q>> {
    let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    q(((s >> 33) % 2001) as i64 - 1000)
                })
                .collect()
        })
        .collect()
}

/// Largest rank of the Jacobian (free columns only) over several points.
fn numeric_trdeg(spec: &ExtensionSpec, xs: &[QFunc]) -> usize {
    let free = spec.free_vars();
    points(spec.nvars(), 6)
        .iter()
        .filter_map(|pt| {
            let m: Option<Vec<Vec<Q>>> = xs
                .iter()
                .map(|x| free.iter().map(|&v| func_diff_at(x, v, pt)).collect())
                .collect();
            m.map(gauss_rank)
        })
        .max()
        .unwrap_or(0)
}

fn oracle_same_point(spec: &ExtensionSpec, a: &QFunc, b: &QFunc) -> bool {
    numeric_trdeg(spec, std::slice::from_ref(a)) == 1 && numeric_trdeg(spec, &[a.clone(), b.clone()]) == 1
}

fn rational(n: usize) -> Arc<ExtensionSpec> {
    Arc::new(ExtensionSpec::rational(n))
}

fn el(spec: &ExtensionSpec, src: &str) -> QFunc {
    spec.parse(src).unwrap()
}

fn els(spec: &ExtensionSpec, srcs: &[&str]) -> Vec<QFunc> {
    spec.parse_all(srcs).unwrap()
}

#[test]
fn symbolic_rank_of_two_by_two() {
    let s = ExtensionSpec::rational(2);
    let row = |a: &str, b: &str| vec![el(&s, a).num().clone(), el(&s, b).num().clone()];
    let m = FFMatrix::new(2, vec![row("1", "1"), row("t2", "t1")]).unwrap();
    assert_eq!(matrix_rank_ff(&m), 2);
    // determinant t1 - t2 is nonzero at a generic point
    let det = el(&s, "t1 - t2");
    assert!(points(2, 3).iter().any(|p| !func_at(&det, p).unwrap().is_zero()));
    let numeric = points(2, 3)
        .iter()
        .map(|p| gauss_rank(m.eval(p).unwrap()))
        .max()
        .unwrap();
    assert_eq!(numeric, 2);

    let prop = FFMatrix::new(2, vec![row("t1", "t2"), row("2*t1", "2*t2")]).unwrap();
    assert_eq!(matrix_rank_ff(&prop), 1);
    assert_eq!(matrix_rank_ff(&FFMatrix::<Q>::zeros(2, 3, 3)), 0);
}

#[test]
fn transcendence_degrees_match_numeric_jacobian() {
    let s = ExtensionSpec::rational(3);
    for (srcs, expect) in [
        (&["t1", "t2", "t1 + t2"][..], 2),
        (&["t1 + t2", "t1*t2"], 2),
        (&["t1 + t2", "t1*t2", "t1"], 2),
        (&["t1", "t1^2", "t2"], 2),
        (&["t1/t2", "t2/t3", "t3/t1"], 2),
        (&["t1", "t2", "t3"], 3),
    ] {
        let xs = els(&s, srcs);
        assert_eq!(trdeg(&s, &xs), expect, "{srcs:?}");
        assert_eq!(numeric_trdeg(&s, &xs), expect, "{srcs:?}");
    }
    let k = ExtensionSpec::new(2, [0]).unwrap();
    assert_eq!(trdeg(&k, &els(&k, &["t1*t2"])), 1);
    assert_eq!(numeric_trdeg(&k, &els(&k, &["t1*t2"])), 1);
}

#[test]
fn closure_and_basis_examples() {
    let s = ExtensionSpec::rational(3);
    let y = el(&s, "t1 + t2");
    let over = els(&s, &["t1 - t2"]);
    assert!(!in_closure(&s, &y, &over));
    // Jacobian rows (1,1) and (1,-1)
    assert_eq!(gauss_rank(vec![vec![q(1), q(1)], vec![q(1), q(-1)]]), 2);

    let xs = els(&s, &["t1 + t2", "t1*t2", "t1"]);
    assert_eq!(basis_of(&s, &xs), els(&s, &["t1 + t2", "t1*t2"]));
    // t1 is a root of X^2 - (t1 + t2) X + t1 t2
    let (e, p, x) = (&xs[0], &xs[1], &xs[2]);
    assert!((&(x * x) - &(e * x) + p.clone()).is_zero());
}

/// Plugs `xs` into the `y` variables of an annihilator and evaluates.
fn annihilator_vanishes(spec: &ExtensionSpec, rel: &QPoly, xs: &[QFunc]) -> bool {
    points(spec.nvars(), 4).iter().all(|pt| {
        let mut full: Vec<Q> = xs.iter().map(|x| func_at(x, pt).unwrap()).collect();
        full.extend(pt.iter().cloned());
        poly_at(rel, &full).is_zero()
    })
}

#[test]
fn annihilators_found_by_linear_search() {
    let s = ExtensionSpec::rational(2);
    let xs = els(&s, &["t1^2", "t1^3"]);
    let DependenceVerdict::Annihilator(a) = dependence_oracle_bruteforce(&s, &xs, 3).unwrap() else {
        panic!("expected a relation");
    };
    assert!(annihilator_vanishes(&s, &a.poly, &xs));
    // y1^3 - y2^2 in the variables (y1, y2, t1, t2)
    let expect = fieldgeom::algebra::parse_poly("t1^3 - t2^2", 4).unwrap();
    assert!(a.same_up_to_scalar(&expect));

    let xs = els(&s, &["t1 + t2", "t1*t2", "t1"]);
    let DependenceVerdict::Annihilator(a) = dependence_oracle_bruteforce(&s, &xs, 2).unwrap() else {
        panic!("expected a relation");
    };
    assert!(annihilator_vanishes(&s, &a.poly, &xs));
    // y3^2 - y1 y3 + y2 in (y1, y2, y3, t1, t2)
    let expect = fieldgeom::algebra::parse_poly("t3^2 - t1*t3 + t2", 5).unwrap();
    assert!(a.same_up_to_scalar(&expect));

    let ind = dependence_oracle_bruteforce(&s, &els(&s, &["t1", "t2"]), 3).unwrap();
    assert!(ind.is_independent());
}

#[test]
fn relative_containment_on_a_tower() {
    let tower = Tower::rational(3, 4, &[]).unwrap();
    let l1 = tower.lower().clone();
    let (a, b) = (els(&l1, &["t1", "t2"]), els(&l1, &["t1"]));
    assert_eq!(relative_containment_sides(&tower, &a, &b).unwrap(), (true, true));
    let mut ab = a.clone();
    ab.extend(b.iter().cloned());
    assert!(numeric_trdeg(&l1, &ab) > numeric_trdeg(&l1, &b));
    assert_eq!(relative_containment_sides(&tower, &b, &b).unwrap(), (false, false));
}

fn idet(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> i64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn icross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn pp(v: [i64; 3]) -> QProjPoint {
    QProjPoint::from_ints(v).unwrap()
}

#[test]
fn plane_triples_follow_integer_determinants() {
    let s = rational(3);
    let anchor = PlaneAnchor::on_vars(&s, [0, 1, 2], PlaneMode::Additive).unwrap();
    for (vs, collinear_expected) in [
        ([[1, 1, 1], [1, 2, 3], [1, 3, 5]], true),
        ([[1, 1, 1], [1, 2, 3], [2, 3, 4]], true),
        ([[1, 0, 0], [0, 1, 0], [1, 1, 0]], true),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], false),
    ] {
        assert_eq!(idet(vs[0], vs[1], vs[2]) == 0, collinear_expected);
        let pts: Vec<_> = vs.iter().map(|&v| plane_point(&anchor, &pp(v)).unwrap()).collect();
        assert_eq!(collinear(&pts[0], &pts[1], &pts[2]), collinear_expected);
        assert!(coordinatization_check(&anchor, &vs.map(pp)).unwrap());
        // independent rank from the numeric Jacobian
        let elems: Vec<QFunc> = pts.iter().map(|p| p.rep().clone()).collect();
        assert_eq!(numeric_trdeg(&s, &elems) == 2, collinear_expected);
    }
    let p = plane_point(&anchor, &pp([1, 2, 3])).unwrap();
    assert!(oracle_same_point(&s, p.rep(), &el(&s, "t1 + 2*t2 + 3*t3")));
    let mult = PlaneAnchor::on_vars(&s, [0, 1, 2], PlaneMode::Multiplicative).unwrap();
    let p = plane_point(&mult, &pp([1, 1, 0])).unwrap();
    assert!(oracle_same_point(&s, p.rep(), &el(&s, "t1*t2")));
}

#[test]
fn desargues_from_center_one_one_one() {
    let o = [1, 1, 1];
    let a = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    // b_i = o + 2 a_i lies on the line o a_i
    let b = a.map(|v| [o[0] + 2 * v[0], o[1] + 2 * v[1], o[2] + 2 * v[2]]);
    for i in 0..3 {
        assert_eq!(idet(o, a[i], b[i]), 0);
    }
    let axis = |i: usize, j: usize| icross(icross(a[i], a[j]), icross(b[i], b[j]));
    let (p, r, s) = (axis(0, 1), axis(0, 2), axis(1, 2));
    assert_eq!(idet(p, r, s), 0);

    let cfg = DesarguesConfig {
        center: pp(o),
        a: a.map(pp),
        b: b.map(pp),
    };
    assert!(desargues_check(&cfg).unwrap());
    let shared = DesarguesConfig {
        center: pp(o),
        a: a.map(pp),
        b: [pp(a[0]), pp(b[1]), pp(b[2])],
    };
    assert!(desargues_check(&shared).is_err());
}

#[test]
fn multiplicative_rigidity_example() {
    let s = ExtensionSpec::rational(2);
    let x = [el(&s, "t1"), el(&s, "t2")];
    let three = QFunc::constant(2, q(3));
    let w = MultiplicativeWitness::build(x.clone(), 1, three.clone(), three).unwrap();
    assert!(rigidity_verify(&s, &RigidityCase::Multiplicative(w.clone())).unwrap());
    assert!(oracle_same_point(&s, &w.x_prime[0], &x[0]));
    assert!(oracle_same_point(&s, &(&w.x_prime[0] * &w.x_prime[1]), &(&x[0] * &x[1])));
}

#[test]
fn j_tuple_and_q_presentations() {
    let s = rational(3);
    let (t1, t2) = (el(&s, "t1"), el(&s, "t2"));
    let j = j_map(&s, &t1, &t2).unwrap();
    for (p, e) in j.points.iter().zip(els(&s, &["t1", "t1 + t2", "t1*t2", "t1 + t1*t2", "t2"])) {
        assert!(oracle_same_point(&s, p.rep(), &e));
    }
    assert!(j_map(&s, &t1, &t1).is_err());

    let tuple = els(&s, &["t1", "t1*t2", "t1*t2 + t1", "t2"]).into_iter().map(|e| point_of(&s, e).unwrap());
    let tuple: [_; 4] = tuple.collect::<Vec<_>>().try_into().unwrap();
    let y = &t1 * &t2;
    assert!(q_membership(&tuple, (&t1, &y)));
    // x / y = 1 / t2 sits at the same point as t2
    assert!(oracle_same_point(&s, &(&t1 / &y), &t2));

    let pts = els(&s, &["t1", "t2", "t1/t2"]).into_iter().map(|e| point_of(&s, e).unwrap()).collect::<Vec<_>>();
    let prod = mult_construct(&pts[0], &pts[1], &pts[2], &t1, &t2).unwrap();
    assert!(oracle_same_point(&s, prod.rep(), &el(&s, "t1*t2")));
}

#[test]
fn psi_standard_instance() {
    let s = rational(5);
    let reps: [QFunc; 5] = std::array::from_fn(|i| s.var(i));
    let inst = PsiInstance::standard(&s, reps).unwrap();
    for (name, e) in [("P", "t2"), ("D", "t1*t5"), ("Y", "t1*t5 + t2"), ("I", "t1*t5/t2")] {
        assert!(oracle_same_point(&s, inst.get(name).rep(), &el(&s, e)), "{name}");
    }
    assert!(psi_check(&inst, &PsiOptions::default()).unwrap().all_evaluable_pass());
}

#[test]
fn generic_operations_on_the_j_class() {
    let s = rational(5);
    let t5 = el(&s, "t5");
    let (u, v) = (j_map(&s, &el(&s, "t1"), &t5).unwrap(), j_map(&s, &el(&s, "t2"), &t5).unwrap());
    let sum = oplus(&u, &v).unwrap();
    for (p, e) in sum.points.iter().zip(els(&s, &["t1 + t2", "t1 + t2 + t5", "(t1 + t2)*t5", "(t1 + t2)*(1 + t5)", "t5"])) {
        assert!(oracle_same_point(&s, p.rep(), &e));
    }
    let prod = odot(&u, &v).unwrap();
    assert!(oracle_same_point(&s, prod.points[0].rep(), &el(&s, "t1*t2")));
    assert!(oracle_same_point(&s, prod.points[3].rep(), &el(&s, "t1*t2 + t1*t2*t5")));
    assert!(oplus(&u, &u).is_err());
}

#[test]
fn ratio_classes_and_mu() {
    let s = rational(5);
    let class = J1Class::with_default_anchor(&s).unwrap();
    let (t1, t2, t3) = (el(&s, "t1"), el(&s, "t2"), el(&s, "t3"));
    assert_eq!(mu(&class.ratio(&t1, &t2).unwrap()), el(&s, "t1/t2"));
    assert!(mu(&class.zero()).is_zero());
    assert_eq!(mu(&class.ratio(&el(&s, "2*t1"), &t1).unwrap()), QFunc::constant(5, q(2)));

    let p = class.ratio(&t1, &t2).unwrap();
    let r = class.ratio(&t2, &t3).unwrap();
    let pr = class.ratio_mul(&p, &r).unwrap();
    // compare values pointwise against the hand-computed quotient
    for pt in points(5, 3) {
        let lhs = func_at(&mu(&pr), &pt).unwrap();
        assert_eq!(lhs, &pt[0] / &pt[2]);
    }
    let (two, three) = (class.value(&QFunc::constant(5, q(2))).unwrap(), class.value(&QFunc::constant(5, q(3))).unwrap());
    assert_eq!(mu(&class.ratio_mul(&two, &three).unwrap()), QFunc::constant(5, q(6)));
    assert_eq!(mu(&class.ratio_add(&p, &class.zero()).unwrap()), mu(&p));
}

#[test]
fn recovered_maps_match_direct_substitution() {
    let s = rational(5);
    let swap = SubstitutionMap::swap(&s, 0, 1).unwrap();
    let rec = recover_field_map(&swap, None, None).unwrap();
    assert_eq!(rec.apply(&el(&s, "t1")).unwrap(), el(&s, "t2"));

    let id = SubstitutionMap::identity(&s);
    let rec = recover_field_map(&id, None, None).unwrap();
    for src in ["t1", "t2*t3 + 1", "t1/(t4 - 2)"] {
        assert_eq!(rec.apply(&el(&s, src)).unwrap(), el(&s, src));
    }

    let shift = SubstitutionMap::affine(&s, 0, q(1), q(1)).unwrap();
    let rec = recover_field_map(&shift, None, None).unwrap();
    let img = rec.apply(&el(&s, "t1^2")).unwrap();
    for pt in points(5, 4) {
        let shifted = &pt[0] + Q::one();
        assert_eq!(func_at(&img, &pt).unwrap(), &shifted * &shifted);
    }

    // dependent points on the anchor t5
    let rec = recover_field_map(&swap, None, None).unwrap();
    let p = rec.dependent_point_recovery(&el(&s, "t5^2")).unwrap();
    assert!(oracle_same_point(&s, p.rep(), &el(&s, "t5")));
    let shift5 = SubstitutionMap::affine(&s, 4, q(1), q(1)).unwrap();
    let rec = recover_field_map(&shift5, None, None).unwrap();
    let p = rec.dependent_point_recovery(&el(&s, "1/(t5 + 1)")).unwrap();
    assert!(oracle_same_point(&s, p.rep(), &el(&s, "1/(t5 + 2)")));
    let rec = recover_field_map(&id, None, None).unwrap();
    let p = rec.dependent_point_recovery(&el(&s, "t5")).unwrap();
    assert!(oracle_same_point(&s, p.rep(), &el(&s, "t5")));
}

#[test]
fn existential_criterion_with_witness() {
    let s = ExtensionSpec::rational(2);
    let asg = Assignment::new();
    let psi = parse_sentence(&s, "(exists x (and (acl x (t1 t2)) (not (acl x (t1))) (not (acl x (t2)))))").unwrap();
    let nf = NormalForm::from_sentence(&s, &psi, &asg).unwrap();
    assert!(eval_exists(&s, &nf, None).unwrap());
    let mut w = Assignment::new();
    w.insert("x".into(), el(&s, "t1 + t2"));
    assert!(eval_qf(&s, &psi.body, &w).unwrap());
    assert!(!in_closure(&s, &el(&s, "t1 + t2"), &els(&s, &["t1"])));

    let contra = parse_sentence(&s, "(exists x (and (acl x (t1)) (not (acl x (t1)))))").unwrap();
    assert!(!eval_exists(&s, &NormalForm::from_sentence(&s, &contra, &asg).unwrap(), None).unwrap());

    let one = ExtensionSpec::rational(1);
    let psi = parse_sentence(&one, "(exists x (not (acl x ())))").unwrap();
    assert!(eval_exists(&one, &NormalForm::from_sentence(&one, &psi, &asg).unwrap(), None).unwrap());
}

#[test]
fn tower_harness_examples() {
    let low = ExtensionSpec::rational(1);
    let high = ExtensionSpec::rational(2);
    let tower = Tower::new(low, high).unwrap();
    let psi = parse_sentence(tower.lower(), "(exists x (not (acl x (t1))))").unwrap();
    let report = tower_harness(&tower, &[psi]).unwrap();
    assert!(!report.hypothesis);
    assert!(!report.rows[0].lower && report.rows[0].upper);

    let k = || ExtensionSpec::new(3, [0]).unwrap();
    let tower = Tower::with_embedding(k(), k(), vec![0, 2, 1]).unwrap();
    let suite: Vec<_> = [
        "(exists x (and (acl x (t2)) (not (acl x ()))))",
        "(exists x (and (acl x (t2 t3)) (not (acl x (t2))) (not (acl x (t3)))))",
        "(exists x (or (and (acl x ()) (not (acl x ()))) (= x t2)))",
    ]
    .iter()
    .map(|src| parse_sentence(tower.lower(), src).unwrap())
    .collect();
    let report = tower_harness(&tower, &suite).unwrap();
    assert!(report.hypothesis && report.all_agree());
    assert!(report.rows.iter().all(|r| r.lower));
}

#[test]
fn union_witness_avoids_each_flat() {
    let s = ExtensionSpec::rational(3);
    let flats: Vec<BTreeSet<usize>> = vec![[0].into(), [1].into(), [2].into()];
    let w = union_witness(&s, &flats).unwrap();
    assert_eq!(w, el(&s, "t1 + t2 + t3"));
    for v in 0..3 {
        assert_eq!(numeric_trdeg(&s, &[w.clone(), s.var(v)]), 2);
    }
    for flats in [vec![[0].into(), [1].into()], vec![[0, 1].into()]] {
        let w = union_witness(&s, &flats).unwrap();
        assert_eq!(w, s.var(2));
        assert_eq!(numeric_trdeg(&s, &[w, s.var(0), s.var(1)]), 3);
    }
}
