//! Seeded formula generation, the tower agreement harness and the
//! union-of-subfields witness.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{eval_exists, Assignment, Disjunct, Formula, NormalForm, Sentence, Term};
use crate::error::{Error, Result};
use crate::gen::{random_element, random_poly};
use crate::geometry::Tower;
use crate::pregeometry::{in_closure, ExtensionSpec};
use crate::{q, QFunc};

/// Bounds for generated normal forms.
#[derive(Clone, Copy, Debug)]
pub struct GenShape {
    pub max_disjuncts: usize,
    pub max_atoms: usize,
    /// Largest variable set behind a closure atom.
    pub max_flat: usize,
}

impl Default for GenShape {
    fn default() -> Self {
        GenShape {
            max_disjuncts: 3,
            max_atoms: 3,
            max_flat: 3,
        }
    }
}

/// Generators of `acl(V)` for a random variable set `V`, in triangular
/// form `t_v + p(earlier variables)`, sometimes padded with a base-field
/// element or a redundant product.
fn coordinate_generators(rng: &mut impl Rng, spec: &ExtensionSpec, max_flat: usize) -> Vec<QFunc> {
    let n = spec.nvars();
    let mut free = spec.free_vars();
    free.shuffle(rng);
    let size = rng.gen_range(0..=max_flat.min(free.len()));
    let vars = &free[..size];
    let mut gens = Vec::new();
    for (i, &v) in vars.iter().enumerate() {
        let mut g = spec.var(v);
        if i > 0 && rng.gen_bool(0.5) {
            g = &g + &QFunc::from_poly(random_poly(rng, n, &vars[..i], 2, 2));
        }
        gens.push(g);
    }
    let k: Vec<usize> = spec.k_vars().iter().copied().collect();
    if !k.is_empty() && rng.gen_bool(0.3) {
        gens.push(random_element(rng, n, &k, 2, 0.0));
    }
    if gens.len() >= 2 && rng.gen_bool(0.3) {
        let extra = &gens[0] * &gens[1];
        gens.push(extra);
    }
    gens.shuffle(rng);
    gens
}

fn random_value(rng: &mut impl Rng, spec: &ExtensionSpec) -> QFunc {
    let free = spec.free_vars();
    if free.is_empty() || rng.gen_bool(0.3) {
        return QFunc::constant(spec.nvars(), q(rng.gen_range(-2..=2)));
    }
    let mut vars = free.clone();
    vars.shuffle(rng);
    let take = rng.gen_range(1..=vars.len().min(2));
    random_element(rng, spec.nvars(), &vars[..take], 2, 0.2)
}

/// A random existential sentence in normal form whose closure atoms all
/// sit on coordinate flats.
pub fn random_normal_form(rng: &mut impl Rng, spec: &ExtensionSpec, shape: GenShape) -> NormalForm {
    let nd = rng.gen_range(1..=shape.max_disjuncts.max(1));
    let mut disjuncts = Vec::with_capacity(nd);
    for _ in 0..nd {
        let mut d = Disjunct::default();
        for _ in 0..rng.gen_range(1..=shape.max_atoms.max(1)) {
            match rng.gen_range(0..20) {
                0..=7 => d.pos.push(coordinate_generators(rng, spec, shape.max_flat)),
                8..=14 => d.neg.push(coordinate_generators(rng, spec, shape.max_flat)),
                15..=16 => d.eq.push(random_value(rng, spec)),
                _ => d.neq.push(random_value(rng, spec)),
            }
        }
        disjuncts.push(d);
    }
    NormalForm {
        var: "x".into(),
        disjuncts,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessRow {
    pub sentence: String,
    pub lower: bool,
    pub upper: bool,
}

impl HarnessRow {
    pub fn agrees(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessReport {
    /// Whether `tr deg_K L1 = tr deg_K L2`.
    pub hypothesis: bool,
    pub rows: Vec<HarnessRow>,
}

impl HarnessReport {
    pub fn agreements(&self) -> usize {
        self.rows.iter().filter(|r| r.agrees()).count()
    }

    pub fn all_agree(&self) -> bool {
        self.agreements() == self.rows.len()
    }
}

/// Evaluates each sentence over `L1` and, embedded, over `L2`.
pub fn tower_harness(tower: &Tower, suite: &[Sentence]) -> Result<HarnessReport> {
    let asg = Assignment::new();
    let mut rows = Vec::with_capacity(suite.len());
    for s in suite {
        let nf = NormalForm::from_sentence(tower.lower(), s, &asg)?;
        let lower = eval_exists(tower.lower(), &nf, None)?;
        let upper = eval_exists(tower.upper(), &nf.embed(tower)?, None)?;
        rows.push(HarnessRow {
            sentence: s.show(tower.lower()),
            lower,
            upper,
        });
    }
    Ok(HarnessReport {
        hypothesis: tower.equal_trdeg(),
        rows,
    })
}

/// Towers `Q(t1..tk) ⊂ Q(t1..tk+1)` with `∃x (x ∉ acl(t1..tk))`, which
/// fails below and holds above.
pub fn counterexample_family() -> Vec<(Tower, Sentence)> {
    (1..=3)
        .map(|k| {
            let tower = Tower::rational(k, k + 1, &[]).expect("valid tower");
            let over = (0..k).map(|v| Term::Elem(tower.lower().var(v))).collect();
            let psi = Sentence::exists(
                "x",
                Formula::not(Formula::acl(Term::Sym("x".into()), over)),
            );
            (tower, psi)
        })
        .collect()
}

fn check_proper(spec: &ExtensionSpec, flat: &BTreeSet<usize>) -> Result<()> {
    for &v in flat {
        if v >= spec.nvars() {
            return Err(Error::VarOutOfRange {
                index: v,
                nvars: spec.nvars(),
            });
        }
        if spec.k_vars().contains(&v) {
            return Err(Error::Unsupported(format!("{} lies in the base field", spec.labels()[v])));
        }
    }
    if spec.free_vars().iter().all(|v| flat.contains(v)) {
        return Err(Error::Precondition("flat contains every free variable".into()));
    }
    Ok(())
}

/// An element outside `acl(F)` for every listed proper coordinate flat.
pub fn union_witness(spec: &ExtensionSpec, flats: &[BTreeSet<usize>]) -> Result<QFunc> {
    for f in flats {
        check_proper(spec, f)?;
    }
    let free = spec.free_vars();
    if free.is_empty() {
        return Err(Error::Precondition("no free variables".into()));
    }
    let n = spec.nvars();
    let sum = |vars: &BTreeSet<usize>| {
        vars.iter().fold(QFunc::zero(n), |acc, &v| &acc + &spec.var(v))
    };
    let missing: BTreeSet<usize> = flats
        .iter()
        .map(|f| *free.iter().find(|v| !f.contains(v)).expect("proper flat"))
        .collect();
    let mut candidates = Vec::new();
    if let Some(&v) = free.iter().find(|v| flats.iter().all(|f| !f.contains(v))) {
        candidates.push(spec.var(v));
    }
    candidates.push(sum(&free.iter().copied().collect()));
    if !missing.is_empty() {
        candidates.push(sum(&missing));
    }
    let weighted = free
        .iter()
        .enumerate()
        .fold(QFunc::zero(n), |acc, (i, &v)| &acc + &spec.var(v).scale(&q(i as i64 + 1)));
    candidates.push(weighted);
    for c in candidates {
        let outside = flats.iter().all(|f| {
            let gens: Vec<QFunc> = f.iter().map(|&v| spec.var(v)).collect();
            !in_closure(spec, &c, &gens)
        });
        if outside {
            return Ok(c);
        }
    }
    Err(Error::Internal("no element avoids the given proper flats".into()))
}

/// `count` random proper subsets of the free variables.
pub fn random_proper_flats(rng: &mut impl Rng, spec: &ExtensionSpec, count: usize) -> Vec<BTreeSet<usize>> {
    let free = spec.free_vars();
    (0..count)
        .map(|_| {
            let mut vars = free.clone();
            vars.shuffle(rng);
            let size = rng.gen_range(0..free.len().max(1));
            vars[..size.min(free.len().saturating_sub(1))].iter().copied().collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::seeded;
    use crate::logic::{default_pool, eval_exists_by_search};

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn witnesses() {
        let s = ExtensionSpec::rational(3);
        let w = union_witness(&s, &[set(&[0]), set(&[1])]).unwrap();
        assert_eq!(w, s.var(2));
        assert_eq!(union_witness(&s, &[set(&[0, 1])]).unwrap(), s.var(2));
        let w = union_witness(&s, &[set(&[0]), set(&[1]), set(&[2])]).unwrap();
        assert_eq!(w, s.parse("t1 + t2 + t3").unwrap());
        for v in 0..3 {
            assert!(!in_closure(&s, &w, &[s.var(v)]));
        }
        assert!(union_witness(&s, &[set(&[0, 1, 2])]).is_err());
        assert!(union_witness(&s, &[]).is_ok());
    }

    #[test]
    fn counterexamples_disagree() {
        for (tower, psi) in counterexample_family() {
            let report = tower_harness(&tower, &[psi]).unwrap();
            assert!(!report.hypothesis);
            assert!(!report.rows[0].lower);
            assert!(report.rows[0].upper);
        }
    }

    #[test]
    fn relabeled_tower_agrees() {
        let lower = ExtensionSpec::new(3, [0]).unwrap();
        let upper = ExtensionSpec::new(3, [0]).unwrap();
        let tower = Tower::with_embedding(lower, upper, vec![0, 2, 1]).unwrap();
        let mut rng = seeded(7);
        let suite: Vec<Sentence> = (0..40)
            .map(|_| random_normal_form(&mut rng, tower.lower(), GenShape::default()).to_sentence())
            .collect();
        let report = tower_harness(&tower, &suite).unwrap();
        assert!(report.hypothesis);
        assert!(report.all_agree());
    }

    #[test]
    fn criterion_matches_search() {
        let s = ExtensionSpec::new(4, [0]).unwrap();
        let pool = default_pool(&s);
        let mut rng = seeded(11);
        for _ in 0..40 {
            let nf = random_normal_form(&mut rng, &s, GenShape::default());
            let fast = eval_exists(&s, &nf, None).unwrap();
            let slow = eval_exists_by_search(&s, &nf.to_sentence(), &Assignment::new(), &pool).unwrap();
            assert_eq!(fast, slow, "{}", nf.to_sentence().show(&s));
        }
    }
}
