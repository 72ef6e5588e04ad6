//! One-quantifier formulas in the language `{acl_n}` where
//! `acl_n(a0, a1..an)` holds iff `a0 ∈ acl_K(a1..an)`.
//!
//! Existential sentences are accepted in the normal form
//!
//! ```text
//! ∃x  OR_k ( x ∈ ∩_i acl(A_ki) \ ∪_j acl(B_kj)  ∧  (in)equalities x = c, x ≠ c )
//! ```
//!
//! and decided exactly when every `A_ki`, `B_kj` spans a coordinate flat.
//! Other parameter sets fall back to search over a supplied witness pool.

mod harness;
mod sexpr;

use std::collections::{BTreeMap, BTreeSet};

pub use harness::{
    counterexample_family, union_witness, random_normal_form, random_proper_flats, tower_harness,
    GenShape, HarnessReport, HarnessRow,
};
pub use sexpr::parse_sentence;

use crate::error::{Error, Result};
use crate::geometry::{as_coordinate_flat, Tower};
use crate::pregeometry::{in_closure, ExtensionSpec};
use crate::{q, QFunc};

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Sym(String),
    Elem(QFunc),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Acl { elem: Term, over: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// A formula, existentially quantified over `var` when present.
#[derive(Clone, Debug, PartialEq)]
pub struct Sentence {
    pub var: Option<String>,
    pub body: Formula,
}

pub type Assignment = BTreeMap<String, QFunc>;

impl Term {
    fn resolve(&self, spec: &ExtensionSpec, asg: &Assignment) -> Result<QFunc> {
        match self {
            Term::Sym(s) => asg.get(s).cloned().ok_or_else(|| Error::Unassigned(s.clone())),
            Term::Elem(e) => {
                spec.check(e)?;
                Ok(e.clone())
            }
        }
    }

    fn mentions(&self, sym: &str) -> bool {
        matches!(self, Term::Sym(s) if s == sym)
    }

    fn map_elems(&self, f: &impl Fn(&QFunc) -> Result<QFunc>) -> Result<Term> {
        Ok(match self {
            Term::Sym(s) => Term::Sym(s.clone()),
            Term::Elem(e) => Term::Elem(f(e)?),
        })
    }
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn acl(elem: Term, over: Vec<Term>) -> Formula {
        Formula::Acl { elem, over }
    }

    pub fn mentions(&self, sym: &str) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Acl { elem, over } => elem.mentions(sym) || over.iter().any(|t| t.mentions(sym)),
            Formula::Eq(a, b) => a.mentions(sym) || b.mentions(sym),
            Formula::Not(f) => f.mentions(sym),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.mentions(sym)),
        }
    }

    fn collect_elems(&self, out: &mut Vec<QFunc>) {
        let mut term = |t: &Term| {
            if let Term::Elem(e) = t {
                out.push(e.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Acl { elem, over } => {
                term(elem);
                over.iter().for_each(term);
            }
            Formula::Eq(a, b) => {
                term(a);
                term(b);
            }
            Formula::Not(g) => g.collect_elems(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| g.collect_elems(out)),
        }
    }

    fn map_elems(&self, f: &impl Fn(&QFunc) -> Result<QFunc>) -> Result<Formula> {
        let all = |fs: &[Formula]| fs.iter().map(|g| g.map_elems(f)).collect::<Result<Vec<_>>>();
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Acl { elem, over } => Formula::Acl {
                elem: elem.map_elems(f)?,
                over: over.iter().map(|t| t.map_elems(f)).collect::<Result<_>>()?,
            },
            Formula::Eq(a, b) => Formula::Eq(a.map_elems(f)?, b.map_elems(f)?),
            Formula::Not(g) => Formula::not(g.map_elems(f)?),
            Formula::And(fs) => Formula::And(all(fs)?),
            Formula::Or(fs) => Formula::Or(all(fs)?),
        })
    }
}

impl Sentence {
    pub fn exists(var: &str, body: Formula) -> Sentence {
        Sentence {
            var: Some(var.to_string()),
            body,
        }
    }

    /// The same sentence with every literal element pushed up the tower.
    pub fn embed(&self, tower: &Tower) -> Result<Sentence> {
        Ok(Sentence {
            var: self.var.clone(),
            body: self.body.map_elems(&|e| tower.embed(e))?,
        })
    }
}

/// Truth value of a quantifier-free formula under `asg`.
pub fn eval_qf(spec: &ExtensionSpec, f: &Formula, asg: &Assignment) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Acl { elem, over } => {
            let y = elem.resolve(spec, asg)?;
            let xs = over.iter().map(|t| t.resolve(spec, asg)).collect::<Result<Vec<_>>>()?;
            in_closure(spec, &y, &xs)
        }
        Formula::Eq(a, b) => a.resolve(spec, asg)? == b.resolve(spec, asg)?,
        Formula::Not(g) => !eval_qf(spec, g, asg)?,
        Formula::And(fs) => {
            for g in fs {
                if !eval_qf(spec, g, asg)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_qf(spec, g, asg)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// One disjunct of the normal form, with parameters already resolved.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Disjunct {
    /// `x ∈ acl(A)` for each `A`.
    pub pos: Vec<Vec<QFunc>>,
    /// `x ∉ acl(B)` for each `B`.
    pub neg: Vec<Vec<QFunc>>,
    pub eq: Vec<QFunc>,
    pub neq: Vec<QFunc>,
    /// Conjuncts not mentioning `x`.
    pub side: Vec<Formula>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub var: String,
    pub disjuncts: Vec<Disjunct>,
}

impl Disjunct {
    pub fn atom_count(&self) -> usize {
        self.pos.len() + self.neg.len() + self.eq.len() + self.neq.len() + self.side.len()
    }

    fn holds_at(&self, spec: &ExtensionSpec, x: &QFunc) -> Result<bool> {
        for f in &self.side {
            if !eval_qf(spec, f, &Assignment::new())? {
                return Ok(false);
            }
        }
        Ok(self.eq.iter().all(|c| c == x)
            && self.neq.iter().all(|c| c != x)
            && self.pos.iter().all(|a| in_closure(spec, x, a))
            && self.neg.iter().all(|b| !in_closure(spec, x, b)))
    }

    fn to_formula(&self, var: &str) -> Formula {
        let x = || Term::Sym(var.to_string());
        let elems = |s: &[QFunc]| s.iter().cloned().map(Term::Elem).collect();
        let mut parts = Vec::new();
        parts.extend(self.pos.iter().map(|a| Formula::acl(x(), elems(a))));
        parts.extend(self.neg.iter().map(|b| Formula::not(Formula::acl(x(), elems(b)))));
        parts.extend(self.eq.iter().map(|c| Formula::Eq(x(), Term::Elem(c.clone()))));
        parts.extend(self.neq.iter().map(|c| Formula::not(Formula::Eq(x(), Term::Elem(c.clone())))));
        parts.extend(self.side.iter().cloned());
        Formula::And(parts)
    }

    fn map_elems(&self, f: &impl Fn(&QFunc) -> Result<QFunc>) -> Result<Disjunct> {
        let sets = |ss: &[Vec<QFunc>]| {
            ss.iter()
                .map(|s| s.iter().map(f).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        };
        let list = |s: &[QFunc]| s.iter().map(f).collect::<Result<Vec<_>>>();
        Ok(Disjunct {
            pos: sets(&self.pos)?,
            neg: sets(&self.neg)?,
            eq: list(&self.eq)?,
            neq: list(&self.neq)?,
            side: self.side.iter().map(|g| g.map_elems(f)).collect::<Result<_>>()?,
        })
    }
}

impl NormalForm {
    pub fn to_sentence(&self) -> Sentence {
        let ds = self.disjuncts.iter().map(|d| d.to_formula(&self.var)).collect();
        Sentence::exists(&self.var, Formula::Or(ds))
    }

    pub fn embed(&self, tower: &Tower) -> Result<NormalForm> {
        Ok(NormalForm {
            var: self.var.clone(),
            disjuncts: self
                .disjuncts
                .iter()
                .map(|d| d.map_elems(&|e| tower.embed(e)))
                .collect::<Result<_>>()?,
        })
    }

    /// Reads an existential sentence already in normal form: a disjunction
    /// of conjunctions of literals `acl(x; A)`, `¬acl(x; B)`, `x = c`,
    /// `x ≠ c` and closed formulas. Parameters resolve through `asg`.
    pub fn from_sentence(spec: &ExtensionSpec, s: &Sentence, asg: &Assignment) -> Result<NormalForm> {
        let var = s
            .var
            .clone()
            .ok_or_else(|| Error::Unsupported("sentence has no quantifier".into()))?;
        if asg.contains_key(&var) {
            return Err(Error::Unsupported(format!("bound variable `{var}` is also a parameter")));
        }
        let disjuncts = match &s.body {
            Formula::Or(fs) => fs.clone(),
            f => vec![f.clone()],
        };
        let mut out = Vec::new();
        for d in &disjuncts {
            let lits = match d {
                Formula::And(fs) => fs.clone(),
                f => vec![f.clone()],
            };
            let mut dj = Disjunct::default();
            let mut dead = false;
            for lit in &lits {
                dead |= read_literal(spec, &var, lit, asg, &mut dj)?;
            }
            if !dead {
                out.push(dj);
            }
        }
        Ok(NormalForm { var, disjuncts: out })
    }
}

/// Adds `lit` to `dj`; returns true when the literal is `false`.
fn read_literal(spec: &ExtensionSpec, var: &str, lit: &Formula, asg: &Assignment, dj: &mut Disjunct) -> Result<bool> {
    let unsupported = || Error::Unsupported("formula is not in the one-quantifier normal form".into());
    let params = |ts: &[Term]| -> Result<Vec<QFunc>> {
        if ts.iter().any(|t| t.mentions(var)) {
            return Err(unsupported());
        }
        ts.iter().map(|t| t.resolve(spec, asg)).collect()
    };
    let other_side = |a: &Term, b: &Term| -> Result<QFunc> {
        match (a.mentions(var), b.mentions(var)) {
            (true, false) => b.resolve(spec, asg),
            (false, true) => a.resolve(spec, asg),
            _ => Err(unsupported()),
        }
    };
    if !lit.mentions(var) {
        if *lit == Formula::False {
            return Ok(true);
        }
        if *lit != Formula::True {
            dj.side.push(substitute_params(lit, spec, asg)?);
        }
        return Ok(false);
    }
    match lit {
        Formula::Acl { elem, over } if elem.mentions(var) => dj.pos.push(params(over)?),
        Formula::Eq(a, b) => dj.eq.push(other_side(a, b)?),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Acl { elem, over } if elem.mentions(var) => dj.neg.push(params(over)?),
            Formula::Eq(a, b) => dj.neq.push(other_side(a, b)?),
            _ => return Err(unsupported()),
        },
        _ => return Err(unsupported()),
    }
    Ok(false)
}

fn substitute_params(f: &Formula, spec: &ExtensionSpec, asg: &Assignment) -> Result<Formula> {
    let sub = |t: &Term| t.resolve(spec, asg).map(Term::Elem);
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Acl { elem, over } => Formula::Acl {
            elem: sub(elem)?,
            over: over.iter().map(sub).collect::<Result<_>>()?,
        },
        Formula::Eq(a, b) => Formula::Eq(sub(a)?, sub(b)?),
        Formula::Not(g) => Formula::not(substitute_params(g, spec, asg)?),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| substitute_params(g, spec, asg)).collect::<Result<_>>()?),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| substitute_params(g, spec, asg)).collect::<Result<_>>()?),
    })
}

/// Decides `∃x φ`. Coordinate-flat disjuncts use the intersection
/// criterion; others need `pool`, which is searched explicitly.
pub fn eval_exists(spec: &ExtensionSpec, nf: &NormalForm, pool: Option<&[QFunc]>) -> Result<bool> {
    for d in &nf.disjuncts {
        if disjunct_satisfiable(spec, d, pool)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn disjunct_satisfiable(spec: &ExtensionSpec, d: &Disjunct, pool: Option<&[QFunc]>) -> Result<bool> {
    if let Some(c) = d.eq.first() {
        return d.holds_at(spec, c);
    }
    for f in &d.side {
        if !eval_qf(spec, f, &Assignment::new())? {
            return Ok(false);
        }
    }
    let coord = |sets: &[Vec<QFunc>]| -> Option<Vec<BTreeSet<usize>>> {
        sets.iter().map(|s| as_coordinate_flat(spec, s)).collect()
    };
    if let (Some(pos), Some(neg)) = (coord(&d.pos), coord(&d.neg)) {
        // The candidates form acl(C) minus finitely many proper subfields
        // acl(C ∩ B_j); such a set is empty or infinite, so the finitely
        // many inequalities never matter.
        let mut c: BTreeSet<usize> = spec.free_vars().into_iter().collect();
        for a in &pos {
            c = c.intersection(a).copied().collect();
        }
        return Ok(neg.iter().all(|b| !c.is_subset(b)));
    }
    match pool {
        Some(pool) => {
            for x in pool {
                if d.holds_at(spec, x)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        None => Err(Error::Unsupported(
            "closure atoms outside coordinate flats need a witness pool".into(),
        )),
    }
}

/// `∃x φ` by explicit search over `pool` together with every element and
/// parameter the sentence mentions, evaluating the body directly.
pub fn eval_exists_by_search(spec: &ExtensionSpec, s: &Sentence, asg: &Assignment, pool: &[QFunc]) -> Result<bool> {
    let Some(var) = &s.var else {
        return eval_qf(spec, &s.body, asg);
    };
    let mut candidates = pool.to_vec();
    s.body.collect_elems(&mut candidates);
    candidates.extend(asg.values().cloned());
    let mut local = asg.clone();
    for x in &candidates {
        local.insert(var.clone(), x.clone());
        if eval_qf(spec, &s.body, &local)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Evaluates a sentence: quantifier-free directly, existential through the
/// normal form.
pub fn eval_sentence(spec: &ExtensionSpec, s: &Sentence, asg: &Assignment, pool: Option<&[QFunc]>) -> Result<bool> {
    match s.var {
        None => eval_qf(spec, &s.body, asg),
        Some(_) => eval_exists(spec, &NormalForm::from_sentence(spec, s, asg)?, pool),
    }
}

/// The constants `0, ±1` and every combination `±t_i ± t_j ± t_k` of at
/// most three free variables, each with those constant offsets.
pub fn default_pool(spec: &ExtensionSpec) -> Vec<QFunc> {
    let n = spec.nvars();
    let free = spec.free_vars();
    let mut forms = vec![QFunc::zero(n)];
    for &v in &free {
        let prev = forms.clone();
        for f in prev {
            if f.support().len() >= 3 {
                continue;
            }
            forms.push(&f + &spec.var(v));
            forms.push(&f - &spec.var(v));
        }
    }
    let mut out = Vec::new();
    for f in &forms {
        for c in [0, 1, -1] {
            out.push(f + &QFunc::constant(n, q(c)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn e(s: &ExtensionSpec, src: &str) -> QFunc {
        s.parse(src).unwrap()
    }

    fn sym(s: &str) -> Term {
        Term::Sym(s.into())
    }

    #[test]
    fn quantifier_free() {
        let s = ExtensionSpec::rational(3);
        let el = |src: &str| Term::Elem(e(&s, src));
        let asg = Assignment::new();
        let f = Formula::acl(el("t1 + t2"), vec![el("t1"), el("t2")]);
        assert!(eval_qf(&s, &f, &asg).unwrap());
        let f = Formula::acl(el("t2"), vec![el("t1")]);
        assert!(!eval_qf(&s, &f, &asg).unwrap());

        let f = Formula::And(vec![
            Formula::acl(sym("x"), vec![el("t1"), el("t2")]),
            Formula::not(Formula::Eq(sym("x"), el("t1"))),
        ]);
        let mut asg = Assignment::new();
        asg.insert("x".into(), e(&s, "t1*t2"));
        assert!(eval_qf(&s, &f, &asg).unwrap());
        assert_eq!(
            eval_qf(&s, &f, &Assignment::new()),
            Err(Error::Unassigned("x".into()))
        );
    }

    #[test]
    fn existential_examples() {
        let s = ExtensionSpec::rational(3);
        let el = |src: &str| Term::Elem(e(&s, src));
        let a12 = Formula::acl(sym("x"), vec![el("t1"), el("t2")]);
        let not1 = Formula::not(Formula::acl(sym("x"), vec![el("t1")]));
        let not2 = Formula::not(Formula::acl(sym("x"), vec![el("t2")]));
        let psi = Sentence::exists("x", Formula::And(vec![a12, not1.clone(), not2]));
        let asg = Assignment::new();
        assert!(eval_sentence(&s, &psi, &asg, None).unwrap());
        assert!(eval_exists_by_search(&s, &psi, &asg, &[e(&s, "t1 + t2")]).unwrap());

        let contra = Sentence::exists(
            "x",
            Formula::And(vec![Formula::acl(sym("x"), vec![el("t1")]), not1]),
        );
        assert!(!eval_sentence(&s, &contra, &asg, None).unwrap());

        let one = ExtensionSpec::rational(1);
        let psi = Sentence::exists("x", Formula::not(Formula::acl(sym("x"), vec![])));
        assert!(eval_sentence(&one, &psi, &asg, None).unwrap());
    }

    #[test]
    fn base_field_and_equalities() {
        let s = ExtensionSpec::new(3, [0]).unwrap();
        let el = |src: &str| Term::Elem(e(&s, src));
        let asg = Assignment::new();
        // acl(t1) = acl(∅) when t1 generates the base field.
        let psi = Sentence::exists(
            "x",
            Formula::And(vec![
                Formula::acl(sym("x"), vec![el("t1")]),
                Formula::not(Formula::acl(sym("x"), vec![])),
            ]),
        );
        assert!(!eval_sentence(&s, &psi, &asg, None).unwrap());
        let psi = Sentence::exists(
            "x",
            Formula::And(vec![
                Formula::Eq(sym("x"), el("t2*t3")),
                Formula::not(Formula::acl(sym("x"), vec![el("t2")])),
            ]),
        );
        assert!(eval_sentence(&s, &psi, &asg, None).unwrap());
        let psi = Sentence::exists(
            "x",
            Formula::And(vec![
                Formula::Eq(sym("x"), el("t2^2")),
                Formula::not(Formula::acl(sym("x"), vec![el("t2")])),
            ]),
        );
        assert!(!eval_sentence(&s, &psi, &asg, None).unwrap());
    }

    #[test]
    fn non_coordinate_needs_pool() {
        let s = ExtensionSpec::rational(3);
        let el = |src: &str| Term::Elem(e(&s, src));
        let psi = Sentence::exists(
            "x",
            Formula::And(vec![
                Formula::acl(sym("x"), vec![el("t1 + t2")]),
                Formula::not(Formula::acl(sym("x"), vec![])),
            ]),
        );
        let asg = Assignment::new();
        assert!(matches!(eval_sentence(&s, &psi, &asg, None), Err(Error::Unsupported(_))));
        let pool = default_pool(&s);
        assert!(eval_sentence(&s, &psi, &asg, Some(&pool)).unwrap());
    }

    #[test]
    fn parameters_and_shapes() {
        let s = ExtensionSpec::rational(2);
        let mut asg = Assignment::new();
        asg.insert("c".into(), e(&s, "t1"));
        let psi = Sentence::exists("x", Formula::not(Formula::acl(sym("x"), vec![sym("c")])));
        assert!(eval_sentence(&s, &psi, &asg, None).unwrap());
        let bad = Sentence::exists("x", Formula::acl(sym("c"), vec![sym("x")]));
        assert!(matches!(
            NormalForm::from_sentence(&s, &bad, &asg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn pool_shape() {
        let s = ExtensionSpec::rational(3);
        // 27 sign patterns on three variables, times three offsets.
        assert_eq!(default_pool(&s).len(), 81);
        let s = Arc::new(ExtensionSpec::new(4, [0]).unwrap());
        assert!(default_pool(&s).iter().all(|f| !f.support().contains(&0)));
    }
}
