//! Seeded generators for random field elements and coefficient vectors.
//!
//! Every random draw in the crate goes through an explicitly passed
//! [`Rng`](rand::Rng); nothing here owns entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Monomial;
use crate::{q, qr, QFunc, QPoly, Q};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-family.
pub fn fork(seed: u64, stream: &str) -> SeededRng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn small_int(rng: &mut impl Rng, bound: i64) -> i64 {
    rng.gen_range(-bound..=bound)
}

pub fn nonzero_int(rng: &mut impl Rng, bound: i64) -> i64 {
    loop {
        let v = small_int(rng, bound);
        if v != 0 {
            return v;
        }
    }
}

pub fn small_rational(rng: &mut impl Rng, bound: i64) -> Q {
    let num = small_int(rng, bound);
    let den = rng.gen_range(1..=bound.max(1));
    qr(num, den)
}

pub fn nonzero_rational(rng: &mut impl Rng, bound: i64) -> Q {
    let num = nonzero_int(rng, bound);
    let den = rng.gen_range(1..=bound.max(1));
    qr(num, den)
}

/// Random polynomial in the listed variables with total degree at most
/// `max_deg` and at most `max_terms` terms; never zero.
pub fn random_poly(
    rng: &mut impl Rng,
    nvars: usize,
    vars: &[usize],
    max_deg: u32,
    max_terms: usize,
) -> QPoly {
    loop {
        let mut p = QPoly::zero(nvars);
        let terms = rng.gen_range(1..=max_terms.max(1));
        for _ in 0..terms {
            let mut e = vec![0u32; nvars];
            let deg = rng.gen_range(0..=max_deg);
            for _ in 0..deg {
                if let Some(&v) = vars.choose(rng) {
                    e[v] += 1;
                }
            }
            let c = q(nonzero_int(rng, 4));
            p = p + QPoly::term(Monomial::from_exponents(e), c);
        }
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random non-constant polynomial in the listed variables.
pub fn random_nonconstant_poly(
    rng: &mut impl Rng,
    nvars: usize,
    vars: &[usize],
    max_deg: u32,
    max_terms: usize,
) -> QPoly {
    loop {
        let p = random_poly(rng, nvars, vars, max_deg.max(1), max_terms);
        if !p.is_constant() {
            return p;
        }
    }
}

/// Random element of `Q(vars)`: a polynomial, or with probability
/// `frac_prob` a quotient of two polynomials. Never constant.
pub fn random_element(
    rng: &mut impl Rng,
    nvars: usize,
    vars: &[usize],
    max_deg: u32,
    frac_prob: f64,
) -> QFunc {
    loop {
        let num = random_nonconstant_poly(rng, nvars, vars, max_deg, 3);
        let f = if rng.gen_bool(frac_prob) {
            let den = random_poly(rng, nvars, vars, max_deg.min(2), 2);
            QFunc::new(num, den).expect("nonzero denominator")
        } else {
            QFunc::from_poly(num)
        };
        if !f.is_constant() {
            return f;
        }
    }
}

/// Random linear form `sum c_i * t_i` over the listed variables with
/// integer coefficients in `[-bound, bound]`, not identically zero.
pub fn random_linear_form(rng: &mut impl Rng, nvars: usize, vars: &[usize], bound: i64) -> QFunc {
    loop {
        let mut p = QPoly::zero(nvars);
        for &v in vars {
            let c = small_int(rng, bound);
            p = p + QPoly::var(nvars, v).scale(&q(c));
        }
        if !p.is_zero() {
            return QFunc::from_poly(p);
        }
    }
}

/// Random integer triple with entries in `[-bound, bound]`, not all zero.
pub fn int_triple(rng: &mut impl Rng, bound: i64) -> [i64; 3] {
    loop {
        let t = [
            small_int(rng, bound),
            small_int(rng, bound),
            small_int(rng, bound),
        ];
        if t != [0, 0, 0] {
            return t;
        }
    }
}
