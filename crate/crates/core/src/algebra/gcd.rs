//! Multivariate gcd over a field by recursion on the highest variable:
//! content extraction, then a subresultant remainder sequence on the
//! primitive parts.

use super::field::Field;
use super::poly::MPoly;

/// Monic gcd. `gcd(0, 0) = 0`.
pub fn gcd<C: Field>(p: &MPoly<C>, q: &MPoly<C>) -> MPoly<C> {
    let n = p.nvars();
    if p.is_zero() {
        return q.monic();
    }
    if q.is_zero() {
        return p.monic();
    }
    if p.is_constant() || q.is_constant() {
        return MPoly::one(n);
    }
    if p == q {
        return p.monic();
    }
    let Some(var) = (0..n)
        .rev()
        .find(|&v| p.degree_in(v) > 0 || q.degree_in(v) > 0)
    else {
        return MPoly::one(n);
    };

    // One side is free of the top variable: the gcd divides every
    // coefficient of the other side.
    if p.degree_in(var) == 0 {
        return gcd_with_coeffs(p, q, var);
    }
    if q.degree_in(var) == 0 {
        return gcd_with_coeffs(q, p, var);
    }

    let cp = content(p, var);
    let cq = content(q, var);
    let pp = p.div_exact(&cp).expect("content divides");
    let qq = q.div_exact(&cq).expect("content divides");
    let c = gcd(&cp, &cq);
    let g = primitive_gcd(&pp, &qq, var);
    (&c * &g).monic()
}

fn gcd_with_coeffs<C: Field>(free: &MPoly<C>, other: &MPoly<C>, var: usize) -> MPoly<C> {
    let mut g = free.monic();
    for c in other.coeffs_in(var) {
        if g.is_one() {
            break;
        }
        if !c.is_zero() {
            g = gcd(&g, &c);
        }
    }
    g
}

/// Gcd of the coefficients of `p` with respect to `var`.
pub fn content<C: Field>(p: &MPoly<C>, var: usize) -> MPoly<C> {
    let mut g = MPoly::zero(p.nvars());
    for c in p.coeffs_in(var) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

pub fn primitive_part<C: Field>(p: &MPoly<C>, var: usize) -> MPoly<C> {
    if p.is_zero() {
        return p.clone();
    }
    let c = content(p, var);
    p.div_exact(&c).expect("content divides")
}

type Upoly<C> = Vec<MPoly<C>>;

fn trim<C: Field>(a: &mut Upoly<C>) {
    while a.len() > 1 && a.last().is_some_and(MPoly::is_zero) {
        a.pop();
    }
}

fn is_zero_u<C: Field>(a: &Upoly<C>) -> bool {
    a.iter().all(MPoly::is_zero)
}

fn deg<C: Field>(a: &Upoly<C>) -> usize {
    a.len() - 1
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
fn prem<C: Field>(a: &Upoly<C>, b: &Upoly<C>) -> Upoly<C> {
    let n = b[0].nvars();
    let db = deg(b);
    let lb = b[db].clone();
    let mut r = a.clone();
    let mut steps = 0usize;
    let total = deg(a) + 1 - db;
    while !is_zero_u(&r) && deg(&r) >= db {
        let dr = deg(&r);
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = &*c * &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            let t = bc * &lr;
            r[i + shift] = &r[i + shift] - &t;
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        if r.is_empty() {
            r.push(MPoly::zero(n));
        }
        trim(&mut r);
        steps += 1;
    }
    if steps < total {
        let f = lb.pow((total - steps) as u32);
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

fn primitive_gcd<C: Field>(p: &MPoly<C>, q: &MPoly<C>, var: usize) -> MPoly<C> {
    let n = p.nvars();
    let (mut a, mut b) = (p.coeffs_in(var), q.coeffs_in(var));
    if deg(&a) < deg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = MPoly::one(n);
    let mut h = MPoly::one(n);
    loop {
        let d = deg(&a) - deg(&b);
        let r = prem(&a, &b);
        if is_zero_u(&r) {
            break;
        }
        if deg(&r) == 0 {
            return MPoly::one(n);
        }
        let divisor = &g * &h.pow(d as u32);
        a = b;
        b = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        g = a[deg(&a)].clone();
        h = match d {
            0 => h,
            1 => g.clone(),
            _ => g
                .pow(d as u32)
                .div_exact(&h.pow(d as u32 - 1))
                .expect("subresultant division is exact"),
        };
    }
    primitive_part(&MPoly::from_coeffs_in(n, var, &b), var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly;
    use crate::QPoly;

    fn p(s: &str) -> QPoly {
        parse_poly(s, 3).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(gcd(&p("t1^2 - t2^2"), &p("t1 - t2")), p("t1 - t2"));
    }

    #[test]
    fn coprime() {
        assert!(gcd(&p("t1^2 + 1"), &p("t1 + t2")).is_one());
        assert!(gcd(&p("t1*t2 + 1"), &p("t1*t2 - 1")).is_one());
    }

    #[test]
    fn shared_multivariate_factor() {
        let f = p("t1*t2 + t3^2 - 1");
        let a = &f * &p("t1 - t3 + 2");
        let b = &f * &p("t2^2 + t1*t3");
        assert_eq!(gcd(&a, &b), f.monic());
    }

    #[test]
    fn content_only() {
        let a = p("t1*t3 + t2*t3");
        let b = p("t1^2*t3 - t2^2*t3 + t1 + t2");
        assert_eq!(gcd(&a, &b), p("t1 + t2"));
    }

    #[test]
    fn repeated_factor() {
        let f = p("t1 + t2 + 1");
        let a = f.pow(3);
        let b = &f.pow(2) * &p("t3");
        assert_eq!(gcd(&a, &b), f.pow(2).monic());
    }

    #[test]
    fn zero_cases() {
        assert_eq!(gcd(&p("0"), &p("2*t1")), p("t1"));
        assert!(gcd(&p("0"), &p("0")).is_zero());
    }
}
