//! Exact arithmetic: sparse multivariate polynomials, reduced rational
//! functions, and polynomial matrices, all generic over an exact
//! coefficient [`Field`].

pub mod field;
pub mod gcd;
pub mod matrix;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod ratfunc;

pub use field::Field;
pub use matrix::{matrix_rank_ff, scalar_rank, FFMatrix};
pub use monomial::Monomial;
pub use parse::{default_labels, parse_poly, parse_ratfunc, parse_with_labels};
pub use poly::{poly_ops, MPoly, PolyOp};
pub use ratfunc::RatFunc;

use crate::error::Result;

/// Checked constructor: reduced, normalized `num / den`.
pub fn ratfunc_normalize<C: Field>(num: MPoly<C>, den: MPoly<C>) -> Result<RatFunc<C>> {
    RatFunc::new(num, den)
}

/// Partial derivative with respect to the 0-based variable `var`.
pub fn partial_derivative<C: Field>(f: &RatFunc<C>, var: usize) -> Result<RatFunc<C>> {
    f.derivative(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::{q, QFunc, QPoly};
    use num_rational::Rational64;

    fn p(s: &str) -> QPoly {
        parse_poly(s, 3).unwrap()
    }

    fn f(s: &str) -> QFunc {
        parse_ratfunc(s, 3).unwrap()
    }

    #[test]
    fn poly_ops_examples() {
        assert_eq!(
            poly_ops(&p("t1 + t2"), &p("t1 - t2"), PolyOp::Mul).unwrap(),
            p("t1^2 - t2^2")
        );
        assert_eq!(
            poly_ops(&p("t1^2 - t2^2"), &p("t1 - t2"), PolyOp::Gcd).unwrap(),
            p("t1 - t2")
        );
        assert_eq!(p("t1*t2 + 1").eval(&[q(2), q(3), q(0)]).unwrap(), q(7));
    }

    #[test]
    fn poly_ops_rejects_mismatched_rings() {
        let a = parse_poly("t1", 1).unwrap();
        let b = parse_poly("t1", 2).unwrap();
        assert_eq!(poly_ops(&a, &b, PolyOp::Add), Err(Error::NvarsMismatch(1, 2)));
        assert!(a.eval(&[q(1), q(2)]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let r = ratfunc_normalize(p("t1^2 - 1"), p("t1 - 1")).unwrap();
        assert_eq!(r, f("t1 + 1"));
        assert!(r.is_polynomial());

        let r = ratfunc_normalize(p("2*t1"), p("4")).unwrap();
        assert_eq!(r.num(), &p("1/2*t1"));
        assert!(r.den().is_one());

        let r = ratfunc_normalize(p("0"), p("t2")).unwrap();
        assert!(r.is_zero());
        assert!(r.den().is_one());

        assert_eq!(
            ratfunc_normalize(p("t1"), p("0")),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn normalized_denominator_is_monic() {
        let r = ratfunc_normalize(p("t1"), p("-3*t2 + 6")).unwrap();
        assert_eq!(r.den().leading_coeff(), q(1));
        assert_eq!(r, f("-1/3*t1/(t2 - 2)"));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(partial_derivative(&f("t1^2*t2"), 0).unwrap(), f("2*t1*t2"));
        assert_eq!(partial_derivative(&f("t1/t2"), 1).unwrap(), f("-t1/t2^2"));
        assert!(partial_derivative(&f("t3"), 0).unwrap().is_zero());
        assert_eq!(
            partial_derivative(&f("t1"), 3),
            Err(Error::VarOutOfRange { index: 3, nvars: 3 })
        );
    }

    #[test]
    fn substitution() {
        let g = f("t1^2/(t2 + 1)");
        let images = [f("t2"), f("t1 - 1"), f("t3")];
        assert_eq!(g.substitute(&images).unwrap(), f("t2^2/t1"));
    }

    #[test]
    fn generic_over_small_rationals() {
        type P = MPoly<Rational64>;
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let a = &(&x + &y) * &(&x - &y);
        let b = &x - &y;
        assert_eq!(a.gcd(&b), b);
        let r = RatFunc::new(a, b).unwrap();
        assert_eq!(r, RatFunc::from_poly(&x + &y));
    }
}
