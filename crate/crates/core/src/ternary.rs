//! Sparse homogeneous-or-not polynomials in three variables with integer
//! coefficients. Only what the discriminant and the Weierstrass reduction
//! need.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Exp = [u32; 3];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TernaryPoly {
    terms: BTreeMap<Exp, BigInt>,
}

impl TernaryPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    /// `c0*x0 + c1*x1 + c2*x2`.
    pub fn linear(c: &[BigInt; 3]) -> Self {
        let mut p = Self::zero();
        for (i, ci) in c.iter().enumerate() {
            let mut e = [0; 3];
            e[i] = 1;
            p.add_term(e, ci.clone());
        }
        p
    }

    pub fn add_term(&mut self, e: Exp, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn coeff(&self, e: Exp) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(BigInt::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut d = *e;
                d[var] -= 1;
                out.add_term(d, c * BigInt::from(e[var]));
            }
        }
        out
    }

    /// `self(A x)` where row `i` of `a` expresses old variable `i` as a
    /// linear form in the new variables.
    pub fn substitute_linear(&self, a: &[[BigInt; 3]; 3]) -> Self {
        let lin: Vec<TernaryPoly> = a.iter().map(TernaryPoly::linear).collect();
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let term = lin[0].pow(e[0]).mul(&lin[1].pow(e[1])).mul(&lin[2].pow(e[2]));
            out = out.add(&term.scale(c));
        }
        out
    }

    pub fn eval_rational(&self, x: &[BigRational; 3]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for i in 0..3 {
                for _ in 0..e[i] {
                    t *= &x[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_int(&self, x: &[BigInt; 3]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..3 {
                for _ in 0..e[i] {
                    t *= &x[i];
                }
            }
            acc += t;
        }
        acc
    }
}

/// Determinant of a 3x3 matrix of polynomials.
pub fn det3(m: &[[TernaryPoly; 3]; 3]) -> TernaryPoly {
    let minor = |i: usize, j: usize, k: usize, l: usize| m[1][i].mul(&m[2][j]).sub(&m[1][k].mul(&m[2][l]));
    m[0][0]
        .mul(&minor(1, 2, 2, 1))
        .sub(&m[0][1].mul(&minor(0, 2, 2, 0)))
        .add(&m[0][2].mul(&minor(0, 1, 1, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_and_derivative() {
        // f = x0^2 x1, substitute x0 -> x0 + x1, x1 -> x1, x2 -> x2
        let mut f = TernaryPoly::zero();
        f.add_term([2, 1, 0], BigInt::one());
        let one = BigInt::one;
        let zero = BigInt::zero;
        let a = [[one(), one(), zero()], [zero(), one(), zero()], [zero(), zero(), one()]];
        let g = f.substitute_linear(&a);
        assert_eq!(g.coeff([2, 1, 0]), BigInt::from(1));
        assert_eq!(g.coeff([1, 2, 0]), BigInt::from(2));
        assert_eq!(g.coeff([0, 3, 0]), BigInt::from(1));
        let d = f.derivative(0);
        assert_eq!(d.coeff([1, 1, 0]), BigInt::from(2));
    }
}
