//! Ternary cubic forms: parsing, normalisation, coefficient height, the
//! discriminant of the three partial derivatives, and bad primes.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{mod_u64, prime_divisors};
use crate::error::{Error, Result};
use crate::linalg::bareiss_det;
use crate::ring::{Arith, Integers};
use crate::ternary::{det3, Exp, TernaryPoly};

/// Coefficient storage order: `x0^3, x0^2x1, x0^2x2, x0x1^2, x0x1x2,
/// x0x2^2, x1^3, x1^2x2, x1x2^2, x2^3`.
pub const MONOMIALS: [Exp; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

pub fn monomial_index(e: Exp) -> Option<usize> {
    MONOMIALS.iter().position(|&m| m == e)
}

#[derive(Clone, PartialEq, Eq)]
pub struct CubicForm {
    coeffs: [i64; 10],
    content: u64,
    disc: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingularWitness {
    /// A rational singular point.
    Point([i64; 3]),
    /// A common zero of the partials modulo a prime `p >= 5`.
    Residue { p: u64, point: [u64; 3] },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    Singular(SingularWitness),
}

impl CubicForm {
    pub fn new(coeffs: [i64; 10]) -> Result<Self> {
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::ZeroForm);
        }
        if coeffs.contains(&i64::MIN) {
            return Err(Error::Overflow("coefficient i64::MIN".into()));
        }
        let content = coeffs.iter().fold(0u64, |g, &c| g.gcd(&c.unsigned_abs()));
        let disc = partials_resultant(&coeffs);
        Ok(CubicForm { coeffs, content, disc })
    }

    pub fn coeffs(&self) -> &[i64; 10] {
        &self.coeffs
    }

    pub fn content(&self) -> u64 {
        self.content
    }

    /// Sylvester's 6x6 determinant for the partial derivatives; nonzero iff
    /// the curve is smooth.
    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn is_smooth(&self) -> bool {
        !self.disc.is_zero()
    }

    pub fn is_primitive(&self) -> bool {
        self.content == 1
    }

    /// Divide by the content and make the first nonzero coefficient positive.
    pub fn content_normalize(&self) -> CubicForm {
        let lead_neg = self.coeffs.iter().find(|&&c| c != 0).map(|&c| c < 0).unwrap_or(false);
        let g = self.content as i64 * if lead_neg { -1 } else { 1 };
        let coeffs = self.coeffs.map(|c| c / g);
        CubicForm::new(coeffs).expect("normalising a nonzero form")
    }

    /// `max |coefficient|`.
    pub fn coeff_height(&self) -> u64 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap()
    }

    pub fn scaled(&self, k: i64) -> Result<CubicForm> {
        let mut out = [0i64; 10];
        for (o, c) in out.iter_mut().zip(self.coeffs) {
            *o = c.checked_mul(k).ok_or_else(|| Error::Overflow(format!("{c} * {k}")))?;
        }
        CubicForm::new(out)
    }

    pub fn to_poly(&self) -> TernaryPoly {
        let mut p = TernaryPoly::zero();
        for (e, &c) in MONOMIALS.iter().zip(&self.coeffs) {
            p.add_term(*e, BigInt::from(c));
        }
        p
    }

    pub fn coeffs_in<A: Arith>(&self, ring: &A) -> [A::El; 10] {
        self.coeffs.map(|c| ring.from_i64(c))
    }

    pub fn eval_i128(&self, x: [i128; 3]) -> i128 {
        MONOMIALS
            .iter()
            .zip(&self.coeffs)
            .map(|(e, &c)| c as i128 * x[0].pow(e[0]) * x[1].pow(e[1]) * x[2].pow(e[2]))
            .sum()
    }

    pub fn eval_big(&self, x: &[BigInt; 3]) -> BigInt {
        eval(&Integers, &self.coeffs_in(&Integers), x)
    }

    pub fn smoothness_certificate(&self) -> Smoothness {
        if self.is_smooth() {
            return Smoothness::Smooth;
        }
        let c = &self.coeffs;
        let grad_small = |x: [i64; 3]| -> bool {
            let xb = x.map(BigInt::from);
            gradient(&Integers, &self.coeffs_in(&Integers), &xb).iter().all(|g| g.is_zero())
        };
        const R: i64 = 6;
        for a in 0..=R {
            for b in -R..=R {
                for d in -R..=R {
                    let x = [a, b, d];
                    if x == [0, 0, 0] || (a == 0 && (b < 0 || (b == 0 && d < 0))) {
                        continue;
                    }
                    if [a, b, d].iter().fold(0i64, |g, v| g.gcd(v)) != 1 {
                        continue;
                    }
                    if grad_small(x) {
                        return Smoothness::Singular(SingularWitness::Point(x));
                    }
                }
            }
        }
        // No small rational singular point; report a residue witness, which
        // exists for every prime because the resultant vanishes identically.
        let mut p = 5u64;
        loop {
            let f = crate::ring::PrimeField::new(p);
            let coeffs = c.map(|v| f.from_i64(v));
            if let Some(pt) = fp_singular_point(&f, &coeffs) {
                return Smoothness::Singular(SingularWitness::Residue { p, point: pt });
            }
            p = crate::arith::next_prime(p);
        }
    }

    /// Primes dividing `6 * disc`.
    pub fn bad_primes(&self) -> Result<Vec<BigUint>> {
        if !self.is_smooth() {
            return Err(Error::Singular(None));
        }
        Ok(prime_divisors(&(&self.disc * BigInt::from(6))))
    }

    /// `p` does not divide `6 * disc`, so the reduction mod `p` is smooth.
    pub fn is_good_prime(&self, p: u64) -> bool {
        p > 3 && self.is_smooth() && mod_u64(&self.disc, p) != 0
    }
}

/// Common zero of the three partials in `P^2(F_p)`, by exhaustive scan.
pub fn fp_singular_point(f: &crate::ring::PrimeField, coeffs: &[u64; 10]) -> Option<[u64; 3]> {
    let p = f.p;
    let check = |x: [u64; 3]| gradient(f, coeffs, &x).iter().all(|g| *g == 0);
    if check([0, 0, 1]) {
        return Some([0, 0, 1]);
    }
    for b in 0..p {
        if check([0, 1, b]) {
            return Some([0, 1, b]);
        }
    }
    for a in 0..p {
        for b in 0..p {
            if check([1, a, b]) {
                return Some([1, a, b]);
            }
        }
    }
    None
}

impl fmt::Debug for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CubicForm({})", self)
    }
}

impl fmt::Display for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, &c) in MONOMIALS.iter().zip(&self.coeffs) {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mut parts = Vec::new();
            if c.unsigned_abs() != 1 {
                parts.push(c.unsigned_abs().to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => parts.push(format!("x{i}")),
                    _ => parts.push(format!("x{i}^{k}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

pub fn eval<A: Arith>(r: &A, c: &[A::El; 10], x: &[A::El; 3]) -> A::El {
    let x2 = [r.mul(&x[0], &x[0]), r.mul(&x[1], &x[1]), r.mul(&x[2], &x[2])];
    let terms = [
        r.mul(&x2[0], &x[0]),
        r.mul(&x2[0], &x[1]),
        r.mul(&x2[0], &x[2]),
        r.mul(&x[0], &x2[1]),
        r.mul(&r.mul(&x[0], &x[1]), &x[2]),
        r.mul(&x[0], &x2[2]),
        r.mul(&x2[1], &x[1]),
        r.mul(&x2[1], &x[2]),
        r.mul(&x[1], &x2[2]),
        r.mul(&x2[2], &x[2]),
    ];
    let mut acc = r.zero();
    for (ci, t) in c.iter().zip(terms.iter()) {
        if !r.is_zero(ci) {
            acc = r.add(&acc, &r.mul(ci, t));
        }
    }
    acc
}

/// `(dF/dx0, dF/dx1, dF/dx2)` at `x`.
pub fn gradient<A: Arith>(r: &A, c: &[A::El; 10], x: &[A::El; 3]) -> [A::El; 3] {
    let mut out = [r.zero(), r.zero(), r.zero()];
    for (e, ci) in MONOMIALS.iter().zip(c.iter()) {
        if r.is_zero(ci) {
            continue;
        }
        for var in 0..3 {
            if e[var] == 0 {
                continue;
            }
            let mut t = r.mul(ci, &r.from_i64(e[var] as i64));
            for (k, &ek) in e.iter().enumerate() {
                let pow = if k == var { ek - 1 } else { ek };
                for _ in 0..pow {
                    t = r.mul(&t, &x[k]);
                }
            }
            out[var] = r.add(&out[var], &t);
        }
    }
    out
}

const QUADRATIC: [Exp; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

fn partials_resultant(coeffs: &[i64; 10]) -> BigInt {
    let mut f = TernaryPoly::zero();
    for (e, &c) in MONOMIALS.iter().zip(coeffs) {
        f.add_term(*e, BigInt::from(c));
    }
    let q: Vec<TernaryPoly> = (0..3).map(|i| f.derivative(i)).collect();
    let jac = [
        [q[0].derivative(0), q[0].derivative(1), q[0].derivative(2)],
        [q[1].derivative(0), q[1].derivative(1), q[1].derivative(2)],
        [q[2].derivative(0), q[2].derivative(1), q[2].derivative(2)],
    ];
    let j = det3(&jac);
    let rows: Vec<TernaryPoly> = q.iter().cloned().chain((0..3).map(|i| j.derivative(i))).collect();
    let m: Vec<Vec<BigInt>> = rows.iter().map(|r| QUADRATIC.iter().map(|&e| r.coeff(e)).collect()).collect();
    bareiss_det(&m)
}

fn is_var_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Parse a cubic form written in the variables `x0, x1, x2` (or `x, y, z`),
/// e.g. `x1^2*x2 + x1*x2^2 - x0^3 + x0*x2^2`.
pub fn parse_form(text: &str) -> Result<CubicForm> {
    let text = text.replace('\u{2212}', "-");
    let s = text.as_bytes();
    let mut i = 0usize;
    let mut coeffs = [0i128; 10];
    let skip_ws = |i: &mut usize| {
        while *i < s.len() && s[*i].is_ascii_whitespace() {
            *i += 1;
        }
    };
    let mut first = true;
    loop {
        skip_ws(&mut i);
        if i >= s.len() {
            if first {
                return Err(Error::Syntax { pos: i, msg: "empty expression".into() });
            }
            break;
        }
        let mut sign = 1i128;
        if s[i] == b'+' || s[i] == b'-' {
            if s[i] == b'-' {
                sign = -1;
            }
            i += 1;
            skip_ws(&mut i);
        } else if !first {
            return Err(Error::Syntax { pos: i, msg: format!("expected '+' or '-', found '{}'", s[i] as char) });
        }
        first = false;
        let term_start = i;
        let mut coef: i128 = 1;
        let mut exps = [0u32; 3];
        let mut saw_factor = false;
        if i < s.len() && s[i].is_ascii_digit() {
            let st = i;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
            coef = std::str::from_utf8(&s[st..i])
                .unwrap()
                .parse::<i128>()
                .map_err(|_| Error::Overflow(String::from_utf8_lossy(&s[st..i]).into()))?;
            if i < s.len() && s[i] == b'.' {
                return Err(Error::Syntax { pos: i, msg: "coefficients must be integers".into() });
            }
            saw_factor = true;
            skip_ws(&mut i);
            if i < s.len() && s[i] == b'*' {
                i += 1;
                skip_ws(&mut i);
            }
        }
        loop {
            skip_ws(&mut i);
            if i >= s.len() || !s[i].is_ascii_alphabetic() {
                break;
            }
            let st = i;
            while i < s.len() && is_var_char(s[i]) {
                i += 1;
            }
            let name = std::str::from_utf8(&s[st..i]).unwrap();
            let var = match name {
                "x0" | "X0" | "x" => 0,
                "x1" | "X1" | "y" => 1,
                "x2" | "X2" | "z" => 2,
                _ => return Err(Error::Syntax { pos: st, msg: format!("unknown variable '{name}'") }),
            };
            skip_ws(&mut i);
            let mut pow = 1u32;
            if i < s.len() && s[i] == b'^' {
                i += 1;
                skip_ws(&mut i);
                let pst = i;
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
                if pst == i {
                    return Err(Error::Syntax { pos: pst, msg: "expected exponent".into() });
                }
                pow = std::str::from_utf8(&s[pst..i])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Syntax { pos: pst, msg: "exponent too large".into() })?;
            }
            exps[var] += pow;
            saw_factor = true;
            skip_ws(&mut i);
            if i < s.len() && s[i] == b'*' {
                i += 1;
                skip_ws(&mut i);
                if i >= s.len() || !s[i].is_ascii_alphabetic() {
                    return Err(Error::Syntax { pos: i, msg: "expected variable after '*'".into() });
                }
            }
        }
        if saw_factor && i < s.len() && s[i] != b'+' && s[i] != b'-' {
            return Err(Error::Syntax { pos: i, msg: format!("unexpected '{}'", s[i] as char) });
        }
        if !saw_factor {
            let found = s.get(i).map(|&c| format!("'{}'", c as char)).unwrap_or_else(|| "end of input".into());
            return Err(Error::Syntax { pos: i, msg: format!("expected term, found {found}") });
        }
        let degree = exps.iter().sum::<u32>();
        if degree != 3 {
            return Err(Error::Degree { pos: term_start, degree });
        }
        let idx = monomial_index(exps).unwrap();
        coeffs[idx] = coeffs[idx]
            .checked_add(sign * coef)
            .ok_or_else(|| Error::Overflow("coefficient sum".into()))?;
    }
    let mut out = [0i64; 10];
    for (o, c) in out.iter_mut().zip(coeffs) {
        *o = i64::try_from(c).map_err(|_| Error::Overflow(c.to_string()))?;
    }
    CubicForm::new(out)
}

pub fn to_u64(p: &BigUint) -> Option<u64> {
    p.to_u64()
}
