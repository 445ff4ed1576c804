//! Rational points of bounded naive height and the counting function N(B).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::ln_abs;
use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::ring::normalize_triple;

/// A point of `P^2(Q)` as a primitive integer triple whose first nonzero
/// coordinate is positive.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlanePoint {
    x: [BigInt; 3],
}

impl PlanePoint {
    /// Normalises any nonzero integer triple.
    pub fn new(x: [BigInt; 3]) -> Result<Self> {
        if x.iter().all(|c| c.is_zero()) {
            return Err(Error::Precondition("zero triple is not a projective point".into()));
        }
        Ok(PlanePoint { x: normalize_triple(x) })
    }

    pub fn from_i64(x: [i64; 3]) -> Result<Self> {
        Self::new(x.map(BigInt::from))
    }

    /// Wraps a triple already known to be normalised.
    pub(crate) fn from_normalized(x: [BigInt; 3]) -> Self {
        debug_assert_eq!(normalize_triple(x.clone()), x);
        PlanePoint { x }
    }

    pub fn coords(&self) -> &[BigInt; 3] {
        &self.x
    }

    /// `H(P) = max |x_i|`.
    pub fn height(&self) -> BigInt {
        self.x.iter().map(|c| c.abs()).max().unwrap()
    }

    /// `log H(P)`.
    pub fn log_height(&self) -> f64 {
        ln_abs(&self.height())
    }

    pub fn is_on(&self, f: &CubicForm) -> bool {
        f.eval_big(&self.x).is_zero()
    }

    pub fn to_i64(&self) -> Option<[i64; 3]> {
        Some([self.x[0].to_i64()?, self.x[1].to_i64()?, self.x[2].to_i64()?])
    }
}

impl Ord for PlanePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x.cmp(&other.x)
    }
}

impl PartialOrd for PlanePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.x[0], self.x[1], self.x[2])
    }
}

impl fmt::Debug for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PlanePoint {
    type Err = Error;

    /// Accepts `x0,x1,x2`, `[x0,x1,x2]` or whitespace-separated triples.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = t.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!("expected three coordinates, got '{s}'")));
        }
        let mut x = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (xi, p) in x.iter_mut().zip(parts) {
            *xi = p.parse().map_err(|_| Error::Format(format!("bad integer '{p}'")))?;
        }
        PlanePoint::new(x)
    }
}

const SIEVE_PRIMES: [u64; 10] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// For each small prime `l`, which residue pairs `(x0, x1) mod l` admit some
/// `x2` with `F(x0, x1, x2) = 0 mod l`.
struct ResidueSieve {
    tables: Vec<(u64, Vec<bool>)>,
}

impl ResidueSieve {
    fn new(f: &CubicForm) -> Self {
        let tables = SIEVE_PRIMES
            .iter()
            .map(|&l| {
                let li = l as i128;
                let mut t = vec![false; (l * l) as usize];
                for a in 0..li {
                    for b in 0..li {
                        t[(a * li + b) as usize] = (0..li).any(|c| f.eval_i128([a, b, c]).rem_euclid(li) == 0);
                    }
                }
                (l, t)
            })
            .collect();
        ResidueSieve { tables }
    }

    #[inline]
    fn admits(&self, x0: i128, x1: i128) -> bool {
        self.tables.iter().all(|(l, t)| {
            let l = *l as i128;
            t[(x0.rem_euclid(l) * l + x1.rem_euclid(l)) as usize]
        })
    }
}

#[inline]
fn horner(c: &[i128; 4], t: i128) -> i128 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    Some(r)
}

/// Root of `c` on `[lo, hi]`, assuming `c` is monotone there.
fn monotone_root(c: &[i128; 4], mut lo: i128, mut hi: i128) -> Option<i128> {
    if lo > hi {
        return None;
    }
    let flo = horner(c, lo).signum();
    let fhi = horner(c, hi).signum();
    if flo == 0 {
        return Some(lo);
    }
    if fhi == 0 {
        return Some(hi);
    }
    if flo == fhi {
        return None;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let s = horner(c, mid).signum();
        if s == 0 {
            return Some(mid);
        }
        if s == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// All integer roots in `[-bound, bound]` of `c[3] t^3 + ... + c[0]`, which
/// must not be the zero polynomial.
pub(crate) fn integer_roots(c: &[i128; 4], bound: i128, out: &mut Vec<i128>) {
    out.clear();
    let deg = (0..4).rev().find(|&i| c[i] != 0);
    match deg {
        None => panic!("integer_roots: zero polynomial"),
        Some(0) => {}
        Some(1) => {
            if c[0] % c[1] == 0 {
                let t = -c[0] / c[1];
                if t.abs() <= bound {
                    out.push(t);
                }
            }
        }
        Some(2) => {
            let d = c[1] * c[1] - 4 * c[2] * c[0];
            if let Some(s) = isqrt(d) {
                if s * s == d {
                    for num in [-c[1] + s, -c[1] - s] {
                        let den = 2 * c[2];
                        if num % den == 0 {
                            let t = num / den;
                            if t.abs() <= bound && !out.contains(&t) {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
        Some(_) => {
            // Split [-bound, bound] into pieces on which the cubic is monotone,
            // scanning a small window around each critical point exactly.
            let d = c[2] * c[2] - 3 * c[3] * c[1];
            let mut windows: Vec<(i128, i128)> = Vec::new();
            if d > 0 {
                let sd = (d as f64).sqrt();
                let den = 3.0 * c[3] as f64;
                let mut crit = [(-(c[2] as f64) - sd) / den, (-(c[2] as f64) + sd) / den];
                crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for t in crit {
                    let lo = (t.floor() as i128 - 2).max(-bound - 1);
                    let hi = (t.ceil() as i128 + 2).min(bound + 1);
                    if lo <= hi {
                        windows.push((lo, hi));
                    }
                }
            }
            let mut cursor = -bound;
            let push = |t: i128, out: &mut Vec<i128>| {
                if t.abs() <= bound && !out.contains(&t) {
                    out.push(t);
                }
            };
            for (lo, hi) in windows {
                if hi < cursor {
                    continue;
                }
                if let Some(t) = monotone_root(c, cursor, lo - 1) {
                    push(t, out);
                }
                for t in lo.max(cursor)..=hi.min(bound) {
                    if horner(c, t) == 0 {
                        push(t, out);
                    }
                }
                cursor = cursor.max(hi + 1);
            }
            if let Some(t) = monotone_root(c, cursor, bound) {
                push(t, out);
            }
        }
    }
}

fn check_bounds(f: &CubicForm, bound: u64) -> Result<()> {
    if bound == 0 {
        return Err(Error::Precondition("B must be at least 1".into()));
    }
    let lhs = (f.coeff_height() as f64) * 16.0 * (bound as f64).powi(3);
    if lhs > 2f64.powi(120) {
        return Err(Error::Overflow(format!("B = {bound} too large for exact 128-bit evaluation")));
    }
    Ok(())
}

/// All points of height at most `bound`, sorted lexicographically.
pub fn enumerate_points(f: &CubicForm, bound: u64) -> Result<Vec<PlanePoint>> {
    if !f.is_smooth() {
        return Err(Error::Singular(None));
    }
    check_bounds(f, bound)?;
    let a = f.coeffs().map(|c| c as i128);
    let b = bound as i128;
    let sieve = ResidueSieve::new(f);

    let mut found: Vec<[i128; 3]> = (0..=b)
        .into_par_iter()
        .map(|x0| {
            let mut local = Vec::new();
            let mut roots = Vec::with_capacity(3);
            let start = if x0 == 0 { 0 } else { -b };
            for x1 in start..=b {
                if x0 == 0 && x1 == 0 {
                    if a[9] == 0 {
                        local.push([0, 0, 1]);
                    }
                    continue;
                }
                if !sieve.admits(x0, x1) {
                    continue;
                }
                let c = [
                    a[0] * x0 * x0 * x0 + a[1] * x0 * x0 * x1 + a[3] * x0 * x1 * x1 + a[6] * x1 * x1 * x1,
                    a[2] * x0 * x0 + a[4] * x0 * x1 + a[7] * x1 * x1,
                    a[5] * x0 + a[8] * x1,
                    a[9],
                ];
                if c.iter().all(|&v| v == 0) {
                    // A line through [0,0,1] inside the curve: impossible when smooth.
                    unreachable!("line contained in a smooth cubic");
                }
                integer_roots(&c, b, &mut roots);
                for &t in &roots {
                    if x0.gcd(&x1).gcd(&t) == 1 {
                        local.push([x0, x1, t]);
                    }
                }
            }
            local
        })
        .flatten()
        .collect();
    found.sort();
    Ok(found
        .into_iter()
        .map(|x| PlanePoint::from_normalized(x.map(BigInt::from)))
        .collect())
}

/// Rows `(B, N(B))` for an increasing list of bounds.
pub fn count_table(f: &CubicForm, bounds: &[u64]) -> Result<Vec<(u64, usize)>> {
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("bound list must be strictly increasing".into()));
    }
    let Some(&max) = bounds.last() else {
        return Ok(Vec::new());
    };
    let pts = enumerate_points(f, max)?;
    let heights: Vec<BigInt> = pts.iter().map(|p| p.height()).collect();
    Ok(bounds
        .iter()
        .map(|&b| (b, heights.iter().filter(|h| **h <= BigInt::from(b)).count()))
        .collect())
}

pub fn count_table_csv(rows: &[(u64, usize)]) -> String {
    let mut s = String::from("B,N\n");
    for (b, n) in rows {
        s.push_str(&format!("{b},{n}\n"));
    }
    s
}

/// Either `N(B) <= 9`, or the ratio `log ||F|| / (30 log B)` for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct TrentaReport {
    pub bound: u64,
    pub count: usize,
    pub ratio: Option<f64>,
}

pub fn trenta_diagnostic(f: &CubicForm, bound: u64) -> Result<TrentaReport> {
    if bound < 3 {
        return Err(Error::Precondition("B must be at least 3".into()));
    }
    let count = enumerate_points(f, bound)?.len();
    let ratio = (count >= 10).then(|| (f.coeff_height() as f64).ln() / (30.0 * (bound as f64).ln()));
    Ok(TrentaReport { bound, count, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_roots(c: &[i128; 4], b: i128) -> Vec<i128> {
        (-b..=b).filter(|&t| horner(c, t) == 0).collect()
    }

    #[test]
    fn fermat_small_box() {
        let f = CubicForm::new([1, 0, 0, 0, 0, 0, 1, 0, 0, 1]).unwrap();
        let pts = enumerate_points(&f, 1).unwrap();
        let want: Vec<PlanePoint> = [[0, 1, -1], [1, -1, 0], [1, 0, -1]]
            .iter()
            .map(|&x| PlanePoint::from_i64(x).unwrap())
            .collect();
        assert_eq!(pts, want);
    }

    #[test]
    fn point_parsing_normalises() {
        let p: PlanePoint = "-2, 4, 0".parse().unwrap();
        assert_eq!(p.to_i64(), Some([1, -2, 0]));
        assert_eq!(p.height(), BigInt::from(2));
        assert!("1,2".parse::<PlanePoint>().is_err());
        assert!("0,0,0".parse::<PlanePoint>().is_err());
    }

    #[test]
    fn trenta_precondition() {
        let f = CubicForm::new([1, 0, 0, 0, 0, 0, 1, 0, 0, 1]).unwrap();
        assert!(trenta_diagnostic(&f, 2).is_err());
        let r = trenta_diagnostic(&f, 10).unwrap();
        assert_eq!((r.count, r.ratio), (3, None));
    }

    #[test]
    fn table_rejects_unsorted() {
        let f = CubicForm::new([1, 0, 0, 0, 0, 0, 1, 0, 0, 1]).unwrap();
        assert!(count_table(&f, &[10, 1]).is_err());
        assert_eq!(count_table(&f, &[1]).unwrap().len(), 1);
    }

    proptest! {
        #[test]
        fn cubic_roots_match_scan(r1 in -30i128..30, r2 in -30i128..30, r3 in -30i128..30, k in 1i128..4, shift in -5i128..5) {
            // k (t - r1)(t - r2)(t - r3) + shift
            let c = [
                -k * r1 * r2 * r3 + shift,
                k * (r1 * r2 + r1 * r3 + r2 * r3),
                -k * (r1 + r2 + r3),
                k,
            ];
            let mut got = Vec::new();
            integer_roots(&c, 25, &mut got);
            got.sort();
            prop_assert_eq!(got, brute_roots(&c, 25));
        }

        #[test]
        fn low_degree_roots_match_scan(c0 in -50i128..50, c1 in -9i128..9, c2 in -4i128..4) {
            prop_assume!(c0 != 0 || c1 != 0 || c2 != 0);
            let c = [c0, c1, c2, 0];
            let mut got = Vec::new();
            integer_roots(&c, 40, &mut got);
            got.sort();
            prop_assert_eq!(got, brute_roots(&c, 40));
        }
    }
}
