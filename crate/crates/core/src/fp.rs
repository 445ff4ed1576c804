//! Dense univariate polynomials over `F_q` and root extraction, used to find
//! points of the reduced curve without scanning all of `F_q`.

use rand::Rng;

use crate::arith::{mul_mod, pow_mod};

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn sub(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + q - y) % q;
    }
    trim(out)
}

fn mul(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, q)) % q;
        }
    }
    trim(out)
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
fn rem(a: &[u64], m: &[u64], q: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let inv = pow_mod(m[dm], q - 2, q);
    while r.len() > dm {
        let lead = mul_mod(*r.last().unwrap(), inv, q);
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + q - mul_mod(lead, c, q)) % q;
        }
        r = trim(r);
    }
    r
}

fn monic(f: &[u64], q: u64) -> Vec<u64> {
    let inv = pow_mod(*f.last().unwrap(), q - 2, q);
    f.iter().map(|&c| mul_mod(c, inv, q)).collect()
}

fn gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b, q);
        a = b;
        b = r;
    }
    if a.is_empty() {
        a
    } else {
        monic(&a, q)
    }
}

fn powmod(base: &[u64], mut e: u64, m: &[u64], q: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, q);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, q), m, q);
        }
        b = rem(&mul(&b, &b, q), m, q);
        e >>= 1;
    }
    acc
}

/// Evaluates `f` (coefficients low to high) at `x`.
pub fn eval(f: &[u64], x: u64, q: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, q) + c) % q)
}

/// Distinct roots in `F_q` of a nonzero polynomial, `q` an odd prime.
/// Sorted ascending.
pub fn roots<R: Rng>(f: &[u64], q: u64, rng: &mut R) -> Vec<u64> {
    let f = trim(f.iter().map(|c| c % q).collect());
    assert!(!f.is_empty(), "roots of the zero polynomial");
    if f.len() == 1 {
        return Vec::new();
    }
    let f = monic(&f, q);
    let xq = powmod(&[0, 1], q, &f, q);
    let split = gcd(&f, &sub(&xq, &[0, 1], q), q);
    let mut out = Vec::new();
    split_linear(split, q, rng, &mut out);
    out.sort_unstable();
    out
}

/// `g` is monic and a product of distinct linear factors.
fn split_linear<R: Rng>(g: Vec<u64>, q: u64, rng: &mut R, out: &mut Vec<u64>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push((q - g[0]) % q),
        _ => loop {
            let delta = rng.gen_range(0..q);
            let h = powmod(&[delta, 1], (q - 1) / 2, &g, q);
            let d = gcd(&g, &sub(&h, &[1], q), q);
            if d.len() > 1 && d.len() < g.len() {
                let other = divide_exact(&g, &d, q);
                split_linear(d, q, rng, out);
                split_linear(other, q, rng, out);
                return;
            }
        },
    }
}

fn divide_exact(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let inv = pow_mod(b[db], q - 2, q);
    let mut r = a.to_vec();
    let mut quot = vec![0u64; a.len() - db];
    for k in (0..quot.len()).rev() {
        let c = mul_mod(r[k + db], inv, q);
        quot[k] = c;
        for (i, &bc) in b.iter().enumerate() {
            r[k + i] = (r[k + i] + q - mul_mod(c, bc, q)) % q;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    quot
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute(f: &[u64], q: u64) -> Vec<u64> {
        (0..q).filter(|&x| eval(f, x, q) == 0).collect()
    }

    #[test]
    fn cubic_with_three_roots() {
        let q = 1_000_003;
        // (x - 1)(x - 2)(x - 5) = x^3 - 8x^2 + 17x - 10
        let f = [q - 10, 17, q - 8, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(roots(&f, q, &mut rng), vec![1, 2, 5]);
    }

    proptest! {
        #[test]
        fn roots_match_scan(c in proptest::collection::vec(0u64..101, 1..5)) {
            let q = 101;
            prop_assume!(c.iter().any(|&x| x != 0));
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            prop_assert_eq!(roots(&c, q, &mut rng), brute(&c, q));
        }
    }
}
