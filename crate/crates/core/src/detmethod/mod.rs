//! The determinant method on `X_R`: a monomial basis of bi-degree `(a, b)`
//! modulo the ideal of `X_R`, residue-class buckets, the point-monomial
//! matrix and its minors, the choice of auxiliary prime, and the certified
//! count bound for one descent class.

pub mod hensel;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::arith::{is_prime, ln_abs, mul_mod, next_prime, valuation};
use crate::descent::{xr_pairs_for_class, MordellWeilBasis, XRPair};
use crate::error::{Error, Result};
use crate::jacobian::{fp_points, random_fp_points, reduce_point, FpPoint, GroupContext};
use crate::linalg::{bareiss_det, first_kernel_vector, pivot_columns_mod_p};
use crate::points::PlanePoint;

pub use hensel::{hensel_implicit, partials_unit, unit_permutation, HenselLift};

/// Sample primes at or above this size are sampled randomly rather than
/// exhaustively.
const EXHAUSTIVE_LIMIT: u64 = 5000;

/// Exponent vectors of degree `d` in three variables, `x0^d` first.
pub fn exponents(d: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for e0 in (0..=d).rev() {
        for e1 in (0..=d - e0).rev() {
            out.push([e0, e1, d - e0 - e1]);
        }
    }
    out
}

/// `x^e y^f`, with `x` the coordinates of `P` and `y` those of `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiMonomial {
    pub e: [u32; 3],
    pub f: [u32; 3],
}

impl BiMonomial {
    pub fn eval(&self, p: &[BigInt; 3], q: &[BigInt; 3]) -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..3 {
            acc *= p[i].pow(self.e[i]);
            acc *= q[i].pow(self.f[i]);
        }
        acc
    }

    pub fn eval_mod(&self, p: &[u64; 3], q: &[u64; 3], modulus: u64) -> u64 {
        let mut acc = 1u64;
        for i in 0..3 {
            for _ in 0..self.e[i] {
                acc = mul_mod(acc, p[i], modulus);
            }
            for _ in 0..self.f[i] {
                acc = mul_mod(acc, q[i], modulus);
            }
        }
        acc
    }
}

impl fmt::Display for BiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.e;
        let [d, e, g] = self.f;
        write!(f, "{a}{b}{c}:{d}{e}{g}")
    }
}

/// All monomials of bi-degree `(a, b)` in the fixed order: by `e` (as in
/// [`exponents`]), then by `f`.
pub fn all_monomials(a: u32, b: u32) -> Vec<BiMonomial> {
    let fs = exponents(b);
    exponents(a).into_iter().flat_map(|e| fs.iter().map(move |&f| BiMonomial { e, f })).collect()
}

/// `3(m²a + b)`, the dimension of bi-degree `(a, b)` forms modulo those
/// vanishing on `X_R`, valid when `1/a + m²/b < 3`.
pub fn dimension_formula(a: u32, b: u32, m: u32) -> Result<usize> {
    let (a64, b64, m2) = (a as u64, b as u64, (m as u64) * (m as u64));
    if a == 0 || b == 0 || m == 0 || b64 + m2 * a64 >= 3 * a64 * b64 {
        return Err(Error::Inadmissible { a, b, m });
    }
    Ok(3 * (m2 * a64 + b64) as usize)
}

/// Pairs `(P', Q')` of `X_R(F_q)`: `Q'` runs over distinct points of the
/// reduction and `P' = m Q' - (m-1) R`.
pub fn xr_samples_mod_q(ctx: &GroupContext, r: &PlanePoint, m: u32, q: u64, count: usize) -> Result<Vec<([u64; 3], [u64; 3])>> {
    if !is_prime(q) || !ctx.curve().is_good_prime(q) {
        return Err(Error::BadPrime(q));
    }
    let group = ctx.reduce(q)?;
    let qs: Vec<[u64; 3]> = if q < EXHAUSTIVE_LIMIT {
        fp_points(ctx.curve(), q)?.into_iter().take(count).map(|pt| pt.x).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(q ^ ((m as u64) << 48));
        random_fp_points(ctx.curve(), q, count, &mut rng)?
    };
    let rbar = reduce_point(r, q).x;
    let shift = group.smul(m as i64 - 1, &rbar);
    Ok(qs
        .into_iter()
        .map(|qq| {
            let p = group.sub(&group.smul(m as i64, &qq), &shift);
            (p, qq)
        })
        .collect())
}

/// Pivot monomials of bi-degree `(a, b)`: a basis of the forms modulo the
/// ideal of `X_R`, found by evaluation rank modulo a large prime.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub elems: Vec<BiMonomial>,
    /// Prime used for the evaluation rank.
    pub q: u64,
    /// Points of `X_R(F_q)` the rank was measured on.
    pub samples: Vec<([u64; 3], [u64; 3])>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

fn evaluation_rows(monos: &[BiMonomial], samples: &[([u64; 3], [u64; 3])], q: u64) -> Vec<Vec<u64>> {
    samples.iter().map(|(p, qq)| monos.iter().map(|mo| mo.eval_mod(p, qq, q)).collect()).collect()
}

pub fn monomial_basis(ctx: &GroupContext, r: &PlanePoint, m: u32, a: u32, b: u32) -> Result<MonomialBasis> {
    let expected = dimension_formula(a, b, m)?;
    if (b as u64) < (m as u64) * (m as u64) {
        return Err(Error::Precondition(format!("b = {b} must be at least m^2 = {}", m * m)));
    }
    let monos = all_monomials(a, b);
    let count = (expected + 10).max(50);
    let mut rng = ChaCha8Rng::seed_from_u64(((a as u64) << 40) ^ ((b as u64) << 20) ^ m as u64);
    let mut found = 0;
    const ATTEMPTS: usize = 3;
    for _ in 0..ATTEMPTS {
        let mut q = next_prime(rng.gen_range(1u64 << 20..1u64 << 21));
        while !ctx.curve().is_good_prime(q) {
            q = next_prime(q);
        }
        let samples = xr_samples_mod_q(ctx, r, m, q, count)?;
        let rows = evaluation_rows(&monos, &samples, q);
        let pivots = pivot_columns_mod_p(&rows, monos.len(), q);
        found = pivots.len();
        if found == expected {
            let elems = pivots.into_iter().map(|i| monos[i]).collect();
            return Ok(MonomialBasis { a, b, m, elems, q, samples });
        }
    }
    Err(Error::RankDeficient { found, expected, attempts: ATTEMPTS })
}

/// Pairs grouped by the reduction of `Q` modulo `p`.
#[derive(Clone, Debug)]
pub struct Bucket {
    pub residue: FpPoint,
    /// First coordinate of `Q` that is a `p`-unit throughout the class.
    pub unit_coord: usize,
    pub pairs: Vec<XRPair>,
}

/// Buckets keyed by the reduction of `Q`. Points are kept as primitive
/// integer triples, so every coordinate vector is nonzero mod `p`; any two
/// such choices differ by `p`-adic units, which leaves `v_p` of every minor
/// unchanged.
pub fn residue_buckets(pairs: &[XRPair], p: u64) -> BTreeMap<FpPoint, Bucket> {
    let mut out: BTreeMap<FpPoint, Bucket> = BTreeMap::new();
    for pair in pairs {
        let residue = reduce_point(&pair.q, p);
        out.entry(residue)
            .or_insert_with(|| Bucket {
                residue,
                unit_coord: residue.x.iter().position(|&c| c != 0).unwrap(),
                pairs: Vec::new(),
            })
            .pairs
            .push(pair.clone());
    }
    out
}

/// Integer matrix with rows indexed by pairs and columns by monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalMatrix {
    pub rows: Vec<Vec<BigInt>>,
    pub ncols: usize,
}

impl EvalMatrix {
    /// SHA-256 of the rows written as comma-separated decimals, one row per
    /// line.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            h.update(line.join(",").as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn leading_minor(&self, size: usize) -> Option<Vec<Vec<BigInt>>> {
        (self.rows.len() >= size && self.ncols >= size).then(|| self.rows[..size].iter().map(|r| r[..size].to_vec()).collect())
    }
}

pub fn build_matrix(pairs: &[XRPair], basis: &MonomialBasis) -> EvalMatrix {
    let rows = pairs
        .iter()
        .map(|pr| basis.elems.iter().map(|mo| mo.eval(pr.p.coords(), pr.q.coords())).collect())
        .collect();
    EvalMatrix { rows, ncols: basis.len() }
}

/// Determinant of a square minor and its `p`-adic valuation (`None` when
/// the determinant vanishes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorValuation {
    pub det: BigInt,
    pub valuation: Option<u32>,
}

/// Computes `det Δ` exactly and checks `p^{E(E-1)/2} | det Δ`.
pub fn minor_valuation(delta: &[Vec<BigInt>], p: u64) -> Result<MinorValuation> {
    let e = delta.len() as u64;
    let det = bareiss_det(delta);
    let v = valuation(&det, p);
    if let Some(v) = v {
        if (v as u64) < e * e.saturating_sub(1) / 2 {
            return Err(Error::Internal(format!(
                "v_{p}(det) = {v} < {} for a single residue class",
                e * e.saturating_sub(1) / 2
            )));
        }
    }
    Ok(MinorValuation { det, valuation: v })
}

/// `|det| <= E^E B^{E(a + A b)}`.
pub fn archimedean_bound(det: &BigInt, e: usize, bound: u64, a: u32, b: u32, height_exp: f64) -> bool {
    if det.is_zero() {
        return true;
    }
    let exponent = e as f64 * (a as f64 + height_exp * b as f64);
    let ee = BigInt::from(e).pow(e as u32);
    let bb = BigInt::from(bound);
    let abs = det.abs();
    let (lo, hi) = (exponent.floor(), exponent.ceil());
    if lo >= 0.0 && hi < 1e6 {
        if abs <= &ee * bb.pow(lo as u32) {
            return true;
        }
        if abs > &ee * bb.pow(hi as u32) {
            return false;
        }
    }
    ln_abs(&abs) <= (e as f64) * (e as f64).ln() + exponent * (bound as f64).ln()
}

/// The auxiliary prime and the threshold it was chosen above.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeChoice {
    pub p: u64,
    pub threshold: f64,
    /// True when no good prime was found in `(P, 2P]` and the search went on
    /// to `(P, 4P]`.
    pub widened: bool,
}

/// Smallest good prime above `P = c0 log B + 4 B^{2(a + A b)/(E-1)}`.
pub fn choose_prime(ctx: &GroupContext, bound: u64, a: u32, b: u32, e: usize, height_exp: f64, c0: f64) -> Result<PrimeChoice> {
    if e < 3 {
        return Err(Error::Precondition(format!("E = {e} must be at least 3")));
    }
    if bound < 2 {
        return Err(Error::Precondition("B must be at least 2".into()));
    }
    let lb = (bound as f64).ln();
    let threshold = c0 * lb + 4.0 * (2.0 * (a as f64 + height_exp * b as f64) / (e as f64 - 1.0) * lb).exp();
    if !threshold.is_finite() || threshold > 1e17 {
        return Err(Error::Overflow(format!("prime threshold {threshold:e}")));
    }
    let start = threshold.max(0.0).floor() as u64;
    let mut p = next_prime(start);
    while (p as f64) <= 4.0 * threshold.max(1.0) {
        if ctx.curve().is_good_prime(p) {
            return Ok(PrimeChoice { p, threshold, widened: (p as f64) > 2.0 * threshold });
        }
        p = next_prime(p);
    }
    Err(Error::Precondition(format!("no good prime in ({threshold:.3}, {:.3}]", 4.0 * threshold)))
}

/// `G = Σ c_k x^{e_k} y^{f_k}` with `M c = 0`; `c` is the first kernel
/// vector in the fixed column order.
pub fn auxiliary_form(matrix: &EvalMatrix) -> Result<Vec<BigInt>> {
    first_kernel_vector(&matrix.rows, matrix.ncols).ok_or(Error::NoAuxiliaryForm(matrix.ncols))
}

pub fn eval_form(coeffs: &[BigInt], basis: &MonomialBasis, p: &[BigInt; 3], q: &[BigInt; 3]) -> BigInt {
    coeffs.iter().zip(&basis.elems).filter(|(c, _)| !c.is_zero()).map(|(c, mo)| c * mo.eval(p, q)).sum()
}

pub fn eval_form_mod(coeffs: &[BigInt], basis: &MonomialBasis, p: &[u64; 3], q: &[u64; 3], modulus: u64) -> u64 {
    let m = BigInt::from(modulus);
    coeffs.iter().zip(&basis.elems).fold(0u64, |acc, (c, mo)| {
        let c = crate::arith::mod_u64(&(c % &m), modulus);
        (acc + mul_mod(c, mo.eval_mod(p, q, modulus), modulus)) % modulus
    })
}

/// Outcome for one residue class modulo `p`.
#[derive(Clone, Debug)]
pub struct BucketReport {
    pub residue: FpPoint,
    pub size: usize,
    pub matrix_hash: String,
    /// The leading `E x E` minor, when the bucket has at least `E` pairs.
    pub minor: Option<MinorValuation>,
    pub aux: Option<Vec<BigInt>>,
    pub failures: Vec<String>,
}

impl BucketReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parameters of one determinant-method run.
#[derive(Clone, Debug)]
pub struct DetParams {
    pub m: u32,
    pub a: u32,
    pub b: u32,
    pub bound: u64,
    /// Exponent `A` with `H(Q) <= B^A` on the pairs.
    pub height_exp: f64,
    pub c0: f64,
    /// Use this prime instead of the one from [`choose_prime`]; for negative
    /// controls.
    pub force_prime: Option<u64>,
}

/// Certified data for one descent class.
#[derive(Clone, Debug)]
pub struct ClassCertificate {
    pub representative: PlanePoint,
    pub params: DetParams,
    pub e: usize,
    pub prime: PrimeChoice,
    pub forced: bool,
    pub basis: MonomialBasis,
    pub buckets: Vec<BucketReport>,
    pub class_size: usize,
}

impl ClassCertificate {
    pub fn ok(&self) -> bool {
        self.buckets.iter().all(BucketReport::ok)
    }

    pub fn max_bucket(&self) -> usize {
        self.buckets.iter().map(|b| b.size).max().unwrap_or(0)
    }

    /// `p · E`.
    pub fn class_bound(&self) -> u128 {
        self.prime.p as u128 * self.e as u128
    }

    pub fn render(&self, out: &mut String) {
        let pr = &self.params;
        let _ = writeln!(out, "class representative {}", self.representative);
        let _ = writeln!(out, "  m {} a {} b {} B {} A {:.6} c0 {}", pr.m, pr.a, pr.b, pr.bound, pr.height_exp, pr.c0);
        let _ = writeln!(
            out,
            "  E {} p {} threshold {:.6}{}{}",
            self.e,
            self.prime.p,
            self.prime.threshold,
            if self.prime.widened { " widened" } else { "" },
            if self.forced { " forced" } else { "" }
        );
        let monos: Vec<String> = self.basis.elems.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(out, "  sample prime {} monomials {}", self.basis.q, monos.join(" "));
        let _ = writeln!(out, "  points {} buckets {} max bucket {} bound p*E {}", self.class_size, self.buckets.len(), self.max_bucket(), self.class_bound());
        for b in &self.buckets {
            let minor = match &b.minor {
                None => "minor n/a".to_string(),
                Some(mv) if mv.det.is_zero() => "minor det 0".to_string(),
                Some(mv) => format!("minor det {} v_p {}", mv.det, mv.valuation.unwrap_or(0)),
            };
            let aux = match &b.aux {
                None => "none".to_string(),
                Some(c) => c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            };
            let _ = writeln!(out, "  bucket [{},{},{}] size {} sha256 {} {}", b.residue.x[0], b.residue.x[1], b.residue.x[2], b.size, b.matrix_hash, minor);
            let _ = writeln!(out, "    aux {aux}");
            if b.ok() {
                let _ = writeln!(out, "    status OK");
            } else {
                let _ = writeln!(out, "    status FAIL {}", b.failures.join("; "));
            }
        }
    }
}

fn check_bucket(bucket: &Bucket, basis: &MonomialBasis, params: &DetParams, p: u64) -> Result<BucketReport> {
    let e = basis.len();
    let matrix = build_matrix(&bucket.pairs, basis);
    let mut failures = Vec::new();
    let minor = match matrix.leading_minor(e) {
        Some(delta) => {
            let mv = minor_valuation(&delta, p)?;
            if !archimedean_bound(&mv.det, e, params.bound, params.a, params.b, params.height_exp) {
                failures.push(format!("|det| exceeds E^E B^(E(a+Ab)) with A = {}", params.height_exp));
            }
            if !mv.det.is_zero() {
                failures.push(format!(
                    "nonzero minor with v_{p}(det) = {} while log_p|det| = {:.2}",
                    mv.valuation.unwrap_or(0),
                    ln_abs(&mv.det) / (p as f64).ln()
                ));
            }
            Some(mv)
        }
        None => None,
    };
    let aux = match auxiliary_form(&matrix) {
        Ok(c) => {
            for pr in &bucket.pairs {
                if !eval_form(&c, basis, pr.p.coords(), pr.q.coords()).is_zero() {
                    failures.push(format!("auxiliary form does not vanish at ({}, {})", pr.p, pr.q));
                }
            }
            if basis.samples.iter().all(|(sp, sq)| eval_form_mod(&c, basis, sp, sq, basis.q) == 0) {
                failures.push(format!("auxiliary form vanishes on all {} samples mod {}", basis.samples.len(), basis.q));
            }
            Some(c)
        }
        Err(Error::NoAuxiliaryForm(_)) => {
            failures.push(format!("matrix has rank E = {e}; no auxiliary form"));
            None
        }
        Err(err) => return Err(err),
    };
    if bucket.pairs.len() > e {
        failures.push(format!("bucket size {} exceeds E = {e}", bucket.pairs.len()));
    }
    Ok(BucketReport { residue: bucket.residue, size: bucket.pairs.len(), matrix_hash: matrix.hash(), minor, aux, failures })
}

/// Runs the determinant method on one class of `∼_m`: the members (all of
/// height at most `B`) with representative `r`.
pub fn class_bound(
    ctx: &GroupContext,
    mw: &MordellWeilBasis,
    members: &[PlanePoint],
    r: &PlanePoint,
    params: &DetParams,
) -> Result<ClassCertificate> {
    let bound = BigInt::from(params.bound);
    if let Some(p) = members.iter().find(|p| p.height() > bound) {
        return Err(Error::Precondition(format!("{p} has height above B = {}", params.bound)));
    }
    let e = dimension_formula(params.a, params.b, params.m)?;
    let basis = monomial_basis(ctx, r, params.m, params.a, params.b)?;
    let pairs = xr_pairs_for_class(ctx, mw, members, r, params.m)?;
    let (prime, forced) = match params.force_prime {
        Some(p) => {
            if !is_prime(p) || !ctx.curve().is_good_prime(p) {
                return Err(Error::BadPrime(p));
            }
            (PrimeChoice { p, threshold: 0.0, widened: false }, true)
        }
        None => (choose_prime(ctx, params.bound, params.a, params.b, e, params.height_exp, params.c0)?, false),
    };
    let buckets: Vec<Bucket> = residue_buckets(&pairs, prime.p).into_values().collect();
    let reports = buckets
        .par_iter()
        .map(|b| check_bucket(b, &basis, params, prime.p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassCertificate {
        representative: r.clone(),
        params: params.clone(),
        e,
        prime,
        forced,
        basis,
        buckets: reports,
        class_size: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::load_mw_basis;
    use crate::forms::CubicForm;
    use crate::points::enumerate_points;

    fn pt(x: [i64; 3]) -> PlanePoint {
        PlanePoint::from_i64(x).unwrap()
    }

    fn ctx(c: [i64; 10], base: [i64; 3]) -> GroupContext {
        GroupContext::new(CubicForm::new(c).unwrap(), pt(base)).unwrap()
    }

    fn c37() -> GroupContext {
        ctx([1, 0, 0, 0, 0, -1, 0, -1, -1, 0], [0, 1, 0])
    }

    fn c389() -> GroupContext {
        ctx([1, 0, 1, 0, 0, -2, 0, -1, -1, 0], [0, 1, 0])
    }

    #[test]
    fn exponent_order() {
        assert_eq!(exponents(1), vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(exponents(2).len(), 6);
        assert_eq!(exponents(2)[0], [2, 0, 0]);
        assert_eq!(all_monomials(1, 1).len(), 9);
        assert_eq!(all_monomials(2, 4).len(), 6 * 15);
    }

    #[test]
    fn dimension_formula_values() {
        assert_eq!(dimension_formula(1, 1, 1).unwrap(), 6);
        assert_eq!(dimension_formula(1, 4, 2).unwrap(), 24);
        assert_eq!(dimension_formula(1, 1, 2), Err(Error::Inadmissible { a: 1, b: 1, m: 2 }));
        assert!(dimension_formula(0, 1, 1).is_err());
    }

    #[test]
    fn samples_cover_the_reduction() {
        let g = c37();
        let r = pt([0, 0, 1]);
        let all = fp_points(g.curve(), 13).unwrap();
        let s = xr_samples_mod_q(&g, &r, 2, 13, 10_000).unwrap();
        assert_eq!(s.len(), all.len());
        let mut qs: Vec<_> = s.iter().map(|x| x.1).collect();
        qs.dedup();
        assert_eq!(qs.len(), all.len());
        let group = g.reduce(13).unwrap();
        let rbar = reduce_point(&r, 13).x;
        for (p, q) in &s {
            assert_eq!(*p, group.sub(&group.smul(2, q), &rbar));
        }
        let diag = xr_samples_mod_q(&g, &r, 1, 13, 5).unwrap();
        assert!(diag.iter().all(|(p, q)| p == q));
        assert_eq!(xr_samples_mod_q(&g, &r, 1, 37, 5), Err(Error::BadPrime(37)));
    }

    #[test]
    fn basis_cardinality_and_determinism() {
        let g = c389();
        let r = pt([0, 0, 1]);
        for (m, a, b, e) in [(1, 1, 1, 6), (1, 2, 1, 9), (2, 1, 4, 24)] {
            let mb = monomial_basis(&g, &r, m, a, b).unwrap();
            assert_eq!(mb.len(), e);
            let again = monomial_basis(&g, &r, m, a, b).unwrap();
            assert_eq!(mb.elems, again.elems);
        }
        // on the diagonal x_i y_j and x_j y_i agree, so only one of each survives
        let mb = monomial_basis(&g, &r, 1, 1, 1).unwrap();
        assert_eq!(mb.elems[0], BiMonomial { e: [1, 0, 0], f: [1, 0, 0] });
        assert!(!mb.elems.contains(&BiMonomial { e: [0, 1, 0], f: [1, 0, 0] }));
    }

    fn family(g: &GroupContext, gen: &PlanePoint, p: u64, size: i64) -> Vec<XRPair> {
        let k = g.reduce(p).unwrap().order_up_to(&reduce_point(gen, p).x, 2 * p + 2).unwrap() as i64;
        let q0 = g.smul(2, gen);
        (0..size)
            .map(|j| {
                let q = g.add(&q0, &g.smul(j * k, gen));
                XRPair { p: q.clone(), q: q.clone(), r: q0.clone(), m: 1 }
            })
            .collect()
    }

    #[test]
    fn valuation_bound_on_constructed_family() {
        let g = c37();
        let gen = pt([0, 0, 1]);
        let mb = monomial_basis(&g, &gen, 1, 1, 1).unwrap();
        for p in [5u64, 7, 11] {
            let fam = family(&g, &gen, p, 6);
            let buckets = residue_buckets(&fam, p);
            assert_eq!(buckets.len(), 1);
            let m = build_matrix(&fam, &mb);
            let mv = minor_valuation(&m.leading_minor(6).unwrap(), p).unwrap();
            assert!(mv.valuation.is_none_or(|v| v >= 15), "p={p}: {mv:?}");
        }
    }

    #[test]
    fn two_by_two_minor() {
        let g = c37();
        let gen = pt([0, 0, 1]);
        let fam = family(&g, &gen, 5, 2);
        let rows: Vec<Vec<BigInt>> = fam.iter().map(|pr| pr.q.coords()[..2].to_vec()).collect();
        // rows (1, z) in a class with z ≡ z* mod 5: the determinant is divisible by 5
        let mv = minor_valuation(&rows, 5);
        assert!(mv.is_ok());
        let dup = vec![rows[0].clone(), rows[0].clone()];
        assert!(minor_valuation(&dup, 5).unwrap().det.is_zero());
    }

    #[test]
    fn matrix_entries_match_direct_evaluation() {
        let g = c389();
        let r = pt([0, 0, 1]);
        let mb = monomial_basis(&g, &r, 1, 1, 1).unwrap();
        let pts = enumerate_points(g.curve(), 6).unwrap();
        let pairs: Vec<XRPair> = pts.iter().take(6).map(|p| XRPair { p: p.clone(), q: p.clone(), r: r.clone(), m: 1 }).collect();
        let m = build_matrix(&pairs, &mb);
        assert_eq!((m.rows.len(), m.ncols), (pairs.len(), 6));
        for (row, pr) in m.rows.iter().zip(&pairs) {
            for (entry, mo) in row.iter().zip(&mb.elems) {
                let x = pr.p.coords();
                let y = pr.q.coords();
                let mut v = BigInt::one();
                for i in 0..3 {
                    for _ in 0..mo.e[i] {
                        v *= &x[i];
                    }
                    for _ in 0..mo.f[i] {
                        v *= &y[i];
                    }
                }
                assert_eq!(*entry, v);
            }
        }
        let single = build_matrix(&pairs[..1], &mb);
        let c = auxiliary_form(&single).unwrap();
        assert!(eval_form(&c, &mb, pairs[0].p.coords(), pairs[0].q.coords()).is_zero());
    }

    #[test]
    fn archimedean_checks() {
        assert!(archimedean_bound(&BigInt::zero(), 6, 10, 1, 1, 1.0));
        // 6^6 · 10^12 exactly, then one more
        let limit = BigInt::from(6).pow(6) * BigInt::from(10).pow(12);
        assert!(archimedean_bound(&limit, 6, 10, 1, 1, 1.0));
        assert!(!archimedean_bound(&(&limit + 1), 6, 10, 1, 1, 1.0));
        assert!(archimedean_bound(&limit, 6, 10, 1, 1, 1.05));
    }

    #[test]
    fn prime_choice() {
        let g = c389();
        let c = choose_prime(&g, 3, 1, 1, 6, 1.0, 1.0).unwrap();
        let expected = 3f64.ln() + 4.0 * 3f64.powf(0.8);
        assert!((c.threshold - expected).abs() < 1e-12);
        assert_eq!(c.p, 11);
        assert!(choose_prime(&g, 3, 1, 1, 2, 1.0, 1.0).is_err());
        let e3 = choose_prime(&g, 100, 1, 1, 3, 1.0, 30.0).unwrap();
        assert!(e3.p as f64 > e3.threshold);
        // 37 divides the discriminant of 37a and must be skipped
        let h = c37();
        for bound in 3..200 {
            let c = choose_prime(&h, bound, 1, 1, 6, 1.0, 5.0).unwrap();
            assert!(h.curve().is_good_prime(c.p));
        }
    }

    #[test]
    fn class_bound_on_fermat_and_389a() {
        let f = ctx([1, 0, 0, 0, 0, 0, 1, 0, 0, 1], [1, -1, 0]);
        let fb = load_mw_basis(&f, vec![], vec![pt([0, 1, -1]), pt([1, 0, -1])], 1e-8).unwrap();
        let pts = enumerate_points(f.curve(), 100).unwrap();
        let params = DetParams { m: 1, a: 1, b: 1, bound: 100, height_exp: 1.1, c0: 30.0, force_prime: None };
        let cert = class_bound(&f, &fb, &pts, &pts[0], &params).unwrap();
        assert!(cert.ok());
        assert!(cert.max_bucket() <= 6);

        let g = c389();
        let gb = load_mw_basis(&g, vec![pt([1, -1, -1]), pt([0, 0, 1])], vec![], 1e-8).unwrap();
        let pts = enumerate_points(g.curve(), 300).unwrap();
        let params = DetParams { bound: 300, ..params };
        let cert = class_bound(&g, &gb, &pts, &pts[0], &params).unwrap();
        assert!(cert.ok(), "{:?}", cert.buckets.iter().filter(|b| !b.ok()).collect::<Vec<_>>());
        let mut text = String::new();
        cert.render(&mut text);
        assert!(text.contains("status OK"));
    }

    #[test]
    fn forced_small_prime_fails() {
        let g = c389();
        let gb = load_mw_basis(&g, vec![pt([1, -1, -1]), pt([0, 0, 1])], vec![], 1e-8).unwrap();
        let pts = enumerate_points(g.curve(), 3000).unwrap();
        let params = DetParams { m: 1, a: 1, b: 1, bound: 3000, height_exp: 1.1, c0: 30.0, force_prime: Some(5) };
        let cert = class_bound(&g, &gb, &pts, &pts[0], &params).unwrap();
        assert!(!cert.ok(), "{} points, max bucket {}", cert.class_size, cert.max_bucket());
        let mut text = String::new();
        cert.render(&mut text);
        assert!(text.contains("status FAIL"));
    }
}
