//! The canonical-height quadratic form on the Mordell-Weil lattice:
//! ellipsoid point counts, successive minima, Davenport's product bound,
//! and reports comparing point counts with lattice counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::descent::MordellWeilBasis;
use crate::error::{Error, Result};
use crate::heights::canonical_height;
use crate::jacobian::GroupContext;
use crate::linalg::rank;
use crate::points::{enumerate_points, PlanePoint};

/// Largest dimension handled by exhaustive minima search.
pub const DESK_LIMIT: usize = 6;

/// A positive-definite quadratic form `Q(n) = nᵀ G n`. Entries are either
/// exact rationals or floats carrying an absolute error bound per entry.
#[derive(Clone, Debug)]
pub struct HeightForm {
    gram: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<BigRational>>>,
    tol: f64,
    /// Cholesky-style coefficients: `Q(x) = Σ_i d_i (x_i + Σ_{j>i} c_ij x_j)^2`.
    chol: Vec<Vec<f64>>,
}

fn decompose(g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let mut q: Vec<Vec<f64>> = g.to_vec();
    for i in 0..n {
        if q[i][i] <= 0.0 || !q[i][i].is_finite() {
            return Err(Error::Precondition("quadratic form is not positive definite".into()));
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    Ok(q)
}

impl HeightForm {
    pub fn from_f64(gram: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("gram matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (gram[i][j] - gram[j][i]).abs() > 2.0 * tol {
                    return Err(Error::Precondition("gram matrix is not symmetric".into()));
                }
            }
        }
        let chol = decompose(&gram)?;
        Ok(HeightForm { gram, exact: None, tol, chol })
    }

    pub fn from_rational(gram: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = gram.len();
        for i in 0..n {
            if gram[i].len() != n {
                return Err(Error::Precondition("gram matrix is not square".into()));
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Precondition("gram matrix is not symmetric".into()));
                }
            }
        }
        // leading principal minors by exact elimination
        let mut a = gram.clone();
        for k in 0..n {
            if !a[k][k].is_positive() {
                return Err(Error::Precondition("quadratic form is not positive definite".into()));
            }
            for i in k + 1..n {
                let f = &a[i][k] / &a[k][k];
                for j in k..n {
                    let v = &f * &a[k][j];
                    a[i][j] -= v;
                }
            }
        }
        let floats: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|x| x.to_f64().unwrap()).collect()).collect();
        let chol = decompose(&floats)?;
        Ok(HeightForm { gram: floats, exact: Some(gram), tol: 0.0, chol })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rational(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
                .collect(),
        )
    }

    /// The regulator form of a Mordell-Weil basis. Each pairing carries a
    /// few times the height tolerance as error.
    pub fn from_basis(basis: &MordellWeilBasis) -> Result<Self> {
        Self::from_f64(basis.gram().to_vec(), 4.0 * basis.tol())
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn value(&self, n: &[i64]) -> f64 {
        let mut s = 0.0;
        for i in 0..n.len() {
            for j in 0..n.len() {
                s += self.gram[i][j] * n[i] as f64 * n[j] as f64;
            }
        }
        s
    }

    fn exact_value(&self, n: &[i64]) -> Option<BigRational> {
        let g = self.exact.as_ref()?;
        let mut s = BigRational::zero();
        for i in 0..n.len() {
            for j in 0..n.len() {
                s += &g[i][j] * BigRational::from_integer(BigInt::from(n[i] * n[j]));
            }
        }
        Some(s)
    }

    /// Absolute error bound of `value(n)`.
    fn error(&self, n: &[i64], q: f64) -> f64 {
        let l1: f64 = n.iter().map(|x| x.unsigned_abs() as f64).sum();
        self.tol * l1 * l1 + 1e-12 * (1.0 + q.abs())
    }

    fn min_eigen_lower(&self) -> f64 {
        self.chol.iter().enumerate().map(|(i, r)| r[i]).fold(f64::INFINITY, f64::min)
    }

    /// All `n` with computed `Q(n) <= rho + slack`, for a slack covering the
    /// rounding of the decomposition and the entry tolerance.
    fn candidates(&self, rho: f64) -> Vec<Vec<i64>> {
        let r = self.dim();
        if r == 0 {
            return vec![Vec::new()];
        }
        // |n|^2 <= Q(n) / λ with λ bounded below crudely by min d_i / (1 + Σ|c|)^2
        let spread: f64 = self.chol.iter().enumerate().map(|(i, row)| row[i + 1..].iter().map(|c| c.abs()).sum::<f64>()).fold(0.0, f64::max);
        let lambda = self.min_eigen_lower() / (1.0 + spread).powi(2) / r as f64;
        let slack = 1e-9 * (1.0 + rho) + self.tol * r as f64 * (rho + 1.0) / lambda.max(1e-300);
        let budget = rho + slack;
        let top = r - 1;
        let d = self.chol[top][top];
        let half = (budget / d).sqrt() + 1e-9;
        let lo = (-half).ceil() as i64;
        let hi = half.floor() as i64;
        (lo..=hi)
            .into_par_iter()
            .flat_map_iter(|x| {
                let mut out = Vec::new();
                let mut v = vec![0i64; r];
                v[top] = x;
                let rest = budget - d * (x as f64) * (x as f64);
                if rest >= 0.0 {
                    self.descend(top, &mut v, rest, &mut out);
                }
                out
            })
            .collect()
    }

    fn descend(&self, level: usize, v: &mut Vec<i64>, rest: f64, out: &mut Vec<Vec<i64>>) {
        if level == 0 {
            out.push(v.clone());
            return;
        }
        let i = level - 1;
        let center: f64 = -(i + 1..v.len()).map(|j| self.chol[i][j] * v[j] as f64).sum::<f64>();
        let d = self.chol[i][i];
        let half = (rest.max(0.0) / d).sqrt() + 1e-9;
        for x in (center - half).ceil() as i64..=(center + half).floor() as i64 {
            let t = x as f64 - center;
            let left = rest - d * t * t;
            if left < -1e-9 * (1.0 + rest.abs()) {
                continue;
            }
            v[i] = x;
            self.descend(i, v, left.max(0.0), out);
        }
        v[i] = 0;
    }

    /// Classifies `Q(n) <= rho`: `Some(true)`, `Some(false)`, or `None` when
    /// the tolerance does not decide it.
    fn inside(&self, n: &[i64], rho: f64) -> Option<bool> {
        if let Some(q) = self.exact_value(n) {
            let bound = BigRational::from_f64(rho).unwrap();
            return Some(q <= bound);
        }
        let q = self.value(n);
        let err = self.error(n, q);
        if q + err <= rho {
            Some(true)
        } else if q - err > rho {
            Some(false)
        } else {
            None
        }
    }
}

/// `#{n ∈ Z^r : Q(n) <= rho}`; `ambiguous` lattice vectors lie within the
/// tolerance of the boundary and are included in `count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllipsoidCount {
    pub count: u64,
    pub ambiguous: u64,
}

pub fn ellipsoid_count(form: &HeightForm, rho: f64) -> Result<EllipsoidCount> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Precondition(format!("radius {rho} must be a finite nonnegative number")));
    }
    let mut count = 0;
    let mut ambiguous = 0;
    for n in form.candidates(rho) {
        match form.inside(&n, rho) {
            Some(true) => count += 1,
            Some(false) => {}
            None => {
                count += 1;
                ambiguous += 1;
            }
        }
    }
    Ok(EllipsoidCount { count, ambiguous })
}

/// Successive minima of `√Q` with independent witnesses.
#[derive(Clone, Debug)]
pub struct MinimaReport {
    pub minima: Vec<f64>,
    pub witnesses: Vec<Vec<i64>>,
}

pub fn successive_minima(form: &HeightForm) -> Result<MinimaReport> {
    let r = form.dim();
    if r > DESK_LIMIT {
        return Err(Error::Precondition(format!("rank {r} exceeds the desk-scale limit {DESK_LIMIT} for exhaustive minima")));
    }
    if r == 0 {
        return Ok(MinimaReport { minima: Vec::new(), witnesses: Vec::new() });
    }
    // the unit vectors are independent, so every minimum is at most the largest diagonal entry
    let rho = (0..r).map(|i| form.gram[i][i]).fold(0.0, f64::max);
    let mut vecs: Vec<(f64, Vec<i64>)> = form
        .candidates(rho)
        .into_iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .map(|v| (form.value(&v), v))
        .collect();
    vecs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    let mut witnesses: Vec<Vec<i64>> = Vec::new();
    let mut minima = Vec::new();
    for (q, v) in vecs {
        let mut trial: Vec<Vec<BigInt>> = witnesses.iter().map(|w| w.iter().map(|&x| BigInt::from(x)).collect()).collect();
        trial.push(v.iter().map(|&x| BigInt::from(x)).collect());
        if rank(&trial, r) == trial.len() {
            witnesses.push(v);
            minima.push(q.max(0.0).sqrt());
            if witnesses.len() == r {
                break;
            }
        }
    }
    if witnesses.len() < r {
        return Err(Error::Internal("minima search found too few independent vectors".into()));
    }
    Ok(MinimaReport { minima, witnesses })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DavenportReport {
    pub count: u64,
    pub ambiguous: u64,
    pub bound: f64,
    pub ok: bool,
}

/// Compares the ellipsoid count with `Π_j max(1, 4√rho / M_j)`.
pub fn davenport_check(form: &HeightForm, rho: f64) -> Result<DavenportReport> {
    let c = ellipsoid_count(form, rho)?;
    let minima = successive_minima(form)?;
    let bound: f64 = minima.minima.iter().map(|m| (4.0 * rho.sqrt() / m).max(1.0)).product();
    Ok(DavenportReport { count: c.count, ambiguous: c.ambiguous, bound, ok: (c.count as f64) <= bound * (1.0 + 1e-12) })
}

/// Exponents of `log|D|` in the lower bounds for `M_1, …, M_5`.
pub const DAVID_EXPONENTS: [(i64, i64); 5] = [(-7, 16), (-1, 6), (-7, 96), (-1, 40), (1, 240)];

#[derive(Clone, Debug)]
pub struct DavidRow {
    pub index: usize,
    pub minimum: f64,
    pub exponent: (i64, i64),
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DavidReport {
    pub log_disc: f64,
    pub rows: Vec<DavidRow>,
    /// `7/16 + 1/6 + 7/96 + 1/40`.
    pub exponent_sum: f64,
}

impl DavidReport {
    pub fn render(&self) -> String {
        let mut s = "j,M_j,exponent,ratio\n".to_string();
        for r in &self.rows {
            s += &format!("{},{:.10},{}/{},{:.10}\n", r.index, r.minimum, r.exponent.0, r.exponent.1, r.ratio);
        }
        s += &format!("# log|D| = {:.6}; 7/16+1/6+7/96+1/40 = {:.6} < 1\n", self.log_disc, self.exponent_sum);
        s
    }
}

/// Ratios `M_j / (log|D|)^{e_j}` for `j <= min(r, 5)`.
pub fn david_report(minima: &MinimaReport, disc: &BigInt) -> Result<DavidReport> {
    if disc.abs() < BigInt::from(3) {
        return Err(Error::Precondition("|D| must be at least 3".into()));
    }
    let log_disc = crate::arith::ln_abs(disc);
    let rows = minima
        .minima
        .iter()
        .zip(DAVID_EXPONENTS)
        .enumerate()
        .map(|(i, (&m, (n, d)))| DavidRow { index: i + 1, minimum: m, exponent: (n, d), ratio: m / log_disc.powf(n as f64 / d as f64) })
        .collect();
    let exponent_sum = DAVID_EXPONENTS[..4].iter().map(|&(n, d)| -(n as f64) / d as f64).sum();
    Ok(DavidReport { log_disc, rows, exponent_sum })
}

/// Discriminant `-16(4α^3 + 27β^2)` of the integral short Weierstrass model.
pub fn integral_discriminant(ctx: &GroupContext) -> BigInt {
    let (_, a, b) = ctx.weierstrass().integral_scaling();
    BigInt::from(-16) * (BigInt::from(4) * &a * &a * &a + BigInt::from(27) * &b * &b)
}

#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub bound: u64,
    pub count: usize,
    pub h_max: f64,
    pub lattice: EllipsoidCount,
    pub torsion: usize,
    pub calibrated: EllipsoidCount,
    pub log_power: f64,
}

impl GrowthRow {
    /// `N(B) <= #T · #{n : Q(n) <= ĥ_max(B)}`.
    pub fn ok(&self) -> bool {
        self.count as u64 <= self.torsion as u64 * self.lattice.count
    }
}

pub fn growth_csv_header() -> &'static str {
    "B,N,h_max,ellipsoid_at_h_max,ambiguous,torsion,lattice_bound,ellipsoid_at_c_log_B,log_B_power,ok"
}

impl GrowthRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.10},{},{},{},{},{},{:.6},{}",
            self.bound,
            self.count,
            self.h_max,
            self.lattice.count,
            self.lattice.ambiguous,
            self.torsion,
            self.torsion as u64 * self.lattice.count,
            self.calibrated.count,
            self.log_power,
            self.ok()
        )
    }
}

/// Point counts against lattice counts for each bound, with heights taken
/// from the enumerated points.
pub fn growth_report(ctx: &GroupContext, basis: &MordellWeilBasis, bounds: &[u64], c_cal: f64) -> Result<Vec<GrowthRow>> {
    if bounds.is_empty() {
        return Ok(Vec::new());
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) || bounds[0] < 2 {
        return Err(Error::Precondition("bounds must be increasing and at least 2".into()));
    }
    let form = HeightForm::from_basis(basis)?;
    let top = *bounds.last().unwrap();
    let pts: Vec<PlanePoint> = enumerate_points(ctx.curve(), top)?;
    let heights: Vec<(BigInt, f64)> = pts
        .par_iter()
        .map(|p| canonical_height(ctx, p, basis.tol()).map(|h| (p.height(), h)))
        .collect::<Result<_>>()?;
    let r = basis.rank() as f64;
    bounds
        .iter()
        .map(|&b| {
            let bb = BigInt::from(b);
            let inside: Vec<f64> = heights.iter().filter(|(h, _)| *h <= bb).map(|x| x.1).collect();
            let h_max = inside.iter().copied().fold(0.0, f64::max);
            let lb = (b as f64).ln();
            Ok(GrowthRow {
                bound: b,
                count: inside.len(),
                h_max,
                lattice: ellipsoid_count(&form, h_max)?,
                torsion: basis.torsion().len(),
                calibrated: ellipsoid_count(&form, c_cal * lb)?,
                log_power: lb.powf(1.0 + r / 2.0),
            })
        })
        .collect()
}
