//! End-to-end bound for one `(B, m)`: points, descent classes, the crude
//! height exponent, a determinant-method certificate per class, and the
//! comparison of `N(B)` with the growth envelopes.

use std::fmt::Write as _;

use crate::descent::{partition, xr_pairs_for_class, MordellWeilBasis, XRPair};
use crate::detmethod::{class_bound, ClassCertificate, DetParams};
use crate::error::{Error, Result};
use crate::heights::crude_height_audit;
use crate::jacobian::GroupContext;
use crate::points::enumerate_points;

/// Safety factor applied to the measured height exponent.
pub const AUDIT_FACTOR: f64 = 1.1;
pub const DEFAULT_C0: f64 = 30.0;

/// Degree in `P` used for bound `B`: `1 + ⌊log B⌋`.
pub fn default_a(bound: u64) -> u32 {
    1 + (bound as f64).ln().floor() as u32
}

/// `m^{r+2}(log²B + B^{2/(3m²)} log B)`.
pub fn main_envelope(bound: u64, m: u32, rank: usize) -> f64 {
    let lb = (bound as f64).ln();
    let mf = m as f64;
    mf.powi(rank as i32 + 2) * (lb * lb + (bound as f64).powf(2.0 / (3.0 * mf * mf)) * lb)
}

/// `1 + ⌊√log B⌋`.
pub fn optimal_m(bound: u64) -> u32 {
    1 + (bound as f64).ln().sqrt().floor() as u32
}

/// `(log B)^{3 + r/2}`.
pub fn corollary_envelope(bound: u64, rank: usize) -> f64 {
    (bound as f64).ln().powf(3.0 + rank as f64 / 2.0)
}

/// The measured `max log H(Q) / log B` over all classes, or 0 when every
/// point has height 1.
pub fn measured_height_exponent(ctx: &GroupContext, pairs: &[XRPair], bound: u64) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(0.0);
    }
    crude_height_audit(ctx, pairs, bound)
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub bound: u64,
    pub m: u32,
    pub rank: usize,
    pub count: usize,
    pub a: u32,
    pub b: u32,
    pub height_exp: f64,
    pub certificates: Vec<ClassCertificate>,
    pub envelope: f64,
    pub m_star: u32,
    pub corollary: f64,
}

impl TheoremReport {
    pub fn ratio(&self) -> f64 {
        self.count as f64 / self.envelope
    }

    pub fn ok(&self) -> bool {
        self.certificates.iter().all(ClassCertificate::ok)
    }

    pub fn csv_header() -> &'static str {
        "B,m,r,N,classes,a,b,E,max_p,A,envelope,ratio,m_star,corollary_envelope,ok"
    }

    pub fn csv_row(&self) -> String {
        let e = self.certificates.first().map_or(0, |c| c.e);
        let max_p = self.certificates.iter().map(|c| c.prime.p).max().unwrap_or(0);
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.10},{},{:.6},{}",
            self.bound,
            self.m,
            self.rank,
            self.count,
            self.certificates.len(),
            self.a,
            self.b,
            e,
            max_p,
            self.height_exp,
            self.envelope,
            self.ratio(),
            self.m_star,
            self.corollary,
            self.ok()
        )
    }

    pub fn certificate_text(&self, header: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{header}");
        let _ = writeln!(s, "B {} m {} r {} N {} classes {}", self.bound, self.m, self.rank, self.count, self.certificates.len());
        for c in &self.certificates {
            c.render(&mut s);
        }
        let _ = writeln!(s, "result {}", if self.ok() { "OK" } else { "FAIL" });
        s
    }
}

/// Runs every class of `∼_m` at bound `B` through the determinant method
/// with the given `(a, b)`, or `a = 1 + ⌊log B⌋`, `b = m²` by default.
/// `height_exp` defaults to the measured exponent times [`AUDIT_FACTOR`].
#[allow(clippy::too_many_arguments)]
pub fn run_bound(
    ctx: &GroupContext,
    basis: &MordellWeilBasis,
    bound: u64,
    m: u32,
    degrees: Option<(u32, u32)>,
    height_exp: Option<f64>,
    c0: f64,
    force_prime: Option<u64>,
) -> Result<TheoremReport> {
    if bound < 3 {
        return Err(Error::Precondition(format!("B = {bound} must be at least 3")));
    }
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let (a, b) = degrees.unwrap_or((default_a(bound), m * m));
    crate::detmethod::dimension_formula(a, b, m)?;
    let pts = enumerate_points(ctx.curve(), bound)?;
    let classes = partition(ctx, basis, &pts, m)?;
    let height_exp = match height_exp {
        Some(h) => h,
        None => {
            let mut pairs = Vec::new();
            for c in &classes {
                pairs.extend(xr_pairs_for_class(ctx, basis, &c.members, &c.representative, m)?);
            }
            AUDIT_FACTOR * measured_height_exponent(ctx, &pairs, bound)?
        }
    };
    let params = DetParams { m, a, b, bound, height_exp, c0, force_prime };
    let certificates = classes
        .iter()
        .map(|c| class_bound(ctx, basis, &c.members, &c.representative, &params))
        .collect::<Result<Vec<_>>>()?;
    let rank = basis.rank();
    Ok(TheoremReport {
        bound,
        m,
        rank,
        count: pts.len(),
        a,
        b,
        height_exp,
        certificates,
        envelope: main_envelope(bound, m, rank),
        m_star: optimal_m(bound),
        corollary: corollary_envelope(bound, rank),
    })
}
