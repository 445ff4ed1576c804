//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cubic_core::curvefile::CurveSpec;
use cubic_core::descent::{
    equivalent_m, fallback_basis, load_mw_basis, parse_basis_file, partition, xr_pairs_for_class, MordellWeilBasis, XRPair,
};
use cubic_core::detmethod::hensel::hensel_implicit;
use cubic_core::detmethod::{build_matrix, minor_valuation, monomial_basis, residue_buckets, BiMonomial};
use cubic_core::forms::MONOMIALS;
use cubic_core::heights::{canonical_height, DEFAULT_TOL};
use cubic_core::jacobian::{reduce_point, GroupContext};
use cubic_core::lattice::{davenport_check, growth_report, HeightForm};
use cubic_core::points::{enumerate_points, PlanePoint};
use cubic_core::replay::run_bound;

const CORPUS: [&str; 5] = ["fermat", "37a", "389a", "11a3", "cubesum7"];

struct Curve {
    name: &'static str,
    spec: CurveSpec,
    ctx: GroupContext,
    basis: MordellWeilBasis,
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &'static str) -> Curve {
    let path = corpus_dir().join(format!("{name}.curve"));
    let spec = CurveSpec::load(&path).unwrap();
    let ctx = spec.context().unwrap();
    let basis = match spec.basis_path(&path) {
        Some(b) => {
            let (gens, tors) = parse_basis_file(&std::fs::read_to_string(b).unwrap()).unwrap();
            load_mw_basis(&ctx, gens, tors, DEFAULT_TOL).unwrap()
        }
        None => fallback_basis(&ctx, 100, DEFAULT_TOL).unwrap(),
    };
    Curve { name, spec, ctx, basis }
}

fn pt(x: [i64; 3]) -> PlanePoint {
    PlanePoint::from_i64(x).unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Every primitive triple in the box `[-B, B]^3` on the curve, first nonzero
/// coordinate positive.
fn triple_scan(coeffs: &[i64; 10], bound: i64) -> BTreeSet<[i64; 3]> {
    let mut found = BTreeSet::new();
    for a in 0..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                if a == 0 && (b < 0 || (b == 0 && c <= 0)) {
                    continue;
                }
                if gcd(gcd(a, b), c) != 1 {
                    continue;
                }
                let x = [a as i128, b as i128, c as i128];
                let v: i128 = MONOMIALS
                    .iter()
                    .zip(coeffs)
                    .map(|(e, &k)| k as i128 * x[0].pow(e[0]) * x[1].pow(e[1]) * x[2].pow(e[2]))
                    .sum();
                if v == 0 {
                    found.insert([a, b, c]);
                }
            }
        }
    }
    found
}

fn enumeration(curves: &[Curve]) {
    for c in curves {
        let oracle = triple_scan(c.spec.form.coeffs(), 50);
        for bound in 1..=50i64 {
            let expect: BTreeSet<[i64; 3]> = oracle.iter().filter(|x| x.iter().all(|v| v.abs() <= bound)).copied().collect();
            let got: BTreeSet<[i64; 3]> =
                enumerate_points(c.ctx.curve(), bound as u64).unwrap().iter().map(|p| p.to_i64().unwrap()).collect();
            assert_eq!(got, expect, "{} at B = {bound}", c.name);
        }
    }
    let fermat = &curves[0];
    for bound in [1, 10, 100, 1000] {
        assert_eq!(enumerate_points(fermat.ctx.curve(), bound).unwrap().len(), 3, "Fermat at B = {bound}");
    }
}

fn dimension(curves: &[Curve]) {
    let c = &curves[2];
    let r = pt([0, 0, 1]);
    let grid = [((1, 1, 1), 6), ((1, 2, 1), 9), ((1, 1, 2), 9), ((1, 3, 3), 18), ((2, 1, 4), 24), ((2, 2, 4), 36), ((3, 1, 9), 54)];
    for ((m, a, b), e) in grid {
        assert_eq!(3 * (m * m * a + b), e);
        let mb = monomial_basis(&c.ctx, &r, m, a, b).unwrap();
        assert_eq!(mb.len() as u32, e, "(m, a, b) = ({m}, {a}, {b})");
    }
    assert!(monomial_basis(&c.ctx, &r, 2, 1, 1).is_err());
}

/// `Q_j = 2G + j k G` with `k` the order of `G` mod p: one residue class mod p.
fn family(ctx: &GroupContext, gen: &PlanePoint, p: u64, size: i64) -> Vec<PlanePoint> {
    let k = ctx.reduce(p).unwrap().order_up_to(&reduce_point(gen, p).x, 2 * p + 2).unwrap() as i64;
    let q0 = ctx.smul(2, gen);
    (0..size).map(|j| ctx.add(&q0, &ctx.smul(j * k, gen))).collect()
}

/// Plain cofactor expansion over the integers.
fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut total = BigInt::from(0);
    for (j, lead) in m[0].iter().enumerate() {
        let minor: Vec<Vec<BigInt>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = lead * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if *x == BigInt::from(0) {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    while &y % &p == BigInt::from(0) {
        y /= &p;
        v += 1;
    }
    Some(v)
}

fn valuation_bound(curves: &[Curve]) {
    let c = &curves[1];
    let gen = c.basis.generators()[0].clone();
    let mb = monomial_basis(&c.ctx, &gen, 1, 1, 1).unwrap();
    assert_eq!(mb.len(), 6);
    for p in [5u64, 7, 11] {
        assert!(c.spec.form.is_good_prime(p));
        let fam: Vec<XRPair> =
            family(&c.ctx, &gen, p, 6).into_iter().map(|q| XRPair { p: q.clone(), q, r: gen.clone(), m: 1 }).collect();
        assert_eq!(residue_buckets(&fam, p).len(), 1);
        let rows: Vec<Vec<BigInt>> =
            fam.iter().map(|pr| mb.elems.iter().map(|mo: &BiMonomial| mo.eval(pr.p.coords(), pr.q.coords())).collect()).collect();
        let d = det(&rows);
        let v = valuation(&d, p);
        assert!(v.is_none_or(|v| v >= 15), "p = {p}: v = {v:?}");
        let lib = minor_valuation(&build_matrix(&fam, &mb).leading_minor(6).unwrap(), p).unwrap();
        assert_eq!(lib.det, d);
        assert_eq!(lib.valuation, v);
    }
}

fn hensel(curves: &[Curve]) {
    let c = &curves[1];
    let gen = c.basis.generators()[0].clone();
    let members = family(&c.ctx, &gen, 7, 21);
    let star = reduce_point(&members[0], 7);
    let lift = hensel_implicit(c.ctx.curve(), &star, 6).unwrap();
    let mut checked = 0;
    for q in members.iter().skip(1) {
        assert_eq!(reduce_point(q, 7), star);
        let v = lift.residual_valuation(q).unwrap();
        assert!(v.is_none_or(|v| v >= 6), "{q}: v = {v:?}");
        checked += 1;
    }
    assert_eq!(checked, 20);
}

fn descent(curves: &[Curve]) {
    for c in curves {
        let pts = enumerate_points(c.ctx.curve(), 100).unwrap();
        assert_eq!(partition(&c.ctx, &c.basis, &pts, 1).unwrap().len(), 1, "{}", c.name);
        for m in [1u32, 2, 3] {
            let classes = partition(&c.ctx, &c.basis, &pts, m).unwrap();
            assert!(classes.len() as u64 <= 16 * (m as u64).pow(c.basis.rank() as u32), "{} m = {m}", c.name);
        }
        let small = enumerate_points(c.ctx.curve(), 30).unwrap();
        for m in [1u32, 2, 3] {
            let rel: Vec<Vec<bool>> =
                small.iter().map(|p| small.iter().map(|q| equivalent_m(&c.ctx, &c.basis, p, q, m).unwrap()).collect()).collect();
            let n = small.len();
            for i in 0..n {
                assert!(rel[i][i]);
                for j in 0..n {
                    assert_eq!(rel[i][j], rel[j][i]);
                    for k in 0..n {
                        assert!(!(rel[i][j] && rel[j][k]) || rel[i][k], "{} m = {m}", c.name);
                    }
                }
            }
            let classes = partition(&c.ctx, &c.basis, &small, m).unwrap();
            for cl in &classes {
                for x in &cl.members {
                    assert!(equivalent_m(&c.ctx, &c.basis, x, &cl.representative, m).unwrap());
                }
            }
        }
    }
    let c37 = &curves[1];
    let pts = enumerate_points(c37.ctx.curve(), 1000).unwrap();
    assert!(partition(&c37.ctx, &c37.basis, &pts, 2).unwrap().len() <= 2);
}

fn heights(curves: &[Curve]) {
    let tol = DEFAULT_TOL;
    for c in curves {
        let h = |p: &PlanePoint| canonical_height(&c.ctx, p, tol).unwrap();
        for g in c.basis.generators() {
            let g2 = c.ctx.smul(2, g);
            assert!((h(&g2) - 4.0 * h(g)).abs() < 1e-6, "{} {g}", c.name);
        }
        for t in c.basis.torsion() {
            let order = c.ctx.torsion_order(t).unwrap();
            assert!(order <= 12);
            assert!(h(t) < tol, "{} {t}", c.name);
        }
        let gens = c.basis.generators();
        let mut sample: Vec<PlanePoint> = gens.to_vec();
        if let (Some(a), Some(b)) = (gens.first(), gens.last()) {
            sample.push(c.ctx.add(a, b));
            sample.push(c.ctx.smul(2, a));
        }
        for p in &sample {
            for q in &sample {
                let lhs = h(&c.ctx.add(p, q)) + h(&c.ctx.sub(p, q));
                let rhs = 2.0 * h(p) + 2.0 * h(q);
                assert!((lhs - rhs).abs() < 6e-8, "{}: {p} {q} off by {}", c.name, lhs - rhs);
            }
        }
    }
}

fn auxiliary_forms(curves: &[Curve]) {
    let runs: [(usize, u64, u32, u32, u32); 7] =
        [(0, 100, 1, 1, 1), (1, 300, 1, 1, 1), (1, 300, 2, 1, 4), (2, 300, 1, 1, 1), (2, 100, 2, 1, 4), (3, 100, 1, 2, 1), (4, 300, 1, 1, 1)];
    for (i, bound, m, a, b) in runs {
        let c = &curves[i];
        let rep = run_bound(&c.ctx, &c.basis, bound, m, Some((a, b)), None, cubic_core::replay::DEFAULT_C0, None).unwrap();
        let pts = enumerate_points(c.ctx.curve(), bound).unwrap();
        let classes = partition(&c.ctx, &c.basis, &pts, m).unwrap();
        let e = (3 * (m * m * a + b)) as usize;
        for (cert, class) in rep.certificates.iter().zip(&classes) {
            assert!(!cert.forced);
            assert_eq!(cert.e, e);
            let pairs = xr_pairs_for_class(&c.ctx, &c.basis, &class.members, &class.representative, m).unwrap();
            let buckets = residue_buckets(&pairs, cert.prime.p);
            assert_eq!(buckets.len(), cert.buckets.len());
            for (report, bucket) in cert.buckets.iter().zip(buckets.values()) {
                assert!(report.size <= e, "{} bucket of size {}", c.name, report.size);
                let g = report.aux.as_ref().expect("auxiliary form");
                assert!(g.iter().any(|x| *x != BigInt::from(0)));
                for pr in &bucket.pairs {
                    let v: BigInt = g.iter().zip(&cert.basis.elems).map(|(k, mo)| k * mo.eval(pr.p.coords(), pr.q.coords())).sum();
                    assert_eq!(v, BigInt::from(0), "{}: G does not vanish at {}", c.name, pr.p);
                }
            }
            assert!(cert.ok());
        }
    }
}

fn davenport() {
    let id = HeightForm::from_integers(&[&[1, 0], &[0, 1]]).unwrap();
    let d = davenport_check(&id, 25.0).unwrap();
    assert_eq!(d.count, 81);
    assert!((d.bound - 400.0).abs() < 1e-9);
    assert!(d.ok);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let r = rng.gen_range(1..=3usize);
        let den: i64 = rng.gen_range(1..=4);
        let mut g = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..i {
                let x = rng.gen_range(-3..=3);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        // diagonally dominant with margin den, so Q(n) >= |n|^2 and |n_i| <= sqrt(rho)
        for i in 0..r {
            let off: i64 = (0..r).filter(|&j| j != i).map(|j| g[i][j].abs()).sum();
            g[i][i] = off + den + rng.gen_range(0..=3);
        }
        let rho: i64 = rng.gen_range(1..=30);
        let gram: Vec<Vec<BigRational>> =
            g.iter().map(|row| row.iter().map(|&x| BigRational::new(x.into(), den.into())).collect()).collect();
        let form = HeightForm::from_rational(gram).unwrap();
        let reach = (rho as f64).sqrt().floor() as i64 + 1;
        let mut expect = 0u64;
        let mut n = vec![-reach; r];
        loop {
            let q: i64 = (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| g[i][j] * n[i] * n[j]).sum();
            if q <= rho * den {
                expect += 1;
            }
            let mut i = 0;
            while i < r && n[i] == reach {
                n[i] = -reach;
                i += 1;
            }
            if i == r {
                break;
            }
            n[i] += 1;
        }
        let d = davenport_check(&form, rho as f64).unwrap();
        assert_eq!(d.ambiguous, 0);
        assert_eq!(d.count, expect, "gram {g:?}/{den}, rho {rho}");
        assert!(d.ok, "gram {g:?}/{den}, rho {rho}: {d:?}");
    }
}

fn growth(curves: &[Curve]) {
    let bounds = [10, 100, 1000];
    for c in curves {
        for row in growth_report(&c.ctx, &c.basis, &bounds, 1.0).unwrap() {
            let n = enumerate_points(c.ctx.curve(), row.bound).unwrap().len();
            assert_eq!(row.count, n);
            assert!(row.ok(), "{} at B = {}", c.name, row.bound);
            assert!(row.count as u64 <= row.torsion as u64 * row.lattice.count, "{} at B = {}", c.name, row.bound);
        }
    }
    let f = &curves[0];
    assert_eq!(f.basis.rank(), 0);
    let mut last = f64::INFINITY;
    for b in bounds {
        let rep = run_bound(&f.ctx, &f.basis, b, 1, None, None, cubic_core::replay::DEFAULT_C0, None).unwrap();
        let ratio = rep.ratio();
        assert!(ratio.is_finite() && ratio <= last, "ratio {ratio} after {last}");
        last = ratio;
    }
}

fn negative_control() {
    let out = tempfile::tempdir().unwrap();
    let curve = corpus_dir().join("389a.curve");
    let status = Command::new(env!("CARGO_BIN_EXE_cubic"))
        .args(["detmethod", "--m", "1", "--a", "1", "--b", "1", "--B", "3000", "--A", "1.1", "--force-prime", "5", "--curve"])
        .arg(&curve)
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert_ne!(status.status.code(), Some(0));
    let cert = std::fs::read_to_string(out.path().join("389a_detmethod_m1_a1_b1_B3000.cert")).unwrap();
    assert!(cert.contains("status FAIL"));
    assert!(cert.contains("result FAIL"));
}

type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() + 'a>);

fn main() {
    let curves: Vec<Curve> = CORPUS.iter().map(|n| load(n)).collect();
    let criteria: Vec<Criterion> = vec![
        ("point enumeration matches the triple scan", Duration::from_secs(60), Box::new(|| enumeration(&curves))),
        ("monomial basis dimension", Duration::from_secs(120), Box::new(|| dimension(&curves))),
        ("valuation of the constructed minor", Duration::MAX, Box::new(|| valuation_bound(&curves))),
        ("Hensel congruence at p = 7, n = 6", Duration::MAX, Box::new(|| hensel(&curves))),
        ("descent partition", Duration::MAX, Box::new(|| descent(&curves))),
        ("canonical heights", Duration::MAX, Box::new(|| heights(&curves))),
        ("auxiliary forms", Duration::MAX, Box::new(|| auxiliary_forms(&curves))),
        ("Davenport counts", Duration::MAX, Box::new(davenport)),
        ("growth against lattice counts", Duration::MAX, Box::new(|| growth(&curves))),
        ("forced small prime fails", Duration::MAX, Box::new(negative_control)),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check));
        let took = start.elapsed();
        let verdict = match result {
            Ok(()) if took <= *limit => "PASS".to_string(),
            Ok(()) => format!("FAIL (took {:.1}s, limit {}s)", took.as_secs_f64(), limit.as_secs()),
            Err(_) => "FAIL".to_string(),
        };
        if verdict != "PASS" {
            failed += 1;
        }
        println!("criterion {:2} {verdict} {name} [{:.2}s]", i + 1, took.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
