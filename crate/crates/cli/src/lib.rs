//! Command-line driver: reads curve records and basis files, runs the
//! library pipelines, and writes CSV tables and plain-text certificates.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;

use cubic_core::curvefile::CurveSpec;
use cubic_core::descent::{fallback_basis, load_mw_basis, parse_basis_file, partition, MordellWeilBasis};
use cubic_core::detmethod::dimension_formula;
use cubic_core::heights::{height_report, HeightReport, DEFAULT_TOL};
use cubic_core::jacobian::GroupContext;
use cubic_core::lattice::{davenport_check, david_report, growth_csv_header, growth_report, integral_discriminant, successive_minima, HeightForm};
use cubic_core::points::{count_table, count_table_csv, enumerate_points, PlanePoint};
use cubic_core::replay::{run_bound, TheoremReport, DEFAULT_C0};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "CUBIC_WORKERS";

/// Search bound for a basis when none is supplied.
const FALLBACK_SEARCH: u64 = 100;

#[derive(Parser, Debug)]
#[command(name = "cubic", version, about = "Rational points, descent and determinant-method certificates for plane cubics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count points of height at most B.
    Points(PointsArgs),
    /// Naive, x-coordinate and canonical heights.
    Heights(HeightsArgs),
    /// Classes of the descent relation for a given m.
    Descent(DescentArgs),
    /// Determinant-method certificate for every descent class.
    Detmethod(DetArgs),
    /// Lattice counts against point counts.
    Lattice(LatticeArgs),
    /// Point counts against the growth envelopes, with certificates.
    Theorem(TheoremArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Curve record.
    #[arg(long)]
    pub curve: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Canonical height tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct PointsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Height bound.
    #[arg(long = "B", conflicts_with = "table")]
    pub bound: Option<u64>,
    /// Comma-separated increasing bounds.
    #[arg(long = "B-table", value_delimiter = ',')]
    pub table: Vec<u64>,
    /// Also write the points found at the largest bound.
    #[arg(long)]
    pub list: bool,
}

#[derive(Args, Debug)]
pub struct HeightsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Report every point up to this height instead of the generators.
    #[arg(long = "B")]
    pub bound: Option<u64>,
}

#[derive(Args, Debug)]
pub struct DescentArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    #[arg(long = "B")]
    pub bound: u64,
}

#[derive(Args, Debug)]
pub struct DetArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub a: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub b: u32,
    #[arg(long = "B")]
    pub bound: u64,
    /// Height exponent; defaults to 1.1 times the measured value.
    #[arg(long = "A")]
    pub height_exp: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C0)]
    pub c0: f64,
    /// Debugging: use this prime instead of the certified choice.
    #[arg(long)]
    pub force_prime: Option<u64>,
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long = "B-table", value_delimiter = ',', required = true)]
    pub table: Vec<u64>,
    /// Constant c in the comparison column c log B.
    #[arg(long, default_value_t = 1.0)]
    pub c_cal: f64,
}

#[derive(Args, Debug)]
pub struct TheoremArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long = "B", conflicts_with = "table")]
    pub bound: Option<u64>,
    #[arg(long = "B-table", value_delimiter = ',')]
    pub table: Vec<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    #[arg(long = "A")]
    pub height_exp: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C0)]
    pub c0: f64,
}

/// Invalid configuration detected after argument parsing.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Files written and whether every asserted invariant held.
#[derive(Debug, Default)]
pub struct Outcome {
    pub ok: bool,
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

struct Loaded {
    spec: CurveSpec,
    ctx: GroupContext,
}

fn load_curve(common: &Common) -> Result<Loaded> {
    if !(common.tol > 0.0 && common.tol < 1.0) {
        return Err(config(format!("tolerance {} must lie in (0, 1)", common.tol)));
    }
    let spec = CurveSpec::load(&common.curve).with_context(|| format!("reading {}", common.curve.display()))?;
    let ctx = spec.context().with_context(|| format!("curve {}", spec.name))?;
    Ok(Loaded { spec, ctx })
}

fn load_basis(loaded: &Loaded, common: &Common, flag: &Option<PathBuf>) -> Result<MordellWeilBasis> {
    let path = flag.clone().or_else(|| loaded.spec.basis_path(&common.curve));
    match path {
        Some(p) => {
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let (gens, tors) = parse_basis_file(&text)?;
            Ok(load_mw_basis(&loaded.ctx, gens, tors, common.tol).with_context(|| format!("basis {}", p.display()))?)
        }
        None => {
            eprintln!("note: no basis supplied; using a bounded search up to height {FALLBACK_SEARCH} (rank is a lower bound)");
            Ok(fallback_basis(&loaded.ctx, FALLBACK_SEARCH, common.tol)?)
        }
    }
}

fn write(out: &mut Outcome, dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    out.written.push(path);
    Ok(())
}

fn triple(p: &PlanePoint) -> String {
    let [a, b, c] = p.coords();
    format!("{a} {b} {c}")
}

fn bounds_of(single: Option<u64>, table: &[u64]) -> Result<Vec<u64>> {
    match (single, table.is_empty()) {
        (Some(b), _) => Ok(vec![b]),
        (None, false) => Ok(table.to_vec()),
        (None, true) => Err(config("one of --B or --B-table is required")),
    }
}

fn points(args: &PointsArgs) -> Result<Outcome> {
    let loaded = load_curve(&args.common)?;
    let bounds = bounds_of(args.bound, &args.table)?;
    if bounds.contains(&0) || bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("bounds must be positive and strictly increasing"));
    }
    let rows = count_table(&loaded.spec.form, &bounds)?;
    let mut out = Outcome { ok: true, ..Default::default() };
    let csv = count_table_csv(&rows);
    print!("{csv}");
    write(&mut out, &args.common.out, &format!("{}_points.csv", loaded.spec.name), &csv)?;
    if args.list {
        let top = *bounds.last().unwrap();
        let list: String = enumerate_points(&loaded.spec.form, top)?.iter().map(|p| triple(p) + "\n").collect();
        write(&mut out, &args.common.out, &format!("{}_points_B{top}.txt", loaded.spec.name), &list)?;
    }
    Ok(out)
}

fn heights(args: &HeightsArgs) -> Result<Outcome> {
    let loaded = load_curve(&args.common)?;
    let pts = match args.bound {
        Some(b) => enumerate_points(loaded.ctx.curve(), b)?,
        None => load_basis(&loaded, &args.common, &args.basis)?.generators().to_vec(),
    };
    let mut csv = format!("x0,x1,x2,{}\n", HeightReport::csv_header());
    for p in &pts {
        let r = height_report(&loaded.ctx, p, args.common.tol)?;
        let [a, b, c] = p.coords();
        csv += &format!("{a},{b},{c},{}\n", r.csv_row());
    }
    let mut out = Outcome { ok: true, ..Default::default() };
    print!("{csv}");
    write(&mut out, &args.common.out, &format!("{}_heights.csv", loaded.spec.name), &csv)?;
    Ok(out)
}

fn descent(args: &DescentArgs) -> Result<Outcome> {
    let loaded = load_curve(&args.common)?;
    let basis = load_basis(&loaded, &args.common, &args.basis)?;
    let pts = enumerate_points(loaded.ctx.curve(), args.bound)?;
    let classes = partition(&loaded.ctx, &basis, &pts, args.m)?;
    let mut csv = String::from("label,size,representative\n");
    for c in &classes {
        csv += &format!("{},{},{}\n", c.label, c.members.len(), triple(&c.representative));
    }
    let mut out = Outcome { ok: true, ..Default::default() };
    let limit = 16u128 * (args.m as u128).pow(basis.rank() as u32);
    if classes.len() as u128 > limit {
        out.ok = false;
        out.failures.push(format!("{} classes exceed 16 m^r = {limit}", classes.len()));
    }
    print!("{csv}");
    write(&mut out, &args.common.out, &format!("{}_descent_m{}.csv", loaded.spec.name, args.m), &csv)?;
    Ok(out)
}

fn header(loaded: &Loaded, basis: &MordellWeilBasis) -> String {
    let c: Vec<String> = loaded.spec.form.coeffs().iter().map(|x| x.to_string()).collect();
    let gens: Vec<String> = basis.generators().iter().map(|g| g.to_string()).collect();
    format!(
        "curve {}\ncoeffs {}\nbase {}\nbad primes of 6*disc {}\nrank {}{} generators {} torsion {}",
        loaded.spec.name,
        c.join(" "),
        loaded.ctx.base(),
        loaded
            .spec
            .form
            .bad_primes()
            .map(|v| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default(),
        basis.rank(),
        if basis.is_verified() { "" } else { " (lower bound)" },
        if gens.is_empty() { "-".to_string() } else { gens.join(" ") },
        basis.torsion().len()
    )
}

fn detmethod(args: &DetArgs) -> Result<Outcome> {
    if args.bound < 3 {
        return Err(config(format!("B = {} must be at least 3", args.bound)));
    }
    dimension_formula(args.a, args.b, args.m).map_err(|e| config(e.to_string()))?;
    if (args.b as u64) < (args.m as u64).pow(2) {
        return Err(config(format!("b = {} must be at least m^2", args.b)));
    }
    let loaded = load_curve(&args.common)?;
    let basis = load_basis(&loaded, &args.common, &args.basis)?;
    let report = run_bound(
        &loaded.ctx,
        &basis,
        args.bound,
        args.m,
        Some((args.a, args.b)),
        args.height_exp,
        args.c0,
        args.force_prime,
    )?;
    let name = format!("{}_detmethod_m{}_a{}_b{}_B{}.cert", loaded.spec.name, args.m, args.a, args.b, args.bound);
    let mut out = Outcome { ok: report.ok(), ..Default::default() };
    let text = report.certificate_text(&header(&loaded, &basis));
    write(&mut out, &args.common.out, &name, &text)?;
    if !out.ok {
        out.failures.push(format!("certificate {} records failing buckets", out.written[0].display()));
    }
    let buckets: usize = report.certificates.iter().map(|c| c.buckets.len()).sum();
    let max_bucket = report.certificates.iter().map(|c| c.max_bucket()).max().unwrap_or(0);
    println!(
        "classes {} buckets {} max bucket {} E {} A {:.6} result {}",
        report.certificates.len(),
        buckets,
        max_bucket,
        report.certificates.first().map_or(0, |c| c.e),
        report.height_exp,
        if out.ok { "OK" } else { "FAIL" }
    );
    Ok(out)
}

fn lattice(args: &LatticeArgs) -> Result<Outcome> {
    if args.table.windows(2).any(|w| w[0] >= w[1]) || args.table.iter().any(|&b| b < 2) {
        return Err(config("bounds must be at least 2 and strictly increasing"));
    }
    let loaded = load_curve(&args.common)?;
    let basis = load_basis(&loaded, &args.common, &args.basis)?;
    let rows = growth_report(&loaded.ctx, &basis, &args.table, args.c_cal)?;
    let mut out = Outcome { ok: true, ..Default::default() };
    let mut csv = format!("{}\n", growth_csv_header());
    for r in &rows {
        csv += &r.csv_row();
        csv.push('\n');
        if !r.ok() {
            out.ok = false;
            out.failures.push(format!("B = {}: N = {} exceeds the lattice bound", r.bound, r.count));
        }
    }
    print!("{csv}");
    write(&mut out, &args.common.out, &format!("{}_growth.csv", loaded.spec.name), &csv)?;

    let form = HeightForm::from_basis(&basis)?;
    let minima = successive_minima(&form)?;
    let mut text = String::from("successive minima\n");
    for (m, w) in minima.minima.iter().zip(&minima.witnesses) {
        let w: Vec<String> = w.iter().map(|x| x.to_string()).collect();
        text += &format!("{m:.10} ({})\n", w.join(" "));
    }
    text += "davenport\nrho,count,ambiguous,bound,ok\n";
    for &b in &args.table {
        let rho = args.c_cal * (b as f64).ln();
        let d = davenport_check(&form, rho)?;
        text += &format!("{rho:.6},{},{},{:.6},{}\n", d.count, d.ambiguous, d.bound, d.ok);
        if !d.ok {
            out.ok = false;
            out.failures.push(format!("Davenport bound fails at rho = {rho}"));
        }
    }
    let disc: BigInt = integral_discriminant(&loaded.ctx);
    text += &format!("discriminant {disc}\n");
    text += &david_report(&minima, &disc)?.render();
    write(&mut out, &args.common.out, &format!("{}_lattice.txt", loaded.spec.name), &text)?;
    Ok(out)
}

fn theorem(args: &TheoremArgs) -> Result<Outcome> {
    let bounds = bounds_of(args.bound, &args.table)?;
    if let Some(b) = bounds.iter().find(|&&b| b < 3) {
        return Err(config(format!("B = {b} must be at least 3")));
    }
    let loaded = load_curve(&args.common)?;
    let basis = load_basis(&loaded, &args.common, &args.basis)?;
    let mut out = Outcome { ok: true, ..Default::default() };
    let mut csv = format!("{}\n", TheoremReport::csv_header());
    for &b in &bounds {
        let report = run_bound(&loaded.ctx, &basis, b, args.m, None, args.height_exp, args.c0, None)?;
        csv += &report.csv_row();
        csv.push('\n');
        let name = format!("{}_theorem_m{}_B{b}.cert", loaded.spec.name, args.m);
        write(&mut out, &args.common.out, &name, &report.certificate_text(&header(&loaded, &basis)))?;
        if !report.ok() {
            out.ok = false;
            out.failures.push(format!("certificate {name} records failing buckets"));
        }
    }
    print!("{csv}");
    write(&mut out, &args.common.out, &format!("{}_theorem_m{}.csv", loaded.spec.name, args.m), &csv)?;
    Ok(out)
}

/// Applies the worker count from the environment, if set.
pub fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(config(format!("{WORKERS_ENV} must be positive")));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    configure_workers()?;
    match &cli.command {
        Command::Points(a) => points(a),
        Command::Heights(a) => heights(a),
        Command::Descent(a) => descent(a),
        Command::Detmethod(a) => detmethod(a),
        Command::Lattice(a) => lattice(a),
        Command::Theorem(a) => theorem(a),
    }
}

/// Exit status for a finished run: 0 when every invariant held, 1 on an
/// invariant failure or runtime error, 2 on a configuration error.
pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(o) if o.ok => 0,
        Ok(_) => 1,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => 2,
        Err(_) => 1,
    }
}
