//! `mlab`: command-line front end for the Melnikov toolkit.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use mlab_core::ode::{detect_limit_cycles, displacement_map, OdeError, OdeSettings};
use mlab_core::perturbation::PerturbationFile;
use mlab_core::picard_fuchs::{pf_residual, pf_system, riccati_residual, PfOrder, RatioKind};
use mlab_core::quadrature::{MonomialIndex, Quadrature};
use mlab_core::reduction::{melnikov_symbolic, recurrence_residual, reduce_monomial, verify_degrees, Recurrence, ReductionError};
use mlab_core::scalar::{int, parse_rational, rat};
use mlab_core::synthesis::{annihilator_residual, eliminate_and_form_f1, synthesize_l};
use mlab_core::zeros::{melnikov_numeric, melnikov_symbolic_value, scan_zeros, stress, theorem_bound, ScanSettings, ZeroKind};
use mlab_core::{AnnulusId, FamilyCase, FamilyKind, PerturbationSpec};

#[derive(Parser)]
#[command(name = "mlab", version, about = "Abelian integrals and Melnikov zeros for piecewise quadratic polycycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the families, their critical points and period annuli.
    Families {
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Evaluate one J_{i,j}(h) or its derivative by quadrature.
    Integral {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        /// Order of the h-derivative (0 or 1).
        #[arg(long, default_value_t = 0)]
        derivative: usize,
    },
    /// Numerical residual suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        samples: Option<usize>,
        /// Relative tolerance; defaults depend on the suite.
        #[arg(long)]
        tol: Option<f64>,
        /// Tolerance of the second-order Picard-Fuchs checks.
        #[arg(long, default_value_t = 1e-6)]
        tol_second: f64,
        /// Degree used by the annihilator suite, or the largest i+j of the recurrence suite.
        #[arg(long)]
        n: Option<usize>,
        /// Random perturbations in the annihilator suite.
        #[arg(long, default_value_t = 1)]
        perturbations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON summary here as well.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Reduce a monomial integral or a perturbation's Melnikov function to generators.
    Reduce {
        #[command(flatten)]
        family: FamilyArgs,
        /// Monomial as `i,j`.
        #[arg(long, conflicts_with = "pert")]
        monomial: Option<String>,
        #[arg(long)]
        pert: Option<PathBuf>,
    },
    /// Evaluate M(h) or scan it for zeros.
    Melnikov {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        pert: PathBuf,
        /// Evaluate at this energy only.
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Upper bound on the number of limit cycles.
    Bound {
        #[arg(long, value_enum)]
        family: Kind,
        #[arg(long)]
        n: usize,
    },
    /// Compare the displacement map of the piecewise flow with M(h).
    Xcheck {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        pert: PathBuf,
        #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
        eps: f64,
        /// Energies in the displacement scan.
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Random perturbations scanned against the bound.
    Stress {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Pf,
    Recurrence,
    Riccati,
    Annihilator,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Triangle,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnnulusArg {
    Right,
    Left,
    Sole,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Kind,
    /// Segment parameter as a rational, e.g. `1/2`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, value_enum)]
    annulus: Option<AnnulusArg>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    refine_tol: f64,
}

impl ScanArgs {
    fn settings(&self) -> ScanSettings {
        ScanSettings { grid_size: self.grid, refine_tol: self.refine_tol, ..Default::default() }
    }
}

enum Failure {
    Usage(String),
    Failed(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> Failure {
    Failure::Failed(e.to_string())
}

impl FamilyArgs {
    fn case(&self) -> Result<FamilyCase, Failure> {
        let lambda = |default: i64, den: i64| -> Result<_, Failure> {
            match &self.lambda {
                Some(s) => parse_rational(s).ok_or_else(|| usage(format!("cannot parse lambda {s:?}"))),
                None => Ok(rat(default, den)),
            }
        };
        if self.lambda.is_some() && matches!(self.family, Kind::Parabolic | Kind::Triangle) {
            return Err(usage("this family has no parameter"));
        }
        match self.family {
            Kind::Elliptic => FamilyCase::elliptic(lambda(1, 1)?).map_err(usage),
            Kind::Hyperbolic => FamilyCase::hyperbolic(lambda(-1, 2)?).map_err(usage),
            Kind::Parabolic => Ok(FamilyCase::parabolic()),
            Kind::Triangle => Ok(FamilyCase::triangle()),
        }
    }

    fn resolve(&self) -> Result<(FamilyCase, AnnulusId), Failure> {
        let case = self.case()?;
        let id = match self.annulus {
            None => case.primary_annulus().id,
            Some(AnnulusArg::Right) => AnnulusId::Right,
            Some(AnnulusArg::Left) => AnnulusId::Left,
            Some(AnnulusArg::Sole) => AnnulusId::Sole,
        };
        case.annulus(id).map_err(usage)?;
        Ok((case, id))
    }
}

fn kind_of(k: Kind) -> FamilyKind {
    match k {
        Kind::Elliptic => FamilyKind::EllipticSegment,
        Kind::Hyperbolic => FamilyKind::HyperbolicSegment,
        Kind::Parabolic => FamilyKind::ParabolicSegment,
        Kind::Triangle => FamilyKind::HamiltonianTriangle,
    }
}

fn read_perturbation(path: &Path) -> Result<PerturbationSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: PerturbationFile = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    PerturbationSpec::from_file(&file).map_err(usage)
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn emit_json(value: &Value, path: Option<&Path>) -> CmdResult {
    let text = pretty(value);
    println!("{text}");
    if let Some(p) = path {
        output::write_file(p, &(text + "\n")).map_err(failed)?;
    }
    Ok(())
}

fn families(lambda: Option<String>) -> CmdResult {
    let l = match &lambda {
        Some(s) => Some(parse_rational(s).ok_or_else(|| usage(format!("cannot parse lambda {s:?}")))?),
        None => None,
    };
    let mut cases = Vec::new();
    match &l {
        Some(v) => cases.push(FamilyCase::segment(v.clone()).map_err(usage)?),
        None => {
            cases.push(FamilyCase::elliptic(int(1)).expect("in range"));
            cases.push(FamilyCase::hyperbolic(rat(-1, 2)).expect("in range"));
            cases.push(FamilyCase::parabolic());
            cases.push(FamilyCase::triangle());
        }
    }
    let mut list = Vec::new();
    for case in &cases {
        println!("{}", case.label());
        println!("  H = ({}) + ({}) y^2", case.a_poly().to_string().replace('h', "x"), case.c_poly().to_string().replace('h', "x"));
        for p in case.critical_points() {
            println!("  {:?} at ({:.6}, {:.6}), H = {}", p.kind, p.x, p.y, p.energy_exact);
        }
        let mut annuli = Vec::new();
        for a in case.annuli() {
            let min = if case.kind() == FamilyKind::ParabolicSegment { 2 } else { 3 };
            let bound = theorem_bound(case.kind(), min).map_err(failed)?;
            println!("  annulus {}: ({}, {}), bound at n = {min}: {bound}", a.id, a.lower, a.upper);
            annuli.push(json!({"id": a.id, "lower": a.lower.to_string(), "upper": a.upper.to_string()}));
        }
        list.push(json!({"family": case.label(), "annuli": annuli}));
    }
    println!("{}", serde_json::to_string(&list).expect("serializable"));
    Ok(())
}

fn integral(fam: &FamilyArgs, i: usize, j: usize, h: f64, derivative: usize) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let quad = Quadrature::<f64>::with_defaults(&case, an).map_err(failed)?;
    let idx = MonomialIndex::new(i, j);
    let v = match derivative {
        0 => quad.j_integral(h, idx),
        1 => quad.j_derivative(h, idx),
        d => return Err(usage(format!("derivative order {d} is not supported"))),
    }
    .map_err(|e| usage(format!("h = {h}: {e}")))?;
    println!("{v:.17e}");
    Ok(())
}

#[derive(Serialize)]
struct Check {
    check: String,
    h: f64,
    residual: f64,
    tol: f64,
    pass: bool,
}

impl Check {
    fn new(check: impl Into<String>, h: f64, residual: f64, tol: f64) -> Self {
        Check { check: check.into(), h, residual, tol, pass: residual <= tol }
    }
}

fn summarize(suite: &str, case: &FamilyCase, checks: &[Check], extra: Value, path: Option<&Path>) -> CmdResult {
    for c in checks {
        let flag = if c.pass { "PASS" } else { "FAIL" };
        println!("{:<32} h={:<+.10} residual={:.3e} tol={:.1e} {flag}", c.check, c.h, c.residual, c.tol);
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    let max = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let summary = json!({
        "suite": suite,
        "family": case.label(),
        "checks": checks.len(),
        "failures": failures,
        "max_residual": max,
        "pass": failures == 0,
        "detail": extra,
    });
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    if let Some(p) = path {
        output::write_file(p, &(pretty(&summary) + "\n")).map_err(failed)?;
    }
    if failures == 0 {
        Ok(())
    } else {
        Err(failed(format!("{failures} of {} checks failed", checks.len())))
    }
}

struct VerifyOpts {
    samples: Option<usize>,
    tol: Option<f64>,
    tol_second: f64,
    n: Option<usize>,
    perturbations: usize,
    seed: u64,
    json: Option<PathBuf>,
}

fn verify(suite: Suite, fam: &FamilyArgs, o: VerifyOpts) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let quad = Quadrature::<f64>::with_defaults(&case, an).map_err(failed)?;
    let iv = case.annulus(an).map_err(usage)?;
    let grid = |n: usize| iv.interior_grid::<f64>(n, 1e-3 * iv.length::<f64>());
    let json_path = o.json.as_deref();
    match suite {
        Suite::Pf => {
            let sys = pf_system(&case, an).map_err(usage)?;
            let tol = o.tol.unwrap_or(1e-8);
            let hs = grid(o.samples.unwrap_or(50));
            let checks: Vec<Check> = hs
                .par_iter()
                .map(|&h| {
                    let mut v = Vec::new();
                    for (name, order, t) in [("first-order", PfOrder::First, tol), ("second-order", PfOrder::Second, o.tol_second)] {
                        let r = pf_residual(&sys, &quad, h, order).map_err(failed)?;
                        v.push(Check::new(name, h, r.relative(), t));
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>, Failure>>()?
                .into_iter()
                .flatten()
                .collect();
            summarize("pf", &case, &checks, json!({"d1": sys.d1, "d2": sys.d2}), json_path)
        }
        Suite::Recurrence => {
            let tol = o.tol.unwrap_or(1e-8);
            let top = o.n.unwrap_or(4);
            let hs = grid(o.samples.unwrap_or(5));
            let mut jobs = Vec::new();
            for which in Recurrence::ALL.into_iter().filter(|r| r.applies_to(case.kind())) {
                for d in 0..=top {
                    for i in 0..=d {
                        for &h in &hs {
                            jobs.push((which, MonomialIndex::new(i, d - i), h));
                        }
                    }
                }
            }
            let checks: Vec<Check> = jobs
                .par_iter()
                .map(|&(which, idx, h)| match recurrence_residual(&quad, h, idx, which) {
                    Ok(r) => Ok(Some(Check::new(format!("{which:?} {idx}"), h, r.relative(), tol))),
                    Err(ReductionError::NegativeIndex | ReductionError::OffIdentity(_)) => Ok(None),
                    Err(e) => Err(failed(e)),
                })
                .collect::<Result<Vec<_>, Failure>>()?
                .into_iter()
                .flatten()
                .collect();
            summarize("recurrence", &case, &checks, json!({"max_degree": top}), json_path)
        }
        Suite::Riccati => {
            let sys = pf_system(&case, an).map_err(usage)?;
            let tol = o.tol.unwrap_or(1e-5);
            let hs = grid(o.samples.unwrap_or(20));
            let mut kinds = vec![(sys.omega.name, RatioKind::Omega)];
            if let Some(nu) = &sys.nu {
                kinds.push((nu.name, RatioKind::Nu));
            }
            let checks: Vec<Check> = hs
                .par_iter()
                .map(|&h| {
                    kinds
                        .iter()
                        .map(|&(name, k)| {
                            let r = riccati_residual(&sys, &quad, h, k).map_err(failed)?;
                            Ok(Check::new(name, h, r.relative(), tol))
                        })
                        .collect::<Result<Vec<_>, Failure>>()
                })
                .collect::<Result<Vec<_>, Failure>>()?
                .into_iter()
                .flatten()
                .collect();
            summarize("riccati", &case, &checks, json!({}), json_path)
        }
        Suite::Annihilator => {
            let sys = pf_system(&case, an).map_err(usage)?;
            let tol = o.tol.unwrap_or(1e-5);
            let n = o.n.unwrap_or(3);
            let hs = grid(o.samples.unwrap_or(30));
            let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
            let mut checks = Vec::new();
            let mut systems = Vec::new();
            for k in 0..o.perturbations {
                let pert = PerturbationSpec::random(n, &mut rng);
                let comb = melnikov_symbolic(&case, an, &pert).map_err(failed)?;
                let elim = eliminate_and_form_f1(&sys, &comb, n).map_err(failed)?;
                let phi1 = elim.f1.phi1();
                let syn = synthesize_l(&sys, &phi1, n).map_err(failed)?;
                checks.push(Check::new(format!("#{k} degree ceilings"), f64::NAN, if syn.degrees_pass { 0.0 } else { 1.0 }, 0.0));
                let res: Vec<Check> = hs
                    .par_iter()
                    .map(|&h| {
                        let r = annihilator_residual(&quad, &syn.operator, &phi1, h).map_err(failed)?;
                        Ok(Check::new(format!("#{k} L Phi1"), h, r, tol))
                    })
                    .collect::<Result<_, Failure>>()?;
                checks.extend(res);
                systems.push(json!({
                    "equations": syn.equations,
                    "unknowns": syn.unknowns,
                    "nullity": syn.nullity,
                    "m2": syn.m2,
                    "deg_p2": syn.operator.p2.degree(),
                }));
            }
            summarize("annihilator", &case, &checks, json!({"n": n, "systems": systems}), json_path)
        }
    }
}

fn parse_monomial(s: &str) -> Result<MonomialIndex, Failure> {
    let bad = || usage(format!("monomial must be `i,j`, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(MonomialIndex::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn reduce(fam: &FamilyArgs, monomial: Option<String>, pert: Option<PathBuf>) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let (comb, n) = match (monomial, pert) {
        (Some(m), None) => {
            let idx = parse_monomial(&m)?;
            (reduce_monomial(&case, idx).map_err(usage)?, idx.degree())
        }
        (None, Some(p)) => {
            let spec = read_perturbation(&p)?;
            (melnikov_symbolic(&case, an, &spec).map_err(failed)?, spec.n)
        }
        _ => return Err(usage("give exactly one of --monomial or --pert")),
    };
    let report = verify_degrees(&comb, n);
    let pass = report.pass;
    emit_json(&json!({"family": case.label(), "combination": comb, "degrees": report}), None)?;
    if pass {
        Ok(())
    } else {
        Err(failed("degree ceilings exceeded"))
    }
}

fn melnikov(
    fam: &FamilyArgs,
    pert: &Path,
    h: Option<f64>,
    scan: &ScanArgs,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
    report_path: Option<PathBuf>,
) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let spec = read_perturbation(pert)?;
    let quad = Quadrature::<f64>::with_defaults(&case, an).map_err(failed)?;
    if let Some(h) = h {
        let comb = melnikov_symbolic(&case, an, &spec).map_err(failed)?;
        let sym = melnikov_symbolic_value(&comb, &quad, h).map_err(|e| usage(format!("h = {h}: {e}")))?;
        let num = melnikov_numeric(&quad, &spec, h).map_err(|e| usage(format!("h = {h}: {e}")))?;
        return emit_json(&json!({"family": case.label(), "h": h, "symbolic": sym, "numeric": num}), report_path.as_deref());
    }
    let report = scan_zeros(&case, &quad, &spec, &scan.settings()).map_err(usage)?;
    if let Some(p) = csv {
        output::write_file(&p, &output::melnikov_csv(&report.samples)).map_err(failed)?;
    }
    if let Some(p) = svg {
        output::write_file(&p, &output::melnikov_svg(&report)).map_err(failed)?;
    }
    let text = pretty(&report);
    match report_path {
        Some(p) => output::write_file(&p, &(text + "\n")).map_err(failed)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn xcheck(fam: &FamilyArgs, pert: &Path, eps: f64, points: usize, scan: &ScanArgs, json_path: Option<PathBuf>) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let spec = read_perturbation(pert)?;
    let quad = Quadrature::<f64>::with_defaults(&case, an).map_err(failed)?;
    let settings = OdeSettings::default();
    let report = scan_zeros(&case, &quad, &spec, &scan.settings()).map_err(usage)?;
    let comb = melnikov_symbolic(&case, an, &spec).map_err(failed)?;
    let iv = case.annulus(an).map_err(usage)?;
    let hs = iv.interior_grid::<f64>(points.max(2), 0.05 * iv.length::<f64>());
    let rows: Vec<(f64, Option<f64>, f64)> = hs
        .par_iter()
        .map(|&h| {
            let d = match displacement_map(&case, an, &spec, eps, h, &settings) {
                Ok(d) => Some(d),
                Err(OdeError::Escaped(_)) => None,
                Err(e) => return Err(failed(e)),
            };
            let m = melnikov_symbolic_value(&comb, &quad, h).map_err(failed)?;
            Ok((h, d, m))
        })
        .collect::<Result<_, Failure>>()?;
    let cycles = detect_limit_cycles(&case, &spec, eps, an, points.max(2), &settings).map_err(usage)?;
    let scale = rows.iter().fold(0f64, |a, r| a.max(r.2.abs()));
    let signed: Vec<f64> =
        rows.iter().filter(|r| r.2.abs() > 1e-6 * scale).filter_map(|r| r.1.map(|d| d * eps * r.2)).collect();
    let c0 = if signed.iter().filter(|v| **v > 0.0).count() * 2 >= signed.len() { 1 } else { -1 };
    let agree = signed.iter().all(|v| (*v > 0.0) == (c0 > 0));
    let tangencies = report.zeros.iter().filter(|z| z.kind == ZeroKind::TangencySuspect).count();
    let consistent = cycles.len() <= report.count_sign_changes + tangencies;
    for (h, d, m) in &rows {
        match d {
            Some(d) => println!("h={h:+.10} displacement={d:+.6e} M={m:+.6e}"),
            None => println!("h={h:+.10} displacement=escaped M={m:+.6e}"),
        }
    }
    let summary = json!({
        "family": case.label(),
        "eps": eps,
        "c0": c0,
        "sign_agreement": agree,
        "escaped": rows.iter().filter(|r| r.1.is_none()).count(),
        "cycles": cycles,
        "melnikov_zeros": report.zeros,
        "consistent": consistent,
    });
    emit_json(&summary, json_path.as_deref())?;
    if agree && consistent {
        Ok(())
    } else {
        Err(failed("displacement map disagrees with M"))
    }
}

fn run_stress(fam: &FamilyArgs, n: usize, count: usize, seed: u64, scan: &ScanArgs, json_path: Option<PathBuf>) -> CmdResult {
    let (case, an) = fam.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = stress::<f64, _>(&case, an, n, count, &mut rng, &scan.settings()).map_err(usage)?;
    for (k, r) in reports.iter().enumerate() {
        println!("#{k:<4} sign changes {:>3} / bound {} {}", r.count_sign_changes, r.bound, if r.within_bound { "ok" } else { "EXCEEDED" });
    }
    let worst = reports.iter().map(|r| r.count_sign_changes).max().unwrap_or(0);
    let exceeded = reports.iter().filter(|r| !r.within_bound).count();
    let bound = theorem_bound(case.kind(), n).map_err(usage)?;
    let summary = json!({
        "family": case.label(),
        "n": n,
        "count": reports.len(),
        "seed": seed,
        "bound": bound,
        "max_sign_changes": worst,
        "exceeded": exceeded,
        "pass": exceeded == 0,
    });
    emit_json(&summary, json_path.as_deref())?;
    if exceeded == 0 {
        Ok(())
    } else {
        Err(failed(format!("{exceeded} perturbations exceed the bound")))
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Families { lambda } => families(lambda),
        Command::Integral { family, i, j, h, derivative } => integral(&family, i, j, h, derivative),
        Command::Verify { suite, family, samples, tol, tol_second, n, perturbations, seed, json } => {
            verify(suite, &family, VerifyOpts { samples, tol, tol_second, n, perturbations, seed, json })
        }
        Command::Reduce { family, monomial, pert } => reduce(&family, monomial, pert),
        Command::Melnikov { family, pert, h, scan, csv, svg, report } => melnikov(&family, &pert, h, &scan, csv, svg, report),
        Command::Bound { family, n } => {
            println!("{}", theorem_bound(kind_of(family), n).map_err(usage)?);
            Ok(())
        }
        Command::Xcheck { family, pert, eps, points, scan, json } => xcheck(&family, &pert, eps, points, &scan, json),
        Command::Stress { family, n, count, seed, scan, json } => run_stress(&family, n, count, seed, &scan, json),
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("MLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: MLAB_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
