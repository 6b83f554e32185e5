//! Command-line front end for the lift-and-project engine: instance
//! generation, optimization and membership across the operator hierarchy,
//! rank computation, the symmetric-recurrence profiles, dual-cone checks,
//! and certificate production and verification.
//!
//! Every run prints at least one machine-readable `RESULT <key>=<value>`
//! line.  Exit codes: 0 success, 2 usage or input errors, 3 size-guard
//! refusals, 4 inconclusive numerical verdicts (never reported as silent
//! success).  Guard limits and the semidefinite solver tolerance accept
//! environment overrides (`LIFTPROJ_PARAM_BUDGET`,
//! `LIFTPROJ_PARTITION_GUARD`, `LIFTPROJ_SUBSET_GUARD`,
//! `LIFTPROJ_SDP_EPS`).

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};

use liftproj::cone::{
    self, gen_box, gen_cross, gen_frac, gen_majority, gen_matching, HCone,
};
use liftproj::dual::{
    diag_in_gen_cone, diag_in_gen_cone_psd, dual_member, gen_cone_member, skew_check,
    GenConeMembership, GenVariant, ShiftedDiagVerdict, SkewCheck,
};
use liftproj::error::{Error, Result};
use liftproj::lifted::{
    build_lifted, inequality_rank, n_member, n_optimize, ntilde0_member, ntilde0_optimize,
    verify_certificate, cone_rank, Membership, OpKind, RankResult,
};
use liftproj::linalg::{parse_rmat, render_rmat, RVec, SymMat};
use liftproj::nplus::{
    nplus_member, nplus_optimize, nplus_rank_certify, parse_psd_certificate,
    replacement_certificate, verify_mplus, Feasibility, MPlusCheck, PlusOutcome, RankCertify,
    ReplacementOutcome,
};
use liftproj::rational::Rational;
use liftproj::recurrence::{
    closed_form_check, interlacing_suite, level_profile, recurrence_rank, render_profile_csv,
};

#[derive(Parser)]
#[command(
    name = "liftproj",
    version,
    about = "Lift-and-project relaxations of 0-1 polytopes: exact polyhedral \
             and semidefinite operators, ranks, recurrences, and certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a cone instance and write its row description.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Maximize an objective over a level-r relaxation slice.
    Optimize {
        /// Cone description file.
        #[arg(long)]
        cone: PathBuf,
        /// Operator: n, n0, ntilde0, or nplus.
        #[arg(long)]
        op: String,
        /// Relaxation level.
        #[arg(long)]
        r: usize,
        /// Objective: `ones`, `unit:i`, or comma-separated rationals of
        /// length d+1 (homogenizing coordinate first).
        #[arg(long)]
        obj: String,
    },
    /// Decide membership of a point in a level-r relaxation.
    Member {
        #[arg(long)]
        cone: PathBuf,
        /// Operator: n, n0, ntilde0, or nplus.
        #[arg(long)]
        op: String,
        #[arg(long)]
        r: usize,
        /// Point: `center` for (1, 1/2, …, 1/2) or comma-separated
        /// rationals of length d+1 (homogenizing coordinate first).
        #[arg(long)]
        point: String,
        /// For n/n0 members: write the replayable lifted assignment here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Inequality or hull rank under an operator; with `--op nplus` the
    /// face-decomposition certificate at a fixed level.
    Rank {
        #[arg(long)]
        cone: PathBuf,
        /// Operator: n, n0 (rank search), or nplus (certify at level --r).
        #[arg(long)]
        op: String,
        /// Inequality coefficients over x₁..x_d, comma-separated.
        #[arg(long)]
        ineq: Option<String>,
        /// Right-hand side of the inequality (times x₀).
        #[arg(long)]
        rhs: Option<String>,
        /// Largest level tried in rank searches.
        #[arg(long, default_value_t = 8)]
        r_max: usize,
        /// Level for nplus certification.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Symmetric-point recurrence: ranks and closed form by default,
    /// level profiles and the exhaustive inequality checks on request.
    Recurrence {
        /// Even dimension ≥ 4.
        #[arg(long)]
        d: usize,
        /// Emit the per-level value/bound profile as CSV.
        #[arg(long)]
        profile: bool,
        /// Run the exhaustive recurrence inequality suite.
        #[arg(long)]
        checks: bool,
        /// Print CSV values as exact rationals instead of decimals.
        #[arg(long)]
        exact: bool,
        /// Largest level for --checks (default d/2).
        #[arg(long)]
        r_max: Option<usize>,
        /// Output file for --profile (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dual-side analysis of the matrix cones behind the operators.
    Duality {
        #[command(subcommand)]
        check: DualityCheck,
    },
    /// Build the exact rank-one-plus-slack certificate for a slice point.
    Certify {
        #[arg(long)]
        cone: PathBuf,
        /// Point: `center` or comma-separated rationals of length d+1.
        #[arg(long)]
        point: String,
        /// Output file for the certificate (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-verify a certificate file against a cone, exactly by default
    /// for lifted assignments; `--exact` switches the psd check from
    /// floating eigenvalues to rational factorization.
    Verify {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Majority cone: x(S) ≤ (d/2)x₀ over all (d/2+1)-subsets; even d.
    Majority {
        #[arg(long)]
        d: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Box with the single cut Σx ≥ p (complemented cross-polytope corner).
    Cross {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fractional stable-set relaxation; complete graph on n vertices by
    /// default, or an explicit `--edges 1-2,2-3,…` list.
    Frac {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fractional matching relaxation of the complete graph on n vertices.
    Matching {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Unit box in dimension d.
    #[command(name = "box")]
    BoxCone {
        #[arg(long)]
        d: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DualityCheck {
    /// Are all elementary skew-symmetric matrices generated?  Holding
    /// implies the unsymmetrized operator matches the symmetric one.
    Skew {
        #[arg(long)]
        cone: PathBuf,
    },
    /// Membership of a matrix in the generated cone plus tie complement.
    Member {
        #[arg(long)]
        cone: PathBuf,
        /// Matrix file: one row per line, exact rationals.
        #[arg(long)]
        matrix: PathBuf,
        /// `sym` (default) or `nonsym`.
        #[arg(long, default_value = "sym")]
        variant: String,
    },
    /// Dual-side test for a valid level-one lift matrix.
    Dualmember {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Decomposability of Diag(s): exact by default, `--psd` allows an
    /// additional semidefinite summand (decided to solver tolerance).
    Diag {
        #[arg(long)]
        cone: PathBuf,
        /// Comma-separated rationals of length d+1.
        #[arg(long)]
        s: String,
        #[arg(long)]
        psd: bool,
    },
}

fn result(key: &str, value: impl Display) {
    println!("RESULT {key}={value}");
}

fn fmt_value(v: f64) -> String {
    format!("{v:.12}")
}

fn fmt_margin(v: f64) -> String {
    format!("{v:.6e}")
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_cone(path: &Path) -> Result<HCone> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    HCone::parse(&text)
}

fn parse_rationals(spec: &str) -> Result<RVec> {
    spec.split(',')
        .map(|t| Rational::from_str(t.trim()))
        .collect()
}

/// Objective over the homogeneous coordinates: `ones` = (0, e),
/// `unit:i` = e_i, or a literal list of length d+1.
fn parse_objective(spec: &str, d: usize) -> Result<RVec> {
    if spec == "ones" {
        let mut c = vec![Rational::zero(); d + 1];
        for ci in c.iter_mut().skip(1) {
            *ci = Rational::one();
        }
        return Ok(c);
    }
    if let Some(i) = spec.strip_prefix("unit:") {
        let i: usize = i
            .parse()
            .map_err(|_| Error::Parse(format!("bad unit index '{i}'")))?;
        if i > d {
            return Err(Error::Parse(format!("unit index {i} exceeds d = {d}")));
        }
        let mut c = vec![Rational::zero(); d + 1];
        c[i] = Rational::one();
        return Ok(c);
    }
    let c = parse_rationals(spec)?;
    if c.len() != d + 1 {
        return Err(Error::Dimension(format!(
            "objective has {} entries, want {}",
            c.len(),
            d + 1
        )));
    }
    Ok(c)
}

/// Homogeneous point: `center` = (1, 1/2, …), or a literal list of
/// length d+1.
fn parse_point(spec: &str, d: usize) -> Result<RVec> {
    if spec == "center" {
        let mut x = vec![Rational::one()];
        x.extend(std::iter::repeat_with(|| Rational::new(1, 2)).take(d));
        return Ok(x);
    }
    let x = parse_rationals(spec)?;
    if x.len() != d + 1 {
        return Err(Error::Dimension(format!(
            "point has {} entries, want {}",
            x.len(),
            d + 1
        )));
    }
    Ok(x)
}

fn parse_edges(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(|pair| {
            let mut it = pair.trim().split('-');
            let u = it.next().and_then(|v| v.parse().ok());
            let v = it.next().and_then(|v| v.parse().ok());
            match (u, v, it.next()) {
                (Some(u), Some(v), None) => Ok((u, v)),
                _ => Err(Error::Parse(format!("bad edge '{pair}', want 'u-v'"))),
            }
        })
        .collect()
}

fn render_vec(v: &[Rational]) -> String {
    v.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")
}

fn run_gen(family: Family) -> Result<()> {
    let (k, output) = match family {
        Family::Majority { d, output } => (gen_majority(d)?, output),
        Family::Cross { d, p, output } => (gen_cross(d, p)?, output),
        Family::Frac { n, edges, output } => {
            let edges = match edges {
                Some(spec) => parse_edges(&spec)?,
                None => cone::complete_graph_edges(n),
            };
            (gen_frac(n, &edges)?, output)
        }
        Family::Matching { n, output } => (gen_matching(n)?, output),
        Family::BoxCone { d, output } => (gen_box(d)?, output),
    };
    emit(&output, &k.render())?;
    result("d", k.d());
    result("rows", k.n_rows());
    Ok(())
}

fn run_optimize(cone: &Path, op: &str, r: usize, obj: &str) -> Result<()> {
    let k = load_cone(cone)?;
    let c = parse_objective(obj, k.d())?;
    match op {
        "n" | "n0" => {
            let kind = OpKind::parse(op)?;
            match n_optimize(&k, r, kind, &c)? {
                Some(v) => result("value", v),
                None => result("empty", true),
            }
        }
        "ntilde0" => match ntilde0_optimize(&k, r, &c)? {
            Some(v) => result("value", v),
            None => result("empty", true),
        },
        "nplus" => match nplus_optimize(&k, r, &c)? {
            PlusOutcome::Value(v) => result("value", fmt_value(v)),
            PlusOutcome::Empty { margin } => {
                result("empty", true);
                result("margin", fmt_margin(margin));
            }
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown operator '{other}' (want n, n0, ntilde0, nplus)"
            )))
        }
    }
    Ok(())
}

fn run_member(
    cone: &Path,
    op: &str,
    r: usize,
    point: &str,
    cert_out: &Option<PathBuf>,
) -> Result<()> {
    let k = load_cone(cone)?;
    let x = parse_point(point, k.d())?;
    match op {
        "n" | "n0" => {
            let kind = OpKind::parse(op)?;
            match n_member(&k, r, kind, &x)? {
                Membership::In { assignment } => {
                    result("member", true);
                    if let Some(path) = cert_out {
                        let sys = build_lifted(&k, r, kind)?;
                        std::fs::write(path, sys.dump_assignment(&assignment))
                            .map_err(Error::Io)?;
                    }
                }
                Membership::Out { separating } => {
                    result("member", false);
                    println!("separating {}", render_vec(&separating));
                }
            }
        }
        "ntilde0" => {
            if cert_out.is_some() {
                return Err(Error::Domain(
                    "certificate output is only available for n and n0".into(),
                ));
            }
            result("member", ntilde0_member(&k, r, &x)?);
        }
        "nplus" => {
            if cert_out.is_some() {
                return Err(Error::Domain(
                    "certificate output is only available for n and n0".into(),
                ));
            }
            match nplus_member(&k, r, &x)? {
                Feasibility::Nonempty { margin } => {
                    result("member", true);
                    result("margin", fmt_margin(margin));
                }
                Feasibility::Empty { margin } => {
                    result("member", false);
                    result("margin", fmt_margin(margin));
                }
            }
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown operator '{other}' (want n, n0, ntilde0, nplus)"
            )))
        }
    }
    Ok(())
}

fn run_rank(
    cone: &Path,
    op: &str,
    ineq: &Option<String>,
    rhs: &Option<String>,
    r_max: usize,
    r: Option<usize>,
) -> Result<()> {
    let k = load_cone(cone)?;
    let parsed_ineq = match (ineq, rhs) {
        (Some(a), Some(b)) => {
            let a = parse_rationals(a)?;
            if a.len() != k.d() {
                return Err(Error::Dimension(format!(
                    "inequality has {} coefficients, want d = {}",
                    a.len(),
                    k.d()
                )));
            }
            Some((a, Rational::from_str(b)?))
        }
        (None, None) => None,
        _ => return Err(Error::Parse("--ineq and --rhs go together".into())),
    };
    match op {
        "n" | "n0" => {
            let kind = OpKind::parse(op)?;
            let outcome = match &parsed_ineq {
                Some((a, alpha)) => inequality_rank(&k, a, alpha, kind, r_max)?,
                None => cone_rank(&k, kind, r_max)?,
            };
            match outcome {
                RankResult::Rank(r) => result("rank", r),
                RankResult::Exceeds => result("rank", format!("exceeds_{r_max}")),
            }
        }
        "nplus" => {
            let (a, alpha) = parsed_ineq
                .ok_or_else(|| Error::Parse("nplus certification needs --ineq/--rhs".into()))?;
            let r =
                r.ok_or_else(|| Error::Parse("nplus certification needs --r".into()))?;
            match nplus_rank_certify(&k, &a, &alpha, r)? {
                RankCertify::Certified => result("certified", true),
                RankCertify::NotCertified { face } => {
                    result("certified", false);
                    println!("face {face:?}");
                }
            }
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown operator '{other}' (want n, n0, nplus)"
            )))
        }
    }
    Ok(())
}

fn run_recurrence(
    d: usize,
    profile: bool,
    checks: bool,
    exact: bool,
    r_max: Option<usize>,
    output: &Option<PathBuf>,
) -> Result<()> {
    if profile {
        let rows = level_profile(d)?;
        emit(output, &render_profile_csv(&rows, exact))?;
        result("rows", rows.len());
        let last = rows.last().expect("profile has the top level");
        result("c_plus_final", &last.c_plus);
        result("c_final", &last.c);
        return Ok(());
    }
    if checks {
        let report = interlacing_suite(d, r_max.unwrap_or(d / 2))?;
        for v in &report.violations {
            println!("violation {v}");
        }
        result("checks", report.checks);
        result("violations", report.violations.len());
        return Ok(());
    }
    result("rank_n", recurrence_rank(d, OpKind::N)?);
    result("rank_nplus", recurrence_rank(d, OpKind::NPlus)?);
    let cf = closed_form_check(d)?;
    result("closed_form", &cf.closed_form);
    result("closed_form_ok", cf.matches());
    Ok(())
}

fn run_duality(check: DualityCheck) -> Result<()> {
    match check {
        DualityCheck::Skew { cone } => {
            let k = load_cone(&cone)?;
            match skew_check(&k)? {
                SkewCheck::Holds => result("skew", "holds"),
                SkewCheck::Fails { i, j } => {
                    result("skew", "fails");
                    result("pair", format!("{i},{j}"));
                }
            }
        }
        DualityCheck::Member { cone, matrix, variant } => {
            let k = load_cone(&cone)?;
            let text = std::fs::read_to_string(&matrix).map_err(Error::Io)?;
            let s = parse_rmat(&text)?;
            let variant = match variant.as_str() {
                "sym" => GenVariant::Symmetric,
                "nonsym" => GenVariant::Nonsymmetric,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown variant '{other}' (want sym, nonsym)"
                    )))
                }
            };
            match gen_cone_member(&k, &s, variant)? {
                GenConeMembership::In { .. } => result("member", true),
                GenConeMembership::Out { separating } => {
                    result("member", false);
                    print!("{}", render_rmat(&separating));
                }
            }
        }
        DualityCheck::Dualmember { cone, matrix } => {
            let k = load_cone(&cone)?;
            let text = std::fs::read_to_string(&matrix).map_err(Error::Io)?;
            let m = parse_rmat(&text)?;
            let mut rows = Vec::with_capacity(m.nrows());
            for i in 0..m.nrows() {
                rows.push(m.row(i).to_vec());
            }
            let y = SymMat::from_rows(rows)?;
            result("member", dual_member(&k, &y));
        }
        DualityCheck::Diag { cone, s, psd } => {
            let k = load_cone(&cone)?;
            let s = parse_rationals(&s)?;
            if s.len() != k.d() + 1 {
                return Err(Error::Dimension(format!(
                    "diagonal has {} entries, want {}",
                    s.len(),
                    k.d() + 1
                )));
            }
            if psd {
                match diag_in_gen_cone_psd(&k, &s)? {
                    ShiftedDiagVerdict::Holds { margin } => {
                        result("member", true);
                        result("margin", fmt_margin(margin));
                    }
                    ShiftedDiagVerdict::Fails { margin } => {
                        result("member", false);
                        result("margin", fmt_margin(margin));
                    }
                }
            } else {
                result("member", diag_in_gen_cone(&k, &s)?);
            }
        }
    }
    Ok(())
}

fn run_certify(cone: &Path, point: &str, output: &Option<PathBuf>) -> Result<()> {
    let k = load_cone(cone)?;
    let x = parse_point(point, k.d())?;
    if !x[0].is_positive() {
        return Err(Error::Domain(
            "certification needs a positive homogenizing coordinate".into(),
        ));
    }
    let slice: RVec = x[1..].iter().map(|v| v / &x[0]).collect();
    match replacement_certificate(&k, &slice)? {
        ReplacementOutcome::Certificate(cert) => {
            emit(output, &cert.render())?;
            result("certificate", "valid");
        }
        ReplacementOutcome::HypothesisViolated { j } => {
            result("certificate", "violated");
            result("coordinate", j);
        }
    }
    Ok(())
}

fn run_verify(cone: &Path, cert: &Path, exact: bool) -> Result<()> {
    let k = load_cone(cone)?;
    let text = std::fs::read_to_string(cert).map_err(Error::Io)?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    if first == Some("psd") {
        let y = parse_psd_certificate(&text)?;
        match verify_mplus(&k, &y, exact)? {
            MPlusCheck::Valid => result("verified", true),
            MPlusCheck::Violated(v) => {
                result("verified", false);
                println!("violation {v:?}");
            }
        }
        return Ok(());
    }
    let summary = verify_certificate(&k, &text)?;
    result("verified", true);
    result("kind", summary.kind.as_str());
    result("r", summary.r);
    result("point", render_vec(&summary.point).replace(' ', ","));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { family } => run_gen(family),
        Command::Optimize { cone, op, r, obj } => run_optimize(&cone, &op, r, &obj),
        Command::Member { cone, op, r, point, cert_out } => {
            run_member(&cone, &op, r, &point, &cert_out)
        }
        Command::Rank { cone, op, ineq, rhs, r_max, r } => {
            run_rank(&cone, &op, &ineq, &rhs, r_max, r)
        }
        Command::Recurrence { d, profile, checks, exact, r_max, output } => {
            run_recurrence(d, profile, checks, exact, r_max, &output)
        }
        Command::Duality { check } => run_duality(check),
        Command::Certify { cone, point, output } => run_certify(&cone, &point, &output),
        Command::Verify { cone, cert, exact } => run_verify(&cone, &cert, exact),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Guard(_) => 3,
            Error::Numerical(_) => 4,
            _ => 2,
        };
        std::process::exit(code);
    }
}
