//! Command-line front end for certified 2^n-th Hilbert symbols.
//!
//! `symbol` computes one pairing [x, y] mod 2^n, `table` a pairing
//! matrix over a list of generators, `selfcheck` the seeded invariant
//! suites. Symbol and table values are recomputed at doubled guard
//! precision and reported only when the two runs agree.
//!
//! Exit codes: 0 success, 1 usage error, 2 path disagreement, 3
//! precision failure. JSON goes to standard output, diagnostics to
//! standard error, and repeated runs with the same flags and seed are
//! byte-identical.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hilsym_core::oracle::harness::{self, Level};
use hilsym_core::symbol::DEFAULT_GUARD;
use hilsym_core::{
    CoeffCtx, CoeffElem, Engine, Error, KnElem, Params, PreparedUnit, Series, SeriesCtx,
    SymbolValue,
};

mod parse;

use parse::parse_element;

// ==================================================================
// argument surface
// ==================================================================

#[derive(Parser)]
#[command(
    name = "hilsym",
    version,
    about = "Certified 2^n-th Hilbert symbols on cyclotomic layers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one symbol [x, y] mod 2^n.
    Symbol(SymbolArgs),
    /// Run the seeded invariant suites and print a pass/fail table.
    Selfcheck(SelfcheckArgs),
    /// Compute the matrix [g_i, g_j] mod 2^n over a generator list.
    Table(TableArgs),
}

#[derive(Args)]
struct SymbolArgs {
    /// Residue degree of the unramified base field, 1..=8.
    #[arg(long)]
    d: u32,
    /// Cyclotomic level; symbols are classes mod 2^n, n in 2..=6.
    #[arg(long)]
    n: u32,
    /// First argument: a principal-unit expression in t and w.
    #[arg(long)]
    x: String,
    /// Second argument: a principal-unit expression in t and w.
    #[arg(long)]
    y: String,
    /// Guard bits above the reported level (default 16, minimum 8).
    #[arg(long)]
    guard: Option<u32>,
    /// Output form.
    #[arg(long, value_enum, default_value = "text")]
    emit: Emit,
    /// Evaluation route; `both` cross-checks the two formulas.
    #[arg(long, value_enum, default_value = "both")]
    paths: PathsArg,
    /// Print the chosen polynomial lifts f, g on standard error.
    #[arg(long)]
    lift_out: bool,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Suite size: `fast` for a smoke pass, `full` for release counts.
    #[arg(long, value_enum, default_value = "fast")]
    level: LevelArg,
    /// Seed for all randomized draws; equal seeds give equal reports.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output form.
    #[arg(long, value_enum, default_value = "text")]
    emit: Emit,
}

#[derive(Args)]
struct TableArgs {
    /// Residue degree of the unramified base field, 1..=8.
    #[arg(long)]
    d: u32,
    /// Cyclotomic level; symbols are classes mod 2^n, n in 2..=6.
    #[arg(long)]
    n: u32,
    /// Comma-separated principal-unit expressions.
    #[arg(long)]
    gens: String,
    /// Guard bits above the reported level (default 16, minimum 8).
    #[arg(long)]
    guard: Option<u32>,
    /// Output form.
    #[arg(long, value_enum, default_value = "text")]
    emit: Emit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathsArg {
    Main,
    Cup,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

// ==================================================================
// failure classification
// ==================================================================

/// A diagnosed failure with its contracted exit code.
enum Failure {
    /// Bad flags, bad expressions, or mathematically inadmissible
    /// input (non-units, out-of-range parameters). Exit 1.
    Usage(String),
    /// The two evaluation routes disagreed. Exit 2.
    Paths(String),
    /// A value could not be certified at the requested precision, or
    /// the doubled-guard recheck disagreed. Exit 3.
    Precision(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Paths(_) => 2,
            Failure::Precision(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Paths(m) | Failure::Precision(m) => m,
        }
    }
}

fn classify(e: Error) -> Failure {
    let msg = e.to_string();
    match e {
        Error::PathDisagreement { .. } => Failure::Paths(msg),
        Error::GuardExhausted { .. }
        | Error::Integrality(_)
        | Error::PrecisionDisagreement { .. }
        | Error::WindowExhausted
        | Error::NotInvertible
        | Error::Internal(_) => Failure::Precision(msg),
        Error::Config(_)
        | Error::NotPrincipalUnit { .. }
        | Error::NotUnit
        | Error::Precondition(_) => Failure::Usage(msg),
    }
}

// ==================================================================
// symbol
// ==================================================================

fn run_symbol(a: &SymbolArgs) -> Result<i32, Failure> {
    let guard = a.guard.unwrap_or(DEFAULT_GUARD);
    let params = Params {
        d: a.d,
        n: a.n,
        guard,
    };
    let narrow = Engine::new(params).map_err(classify)?;
    let x = parse_element(&a.x, narrow.kn())
        .map_err(|e| Failure::Usage(format!("--x: {e}")))?;
    let y = parse_element(&a.y, narrow.kn())
        .map_err(|e| Failure::Usage(format!("--y: {e}")))?;

    if a.lift_out {
        let f = narrow.lift(&x).map_err(classify)?;
        let g = narrow.lift(&y).map_err(classify)?;
        eprintln!("f = {}", fmt_series(narrow.series(), &f));
        eprintln!("g = {}", fmt_series(narrow.series(), &g));
    }

    let route = |e: &Engine, u: &KnElem, v: &KnElem| match a.paths {
        PathsArg::Main => e.hilbert_symbol(u, v),
        PathsArg::Cup => e.symbol_via_cup(u, v),
        PathsArg::Both => e.symbol_pair(u, v),
    };
    let first = route(&narrow, &x, &y).map_err(classify)?;

    // the certification gate: recompute at doubled guard and require
    // bit agreement before reporting anything
    let wide = Engine::new(Params {
        guard: 2 * guard,
        ..params
    })
    .map_err(classify)?;
    let second = route(&wide, &wide.kn().lift_elem(&x), &wide.kn().lift_elem(&y))
        .map_err(classify)?;
    if first.value != second.value {
        return Err(classify(Error::PrecisionDisagreement {
            first: first.value,
            first_guard: guard,
            second: second.value,
            second_guard: 2 * guard,
        }));
    }

    emit_symbol(a, &first, guard);
    Ok(0)
}

fn emit_symbol(a: &SymbolArgs, s: &SymbolValue, guard: u32) {
    match a.emit {
        Emit::Json => {
            let obj = serde_json::json!({
                "symbol": s.value,
                "modulus": s.modulus,
                "n": a.n,
                "d": a.d,
                "guard_consumed": s.certificate.guard_consumed,
                "paths_agreed": s.certificate.paths_agreed,
                "seed": serde_json::Value::Null,
            });
            println!("{obj}");
        }
        Emit::Text => {
            println!("[x, y] = {} mod {}", s.value, s.modulus);
            let route = match a.paths {
                PathsArg::Main => "main route".to_string(),
                PathsArg::Cup => "cup-product route".to_string(),
                PathsArg::Both => format!(
                    "main route {}, cup-product route {}: agree",
                    s.value, s.value
                ),
            };
            println!("{route}; stable from guard {} to {}", guard, 2 * guard);
        }
    }
}

// ==================================================================
// selfcheck
// ==================================================================

fn run_selfcheck(a: &SelfcheckArgs) -> Result<i32, Failure> {
    let (level, name) = match a.level {
        LevelArg::Fast => (Level::Fast, "fast"),
        LevelArg::Full => (Level::Full, "full"),
    };
    let reports = harness::run_all(level, a.seed);
    let failed = reports.iter().filter(|r| !r.passed).count();
    match a.emit {
        Emit::Json => {
            let checks: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "name": r.name,
                        "passed": r.passed,
                        "detail": r.detail,
                    })
                })
                .collect();
            let obj = serde_json::json!({
                "level": name,
                "seed": a.seed,
                "all_passed": failed == 0,
                "checks": checks,
            });
            println!("{obj}");
        }
        Emit::Text => {
            println!("self-check level {name}, seed {}", a.seed);
            let w = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &reports {
                let tag = if r.passed { "pass" } else { "FAIL" };
                println!("  {:w$}  {tag}  {}", r.name, r.detail);
            }
            println!(
                "{}/{} checks passed",
                reports.len() - failed,
                reports.len()
            );
        }
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

// ==================================================================
// table
// ==================================================================

fn run_table(a: &TableArgs) -> Result<i32, Failure> {
    if a.gens.trim().is_empty() {
        return Err(Failure::Usage(
            "--gens requires at least one generator expression".into(),
        ));
    }
    let names: Vec<String> = a.gens.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(Failure::Usage(
            "--gens contains an empty generator expression".into(),
        ));
    }

    let guard = a.guard.unwrap_or(DEFAULT_GUARD);
    let params = Params {
        d: a.d,
        n: a.n,
        guard,
    };
    let narrow = Engine::new(params).map_err(classify)?;
    let wide = Engine::new(Params {
        guard: 2 * guard,
        ..params
    })
    .map_err(classify)?;

    let elems: Vec<KnElem> = names
        .iter()
        .map(|s| parse_element(s, narrow.kn()))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("--gens: {e}")))?;
    let pn: Vec<PreparedUnit> = elems
        .iter()
        .map(|x| narrow.prepare(x))
        .collect::<Result<_, _>>()
        .map_err(classify)?;
    let pw: Vec<PreparedUnit> = elems
        .iter()
        .map(|x| wide.prepare(&wide.kn().lift_elem(x)))
        .collect::<Result<_, _>>()
        .map_err(classify)?;

    let k = names.len();
    let mut matrix = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let v1 = narrow.prepared_symbol(&pn[i], &pn[j]).map_err(classify)?;
            let v2 = wide.prepared_symbol(&pw[i], &pw[j]).map_err(classify)?;
            if v1.value != v2.value {
                return Err(classify(Error::PrecisionDisagreement {
                    first: v1.value,
                    first_guard: guard,
                    second: v2.value,
                    second_guard: 2 * guard,
                }));
            }
            matrix[i][j] = v1.value;
        }
    }

    let modulus = narrow.modulus();
    match a.emit {
        Emit::Json => {
            let obj = serde_json::json!({
                "d": a.d,
                "n": a.n,
                "modulus": modulus,
                "gens": names,
                "matrix": matrix,
            });
            println!("{obj}");
        }
        Emit::Text => {
            println!("[g_i, g_j] mod {modulus}");
            let wrow = names.iter().map(String::len).max().unwrap_or(0);
            let wcol = wrow.max(format!("{}", modulus - 1).len());
            let mut head = format!("  {:wrow$}", "");
            for name in &names {
                head.push_str(&format!("  {name:>wcol$}"));
            }
            println!("{head}");
            for (i, name) in names.iter().enumerate() {
                let mut line = format!("  {name:<wrow$}");
                for v in &matrix[i] {
                    line.push_str(&format!("  {v:>wcol$}"));
                }
                println!("{line}");
            }
        }
    }
    Ok(0)
}

// ==================================================================
// lift rendering
// ==================================================================

/// Balanced signed residue of v mod 2^k, in (-2^(k-1), 2^(k-1)].
fn balanced(v: u64, k: u32) -> i128 {
    let m = 1i128 << k;
    let v = v as i128;
    if v > m / 2 {
        v - m
    } else {
        v
    }
}

/// The nonzero monomials of one coefficient as (negative, |term|)
/// pairs in the Teichmuller generator w.
fn coeff_terms(c: &CoeffCtx, a: &CoeffElem, k: u32) -> Vec<(bool, String)> {
    let mut terms = Vec::new();
    for i in 0..c.degree() as usize {
        let sv = balanced(c.coord_bits(a, i, k), k);
        if sv == 0 {
            continue;
        }
        let av = sv.unsigned_abs();
        terms.push((
            sv < 0,
            match i {
                0 => format!("{av}"),
                1 if av == 1 => "w".into(),
                1 => format!("{av}*w"),
                _ if av == 1 => format!("w^{i}"),
                _ => format!("{av}*w^{i}"),
            },
        ));
    }
    terms
}

fn join_signed(terms: &[(bool, String)]) -> String {
    let mut out = String::new();
    for (idx, (neg, t)) in terms.iter().enumerate() {
        if idx == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(t);
    }
    out
}

/// A window series as a polynomial in t with balanced coefficients.
fn fmt_series(s: &SeriesCtx, f: &Series) -> String {
    let c = s.coeff();
    let k = c.precision().min(64);
    let mut parts: Vec<(bool, String)> = Vec::new();
    for e in f.lo()..=f.hi() {
        let terms = coeff_terms(c, &s.coeff_at(f, e), k);
        if terms.is_empty() {
            continue;
        }
        let (neg, body) = if terms.len() == 1 {
            terms[0].clone()
        } else {
            (false, format!("({})", join_signed(&terms)))
        };
        parts.push((
            neg,
            match e {
                0 => body,
                1 if body == "1" => "t".into(),
                1 => format!("{body}*t"),
                _ if body == "1" => format!("t^{e}"),
                _ => format!("{body}*t^{e}"),
            },
        ));
    }
    let mut out = if parts.is_empty() {
        "0".into()
    } else {
        join_signed(&parts)
    };
    if f.scale() > 0 {
        out = format!("({out}) / 2^{}", f.scale());
    }
    if c.precision() > 64 {
        out.push_str("  [coefficients read mod 2^64]");
    }
    out
}

// ==================================================================
// entry
// ==================================================================

fn main() {
    // restore default SIGPIPE handling so piping into a consumer that
    // exits early terminates the process instead of panicking a print
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successes; everything else is a
            // usage error and must exit 1, not clap's default 2
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::Symbol(a) => run_symbol(a),
        Cmd::Selfcheck(a) => run_selfcheck(a),
        Cmd::Table(a) => run_table(a),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            std::process::exit(f.code());
        }
    }
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_carry_the_contracted_exit_codes() {
        let cases: [(Error, i32); 11] = [
            (Error::PathDisagreement { main: 1, cup: 3 }, 2),
            (Error::GuardExhausted { consumed: 9, guard: 8 }, 3),
            (Error::Integrality("residue"), 3),
            (
                Error::PrecisionDisagreement {
                    first: 0,
                    first_guard: 8,
                    second: 1,
                    second_guard: 16,
                },
                3,
            ),
            (Error::WindowExhausted, 3),
            (Error::NotInvertible, 3),
            (Error::Internal("invariant"), 3),
            (Error::Config("out of range".into()), 1),
            (Error::NotPrincipalUnit { valuation: 1 }, 1),
            (Error::NotUnit, 1),
            (Error::Precondition("bad lift".into()), 1),
        ];
        for (e, code) in cases {
            assert_eq!(classify(e).code(), code);
        }
    }

    #[test]
    fn balanced_picks_the_small_representative() {
        assert_eq!(balanced(0, 18), 0);
        assert_eq!(balanced(2, 18), 2);
        assert_eq!(balanced((1 << 18) - 2, 18), -2);
        assert_eq!(balanced(1 << 17, 18), 1 << 17);
        assert_eq!(balanced(u64::MAX, 64), -1);
    }

    #[test]
    fn series_rendering_uses_balanced_signed_terms() {
        let e = Engine::new(Params::new(2, 2)).unwrap();
        let s = e.series();
        let c = s.coeff();
        assert_eq!(fmt_series(s, &s.zero()), "0");
        assert_eq!(fmt_series(s, &s.one()), "1");
        assert_eq!(fmt_series(s, &s.poly(&[(1, 1)])), "t");
        assert_eq!(fmt_series(s, &s.poly(&[(3, 1), (0, 5)])), "5 + t^3");
        assert_eq!(fmt_series(s, &s.poly(&[(0, 1), (2, -2)])), "1 - 2*t^2");
        let mixed = c.add(&c.from_i64(-2), &c.scalar_mul_i64(&c.gen(), 2));
        let f = s.from_coeffs(0, &[c.one(), mixed, c.from_i64(-1)]);
        assert_eq!(fmt_series(s, &f), "1 + (-2 + 2*w)*t - t^2");
    }
}
