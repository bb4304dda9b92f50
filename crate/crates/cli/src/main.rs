//! Command line front end: cubic residue symbols, local solvability of
//! diagonal cubic curves, cube-descent Selmer groups, and the diagonal cubic
//! surface pipelines.
//!
//! Exit codes: 0 when the requested computation succeeded, 1 when a
//! requested witness/criterion/point is absent, 2 on invalid input.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use cubic_descent::eisenstein::EisensteinInt;
use cubic_descent::localsolve::{
    everywhere_locally_solvable, solvable_over_completion, CurveSpec, Place,
};
use cubic_descent::oracle;
use cubic_descent::residues;
use cubic_descent::selmer::{self, SelmerOptions};
use cubic_descent::surface::{self, Form};

#[derive(Parser)]
#[command(
    name = "cubic-descent",
    version,
    about = "Diagonal cubic curves and surfaces: local solvability, cube-descent Selmer groups, rational point criteria",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for the parallel searches (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Emit a single JSON document instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cubic residue symbol (alpha/q)_3, printed as 1, w, or w^2.
    Symbol {
        /// element of Z[w], written like "5" or "1-2*w"
        #[arg(allow_hyphen_values = true)]
        alpha: String,
        /// prime of Z[w] coprime to 3
        #[arg(allow_hyphen_values = true)]
        q: String,
    },
    /// Local solvability of a*x^3 + b*y^3 = c*z^3.
    Local {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(allow_hyphen_values = true)]
        c: String,
        /// test one completion: a rational prime, "lambda", or a prime of Z[w]
        #[arg(long, conflicts_with = "all", allow_hyphen_values = true)]
        prime: Option<String>,
        /// test every completion of Q (requires rational coefficients)
        #[arg(long)]
        all: bool,
    },
    /// The cube-descent Selmer group of x^3 + y^3 = A*z^3 over Q(w).
    Selmer {
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// norm bound for global point searches on surviving torsors
        #[arg(long, default_value_t = 20)]
        witness_bound: u64,
    },
    /// Diagonal cubic surface pipeline.
    Surface(SurfaceArgs),
    /// Descent for x1^3 + p1p2 x2^3 + p2p3 x3^3 + p3p1 x4^3 = 0 with
    /// p_i = 2, 5 (mod 9).
    Theorem28 {
        p1: u64,
        p2: u64,
        p3: u64,
        /// bound for the surface and torsor point searches
        #[arg(long, default_value_t = 12)]
        search: u32,
    },
    /// Brute-force oracles (intended for debugging and cross-checks).
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(allow_hyphen_values = true)]
    a1: String,
    #[arg(allow_hyphen_values = true)]
    a2: String,
    #[arg(allow_hyphen_values = true)]
    a3: String,
    #[arg(allow_hyphen_values = true)]
    a4: String,
    /// coefficient convention: sum (a1x1^3+...+a4x4^3 = 0) or split
    /// (a1x1^3+a2x2^3 = a3x3^3+a4x4^3)
    #[arg(long, value_enum, default_value_t = FormArg::Sum)]
    form: FormArg,
    /// evaluate the sufficiency criteria and the descent witness search
    #[arg(long)]
    criteria: bool,
    /// search for a rational point up to the given coordinate bound
    #[arg(long)]
    search: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Sum,
    Split,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Form {
        match f {
            FormArg::Sum => Form::Sum,
            FormArg::Split => Form::Split,
        }
    }
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Count nontrivial solutions of a*x^3 + b*y^3 = c*z^3 modulo n.
    CountMod {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(allow_hyphen_values = true)]
        c: String,
        n: u64,
    },
    /// Projective point count of the reduced curve over a residue field.
    FfCount {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(allow_hyphen_values = true)]
        c: String,
        #[arg(allow_hyphen_values = true)]
        place: String,
    },
    /// Digit-by-digit certified local search.
    Brute {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(allow_hyphen_values = true)]
        c: String,
        #[arg(allow_hyphen_values = true)]
        place: String,
        /// search depth; defaults to the certified bound of the place
        #[arg(long)]
        depth: Option<u32>,
    },
}

struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// inputs echo, result payload, conditional hypotheses, table lines, exit code
type CmdResult = Result<(Value, Value, Vec<String>, Vec<String>, i32), CliError>;

fn main() {
    let cli = Cli::parse(); // clap exits 2 on malformed arguments
    let threads = cli.threads.max(1);
    let code = run_with_threads(threads, &cli);
    std::process::exit(code);
}

#[cfg(feature = "parallel")]
fn run_with_threads(threads: usize, cli: &Cli) -> i32 {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| dispatch(cli)),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(_threads: usize, cli: &Cli) -> i32 {
    dispatch(cli)
}

fn dispatch(cli: &Cli) -> i32 {
    let (name, outcome) = match &cli.cmd {
        Cmd::Symbol { alpha, q } => ("symbol", cmd_symbol(alpha, q)),
        Cmd::Local { a, b, c, prime, all } => ("local", cmd_local(a, b, c, prime.as_deref(), *all)),
        Cmd::Selmer { a, witness_bound } => ("selmer", cmd_selmer(a, *witness_bound)),
        Cmd::Surface(args) => ("surface", cmd_surface(args)),
        Cmd::Theorem28 { p1, p2, p3, search } => {
            ("theorem28", cmd_theorem28(*p1, *p2, *p3, *search))
        }
        Cmd::Oracle(sub) => ("oracle", cmd_oracle(sub)),
    };
    match outcome {
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `cubic-descent --help` for usage");
            2
        }
        Ok((inputs, result, hypotheses, human, code)) => {
            if cli.json {
                let envelope = json!({
                    "command": name,
                    "inputs": inputs,
                    "result": result,
                    "conditional_hypotheses": hypotheses,
                    "version": env!("CARGO_PKG_VERSION"),
                });
                println!("{}", serde_json::to_string_pretty(&envelope).expect("serializable"));
            } else {
                for line in human {
                    println!("{line}");
                }
                if !hypotheses.is_empty() {
                    println!("conditional on:");
                    for h in &hypotheses {
                        println!("  - {h}");
                    }
                }
            }
            code
        }
    }
}

fn parse_eisenstein(s: &str) -> Result<EisensteinInt, CliError> {
    s.parse::<EisensteinInt>().map_err(|e| CliError(e.to_string()))
}

fn parse_bigint(s: &str) -> Result<BigInt, CliError> {
    s.parse::<BigInt>().map_err(|_| CliError(format!("cannot parse {s:?} as an integer")))
}

fn parse_curve(a: &str, b: &str, c: &str) -> Result<CurveSpec, CliError> {
    Ok(CurveSpec::new(parse_eisenstein(a)?, parse_eisenstein(b)?, parse_eisenstein(c)?)?)
}

fn parse_place(s: &str) -> Result<Place, CliError> {
    if s == "lambda" {
        return Ok(Place::Lambda);
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(Place::Rational(p));
    }
    Ok(Place::Eisenstein(parse_eisenstein(s)?))
}

fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_bigint(n)?;
        let d = parse_bigint(d)?;
        if d == BigInt::from(0) {
            return Err(CliError("zero denominator".to_string()));
        }
        Ok(BigRational::new(n, d))
    } else {
        Ok(BigRational::from_integer(parse_bigint(s)?))
    }
}

fn verdict_line(v: &cubic_descent::localsolve::LocalVerdict) -> String {
    let status = if v.solvable { "solvable" } else { "insolvable" };
    format!(
        "{:<10} {:<12} {:<24} {}",
        v.place,
        status,
        v.rule,
        serde_json::to_string(&v.certificate).unwrap_or_default()
    )
}

fn cmd_symbol(alpha: &str, q: &str) -> CmdResult {
    let alpha = parse_eisenstein(alpha)?;
    let q = parse_eisenstein(q)?;
    let s = residues::cubic_symbol(&alpha, &q)?;
    Ok((
        json!({ "alpha": alpha.to_string(), "q": q.to_string() }),
        json!({ "value": s.to_string(), "exponent": s.exponent }),
        vec![],
        vec![s.to_string()],
        0,
    ))
}

fn cmd_local(a: &str, b: &str, c: &str, prime: Option<&str>, all: bool) -> CmdResult {
    let curve = parse_curve(a, b, c)?;
    let inputs = json!({
        "a": curve.a.to_string(), "b": curve.b.to_string(), "c": curve.c.to_string(),
        "prime": prime, "all": all,
    });
    let header = format!("{:<10} {:<12} {:<24} certificate", "place", "verdict", "rule");
    let mut human = vec![format!("curve: {curve}")];
    if let Some(p) = prime {
        let place = parse_place(p)?;
        let v = solvable_over_completion(&curve, &place)?;
        human.push(header);
        human.push(verdict_line(&v));
        let result = serde_json::to_value(&v).map_err(|e| CliError(e.to_string()))?;
        Ok((inputs, result, vec![], human, 0))
    } else {
        // default: every completion of Q
        let (ok, verdicts) = everywhere_locally_solvable(&curve)?;
        human.push(format!("everywhere locally solvable: {ok}"));
        human.push(header);
        for v in &verdicts {
            human.push(verdict_line(v));
        }
        let result = json!({
            "everywhere_locally_solvable": ok,
            "verdicts": serde_json::to_value(&verdicts).map_err(|e| CliError(e.to_string()))?,
        });
        Ok((inputs, result, vec![], human, 0))
    }
}

fn cmd_selmer(a: &str, witness_bound: u64) -> CmdResult {
    let a = parse_bigint(a)?;
    let r = selmer::compute_selmer_with(&a, &SelmerOptions { witness_bound })?;
    let inputs = json!({ "A": a.to_string(), "witness_bound": witness_bound });
    let mut human = vec![
        format!("A                : {}", r.a_value),
        format!("dim_F3 S(A)      : {}", r.dimension),
        format!("s(A) = dim - 1   : {}", r.s),
        format!("s0(A)            : {}", r.s0),
        format!("root number sign : {}", r.root_sign),
        format!("basis            : {}", r.basis_display.join(", ")),
        format!("candidates tested: {}", r.candidates_tested),
        format!(
            "survivors        : {}",
            r.survivors.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
        ),
    ];
    for w in &r.c_witnesses {
        human.push(format!(
            "global point     : class {} has {} on {}",
            w.class, w.point, w.curve
        ));
    }
    let hypotheses = r
        .conditional_note
        .as_ref()
        .map(|_| vec![format!("Sha(E_{}/Q) is finite", r.a_value)])
        .unwrap_or_default();
    if let Some(note) = &r.conditional_note {
        human.push(format!("note             : {note}"));
    }
    let result = serde_json::to_value(&r).map_err(|e| CliError(e.to_string()))?;
    Ok((inputs, result, hypotheses, human, 0))
}

fn cmd_surface(args: &SurfaceArgs) -> CmdResult {
    let coeffs: [BigRational; 4] = [
        parse_rational(&args.a1)?,
        parse_rational(&args.a2)?,
        parse_rational(&args.a3)?,
        parse_rational(&args.a4)?,
    ];
    let s = surface::normalize(&coeffs, args.form.into())?;
    let analysis = surface::analyze_surface(&s)?;
    let point = args.search.map(|b| surface::surface_point_search(&s, b));
    let inputs = json!({
        "coefficients": [args.a1, args.a2, args.a3, args.a4],
        "form": match args.form { FormArg::Sum => "sum", FormArg::Split => "split" },
        "criteria": args.criteria,
        "search": args.search,
    });

    let mut human = vec![
        format!("surface          : {s}"),
        format!("ratio criterion  : {}", analysis.ratio_criterion),
        format!("everywhere local : {}", analysis.local.locally_solvable),
        format!("birational /Q_3  : {}", analysis.birational_q3),
    ];
    for rep in &analysis.local.primes {
        match &rep.cp {
            Some(c) => human.push(format!(
                "  p = {:<6} C_p = {} ({})",
                rep.p,
                c,
                if rep.from_candidate_set { "candidate set" } else { "class sweep" }
            )),
            None => human.push(format!("  p = {:<6} no admissible constant", rep.p)),
        }
    }
    if analysis.hasse_principle_path {
        human.push(
            "Hasse principle applies (cube ratio); descent criteria not consulted".to_string(),
        );
    }
    let mut absent = false;
    if args.criteria {
        match (&analysis.criteria, &analysis.witness) {
            (Some(cr), Some(w)) => {
                if cr.hits.is_empty() {
                    human.push("criteria         : none satisfied".to_string());
                } else {
                    for h in &cr.hits {
                        human.push(format!(
                            "criterion {:<7}: labeling {:?}, {}",
                            h.label, h.permutation, h.witness
                        ));
                    }
                }
                match w {
                    Some(w) => {
                        human.push(format!(
                            "descent witness  : p1 = {} (C = {}) kills {}",
                            w.p1, w.cp1, w.curve3
                        ));
                        human.push(format!(
                            "                   p3 = {} (C = {}) kills {}",
                            w.p3, w.cp3, w.curve4
                        ));
                    }
                    None => {
                        human.push("descent witness  : none in the candidate set".to_string())
                    }
                }
                absent |= cr.hits.is_empty() && w.is_none();
            }
            _ => {
                human.push(if analysis.hasse_principle_path {
                    "criteria         : skipped (Hasse principle path)".to_string()
                } else {
                    "criteria         : skipped (not everywhere locally solvable)".to_string()
                });
                absent |= !analysis.hasse_principle_path;
            }
        }
    }
    if let Some(res) = &point {
        match res {
            Some(pt) => human.push(format!(
                "rational point   : ({}, {}, {}, {})",
                pt[0], pt[1], pt[2], pt[3]
            )),
            None => {
                human.push(format!(
                    "rational point   : none with coordinates up to {}",
                    args.search.unwrap()
                ));
                absent = true;
            }
        }
    }
    let hypotheses: Vec<String> = analysis.conditional_hypothesis.clone().into_iter().collect();
    let result = json!({
        "analysis": serde_json::to_value(&analysis).map_err(|e| CliError(e.to_string()))?,
        "point": point.as_ref().map(|o| o.as_ref().map(|p| {
            p.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        })),
    });
    Ok((inputs, result, hypotheses, human, if absent { 1 } else { 0 }))
}

fn cmd_theorem28(p1: u64, p2: u64, p3: u64, search: u32) -> CmdResult {
    let r = surface::prime_triple_pipeline(p1, p2, p3, search)?;
    let inputs = json!({ "p1": p1, "p2": p2, "p3": p3, "search": search });
    let mut human = vec![
        format!("surface          : {}", r.surface),
        format!("residues mod 9   : {:?}", r.residues_mod9),
        format!("everywhere local : {}", r.locally_solvable),
    ];
    match &r.route {
        surface::TripleRoute::MixedResidues { a } | surface::TripleRoute::EqualResidues { a } => {
            human.push(format!("descent via      : S({a})"));
        }
        surface::TripleRoute::Duplicates { ratio_criterion } => {
            human.push(format!(
                "repeated primes  : cube-ratio criterion {}",
                if *ratio_criterion {
                    "applies (Hasse principle holds)"
                } else {
                    "does not apply"
                }
            ));
        }
    }
    if let Some(s) = &r.selmer {
        human.push(format!("dim_F3 S(A)      : {}", s.dimension));
    }
    if let Some(c) = &r.distinguished_class {
        human.push(format!("distinguished    : class {c}"));
    }
    if let Some(t) = &r.distinguished_torsor {
        human.push(format!("torsor           : {t}"));
    }
    if let Some(w) = &r.torsor_witness {
        human.push(format!("torsor point     : {} on {}", w.point, w.curve));
    }
    let mut hypotheses = Vec::new();
    if let Some(h) = &r.conditional_hypothesis {
        human.push(format!(
            "descent          : every class of the Selmer group has a global point if {h}"
        ));
        hypotheses.push(h.clone());
    }
    match &r.surface_point {
        Some(pt) => human.push(format!(
            "rational point   : ({}, {}, {}, {}) -- existence is unconditional",
            pt[0], pt[1], pt[2], pt[3]
        )),
        None => {
            if let Some(h) = &r.conditional_hypothesis {
                human.push(format!(
                    "conclusion       : the surface has a rational point if {h}"
                ));
            } else {
                human.push(
                    "conclusion       : no descent point construction for repeated primes"
                        .to_string(),
                );
            }
        }
    }
    let result = serde_json::to_value(&r).map_err(|e| CliError(e.to_string()))?;
    Ok((inputs, result, hypotheses, human, 0))
}

fn cmd_oracle(sub: &OracleCmd) -> CmdResult {
    match sub {
        OracleCmd::CountMod { a, b, c, n } => {
            let curve = parse_curve(a, b, c)?;
            let r = oracle::count_solutions_mod(&curve, *n)?;
            let inputs = json!({ "curve": curve.to_string(), "n": n });
            let human = vec![
                format!("curve: {curve}"),
                format!("nontrivial solutions mod {}: {}", r.modulus, r.nontrivial_solutions),
                format!("representatives: {:?}", r.representatives),
            ];
            let result = serde_json::to_value(&r).map_err(|e| CliError(e.to_string()))?;
            Ok((inputs, result, vec![], human, 0))
        }
        OracleCmd::FfCount { a, b, c, place } => {
            let curve = parse_curve(a, b, c)?;
            let place = parse_place(place)?;
            let n = oracle::finite_field_point_count(&curve, &place)?;
            let inputs = json!({ "curve": curve.to_string(), "place": place.to_string() });
            let human =
                vec![format!("projective points over the residue field at {place}: {n}")];
            Ok((inputs, json!({ "count": n }), vec![], human, 0))
        }
        OracleCmd::Brute { a, b, c, place, depth } => {
            let curve = parse_curve(a, b, c)?;
            let place = parse_place(place)?;
            let required = match &place {
                Place::Rational(p) if *p == BigInt::from(3) => 7,
                Place::Rational(_) | Place::Eisenstein(_) => 5,
                Place::Lambda => 9,
            };
            let depth = depth.unwrap_or(required);
            let out = oracle::brute_local(&curve, &place, depth)?;
            let inputs = json!({
                "curve": curve.to_string(), "place": place.to_string(), "depth": depth,
            });
            let human = vec![match &out {
                oracle::BruteOutcome::Solvable { .. } => format!("{place}: solvable"),
                oracle::BruteOutcome::Insolvable { exhausted_depth } => {
                    format!("{place}: insolvable (tree exhausted at depth {exhausted_depth})")
                }
                oracle::BruteOutcome::Unknown { searched_depth, required_depth } => format!(
                    "{place}: unknown (depth {searched_depth} below the certified bound {required_depth})"
                ),
            }];
            let result = serde_json::to_value(&out).map_err(|e| CliError(e.to_string()))?;
            Ok((inputs, result, vec![], human, 0))
        }
    }
}
