mod oracle;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use focq::covers::{build_cover, remove, solve_splitter, validate_cover};
use focq::eval::{eliminate_free_vars_flat, eval, eval_query, QueryResult, Value};
use focq::generators::{self, ExprGen};
use focq::locality::clterm::canonical_vars;
use focq::locality::{cl_decompose_with, BasicClTerm, ClKind};
use focq::localized::{self, evaluate, EvalConfig};
use focq::logic::{parse_expr, parse_formula, parse_query, parse_term, signature_of, Expr, Query, Registry, Term};
use focq::reductions::{encode_string, encode_tree, rewrite_string_formula, rewrite_tree_formula};
use focq::transforms::{removal_formula, removal_ground_term, removal_unary_term, BasicTerm};
use focq::{Error, PatternGraph, Result, Signature, Structure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use report::RunReport;

#[derive(Parser)]
#[command(
    name = "focq",
    version,
    about = "Evaluate first-order logic with counting on sparse structures"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the result here instead of stdout (a directory for `reduce` and `gen corpus`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write a run report (inputs, seed, timings, fallbacks) as JSON.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sentence, ground term or query on a structure.
    Eval(EvalArgs),
    /// Show the cl-decomposition of an expression.
    Decompose(DecomposeArgs),
    /// Build and validate a neighbourhood cover.
    Cover(CoverArgs),
    /// Solve the splitter game on the Gaifman graph of a structure.
    Game(GameArgs),
    /// Build the removal structure for one element.
    Remove(RemoveArgs),
    /// Rewrite a formula or counting term for removal structures.
    Transform(TransformArgs),
    /// Encode a graph as a tree or string and rewrite a sentence accordingly.
    Reduce(ReduceArgs),
    /// Time localized against naive evaluation of a width-2 term.
    Bench(BenchArgs),
    /// Compare localized and reference evaluation on a generated corpus.
    Selftest(SelftestArgs),
    /// Generate structures, expressions or a whole corpus.
    Gen(GenArgs),
}

#[derive(Args)]
struct QueryInput {
    /// File holding the expression or query.
    #[arg(long, conflicts_with = "expr")]
    query: Option<PathBuf>,
    /// The expression or query itself.
    #[arg(long, short = 'e')]
    expr: Option<String>,
    /// External predicate `NAME/ARITY=COMMAND`, answered line by line.
    #[arg(long = "oracle")]
    oracles: Vec<String>,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Recursion budgets per radius, comma separated (lambda(s) for s = 0, 1, ..).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<u32>>,
    #[arg(long, default_value_t = localized::DEFAULT_RECURSION_CAP)]
    recursion_cap: u32,
    /// Clusters at most this large are evaluated directly.
    #[arg(long, default_value_t = localized::DEFAULT_BRUTE_FORCE_THRESHOLD)]
    threshold: usize,
    #[arg(long, default_value_t = focq::locality::clterm::DEFAULT_WIDTH_CAP)]
    width_cap: usize,
    /// Largest cluster on which splitter moves are computed exactly.
    #[arg(long, default_value_t = localized::DEFAULT_ENGINE_GAME_CAP)]
    game_cap: usize,
}

impl EngineArgs {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            epsilon: self.epsilon,
            lambda: self.lambda.clone(),
            recursion_cap: self.recursion_cap,
            brute_force_threshold: self.threshold,
            width_cap: self.width_cap,
            exact_game_cap: self.game_cap,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Naive,
    Local,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    structure: PathBuf,
    #[command(flatten)]
    input: QueryInput,
    #[arg(long, value_enum, default_value = "local")]
    mode: Mode,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: QueryInput,
    /// Take the signature from this structure.
    #[arg(long, conflicts_with = "signature")]
    structure: Option<PathBuf>,
    /// Signature as `E/2,P/1`; inferred from the expression if absent.
    #[arg(long)]
    signature: Option<String>,
    #[arg(long, default_value_t = focq::locality::clterm::DEFAULT_WIDTH_CAP)]
    width_cap: usize,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    structure: PathBuf,
    #[arg(long = "r", default_value_t = 1)]
    r: u32,
}

#[derive(Args)]
struct GameArgs {
    #[arg(long)]
    structure: PathBuf,
    #[arg(long, default_value_t = 1)]
    radius: u32,
    #[arg(long, default_value_t = 8)]
    max_rounds: u32,
    /// Refuse graphs with more vertices than this.
    #[arg(long, default_value_t = 20)]
    cap: usize,
}

#[derive(Args)]
struct RemoveArgs {
    #[arg(long)]
    structure: PathBuf,
    /// Name of the element to remove.
    #[arg(long)]
    element: String,
    #[arg(long, default_value_t = 1)]
    radius: u32,
}

#[derive(Args)]
struct TransformArgs {
    /// Formula to rewrite.
    #[arg(long, conflicts_with = "term", required_unless_present = "term")]
    formula: Option<String>,
    /// Counting term `#(ys). body` to rewrite.
    #[arg(long)]
    term: Option<String>,
    /// Free variable of the counting term, if any.
    #[arg(long, requires = "term")]
    free: Option<String>,
    /// Variables mapped to the removed element (formulas only).
    #[arg(long, value_delimiter = ',')]
    removed: Vec<String>,
    #[arg(long, default_value_t = 1)]
    radius: u32,
    #[arg(long, conflicts_with = "signature")]
    structure: Option<PathBuf>,
    #[arg(long)]
    signature: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Tree,
    String,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(value_enum)]
    encoding: Encoding,
    /// Graph as a structure with a symmetric, irreflexive `E`.
    #[arg(long)]
    graph: PathBuf,
    /// Sentence over `E` to rewrite.
    #[arg(long)]
    formula: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "star")]
    family: String,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    sizes: Vec<usize>,
    /// Body of the width-2 term over `y1`, `y2`.
    #[arg(long, default_value = "(E(y1, y2) | E(y2, y1))")]
    body: String,
    #[arg(long, default_value_t = 1)]
    radius: u32,
    /// Largest size at which naive evaluation runs.
    #[arg(long, default_value_t = 10_000)]
    naive_cap: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 50)]
    cases: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenWhat,
}

#[derive(Subcommand)]
enum GenWhat {
    /// One structure from a built-in family.
    Structure {
        /// path, cycle, star, grid, tree or deg3.
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        /// Probability of each element being in a unary `P` (omitted if 0).
        #[arg(long, default_value_t = 0.0)]
        unary: f64,
    },
    /// Random FO1C expressions, one per line.
    Expr {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Structure and expression files of the oracle-equivalence corpus.
    Corpus {
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    report: RunReport,
}

impl Ctx {
    fn read(&mut self, name: &str, path: &Path) -> Result<String> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        self.report.input(name, text.as_bytes());
        Ok(text)
    }

    fn structure(&mut self, path: &Path) -> Result<Structure> {
        let text = self.read("structure", path)?;
        Structure::from_json_str(&text)
    }

    fn query_text(&mut self, input: &QueryInput) -> Result<String> {
        match (&input.query, &input.expr) {
            (Some(path), _) => self.read("query", path),
            (None, Some(text)) => {
                self.report.input("query", text.as_bytes());
                Ok(text.clone())
            }
            (None, None) => Err(Error::Input("give the query with --query FILE or --expr TEXT".into())),
        }
    }

    fn emit(&mut self, result: Json) -> Result<()> {
        let text = serde_json::to_string_pretty(&result)?;
        match &self.out {
            Some(path) => fs::write(path, text + "\n")?,
            None => say(&text),
        }
        self.report.result = result;
        Ok(())
    }

    fn timing(&mut self, name: &str, start: Instant) {
        self.report
            .timings_ms
            .insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
    }
}

/// Prints a line to stdout; a closed pipe (`focq ... | head`) ends the
/// process quietly.
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}").and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

enum Input {
    Expr(Expr),
    Query(Query),
}

fn parse_input(text: &str, sig: Option<&Signature>, preds: &Registry) -> Result<Input> {
    match parse_expr(text, sig, preds) {
        Ok(e) => Ok(Input::Expr(e)),
        Err(expr_err) => parse_query(text, sig, preds).map(Input::Query).map_err(|_| expr_err),
    }
}

fn parse_signature(text: &str) -> Result<Signature> {
    let mut sig = Signature::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Input(format!("`{part}` is not of the form NAME/ARITY"));
        let (name, arity) = part.split_once('/').ok_or_else(bad)?;
        sig.insert(name.trim(), arity.trim().parse().map_err(|_| bad())?);
    }
    Ok(sig)
}

fn value_json(v: &Value) -> Json {
    v.to_json()
}

fn query_local(q: &Query, a: &Structure, cfg: &EvalConfig, preds: &Registry, ctx: &mut Ctx) -> Result<QueryResult> {
    let tilde = eliminate_free_vars_flat(q, &a.signature())?;
    let k = q.out_vars.len();
    let n = a.len();
    let mut rows = Vec::new();
    let mut tuple = vec![0; k];
    let total = if k == 0 {
        1
    } else {
        n.checked_pow(k as u32)
            .ok_or_else(|| Error::Limit("too many tuples".into()))?
    };
    for idx in 0..total {
        let mut rest = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = (rest % n) as focq::Elem;
            rest /= n;
        }
        let b = tilde.expand(a, &tuple)?;
        let sentence = evaluate(&Expr::Formula(tilde.sentence.clone()), &b, cfg, preds)?;
        note_fallback(ctx, &sentence.engine);
        if sentence.value != Value::Bool(true) {
            continue;
        }
        let mut nums = Vec::new();
        for t in &tilde.terms {
            let v = evaluate(&Expr::Term(t.clone()), &b, cfg, preds)?;
            note_fallback(ctx, &v.engine);
            match v.value {
                Value::Int(i) => nums.push(i),
                Value::Bool(_) => return Err(Error::Internal("term evaluated to a boolean".into())),
            }
        }
        rows.push((tuple.iter().map(|&e| a.name(e).to_string()).collect(), nums));
    }
    Ok(QueryResult { rows })
}

fn note_fallback(ctx: &mut Ctx, stats: &localized::EngineStats) {
    if stats.fallback {
        ctx.report.fallback = true;
        for r in &stats.fallback_reasons {
            if !ctx.report.fallback_reasons.contains(r) && ctx.report.fallback_reasons.len() < 16 {
                ctx.report.fallback_reasons.push(r.clone());
            }
        }
    }
}

fn cmd_eval(args: &EvalArgs, ctx: &mut Ctx) -> Result<()> {
    let (preds, procs) = oracle::registry(&args.input.oracles)?;
    let a = ctx.structure(&args.structure)?;
    let text = ctx.query_text(&args.input)?;
    let input = parse_input(&text, Some(&a.signature()), &preds)?;
    let cfg = args.engine.config();
    cfg.validate()?;
    ctx.report.mode = Some(match args.mode {
        Mode::Naive => "naive".into(),
        Mode::Local => "local".into(),
    });
    let start = Instant::now();
    let result = match (args.mode, &input) {
        (Mode::Naive, Input::Expr(e)) => json!({"mode": "naive", "result": value_json(&eval(e, &a, &preds)?)}),
        (Mode::Naive, Input::Query(q)) => json!({"mode": "naive", "rows": eval_query(q, &a, &preds)?.to_json()}),
        (Mode::Local, Input::Expr(e)) => {
            let ev = evaluate(e, &a, &cfg, &preds)?;
            note_fallback(ctx, &ev.engine);
            ctx.report.timings_ms.insert("decompose".into(), ev.decompose_ms);
            ctx.report.timings_ms.insert("evaluate".into(), ev.evaluate_ms);
            json!({
                "mode": "local",
                "result": value_json(&ev.value),
                "layers": ev.layers,
                "symbols": ev.symbols,
                "basic_terms": ev.decomposition.basic_terms,
                "oracle_calls": ev.decomposition.oracle_calls,
                "engine": ev.engine,
            })
        }
        (Mode::Local, Input::Query(q)) => {
            let rows = query_local(q, &a, &cfg, &preds, ctx)?;
            json!({"mode": "local", "rows": rows.to_json(), "fallback": ctx.report.fallback})
        }
    };
    ctx.timing("total", start);
    for p in &procs {
        ctx.report
            .oracle_calls
            .insert(format!("{}/{}={}", p.name, p.arity, p.command), p.calls());
    }
    ctx.emit(result)
}

fn signature_for(structure: &Option<PathBuf>, signature: &Option<String>, ctx: &mut Ctx) -> Result<Option<Signature>> {
    match (structure, signature) {
        (Some(path), _) => Ok(Some(ctx.structure(path)?.signature())),
        (None, Some(text)) => parse_signature(text).map(Some),
        (None, None) => Ok(None),
    }
}

fn cmd_decompose(args: &DecomposeArgs, ctx: &mut Ctx) -> Result<()> {
    let (preds, _procs) = oracle::registry(&args.input.oracles)?;
    let sig = signature_for(&args.structure, &args.signature, ctx)?;
    let text = ctx.query_text(&args.input)?;
    let e = match parse_input(&text, sig.as_ref(), &preds)? {
        Input::Expr(e) => e,
        Input::Query(_) => {
            return Err(Error::Unsupported(
                "decompose takes a sentence or ground term, not a query".into(),
            ))
        }
    };
    let sig = match sig {
        Some(s) => s,
        None => signature_of(&e)?,
    };
    let start = Instant::now();
    let d = cl_decompose_with(&e, &sig, &preds, args.width_cap)?;
    ctx.timing("decompose", start);
    ctx.emit(d.to_json())
}

fn cmd_cover(args: &CoverArgs, ctx: &mut Ctx) -> Result<()> {
    let a = ctx.structure(&args.structure)?;
    let start = Instant::now();
    let cover = build_cover(&a, args.r);
    let rep = validate_cover(&a, &cover);
    ctx.timing("cover", start);
    let names = |xs: &[focq::Elem]| xs.iter().map(|&x| a.name(x).to_string()).collect::<Vec<_>>();
    ctx.emit(json!({
        "r": cover.r,
        "s": cover.s,
        "clusters": cover.clusters.iter().map(|c| names(c)).collect::<Vec<_>>(),
        "centres": names(&cover.centres),
        "degree_histogram": rep.degree_histogram,
        "max_degree": rep.max_degree,
        "total_size": rep.total_size,
        "valid": rep.ok,
        "violations": rep.violations,
    }))
}

fn cmd_game(args: &GameArgs, ctx: &mut Ctx) -> Result<()> {
    let a = ctx.structure(&args.structure)?;
    let start = Instant::now();
    let game = solve_splitter(a.gaifman_graph(), args.radius, args.max_rounds, args.cap)?;
    ctx.timing("solve", start);
    let name = |x: focq::Elem| a.name(x).to_string();
    let strategy: Vec<Json> = game
        .strategy
        .iter()
        .map(|s| {
            json!({
                "position": s.position.iter().map(|&x| name(x)).collect::<Vec<_>>(),
                "connector": name(s.connector),
                "splitter": name(s.splitter),
            })
        })
        .collect();
    ctx.emit(json!({
        "radius": game.radius,
        "max_rounds": game.max_rounds,
        "value": game.value,
        "strategy": strategy,
    }))
}

fn cmd_remove(args: &RemoveArgs, ctx: &mut Ctx) -> Result<()> {
    let a = ctx.structure(&args.structure)?;
    let d = a.elem(&args.element)?;
    let rem = remove(&a, d, args.radius)?;
    let sig: Vec<Json> = rem.names.signature().iter().map(|(n, k)| json!([n, k])).collect();
    ctx.emit(json!({
        "removed": rem.removed_name.as_ref(),
        "radius": args.radius,
        "signature": sig,
        "structure": rem.structure.to_json(),
    }))
}

fn cmd_transform(args: &TransformArgs, ctx: &mut Ctx) -> Result<()> {
    let preds = Registry::builtin();
    let given = signature_for(&args.structure, &args.signature, ctx)?;
    let names_for = |e: &Expr| -> Result<focq::covers::RemovalNames> {
        let sig = match &given {
            Some(s) => s.clone(),
            None => signature_of(e)?,
        };
        Ok(focq::covers::RemovalNames::new(&sig, args.radius))
    };
    if let Some(text) = &args.formula {
        let f = parse_formula(text, given.as_ref(), &preds)?;
        let names = names_for(&Expr::Formula(f.clone()))?;
        let v = args.removed.iter().cloned().collect();
        let g = removal_formula(&f, &v, &names)?;
        return ctx.emit(json!({"formula": g.to_string()}));
    }
    let text = args.term.as_deref().unwrap_or_default();
    let t = parse_term(text, given.as_ref(), &preds)?;
    let names = names_for(&Expr::Term(t.clone()))?;
    let Term::Count(counted, body) = t else {
        return Err(Error::Input("expected a counting term `#(ys). body`".into()));
    };
    let render = |ts: &[BasicTerm]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    match &args.free {
        None => {
            let parts = removal_ground_term(&BasicTerm::ground(counted, *body), &names)?;
            ctx.emit(json!({"grounds": render(&parts)}))
        }
        Some(x) => {
            let (grounds, unaries) = removal_unary_term(&BasicTerm::unary(x.clone(), counted, *body), &names)?;
            ctx.emit(json!({"grounds": render(&grounds), "unaries": render(&unaries)}))
        }
    }
}

fn cmd_reduce(args: &ReduceArgs, ctx: &mut Ctx) -> Result<()> {
    let g = ctx.structure(&args.graph)?;
    let preds = Registry::builtin();
    let phi = args
        .formula
        .as_ref()
        .map(|text| parse_formula(text, Some(&Signature::new().with("E", 2)), &preds))
        .transpose()?;
    let (encoded, extra, rewritten) = match args.encoding {
        Encoding::Tree => {
            let enc = encode_tree(&g)?;
            let roles: serde_json::Map<String, Json> = enc
                .role_map()
                .into_iter()
                .map(|(name, role)| (name, json!(format!("{role:?}").to_lowercase())))
                .collect();
            let rewritten = phi.as_ref().map(rewrite_tree_formula).transpose()?;
            (
                enc.tree.clone(),
                json!({"height": enc.height(), "roles": roles}),
                rewritten,
            )
        }
        Encoding::String => {
            let s = encode_string(&g)?;
            let rewritten = phi.as_ref().map(rewrite_string_formula).transpose()?;
            (s, json!({"word": focq::reductions::string_word(&g)?}), rewritten)
        }
    };
    let name = match args.encoding {
        Encoding::Tree => "tree",
        Encoding::String => "string",
    };
    let summary = json!({
        "encoding": name,
        "elements": encoded.len(),
        "info": extra,
        "formula": rewritten.as_ref().map(|f| f.to_string()),
    });
    match ctx.out.take() {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(
                dir.join(format!("{name}.json")),
                serde_json::to_string_pretty(&encoded.to_json())? + "\n",
            )?;
            if let Some(f) = &rewritten {
                fs::write(dir.join(format!("{name}.foc")), format!("{f}\n"))?;
            }
            say(&serde_json::to_string_pretty(&summary)?);
            ctx.report.result = summary;
            Ok(())
        }
        None => ctx.emit(json!({"summary": summary, "structure": encoded.to_json()})),
    }
}

fn cmd_bench(args: &BenchArgs, ctx: &mut Ctx) -> Result<()> {
    let preds = Registry::builtin();
    let ys = canonical_vars(2);
    let sig = Signature::new().with("E", 2);
    let body = parse_formula(&args.body, Some(&sig), &preds)?;
    let t = BasicClTerm::new(ClKind::Ground, &ys, PatternGraph::complete(2), args.radius, &body);
    let seed = ctx.seed;
    let family = args.family.clone();
    let make = move |n: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generators::family(&family, n, &mut rng)
    };
    // surface bad family names before timing anything
    make(1)?;
    let make = |n: usize| make(n).expect("family checked above");
    let start = Instant::now();
    let rep = localized::benchmark(
        &args.family,
        &make,
        &args.sizes,
        &t,
        &args.engine.config(),
        args.naive_cap,
        args.repeats,
    )?;
    ctx.timing("bench", start);
    eprintln!(
        "{:>10} {:>12} {:>12} {:>12} {:>6}",
        "n", "size", "local ms", "naive ms", "agree"
    );
    for r in &rep.rows {
        let naive = r.naive_ms.map_or("-".to_string(), |m| format!("{m:.2}"));
        let agree = r.agree.map_or("-".to_string(), |a| a.to_string());
        eprintln!(
            "{:>10} {:>12} {:>12.2} {:>12} {:>6}",
            r.n, r.size, r.local_ms, naive, agree
        );
        ctx.report.fallback |= r.fallback;
    }
    eprintln!(
        "slopes: local {}, naive {}",
        rep.local_slope.map_or("-".into(), |s| format!("{s:.2}")),
        rep.naive_slope.map_or("-".into(), |s| format!("{s:.2}"))
    );
    ctx.emit(serde_json::to_value(&rep)?)
}

/// Exit status 2 when any case disagrees: a mismatch is a bug, not an input
/// problem.
fn cmd_selftest(args: &SelftestArgs, ctx: &mut Ctx) -> Result<bool> {
    let preds = Registry::builtin();
    let cfg = args.engine.config();
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut passed, mut fallbacks) = (0, 0);
    let mut failures = Vec::new();
    let start = Instant::now();
    for i in 0..args.cases {
        let (family, a, e) = generators::corpus_pair(i, &mut rng);
        let want = eval(&e, &a, &preds)?;
        match evaluate(&e, &a, &cfg, &preds) {
            Ok(got) if got.value == want => {
                passed += 1;
                fallbacks += usize::from(got.engine.fallback);
                note_fallback(ctx, &got.engine);
            }
            Ok(got) => failures.push(json!({
                "case": i, "family": family, "n": a.len(), "expr": e.to_string(),
                "naive": value_json(&want), "local": value_json(&got.value),
            })),
            Err(err) => failures.push(json!({
                "case": i, "family": family, "n": a.len(), "expr": e.to_string(), "error": err.to_string(),
            })),
        }
    }
    ctx.timing("selftest", start);
    eprintln!(
        "selftest: {passed} passed, {} failed ({fallbacks} with fallback)",
        failures.len()
    );
    let ok = failures.is_empty();
    ctx.emit(json!({
        "cases": args.cases,
        "passed": passed,
        "failed": failures.len(),
        "fallbacks": fallbacks,
        "failures": failures,
    }))?;
    Ok(ok)
}

fn cmd_gen(args: &GenArgs, ctx: &mut Ctx) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    match &args.what {
        GenWhat::Structure { family, n, unary } => {
            let mut a = generators::family(family, *n, &mut rng)?;
            if !(0.0..=1.0).contains(unary) {
                return Err(Error::Input(format!("--unary must be a probability, got {unary}")));
            }
            if *unary > 0.0 {
                a = generators::with_unary(&a, "P", *unary, &mut rng)?;
            }
            ctx.emit(serde_json::to_value(a.to_json())?)
        }
        GenWhat::Expr { count } => {
            let gen = ExprGen::default();
            let lines: Vec<String> = (0..*count).map(|_| gen.expr(&mut rng).to_string()).collect();
            match &ctx.out {
                Some(path) => fs::write(path, lines.join("\n") + "\n")?,
                None => say(&lines.join("\n")),
            }
            ctx.report.result = json!(lines);
            Ok(())
        }
        GenWhat::Corpus { count } => {
            let dir = ctx
                .out
                .take()
                .ok_or_else(|| Error::Input("gen corpus needs --out DIR".into()))?;
            fs::create_dir_all(&dir)?;
            let mut index = Vec::new();
            for i in 0..*count {
                let (family, a, e) = generators::corpus_pair(i, &mut rng);
                let stem = format!("{i:04}");
                fs::write(
                    dir.join(format!("{stem}.json")),
                    serde_json::to_string(&a.to_json())? + "\n",
                )?;
                fs::write(dir.join(format!("{stem}.foc")), format!("{e}\n"))?;
                index.push(json!({"case": i, "family": family, "n": a.len(), "structure": format!("{stem}.json"), "query": format!("{stem}.foc")}));
            }
            fs::write(dir.join("index.json"), serde_json::to_string_pretty(&index)? + "\n")?;
            say(&json!({"cases": count, "dir": dir.display().to_string()}).to_string());
            ctx.report.result = json!({"cases": count});
            Ok(())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval(_) => "eval",
        Command::Decompose(_) => "decompose",
        Command::Cover(_) => "cover",
        Command::Game(_) => "game",
        Command::Remove(_) => "remove",
        Command::Transform(_) => "transform",
        Command::Reduce(_) => "reduce",
        Command::Bench(_) => "bench",
        Command::Selftest(_) => "selftest",
        Command::Gen(_) => "gen",
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::Input("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let mut ctx = Ctx {
        seed: cli.seed,
        out: cli.out.clone(),
        report: RunReport {
            command: command_name(&cli.command).to_string(),
            seed: cli.seed,
            ..RunReport::default()
        },
    };
    let ok = match &cli.command {
        Command::Eval(a) => cmd_eval(a, &mut ctx).map(|_| true),
        Command::Decompose(a) => cmd_decompose(a, &mut ctx).map(|_| true),
        Command::Cover(a) => cmd_cover(a, &mut ctx).map(|_| true),
        Command::Game(a) => cmd_game(a, &mut ctx).map(|_| true),
        Command::Remove(a) => cmd_remove(a, &mut ctx).map(|_| true),
        Command::Transform(a) => cmd_transform(a, &mut ctx).map(|_| true),
        Command::Reduce(a) => cmd_reduce(a, &mut ctx).map(|_| true),
        Command::Bench(a) => cmd_bench(a, &mut ctx).map(|_| true),
        Command::Selftest(a) => cmd_selftest(a, &mut ctx),
        Command::Gen(a) => cmd_gen(a, &mut ctx).map(|_| true),
    }?;
    if let Some(path) = &cli.report {
        fs::write(path, serde_json::to_string_pretty(&ctx.report)? + "\n")?;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
