//! Localized evaluation of basic cl-terms: neighbourhood covers, one
//! Splitter move per large cluster, and recursion on the removal structure.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value as Json;

use crate::covers::{build_cover, remove, splitter_move, MoveKind};
use crate::error::{Error, Result};
use crate::eval::Value;
use crate::locality::clterm::DEFAULT_WIDTH_CAP;
use crate::locality::compiled::Compiled;
use crate::locality::decompose::DecompositionStats;
use crate::locality::{
    cl_decompose_with, direct_values, eval_decomposition, BasicClTerm, ClBuilder, ClEngine, ClKind, ClPoly,
};
use crate::logic::analysis::{free_vars, max_dist_bound};
use crate::logic::{simplify, Expr, Formula, Registry, Var};
use crate::structures::{Elem, Structure};
use crate::transforms::{removal_unary_term, BasicTerm};

pub const DEFAULT_BRUTE_FORCE_THRESHOLD: usize = 32;
pub const DEFAULT_RECURSION_CAP: u32 = 2;
pub const DEFAULT_ENGINE_GAME_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalConfig {
    pub epsilon: f64,
    /// `lambda[r]` bounds the Splitter rounds at radius `r`; the last entry
    /// covers larger radii.
    pub lambda: Option<Vec<u32>>,
    pub recursion_cap: u32,
    /// Structures and clusters with at most this many elements are
    /// evaluated directly.
    pub brute_force_threshold: usize,
    pub width_cap: usize,
    /// Clusters up to this size get an optimal Splitter move.
    pub exact_game_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            epsilon: 0.5,
            lambda: None,
            recursion_cap: DEFAULT_RECURSION_CAP,
            brute_force_threshold: DEFAULT_BRUTE_FORCE_THRESHOLD,
            width_cap: DEFAULT_WIDTH_CAP,
            exact_game_cap: DEFAULT_ENGINE_GAME_CAP,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Input(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.recursion_cap < 1 {
            return Err(Error::Input("recursion cap must be at least 1".into()));
        }
        if matches!(&self.lambda, Some(l) if l.is_empty()) {
            return Err(Error::Input("lambda needs at least one value".into()));
        }
        Ok(())
    }

    pub fn lambda_at(&self, r: u32) -> Option<u32> {
        self.lambda.as_ref().map(|l| l[(r as usize).min(l.len() - 1)])
    }

    /// Recursion depth allowed for clusters of radius `s`.
    pub fn budget(&self, s: u32) -> u32 {
        self.lambda_at(s)
            .map_or(self.recursion_cap, |l| l.min(self.recursion_cap))
    }

    /// `epsilon / (2 lambda(s))`.
    pub fn delta(&self, s: u32) -> f64 {
        self.epsilon / (2.0 * f64::from(self.lambda_at(s).unwrap_or(self.recursion_cap).max(1)))
    }
}

/// Counters collected by a [`LocalizedEngine`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    /// depth → clusters split by a Splitter move at that depth
    pub depth_histogram: BTreeMap<u32, usize>,
    pub max_depth: u32,
    pub covers: usize,
    pub clusters: usize,
    /// Σ |X| over clusters handled by recursion.
    pub cluster_elements: usize,
    pub direct_targets: usize,
    pub splitter_moves: BTreeMap<String, usize>,
    pub term_cache_hits: usize,
    pub term_cache_misses: usize,
    pub fallback: bool,
    pub fallback_count: usize,
    /// First few fallback reasons.
    pub fallback_reasons: Vec<String>,
}

const MAX_REASONS: usize = 16;

type TermKey = (Option<Var>, Vec<Var>, Formula);

/// Cluster-recursive [`ClEngine`].
#[derive(Debug)]
pub struct LocalizedEngine {
    pub cfg: EvalConfig,
    builder: Mutex<ClBuilder>,
    terms: Mutex<HashMap<TermKey, Arc<ClPoly>>>,
    stats: Mutex<EngineStats>,
}

impl LocalizedEngine {
    pub fn new(cfg: EvalConfig) -> Self {
        LocalizedEngine {
            builder: Mutex::new(ClBuilder::new(cfg.width_cap)),
            cfg,
            terms: Mutex::new(HashMap::new()),
            stats: Mutex::new(EngineStats::default()),
        }
    }

    pub fn stats(&self) -> EngineStats {
        self.stats.lock().unwrap().clone()
    }

    fn note(&self, f: impl FnOnce(&mut EngineStats)) {
        f(&mut self.stats.lock().unwrap());
    }

    fn fall_back(&self, why: String) {
        self.note(|s| {
            s.fallback = true;
            s.fallback_count += 1;
            if s.fallback_reasons.len() < MAX_REASONS && !s.fallback_reasons.contains(&why) {
                s.fallback_reasons.push(why);
            }
        });
    }

    /// Values of `t` (anchored at `y1`) at `targets`.
    pub fn values(&self, a: &Structure, t: &BasicClTerm, targets: &[Elem], depth: u32) -> Result<Vec<i128>> {
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let threshold = self.cfg.brute_force_threshold;
        if a.len() <= threshold.max(1) {
            self.note(|s| s.direct_targets += targets.len());
            return direct_values(a, t, targets);
        }
        let radius = t.neighbourhood_radius();
        let budget = self.cfg.budget(2 * radius);
        let cover = build_cover(a, radius);
        self.note(|s| s.covers += 1);
        let mut by_cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &x) in targets.iter().enumerate() {
            by_cluster.entry(cover.cluster_of[x as usize]).or_default().push(i);
        }
        let mut direct = Vec::new();
        let mut split = Vec::new();
        for (id, idx) in by_cluster {
            if cover.clusters[id].len() <= threshold {
                direct.extend(idx);
            } else if depth >= budget {
                self.fall_back(format!("recursion budget {budget} reached at depth {depth}"));
                direct.extend(idx);
            } else {
                split.push((id, idx));
            }
        }
        let mut out = vec![0i128; targets.len()];
        if !direct.is_empty() {
            let elems: Vec<Elem> = direct.iter().map(|&i| targets[i]).collect();
            self.note(|s| s.direct_targets += elems.len());
            for (i, v) in direct.iter().zip(direct_values(a, t, &elems)?) {
                out[*i] = v;
            }
        }
        let parts: Vec<Result<(Vec<usize>, Vec<i128>)>> = split
            .into_par_iter()
            .map(|(id, idx)| {
                let elems: Vec<Elem> = idx.iter().map(|&i| targets[i]).collect();
                let cluster = &cover.clusters[id];
                let vals = match self.cluster_values(a, t, cluster, cover.centres[id], &elems, depth) {
                    Ok(v) => v,
                    Err(e @ (Error::Unsupported(_) | Error::Limit(_))) => {
                        self.fall_back(e.to_string());
                        self.note(|s| s.direct_targets += elems.len());
                        direct_values(a, t, &elems)?
                    }
                    Err(e) => return Err(e),
                };
                Ok((idx, vals))
            })
            .collect();
        for part in parts {
            let (idx, vals) = part?;
            for (i, v) in idx.into_iter().zip(vals) {
                out[i] = v;
            }
        }
        Ok(out)
    }

    fn cluster_values(
        &self,
        a: &Structure,
        t: &BasicClTerm,
        cluster: &[Elem],
        centre: Elem,
        targets: &[Elem],
        depth: u32,
    ) -> Result<Vec<i128>> {
        let local = |e: Elem| cluster.binary_search(&e).map(|i| i as Elem);
        let b = a.induced(cluster)?;
        let radius = t.neighbourhood_radius();
        let centre = local(centre).map_err(|_| Error::Internal("cluster centre outside its cluster".into()))?;
        let (d, how) = splitter_move(b.gaifman_graph(), centre, 2 * radius, self.cfg.exact_game_cap);
        self.note(|s| {
            *s.depth_histogram.entry(depth).or_insert(0) += 1;
            s.max_depth = s.max_depth.max(depth + 1);
            s.clusters += 1;
            s.cluster_elements += cluster.len();
            let key = match how {
                MoveKind::Exact => "exact",
                MoveKind::ForestRoot => "forest_root",
                MoveKind::MaxDegree => "max_degree",
            };
            *s.splitter_moves.entry(key.to_string()).or_insert(0) += 1;
        });
        let body = t.full_body();
        let rem = remove(&b, d, max_dist_bound(&body).max(1))?;
        let vars = t.vars();
        let basic = BasicTerm::unary(vars[0].clone(), vars[1..].to_vec(), body);
        let (grounds, unaries) = removal_unary_term(&basic, &rem.names)?;
        let s = &rem.structure;
        let locals: Vec<Elem> = targets
            .iter()
            .map(|&x| local(x).map_err(|_| Error::Internal("target outside its cluster".into())))
            .collect::<Result<_>>()?;
        let kept: Vec<Elem> = locals.iter().filter_map(|&x| rem.to_new(x)).collect();
        let mut rest = vec![0i128; kept.len()];
        for u in &unaries {
            for (acc, v) in rest.iter_mut().zip(self.term_values(s, u, &kept, depth + 1)?) {
                *acc += v;
            }
        }
        let mut at_d = 0;
        if locals.contains(&d) {
            for g in &grounds {
                at_d += self.term_ground(s, g, depth + 1)?;
            }
        }
        let mut rest = rest.into_iter();
        Ok(locals
            .iter()
            .map(|&x| if x == d { at_d } else { rest.next().unwrap_or(0) })
            .collect())
    }

    fn poly(&self, free: Option<&Var>, counted: &[Var], body: &Formula) -> Result<Arc<ClPoly>> {
        let key = (free.cloned(), counted.to_vec(), body.clone());
        if let Some(p) = self.terms.lock().unwrap().get(&key) {
            let p = p.clone();
            self.note(|s| s.term_cache_hits += 1);
            return Ok(p);
        }
        let p = Arc::new(self.builder.lock().unwrap().count_term(free, counted, body)?);
        self.note(|s| s.term_cache_misses += 1);
        self.terms.lock().unwrap().insert(key, p.clone());
        Ok(p)
    }

    /// Values at `targets` of a unary term over a removal structure.
    fn term_values(&self, s: &Structure, u: &BasicTerm, targets: &[Elem], depth: u32) -> Result<Vec<i128>> {
        let free = u
            .free
            .clone()
            .ok_or_else(|| Error::Internal("expected a unary term".into()))?;
        let body = decide_closed(&u.body, s)?;
        if body == Formula::ff() || targets.is_empty() {
            return Ok(vec![0; targets.len()]);
        }
        if u.counted.is_empty() {
            let c = Compiled::new(&body, std::slice::from_ref(&free), s)?;
            let mut ev = c.evaluator();
            return Ok(targets.iter().map(|&x| i128::from(c.eval(&mut ev, &[x]))).collect());
        }
        let p = self.poly(Some(&free), &u.counted, &body)?;
        let (unary, ground) = self.basic_values(s, &p, targets, depth)?;
        (0..targets.len())
            .map(|i| {
                p.eval_i128(&|b| match b.kind {
                    ClKind::Unary => unary[b][i],
                    ClKind::Ground => ground[b],
                })
                .ok_or_else(overflow)
            })
            .collect()
    }

    /// Value of a ground term over a removal structure.
    fn term_ground(&self, s: &Structure, g: &BasicTerm, depth: u32) -> Result<i128> {
        let body = decide_closed(&g.body, s)?;
        if g.counted.is_empty() {
            return match body {
                Formula::Bool(b) => Ok(i128::from(b)),
                other => Err(Error::Internal(format!("closed body did not reduce: {other}"))),
            };
        }
        if body == Formula::ff() {
            return Ok(0);
        }
        let p = self.poly(None, &g.counted, &body)?;
        let (_, ground) = self.basic_values(s, &p, &[], depth)?;
        p.eval_i128(&|b| ground[b]).ok_or_else(overflow)
    }

    #[allow(clippy::type_complexity)]
    fn basic_values(
        &self,
        s: &Structure,
        p: &ClPoly,
        targets: &[Elem],
        depth: u32,
    ) -> Result<(HashMap<BasicClTerm, Vec<i128>>, HashMap<BasicClTerm, i128>)> {
        let mut unary = HashMap::new();
        let mut ground = HashMap::new();
        let all: Vec<Elem> = s.elements().collect();
        for b in p.basics() {
            match b.kind {
                ClKind::Unary => {
                    let v = self.values(s, &b, targets, depth)?;
                    unary.insert((*b).clone(), v);
                }
                ClKind::Ground => {
                    let v: i128 = self.values(s, &b, &all, depth)?.into_iter().sum();
                    ground.insert((*b).clone(), v);
                }
            }
        }
        Ok((unary, ground))
    }
}

fn overflow() -> Error {
    Error::Limit("cl-term value exceeds 128-bit integers".into())
}

/// Replaces every closed non-constant subformula by its truth value in `s`.
fn decide_closed(f: &Formula, s: &Structure) -> Result<Formula> {
    fn go(f: &Formula, s: &Structure) -> Result<Formula> {
        if !matches!(f, Formula::Bool(_)) && free_vars(f).is_empty() {
            let c = Compiled::new(f, &[], s)?;
            return Ok(Formula::Bool(c.eval(&mut c.evaluator(), &[])));
        }
        Ok(match f {
            Formula::Not(a) => Formula::not(go(a, s)?),
            Formula::Or(a, b) => Formula::or(go(a, s)?, go(b, s)?),
            Formula::Exists(x, body) => Formula::exists(x.clone(), go(body, s)?),
            other => other.clone(),
        })
    }
    Ok(simplify(&go(f, s)?))
}

impl ClEngine for LocalizedEngine {
    fn unary(&self, a: &Structure, t: &BasicClTerm) -> Result<Vec<i128>> {
        let all: Vec<Elem> = a.elements().collect();
        self.values(a, t, &all, 0)
    }
}

/// Values of a unary basic term at every element.
pub fn localized_unary(a: &Structure, t: &BasicClTerm, cfg: &EvalConfig) -> Result<(Vec<i128>, EngineStats)> {
    cfg.validate()?;
    if t.kind != ClKind::Unary {
        return Err(Error::Input(format!("`{t}` is not a unary cl-term")));
    }
    let engine = LocalizedEngine::new(cfg.clone());
    let v = engine.unary(a, t)?;
    Ok((v, engine.stats()))
}

/// Value of a ground basic term.
pub fn localized_ground(a: &Structure, t: &BasicClTerm, cfg: &EvalConfig) -> Result<(i128, EngineStats)> {
    cfg.validate()?;
    let engine = LocalizedEngine::new(cfg.clone());
    let v = engine.ground(a, t)?;
    Ok((v, engine.stats()))
}

/// Result of [`evaluate`].
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Value,
    pub engine: EngineStats,
    pub decomposition: DecompositionStats,
    pub layers: usize,
    pub symbols: usize,
    pub decompose_ms: f64,
    pub evaluate_ms: f64,
}

impl Evaluation {
    pub fn report(&self) -> Json {
        serde_json::json!({
            "result": self.value.to_json(),
            "layers": self.layers,
            "symbols": self.symbols,
            "basic_terms": self.decomposition.basic_terms,
            "oracle_calls": self.decomposition.oracle_calls,
            "engine": self.engine,
            "timings_ms": {"decompose": self.decompose_ms, "evaluate": self.evaluate_ms},
        })
    }
}

/// Decides a sentence or computes a ground term via a cl-decomposition
/// evaluated by the localized engine.
pub fn evaluate(e: &Expr, a: &Structure, cfg: &EvalConfig, preds: &Registry) -> Result<Evaluation> {
    cfg.validate()?;
    let start = Instant::now();
    let d = cl_decompose_with(e, &a.signature(), preds, cfg.width_cap)?;
    let decompose_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let engine = LocalizedEngine::new(cfg.clone());
    let (value, decomposition) = eval_decomposition(&d, a, &engine, preds)?;
    Ok(Evaluation {
        value,
        engine: engine.stats(),
        decomposition,
        layers: d.layers.len(),
        symbols: d.layers.iter().map(Vec::len).sum(),
        decompose_ms,
        evaluate_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Ground value of `t` by enumerating all `n^k` tuples.
pub fn naive_ground(a: &Structure, t: &BasicClTerm) -> Result<i128> {
    let vars = t.vars();
    // body first so that distance checks only run on candidate tuples
    let body = Formula::and(t.body.clone(), t.full_body());
    let c = Compiled::new(&body, &vars, a)?;
    let n = a.len() as Elem;
    let k = vars.len();
    Ok((0..n)
        .into_par_iter()
        .map_init(
            || (c.evaluator(), vec![0 as Elem; k]),
            |(ev, tuple), first| {
                tuple[0] = first;
                let mut count = 0i128;
                let mut rest = vec![0 as Elem; k - 1];
                loop {
                    tuple[1..].copy_from_slice(&rest);
                    count += i128::from(c.eval(ev, tuple));
                    // odometer over the remaining coordinates
                    let mut i = 0;
                    while i < rest.len() {
                        rest[i] += 1;
                        if rest[i] < n {
                            break;
                        }
                        rest[i] = 0;
                        i += 1;
                    }
                    if i == rest.len() {
                        break;
                    }
                }
                count
            },
        )
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub size: usize,
    pub value: String,
    pub local_ms: f64,
    pub naive_ms: Option<f64>,
    pub agree: Option<bool>,
    pub fallback: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub family: String,
    pub term: String,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(time) against log(n).
    pub local_slope: Option<f64>,
    pub naive_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let v = f()?;
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        out = Some(v);
    }
    Ok((out.expect("at least one run"), best))
}

/// Times localized and naive evaluation of a ground term over a family of
/// structures. Naive runs are skipped above `naive_cap` elements.
pub fn benchmark(
    family: &str,
    make: &dyn Fn(usize) -> Structure,
    sizes: &[usize],
    t: &BasicClTerm,
    cfg: &EvalConfig,
    naive_cap: usize,
    repeats: usize,
) -> Result<BenchReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in sizes {
        let a = make(n);
        let mut fallback = false;
        let (value, local_ms) = best_of(repeats, || {
            let (v, stats) = localized_ground(&a, t, cfg)?;
            fallback |= stats.fallback;
            Ok(v)
        })?;
        let (naive_ms, agree) = if a.len() <= naive_cap {
            let work = (a.len() as f64).powi(t.width() as i32);
            let (naive, ms) = best_of(if work > 1e7 { 1 } else { repeats }, || naive_ground(&a, t))?;
            (Some(ms), Some(naive == value))
        } else {
            (None, None)
        };
        rows.push(BenchRow {
            family: family.to_string(),
            n: a.len(),
            size: a.size_norm(),
            value: value.to_string(),
            local_ms,
            naive_ms,
            agree,
            fallback,
        });
    }
    let local: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.local_ms)).collect();
    let naive: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.naive_ms.map(|ms| (r.n as f64, ms)))
        .collect();
    Ok(BenchReport {
        family: family.to_string(),
        term: t.to_string(),
        local_slope: fit_slope(&local),
        naive_slope: fit_slope(&naive),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;
    use crate::locality::eval_basic_cl;
    use crate::logic::parse_expr;
    use crate::structures::PatternGraph;

    fn star(n: usize) -> Structure {
        let mut b = Structure::builder().elements((0..n).map(|i| format!("v{i}")));
        for i in 1..n {
            b.add_tuple("E", &["v0".to_string(), format!("v{i}")]);
        }
        b.build().unwrap()
    }

    fn path(n: usize) -> Structure {
        let mut b = Structure::builder().elements((0..n).map(|i| format!("v{i}")));
        for i in 1..n {
            b.add_tuple("E", &[format!("v{}", i - 1), format!("v{i}")]);
        }
        b.build().unwrap()
    }

    fn term(kind: ClKind, body: &str) -> BasicClTerm {
        let f = crate::logic::parse_formula(body, None, &Registry::builtin()).unwrap();
        BasicClTerm::new(kind, &["y1".into(), "y2".into()], PatternGraph::complete(2), 1, &f)
    }

    fn small() -> EvalConfig {
        EvalConfig {
            brute_force_threshold: 4,
            ..EvalConfig::default()
        }
    }

    #[test]
    fn star_matches_direct() {
        let a = star(50);
        for body in ["E(y1, y2)", "(E(y2, y1) | E(y1, y2))", "exists z. (E(z, y2) & !z = y1)"] {
            let t = term(ClKind::Unary, body);
            let (v, stats) = localized_unary(&a, &t, &small()).unwrap();
            let want: Vec<i128> = a.elements().map(|x| eval_basic_cl(&a, &t, Some(x)).unwrap()).collect();
            assert_eq!(v, want, "{body}");
            assert!(stats.clusters >= 1, "{stats:?}");
        }
    }

    #[test]
    fn path_values() {
        let a = path(40);
        let t = term(ClKind::Unary, "exists z. (E(y1, z) & (E(z, y2) & E(y2, y1)))");
        let (v, _) = localized_unary(&a, &t, &small()).unwrap();
        assert!(v.iter().all(|&x| x == 0));
        let g = term(ClKind::Ground, "E(y1, y2)");
        assert_eq!(localized_ground(&a, &g, &small()).unwrap().0, 39);
        assert_eq!(naive_ground(&a, &g).unwrap(), 39);
    }

    #[test]
    fn evaluate_matches_reference() {
        let preds = Registry::builtin();
        let a = star(30);
        for text in [
            "exists y. #(z). E(y, z) >= 1",
            "#(x, y). E(x, y)",
            "exists x. prime(#(y). (E(x, y) | E(y, x)))",
        ] {
            let e = parse_expr(text, None, &preds).unwrap();
            let got = evaluate(&e, &a, &small(), &preds).unwrap();
            assert_eq!(got.value, eval(&e, &a, &preds).unwrap(), "{text}");
        }
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&x: &f64| (x, 3.0 * x * x)).collect();
        assert!((fit_slope(&pts).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(fit_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn config_checks() {
        assert!(EvalConfig {
            recursion_cap: 0,
            ..EvalConfig::default()
        }
        .validate()
        .is_err());
        assert!(EvalConfig {
            epsilon: 0.0,
            ..EvalConfig::default()
        }
        .validate()
        .is_err());
        let c = EvalConfig {
            lambda: Some(vec![1, 3]),
            recursion_cap: 5,
            ..EvalConfig::default()
        };
        assert_eq!(c.budget(0), 1);
        assert_eq!(c.budget(9), 3);
    }
}
