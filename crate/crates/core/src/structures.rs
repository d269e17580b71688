//! Finite relational structures.
//!
//! A [`Structure`] is immutable once built. Elements are addressed by dense
//! indices ([`Elem`]) assigned in lexicographic order of their identifiers,
//! so every iteration over the universe is deterministic. The Gaifman graph,
//! per-relation incidence lists and single-source distance vectors are
//! computed lazily and cached behind synchronized cells, which makes a
//! structure safe to share between worker threads.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense element index inside one structure.
pub type Elem = u32;

/// Gaifman distance. `Infinite` compares greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn at_most(self, bound: u32) -> bool {
        matches!(self, Distance::Finite(d) if d <= bound)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

/// Relation symbols with their arities, ordered by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, arity: usize) -> Self {
        self.relations.insert(name.into(), arity);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, arity: usize) -> Option<usize> {
        self.relations.insert(name.into(), arity)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn is_subset_of(&self, other: &Signature) -> bool {
        self.iter().all(|(n, a)| other.arity(n) == Some(a))
    }

    pub fn union(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for (n, a) in other.iter() {
            if let Some(prev) = out.insert(n, a) {
                if prev != a {
                    return Err(Error::Arity {
                        name: n.to_string(),
                        expected: prev,
                        found: a,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// The interpretation of one relation symbol.
#[derive(Debug)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Box<[Elem]>>,
    index: HashSet<Box<[Elem]>>,
    members: Option<Vec<bool>>,
    incidence: OnceLock<Vec<Vec<u32>>>,
    universe_len: usize,
}

impl Relation {
    fn new(arity: usize, mut tuples: Vec<Box<[Elem]>>, universe_len: usize) -> Self {
        tuples.sort();
        tuples.dedup();
        let members = (arity == 1).then(|| {
            let mut m = vec![false; universe_len];
            for t in &tuples {
                m[t[0] as usize] = true;
            }
            m
        });
        let index = if arity == 1 {
            HashSet::new()
        } else {
            tuples.iter().cloned().collect()
        };
        Relation {
            arity,
            tuples,
            index,
            members,
            incidence: OnceLock::new(),
            universe_len,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Box<[Elem]>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        match &self.members {
            Some(m) => tuple.len() == 1 && m.get(tuple[0] as usize).copied().unwrap_or(false),
            None => self.index.contains(tuple),
        }
    }

    /// Indices of tuples containing `e`.
    pub fn incident(&self, e: Elem) -> &[u32] {
        let inc = self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.universe_len];
            for (i, t) in self.tuples.iter().enumerate() {
                let mut seen: Vec<Elem> = Vec::with_capacity(t.len());
                for &x in t.iter() {
                    if !seen.contains(&x) {
                        seen.push(x);
                        inc[x as usize].push(i as u32);
                    }
                }
            }
            inc
        });
        &inc[e as usize]
    }
}

/// Undirected simple graph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaifmanGraph {
    adjacency: Arc<Vec<Vec<Elem>>>,
}

impl GaifmanGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Elem, Elem)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        GaifmanGraph {
            adjacency: Arc::new(adj),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: Elem) -> &[Elem] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: Elem) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn has_edge(&self, a: Elem, b: Elem) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, l)| {
            l.iter()
                .filter(move |&&b| (a as Elem) < b)
                .map(move |&b| (a as Elem, b))
        })
    }

    /// BFS distances from `sources`, restricted to vertices accepted by `allowed`,
    /// up to `radius` (inclusive). Returns `(vertex, distance)` in BFS order.
    pub fn bfs_bounded(
        &self,
        sources: &[Elem],
        radius: Option<u32>,
        allowed: impl Fn(Elem) -> bool,
    ) -> Vec<(Elem, u32)> {
        let mut seen: HashMap<Elem, u32> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed(s) && !seen.contains_key(&s) {
                seen.insert(s, 0);
                order.push((s, 0));
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = seen[&v];
            if radius.is_some_and(|r| d >= r) {
                continue;
            }
            for &w in self.neighbors(v) {
                if allowed(w) && !seen.contains_key(&w) {
                    seen.insert(w, d + 1);
                    order.push((w, d + 1));
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Elem>> {
        let n = self.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s as Elem];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                for &w in self.neighbors(v) {
                    if comp[w as usize] == usize::MAX {
                        comp[w as usize] = id;
                        members.push(w);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_forest(&self) -> bool {
        let comps = self.components().len();
        self.num_edges() + comps == self.num_vertices()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

/// Reusable visited-stamp buffer for repeated bounded BFS runs on one structure.
#[derive(Debug, Default)]
pub struct BfsScratch {
    stamp: Vec<u32>,
    dist: Vec<u32>,
    generation: u32,
    queue: VecDeque<Elem>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        BfsScratch {
            stamp: vec![0; n],
            dist: vec![0; n],
            generation: 0,
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.dist.resize(n, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.queue.clear();
    }

    /// Vertices within `radius` of any source, with their distances, in BFS order.
    pub fn ball(&mut self, graph: &GaifmanGraph, sources: &[Elem], radius: u32) -> Vec<(Elem, u32)> {
        self.reset(graph.num_vertices());
        let g = self.generation;
        let mut out = Vec::new();
        for &s in sources {
            if self.stamp[s as usize] != g {
                self.stamp[s as usize] = g;
                self.dist[s as usize] = 0;
                out.push((s, 0));
                self.queue.push_back(s);
            }
        }
        while let Some(v) = self.queue.pop_front() {
            let d = self.dist[v as usize];
            if d >= radius {
                continue;
            }
            for &w in graph.neighbors(v) {
                if self.stamp[w as usize] != g {
                    self.stamp[w as usize] = g;
                    self.dist[w as usize] = d + 1;
                    out.push((w, d + 1));
                    self.queue.push_back(w);
                }
            }
        }
        out
    }

    /// Whether `dist(a, b) <= bound`, by a BFS from `a` cut off at `bound`.
    pub fn within(&mut self, graph: &GaifmanGraph, a: Elem, b: Elem, bound: u32) -> bool {
        if a == b {
            return true;
        }
        if bound == 0 {
            return false;
        }
        if bound == 1 {
            return graph.has_edge(a, b);
        }
        self.reset(graph.num_vertices());
        let g = self.generation;
        self.stamp[a as usize] = g;
        self.dist[a as usize] = 0;
        self.queue.push_back(a);
        while let Some(v) = self.queue.pop_front() {
            let d = self.dist[v as usize];
            if d >= bound {
                continue;
            }
            for &w in graph.neighbors(v) {
                if w == b {
                    return true;
                }
                if self.stamp[w as usize] != g {
                    self.stamp[w as usize] = g;
                    self.dist[w as usize] = d + 1;
                    self.queue.push_back(w);
                }
            }
        }
        false
    }
}

#[derive(Debug, Default)]
struct GraphCache {
    gaifman: OnceLock<GaifmanGraph>,
    distances: Mutex<HashMap<Elem, Arc<Vec<u32>>>>,
}

/// A finite relational structure with a non-empty universe.
#[derive(Clone, Debug)]
pub struct Structure {
    names: Arc<Vec<Arc<str>>>,
    index: Arc<HashMap<Arc<str>, Elem>>,
    relations: BTreeMap<String, Arc<Relation>>,
    graph: Arc<GraphCache>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.relations.len() == other.relations.len()
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|((n1, r1), (n2, r2))| n1 == n2 && r1.arity == r2.arity && r1.tuples == r2.tuples)
    }
}

impl Eq for Structure {}

/// Collects named elements and tuples before sorting the universe.
#[derive(Debug, Default)]
pub struct StructureBuilder {
    universe: BTreeSet<String>,
    relations: BTreeMap<String, (usize, Vec<Vec<String>>)>,
}

impl StructureBuilder {
    pub fn element(mut self, name: impl Into<String>) -> Self {
        self.universe.insert(name.into());
        self
    }

    pub fn elements<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.universe.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn relation(mut self, name: impl Into<String>, arity: usize) -> Self {
        self.relations.entry(name.into()).or_insert((arity, Vec::new()));
        self
    }

    /// Adds a tuple; the relation is declared implicitly with the tuple's length.
    pub fn tuple<S: AsRef<str>>(mut self, name: &str, tuple: &[S]) -> Self {
        self.add_tuple(name, tuple);
        self
    }

    pub fn add_tuple<S: AsRef<str>>(&mut self, name: &str, tuple: &[S]) {
        let entry = self
            .relations
            .entry(name.to_string())
            .or_insert((tuple.len(), Vec::new()));
        entry.1.push(tuple.iter().map(|s| s.as_ref().to_string()).collect());
    }

    pub fn add_element(&mut self, name: impl Into<String>) {
        self.universe.insert(name.into());
    }

    pub fn build(self) -> Result<Structure> {
        if self.universe.is_empty() {
            return Err(Error::InvalidStructure("universe must be non-empty".into()));
        }
        let names: Vec<Arc<str>> = self.universe.into_iter().map(Arc::from).collect();
        let index: HashMap<Arc<str>, Elem> = names.iter().enumerate().map(|(i, n)| (n.clone(), i as Elem)).collect();
        let mut rels = BTreeMap::new();
        for (name, (arity, tuples)) in self.relations {
            let mut mapped = Vec::with_capacity(tuples.len());
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::Arity {
                        name,
                        expected: arity,
                        found: t.len(),
                    });
                }
                let mut row = Vec::with_capacity(arity);
                for e in &t {
                    match index.get(e.as_str()) {
                        Some(&i) => row.push(i),
                        None => return Err(Error::UnknownElement(e.clone())),
                    }
                }
                mapped.push(row.into_boxed_slice());
            }
            rels.insert(name, (arity, mapped));
        }
        Ok(Structure::from_parts(names, rels))
    }
}

impl Structure {
    pub fn builder() -> StructureBuilder {
        StructureBuilder::default()
    }

    /// Builds a structure from a sorted, duplicate-free name list and index tuples.
    pub(crate) fn from_parts(
        names: Vec<Arc<str>>,
        relations: BTreeMap<String, (usize, Vec<Box<[Elem]>>)>,
    ) -> Structure {
        debug_assert!(names.windows(2).all(|w| w[0] < w[1]));
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i as Elem)).collect();
        let n = names.len();
        let relations = relations
            .into_iter()
            .map(|(name, (arity, tuples))| (name, Arc::new(Relation::new(arity, tuples, n))))
            .collect();
        Structure {
            names: Arc::new(names),
            index: Arc::new(index),
            relations,
            graph: Arc::new(GraphCache::default()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Always false; structures have non-empty universes.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.names.len() as Elem
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e as usize]
    }

    pub fn names(&self) -> &[Arc<str>] {
        &self.names
    }

    pub fn elem(&self, name: &str) -> Result<Elem> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (n, r) in &self.relations {
            sig.insert(n.clone(), r.arity);
        }
        sig
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name).map(Arc::as_ref)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(n, r)| (n.as_str(), r.as_ref()))
    }

    pub fn holds(&self, name: &str, tuple: &[Elem]) -> bool {
        self.relations
            .get(name)
            .is_some_and(|r| r.arity == tuple.len() && r.contains(tuple))
    }

    /// `|A| + Σ_R |R^A|`, used for reporting.
    pub fn size_norm(&self) -> usize {
        self.len() + self.relations.values().map(|r| r.len()).sum::<usize>()
    }

    pub fn gaifman_graph(&self) -> &GaifmanGraph {
        self.graph.gaifman.get_or_init(|| {
            let mut edges = Vec::new();
            for r in self.relations.values() {
                if r.arity < 2 {
                    continue;
                }
                for t in &r.tuples {
                    for i in 0..t.len() {
                        for j in i + 1..t.len() {
                            if t[i] != t[j] {
                                edges.push((t[i], t[j]));
                            }
                        }
                    }
                }
            }
            GaifmanGraph::from_edges(self.len(), edges)
        })
    }

    /// Full BFS distance vector from `source`, memoized (`u32::MAX` = unreachable).
    pub fn distances_from(&self, source: Elem) -> Arc<Vec<u32>> {
        if let Some(d) = self.graph.distances.lock().unwrap().get(&source) {
            return d.clone();
        }
        let g = self.gaifman_graph();
        let mut dist = vec![u32::MAX; self.len()];
        dist[source as usize] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize];
            for &w in g.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        let dist = Arc::new(dist);
        self.graph.distances.lock().unwrap().insert(source, dist.clone());
        dist
    }

    fn check(&self, e: Elem) -> Result<()> {
        if (e as usize) < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownElement(format!("#{e}")))
        }
    }

    /// `min_i dist(a_i, b)`.
    pub fn dist(&self, a: &[Elem], b: Elem) -> Result<Distance> {
        self.check(b)?;
        let mut best = Distance::Infinite;
        for &x in a {
            self.check(x)?;
            let d = self.distances_from(x)[b as usize];
            if d != u32::MAX {
                best = best.min(Distance::Finite(d));
            }
        }
        Ok(best)
    }

    /// The r-ball around a tuple, sorted.
    pub fn ball(&self, tuple: &[Elem], r: u32) -> Result<Vec<Elem>> {
        for &x in tuple {
            self.check(x)?;
        }
        let mut out: Vec<Elem> = self
            .gaifman_graph()
            .bfs_bounded(tuple, Some(r), |_| true)
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Induced substructure on the r-ball of `tuple`.
    pub fn neighborhood(&self, tuple: &[Elem], r: u32) -> Result<Structure> {
        let ball = self.ball(tuple, r)?;
        if ball.is_empty() {
            return Err(Error::Input("neighbourhood of the empty tuple".into()));
        }
        self.induced(&ball)
    }

    /// Induced substructure on `set` (duplicates ignored).
    pub fn induced(&self, set: &[Elem]) -> Result<Structure> {
        let mut set: Vec<Elem> = set.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(Error::Input("induced substructure on an empty set".into()));
        }
        for &e in &set {
            self.check(e)?;
        }
        let remap: HashMap<Elem, Elem> = set.iter().enumerate().map(|(i, &e)| (e, i as Elem)).collect();
        let names = set.iter().map(|&e| self.names[e as usize].clone()).collect();
        let mut rels = BTreeMap::new();
        for (name, rel) in &self.relations {
            let mut tuples = Vec::new();
            if rel.arity == 0 {
                tuples = rel.tuples.clone();
            } else if set.len() * 4 < self.len() {
                for &e in &set {
                    for &ti in rel.incident(e) {
                        let t = &rel.tuples[ti as usize];
                        // emit each tuple once: from its smallest entry
                        if t.iter().copied().min() != Some(e) {
                            continue;
                        }
                        if let Some(mapped) = t.iter().map(|x| remap.get(x).copied()).collect::<Option<Vec<_>>>() {
                            tuples.push(mapped.into_boxed_slice());
                        }
                    }
                }
            } else {
                for t in &rel.tuples {
                    if let Some(mapped) = t.iter().map(|x| remap.get(x).copied()).collect::<Option<Vec<_>>>() {
                        tuples.push(mapped.into_boxed_slice());
                    }
                }
            }
            rels.insert(name.clone(), (rel.arity, tuples));
        }
        Ok(Structure::from_parts(names, rels))
    }

    pub fn pattern_graph(&self, tuple: &[Elem], r: u32) -> Result<PatternGraph> {
        let k = tuple.len();
        let mut g = PatternGraph::empty(k);
        for i in 0..k {
            for j in i + 1..k {
                if self.dist(&[tuple[i]], tuple[j])?.at_most(r) {
                    g.add_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    /// Adds relations over the same universe. Adding only relations of arity
    /// at most 1 keeps the cached Gaifman graph and distances.
    pub fn expand(&self, extra: Vec<(String, usize, Vec<Vec<Elem>>)>) -> Result<Structure> {
        let mut out = self.clone();
        let mut graph_changes = false;
        for (name, arity, tuples) in extra {
            if out.relations.contains_key(&name) {
                return Err(Error::Input(format!("expansion redefines relation `{name}`")));
            }
            let mut boxed = Vec::with_capacity(tuples.len());
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::Arity {
                        name: name.clone(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                for &e in &t {
                    self.check(e)?;
                }
                boxed.push(t.into_boxed_slice());
            }
            graph_changes |= arity >= 2 && !boxed.is_empty();
            out.relations
                .insert(name, Arc::new(Relation::new(arity, boxed, self.len())));
        }
        if graph_changes {
            out.graph = Arc::new(GraphCache::default());
        }
        Ok(out)
    }

    /// Restriction to a sub-signature.
    pub fn reduct(&self, sig: &Signature) -> Result<Structure> {
        if !sig.is_subset_of(&self.signature()) {
            return Err(Error::Input(
                "reduct signature is not contained in the structure's signature".into(),
            ));
        }
        let mut out = self.clone();
        out.relations.retain(|n, _| sig.contains(n));
        if out
            .relations
            .values()
            .map(|r| r.len() * usize::from(r.arity >= 2))
            .sum::<usize>()
            != self
                .relations
                .values()
                .map(|r| r.len() * usize::from(r.arity >= 2))
                .sum::<usize>()
        {
            out.graph = Arc::new(GraphCache::default());
        }
        Ok(out)
    }

    /// Disjoint union; identifiers are prefixed with `L:` and `R:`.
    pub fn disjoint_union(left: &Structure, right: &Structure) -> Result<Structure> {
        let mut b = Structure::builder();
        for (prefix, s) in [("L:", left), ("R:", right)] {
            for e in s.elements() {
                b.add_element(format!("{prefix}{}", s.name(e)));
            }
            for (name, rel) in s.relations() {
                b = b.relation(name, rel.arity());
                for t in rel.tuples() {
                    let row: Vec<String> = t.iter().map(|&x| format!("{prefix}{}", s.name(x))).collect();
                    b.add_tuple(name, &row);
                }
            }
        }
        let sig_l = left.signature();
        let sig_r = right.signature();
        sig_l.union(&sig_r)?;
        b.build()
    }

    pub fn to_json(&self) -> StructureJson {
        StructureJson {
            universe: self.names.iter().map(|n| n.to_string()).collect(),
            relations: self
                .relations
                .iter()
                .map(|(n, r)| {
                    (
                        n.clone(),
                        RelationJson {
                            arity: r.arity,
                            tuples: r
                                .tuples
                                .iter()
                                .map(|t| t.iter().map(|&e| self.name(e).to_string()).collect())
                                .collect(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(json: &StructureJson) -> Result<Structure> {
        let mut b = Structure::builder().elements(json.universe.iter().cloned());
        for (name, rel) in &json.relations {
            b = b.relation(name.clone(), rel.arity);
            if rel.arity == 0 && rel.tuples.len() > 1 {
                return Err(Error::InvalidStructure(format!(
                    "0-ary relation `{name}` may hold at most the empty tuple"
                )));
            }
            for t in &rel.tuples {
                if t.len() != rel.arity {
                    return Err(Error::Arity {
                        name: name.clone(),
                        expected: rel.arity,
                        found: t.len(),
                    });
                }
                b.add_tuple(name, t);
            }
        }
        if json.universe.len() != json.universe.iter().collect::<BTreeSet<_>>().len() {
            return Err(Error::InvalidStructure("duplicate element identifiers".into()));
        }
        b.build()
    }

    pub fn from_json_str(text: &str) -> Result<Structure> {
        let json: StructureJson = serde_json::from_str(text)?;
        Structure::from_json(&json)
    }
}

/// On-disk structure format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub universe: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, RelationJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationJson {
    pub arity: usize,
    pub tuples: Vec<Vec<String>>,
}

/// Undirected graph on `[k]` (stored 0-based) recording which tuple entries
/// are within a distance threshold of each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternGraph {
    k: usize,
    edges: u32,
}

/// Largest supported pattern width (pairs must fit in a 32-bit mask).
pub const MAX_PATTERN_WIDTH: usize = 8;

impl PatternGraph {
    pub fn empty(k: usize) -> Self {
        assert!(k <= MAX_PATTERN_WIDTH, "pattern width {k} exceeds {MAX_PATTERN_WIDTH}");
        PatternGraph { k, edges: 0 }
    }

    pub fn complete(k: usize) -> Self {
        let mut g = Self::empty(k);
        for i in 0..k {
            for j in i + 1..k {
                g.add_edge(i, j);
            }
        }
        g
    }

    fn bit(k: usize, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        1 << (a * k + b)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.k && j < self.k);
        self.edges |= Self::bit(self.k, i, j);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges & Self::bit(self.k, i, j) != 0
    }

    /// Edges `(i, j)`, 0-based with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.edges.count_ones() as usize
    }

    /// All graphs on `[k]`, in mask order.
    pub fn all(k: usize) -> Vec<PatternGraph> {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        (0u64..(1u64 << pairs.len()))
            .map(|mask| {
                let mut g = PatternGraph::empty(k);
                for (b, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        g.add_edge(i, j);
                    }
                }
                g
            })
            .collect()
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.k];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for s in 0..self.k {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut members = vec![s];
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                for w in 0..self.k {
                    if comp[w] == usize::MAX && self.has_edge(v, w) {
                        comp[w] = id;
                        members.push(w);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.k <= 1 || self.components().len() == 1
    }

    /// Induced subgraph on `vertices`, renumbered in the given order.
    pub fn induced(&self, vertices: &[usize]) -> PatternGraph {
        let mut g = PatternGraph::empty(vertices.len());
        for (a, &i) in vertices.iter().enumerate() {
            for (b, &j) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(i, j) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// The graph obtained by renaming vertex `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> PatternGraph {
        let mut g = PatternGraph::empty(self.k);
        for (i, j) in self.edges() {
            g.add_edge(perm[i], perm[j]);
        }
        g
    }
}

impl fmt::Display for PatternGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}[", self.k)?;
        for (n, (i, j)) in self.edges().into_iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}-{}", i + 1, j + 1)?;
        }
        write!(f, "]")
    }
}

impl Serialize for PatternGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            k: usize,
            edges: Vec<(usize, usize)>,
        }
        Repr {
            k: self.k,
            edges: self.edges().into_iter().map(|(i, j)| (i + 1, j + 1)).collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> Structure {
        Structure::builder()
            .elements(["a", "b", "c"])
            .tuple("E", &["a", "b"])
            .tuple("E", &["b", "c"])
            .build()
            .unwrap()
    }

    #[test]
    fn gaifman_edges() {
        let s = Structure::builder()
            .tuple("E", &["a", "b"])
            .elements(["a", "b"])
            .build()
            .unwrap();
        assert_eq!(s.gaifman_graph().edges().collect::<Vec<_>>(), vec![(0, 1)]);

        let s = Structure::builder()
            .elements(["a", "b"])
            .tuple("P", &["a"])
            .tuple("P", &["b"])
            .build()
            .unwrap();
        assert_eq!(s.gaifman_graph().num_edges(), 0);

        let s = Structure::builder()
            .elements(["a", "b", "c"])
            .tuple("T", &["a", "b", "c"])
            .build()
            .unwrap();
        assert_eq!(
            s.gaifman_graph().edges().collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }

    #[test]
    fn distances_and_balls() {
        let s = path_abc();
        let (a, b, c) = (0, 1, 2);
        assert_eq!(s.dist(&[a], c).unwrap(), Distance::Finite(2));
        assert_eq!(s.dist(&[a, c], b).unwrap(), Distance::Finite(1));
        assert_eq!(s.ball(&[a], 1).unwrap(), vec![a, b]);
        assert_eq!(s.ball(&[a], 0).unwrap(), vec![a]);
        assert_eq!(s.ball(&[a, c], 1).unwrap(), vec![a, b, c]);

        let iso = Structure::builder().elements(["a", "b"]).build().unwrap();
        assert_eq!(iso.dist(&[0], 1).unwrap(), Distance::Infinite);
        assert!(Distance::Infinite > Distance::Finite(u32::MAX));
        assert!(s.dist(&[a], 7).is_err());
    }

    #[test]
    fn neighborhoods() {
        let s = path_abc();
        let n = s.neighborhood(&[0], 1).unwrap();
        assert_eq!(n.len(), 2);
        assert!(n.holds("E", &[n.elem("a").unwrap(), n.elem("b").unwrap()]));
        assert_eq!(s.neighborhood(&[0], 5).unwrap(), s);
        let iso = Structure::builder().elements(["a", "b"]).build().unwrap();
        assert_eq!(iso.neighborhood(&[0], 3).unwrap().len(), 1);
        assert!(s.induced(&[]).is_err());
    }

    #[test]
    fn pattern_graphs() {
        let s = path_abc();
        assert_eq!(s.pattern_graph(&[0, 2], 1).unwrap().num_edges(), 0);
        assert!(s.pattern_graph(&[0, 2], 2).unwrap().has_edge(0, 1));
        assert!(s.pattern_graph(&[0, 0], 0).unwrap().has_edge(0, 1));
        assert_eq!(PatternGraph::all(3).len(), 8);
        assert_eq!(PatternGraph::all(3).iter().filter(|g| g.is_connected()).count(), 4);
    }

    #[test]
    fn expand_reduct_union() {
        let s = path_abc();
        let sig = s.signature();
        assert_eq!(s.reduct(&sig).unwrap(), s);
        let e = s.expand(vec![("P".into(), 1, vec![vec![0]])]).unwrap();
        assert_eq!(e.reduct(&sig).unwrap(), s);
        assert!(s.reduct(&Signature::new().with("Q", 1)).is_err());

        let one = Structure::builder().element("x").build().unwrap();
        let u = Structure::disjoint_union(&one, &one).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u.name(0), "L:x");
    }

    #[test]
    fn zero_ary_relations() {
        let json = r#"{"universe":["a"],"relations":{"T":{"arity":0,"tuples":[[]]},"F":{"arity":0,"tuples":[]}}}"#;
        let s = Structure::from_json_str(json).unwrap();
        assert!(s.holds("T", &[]));
        assert!(!s.holds("F", &[]));
        let back = serde_json::to_string(&s.to_json()).unwrap();
        assert_eq!(Structure::from_json_str(&back).unwrap(), s);
        // induced substructures keep 0-ary facts
        assert!(s.induced(&[0]).unwrap().holds("T", &[]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Structure::builder().build().is_err());
        let bad = r#"{"universe":["a"],"relations":{"E":{"arity":2,"tuples":[["a","z"]]}}}"#;
        assert!(matches!(Structure::from_json_str(bad), Err(Error::UnknownElement(_))));
        let bad = r#"{"universe":["a"],"relations":{"E":{"arity":2,"tuples":[["a"]]}}}"#;
        assert!(matches!(Structure::from_json_str(bad), Err(Error::Arity { .. })));
    }
}
