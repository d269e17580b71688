//! Neighbourhood covers, the splitter game and removal structures.

pub mod game;
pub mod removal;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::structures::{Elem, Structure};

pub use game::{solve_splitter, splitter_move, GameValue, MoveKind, DEFAULT_EXACT_CAP};
pub use removal::{remove, RemovalNames, RemovalStructure};

/// An `(r, s)`-neighbourhood cover: every element is assigned a cluster
/// containing its `r`-ball, and every cluster lies within distance `s` of
/// its centre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub r: u32,
    pub s: u32,
    pub cluster_of: Vec<usize>,
    /// Sorted element lists.
    pub clusters: Vec<Vec<Elem>>,
    pub centres: Vec<Elem>,
    pub members: Vec<Vec<Elem>>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

fn bfs_from(a: &Structure, source: Elem, radius: u32, dist: &mut [u32], touched: &mut Vec<Elem>) {
    let g = a.gaifman_graph();
    dist[source as usize] = 0;
    touched.push(source);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        if d >= radius {
            continue;
        }
        for &w in g.neighbors(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = d + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
}

/// Greedy `(r, 2r)`-cover. Vertices are processed by decreasing degree;
/// each unassigned vertex `v` opens the cluster `N_2r(v)` and every
/// unassigned element whose `r`-ball fits inside it joins.
pub fn build_cover(a: &Structure, r: u32) -> Cover {
    let n = a.len();
    let g = a.gaifman_graph();
    let mut order: Vec<Elem> = a.elements().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters = Vec::new();
    let mut centres = Vec::new();
    let mut members = Vec::new();
    let mut dist = vec![u32::MAX; n];
    let mut inner = vec![u32::MAX; n];
    let mut touched = Vec::new();
    let mut inner_touched = Vec::new();
    for &v in &order {
        if cluster_of[v as usize] != usize::MAX {
            continue;
        }
        touched.clear();
        bfs_from(a, v, 2 * r + 1, &mut dist, &mut touched);
        // distance from the first layer outside the cluster, up to r
        let boundary: Vec<Elem> = touched
            .iter()
            .copied()
            .filter(|&x| dist[x as usize] == 2 * r + 1)
            .collect();
        inner_touched.clear();
        let mut queue: VecDeque<Elem> = VecDeque::new();
        for &b in &boundary {
            inner[b as usize] = 0;
            inner_touched.push(b);
            queue.push_back(b);
        }
        while let Some(x) = queue.pop_front() {
            let d = inner[x as usize];
            if d >= r {
                continue;
            }
            for &w in g.neighbors(x) {
                if dist[w as usize] <= 2 * r && inner[w as usize] == u32::MAX {
                    inner[w as usize] = d + 1;
                    inner_touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        let id = clusters.len();
        let mut cluster: Vec<Elem> = touched.iter().copied().filter(|&x| dist[x as usize] <= 2 * r).collect();
        cluster.sort_unstable();
        let mut mine = Vec::new();
        for &x in &cluster {
            if cluster_of[x as usize] == usize::MAX && inner[x as usize] == u32::MAX {
                cluster_of[x as usize] = id;
                mine.push(x);
            }
        }
        debug_assert!(mine.contains(&v));
        for &x in &touched {
            dist[x as usize] = u32::MAX;
        }
        for &x in &inner_touched {
            inner[x as usize] = u32::MAX;
        }
        clusters.push(cluster);
        centres.push(v);
        members.push(mine);
    }
    Cover {
        r,
        s: 2 * r,
        cluster_of,
        clusters,
        centres,
        members,
    }
}

/// Outcome of [`validate_cover`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub ok: bool,
    pub violations: Vec<String>,
    pub clusters: usize,
    pub max_degree: usize,
    pub total_size: usize,
    /// degree → number of elements with that degree
    pub degree_histogram: BTreeMap<usize, usize>,
}

/// Checks every cover invariant by BFS and collects degree statistics.
pub fn validate_cover(a: &Structure, cover: &Cover) -> CoverReport {
    let n = a.len();
    let mut violations = Vec::new();
    let mut degree = vec![0usize; n];
    if cover.cluster_of.len() != n {
        violations.push(format!(
            "cluster map has {} entries for {n} elements",
            cover.cluster_of.len()
        ));
    }
    for (id, cluster) in cover.clusters.iter().enumerate() {
        for &x in cluster {
            if (x as usize) < n {
                degree[x as usize] += 1;
            }
        }
        let Some(&c) = cover.centres.get(id) else {
            violations.push(format!("cluster {id} has no centre"));
            continue;
        };
        if cluster.binary_search(&c).is_err() {
            violations.push(format!("centre {} is outside cluster {id}", a.name(c)));
            continue;
        }
        // radius and connectivity inside the induced cluster
        let inside = |x: Elem| cluster.binary_search(&x).is_ok();
        let reached = a.gaifman_graph().bfs_bounded(&[c], None, inside);
        if reached.len() != cluster.len() {
            violations.push(format!("cluster {id} is not connected"));
        }
        if let Some((far, d)) = reached.iter().max_by_key(|(_, d)| *d) {
            if *d > cover.s {
                violations.push(format!(
                    "cluster {id} has element {} at distance {d} > {} from its centre",
                    a.name(*far),
                    cover.s
                ));
            }
        }
    }
    for x in a.elements() {
        let Some(&id) = cover.cluster_of.get(x as usize) else {
            continue;
        };
        let Some(cluster) = cover.clusters.get(id) else {
            violations.push(format!("element {} points at a missing cluster", a.name(x)));
            continue;
        };
        let ball = a.ball(&[x], cover.r).unwrap_or_default();
        if let Some(out) = ball.iter().find(|b| cluster.binary_search(b).is_err()) {
            violations.push(format!(
                "{} is in the {}-ball of {} but not in its cluster {id}",
                a.name(*out),
                cover.r,
                a.name(x)
            ));
        }
    }
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let total_size: usize = cover.clusters.iter().map(Vec::len).sum();
    if total_size > n * max_degree {
        violations.push(format!(
            "total cluster size {total_size} exceeds n * degree = {}",
            n * max_degree
        ));
    }
    let mut degree_histogram = BTreeMap::new();
    for d in degree {
        *degree_histogram.entry(d).or_insert(0) += 1;
    }
    CoverReport {
        ok: violations.is_empty(),
        violations,
        clusters: cover.clusters.len(),
        max_degree,
        total_size,
        degree_histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Structure {
        let mut b = Structure::builder().elements((0..n).map(|i| format!("v{i:02}")));
        for i in 0..n - 1 {
            b.add_tuple("E", &[format!("v{i:02}"), format!("v{:02}", i + 1)]);
        }
        b.build().unwrap()
    }

    #[test]
    fn star_is_one_cluster() {
        let mut b = Structure::builder().elements(["h", "a", "b", "c"]);
        for l in ["a", "b", "c"] {
            b.add_tuple("E", &["h", l]);
        }
        let a = b.build().unwrap();
        let c = build_cover(&a, 1);
        assert_eq!(c.len(), 1);
        assert_eq!(c.centres[0], a.elem("h").unwrap());
        assert!(validate_cover(&a, &c).ok);
    }

    #[test]
    fn path_clusters_are_valid() {
        let a = path(5);
        let c = build_cover(&a, 1);
        let rep = validate_cover(&a, &c);
        assert!(rep.ok, "{:?}", rep.violations);
        assert!(rep.total_size <= a.len() * rep.max_degree);
        for r in 0..4 {
            let a = path(30);
            assert!(validate_cover(&a, &build_cover(&a, r)).ok);
        }
    }

    #[test]
    fn singleton() {
        let a = Structure::builder().element("x").build().unwrap();
        let c = build_cover(&a, 3);
        assert_eq!(c.clusters, vec![vec![0]]);
        assert!(validate_cover(&a, &c).ok);
    }

    #[test]
    fn detects_corruption() {
        let a = path(5);
        let mut c = build_cover(&a, 1);
        let id = c.cluster_of[2];
        c.clusters[id].retain(|&x| x != 3);
        assert!(!validate_cover(&a, &c).ok);
    }
}
