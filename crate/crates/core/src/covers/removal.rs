//! Removal structures `A⟅_r d`: the element `d` is deleted, every relation
//! is split by the positions at which it held `d`, and unary halo
//! relations record the distance to `d`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structures::{Elem, Signature, Structure};

/// Naming scheme for the relations of a removal structure over a base
/// signature. `R̃_I` is written `R_d12` for `I = {1, 2}` and the halo
/// relation `S_i` is written `Sd{i}`; the tag `d` is extended when these
/// names would clash with the base signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RemovalNames {
    pub base: Signature,
    pub radius: u32,
    tag: String,
}

impl RemovalNames {
    pub fn new(base: &Signature, radius: u32) -> Self {
        let mut names = RemovalNames {
            base: base.clone(),
            radius,
            tag: "d".to_string(),
        };
        while !names.is_fresh() {
            names.tag.push('d');
        }
        names
    }

    fn is_fresh(&self) -> bool {
        let sig = self.signature();
        let mut count = 0;
        for (n, _) in sig.iter() {
            if self.base.contains(n) {
                return false;
            }
            count += 1;
        }
        let expected: usize = self.base.iter().map(|(_, k)| 1usize << k).sum::<usize>() + self.radius as usize;
        count == expected
    }

    /// Name of `R̃_I`, with `I` given as sorted 0-based positions.
    pub fn tilde(&self, rel: &str, positions: &[usize]) -> String {
        let arity = self.base.arity(rel).unwrap_or(0);
        let sep = if arity >= 10 { "_" } else { "" };
        let idx: Vec<String> = positions.iter().map(|i| (i + 1).to_string()).collect();
        format!("{rel}_{}{}", self.tag, idx.join(sep))
    }

    /// Name of `S_i` for `1 <= i <= radius`.
    pub fn halo(&self, i: u32) -> Result<String> {
        if i == 0 || i > self.radius {
            return Err(Error::Input(format!(
                "halo index {i} is outside 1..={} of the removal structure",
                self.radius
            )));
        }
        Ok(format!("S{}{i}", self.tag))
    }

    /// Signature of the removal structure.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (rel, k) in self.base.iter() {
            for mask in 0u32..(1 << k) {
                let positions: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                sig.insert(self.tilde(rel, &positions), k - positions.len());
            }
        }
        for i in 1..=self.radius {
            sig.insert(format!("S{}{i}", self.tag), 1);
        }
        sig
    }
}

/// `A⟅_r d` together with the bookkeeping to map elements back.
#[derive(Clone, Debug)]
pub struct RemovalStructure {
    pub structure: Structure,
    pub names: RemovalNames,
    pub removed: Elem,
    pub removed_name: Arc<str>,
}

impl RemovalStructure {
    /// Index in the removal structure of a base element other than `d`.
    pub fn to_new(&self, e: Elem) -> Option<Elem> {
        match e.cmp(&self.removed) {
            std::cmp::Ordering::Less => Some(e),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(e - 1),
        }
    }

    pub fn to_old(&self, e: Elem) -> Elem {
        if e >= self.removed {
            e + 1
        } else {
            e
        }
    }

    /// Rebuilds the base structure from the split relations.
    pub fn restore(&self) -> Result<Structure> {
        let mut names: Vec<Arc<str>> = self.structure.names().to_vec();
        names.insert(self.removed as usize, self.removed_name.clone());
        let mut rels = BTreeMap::new();
        for (rel, k) in self.names.base.iter() {
            let mut tuples = Vec::new();
            for mask in 0u32..(1 << k) {
                let positions: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                let name = self.names.tilde(rel, &positions);
                let part = self
                    .structure
                    .relation(&name)
                    .ok_or_else(|| Error::Internal(format!("missing relation {name}")))?;
                for t in part.tuples() {
                    let mut rest = t.iter().map(|&e| self.to_old(e));
                    let row: Vec<Elem> = (0..k)
                        .map(|i| {
                            if mask >> i & 1 == 1 {
                                self.removed
                            } else {
                                rest.next().unwrap()
                            }
                        })
                        .collect();
                    tuples.push(row.into_boxed_slice());
                }
            }
            rels.insert(rel.to_string(), (k, tuples));
        }
        Ok(Structure::from_parts(names, rels))
    }
}

/// Builds `A⟅_r d` in time linear in the size of `A`.
pub fn remove(a: &Structure, d: Elem, radius: u32) -> Result<RemovalStructure> {
    if a.len() < 2 {
        return Err(Error::Input(
            "removal needs a structure with at least two elements".into(),
        ));
    }
    if d as usize >= a.len() {
        return Err(Error::UnknownElement(format!("#{d}")));
    }
    let names = RemovalNames::new(&a.signature(), radius);
    let shift = |e: Elem| if e > d { e - 1 } else { e };
    let mut rels: BTreeMap<String, (usize, Vec<Box<[Elem]>>)> = BTreeMap::new();
    for (name, k) in names.signature().iter() {
        rels.insert(name.to_string(), (k, Vec::new()));
    }
    for (rel, r) in a.relations() {
        let k = r.arity();
        for t in r.tuples() {
            let positions: Vec<usize> = (0..k).filter(|&i| t[i] == d).collect();
            let rest: Vec<Elem> = t.iter().copied().filter(|&e| e != d).map(shift).collect();
            let name = names.tilde(rel, &positions);
            rels.get_mut(&name)
                .expect("tilde relation")
                .1
                .push(rest.into_boxed_slice());
        }
    }
    let ball = a.gaifman_graph().bfs_bounded(&[d], Some(radius), |_| true);
    for i in 1..=radius {
        let members: Vec<Box<[Elem]>> = ball
            .iter()
            .filter(|&&(b, dist)| b != d && dist <= i)
            .map(|&(b, _)| vec![shift(b)].into_boxed_slice())
            .collect();
        rels.insert(names.halo(i)?, (1, members));
    }
    let universe: Vec<Arc<str>> = a
        .names()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as Elem != d)
        .map(|(_, n)| n.clone())
        .collect();
    Ok(RemovalStructure {
        structure: Structure::from_parts(universe, rels),
        names,
        removed: d,
        removed_name: a.names()[d as usize].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Structure {
        let mut b = Structure::builder().elements(["a", "b", "d"]);
        for (x, y) in [("a", "b"), ("b", "d"), ("d", "a")] {
            b.add_tuple("E", &[x, y]);
            b.add_tuple("E", &[y, x]);
        }
        b.build().unwrap()
    }

    fn tuples(s: &Structure, rel: &str) -> Vec<Vec<String>> {
        s.relation(rel)
            .unwrap()
            .tuples()
            .iter()
            .map(|t| t.iter().map(|&e| s.name(e).to_string()).collect())
            .collect()
    }

    #[test]
    fn triangle_removal() {
        let a = triangle();
        let rem = remove(&a, a.elem("d").unwrap(), 1).unwrap();
        let s = &rem.structure;
        assert_eq!(s.len(), 2);
        assert_eq!(tuples(s, "E_d"), vec![vec!["a", "b"], vec!["b", "a"]]);
        assert_eq!(tuples(s, "E_d1"), vec![vec!["a"], vec!["b"]]);
        assert_eq!(tuples(s, "E_d2"), vec![vec!["a"], vec!["b"]]);
        assert!(tuples(s, "E_d12").is_empty());
        assert_eq!(tuples(s, "Sd1"), vec![vec!["a"], vec!["b"]]);
        let back = rem.restore().unwrap();
        assert_eq!(back.to_json(), a.to_json());
    }

    #[test]
    fn loops_and_isolated() {
        let mut b = Structure::builder().elements(["d", "x", "y"]);
        b.add_tuple("R", &["d", "d"]);
        b.add_tuple("R", &["x", "y"]);
        let a = b.build().unwrap();
        let rem = remove(&a, a.elem("d").unwrap(), 2).unwrap();
        assert_eq!(rem.structure.relation("R_d12").unwrap().len(), 1);
        assert!(rem.structure.relation("Sd2").unwrap().is_empty());
        assert_eq!(rem.restore().unwrap().to_json(), a.to_json());
        assert!(remove(&Structure::builder().element("z").build().unwrap(), 0, 1).is_err());
    }

    #[test]
    fn names_avoid_clashes() {
        let sig = Signature::new().with("E", 2).with("E_d1", 1).with("Sd1", 1);
        let names = RemovalNames::new(&sig, 1);
        for (n, _) in names.signature().iter() {
            assert!(!sig.contains(n));
        }
    }
}
