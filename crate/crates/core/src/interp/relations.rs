use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::unionfind::UnionFind;

use super::memory::Memory;

/// An equivalence relation on the references of a memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    class_of: BTreeMap<String, usize>,
}

impl Partition {
    pub fn related(&self, x: &str, y: &str) -> bool {
        match (self.class_of.get(x), self.class_of.get(y)) {
            (Some(a), Some(b)) => a == b,
            _ => x == y,
        }
    }

    /// The classes, each sorted, in order of their least element.
    pub fn classes(&self) -> Vec<Vec<String>> {
        let mut by: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (r, c) in &self.class_of {
            by.entry(*c).or_default().push(r.clone());
        }
        let mut out: Vec<Vec<String>> = by.into_values().collect();
        out.sort();
        out
    }
}

/// The sharing relation: the equivalence generated by heap edges.
pub fn sharing_rel(mem: &Memory) -> Partition {
    sharing_rel_filtered(mem, |_| true)
}

/// Equivalence generated by the heap edges whose endpoints both satisfy
/// `keep`.
pub fn sharing_rel_filtered(mem: &Memory, keep: impl Fn(&str) -> bool) -> Partition {
    let index: BTreeMap<&str, usize> = mem
        .refs()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect();
    let mut uf: UnionFind<usize> = UnionFind::new(index.len());
    for (r, o) in mem.iter() {
        if !keep(r) {
            continue;
        }
        for t in o.refs() {
            if let Some(&j) = index.get(t) {
                if keep(t) {
                    uf.union(index[r.as_str()], j);
                }
            }
        }
    }
    let class_of = index
        .iter()
        .map(|(r, &i)| (r.to_string(), uf.find(i)))
        .collect();
    Partition { class_of }
}

/// References reachable from `x`, including `x` itself.
pub fn reach(mem: &Memory, x: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([x.to_string()]);
    while let Some(r) = queue.pop_front() {
        if !seen.insert(r.clone()) {
            continue;
        }
        if let Some(o) = mem.get(&r) {
            queue.extend(o.refs().map(str::to_string));
        }
    }
    seen
}
