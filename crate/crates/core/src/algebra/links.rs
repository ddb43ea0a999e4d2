use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexSet;
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::semiring::Semiring;

/// A link: the result link, a name written in source, or a generated one.
///
/// Generated links live in their own namespace so they can never collide
/// with source names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    Res,
    Named(String),
    Fresh(u64),
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::Res => write!(f, "res"),
            Link::Named(n) => write!(f, "{n}"),
            Link::Fresh(k) => write!(f, "%{k}"),
        }
    }
}

/// Monotonic supply of fresh links.
#[derive(Clone, Debug, Default)]
pub struct LinkGen {
    next: u64,
}

impl LinkGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start counting at `offset`; used to check that results do not depend
    /// on the concrete numbering.
    pub fn starting_at(offset: u64) -> Self {
        LinkGen { next: offset }
    }

    pub fn fresh(&mut self) -> Link {
        let k = self.next;
        self.next += 1;
        Link::Fresh(k)
    }

    /// A fresh number from the same counter, for other fresh names (seals).
    pub fn fresh_id(&mut self) -> u64 {
        let k = self.next;
        self.next += 1;
        k
    }

    pub fn fresh_coeffect(&mut self) -> Coeffect {
        Coeffect::singleton(self.fresh())
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// A finite set of links: the scalars of the sharing semiring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeffect(BTreeSet<Link>);

impl Coeffect {
    pub fn empty() -> Self {
        Coeffect(BTreeSet::new())
    }

    pub fn res() -> Self {
        Coeffect::singleton(Link::Res)
    }

    pub fn singleton(link: Link) -> Self {
        Coeffect(BTreeSet::from([link]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, link: &Link) -> bool {
        self.0.contains(link)
    }

    pub fn contains_res(&self) -> bool {
        self.0.contains(&Link::Res)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Link> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, link: Link) {
        self.0.insert(link);
    }

    pub fn union(&self, other: &Coeffect) -> Coeffect {
        Coeffect(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &Coeffect) -> Coeffect {
        Coeffect(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Coeffect) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Coeffect) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// `self ◁ y`: substitute `self` for the result link of `y`.
    pub fn replace_res(&self, y: &Coeffect) -> Coeffect {
        if self.is_empty() {
            Coeffect::empty()
        } else if !y.contains_res() {
            y.clone()
        } else {
            let mut out: BTreeSet<Link> =
                y.0.iter().filter(|l| **l != Link::Res).cloned().collect();
            out.extend(self.0.iter().cloned());
            Coeffect(out)
        }
    }

    /// Apply `f` to every non-result link.
    pub fn rename(&self, f: &mut impl FnMut(&Link) -> Link) -> Coeffect {
        Coeffect(
            self.0
                .iter()
                .map(|l| if *l == Link::Res { Link::Res } else { f(l) })
                .collect(),
        )
    }
}

impl FromIterator<Link> for Coeffect {
    fn from_iter<I: IntoIterator<Item = Link>>(iter: I) -> Self {
        Coeffect(iter.into_iter().collect())
    }
}

impl fmt::Display for Coeffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

impl Semiring for Coeffect {
    fn zero() -> Self {
        Coeffect::empty()
    }

    fn one() -> Self {
        Coeffect::res()
    }

    fn add(&self, other: &Self) -> Self {
        self.union(other)
    }

    fn mul(&self, other: &Self) -> Self {
        self.replace_res(other)
    }

    fn leq(&self, other: &Self) -> bool {
        self.is_subset(other)
    }

    fn join(&self, other: &Self) -> Self {
        self.union(other)
    }
}

/// Saturate a family of coeffects: links co-occurring anywhere are merged,
/// and every coeffect containing a link gets its whole class.
pub fn close_all<'a>(coeffects: impl IntoIterator<Item = &'a mut Coeffect>) {
    let mut cs: Vec<&mut Coeffect> = coeffects.into_iter().collect();
    let mut index: IndexSet<Link> = IndexSet::new();
    for c in &cs {
        for l in c.iter() {
            index.insert(l.clone());
        }
    }
    let mut uf: UnionFind<usize> = UnionFind::new(index.len());
    for c in &cs {
        let mut it = c.iter().map(|l| index.get_index_of(l).unwrap());
        if let Some(first) = it.next() {
            for other in it {
                uf.union(first, other);
            }
        }
    }
    let mut classes: BTreeMap<usize, BTreeSet<Link>> = BTreeMap::new();
    for (i, l) in index.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().insert(l.clone());
    }
    for c in cs.iter_mut() {
        let root = c
            .iter()
            .next()
            .map(|l| uf.find(index.get_index_of(l).unwrap()));
        if let Some(root) = root {
            c.0 = classes[&root].clone();
        }
    }
}

/// A map from variables to coeffects. Variables mapped to `∅` stay in the
/// domain; use [`CoeffectCtx::support_eq`] to compare modulo such entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoeffectCtx(BTreeMap<String, Coeffect>);

impl CoeffectCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(var: impl Into<String>, c: Coeffect) -> Self {
        let mut ctx = Self::new();
        ctx.insert(var, c);
        ctx
    }

    pub fn insert(&mut self, var: impl Into<String>, c: Coeffect) {
        self.0.insert(var.into(), c);
    }

    pub fn remove(&mut self, var: &str) -> Option<Coeffect> {
        self.0.remove(var)
    }

    pub fn get(&self, var: &str) -> Option<&Coeffect> {
        self.0.get(var)
    }

    /// Coeffect of `var`, with absent variables read as `∅`.
    pub fn coeff(&self, var: &str) -> Coeffect {
        self.0.get(var).cloned().unwrap_or_default()
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Coeffect)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn closure(&self) -> CoeffectCtx {
        let mut out = self.clone();
        close_all(out.0.values_mut());
        out
    }

    pub fn is_closed(&self) -> bool {
        let cs: Vec<&Coeffect> = self.0.values().collect();
        for (i, a) in cs.iter().enumerate() {
            for b in &cs[i + 1..] {
                if a != b && !a.is_disjoint(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Pointwise union without closure.
    pub fn pointwise_union(&self, other: &CoeffectCtx) -> CoeffectCtx {
        let mut out = self.clone();
        for (x, c) in &other.0 {
            let e = out.0.entry(x.clone()).or_default();
            *e = e.union(c);
        }
        out
    }

    /// `Γ + Δ`: closure of the pointwise union.
    pub fn sum(&self, other: &CoeffectCtx) -> CoeffectCtx {
        self.pointwise_union(other).closure()
    }

    /// `X × Γ`: closure of the pointwise `X ◁ _`.
    pub fn scale(&self, x: &Coeffect) -> CoeffectCtx {
        let mut out = CoeffectCtx(
            self.0
                .iter()
                .map(|(v, c)| (v.clone(), x.replace_res(c)))
                .collect(),
        );
        close_all(out.0.values_mut());
        out
    }

    /// Keep only `vars`, intersecting each coeffect with `links`.
    pub fn restrict<'a>(
        &self,
        vars: impl IntoIterator<Item = &'a String>,
        links: &Coeffect,
    ) -> CoeffectCtx {
        let mut out = CoeffectCtx::new();
        for v in vars {
            out.insert(v.clone(), self.coeff(v).intersection(links));
        }
        out
    }

    /// All links occurring in the context, plus `res`.
    pub fn links(&self) -> Coeffect {
        let mut out = Coeffect::res();
        for c in self.0.values() {
            out = out.union(c);
        }
        out
    }

    /// Equality ignoring variables mapped to `∅`.
    pub fn support_eq(&self, other: &CoeffectCtx) -> bool {
        let a = self.0.iter().filter(|(_, c)| !c.is_empty());
        let b = other.0.iter().filter(|(_, c)| !c.is_empty());
        a.eq(b)
    }

    /// Apply `f` to every non-result link.
    pub fn rename(&self, f: &mut impl FnMut(&Link) -> Link) -> CoeffectCtx {
        CoeffectCtx(
            self.0
                .iter()
                .map(|(v, c)| (v.clone(), c.rename(f)))
                .collect(),
        )
    }

    /// The partition of the domain (plus `res`) induced by coeffect equality.
    pub fn canonical(&self) -> Canonical {
        let mut groups: BTreeMap<&Coeffect, Vec<String>> = BTreeMap::new();
        let mut unlinked = Vec::new();
        for (v, c) in &self.0 {
            if c.is_empty() {
                unlinked.push(v.clone());
            } else {
                groups.entry(c).or_default().push(v.clone());
            }
        }
        let mut out: Vec<CanonGroup> = groups
            .into_iter()
            .map(|(c, vars)| CanonGroup {
                vars,
                contains_res: c.contains_res(),
            })
            .collect();
        if !out.iter().any(|g| g.contains_res) {
            out.push(CanonGroup {
                vars: vec![],
                contains_res: true,
            });
        }
        out.sort();
        Canonical {
            groups: out,
            unlinked,
        }
    }
}

impl FromIterator<(String, Coeffect)> for CoeffectCtx {
    fn from_iter<I: IntoIterator<Item = (String, Coeffect)>>(iter: I) -> Self {
        CoeffectCtx(iter.into_iter().collect())
    }
}

impl fmt::Display for CoeffectCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{c}")?;
        }
        Ok(())
    }
}

/// One block of a canonical partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CanonGroup {
    pub vars: Vec<String>,
    pub contains_res: bool,
}

/// Link-name-independent view of a context: which variables share, and
/// which are connected to the result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Canonical {
    pub groups: Vec<CanonGroup>,
    pub unlinked: Vec<String>,
}

impl Canonical {
    pub fn group_of(&self, var: &str) -> Option<&CanonGroup> {
        self.groups.iter().find(|g| g.vars.iter().any(|v| v == var))
    }

    pub fn res_group(&self) -> &CanonGroup {
        self.groups
            .iter()
            .find(|g| g.contains_res)
            .expect("res always has a group")
    }
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            let mut items = g.vars.clone();
            if g.contains_res {
                items.push("res".into());
            }
            write!(f, "{{{}}}", items.join(","))?;
        }
        if !self.unlinked.is_empty() {
            write!(f, " | unlinked: {}", self.unlinked.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Link {
        if s == "res" {
            Link::Res
        } else {
            Link::Named(s.into())
        }
    }

    fn c(links: &[&str]) -> Coeffect {
        links.iter().map(|s| n(s)).collect()
    }

    fn ctx(entries: &[(&str, &[&str])]) -> CoeffectCtx {
        entries
            .iter()
            .map(|(v, ls)| (v.to_string(), c(ls)))
            .collect()
    }

    #[test]
    fn replace_res_cases() {
        assert_eq!(Coeffect::res().replace_res(&c(&["a", "b"])), c(&["a", "b"]));
        assert_eq!(c(&["l"]).replace_res(&c(&["l2", "res"])), c(&["l2", "l"]));
        assert_eq!(
            Coeffect::empty().replace_res(&c(&["res", "l"])),
            Coeffect::empty()
        );
        assert_eq!(c(&["l"]).replace_res(&c(&["m"])), c(&["m"]));
    }

    #[test]
    fn closure_merges_chains() {
        let g = ctx(&[("x", &["l"]), ("y", &["l", "l2"]), ("z", &["l2"])]);
        let all = c(&["l", "l2"]);
        assert_eq!(
            g.closure(),
            ctx(&[
                ("x", &["l", "l2"]),
                ("y", &["l", "l2"]),
                ("z", &["l", "l2"])
            ])
        );
        assert_eq!(g.closure().coeff("x"), all);
        assert!(g.closure().is_closed());
        assert!(!g.is_closed());
    }

    #[test]
    fn sum_example() {
        let a = ctx(&[("x", &["l"]), ("y", &["l"])]);
        let b = ctx(&[("y", &["l2"]), ("z", &["l2"])]);
        let s = a.sum(&b);
        for v in ["x", "y", "z"] {
            assert_eq!(s.coeff(v), c(&["l", "l2"]));
        }
        assert_eq!(a.sum(&CoeffectCtx::new()), a);
    }

    #[test]
    fn scale_examples() {
        let g = ctx(&[("x", &["l", "res"]), ("y", &["l1"])]);
        assert_eq!(
            g.scale(&c(&["l2"])),
            ctx(&[("x", &["l", "l2"]), ("y", &["l1"])])
        );
        let g = ctx(&[("x", &["l", "res"]), ("y", &["l2"])]);
        assert_eq!(
            g.scale(&c(&["l2"])),
            ctx(&[("x", &["l", "l2"]), ("y", &["l", "l2"])])
        );
        assert_eq!(g.scale(&Coeffect::res()), g);
    }

    #[test]
    fn canonical_adds_lone_res() {
        let g = ctx(&[("x", &["l"]), ("y", &["l"]), ("w", &[])]);
        let k = g.canonical();
        assert_eq!(k.to_string(), "{res} | {x,y} | unlinked: w");
        assert!(!k.group_of("x").unwrap().contains_res);
    }

    #[test]
    fn restrict_to_own_links_is_identity() {
        let g = ctx(&[("x", &["l", "res"]), ("y", &["m"])]);
        let vars: Vec<String> = g.vars().cloned().collect();
        assert_eq!(g.restrict(&vars, &g.links()), g);
    }
}
