use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use super::links::{close_all, Coeffect, CoeffectCtx};
use super::semiring::Semiring;

/// A preordered module over the semiring `R`.
pub trait Module<R: Semiring> {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, r: &R, a: &Self::Elem) -> Self::Elem;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
}

/// A finitely supported map from variables to scalars. Entries equal to
/// zero are never stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FinMap<R>(BTreeMap<String, R>);

impl<R: Semiring> FinMap<R> {
    pub fn new() -> Self {
        FinMap(BTreeMap::new())
    }

    pub fn get(&self, var: &str) -> R {
        self.0.get(var).cloned().unwrap_or_else(R::zero)
    }

    pub fn set(&mut self, var: impl Into<String>, r: R) {
        let var = var.into();
        if r.is_zero() {
            self.0.remove(&var);
        } else {
            self.0.insert(var, r);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &R)> {
        self.0.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    fn map_values(&self, f: impl Fn(&R) -> R) -> Self {
        let mut out = FinMap::new();
        for (v, r) in &self.0 {
            out.set(v.clone(), f(r));
        }
        out
    }
}

impl<R: Semiring> FromIterator<(String, R)> for FinMap<R> {
    fn from_iter<I: IntoIterator<Item = (String, R)>>(iter: I) -> Self {
        let mut out = FinMap::new();
        for (v, r) in iter {
            out.set(v, r);
        }
        out
    }
}

impl<R: Semiring + fmt::Display> fmt::Display for FinMap<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, r)| format!("{v}:{r}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// The pointwise module `R^X`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Structural<R>(PhantomData<R>);

impl<R> Structural<R> {
    pub fn new() -> Self {
        Structural(PhantomData)
    }
}

impl<R: Semiring> Module<R> for Structural<R> {
    type Elem = FinMap<R>;

    fn zero(&self) -> FinMap<R> {
        FinMap::new()
    }

    fn add(&self, a: &FinMap<R>, b: &FinMap<R>) -> FinMap<R> {
        let mut out = a.clone();
        for (v, r) in &b.0 {
            out.set(v.clone(), a.get(v).add(r));
        }
        out
    }

    fn scale(&self, r: &R, a: &FinMap<R>) -> FinMap<R> {
        a.map_values(|s| r.mul(s))
    }

    fn leq(&self, a: &FinMap<R>, b: &FinMap<R>) -> bool {
        a.0.keys()
            .chain(b.0.keys())
            .all(|v| a.get(v).leq(&b.get(v)))
    }
}

/// A map on module elements, expected to be an idempotent homomorphism.
pub trait Endo<E> {
    fn apply(&self, e: &E) -> E;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<E: Clone> Endo<E> for Identity {
    fn apply(&self, e: &E) -> E {
        e.clone()
    }
}

/// Transitive closure of link sets.
#[derive(Clone, Copy, Debug, Default)]
pub struct Closure;

impl Endo<FinMap<Coeffect>> for Closure {
    fn apply(&self, e: &FinMap<Coeffect>) -> FinMap<Coeffect> {
        let mut out = e.clone();
        close_all(out.0.values_mut());
        out
    }
}

/// The module on the fixpoints of `h`: `a +ʰ b = h(a + b)`, `r ·ʰ a = h(r · a)`.
#[derive(Clone, Debug, Default)]
pub struct Fixpoint<M, H> {
    pub base: M,
    pub h: H,
}

impl<M, H> Fixpoint<M, H> {
    pub fn new(base: M, h: H) -> Self {
        Fixpoint { base, h }
    }
}

impl<R, M, H> Module<R> for Fixpoint<M, H>
where
    R: Semiring,
    M: Module<R>,
    H: Endo<M::Elem>,
{
    type Elem = M::Elem;

    fn zero(&self) -> M::Elem {
        self.h.apply(&self.base.zero())
    }

    fn add(&self, a: &M::Elem, b: &M::Elem) -> M::Elem {
        self.h.apply(&self.base.add(a, b))
    }

    fn scale(&self, r: &R, a: &M::Elem) -> M::Elem {
        self.h.apply(&self.base.scale(r, a))
    }

    fn leq(&self, a: &M::Elem, b: &M::Elem) -> bool {
        self.base.leq(a, b)
    }
}

/// Closed coeffect contexts with [`CoeffectCtx::sum`] and [`CoeffectCtx::scale`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ClosedCtx;

impl Module<Coeffect> for ClosedCtx {
    type Elem = CoeffectCtx;

    fn zero(&self) -> CoeffectCtx {
        CoeffectCtx::new()
    }

    fn add(&self, a: &CoeffectCtx, b: &CoeffectCtx) -> CoeffectCtx {
        a.sum(b)
    }

    fn scale(&self, r: &Coeffect, a: &CoeffectCtx) -> CoeffectCtx {
        a.scale(r)
    }

    fn leq(&self, a: &CoeffectCtx, b: &CoeffectCtx) -> bool {
        a.vars()
            .chain(b.vars())
            .all(|v| a.coeff(v).is_subset(&b.coeff(v)))
    }
}

impl From<&CoeffectCtx> for FinMap<Coeffect> {
    fn from(ctx: &CoeffectCtx) -> Self {
        ctx.iter().map(|(v, c)| (v.clone(), c.clone())).collect()
    }
}
