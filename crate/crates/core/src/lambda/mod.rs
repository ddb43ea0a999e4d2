//! A structural coeffect λ-calculus, generic in the grading semiring.
//!
//! `linfer` computes grades bottom-up. Under call-by-value, the argument
//! context of an application is scaled by `c ⊔ 1` instead of `c`.

mod syntax;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Nat, Semiring, UsageGrade};

pub use syntax::{parse_lterm, parse_ltype, LTerm, LType};

/// A semiring whose elements can be written in source.
pub trait Grade: Semiring + fmt::Display {
    fn parse_grade(text: &str) -> Option<Self>;
}

impl Grade for UsageGrade {
    fn parse_grade(text: &str) -> Option<Self> {
        UsageGrade::parse(text)
    }
}

impl Grade for Nat {
    fn parse_grade(text: &str) -> Option<Self> {
        text.parse().ok().map(Nat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{offset}: {msg}")]
pub struct LambdaError {
    pub offset: usize,
    pub msg: String,
}

impl LambdaError {
    pub(crate) fn at(offset: usize, msg: impl Into<String>) -> Self {
        LambdaError {
            offset,
            msg: msg.into(),
        }
    }

    fn typing(msg: impl Into<String>) -> Self {
        LambdaError::at(0, msg)
    }
}

/// A graded context over the whole typing environment; unused variables
/// are graded zero.
pub type Graded<R> = BTreeMap<String, R>;

fn zeros<R: Semiring>(env: &BTreeMap<String, LType<R>>) -> Graded<R> {
    env.keys().map(|x| (x.clone(), R::zero())).collect()
}

fn sum<R: Semiring>(a: &Graded<R>, b: &Graded<R>) -> Graded<R> {
    let mut out = a.clone();
    for (x, r) in b {
        let v = out.get(x).map_or_else(|| r.clone(), |l| l.add(r));
        out.insert(x.clone(), v);
    }
    out
}

fn scale<R: Semiring>(c: &R, g: &Graded<R>) -> Graded<R> {
    g.iter().map(|(x, r)| (x.clone(), c.mul(r))).collect()
}

/// Infer the type and graded context of `t` under `env`.
pub fn linfer<R: Grade>(
    t: &LTerm<R>,
    env: &BTreeMap<String, LType<R>>,
    cbv: bool,
) -> Result<(LType<R>, Graded<R>), LambdaError> {
    match t {
        LTerm::Num(_) => Ok((LType::Int, zeros(env))),
        LTerm::Var(x) => {
            let ty = env
                .get(x)
                .ok_or_else(|| LambdaError::typing(format!("unbound variable `{x}`")))?;
            let mut g = zeros(env);
            g.insert(x.clone(), R::one());
            Ok((ty.clone(), g))
        }
        LTerm::Abs(x, tx, body) => {
            let mut inner = env.clone();
            inner.insert(x.clone(), tx.clone());
            let (tb, mut g) = linfer(body, &inner, cbv)?;
            let c = g.remove(x).unwrap_or_else(R::zero);
            if env.contains_key(x) {
                g.insert(x.clone(), R::zero());
            }
            Ok((LType::fun(tx.clone(), c, tb), g))
        }
        LTerm::App(f, a) => {
            let (tf, g1) = linfer(f, env, cbv)?;
            let LType::Fun(dom, c, cod) = tf else {
                return Err(LambdaError::typing(format!(
                    "`{f}` has type `{tf}` and cannot be applied"
                )));
            };
            let (ta, g2) = linfer(a, env, cbv)?;
            if ta != *dom {
                return Err(LambdaError::typing(format!(
                    "argument `{a}` has type `{ta}`, expected `{dom}`"
                )));
            }
            let factor = if cbv { c.join(&R::one()) } else { c };
            Ok((*cod, sum(&g1, &scale(&factor, &g2))))
        }
    }
}

/// Whether `target` is usable where `inferred` was derived: pointwise,
/// `inferred ⪯ target`, with missing entries read as zero.
pub fn lsub<R: Semiring>(inferred: &Graded<R>, target: &Graded<R>) -> bool {
    let zero = R::zero();
    inferred.keys().chain(target.keys()).all(|x| {
        let a = inferred.get(x).unwrap_or(&zero);
        let b = target.get(x).unwrap_or(&zero);
        a.leq(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use UsageGrade::*;

    fn env<R: Grade>(xs: &[&str]) -> BTreeMap<String, LType<R>> {
        xs.iter().map(|x| (x.to_string(), LType::Int)).collect()
    }

    #[test]
    fn unused_argument_cbn_vs_cbv() {
        let t: LTerm<UsageGrade> = parse_lterm("(\\x:int. 5) y").unwrap();
        let (ty, g) = linfer(&t, &env(&["y"]), false).unwrap();
        assert_eq!(ty, LType::Int);
        assert_eq!(g["y"], Zero);
        let (_, g) = linfer(&t, &env(&["y"]), true).unwrap();
        assert_ne!(g["y"], Zero);
        assert_eq!(g["y"], Zero.join(&One).mul(&One));
        // 0 and 1 are incomparable, so the join is ω; in ℕ it is 1.
        assert_eq!(g["y"], Many);
        let t: LTerm<Nat> = parse_lterm("(\\x:int. 5) y").unwrap();
        assert_eq!(linfer(&t, &env(&["y"]), true).unwrap().1["y"], Nat(1));
    }

    #[test]
    fn variable_and_abstraction() {
        let (_, g) = linfer::<UsageGrade>(&LTerm::var("x"), &env(&["x", "z"]), false).unwrap();
        assert_eq!((g["x"], g["z"]), (One, Zero));
        let t: LTerm<UsageGrade> = parse_lterm("\\f:int ->[w] int. \\x:int. f (f x)").unwrap();
        let (ty, _) = linfer(&t, &BTreeMap::new(), false).unwrap();
        assert_eq!(ty.to_string(), "(int ->[w] int) ->[w] int ->[w] int");
    }

    #[test]
    fn errors() {
        let bad: LTerm<UsageGrade> = parse_lterm("5 y").unwrap();
        assert!(linfer(&bad, &env(&["y"]), false).is_err());
        let mism: LTerm<UsageGrade> = parse_lterm("(\\f:int ->[0] int. f 1) (\\z:int. z)").unwrap();
        assert!(linfer(&mism, &BTreeMap::new(), false).is_err());
        assert!(linfer::<UsageGrade>(&LTerm::var("q"), &BTreeMap::new(), false).is_err());
        assert!(parse_lterm::<UsageGrade>("\\x:int -> int. x").is_err());
        assert!(parse_lterm::<UsageGrade>("(\\x:int. x").is_err());
    }

    #[test]
    fn nat_counts_uses() {
        let t: LTerm<Nat> = parse_lterm("(\\a:int. \\b:int. a) y y").unwrap();
        let (_, g) = linfer(&t, &env(&["y"]), false).unwrap();
        assert_eq!(g["y"], Nat(1));
        let t: LTerm<Nat> = parse_lterm("(\\a:int. \\b:int. \\c:int. a) y y y").unwrap();
        assert_eq!(linfer(&t, &env(&["y"]), false).unwrap().1["y"], Nat(1));
    }

    #[test]
    fn subsumption() {
        let g = |c| Graded::from([("x".to_string(), c)]);
        assert!(lsub(&g(One), &g(Many)));
        assert!(lsub(&g(One), &g(One)));
        assert!(!lsub(&g(One), &g(Zero)));
        assert!(lsub(&Graded::new(), &g(Zero)));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "(\\x:int. 5) y",
            "\\f:(int ->[1] int) ->[w] int. f (\\z:int. z)",
            "f (g x) y",
        ] {
            let t: LTerm<UsageGrade> = parse_lterm(src).unwrap();
            assert_eq!(parse_lterm::<UsageGrade>(&t.to_string()).unwrap(), t);
        }
    }
}
