use crate::lang::{Modifier, Type};

use Modifier::*;

/// The modifier order: `σ ≤ σ′`, `σ ≤ caps ≤ mut ≤ read`, `caps ≤ imm ≤ read`.
pub fn leq(a: Modifier, b: Modifier) -> bool {
    match (a, b) {
        _ if a == b => true,
        (Seal(_), _) => true,
        (Caps, Mut | Imm | Read) => true,
        (Mut | Imm, Read) => true,
        _ => false,
    }
}

/// Equal up to seal identity.
pub fn equiv(a: Modifier, b: Modifier) -> bool {
    leq(a, b) && leq(b, a)
}

pub fn subtype(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Int, Type::Int) => true,
        (Type::Class(c, m), Type::Class(d, n)) => c == d && leq(*m, *n),
        _ => false,
    }
}

/// `m ∘ m′`. `None` when undefined (`read` with a seal).
pub fn combine(m: Modifier, m2: Modifier) -> Option<Modifier> {
    match m {
        _ if leq(m, Imm) => Some(m),
        Mut => Some(m2),
        Read => match m2 {
            Imm | Caps => Some(Imm),
            Seal(_) => None,
            Mut | Read => Some(Read),
        },
        Imm | Caps | Seal(_) => unreachable!("below imm"),
    }
}

/// `T[m]`: combine a class type's modifier with `m`; primitives unchanged.
pub fn modif(t: &Type, m: Modifier) -> Option<Type> {
    match t {
        Type::Int => Some(Type::Int),
        Type::Class(c, m1) => combine(*m1, m).map(|r| Type::Class(c.clone(), r)),
    }
}

/// Linear modifiers: at most one operand of `⊕` may mention them.
pub fn is_linear(m: Modifier) -> bool {
    matches!(m, Caps | Seal(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Modifier; 6] = [Mut, Read, Imm, Caps, Seal(0), Seal(1)];

    #[test]
    fn order_examples() {
        assert!(leq(Caps, Imm));
        assert!(!leq(Mut, Imm) && !leq(Imm, Mut));
        assert!(leq(Seal(0), Seal(7)));
        assert!(leq(Seal(3), Read));
        assert!(!subtype(&Type::class("A"), &Type::class("B")));
        assert!(subtype(&Type::Int, &Type::Int));
    }

    #[test]
    fn order_is_preorder_antisymmetric_up_to_seals() {
        for a in ALL {
            assert!(leq(a, a));
            for b in ALL {
                if leq(a, b) && leq(b, a) {
                    assert!(a == b || (a.is_seal() && b.is_seal()));
                }
                for c in ALL {
                    if leq(a, b) && leq(b, c) {
                        assert!(leq(a, c), "{a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn combine_table() {
        assert_eq!(combine(Imm, Mut), Some(Imm));
        assert_eq!(combine(Mut, Read), Some(Read));
        assert_eq!(combine(Read, Caps), Some(Imm));
        assert_eq!(combine(Read, Seal(2)), None);
        for a in ALL {
            for b in ALL {
                let r = combine(a, b);
                assert_eq!(r.is_none(), a == Read && b.is_seal());
                if a == Mut {
                    assert_eq!(r, Some(b));
                }
                if leq(a, Imm) {
                    assert_eq!(r, Some(a));
                }
            }
        }
    }

    #[test]
    fn modif_is_deep() {
        let f = Type::Class("B".into(), Imm);
        assert_eq!(modif(&f, Mut), Some(f.clone()));
        assert_eq!(
            modif(&Type::class("B"), Read),
            Some(Type::Class("B".into(), Read))
        );
        assert_eq!(modif(&Type::Int, Seal(0)), Some(Type::Int));
    }
}
