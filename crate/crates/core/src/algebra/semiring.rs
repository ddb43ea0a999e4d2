use std::fmt;

/// A preordered semiring with binary joins.
///
/// Implementations must satisfy the usual laws: `add` is associative,
/// commutative and monotone with neutral `zero`; `mul` is associative and
/// monotone with neutral `one`; `mul` distributes over `add` on both sides
/// and `zero` annihilates on both sides. `join` is the least upper bound
/// with respect to `leq`.
pub trait Semiring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn leq(&self, other: &Self) -> bool;
    fn join(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

/// Usage grades `0`, `1` and `ω`: not used, used linearly, used freely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UsageGrade {
    Zero,
    One,
    Many,
}

impl UsageGrade {
    pub const ALL: [UsageGrade; 3] = [UsageGrade::Zero, UsageGrade::One, UsageGrade::Many];

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "0" => Some(UsageGrade::Zero),
            "1" => Some(UsageGrade::One),
            "w" | "ω" | "omega" => Some(UsageGrade::Many),
            _ => None,
        }
    }
}

impl fmt::Display for UsageGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageGrade::Zero => write!(f, "0"),
            UsageGrade::One => write!(f, "1"),
            UsageGrade::Many => write!(f, "w"),
        }
    }
}

impl Semiring for UsageGrade {
    fn zero() -> Self {
        UsageGrade::Zero
    }

    fn one() -> Self {
        UsageGrade::One
    }

    fn add(&self, other: &Self) -> Self {
        use UsageGrade::*;
        match (self, other) {
            (Zero, x) | (x, Zero) => *x,
            _ => Many,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        use UsageGrade::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (One, x) | (x, One) => *x,
            (Many, Many) => Many,
        }
    }

    // 0 ⪯ ω and 1 ⪯ ω; 0 and 1 are incomparable.
    fn leq(&self, other: &Self) -> bool {
        self == other || *other == UsageGrade::Many
    }

    fn join(&self, other: &Self) -> Self {
        if self.leq(other) {
            *other
        } else if other.leq(self) {
            *self
        } else {
            UsageGrade::Many
        }
    }
}

/// Natural numbers counting exact uses, with the usual order, sum and product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nat(pub u64);

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Semiring for Nat {
    fn zero() -> Self {
        Nat(0)
    }

    fn one() -> Self {
        Nat(1)
    }

    fn add(&self, other: &Self) -> Self {
        Nat(self.0.checked_add(other.0).expect("grade overflow"))
    }

    fn mul(&self, other: &Self) -> Self {
        Nat(self.0.checked_mul(other.0).expect("grade overflow"))
    }

    fn leq(&self, other: &Self) -> bool {
        self.0 <= other.0
    }

    fn join(&self, other: &Self) -> Self {
        Nat(self.0.max(other.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_sum_table() {
        use UsageGrade::*;
        assert_eq!(One.add(&One), Many);
        assert_eq!(Zero.add(&One), One);
        assert_eq!(Many.add(&Zero), Many);
        assert_eq!(One.mul(&Many), Many);
        assert_eq!(Zero.mul(&Many), Zero);
    }

    #[test]
    fn usage_order_is_exactly_the_listed_pairs() {
        use UsageGrade::*;
        let mut pairs = Vec::new();
        for a in UsageGrade::ALL {
            for b in UsageGrade::ALL {
                if a.leq(&b) {
                    pairs.push((a, b));
                }
            }
        }
        assert_eq!(
            pairs,
            vec![
                (Zero, Zero),
                (Zero, Many),
                (One, One),
                (One, Many),
                (Many, Many)
            ]
        );
        assert_eq!(Zero.join(&One), Many);
    }

    #[test]
    fn nat_join_is_max() {
        assert_eq!(Nat(0).join(&Nat(1)), Nat(1));
        assert_eq!(Nat(3).mul(&Nat(0)), Nat(0));
    }
}
