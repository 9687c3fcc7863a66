use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the arm bit mask.
pub const MAX_ARMS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize, labels: Option<Vec<String>>) -> Result<Self> {
        if n == 0 || n > MAX_ARMS {
            return Err(Error::invalid("ground.n", format!("must be in 1..={MAX_ARMS}, got {n}")));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::invalid(
                    "ground.labels",
                    format!("expected {n} labels, got {}", labels.len()),
                ));
            }
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::invalid(format!("ground.labels[{i}]"), format!("duplicate label {l:?}")));
                }
            }
        }
        Ok(GroundSet { n, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, arm: usize) -> String {
        match &self.labels {
            Some(l) => l[arm].clone(),
            None => arm.to_string(),
        }
    }

    pub fn full(&self) -> ArmSet {
        ArmSet::full(self.n)
    }
}

/// A subset of the ground set, stored as a bit mask over arm indices.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmSet(u32);

impl ArmSet {
    pub const EMPTY: ArmSet = ArmSet(0);

    pub fn from_bits(bits: u32) -> Self {
        ArmSet(bits)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_ARMS);
        ArmSet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(arm: usize) -> Self {
        debug_assert!(arm < MAX_ARMS);
        ArmSet(1 << arm)
    }

    pub fn from_arms<I: IntoIterator<Item = usize>>(arms: I) -> Self {
        arms.into_iter().fold(ArmSet::EMPTY, |s, a| s.with(a))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, arm: usize) -> bool {
        arm < MAX_ARMS && self.0 & (1 << arm) != 0
    }

    #[must_use]
    pub fn with(self, arm: usize) -> Self {
        ArmSet(self.0 | (1 << arm))
    }

    #[must_use]
    pub fn without(self, arm: usize) -> Self {
        ArmSet(self.0 & !(1 << arm))
    }

    #[must_use]
    pub fn union(self, other: ArmSet) -> Self {
        ArmSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: ArmSet) -> Self {
        ArmSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ArmSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Checks that no bit at or above `n` is set.
    pub fn check(self, n: usize) -> Result<()> {
        if n < 32 && self.0 >> n != 0 {
            let arm = 31 - self.0.leading_zeros() as usize;
            return Err(Error::OutOfRange { arm, n });
        }
        Ok(())
    }

    /// Arm indices in increasing order.
    pub fn arms(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `{0, .., n-1}` in increasing mask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = ArmSet> {
        (0..(1u64 << n)).map(|b| ArmSet(b as u32))
    }

    /// `0x`-prefixed lowercase hex mask.
    pub fn to_hex(self) -> String {
        format!("{:#x}", self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let digits = s.strip_prefix("0x").unwrap_or(s);
        u32::from_str_radix(digits, 16)
            .map(ArmSet)
            .map_err(|e| Error::domain(format!("bad hex mask {s:?}: {e}")))
    }
}

impl fmt::Debug for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, a) in self.arms().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}
