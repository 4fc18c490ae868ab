use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A set of particle labels drawn from `N' = {2, ..., n}`. The empty set
/// plays the role of the label "1".
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &k in members {
            if !(2..64).contains(&k) {
                return Err(Error::InvalidSubset {
                    subset: format!("{members:?}"),
                    reason: format!("label {k} is outside 2..=63"),
                });
            }
            bits |= 1 << k;
        }
        Ok(Subset(bits))
    }

    /// `N' = {2, ..., n}`.
    pub fn full(n: usize) -> Self {
        let mut bits = 0u64;
        for k in 2..=n {
            bits |= 1 << k;
        }
        Subset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, k: usize) -> bool {
        k < 64 && self.0 & (1 << k) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> Vec<usize> {
        (2..64).filter(|&k| self.contains(k)).collect()
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    /// Every subset of `self` (including `self` and the empty set), in
    /// ascending order.
    pub fn subsets(self) -> Vec<Subset> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut s = self.0;
        loop {
            out.push(Subset(s));
            if s == 0 {
                break;
            }
            s = (s - 1) & self.0;
        }
        out.sort();
        out
    }

    /// Every proper subset of `N'` for `n` particles, ascending.
    pub fn proper_subsets(n: usize) -> Vec<Subset> {
        let full = Subset::full(n);
        full.subsets().into_iter().filter(|&s| s != full).collect()
    }

    /// Check `self ⊆ N'` for `n` particles.
    pub fn check_within(self, n: usize) -> Result<()> {
        if !self.is_subset_of(Subset::full(n)) {
            return Err(Error::InvalidSubset {
                subset: self.to_string(),
                reason: format!("not contained in {{2..{n}}}"),
            });
        }
        Ok(())
    }

    /// Short label used in coordinate names: `1` for the empty set,
    /// otherwise the members run together (`23`), comma separated if any
    /// label has two digits.
    pub fn label(self) -> String {
        if self.is_empty() {
            return "1".into();
        }
        let m = self.members();
        let sep = if m.iter().any(|&k| k >= 10) { "," } else { "" };
        m.iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.members().cmp(&other.members()))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Comma-joined ascending labels; the empty set prints as the empty string.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|k| k.to_string()).collect();
        write!(f, "{}", m.join(","))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Subset::EMPTY);
        }
        let mut members = Vec::new();
        for part in s.split(',') {
            let k: usize = part.trim().parse().map_err(|_| Error::InvalidSubset {
                subset: s.into(),
                reason: format!("`{part}` is not a particle label"),
            })?;
            members.push(k);
        }
        let mut sorted = members.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != members {
            return Err(Error::InvalidSubset {
                subset: s.into(),
                reason: "labels must be strictly ascending".into(),
            });
        }
        Subset::from_members(&members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_by_size_then_members() {
        let subs = Subset::proper_subsets(4);
        let shown: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["", "2", "3", "4", "2,3", "2,4", "3,4"]);
    }

    #[test]
    fn parse_and_display() {
        let s: Subset = "2,3".parse().unwrap();
        assert_eq!(s.members(), vec![2, 3]);
        assert_eq!(s.to_string(), "2,3");
        assert_eq!(s.label(), "23");
        assert_eq!(Subset::EMPTY.label(), "1");
        assert_eq!("".parse::<Subset>().unwrap(), Subset::EMPTY);
        assert!("3,2".parse::<Subset>().is_err());
        assert!("1".parse::<Subset>().is_err());
        assert!("x".parse::<Subset>().is_err());
    }

    #[test]
    fn containment() {
        let full = Subset::full(3);
        assert!(Subset::from_members(&[2]).unwrap().is_subset_of(full));
        assert!(Subset::from_members(&[4]).unwrap().check_within(3).is_err());
        assert_eq!(full.subsets().len(), 4);
    }
}
