//! Coalitions over an ordered partition of model parameters into groups.
//!
//! A partition `Π = {M_1, …, M_N}` splits the changed parameters into named
//! groups. A coalition is any subset of `Π`, encoded as a bitmask over group
//! indices `0..N`. Everything downstream — utility tables, the least-squares
//! design, the Shapley solves — works in terms of these masks.
//!
//! The canonical enumeration order used for matrix rows and file keys is
//! ascending coalition size, then ascending mask value within a size class,
//! so for three groups: `{0}, {1}, {2}, {0,1}, {0,2}, {1,2}`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_integer::binomial;
use thiserror::Error;

/// Hard cap on the number of groups: `2^25 − 2` coalitions is the largest
/// table that still fits comfortably in memory for exhaustive enumeration.
pub const MAX_GROUPS: usize = 25;

#[derive(Debug, Error)]
pub enum CoalitionError {
    #[error("partition must contain at least one group")]
    EmptyPartition,
    #[error("partition has {0} groups; enumeration is capped at {MAX_GROUPS}")]
    TooManyGroups(usize),
    #[error("duplicate group label `{0}`")]
    DuplicateLabel(String),
    #[error("member `{0}` appears in more than one group")]
    DuplicateMember(String),
    #[error("kernel weight k({n}, {size}) is undefined; need 2 <= n and 1 <= size <= n-1")]
    KernelDomain { n: usize, size: usize },
    #[error("coalition {0} is out of range for a partition of {1} groups")]
    MaskOutOfRange(CoalitionMask, usize),
    #[error("coalition {0} must be proper and non-empty here")]
    NotProper(CoalitionMask),
    #[error("value for coalition {0} is not finite")]
    NonFiniteValue(CoalitionMask),
    #[error("grand-coalition value is not finite")]
    NonFiniteGrand,
    #[error("utility table is incomplete; missing coalitions: {}", keys.join(" "))]
    IncompleteTable { keys: Vec<String> },
    #[error("invalid coalition key `{0}`: expected comma-joined ascending group indices")]
    BadKey(String),
    #[error("expected {expected} values in canonical order, got {got}")]
    WrongValueCount { expected: usize, got: usize },
}

/// A coalition of groups, stored as a bitmask over group indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoalitionMask(pub u32);

impl CoalitionMask {
    pub const EMPTY: CoalitionMask = CoalitionMask(0);

    /// The grand coalition over `n` groups.
    pub fn full(n: usize) -> CoalitionMask {
        CoalitionMask(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(index: usize) -> CoalitionMask {
        CoalitionMask(1 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> CoalitionMask {
        CoalitionMask(indices.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CoalitionMask) -> CoalitionMask {
        CoalitionMask(self.0 | other.0)
    }

    pub fn with(self, index: usize) -> CoalitionMask {
        CoalitionMask(self.0 | (1 << index))
    }

    pub fn without(self, index: usize) -> CoalitionMask {
        CoalitionMask(self.0 & !(1 << index))
    }

    /// True for a non-empty proper subset of the grand coalition over `n` groups.
    pub fn is_proper_nonempty(self, n: usize) -> bool {
        self.0 != 0 && self.0 < Self::full(n).0
    }

    /// Member group indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..u32::BITS as usize).filter(move |i| self.contains(*i))
    }

    /// The file key: comma-joined ascending indices, e.g. `"0,2"`. Empty
    /// coalition gives the empty string.
    pub fn key(self) -> String {
        self.indices()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses a file key. Indices must be strictly ascending, so `"2,0"` and
    /// `"0,0"` are rejected; the empty string is rejected (the empty coalition
    /// is never written).
    pub fn parse_key(key: &str) -> Result<CoalitionMask, CoalitionError> {
        let bad = || CoalitionError::BadKey(key.to_string());
        if key.is_empty() {
            return Err(bad());
        }
        let mut mask = 0u32;
        let mut last: Option<usize> = None;
        for part in key.split(',') {
            if part.is_empty() || part.len() > 2 || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let idx: usize = part.parse().map_err(|_| bad())?;
            if idx >= MAX_GROUPS || last.is_some_and(|p| idx <= p) {
                return Err(bad());
            }
            mask |= 1 << idx;
            last = Some(idx);
        }
        Ok(CoalitionMask(mask))
    }
}

impl fmt::Display for CoalitionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl fmt::Debug for CoalitionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoalitionMask({self})")
    }
}

/// An ordered partition of the changed parameters into labelled groups,
/// optionally carrying the member parameters of each group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    labels: Vec<String>,
    members: Option<Vec<Vec<String>>>,
}

impl GroupPartition {
    pub fn from_labels<I, S>(labels: I) -> Result<GroupPartition, CoalitionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Self::validate_labels(&labels)?;
        Ok(GroupPartition { labels, members: None })
    }

    /// Builds a partition whose groups carry disjoint member-parameter lists.
    pub fn with_members(groups: Vec<(String, Vec<String>)>) -> Result<GroupPartition, CoalitionError> {
        let labels: Vec<String> = groups.iter().map(|(l, _)| l.clone()).collect();
        Self::validate_labels(&labels)?;
        let members: Vec<Vec<String>> = groups.into_iter().map(|(_, m)| m).collect();
        let mut seen = HashMap::new();
        for (g, list) in members.iter().enumerate() {
            for m in list {
                if seen.insert(m.clone(), g).is_some() {
                    return Err(CoalitionError::DuplicateMember(m.clone()));
                }
            }
        }
        Ok(GroupPartition { labels, members: Some(members) })
    }

    fn validate_labels(labels: &[String]) -> Result<(), CoalitionError> {
        if labels.is_empty() {
            return Err(CoalitionError::EmptyPartition);
        }
        if labels.len() > MAX_GROUPS {
            return Err(CoalitionError::TooManyGroups(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(CoalitionError::DuplicateLabel(l.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid partition always has at least one group
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> Option<&[Vec<String>]> {
        self.members.as_deref()
    }

    /// The group index owning `member`, when member lists are present.
    pub fn group_of(&self, member: &str) -> Option<usize> {
        self.members
            .as_ref()?
            .iter()
            .position(|list| list.iter().any(|m| m == member))
    }

    pub fn full_mask(&self) -> CoalitionMask {
        CoalitionMask::full(self.len())
    }
}

/// All `2^n − 2` proper non-empty coalitions in canonical order: ascending
/// size, then ascending mask value. For `n = 1` the list is empty.
pub fn enumerate_proper_coalitions(n: usize) -> Result<Vec<CoalitionMask>, CoalitionError> {
    if n == 0 {
        return Err(CoalitionError::EmptyPartition);
    }
    if n > MAX_GROUPS {
        return Err(CoalitionError::TooManyGroups(n));
    }
    let full = CoalitionMask::full(n).0;
    let mut masks: Vec<CoalitionMask> = (1..full).map(CoalitionMask).collect();
    masks.sort_by_key(|m| (m.size(), m.0));
    Ok(masks)
}

/// Least-squares kernel weight `k(n, s) = 1 / C(n−2, s−1)` for a proper
/// non-empty coalition of size `s` out of `n` groups, from exact integer
/// binomials. Symmetric in `s ↦ n − s`.
pub fn kernel_weight(n: usize, size: usize) -> Result<f64, CoalitionError> {
    if n < 2 || size == 0 || size >= n {
        return Err(CoalitionError::KernelDomain { n, size });
    }
    let denom: u128 = binomial((n - 2) as u128, (size - 1) as u128);
    Ok(1.0 / denom as f64)
}

/// A utility table `g` over the proper non-empty coalitions of a partition,
/// plus the grand-coalition value. `g(∅) = 0` is implicit and never stored;
/// entries may be missing (the partial-information modules work with the gap).
#[derive(Debug, Clone)]
pub struct UtilityTable {
    partition: GroupPartition,
    entries: HashMap<u32, f64>,
    grand: f64,
}

impl UtilityTable {
    /// Builds a table from explicit `(coalition, value)` entries. Coalitions
    /// not listed are treated as missing. The empty and grand coalitions must
    /// not appear among the entries.
    pub fn new<I>(partition: GroupPartition, entries: I, grand: f64) -> Result<UtilityTable, CoalitionError>
    where
        I: IntoIterator<Item = (CoalitionMask, f64)>,
    {
        if !grand.is_finite() {
            return Err(CoalitionError::NonFiniteGrand);
        }
        let n = partition.len();
        let mut map = HashMap::new();
        for (mask, value) in entries {
            if !mask.is_proper_nonempty(n) {
                return Err(if mask.0 >= CoalitionMask::full(n).0 && mask.0 != 0 && mask.0 != CoalitionMask::full(n).0 {
                    CoalitionError::MaskOutOfRange(mask, n)
                } else {
                    CoalitionError::NotProper(mask)
                });
            }
            if !value.is_finite() {
                return Err(CoalitionError::NonFiniteValue(mask));
            }
            map.insert(mask.0, value);
        }
        Ok(UtilityTable { partition, entries: map, grand })
    }

    /// Builds a complete table from values listed in canonical coalition order.
    pub fn complete(
        partition: GroupPartition,
        values: &[f64],
        grand: f64,
    ) -> Result<UtilityTable, CoalitionError> {
        let masks = enumerate_proper_coalitions(partition.len())?;
        if values.len() != masks.len() {
            return Err(CoalitionError::WrongValueCount { expected: masks.len(), got: values.len() });
        }
        Self::new(partition, masks.into_iter().zip(values.iter().copied()), grand)
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn grand(&self) -> f64 {
        self.grand
    }

    /// The utility of a coalition: `0` for the empty coalition, the grand
    /// value for the full coalition, the stored entry otherwise (`None` when
    /// missing).
    pub fn value(&self, mask: CoalitionMask) -> Option<f64> {
        if mask.is_empty() {
            Some(0.0)
        } else if mask == self.partition.full_mask() {
            Some(self.grand)
        } else {
            self.entries.get(&mask.0).copied()
        }
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == (1usize << self.partition.len()) - 2
    }

    /// Missing proper coalitions in canonical order.
    pub fn missing(&self) -> Vec<CoalitionMask> {
        enumerate_proper_coalitions(self.partition.len())
            .expect("partition size already validated")
            .into_iter()
            .filter(|m| !self.entries.contains_key(&m.0))
            .collect()
    }

    /// Observed `(coalition, value)` pairs in canonical order, excluding the
    /// implicit empty and grand coalitions.
    pub fn observed(&self) -> Vec<(CoalitionMask, f64)> {
        enumerate_proper_coalitions(self.partition.len())
            .expect("partition size already validated")
            .into_iter()
            .filter_map(|m| self.entries.get(&m.0).map(|v| (m, *v)))
            .collect()
    }

    /// Returns a copy with one more observed entry, used when completing a
    /// table from inferred values.
    pub fn with_value(&self, mask: CoalitionMask, value: f64) -> Result<UtilityTable, CoalitionError> {
        let mut out = self.clone();
        if !mask.is_proper_nonempty(self.partition.len()) {
            return Err(CoalitionError::NotProper(mask));
        }
        if !value.is_finite() {
            return Err(CoalitionError::NonFiniteValue(mask));
        }
        out.entries.insert(mask.0, value);
        Ok(out)
    }

    /// Dense utilities indexed by mask value (`len = 2^n`), with `g(∅) = 0`
    /// and the grand value at the top index. Errors when entries are missing.
    pub fn dense_values(&self) -> Result<Vec<f64>, CoalitionError> {
        let n = self.partition.len();
        self.require_complete()?;
        let mut dense = vec![0.0; 1 << n];
        for (mask, value) in &self.entries {
            dense[*mask as usize] = *value;
        }
        dense[(1usize << n) - 1] = self.grand;
        Ok(dense)
    }

    /// The utility vector over proper coalitions in canonical order.
    pub fn g_vector(&self) -> Result<DVector<f64>, CoalitionError> {
        self.require_complete()?;
        let masks = enumerate_proper_coalitions(self.partition.len())?;
        Ok(DVector::from_iterator(
            masks.len(),
            masks.iter().map(|m| self.entries[&m.0]),
        ))
    }

    fn require_complete(&self) -> Result<(), CoalitionError> {
        if self.is_complete() {
            return Ok(());
        }
        Err(CoalitionError::IncompleteTable {
            keys: self.missing().iter().map(|m| m.key()).collect(),
        })
    }
}

/// The matrices of the constrained-least-squares characterization: binary
/// design `D` (one row per proper coalition, one column per group), kernel
/// weights `K` (diagonal, as a vector), and the utility vector `g`, all in
/// canonical row order.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    pub coalitions: Vec<CoalitionMask>,
    pub design: DMatrix<f64>,
    pub weights: DVector<f64>,
    pub g: DVector<f64>,
}

/// Assembles the design system for a complete table. Needs at least two
/// groups (the kernel is undefined below that) and every entry present.
pub fn build_design_system(table: &UtilityTable) -> Result<DesignSystem, CoalitionError> {
    let n = table.partition().len();
    if n < 2 {
        return Err(CoalitionError::KernelDomain { n, size: 0 });
    }
    let g = table.g_vector()?;
    let coalitions = enumerate_proper_coalitions(n)?;
    let rows = coalitions.len();
    let mut design = DMatrix::zeros(rows, n);
    let mut weights = DVector::zeros(rows);
    for (r, mask) in coalitions.iter().enumerate() {
        for j in mask.indices() {
            design[(r, j)] = 1.0;
        }
        weights[r] = kernel_weight(n, mask.size())?;
    }
    Ok(DesignSystem { coalitions, design, weights, g })
}
