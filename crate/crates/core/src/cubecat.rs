//! Index combinatorics: finite subsets of the positive integers, set
//! partitions in canonical block order, and the diagonal partitions used to
//! reindex cores.
//!
//! Subsets are sorted integer lists rather than bitmasks, so indices of
//! infinity-fold bundles need no width cap.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A finite set of positive integers, stored strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn new<I: IntoIterator<Item = u32>>(elements: I) -> Result<Self> {
        let mut v: Vec<u32> = elements.into_iter().collect();
        if v.contains(&0) {
            return Err(Error::InvalidIndexSet("elements must be positive".into()));
        }
        v.sort_unstable();
        let len = v.len();
        v.dedup();
        if v.len() != len {
            return Err(Error::InvalidIndexSet("duplicate element".into()));
        }
        Ok(IndexSet(v))
    }

    /// Builds from a slice already known to be strictly increasing and positive.
    pub(crate) fn from_sorted(v: Vec<u32>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]) && v.first().is_none_or(|&x| x > 0));
        IndexSet(v)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// `{1, ..., n}`.
    pub fn range(n: usize) -> Self {
        IndexSet((1..=n as u32).collect())
    }

    pub fn singleton(i: u32) -> Self {
        assert!(i > 0, "index sets hold positive integers");
        IndexSet(vec![i])
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|x| other.contains(*x))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|x| !other.contains(*x))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<u32> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|x| other.contains(*x)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|x| !other.contains(*x)).collect())
    }

    pub fn with(&self, i: u32) -> IndexSet {
        self.union(&IndexSet::singleton(i))
    }

    pub fn without(&self, i: u32) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&x| x != i).collect())
    }

    /// Position of `i` in the sorted element list.
    pub fn position(&self, i: u32) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    /// Image under an order-preserving relabeling `k -> self[k-1]` of a subset of `{1..len}`.
    pub fn pick(&self, positions: &IndexSet) -> Result<IndexSet> {
        positions
            .iter()
            .map(|p| {
                self.0.get(p as usize - 1).copied().ok_or_else(|| {
                    Error::InvalidIndexSet(format!("position {p} out of range for {self}"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(IndexSet::from_sorted)
    }

    /// Inverse of [`IndexSet::pick`]: positions (1-based) of the elements of `sub`.
    pub fn positions_of(&self, sub: &IndexSet) -> Result<IndexSet> {
        sub.iter()
            .map(|x| {
                self.position(x)
                    .map(|p| p as u32 + 1)
                    .ok_or_else(|| Error::InvalidIndexSet(format!("{sub} is not a subset of {self}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(IndexSet::from_sorted)
    }

    /// All subsets, ordered by cardinality and then lexicographically.
    pub fn subsets(&self) -> Vec<IndexSet> {
        subsets(self)
    }

    /// All nonempty subsets, in the order of [`subsets`].
    pub fn nonempty_subsets(&self) -> Vec<IndexSet> {
        subsets(self).into_iter().filter(|s| !s.is_empty()).collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        if !v.windows(2).all(|w| w[0] < w[1]) {
            return Err(serde::de::Error::custom("index set must be strictly increasing"));
        }
        IndexSet::new(v).map_err(serde::de::Error::custom)
    }
}

/// All subsets of `set`, ordered by cardinality and then lexicographically.
pub fn subsets(set: &IndexSet) -> Vec<IndexSet> {
    let n = set.len();
    let mut out: Vec<IndexSet> = Vec::with_capacity(1 << n.min(20));
    for k in 0..=n {
        combinations(set.elements(), k, &mut Vec::new(), 0, &mut out);
    }
    out
}

fn combinations(el: &[u32], k: usize, cur: &mut Vec<u32>, start: usize, out: &mut Vec<IndexSet>) {
    if cur.len() == k {
        out.push(IndexSet(cur.clone()));
        return;
    }
    for i in start..el.len() {
        if el.len() - i < k - cur.len() {
            break;
        }
        cur.push(el[i]);
        combinations(el, k, cur, i + 1, out);
        cur.pop();
    }
}

/// A set partition with blocks in canonical order (sorted by minimum element).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    ground: IndexSet,
    blocks: Vec<IndexSet>,
}

impl Partition {
    pub fn new(mut blocks: Vec<IndexSet>) -> Result<Self> {
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        blocks.sort_by_key(|b| b.min());
        let mut ground = IndexSet::empty();
        for b in &blocks {
            if !b.is_disjoint(&ground) {
                return Err(Error::InvalidPartition("blocks overlap".into()));
            }
            ground = ground.union(b);
        }
        Ok(Partition { ground, blocks })
    }

    /// The partition of `set` into singletons.
    pub fn discrete(set: &IndexSet) -> Self {
        Partition {
            ground: set.clone(),
            blocks: set.iter().map(IndexSet::singleton).collect(),
        }
    }

    /// The one-block partition `{set}`; `set` must be nonempty.
    pub fn trivial(set: &IndexSet) -> Self {
        assert!(!set.is_empty(), "trivial partition of the empty set");
        Partition { ground: set.clone(), blocks: vec![set.clone()] }
    }

    pub fn ground(&self) -> &IndexSet {
        &self.ground
    }

    pub fn blocks(&self) -> &[IndexSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Index (0-based) of the block containing `i`.
    pub fn block_of(&self, i: u32) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(i))
    }

    /// `[nu]`: union of the blocks whose 1-based positions lie in `nu`.
    pub fn union_of(&self, nu: &IndexSet) -> Result<IndexSet> {
        let mut out = IndexSet::empty();
        for p in nu.iter() {
            let b = self.blocks.get(p as usize - 1).ok_or_else(|| {
                Error::InvalidPartition(format!("block position {p} out of range"))
            })?;
            out = out.union(b);
        }
        Ok(out)
    }

    /// Expands a partition `pi` of a set of block positions into the partition
    /// of the corresponding union, with blocks `[pi_b]`.
    pub fn expand(&self, pi: &Partition) -> Result<Partition> {
        let blocks = pi.blocks.iter().map(|b| self.union_of(b)).collect::<Result<Vec<_>>>()?;
        Partition::new(blocks)
    }

    /// Positions of the blocks contained in `set`, if `set` is a union of blocks.
    pub fn positions_within(&self, set: &IndexSet) -> Option<IndexSet> {
        let mut pos = Vec::new();
        let mut covered = IndexSet::empty();
        for (k, b) in self.blocks.iter().enumerate() {
            if b.is_subset(set) {
                pos.push(k as u32 + 1);
                covered = covered.union(b);
            } else if !b.is_disjoint(set) {
                return None;
            }
        }
        (covered == *set).then(|| IndexSet::from_sorted(pos))
    }

    pub fn is_union_of_blocks(&self, set: &IndexSet) -> bool {
        self.positions_within(set).is_some()
    }

    /// The blocks of `self` lying inside `set`, as a partition of `set`.
    pub fn restrict_to(&self, set: &IndexSet) -> Option<Partition> {
        self.positions_within(set)?;
        Some(Partition {
            ground: set.clone(),
            blocks: self.blocks.iter().filter(|b| b.is_subset(set)).cloned().collect(),
        })
    }

    /// Unions of blocks along a partition `pi` of `{1..k}`.
    pub fn coarsen(&self, pi: &Partition) -> Result<Partition> {
        coarsen(self, pi)
    }

    /// Every coarsening of `self`, paired with the partition of block positions producing it.
    pub fn coarsenings(&self) -> Vec<(Partition, Partition)> {
        if self.blocks.is_empty() {
            return Vec::new();
        }
        partitions(&IndexSet::range(self.len()))
            .expect("nonempty")
            .into_iter()
            .map(|pi| {
                let c = self.expand(&pi).expect("positions in range");
                (pi, c)
            })
            .collect()
    }

    /// Merges the blocks at 1-based positions `a` and `b`.
    pub fn merge(&self, a: usize, b: usize) -> Result<Partition> {
        if a == b || a == 0 || b == 0 || a > self.len() || b > self.len() {
            return Err(Error::InvalidPartition(format!("cannot merge blocks {a} and {b}")));
        }
        let merged = self.blocks[a - 1].union(&self.blocks[b - 1]);
        let mut blocks: Vec<IndexSet> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != a - 1 && *k != b - 1)
            .map(|(_, x)| x.clone())
            .collect();
        blocks.push(merged);
        Partition::new(blocks)
    }

    /// Drops the blocks at the given 1-based positions.
    pub fn without_blocks(&self, positions: &IndexSet) -> Partition {
        let blocks: Vec<IndexSet> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(k, _)| !positions.contains(*k as u32 + 1))
            .map(|(_, b)| b.clone())
            .collect();
        Partition::new(blocks).expect("sub-family of a partition")
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.ground == other.ground
            && self.blocks.iter().all(|b| other.blocks.iter().any(|c| b.is_subset(c)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<IndexSet>::deserialize(d)?;
        let p = Partition::new(blocks.clone()).map_err(serde::de::Error::custom)?;
        if p.blocks != blocks {
            return Err(serde::de::Error::custom("partition blocks must be in canonical order"));
        }
        Ok(p)
    }
}

/// Every set partition of a nonempty `set`, each exactly once.
///
/// The list follows lexicographic order of restricted growth strings, so the
/// one-block partition comes first and the discrete partition last.
pub fn partitions(set: &IndexSet) -> Result<Vec<Partition>> {
    if set.is_empty() {
        return Err(Error::InvalidPartition("partitions of the empty set".into()));
    }
    let el = set.elements();
    let mut out = Vec::new();
    let mut labels = vec![0usize; el.len()];
    rgs(el, 1, 0, &mut labels, &mut out);
    Ok(out)
}

fn rgs(el: &[u32], i: usize, max: usize, labels: &mut [usize], out: &mut Vec<Partition>) {
    if i == el.len() {
        let mut blocks = vec![Vec::new(); max + 1];
        for (x, &l) in el.iter().zip(labels.iter()) {
            blocks[l].push(*x);
        }
        // Labels are assigned in order of first occurrence, so blocks are already canonical.
        let blocks: Vec<IndexSet> = blocks.into_iter().map(IndexSet::from_sorted).collect();
        let ground = IndexSet::from_sorted(el.to_vec());
        out.push(Partition { ground, blocks });
        return;
    }
    for l in 0..=max + 1 {
        labels[i] = l;
        rgs(el, i + 1, max.max(l), labels, out);
    }
}

/// Unions of the blocks of `rho` along a partition `pi` of `{1..k}`, `k` the block count.
pub fn coarsen(rho: &Partition, pi: &Partition) -> Result<Partition> {
    if *pi.ground() != IndexSet::range(rho.len()) {
        return Err(Error::InvalidPartition(format!(
            "{pi} does not partition {{1..{}}}",
            rho.len()
        )));
    }
    rho.expand(pi)
}

/// The partition of `S` into one distinguished block `J` and the singletons of `S \ J`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct DiagonalPartition {
    distinguished: IndexSet,
    singletons: Vec<IndexSet>,
    ground: IndexSet,
}

impl DiagonalPartition {
    pub fn new(ground: &IndexSet, distinguished: &IndexSet) -> Result<Self> {
        if distinguished.is_empty() {
            return Err(Error::InvalidPartition("distinguished block must be nonempty".into()));
        }
        if !distinguished.is_subset(ground) {
            return Err(Error::InvalidPartition(format!("{distinguished} is not a subset of {ground}")));
        }
        Ok(DiagonalPartition {
            distinguished: distinguished.clone(),
            singletons: ground.difference(distinguished).iter().map(IndexSet::singleton).collect(),
            ground: ground.clone(),
        })
    }

    pub fn distinguished(&self) -> &IndexSet {
        &self.distinguished
    }

    pub fn singletons(&self) -> &[IndexSet] {
        &self.singletons
    }

    pub fn ground(&self) -> &IndexSet {
        &self.ground
    }

    pub fn as_partition(&self) -> Partition {
        let mut blocks = self.singletons.clone();
        blocks.push(self.distinguished.clone());
        Partition::new(blocks).expect("diagonal partition is a partition")
    }

    /// `[nu]` for a family `nu` of blocks.
    pub fn unions_of_blocks(&self, nu: &[IndexSet]) -> Result<IndexSet> {
        let mut out = IndexSet::empty();
        for b in nu {
            if *b != self.distinguished && !self.singletons.contains(b) {
                return Err(Error::InvalidPartition(format!("{b} is not a block")));
            }
            out = out.union(b);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(v: &[u32]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    fn part(v: &[&[u32]]) -> Partition {
        Partition::new(v.iter().map(|b| set(b)).collect()).unwrap()
    }

    // Brute force: every labeling with at most n labels, canonicalized as a set of sets.
    fn brute_partition_count(n: usize) -> usize {
        let mut seen = BTreeSet::new();
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut blocks: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
            for x in 1..=n as u32 {
                blocks[c % n].insert(x);
                c /= n;
            }
            let canon: BTreeSet<Vec<u32>> = blocks
                .into_iter()
                .filter(|b| !b.is_empty())
                .map(|b| b.into_iter().collect())
                .collect();
            seen.insert(canon);
        }
        seen.len()
    }

    #[test]
    fn subsets_ordering() {
        assert_eq!(subsets(&set(&[1, 2])), vec![set(&[]), set(&[1]), set(&[2]), set(&[1, 2])]);
        assert_eq!(subsets(&IndexSet::empty()), vec![IndexSet::empty()]);
        assert_eq!(subsets(&set(&[1, 2, 3])).len(), 8);
        assert_eq!(subsets(&set(&[1, 2, 3]))[4], set(&[1, 2]));
    }

    #[test]
    fn partition_counts_match_brute_force() {
        for n in 1..=6 {
            let ps = partitions(&IndexSet::range(n)).unwrap();
            assert_eq!(ps.len(), brute_partition_count(n), "n = {n}");
            let distinct: BTreeSet<_> = ps.iter().cloned().collect();
            assert_eq!(distinct.len(), ps.len());
        }
        assert!(partitions(&IndexSet::empty()).is_err());
        assert_eq!(partitions(&set(&[1])).unwrap(), vec![part(&[&[1]])]);
    }

    #[test]
    fn coarsen_examples() {
        let rho = part(&[&[1], &[2], &[3]]);
        assert_eq!(coarsen(&rho, &part(&[&[1, 2], &[3]])).unwrap(), part(&[&[1, 2], &[3]]));
        assert_eq!(coarsen(&part(&[&[1], &[2]]), &part(&[&[1, 2]])).unwrap(), part(&[&[1, 2]]));
        assert_eq!(coarsen(&part(&[&[1, 3], &[2]]), &part(&[&[1, 2]])).unwrap(), part(&[&[1, 2, 3]]));
        assert!(coarsen(&rho, &part(&[&[1, 2]])).is_err());
    }

    #[test]
    fn canonical_order_and_serde() {
        let p = Partition::new(vec![set(&[2, 4]), set(&[1]), set(&[3])]).unwrap();
        assert_eq!(p.blocks()[0], set(&[1]));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[[1],[2,4],[3]]");
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Partition>("[[2],[1]]").is_err());
        assert!(serde_json::from_str::<IndexSet>("[2,1]").is_err());
        assert!(serde_json::from_str::<IndexSet>("[0]").is_err());
        assert!(Partition::new(vec![set(&[1, 2]), set(&[2])]).is_err());
    }

    #[test]
    fn diagonal_unions() {
        let d = DiagonalPartition::new(&set(&[1, 2, 3]), &set(&[1, 2])).unwrap();
        assert_eq!(d.unions_of_blocks(&[set(&[1, 2]), set(&[3])]).unwrap(), set(&[1, 2, 3]));
        assert_eq!(d.unions_of_blocks(&[]).unwrap(), IndexSet::empty());
        let d = DiagonalPartition::new(&set(&[1, 2, 3, 4]), &set(&[2, 3])).unwrap();
        assert_eq!(d.unions_of_blocks(&[set(&[1]), set(&[4])]).unwrap(), set(&[1, 4]));
        assert!(d.unions_of_blocks(&[set(&[2])]).is_err());
        assert_eq!(d.as_partition(), part(&[&[1], &[2, 3], &[4]]));
    }

    #[test]
    fn restriction_and_merge() {
        let p = part(&[&[1, 3], &[2], &[4]]);
        assert_eq!(p.positions_within(&set(&[1, 3, 4])), Some(set(&[1, 3])));
        assert_eq!(p.positions_within(&set(&[1, 2])), None);
        assert_eq!(p.restrict_to(&set(&[2, 4])).unwrap(), part(&[&[2], &[4]]));
        assert_eq!(p.merge(2, 3).unwrap(), part(&[&[1, 3], &[2, 4]]));
        assert_eq!(p.union_of(&set(&[1, 2])).unwrap(), set(&[1, 2, 3]));
        assert_eq!(p.coarsenings().len(), 5);
    }

    proptest::proptest! {
        #[test]
        fn coarsen_extremes(n in 1usize..6, pick in 0usize..1000) {
            let ps = partitions(&IndexSet::range(n)).unwrap();
            let rho = &ps[pick % ps.len()];
            let k = IndexSet::range(rho.len());
            proptest::prop_assert_eq!(&coarsen(rho, &Partition::discrete(&k)).unwrap(), rho);
            proptest::prop_assert_eq!(coarsen(rho, &Partition::trivial(&k)).unwrap(), Partition::trivial(rho.ground()));
            let back: Partition = serde_json::from_str(&serde_json::to_string(rho).unwrap()).unwrap();
            proptest::prop_assert_eq!(&back, rho);
        }
    }
}
