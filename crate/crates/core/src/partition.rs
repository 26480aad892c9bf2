//! Set partitions and the classical moment-cumulant sums over them.
//!
//! This module is independent of the shuffle calculus: it only enumerates
//! partitions and multiplies values of blocks, so it can serve as an oracle
//! for the algebraic route.

use std::sync::LazyLock;

use parking_lot::Mutex;
use rustc_hash::FxHashMap;

use crate::algebra::Word;
use crate::cumulants::CumulantKind;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest ground set the enumerator accepts.
pub const MAX_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartitionClass {
    All,
    NonCrossing,
    Interval,
}

/// A partition of `{1, …, n}`; blocks are sorted internally and by minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<SetPartition> {
        let mut seen = vec![false; n + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::validation("partition blocks must be nonempty"));
            }
            for &i in block {
                if i == 0 || i > n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::validation(format!(
                        "blocks do not partition 1..={n}"
                    )));
                }
            }
        }
        if seen.iter().skip(1).any(|s| !s) {
            return Err(Error::validation(format!("blocks do not cover 1..={n}")));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { n, blocks })
    }

    fn from_growth(labels: &[usize]) -> SetPartition {
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l].push(i + 1);
        }
        SetPartition {
            n: labels.len(),
            blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n + 1];
        for (k, block) in self.blocks.iter().enumerate() {
            for &i in block {
                owner[i] = k;
            }
        }
        owner
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_noncrossing(&self) -> bool {
        // a block strictly between two consecutive elements of another block
        // must lie entirely between them
        let owner = self.block_of();
        for block in &self.blocks {
            for pair in block.windows(2) {
                let (a, c) = (pair[0], pair[1]);
                for &b in &owner[a + 1..c] {
                    let other = &self.blocks[b];
                    if other[0] < a || other[other.len() - 1] > c {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Every block is a run of consecutive integers.
    pub fn is_interval(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b[b.len() - 1] - b[0] + 1 == b.len())
    }

    pub fn belongs_to(&self, class: PartitionClass) -> bool {
        match class {
            PartitionClass::All => true,
            PartitionClass::NonCrossing => self.is_noncrossing(),
            PartitionClass::Interval => self.is_interval(),
        }
    }
}

type Table = FxHashMap<(usize, PartitionClass), Vec<SetPartition>>;

static CACHE: LazyLock<Mutex<Table>> = LazyLock::new(Default::default);

/// Every partition of `{1, …, n}` in the class, via restricted growth strings.
pub fn enumerate(n: usize, class: PartitionClass) -> Result<Vec<SetPartition>> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::validation(format!(
            "partition size {n} outside 1..={MAX_POINTS}"
        )));
    }
    if let Some(found) = CACHE.lock().get(&(n, class)) {
        return Ok(found.clone());
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    let mut maxima = vec![0usize; n];
    loop {
        let p = SetPartition::from_growth(&labels);
        if p.belongs_to(class) {
            out.push(p);
        }
        // next restricted growth string: bump the rightmost position that can grow
        let mut i = n - 1;
        loop {
            if i == 0 {
                CACHE.lock().insert((n, class), out.clone());
                return Ok(out);
            }
            if labels[i] <= maxima[i - 1] {
                labels[i] += 1;
                maxima[i] = maxima[i - 1].max(labels[i]);
                for j in i + 1..n {
                    labels[j] = 0;
                    maxima[j] = maxima[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Nesting structure of a non-crossing partition: the parent of a block is
/// the innermost block whose span strictly contains it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestingForest {
    parent: Vec<Option<usize>>,
}

impl NestingForest {
    pub fn new(p: &SetPartition) -> Result<NestingForest> {
        if !p.is_noncrossing() {
            return Err(Error::domain("nesting forest of a crossing partition"));
        }
        let blocks = p.blocks();
        let parent = blocks
            .iter()
            .map(|inner| {
                blocks
                    .iter()
                    .enumerate()
                    .filter(|(_, outer)| {
                        outer[0] < inner[0] && inner[inner.len() - 1] < outer[outer.len() - 1]
                    })
                    .max_by_key(|(_, outer)| outer[0])
                    .map(|(k, _)| k)
            })
            .collect();
        Ok(NestingForest { parent })
    }

    pub fn parent(&self, block: usize) -> Option<usize> {
        self.parent[block]
    }

    /// Number of blocks in each block's subtree, itself included.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![1; self.parent.len()];
        for start in 0..self.parent.len() {
            let mut up = self.parent[start];
            while let Some(k) = up {
                sizes[k] += 1;
                up = self.parent[k];
            }
        }
        sizes
    }
}

/// `τ(π)!`: the product of subtree sizes of the nesting forest.
pub fn tree_factorial(p: &SetPartition) -> Result<Rational> {
    let forest = NestingForest::new(p)?;
    Ok(forest
        .subtree_sizes()
        .into_iter()
        .map(|s| Rational::from_integer(s as i64))
        .product())
}

/// Moment of `w` from cumulant values `c`, by summing over partitions:
/// non-crossing (free), interval (boolean), or non-crossing weighted by
/// `1/τ(π)!` (monotone).
pub fn oracle_moments(
    c: impl Fn(&Word) -> Rational,
    kind: CumulantKind,
    w: &Word,
) -> Result<Rational> {
    let n = w.degree();
    if n == 0 {
        return Ok(Rational::one());
    }
    let class = match kind {
        CumulantKind::Boolean => PartitionClass::Interval,
        CumulantKind::Free | CumulantKind::Monotone => PartitionClass::NonCrossing,
    };
    let mut total = Rational::zero();
    for p in enumerate(n, class)? {
        let mut term = Rational::one();
        for block in p.blocks() {
            let v = c(&w.subword(block)?);
            if v.is_zero() {
                term = v;
                break;
            }
            term *= &v;
        }
        if term.is_zero() {
            continue;
        }
        if kind == CumulantKind::Monotone {
            term = term / tree_factorial(&p)?;
        }
        total += term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bell(n: usize) -> u64 {
        // Bell triangle
        let mut row = vec![1u64];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    fn catalan(n: usize) -> u64 {
        let mut c = vec![1u64; n + 1];
        for m in 1..=n {
            c[m] = (0..m).map(|i| c[i] * c[m - 1 - i]).sum();
        }
        c[n]
    }

    #[test]
    fn counts_match_known_sequences() {
        for n in 1..=8 {
            assert_eq!(
                enumerate(n, PartitionClass::All).unwrap().len() as u64,
                bell(n),
                "n = {n}"
            );
            assert_eq!(
                enumerate(n, PartitionClass::NonCrossing).unwrap().len() as u64,
                catalan(n),
                "n = {n}"
            );
            assert_eq!(
                enumerate(n, PartitionClass::Interval).unwrap().len(),
                1 << (n - 1)
            );
        }
        assert_eq!(enumerate(4, PartitionClass::NonCrossing).unwrap().len(), 14);
        assert_eq!(enumerate(3, PartitionClass::Interval).unwrap().len(), 4);
        assert_eq!(enumerate(1, PartitionClass::All).unwrap().len(), 1);
        assert_eq!(enumerate(10, PartitionClass::All).unwrap().len(), 115_975);
    }

    #[test]
    fn size_bounds() {
        assert!(enumerate(0, PartitionClass::All).is_err());
        assert!(enumerate(11, PartitionClass::All).is_err());
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all = enumerate(6, PartitionClass::All).unwrap();
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn crossing_detection() {
        let crossing = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        assert!(!crossing.is_noncrossing());
        let nested = SetPartition::new(4, vec![vec![1, 4], vec![2, 3]]).unwrap();
        assert!(nested.is_noncrossing());
        assert!(!nested.is_interval());
        let outer_left = SetPartition::new(5, vec![vec![2, 4], vec![1, 3, 5]]).unwrap();
        assert!(!outer_left.is_noncrossing());
        assert!(SetPartition::new(3, vec![vec![1], vec![1, 2, 3]]).is_err());
    }

    #[test]
    fn tree_factorials() {
        let p = |blocks: Vec<Vec<usize>>, n| SetPartition::new(n, blocks).unwrap();
        assert_eq!(
            tree_factorial(&p(vec![vec![1, 2], vec![3, 4]], 4)).unwrap(),
            Rational::one()
        );
        assert_eq!(
            tree_factorial(&p(vec![vec![1, 4], vec![2, 3]], 4)).unwrap(),
            Rational::from_integer(2)
        );
        assert_eq!(
            tree_factorial(&p(vec![(1..=6).collect()], 6)).unwrap(),
            Rational::one()
        );
        // {16}{25}{34}: a chain of three
        assert_eq!(
            tree_factorial(&p(vec![vec![1, 6], vec![2, 5], vec![3, 4]], 6)).unwrap(),
            Rational::from_integer(6)
        );
        // {16}{2}{345}: root with two leaves
        assert_eq!(
            tree_factorial(&p(vec![vec![1, 6], vec![2], vec![3, 4, 5]], 6)).unwrap(),
            Rational::from_integer(3)
        );
        assert!(tree_factorial(&p(vec![vec![1, 3], vec![2, 4]], 4)).is_err());
    }

    fn univariate(values: &[i64]) -> impl Fn(&Word) -> Rational + '_ {
        |w: &Word| Rational::from_integer(values.get(w.degree() - 1).copied().unwrap_or(0))
    }

    #[test]
    fn oracle_examples() {
        let w = Word::parse("a.a.a.a").unwrap();
        let pairs = [0, 1, 0, 0];
        assert_eq!(
            oracle_moments(univariate(&pairs), CumulantKind::Free, &w).unwrap(),
            Rational::from_integer(2)
        );
        assert_eq!(
            oracle_moments(univariate(&pairs), CumulantKind::Boolean, &w).unwrap(),
            Rational::one()
        );
        let half = |w: &Word| match w.degree() {
            2 => Rational::one(),
            4 => Rational::new(1, 2),
            _ => Rational::zero(),
        };
        assert_eq!(
            oracle_moments(half, CumulantKind::Monotone, &w).unwrap(),
            Rational::from_integer(2)
        );
        let a = Word::parse("a").unwrap();
        for kind in [
            CumulantKind::Free,
            CumulantKind::Boolean,
            CumulantKind::Monotone,
        ] {
            assert_eq!(
                oracle_moments(|_| Rational::new(3, 7), kind, &a).unwrap(),
                Rational::new(3, 7)
            );
        }
        // Catalan numbers from a single pair cumulant
        let six = Word::parse("a.a.a.a.a.a").unwrap();
        assert_eq!(
            oracle_moments(univariate(&pairs), CumulantKind::Free, &six).unwrap(),
            Rational::from_integer(5)
        );
    }

    #[test]
    fn monotone_weights_have_small_denominators() {
        for n in 1..=8 {
            let total: Rational = enumerate(n, PartitionClass::NonCrossing)
                .unwrap()
                .iter()
                .map(|p| tree_factorial(p).unwrap().recip())
                .sum();
            let scaled = total * Rational::factorial(n as u32);
            assert!(scaled.is_integer(), "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn interval_partitions_are_noncrossing(n in 1usize..8) {
            for p in enumerate(n, PartitionClass::Interval).unwrap() {
                prop_assert!(p.is_noncrossing());
            }
        }
    }
}
