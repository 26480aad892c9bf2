//! Basis monomials of the double tensor algebra and formal sums over them.
//!
//! A [`Word`] is a monomial `a₁⋯aₙ` of the tensor algebra over the declared
//! letters. A [`BarWord`] is a monomial `w₁|⋯|wₘ` of the double tensor
//! algebra; it is stored flat (all letters in order plus a bitmask marking
//! where each component starts), which makes hashing cheap and keeps
//! splitting allocation-free for small degrees.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use parking_lot::RwLock;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest degree a [`BarWord`] can carry (one start bit per letter).
pub const MAX_BAR_DEGREE: usize = 64;

#[derive(Default)]
struct Interner {
    entries: Vec<(Arc<str>, u8)>,
    index: FxHashMap<(Arc<str>, u8), u32>,
}

static LETTERS: LazyLock<RwLock<Interner>> = LazyLock::new(Default::default);

/// A generator of the underlying algebra, identified by name and algebra tag.
///
/// Tag 0 is the single-algebra context; tags 1 and 2 distinguish the two
/// factors of a free product. Letters are interned, so copies are free and
/// equality is a machine-word comparison.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(u32);

impl Letter {
    pub fn new(name: &str, tag: u8) -> Result<Letter> {
        if name.is_empty() {
            return Err(Error::validation("letter names must be nonempty"));
        }
        if name.contains(['.', '|', ' ']) || name == "1" {
            return Err(Error::validation(format!("invalid letter name {name:?}")));
        }
        let key: (Arc<str>, u8) = (Arc::from(name), tag);
        if let Some(&id) = LETTERS.read().index.get(&key) {
            return Ok(Letter(id));
        }
        let mut interner = LETTERS.write();
        if let Some(&id) = interner.index.get(&key) {
            return Ok(Letter(id));
        }
        let id = interner.entries.len() as u32;
        interner.entries.push(key.clone());
        interner.index.insert(key, id);
        Ok(Letter(id))
    }

    /// Shorthand for an untagged letter; panics on an invalid name.
    pub fn named(name: &str) -> Letter {
        Letter::new(name, 0).expect("valid letter name")
    }

    pub fn name(&self) -> Arc<str> {
        LETTERS.read().entries[self.0 as usize].0.clone()
    }

    pub fn tag(&self) -> u8 {
        LETTERS.read().entries[self.0 as usize].1
    }

    /// The same name under a different algebra tag.
    pub fn with_tag(&self, tag: u8) -> Letter {
        Letter::new(&self.name(), tag).expect("name already validated")
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        let interner = LETTERS.read();
        let (a, b) = (
            &interner.entries[self.0 as usize],
            &interner.entries[other.0 as usize],
        );
        a.0.cmp(&b.0).then(a.1.cmp(&b.1))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag() {
            0 => write!(f, "{}", self.name()),
            t => write!(f, "{}#{}", self.name(), t),
        }
    }
}

pub(crate) type Letters = SmallVec<[Letter; 8]>;

/// A monomial `a₁⋯aₙ` of the tensor algebra; the empty word is its unit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Letters,
}

impl Word {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Word {
        Word {
            letters: letters.into_iter().collect(),
        }
    }

    pub fn empty() -> Word {
        Word::default()
    }

    /// Parses the dot-joined rendering (`"a.b.a"`); `"1"` and `""` give the empty word.
    pub fn parse(text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::empty());
        }
        text.split('.')
            .map(|name| Letter::new(name.trim(), 0))
            .collect::<Result<Letters>>()
            .map(|letters| Word { letters })
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.letters.iter().chain(other.letters.iter()).copied())
    }

    fn check_subset(&self, positions: &[usize]) -> Result<u64> {
        let n = self.degree();
        let mut mask = 0u64;
        for &p in positions {
            if p == 0 || p > n {
                return Err(Error::InvalidSubset {
                    position: p,
                    degree: n,
                });
            }
            mask |= 1 << (p - 1);
        }
        Ok(mask)
    }

    /// The letters at the given 1-based positions, in natural order.
    pub fn subword(&self, positions: &[usize]) -> Result<Word> {
        let mask = self.check_subset(positions)?;
        Ok(Word::new(
            self.letters
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &a)| a),
        ))
    }

    /// The maximal runs of consecutive positions outside `positions`, as a bar word.
    pub fn complement_components(&self, positions: &[usize]) -> Result<BarWord> {
        let mask = self.check_subset(positions)?;
        Ok(BarWord::from_word(self.clone()).complement_of(mask))
    }

    /// All words of exactly `degree` letters over `alphabet`, in lexicographic order of the alphabet.
    pub fn all_of_degree(alphabet: &[Letter], degree: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..degree {
            out = out
                .iter()
                .flat_map(|w| {
                    alphabet.iter().map(move |&a| {
                        let mut next = w.clone();
                        next.letters.push(a);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// All nonempty words of degree at most `max_degree`, ordered by degree.
    pub fn all_up_to(alphabet: &[Letter], max_degree: usize) -> Vec<Word> {
        (1..=max_degree)
            .flat_map(|d| Word::all_of_degree(alphabet, d))
            .collect()
    }
}

impl std::borrow::Borrow<[Letter]> for Word {
    fn borrow(&self) -> &[Letter] {
        &self.letters
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word::new(iter)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.as_slice().cmp(other.letters.as_slice())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[Letter]) -> fmt::Result {
    for (i, a) in letters.iter().enumerate() {
        if i > 0 {
            f.write_str(".")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        write_letters(f, &self.letters)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A monomial `w₁|⋯|wₘ` of the double tensor algebra with nonempty components.
///
/// Empty components are dropped on construction, which realizes the
/// identification of `w₁|1|w₂` with `w₁|w₂`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BarWord {
    letters: Letters,
    /// bit `i` set iff letter `i` begins a component
    starts: u64,
}

impl BarWord {
    pub fn unit() -> BarWord {
        BarWord::default()
    }

    pub fn from_word(w: Word) -> BarWord {
        assert!(
            w.degree() <= MAX_BAR_DEGREE,
            "bar word degree above {MAX_BAR_DEGREE}"
        );
        let starts = if w.is_empty() { 0 } else { 1 };
        BarWord {
            letters: w.letters,
            starts,
        }
    }

    pub(crate) fn from_slice(letters: &[Letter]) -> BarWord {
        BarWord {
            letters: letters.iter().copied().collect(),
            starts: if letters.is_empty() { 0 } else { 1 },
        }
    }

    pub fn from_parts(parts: impl IntoIterator<Item = Word>) -> BarWord {
        let mut out = BarWord::unit();
        for w in parts {
            out.push_part(w.letters());
        }
        out
    }

    /// Parses `"a.b|a"`; `"1"` gives the unit.
    pub fn parse(text: &str) -> Result<BarWord> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(BarWord::unit());
        }
        text.split('|')
            .map(Word::parse)
            .collect::<Result<Vec<_>>>()
            .map(BarWord::from_parts)
    }

    pub(crate) fn push_part(&mut self, part: &[Letter]) {
        if part.is_empty() {
            return;
        }
        let at = self.letters.len();
        assert!(
            at + part.len() <= MAX_BAR_DEGREE,
            "bar word degree above {MAX_BAR_DEGREE}"
        );
        self.starts |= 1 << at;
        self.letters.extend_from_slice(part);
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn is_unit(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of components.
    pub fn bar_len(&self) -> usize {
        self.starts.count_ones() as usize
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn parts(&self) -> Parts<'_> {
        Parts { bar: self, at: 0 }
    }

    pub fn words(&self) -> Vec<Word> {
        self.parts().map(|p| Word::new(p.iter().copied())).collect()
    }

    /// The single component, if there is exactly one.
    pub fn as_word(&self) -> Option<Word> {
        (self.bar_len() == 1).then(|| Word::new(self.letters.iter().copied()))
    }

    /// The bar product `self | other`.
    pub fn concat(&self, other: &BarWord) -> BarWord {
        let shift = self.degree();
        assert!(
            shift + other.degree() <= MAX_BAR_DEGREE,
            "bar word degree above {MAX_BAR_DEGREE}"
        );
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BarWord {
            letters,
            starts: self.starts | (other.starts << shift),
        }
    }

    /// Letters at the positions of `mask` (bit `i` = letter `i`), split by component.
    pub(crate) fn restrict_to(&self, mask: u64) -> BarWord {
        let mut letters = Letters::new();
        let mut starts = 0u64;
        let mut open = false;
        for (i, &a) in self.letters.iter().enumerate() {
            if self.starts >> i & 1 == 1 {
                open = false;
            }
            if mask >> i & 1 == 1 {
                if !open {
                    starts |= 1 << letters.len();
                    open = true;
                }
                letters.push(a);
            }
        }
        BarWord { letters, starts }
    }

    /// The maximal runs of positions outside `mask` within each component.
    pub(crate) fn complement_of(&self, mask: u64) -> BarWord {
        let mut letters = Letters::new();
        let mut starts = 0u64;
        for (i, &a) in self.letters.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let begins_run = self.starts >> i & 1 == 1 || (i > 0 && mask >> (i - 1) & 1 == 1);
            if begins_run {
                starts |= 1 << letters.len();
            }
            letters.push(a);
        }
        BarWord { letters, starts }
    }

    /// Bit mask of the positions in the first component.
    pub(crate) fn first_part_mask(&self) -> u64 {
        if self.letters.is_empty() {
            return 0;
        }
        let rest = self.starts & !1;
        let len = if rest == 0 {
            self.degree()
        } else {
            rest.trailing_zeros() as usize
        };
        low_bits(len)
    }

    /// Every bar word of degree `1..=max_degree` over `alphabet`, ordered by degree.
    pub fn all_up_to(alphabet: &[Letter], max_degree: usize) -> Vec<BarWord> {
        let mut out = Vec::new();
        for d in 1..=max_degree {
            let words = Word::all_of_degree(alphabet, d);
            // compositions of d: start masks with bit 0 set
            for cuts in 0..(1u64 << (d - 1)) {
                let starts = 1 | (cuts << 1);
                out.extend(words.iter().map(|w| BarWord {
                    letters: w.letters.clone(),
                    starts,
                }));
            }
        }
        out
    }
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub struct Parts<'a> {
    bar: &'a BarWord,
    at: usize,
}

impl<'a> Iterator for Parts<'a> {
    type Item = &'a [Letter];

    fn next(&mut self) -> Option<&'a [Letter]> {
        let n = self.bar.degree();
        if self.at >= n {
            return None;
        }
        let rest = if self.at + 1 >= 64 {
            0
        } else {
            self.bar.starts >> (self.at + 1)
        };
        let end = if rest == 0 {
            n
        } else {
            self.at + 1 + rest.trailing_zeros() as usize
        };
        let part = &self.bar.letters[self.at..end.min(n)];
        self.at = end;
        Some(part)
    }
}

impl From<Word> for BarWord {
    fn from(w: Word) -> Self {
        BarWord::from_word(w)
    }
}

impl Ord for BarWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .as_slice()
            .cmp(other.letters.as_slice())
            .then_with(|| self.starts.reverse_bits().cmp(&other.starts.reverse_bits()))
    }
}

impl PartialOrd for BarWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return f.write_str("1");
        }
        for (i, part) in self.parts().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write_letters(f, part)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BarWord({self})")
    }
}

/// A finite linear combination of `BarWord ⊗ BarWord` with rational coefficients.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct TensorSum {
    terms: BTreeMap<(BarWord, BarWord), Rational>,
}

impl TensorSum {
    pub fn new() -> TensorSum {
        TensorSum::default()
    }

    pub fn unit() -> TensorSum {
        let mut t = TensorSum::new();
        t.add_term(BarWord::unit(), BarWord::unit(), Rational::one());
        t
    }

    pub fn add_term(&mut self, left: BarWord, right: BarWord, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let key = (left, right);
        let updated = match self.terms.get(&key) {
            Some(c) => c + &coeff,
            None => coeff,
        };
        if updated.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, updated);
        }
    }

    pub fn coeff(&self, left: &BarWord, right: &BarWord) -> Rational {
        self.terms
            .get(&(left.clone(), right.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BarWord, &BarWord, &Rational)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }

    pub fn add(&self, other: &TensorSum) -> TensorSum {
        let mut out = self.clone();
        for (l, r, c) in other.iter() {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> TensorSum {
        let mut out = TensorSum::new();
        for (l, r, c) in self.iter() {
            out.add_term(l.clone(), r.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &TensorSum) -> TensorSum {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Componentwise bar product: `(a⊗b)·(a′⊗b′) = (a|a′) ⊗ (b|b′)`.
    pub fn mul(&self, other: &TensorSum) -> TensorSum {
        let mut out = TensorSum::new();
        for (l1, r1, c1) in self.iter() {
            for (l2, r2, c2) in other.iter() {
                out.add_term(l1.concat(l2), r1.concat(r2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for TensorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (l, r, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if !c.is_one() {
                write!(f, "({c})·")?;
            }
            write!(f, "{l} ⊗ {r}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorSum({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn b(s: &str) -> BarWord {
        BarWord::parse(s).unwrap()
    }

    #[test]
    fn subword_examples() {
        assert_eq!(w("a1.a2.a3").subword(&[1, 3]).unwrap(), w("a1.a3"));
        assert_eq!(w("a1.a2").subword(&[]).unwrap(), Word::empty());
        assert_eq!(w("a1.a2.a3.a4").subword(&[2, 3, 4]).unwrap(), w("a2.a3.a4"));
        assert_eq!(
            w("a1.a2").subword(&[3]),
            Err(Error::InvalidSubset {
                position: 3,
                degree: 2
            })
        );
        assert!(w("a1").subword(&[0]).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(
            w("a1.a2.a3").complement_components(&[2]).unwrap(),
            b("a1|a3")
        );
        assert_eq!(
            w("a1.a2.a3.a4").complement_components(&[1, 4]).unwrap(),
            b("a2.a3")
        );
        assert_eq!(
            w("a1.a2").complement_components(&[1, 2]).unwrap(),
            BarWord::unit()
        );
        assert_eq!(w("a.b.c").complement_components(&[]).unwrap(), b("a.b.c"));
    }

    #[test]
    fn empty_components_are_dropped() {
        let bar = BarWord::from_parts([w("a"), Word::empty(), w("b.c")]);
        assert_eq!(bar, b("a|b.c"));
        assert_eq!(bar.bar_len(), 2);
        assert_eq!(bar.degree(), 3);
        assert_eq!(Word::empty().to_string(), "1");
        assert_eq!(BarWord::unit().to_string(), "1");
        assert_ne!(BarWord::from_word(w("a.b")), b("a|b"));
    }

    #[test]
    fn parts_iterate_components() {
        let bar = b("a.b|c|d.e.f");
        let parts: Vec<String> = bar.words().iter().map(|w| w.to_string()).collect();
        assert_eq!(parts, ["a.b", "c", "d.e.f"]);
        assert_eq!(bar.first_part_mask(), 0b11);
        assert_eq!(bar.to_string(), "a.b|c|d.e.f");
    }

    #[test]
    fn bar_word_counts() {
        let ab = [Letter::named("a"), Letter::named("b")];
        // 2^d words times 2^(d-1) compositions
        assert_eq!(BarWord::all_up_to(&ab, 3).len(), 2 + 8 + 32);
        assert_eq!(Word::all_up_to(&ab, 3).len(), 2 + 4 + 8);
    }

    #[test]
    fn letters_compare_by_name_then_tag() {
        let x1 = Letter::new("x", 1).unwrap();
        let x2 = Letter::new("x", 2).unwrap();
        assert_ne!(x1, x2);
        assert!(x1 < x2);
        assert!(Letter::named("a") < Letter::named("b"));
        assert!(Letter::new("", 0).is_err());
        assert!(Letter::new("a.b", 0).is_err());
    }

    #[test]
    fn tensor_sum_drops_zeros() {
        let mut t = TensorSum::new();
        t.add_term(b("a"), b("b"), Rational::one());
        t.add_term(b("a"), b("b"), -Rational::one());
        assert!(t.is_zero());
    }

    fn arb_bar() -> impl Strategy<Value = BarWord> {
        proptest::collection::vec(proptest::collection::vec(0..2usize, 0..3), 0..3).prop_map(
            |parts| {
                let ab = [Letter::named("a"), Letter::named("b")];
                BarWord::from_parts(
                    parts
                        .into_iter()
                        .map(|p| Word::new(p.into_iter().map(|i| ab[i]))),
                )
            },
        )
    }

    fn arb_sum() -> impl Strategy<Value = TensorSum> {
        proptest::collection::vec((arb_bar(), arb_bar(), -3i64..4), 0..4).prop_map(|terms| {
            let mut t = TensorSum::new();
            for (l, r, c) in terms {
                t.add_term(l, r, Rational::from_integer(c));
            }
            t
        })
    }

    proptest! {
        #[test]
        fn subword_and_complement_split_degree(
            letters in proptest::collection::vec(0..2usize, 0..7),
            mask in 0u64..128,
        ) {
            let ab = [Letter::named("a"), Letter::named("b")];
            let word = Word::new(letters.iter().map(|&i| ab[i]));
            let positions: Vec<usize> =
                (1..=word.degree()).filter(|p| mask >> (p - 1) & 1 == 1).collect();
            let sub = word.subword(&positions).unwrap();
            let rest = word.complement_components(&positions).unwrap();
            prop_assert_eq!(sub.degree() + rest.degree(), word.degree());
        }

        #[test]
        fn tensor_product_is_associative_and_bilinear(x in arb_sum(), y in arb_sum(), z in arb_sum()) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.add(&y).mul(&z), x.mul(&z).add(&y.mul(&z)));
            let two = Rational::from_integer(2);
            prop_assert_eq!(x.scale(&two).mul(&y), x.mul(&y).scale(&two));
        }

        #[test]
        fn parse_round_trip(bar in arb_bar()) {
            prop_assert_eq!(BarWord::parse(&bar.to_string()).unwrap(), bar);
        }
    }
}
