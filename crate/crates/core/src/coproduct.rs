//! The unshuffle coproduct on `T(T(A))`, its two halves, and an axiom checker.
//!
//! Two independent routes compute the same splittings:
//! - the definitional one ([`unshuffle`], [`half_unshuffle`], [`unshuffle_bar`])
//!   builds subwords and complement runs per component and multiplies the
//!   per-component sums as [`TensorSum`]s;
//! - [`Splits`] enumerates bit masks over the flat letter positions of a bar
//!   word and is what the functional evaluator uses.
//!
//! The checker compares both and verifies the coalgebra and bialgebra
//! identities on every bar word up to a degree.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::algebra::{BarWord, Letter, TensorSum, Word};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::report::{Check, SuiteReport};

/// Which part of the coproduct to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfSide {
    /// subsets containing the first letter
    Left,
    /// subsets avoiding the first letter
    Right,
    Full,
}

/// Deliberate faults used to show the suites catch real mistakes.
///
/// A defect is attached to a functional and inherited by everything built
/// from it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Defects {
    /// drop the `S = {1}` term from the left half-coproduct
    pub drop_left_singleton: bool,
    /// omit the `m = 2` Bernoulli term from the Magnus expansion
    pub skip_second_bernoulli: bool,
    /// use `ℰ≺(−γ₁)` in the closed form of the left adjoint action
    pub flip_adjoint_sign: bool,
}

impl Defects {
    pub const NONE: Defects = Defects {
        drop_left_singleton: false,
        skip_second_bernoulli: false,
        flip_adjoint_sign: false,
    };

    pub fn any(&self) -> bool {
        *self != Defects::NONE
    }

    pub fn union(self, other: Defects) -> Defects {
        Defects {
            drop_left_singleton: self.drop_left_singleton || other.drop_left_singleton,
            skip_second_bernoulli: self.skip_second_bernoulli || other.skip_second_bernoulli,
            flip_adjoint_sign: self.flip_adjoint_sign || other.flip_adjoint_sign,
        }
    }
}

/// Mask-based enumeration of the terms `l ⊗ r` of `Δ`, `Δ≺⁺` or `Δ≻⁺` on a bar word.
pub struct Splits<'a> {
    bar: &'a BarWord,
    side: HalfSide,
    first_part: u64,
    drop_singleton: bool,
    next: u64,
    end: u64,
}

impl<'a> Splits<'a> {
    pub fn new(bar: &'a BarWord, side: HalfSide, defects: Defects) -> Splits<'a> {
        let d = bar.degree();
        assert!(d < 64, "degree too large to enumerate");
        let end = match (side, d) {
            (HalfSide::Full, _) => 1u64 << d,
            (_, 0) => 0,
            _ => 1u64 << (d - 1),
        };
        Splits {
            bar,
            side,
            first_part: bar.first_part_mask(),
            drop_singleton: defects.drop_left_singleton && side != HalfSide::Right,
            next: 0,
            end,
        }
    }

    fn mask(&self, i: u64) -> u64 {
        match self.side {
            HalfSide::Full => i,
            HalfSide::Left => 1 | (i << 1),
            HalfSide::Right => i << 1,
        }
    }
}

impl Iterator for Splits<'_> {
    type Item = (BarWord, BarWord);

    fn next(&mut self) -> Option<(BarWord, BarWord)> {
        while self.next < self.end {
            let mask = self.mask(self.next);
            self.next += 1;
            if self.drop_singleton && mask & self.first_part == 1 {
                continue;
            }
            return Some((self.bar.restrict_to(mask), self.bar.complement_of(mask)));
        }
        None
    }
}

fn positions(mask: u64, n: usize) -> Vec<usize> {
    (1..=n).filter(|p| mask >> (p - 1) & 1 == 1).collect()
}

fn word_sum(w: &Word, keep: impl Fn(u64) -> bool) -> TensorSum {
    let n = w.degree();
    let mut out = TensorSum::new();
    for mask in 0..(1u64 << n) {
        if !keep(mask) {
            continue;
        }
        let s = positions(mask, n);
        let left = BarWord::from_word(w.subword(&s).expect("positions in range"));
        let right = w.complement_components(&s).expect("positions in range");
        out.add_term(left, right, Rational::one());
    }
    out
}

/// `Δ(w) = Σ_{S⊆[n]} a_S ⊗ a_{J¹}|⋯|a_{Jᵏ}`.
pub fn unshuffle(w: &Word) -> TensorSum {
    word_sum(w, |_| true)
}

/// The left (`1 ∈ S`) or right (`1 ∉ S`, `S ≠ [n]`) part of `Δ(w)`.
///
/// With `reduced` the primitive term `w ⊗ 1` (left) or `1 ⊗ w` (right) is
/// subtracted; this requires a nonempty word.
pub fn half_unshuffle(w: &Word, side: HalfSide, reduced: bool) -> Result<TensorSum> {
    if reduced && w.is_empty() {
        return Err(Error::domain("reduced half-coproduct of the empty word"));
    }
    let full_mask = crate::algebra::low_bits(w.degree());
    let whole = BarWord::from_word(w.clone());
    let sum = match side {
        HalfSide::Full => {
            let mut sum = unshuffle(w);
            if reduced {
                sum.add_term(whole.clone(), BarWord::unit(), -Rational::one());
                sum.add_term(BarWord::unit(), whole, -Rational::one());
            }
            return Ok(sum);
        }
        HalfSide::Left => word_sum(w, |m| m & 1 == 1),
        HalfSide::Right => word_sum(w, |m| m & 1 == 0 && m != full_mask),
    };
    let mut sum = sum;
    if reduced {
        match side {
            HalfSide::Left => sum.add_term(whole, BarWord::unit(), -Rational::one()),
            _ => sum.add_term(BarWord::unit(), whole, -Rational::one()),
        }
    }
    Ok(sum)
}

/// Multiplicative extension to bar words: the full coproduct on every
/// component, or a half coproduct on the first component followed by full
/// ones on the rest.
pub fn unshuffle_bar(b: &BarWord, side: HalfSide) -> Result<TensorSum> {
    let words = b.words();
    let mut parts = words.iter();
    let mut out = match side {
        HalfSide::Full => TensorSum::unit(),
        _ => {
            let first = parts
                .next()
                .ok_or_else(|| Error::domain("half coproduct of the empty bar word"))?;
            half_unshuffle(first, side, false)?
        }
    };
    for w in parts {
        out = out.mul(&unshuffle(w));
    }
    Ok(out)
}

type T2 = FxHashMap<(BarWord, BarWord), i64>;
type T3 = FxHashMap<(BarWord, BarWord, BarWord), i64>;

#[derive(Clone, Copy)]
enum Map {
    Full,
    LeftPlus,
    RightPlus,
    /// `Δ̄ = Δ − b⊗1 − 1⊗b`
    Reduced,
    Left,
    Right,
}

fn apply(map: Map, b: &BarWord, defects: Defects) -> T2 {
    let mut out = T2::default();
    let side = match map {
        Map::Full | Map::Reduced => HalfSide::Full,
        Map::LeftPlus | Map::Left => HalfSide::Left,
        Map::RightPlus | Map::Right => HalfSide::Right,
    };
    let reduced = matches!(map, Map::Reduced | Map::Left | Map::Right);
    if reduced && b.is_unit() {
        return out;
    }
    for (l, r) in Splits::new(b, side, defects) {
        *out.entry((l, r)).or_insert(0) += 1;
    }
    if matches!(map, Map::Reduced | Map::Left) {
        *out.entry((b.clone(), BarWord::unit())).or_insert(0) -= 1;
    }
    if matches!(map, Map::Reduced | Map::Right) {
        *out.entry((BarWord::unit(), b.clone())).or_insert(0) -= 1;
    }
    out.retain(|_, c| *c != 0);
    out
}

/// `(outer ⊗ id) ∘ inner`
fn on_left(outer: Map, inner: &T2, defects: Defects) -> T3 {
    let mut out = T3::default();
    for ((l, r), c) in inner {
        for ((ll, lr), c2) in apply(outer, l, defects) {
            *out.entry((ll, lr, r.clone())).or_insert(0) += c * c2;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// `(id ⊗ outer) ∘ inner`
fn on_right(outer: Map, inner: &T2, defects: Defects) -> T3 {
    let mut out = T3::default();
    for ((l, r), c) in inner {
        for ((rl, rr), c2) in apply(outer, r, defects) {
            *out.entry((l.clone(), rl, rr)).or_insert(0) += c * c2;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn product(x: &T2, y: &T2) -> T2 {
    let mut out = T2::default();
    for ((l1, r1), c1) in x {
        for ((l2, r2), c2) in y {
            *out.entry((l1.concat(l2), r1.concat(r2))).or_insert(0) += c1 * c2;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn as_t2(sum: &TensorSum) -> T2 {
    sum.iter()
        .map(|(l, r, c)| {
            let c = c.numer().try_into().expect("integer coefficient");
            ((l.clone(), r.clone()), c)
        })
        .collect()
}

/// Splits a bar word at each component boundary into `(a, b)` with `a|b` equal to it.
fn factorizations(b: &BarWord) -> Vec<(BarWord, BarWord)> {
    let words = b.words();
    (1..words.len())
        .map(|k| {
            (
                BarWord::from_parts(words[..k].iter().cloned()),
                BarWord::from_parts(words[k..].iter().cloned()),
            )
        })
        .collect()
}

/// Verifies the coalgebra and bialgebra identities on every bar word of
/// degree `1..=max_degree` over `letters`.
pub fn check_axioms(letters: &[Letter], max_degree: usize) -> Result<SuiteReport> {
    check_axioms_with(letters, max_degree, Defects::NONE)
}

pub fn check_axioms_with(
    letters: &[Letter],
    max_degree: usize,
    defects: Defects,
) -> Result<SuiteReport> {
    if max_degree == 0 {
        return Err(Error::validation("max_degree must be at least 1"));
    }
    if letters.is_empty() {
        return Err(Error::validation("at least one letter is required"));
    }
    let bars = BarWord::all_up_to(letters, max_degree);
    let mut checks = Vec::new();

    checks.push(Check::over(
        "definition",
        "mask splits = Σ_S a_S ⊗ a_{J^S}",
        &bars,
        |b| {
            [HalfSide::Full, HalfSide::Left, HalfSide::Right]
                .into_iter()
                .all(|side| {
                    let fast = apply(
                        match side {
                            HalfSide::Full => Map::Full,
                            HalfSide::Left => Map::LeftPlus,
                            HalfSide::Right => Map::RightPlus,
                        },
                        b,
                        defects,
                    );
                    fast == as_t2(&unshuffle_bar(b, side).expect("nonempty"))
                })
        },
    ));

    checks.push(Check::over(
        "splitting",
        "Δ = Δ≺⁺ + Δ≻⁺",
        &bars,
        |b| {
            let mut sum = apply(Map::LeftPlus, b, defects);
            for (k, c) in apply(Map::RightPlus, b, defects) {
                *sum.entry(k).or_insert(0) += c;
            }
            sum.retain(|_, c| *c != 0);
            sum == apply(Map::Full, b, defects)
        },
    ));

    checks.push(Check::over(
        "counit",
        "(ε⊗id)Δ = id = (id⊗ε)Δ",
        &bars,
        |b| {
            let full = apply(Map::Full, b, defects);
            let mut left = T2::default();
            let mut right = T2::default();
            for ((l, r), c) in &full {
                if l.is_unit() {
                    *left.entry((BarWord::unit(), r.clone())).or_insert(0) += c;
                }
                if r.is_unit() {
                    *right.entry((l.clone(), BarWord::unit())).or_insert(0) += c;
                }
            }
            let expect_left: T2 = [((BarWord::unit(), b.clone()), 1)].into_iter().collect();
            let expect_right: T2 = [((b.clone(), BarWord::unit()), 1)].into_iter().collect();
            left == expect_left && right == expect_right
        },
    ));

    checks.push(Check::over(
        "coassociativity",
        "(Δ⊗id)Δ = (id⊗Δ)Δ",
        &bars,
        |b| {
            let full = apply(Map::Full, b, defects);
            on_left(Map::Full, &full, defects) == on_right(Map::Full, &full, defects)
        },
    ));

    checks.push(Check::over(
        "left coassociativity",
        "(Δ≺⊗id)Δ≺ = (id⊗Δ̄)Δ≺",
        &bars,
        |b| {
            let left = apply(Map::Left, b, defects);
            on_left(Map::Left, &left, defects) == on_right(Map::Reduced, &left, defects)
        },
    ));

    checks.push(Check::over(
        "mixed coassociativity",
        "(Δ≻⊗id)Δ≺ = (id⊗Δ≺)Δ≻",
        &bars,
        |b| {
            let left = apply(Map::Left, b, defects);
            let right = apply(Map::Right, b, defects);
            on_left(Map::Right, &left, defects) == on_right(Map::Left, &right, defects)
        },
    ));

    checks.push(Check::over(
        "right coassociativity",
        "(Δ̄⊗id)Δ≻ = (id⊗Δ≻)Δ≻",
        &bars,
        |b| {
            let right = apply(Map::Right, b, defects);
            on_left(Map::Reduced, &right, defects) == on_right(Map::Right, &right, defects)
        },
    ));

    for (name, formula, map) in [
        (
            "left bar compatibility",
            "Δ≺⁺(a|b) = Δ≺⁺(a)·Δ(b)",
            Map::LeftPlus,
        ),
        (
            "right bar compatibility",
            "Δ≻⁺(a|b) = Δ≻⁺(a)·Δ(b)",
            Map::RightPlus,
        ),
    ] {
        checks.push(Check::over(name, formula, &bars, |c| {
            let whole = apply(map, c, defects);
            factorizations(c).iter().all(|(a, b)| {
                whole == product(&apply(map, a, defects), &apply(Map::Full, b, defects))
            })
        }));
    }

    Ok(SuiteReport::new("coalgebra", checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn b(s: &str) -> BarWord {
        BarWord::parse(s).unwrap()
    }

    fn sum(terms: &[(&str, &str, i64)]) -> TensorSum {
        let mut t = TensorSum::new();
        for (l, r, c) in terms {
            t.add_term(b(l), b(r), Rational::from_integer(*c));
        }
        t
    }

    #[test]
    fn unshuffle_small_words() {
        assert_eq!(unshuffle(&Word::empty()), TensorSum::unit());
        assert_eq!(unshuffle(&w("a1")), sum(&[("a1", "1", 1), ("1", "a1", 1)]));
        assert_eq!(
            unshuffle(&w("a1.a2")),
            sum(&[
                ("a1.a2", "1", 1),
                ("1", "a1.a2", 1),
                ("a1", "a2", 1),
                ("a2", "a1", 1)
            ])
        );
        let t = unshuffle(&w("a1.a2.a3"));
        assert_eq!(t.coeff(&b("a2"), &b("a1|a3")), Rational::one());
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn repeated_letters_accumulate() {
        // the two single-letter subsets of a.a give the same term
        assert_eq!(
            unshuffle(&w("a.a")),
            sum(&[("a.a", "1", 1), ("1", "a.a", 1), ("a", "a", 2)])
        );
    }

    #[test]
    fn half_unshuffles() {
        assert_eq!(
            half_unshuffle(&w("a1.a2"), HalfSide::Left, false).unwrap(),
            sum(&[("a1.a2", "1", 1), ("a1", "a2", 1)])
        );
        assert_eq!(
            half_unshuffle(&w("a1.a2"), HalfSide::Right, false).unwrap(),
            sum(&[("1", "a1.a2", 1), ("a2", "a1", 1)])
        );
        assert!(half_unshuffle(&w("a1"), HalfSide::Left, true)
            .unwrap()
            .is_zero());
        assert!(half_unshuffle(&w("a1"), HalfSide::Right, true)
            .unwrap()
            .is_zero());
        assert!(matches!(
            half_unshuffle(&Word::empty(), HalfSide::Left, true),
            Err(Error::Domain(_))
        ));
        assert_eq!(
            half_unshuffle(&w("a.b"), HalfSide::Full, false).unwrap(),
            unshuffle(&w("a.b"))
        );
    }

    #[test]
    fn bar_extension() {
        let full = unshuffle_bar(&b("a1|a2"), HalfSide::Full).unwrap();
        assert_eq!(full.coeff(&b("a1|a2"), &BarWord::unit()), Rational::one());
        let left = unshuffle_bar(&b("a1|a2"), HalfSide::Left).unwrap();
        assert!(left.iter().all(|(l, _, _)| !l.is_unit()));
        assert_eq!(
            unshuffle_bar(&b("a1"), HalfSide::Full).unwrap(),
            unshuffle(&w("a1"))
        );
        assert!(unshuffle_bar(&BarWord::unit(), HalfSide::Right).is_err());
    }

    #[test]
    fn splits_match_definition() {
        for bar in ["a.b.c", "a|b.c", "a.b|a|c.a", "a"] {
            let bar = b(bar);
            for side in [HalfSide::Full, HalfSide::Left, HalfSide::Right] {
                let mut fast = TensorSum::new();
                for (l, r) in Splits::new(&bar, side, Defects::NONE) {
                    fast.add_term(l, r, Rational::one());
                }
                assert_eq!(fast, unshuffle_bar(&bar, side).unwrap(), "{bar} {side:?}");
            }
        }
    }

    #[test]
    fn axioms_hold_one_letter() {
        let report = check_axioms(&[Letter::named("a")], 4).unwrap();
        assert!(
            report.passed(),
            "{:?}",
            report.failures().collect::<Vec<_>>()
        );
        assert_eq!(report.checks.len(), 9);
    }

    #[test]
    fn axioms_hold_two_letters() {
        let report = check_axioms(&[Letter::named("a1"), Letter::named("a2")], 4).unwrap();
        assert!(
            report.passed(),
            "{:?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn corrupted_left_half_breaks_c2_at_degree_two() {
        let defects = Defects {
            drop_left_singleton: true,
            ..Defects::NONE
        };
        let report =
            check_axioms_with(&[Letter::named("a1"), Letter::named("a2")], 2, defects).unwrap();
        let c2 = report.get("mixed coassociativity").unwrap();
        assert!(!c2.passed());
        assert_eq!(c2.witness.as_deref(), Some("a1.a1"));
        assert_eq!(c2.witness_degree, Some(2));
    }

    #[test]
    fn zero_degree_rejected() {
        assert!(matches!(
            check_axioms(&[Letter::named("a")], 0),
            Err(Error::Validation(_))
        ));
    }
}
