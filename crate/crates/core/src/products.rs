//! Universal products, additive convolutions, subordination and the
//! Bercovici–Pata bijection.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::algebra::{Letter, Word};
use crate::coproduct::HalfSide;
use crate::cumulants::Distribution;
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::rational::Rational;

/// `Φ₁ ⊞≺ Φ₂ = ℰ≺(log≺Φ₁ + log≺Φ₂)`
pub fn free_conv(first: &Functional, second: &Functional) -> Result<Functional> {
    first.require_character("free convolution")?;
    second.require_character("free convolution")?;
    first.log_left()?.add(&second.log_left()?).exp_left()
}

/// `Φ₁ ⊞≻ Φ₂ = ℰ≻(log≻Φ₁ + log≻Φ₂)`
pub fn boolean_conv(first: &Functional, second: &Functional) -> Result<Functional> {
    first.require_character("boolean convolution")?;
    second.require_character("boolean convolution")?;
    first.log_right()?.add(&second.log_right()?).exp_right()
}

/// `(ℰ≺(γ₁), ℰ≺(γ₂^{γ₁}))`, whose convolution product is `ℰ≺(γ₁+γ₂)`.
pub fn factorize(first: &Functional, second: &Functional) -> Result<(Functional, Functional)> {
    let twisted = Functional::ad_left(first, second)?;
    Ok((first.exp_left()?, twisted.exp_left()?))
}

/// `(ℰ≻(γ₁^{−γ₂}), ℰ≻(γ₂))`, whose convolution product is `ℰ≻(γ₁+γ₂)`.
pub fn factorize_right(
    first: &Functional,
    second: &Functional,
) -> Result<(Functional, Functional)> {
    let twisted = Functional::ad_right(second, first)?;
    Ok((twisted.exp_right()?, second.exp_right()?))
}

/// Subordination products of characters.
///
/// Left: `first ⊳ second = ℰ≺(γ_first^{γ_second})` with `γ = log≺`.
/// Right: `first ⊲ second = ℰ≻(γ_second^{−γ_first})` with `γ = log≻`.
pub fn subordinate(first: &Functional, second: &Functional, side: HalfSide) -> Result<Functional> {
    first.require_character("subordination")?;
    second.require_character("subordination")?;
    match side {
        HalfSide::Left => Functional::ad_left(&second.log_left()?, &first.log_left()?)?.exp_left(),
        HalfSide::Right => {
            Functional::ad_right(&first.log_right()?, &second.log_right()?)?.exp_right()
        }
        HalfSide::Full => Err(Error::domain("subordination needs a left or right side")),
    }
}

/// `B(Φ) = ℰ≺(log≻Φ)`
pub fn bp(phi: &Functional) -> Result<Functional> {
    phi.require_character("Bercovici–Pata bijection")?;
    phi.log_right()?.exp_left()
}

/// `B⁻¹(Φ) = ℰ≻(log≺Φ)`
pub fn bp_inverse(phi: &Functional) -> Result<Functional> {
    phi.require_character("inverse Bercovici–Pata bijection")?;
    phi.log_left()?.exp_right()
}

fn check_time(t: &Rational) -> Result<()> {
    if t.is_negative() {
        return Err(Error::domain(format!(
            "semigroup parameter must be nonnegative, got {t}"
        )));
    }
    Ok(())
}

/// `B_t(Φ) = ℰ≺(κ^{tκ})` with `κ = log≺Φ`; `B_0 = id`, `B_1 = B`.
pub fn bp_t(phi: &Functional, t: &Rational) -> Result<Functional> {
    check_time(t)?;
    phi.require_character("Bercovici–Pata semigroup")?;
    if t.is_zero() {
        return Ok(phi.clone());
    }
    let kappa = phi.log_left()?;
    Functional::ad_left(&kappa.scale(t), &kappa)?.exp_left()
}

/// `B_t(Φ) = (Φ^{⊞≺(1+t)})^{⊞≻ 1/(1+t)}`, through half-shuffle powers.
pub fn bp_t_powers(phi: &Functional, t: &Rational) -> Result<Functional> {
    check_time(t)?;
    phi.require_character("Bercovici–Pata semigroup")?;
    let s = Rational::one() + t;
    phi.hs_power(&s, HalfSide::Left)?
        .hs_power(&s.recip(), HalfSide::Right)
}

/// `B_t(Φ) = ℰ≺(t·log≻Φ)^{⊞≻ 1/t}` for `t > 0`.
pub fn bp_t_boolean(phi: &Functional, t: &Rational) -> Result<Functional> {
    check_time(t)?;
    phi.require_character("Bercovici–Pata semigroup")?;
    if t.is_zero() {
        return Ok(phi.clone());
    }
    phi.log_right()?
        .scale(t)
        .exp_left()?
        .hs_power(&t.recip(), HalfSide::Right)
}

/// The four universal ways to combine two characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvolutionKind {
    /// `⊞≺`
    Free,
    /// `⊞≻`
    Boolean,
    /// `Φ₁ * Φ₂`
    MonotoneLeft,
    /// `Φ₂ * Φ₁`
    MonotoneRight,
}

impl ConvolutionKind {
    pub fn apply(&self, first: &Functional, second: &Functional) -> Result<Functional> {
        match self {
            ConvolutionKind::Free => free_conv(first, second),
            ConvolutionKind::Boolean => boolean_conv(first, second),
            ConvolutionKind::MonotoneLeft | ConvolutionKind::MonotoneRight => {
                first.require_character("monotone convolution")?;
                second.require_character("monotone convolution")?;
                Ok(if *self == ConvolutionKind::MonotoneLeft {
                    first.conv(second)
                } else {
                    second.conv(first)
                })
            }
        }
    }
}

impl fmt::Display for ConvolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvolutionKind::Free => "free",
            ConvolutionKind::Boolean => "boolean",
            ConvolutionKind::MonotoneLeft => "monotone-left",
            ConvolutionKind::MonotoneRight => "monotone-right",
        })
    }
}

impl FromStr for ConvolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(ConvolutionKind::Free),
            "boolean" => Ok(ConvolutionKind::Boolean),
            "monotone-left" | "monotone" => Ok(ConvolutionKind::MonotoneLeft),
            "monotone-right" | "antimonotone" => Ok(ConvolutionKind::MonotoneRight),
            _ => Err(Error::validation(format!("unknown convolution kind {s:?}"))),
        }
    }
}

/// Letters of both distributions (first's order, then new ones) and their common degree.
fn joint_frame(first: &Distribution, second: &Distribution) -> Result<(Vec<Letter>, usize)> {
    if first.max_degree() != second.max_degree() {
        return Err(Error::validation(format!(
            "max_degree differs: {} and {}",
            first.max_degree(),
            second.max_degree()
        )));
    }
    let mut letters = first.letters().to_vec();
    for a in second.letters() {
        if !letters.contains(a) {
            letters.push(*a);
        }
    }
    Ok((letters, first.max_degree()))
}

/// Convolution of two distributions, each extended by zero to the joint alphabet.
pub fn convolve(
    first: &Distribution,
    second: &Distribution,
    kind: ConvolutionKind,
) -> Result<Distribution> {
    let (letters, n) = joint_frame(first, second)?;
    let out = kind.apply(&first.character(), &second.character())?;
    Distribution::from_character(&out, letters, n)
}

/// Subordination product of two distributions on the joint alphabet.
pub fn subordinate_distributions(
    first: &Distribution,
    second: &Distribution,
    side: HalfSide,
) -> Result<Distribution> {
    let (letters, n) = joint_frame(first, second)?;
    let out = subordinate(&first.character(), &second.character(), side)?;
    Distribution::from_character(&out, letters, n)
}

/// `B_t` applied to a distribution.
pub fn bp_distribution(d: &Distribution, t: &Rational) -> Result<Distribution> {
    let out = bp_t(&d.character(), t)?;
    Distribution::from_character(&out, d.letters().to_vec(), d.max_degree())
}

/// Two distributions on disjoint alphabets, tagged as algebras 1 and 2 of a
/// free product.
pub struct LabeledContext {
    first: Distribution,
    second: Distribution,
    characters: OnceLock<Characters>,
}

struct Characters {
    first: Functional,
    second: Functional,
    free: Functional,
    boolean: Functional,
    monotone: Functional,
    antimonotone: Functional,
}

fn retag(d: &Distribution, tag: u8) -> Result<Distribution> {
    let letters = d.letters().iter().map(|a| a.with_tag(tag)).collect();
    let moments = d.moments().iter().map(|(w, v)| {
        (
            Word::new(w.letters().iter().map(|a| a.with_tag(tag))),
            v.clone(),
        )
    });
    Distribution::new(letters, d.max_degree(), moments.collect::<Vec<_>>())
}

impl LabeledContext {
    pub fn new(first: &Distribution, second: &Distribution) -> Result<LabeledContext> {
        if first.max_degree() != second.max_degree() {
            return Err(Error::validation("both algebras need the same max_degree"));
        }
        for a in first.letters() {
            if second.letters().iter().any(|b| b.name() == a.name()) {
                return Err(Error::validation(format!(
                    "letter {a} belongs to both algebras"
                )));
            }
        }
        Ok(LabeledContext {
            first: retag(first, 1)?,
            second: retag(second, 2)?,
            characters: OnceLock::new(),
        })
    }

    pub fn max_degree(&self) -> usize {
        self.first.max_degree()
    }

    /// The tagged letters of both algebras.
    pub fn letters(&self) -> Vec<Letter> {
        self.first
            .letters()
            .iter()
            .chain(self.second.letters())
            .copied()
            .collect()
    }

    fn characters(&self) -> &Characters {
        self.characters.get_or_init(|| {
            let first = self.first.character();
            let second = self.second.character();
            Characters {
                free: free_conv(&first, &second).expect("characters"),
                boolean: boolean_conv(&first, &second).expect("characters"),
                monotone: first.conv(&second),
                antimonotone: second.conv(&first),
                first,
                second,
            }
        })
    }

    /// `Φ₁`, zero on every word with a letter of the second algebra.
    pub fn first(&self) -> &Functional {
        &self.characters().first
    }

    pub fn second(&self) -> &Functional {
        &self.characters().second
    }

    /// Replaces each letter by its tagged counterpart.
    pub fn tag_word(&self, w: &Word) -> Result<Word> {
        let letters = self.letters();
        w.letters()
            .iter()
            .map(|a| {
                letters
                    .iter()
                    .find(|b| b.name() == a.name())
                    .copied()
                    .ok_or_else(|| Error::validation(format!("letter {a} is in neither algebra")))
            })
            .collect::<Result<Word>>()
            .and_then(|t| {
                if t.degree() > self.max_degree() {
                    Err(Error::validation(format!(
                        "word {t} exceeds max_degree {}",
                        self.max_degree()
                    )))
                } else {
                    Ok(t)
                }
            })
    }

    pub fn is_alternating(w: &Word) -> bool {
        w.letters().windows(2).all(|p| p[0].tag() != p[1].tag())
    }

    /// All nonempty alternating words of length at most `max_len`.
    pub fn alternating_words(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut frontier: Vec<Word> = self.letters().into_iter().map(|a| Word::new([a])).collect();
        for _ in 0..max_len.min(self.max_degree()) {
            let mut next = Vec::new();
            for w in &frontier {
                let last = w.letters().last().expect("nonempty").tag();
                for a in self.letters().into_iter().filter(|a| a.tag() != last) {
                    next.push(w.concat(&Word::new([a])));
                }
            }
            out.append(&mut frontier);
            frontier = next;
        }
        out
    }

    fn state(&self, tag: u8, w: &Word) -> Rational {
        if tag == 1 {
            self.first.moment(w)
        } else {
            self.second.moment(w)
        }
    }

    fn require_alternating(&self, w: &Word) -> Result<Word> {
        let t = self.tag_word(w)?;
        if t.is_empty() || !LabeledContext::is_alternating(&t) {
            return Err(Error::validation(format!(
                "{w} is not a nonempty alternating word"
            )));
        }
        Ok(t)
    }

    /// `(Φ₁ * Φ₂)(w)`
    pub fn monotone_product(&self, w: &Word) -> Result<Rational> {
        Ok(self.characters().monotone.eval_word(&self.tag_word(w)?))
    }

    /// `(Φ₂ * Φ₁)(w)`
    pub fn antimonotone_product(&self, w: &Word) -> Result<Rational> {
        Ok(self.characters().antimonotone.eval_word(&self.tag_word(w)?))
    }

    /// `(Φ₁ ⊞≺ Φ₂)(w)`
    pub fn free_product(&self, w: &Word) -> Result<Rational> {
        Ok(self.characters().free.eval_word(&self.tag_word(w)?))
    }

    /// `(Φ₁ ⊞≻ Φ₂)(w)`
    pub fn boolean_product(&self, w: &Word) -> Result<Rational> {
        Ok(self.characters().boolean.eval_word(&self.tag_word(w)?))
    }

    /// `φ_outer(Π outer letters) · Π φ_inner(inner letter)` on an alternating word.
    fn monotone_formula(&self, w: &Word, outer: u8) -> Result<Rational> {
        let t = self.require_alternating(w)?;
        let merged = Word::new(t.letters().iter().copied().filter(|a| a.tag() == outer));
        let mut acc = self.state(outer, &merged);
        for a in t.letters().iter().filter(|a| a.tag() != outer) {
            acc *= &self.state(a.tag(), &Word::new([*a]));
        }
        Ok(acc)
    }

    pub fn monotone_closed_form(&self, w: &Word) -> Result<Rational> {
        self.monotone_formula(w, 1)
    }

    pub fn antimonotone_closed_form(&self, w: &Word) -> Result<Rational> {
        self.monotone_formula(w, 2)
    }

    /// `Π φ(xᵢ)` over the letters of an alternating word.
    pub fn boolean_closed_form(&self, w: &Word) -> Result<Rational> {
        let t = self.require_alternating(w)?;
        Ok(t.letters()
            .iter()
            .map(|a| self.state(a.tag(), &Word::new([*a])))
            .product())
    }

    /// Free product moment by the subset recursion
    /// `Φ(w) = −Σ_{1∈S⊊[n]} (−1)^{n−|S|} Φ(w_S) Π_{i∉S} φ(xᵢ)`,
    /// where adjacent letters of one algebra in `w_S` multiply into a single element.
    pub fn free_closed_form(&self, w: &Word) -> Result<Rational> {
        let t = self.require_alternating(w)?;
        let blocks: Vec<(u8, Word)> = t
            .letters()
            .iter()
            .map(|a| (a.tag(), Word::new([*a])))
            .collect();
        Ok(self.free_blocks(&blocks))
    }

    fn free_blocks(&self, blocks: &[(u8, Word)]) -> Rational {
        let n = blocks.len();
        if n == 1 {
            return self.state(blocks[0].0, &blocks[0].1);
        }
        let mut acc = Rational::zero();
        for rest in 0..(1u64 << (n - 1)) {
            let mask = 1 | (rest << 1);
            if mask == (1u64 << n) - 1 {
                continue;
            }
            let mut outside = Rational::one();
            for (i, (tag, x)) in blocks.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    outside *= &self.state(*tag, x);
                    if outside.is_zero() {
                        break;
                    }
                }
            }
            if outside.is_zero() {
                continue;
            }
            let mut kept: Vec<(u8, Word)> = Vec::new();
            for (i, (tag, x)) in blocks.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                match kept.last_mut() {
                    Some((last, word)) if last == tag => *word = word.concat(x),
                    _ => kept.push((*tag, x.clone())),
                }
            }
            let sign = if (n - mask.count_ones() as usize).is_multiple_of(2) {
                -1
            } else {
                1
            };
            acc += Rational::from_integer(sign) * outside * self.free_blocks(&kept);
        }
        acc
    }

    /// `−(Φ ≺ (Φ⁻¹ − e))(w)` for `Φ = Φ₁ ⊞≺ Φ₂`, valid on alternating words
    /// of length at least two.
    pub fn free_recursion(&self, w: &Word) -> Result<Rational> {
        let t = self.require_alternating(w)?;
        if t.degree() < 2 {
            return Err(Error::validation(format!("{w} is not a mixed word")));
        }
        let phi = &self.characters().free;
        let tail = phi.inverse()?.sub(&Functional::unit());
        Ok(-phi.hs_left(&tail)?.eval_word(&t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::{to_cumulants, CumulantKind};

    fn semicircle(n: usize) -> Distribution {
        let catalan = [0, 1, 0, 2, 0, 5, 0, 14];
        let moments = (1..=n).map(|k| {
            (
                Word::new(std::iter::repeat_n(Letter::named("a"), k)),
                Rational::from_integer(catalan[k - 1]),
            )
        });
        Distribution::new(vec![Letter::named("a")], n, moments.collect::<Vec<_>>()).unwrap()
    }

    fn powers(name: &str, values: &[Rational]) -> Distribution {
        let a = Letter::named(name);
        let moments = values
            .iter()
            .enumerate()
            .map(|(i, v)| (Word::new(std::iter::repeat_n(a, i + 1)), v.clone()));
        Distribution::new(vec![a], values.len(), moments.collect::<Vec<_>>()).unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn context() -> LabeledContext {
        let x = powers("x", &[r(1, 2), r(2, 3), r(-1, 4), r(3, 1), r(1, 5)]);
        let y = powers("y", &[r(-1, 3), r(5, 2), r(1, 7), r(2, 1), r(-3, 2)]);
        LabeledContext::new(&x, &y).unwrap()
    }

    #[test]
    fn semicircle_free_square() {
        let d = semicircle(4);
        let out = convolve(&d, &d, ConvolutionKind::Free).unwrap();
        let a = |k| Word::new(std::iter::repeat_n(Letter::named("a"), k));
        let got: Vec<_> = (1..=4).map(|k| out.moment(&a(k))).collect();
        assert_eq!(got, [0, 2, 0, 8].map(Rational::from_integer));
    }

    #[test]
    fn bernoulli_goes_to_semicircle() {
        let d = powers("a", &[r(0, 1), r(1, 1), r(0, 1), r(1, 1), r(0, 1), r(1, 1)]);
        let out = bp_distribution(&d, &Rational::one()).unwrap();
        assert_eq!(out, semicircle(6));
    }

    #[test]
    fn monotone_examples() {
        let ctx = context();
        let w = Word::parse("x.y.x").unwrap();
        assert_eq!(ctx.monotone_product(&w).unwrap(), r(2, 3) * r(-1, 3));
        let w = Word::parse("y.x.y").unwrap();
        assert_eq!(
            ctx.monotone_product(&w).unwrap(),
            r(1, 2) * r(-1, 3) * r(-1, 3)
        );
        assert_eq!(ctx.antimonotone_product(&w).unwrap(), r(5, 2) * r(1, 2));
        assert_eq!(
            ctx.monotone_product(&Word::parse("x").unwrap()).unwrap(),
            r(1, 2)
        );
    }

    #[test]
    fn universal_products_match_closed_forms() {
        let ctx = context();
        let words = ctx.alternating_words(5);
        assert_eq!(words.len(), 10);
        for w in &words {
            assert_eq!(
                ctx.monotone_product(w).unwrap(),
                ctx.monotone_closed_form(w).unwrap(),
                "{w}"
            );
            assert_eq!(
                ctx.antimonotone_product(w).unwrap(),
                ctx.antimonotone_closed_form(w).unwrap(),
                "{w}"
            );
            assert_eq!(
                ctx.boolean_product(w).unwrap(),
                ctx.boolean_closed_form(w).unwrap(),
                "{w}"
            );
            assert_eq!(
                ctx.free_product(w).unwrap(),
                ctx.free_closed_form(w).unwrap(),
                "{w}"
            );
            if w.degree() > 1 {
                assert_eq!(
                    ctx.free_product(w).unwrap(),
                    ctx.free_recursion(w).unwrap(),
                    "{w}"
                );
            }
        }
        let xy = Word::parse("x.y").unwrap();
        assert_eq!(ctx.free_product(&xy).unwrap(), r(1, 2) * r(-1, 3));
    }

    #[test]
    fn context_rejects_shared_letters() {
        let x = powers("x", &[r(1, 1)]);
        assert!(matches!(
            LabeledContext::new(&x, &x),
            Err(Error::Validation(_))
        ));
        let ctx = context();
        assert!(ctx.monotone_product(&Word::parse("z").unwrap()).is_err());
        assert!(ctx.free_closed_form(&Word::parse("x.x").unwrap()).is_err());
    }

    #[test]
    fn bp_semigroup_forms_agree() {
        let d = powers("a", &[r(1, 2), r(1, 1), r(-1, 3), r(2, 1)]);
        let phi = d.character();
        let bars = crate::algebra::BarWord::all_up_to(d.letters(), 4);
        let one = Rational::one();
        assert!(bp_t(&phi, &one)
            .unwrap()
            .agrees_with(&bp(&phi).unwrap(), &bars));
        for t in [r(1, 2), r(2, 1)] {
            let a = bp_t(&phi, &t).unwrap();
            assert!(a.agrees_with(&bp_t_powers(&phi, &t).unwrap(), &bars));
            assert!(a.agrees_with(&bp_t_boolean(&phi, &t).unwrap(), &bars));
        }
        assert!(bp_t(&phi, &Rational::zero())
            .unwrap()
            .agrees_with(&phi, &bars));
        assert!(matches!(bp_t(&phi, &r(-1, 2)), Err(Error::Domain(_))));
        let back = bp_inverse(&bp(&phi).unwrap()).unwrap();
        assert!(back.agrees_with(&phi, &bars));
    }

    #[test]
    fn bp_transports_boolean_to_free() {
        let d = powers("a", &[r(1, 3), r(1, 1), r(2, 1), r(-1, 2), r(1, 1)]);
        let image = bp_distribution(&d, &Rational::one()).unwrap();
        let free = to_cumulants(&image, CumulantKind::Free).unwrap();
        let boolean = to_cumulants(&d, CumulantKind::Boolean).unwrap();
        assert_eq!(free.values(), boolean.values());
    }

    #[test]
    fn subordination_units() {
        let d = powers("a", &[r(1, 2), r(1, 1), r(-1, 3)]);
        let phi = d.character();
        let bars = crate::algebra::BarWord::all_up_to(d.letters(), 3);
        let e = Functional::unit();
        assert!(subordinate(&phi, &e, HalfSide::Left)
            .unwrap()
            .agrees_with(&phi, &bars));
        assert!(subordinate(&e, &phi, HalfSide::Right)
            .unwrap()
            .agrees_with(&phi, &bars));
        let left = free_conv(&phi, &e).unwrap();
        assert!(left.agrees_with(&phi, &bars));
    }

    #[test]
    fn kinds_parse() {
        for k in ["free", "boolean", "monotone-left", "monotone-right"] {
            assert_eq!(k.parse::<ConvolutionKind>().unwrap().to_string(), k);
        }
        assert!("other".parse::<ConvolutionKind>().is_err());
    }
}
