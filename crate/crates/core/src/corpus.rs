//! Seeded random inputs for the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Letter, Word};
use crate::coproduct::Defects;
use crate::cumulants::Distribution;
use crate::functional::Functional;
use crate::rational::Rational;

/// A deterministic stream of random test objects over a fixed alphabet.
pub struct Corpus {
    rng: ChaCha8Rng,
    seed: u64,
    letters: Vec<Letter>,
    max_degree: usize,
    defects: Defects,
    drawn: u64,
}

impl Corpus {
    pub fn new(seed: u64, letters: Vec<Letter>, max_degree: usize) -> Corpus {
        Corpus {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            letters,
            max_degree,
            defects: Defects::NONE,
            drawn: 0,
        }
    }

    /// Marks every generated functional with the given defects.
    pub fn with_defects(mut self, defects: Defects) -> Corpus {
        self.defects = defects;
        self
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// A small rational `p/q` with `|p| ≤ 3`, `1 ≤ q ≤ 3`, zero with probability about 1/7.
    pub fn rational(&mut self) -> Rational {
        Rational::new(self.rng.gen_range(-3..=3), self.rng.gen_range(1..=3))
    }

    fn values(&mut self) -> Vec<(Word, Rational)> {
        Word::all_up_to(&self.letters, self.max_degree)
            .into_iter()
            .map(|w| {
                let v = self.rational();
                (w, v)
            })
            .collect()
    }

    /// An infinitesimal character with random values on every word.
    pub fn infinitesimal(&mut self) -> Functional {
        Functional::infinitesimal(self.values()).with_defects(self.defects)
    }

    /// Moments of `ℰ≺(κ)` for a random infinitesimal `κ`, stored as a distribution.
    pub fn distribution(&mut self) -> Distribution {
        let kappa = Functional::infinitesimal(self.values());
        let phi = kappa.exp_left().expect("infinitesimal");
        Distribution::from_character(&phi, self.letters.clone(), self.max_degree)
            .expect("valid words")
    }

    /// A character built from the moments of [`Corpus::distribution`].
    pub fn character(&mut self) -> Functional {
        self.distribution().character().with_defects(self.defects)
    }

    /// A functional with independent random values on every bar word.
    pub fn general(&mut self, on_unit: Rational) -> Functional {
        self.drawn += 1;
        let seed =
            self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ self.drawn ^ self.rng.gen::<u64>();
        Functional::random(seed, on_unit).with_defects(self.defects)
    }

    /// A general functional vanishing on the empty bar word.
    pub fn augmented(&mut self) -> Functional {
        self.general(Rational::zero())
    }

    /// A general functional with value 1 on the empty bar word.
    pub fn unital(&mut self) -> Functional {
        self.general(Rational::one())
    }

    /// A distribution on one letter with random moments up to `max_degree`.
    pub fn univariate(&mut self, letter: Letter) -> Distribution {
        let moments: Vec<_> = (1..=self.max_degree)
            .map(|k| (Word::new(std::iter::repeat_n(letter, k)), self.rational()))
            .collect();
        Distribution::new(vec![letter], self.max_degree, moments).expect("valid words")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Kind;

    fn ab() -> Vec<Letter> {
        vec![Letter::named("a"), Letter::named("b")]
    }

    #[test]
    fn deterministic() {
        let mut c1 = Corpus::new(7, ab(), 3);
        let mut c2 = Corpus::new(7, ab(), 3);
        assert_eq!(c1.distribution(), c2.distribution());
        let (f, g) = (c1.augmented(), c2.augmented());
        let w = crate::algebra::BarWord::parse("a.b|a").unwrap();
        assert_eq!(f.eval(&w), g.eval(&w));
        assert!(f.eval(&crate::algebra::BarWord::unit()).is_zero());
    }

    #[test]
    fn kinds() {
        let mut c = Corpus::new(1, ab(), 3);
        assert_eq!(c.infinitesimal().kind(), Kind::Infinitesimal);
        assert_eq!(c.character().kind(), Kind::Character);
        assert_eq!(c.unital().kind(), Kind::General);
        let d = c.univariate(Letter::named("x"));
        assert_eq!(d.letters(), &[Letter::named("x")]);
    }
}
