//! Pre-Lie Magnus expansion, its inverse, BCH and the shuffle group laws.

use std::sync::LazyLock;

use parking_lot::Mutex;

use crate::error::Result;
use crate::functional::Functional;
use crate::rational::Rational;

/// Bernoulli numbers with `B₁ = −1/2`, grown on demand from
/// `Σ_{j=0}^{m} C(m+1, j) B_j = 0`.
#[derive(Clone, Debug)]
pub struct BernoulliTable {
    values: Vec<Rational>,
}

impl Default for BernoulliTable {
    fn default() -> Self {
        BernoulliTable::new()
    }
}

impl BernoulliTable {
    pub fn new() -> BernoulliTable {
        BernoulliTable {
            values: vec![Rational::one()],
        }
    }

    pub fn get(&mut self, m: usize) -> Rational {
        while self.values.len() <= m {
            let n = self.values.len();
            // B_n = −1/(n+1) Σ_{j<n} C(n+1, j) B_j
            let mut binom = Rational::one();
            let mut acc = Rational::zero();
            for (j, b) in self.values.iter().enumerate() {
                acc += &binom * b;
                binom = binom * Rational::new((n + 1 - j) as i64, (j + 1) as i64);
            }
            self.values
                .push(-acc / Rational::from_integer(n as i64 + 1));
        }
        self.values[m].clone()
    }
}

static COEFFICIENTS: LazyLock<Mutex<(BernoulliTable, Vec<Rational>)>> =
    LazyLock::new(|| Mutex::new((BernoulliTable::new(), Vec::new())));

/// `B_m / m!`
pub fn magnus_coefficient(m: usize) -> Rational {
    let mut guard = COEFFICIENTS.lock();
    let (table, cache) = &mut *guard;
    while cache.len() <= m {
        let k = cache.len();
        let c = table.get(k) / Rational::factorial(k as u32);
        cache.push(c);
    }
    cache[m].clone()
}

/// `Ω′(κ) = Σ_m (B_m/m!) L^{(m)}_{Ω′(κ)▷}(κ)`, so that `exp*(Ω′(κ)) = ℰ≺(κ)`.
pub fn magnus(kappa: &Functional) -> Result<Functional> {
    kappa.require_infinitesimal("Magnus expansion")?;
    Ok(kappa.magnus_unchecked())
}

/// `W(ρ) = Σ_n L^n_{ρ▷}(ρ)/(n+1)!`, the inverse of [`magnus`].
pub fn magnus_inverse(rho: &Functional) -> Result<Functional> {
    rho.require_infinitesimal("inverse Magnus expansion")?;
    Ok(rho.magnus_inverse_unchecked())
}

/// `log*(exp*(γ₁) * exp*(γ₂))`
pub fn bch(a: &Functional, b: &Functional) -> Result<Functional> {
    a.require_infinitesimal("BCH")?;
    b.require_infinitesimal("BCH")?;
    a.exp_star_unchecked()
        .conv(&b.exp_star_unchecked())
        .log_star()
}

/// `γ₁ # γ₂ = γ₁ + Ad_{ℰ≺(γ₁)⁻¹}(γ₂)`, the left shuffle group law.
pub fn group_law_left(a: &Functional, b: &Functional) -> Result<Functional> {
    a.require_infinitesimal("left shuffle group law")?;
    b.require_infinitesimal("left shuffle group law")?;
    let exp = a.exp_left_unchecked();
    let exp_inv = a.neg().exp_right_unchecked();
    Ok(a.add(&Functional::adjoint_with(&exp, &exp_inv, b)))
}

/// `log≺(ℰ≺(γ₁) * ℰ≺(γ₂))`, the defining form of [`group_law_left`].
pub fn group_law_left_defining(a: &Functional, b: &Functional) -> Result<Functional> {
    a.exp_left()?.conv(&b.exp_left()?).log_left()
}

/// `γ₁ ⊙ γ₂ = −(−γ₂ # −γ₁)`, the right shuffle group law.
pub fn group_law_right(a: &Functional, b: &Functional) -> Result<Functional> {
    Ok(group_law_left(&b.neg(), &a.neg())?.neg())
}

/// `log≻(ℰ≻(γ₁) * ℰ≻(γ₂))`, the defining form of [`group_law_right`].
pub fn group_law_right_defining(a: &Functional, b: &Functional) -> Result<Functional> {
    a.exp_right()?.conv(&b.exp_right()?).log_right()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{BarWord, Letter, Word};
    use proptest::prelude::*;

    #[test]
    fn bernoulli_values() {
        let mut t = BernoulliTable::new();
        assert_eq!(t.get(0), Rational::one());
        assert_eq!(t.get(1), Rational::new(-1, 2));
        assert_eq!(t.get(2), Rational::new(1, 6));
        assert_eq!(t.get(4), Rational::new(-1, 30));
        assert_eq!(t.get(6), Rational::new(1, 42));
        assert_eq!(t.get(12), Rational::new(-691, 2730));
        for k in 1..6 {
            assert!(t.get(2 * k + 1).is_zero());
        }
    }

    #[test]
    fn bernoulli_recurrence() {
        let mut t = BernoulliTable::new();
        for m in 1..=12usize {
            let mut binom = Rational::one();
            let mut acc = Rational::zero();
            for j in 0..=m {
                acc += &binom * &t.get(j);
                binom = binom * Rational::new((m + 1 - j) as i64, (j + 1) as i64);
            }
            assert!(acc.is_zero(), "m = {m}");
        }
    }

    #[test]
    fn coefficients() {
        assert_eq!(magnus_coefficient(1), Rational::new(-1, 2));
        assert_eq!(magnus_coefficient(2), Rational::new(1, 12));
        assert_eq!(magnus_coefficient(4), Rational::new(-1, 720));
    }

    fn kappa(values: &[(&str, i64, i64)]) -> Functional {
        Functional::infinitesimal(
            values
                .iter()
                .map(|(w, p, q)| (Word::parse(w).unwrap(), Rational::new(*p, *q))),
        )
    }

    fn sample() -> (Functional, Functional) {
        (
            kappa(&[("a", 1, 2), ("b", -2, 1), ("a.b", 3, 1), ("b.a.b", 1, 3)]),
            kappa(&[("a", 2, 3), ("b.b", -1, 1), ("a.b.a", 5, 1)]),
        )
    }

    fn words(n: usize) -> Vec<BarWord> {
        Word::all_up_to(&[Letter::named("a"), Letter::named("b")], n)
            .into_iter()
            .map(BarWord::from_word)
            .collect()
    }

    fn agree(f: &Functional, g: &Functional, n: usize) {
        let on = words(n);
        assert_eq!(f.first_difference(g, &on), None);
    }

    #[test]
    fn low_degree_truncations() {
        let (a, _) = sample();
        let l = a.prelie(&a).unwrap();
        let half = Rational::new(1, 2);
        agree(&magnus(&a).unwrap(), &a.sub(&l.scale(&half)), 2);
        let ll = a.prelie(&l).unwrap();
        let w = a.add(&l.scale(&half)).add(&ll.scale(&Rational::new(1, 6)));
        agree(&magnus_inverse(&a).unwrap(), &w, 3);
    }

    #[test]
    fn semicircle_monotone_cumulant() {
        let k = kappa(&[("a.a", 1, 1)]);
        let rho = magnus(&k).unwrap();
        assert_eq!(rho.eval_word(&Word::parse("a.a").unwrap()), Rational::one());
        assert_eq!(
            rho.eval_word(&Word::parse("a.a.a.a").unwrap()),
            Rational::new(1, 2)
        );
    }

    #[test]
    fn bch_low_degree() {
        let (a, b) = sample();
        agree(&bch(&a, &Functional::zero()).unwrap(), &a, 4);
        let bracket = a.conv(&b).sub(&b.conv(&a));
        let want = a.add(&b).add(&bracket.scale(&Rational::new(1, 2)));
        agree(&bch(&a, &b).unwrap(), &want, 2);
    }

    #[test]
    fn group_law_units() {
        let (a, _) = sample();
        let zero = Functional::zero();
        agree(&group_law_left(&a, &zero).unwrap(), &a, 4);
        agree(&group_law_left(&zero, &a).unwrap(), &a, 4);
        agree(&group_law_right(&a, &zero).unwrap(), &a, 4);
    }

    #[test]
    fn rejects_non_infinitesimal() {
        let phi = Functional::random(3, Rational::zero());
        assert!(magnus(&phi).is_err());
        assert!(magnus_inverse(&phi).is_err());
        assert!(bch(&phi, &phi).is_err());
    }

    fn arb_kappa() -> impl Strategy<Value = Functional> {
        let all = Word::all_up_to(&[Letter::named("a"), Letter::named("b")], 4);
        proptest::collection::vec(-3i64..=3, all.len()).prop_map(move |vs| {
            Functional::infinitesimal(
                all.iter()
                    .cloned()
                    .zip(vs)
                    .map(|(w, v)| (w, Rational::from_integer(v))),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn magnus_inverts(k in arb_kappa()) {
            let there = magnus(&k).unwrap();
            prop_assert!(magnus_inverse(&there).unwrap().agrees_with(&k, &words(4)));
            prop_assert!(there.agrees_with(&k.exp_left().unwrap().log_star().unwrap(), &words(4)));
        }

        #[test]
        fn group_law_matches_definition(a in arb_kappa(), b in arb_kappa()) {
            let closed = group_law_left(&a, &b).unwrap();
            prop_assert!(closed.agrees_with(&group_law_left_defining(&a, &b).unwrap(), &words(4)));
        }
    }
}
