use proptest::prelude::*;
use unshuffle::cumulants::{convert, from_cumulants, to_cumulants};
use unshuffle::products::convolve;
use unshuffle::{ConvolutionKind, CumulantKind, Distribution, Letter, Rational, Word};

fn letters() -> Vec<Letter> {
    vec![Letter::named("a"), Letter::named("b")]
}

fn arb_distribution(n: usize) -> impl Strategy<Value = Distribution> {
    let words = Word::all_up_to(&letters(), n);
    proptest::collection::vec((-4i64..=4, 1i64..=3), words.len()).prop_map(move |vs| {
        let moments = words
            .iter()
            .cloned()
            .zip(vs)
            .map(|(w, (p, q))| (w, Rational::new(p, q)));
        Distribution::new(letters(), n, moments).unwrap()
    })
}

fn arb_kind() -> impl Strategy<Value = CumulantKind> {
    prop::sample::select(CumulantKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_is_byte_stable(d in arb_distribution(3), kind in arb_kind()) {
        let text = d.to_json();
        let back = Distribution::from_json(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.to_json(), text);
        let c = to_cumulants(&d, kind).unwrap();
        let text = c.to_json();
        prop_assert_eq!(unshuffle::CumulantMap::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn cumulants_invert(d in arb_distribution(4), kind in arb_kind()) {
        let c = to_cumulants(&d, kind).unwrap();
        prop_assert_eq!(from_cumulants(&c).unwrap(), d);
    }

    #[test]
    fn conversion_agrees_with_moments(d in arb_distribution(4), from in arb_kind(), to in arb_kind()) {
        let c = to_cumulants(&d, from).unwrap();
        prop_assert_eq!(convert(&c, to).unwrap(), to_cumulants(&d, to).unwrap());
    }

    #[test]
    fn free_cumulants_add(d1 in arb_distribution(3), d2 in arb_distribution(3)) {
        let sum = convolve(&d1, &d2, ConvolutionKind::Free).unwrap();
        let k = |d: &Distribution| to_cumulants(d, CumulantKind::Free).unwrap();
        let (k1, k2, k12) = (k(&d1), k(&d2), k(&sum));
        for w in Word::all_up_to(&letters(), 3) {
            prop_assert_eq!(k12.value(&w), k1.value(&w) + k2.value(&w));
        }
    }

    #[test]
    fn boolean_convolution_commutes(d1 in arb_distribution(3), d2 in arb_distribution(3)) {
        prop_assert_eq!(
            convolve(&d1, &d2, ConvolutionKind::Boolean).unwrap(),
            convolve(&d2, &d1, ConvolutionKind::Boolean).unwrap()
        );
    }
}
