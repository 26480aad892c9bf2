use unshuffle::{CumulantMap, Distribution, Rational, Word};
use unshuffle_web::{bp_json, convolve_json, cumulants_json};

const SEMICIRCLE: &str =
    r#"{"letters":["x"],"max_degree":6,"moments":{"x.x":"1","x.x.x.x":"2","x.x.x.x.x.x":"5"}}"#;

fn moment(text: &str, w: &str) -> Rational {
    Distribution::from_json(text)
        .unwrap()
        .moment(&Word::parse(w).unwrap())
}

#[test]
fn semicircle_cumulants() {
    let free = CumulantMap::from_json(&cumulants_json(SEMICIRCLE, "free").unwrap()).unwrap();
    assert_eq!(free.values().len(), 1);
    let boolean = CumulantMap::from_json(&cumulants_json(SEMICIRCLE, "boolean").unwrap()).unwrap();
    assert_eq!(
        boolean.value(&Word::parse("x.x.x.x.x.x").unwrap()),
        Rational::from_integer(2)
    );
}

#[test]
fn convolutions() {
    let free = convolve_json(SEMICIRCLE, SEMICIRCLE, "free").unwrap();
    assert_eq!(moment(&free, "x.x.x.x"), Rational::from_integer(8));
    let boolean = convolve_json(SEMICIRCLE, SEMICIRCLE, "boolean").unwrap();
    assert_eq!(moment(&boolean, "x.x"), Rational::from_integer(2));
}

#[test]
fn bercovici_pata() {
    assert_eq!(
        Distribution::from_json(&bp_json(SEMICIRCLE, "0").unwrap()).unwrap(),
        Distribution::from_json(SEMICIRCLE).unwrap()
    );
    let bernoulli =
        r#"{"letters":["x"],"max_degree":6,"moments":{"x.x":"1","x.x.x.x":"1","x.x.x.x.x.x":"1"}}"#;
    let out = bp_json(bernoulli, "1").unwrap();
    assert_eq!(moment(&out, "x.x.x.x"), Rational::from_integer(2));
    assert_eq!(moment(&out, "x.x.x.x.x.x"), Rational::from_integer(5));
}

#[test]
fn errors_are_messages() {
    assert!(cumulants_json("{", "free").unwrap_err().contains("line"));
    assert!(cumulants_json(SEMICIRCLE, "classical").is_err());
    assert!(bp_json(SEMICIRCLE, "-1").is_err());
    let deep = r#"{"letters":["x"],"max_degree":7}"#;
    assert!(cumulants_json(deep, "free").unwrap_err().contains("limit"));
}
