//! Moments, the three cumulant families, and their generating series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{Letter, Word};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::magnus::{magnus, magnus_inverse};
use crate::rational::Rational;

/// Which logarithm of the moment character a cumulant map is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CumulantKind {
    /// `κ = log≺ Φ`
    Free,
    /// `β = log≻ Φ`
    Boolean,
    /// `ρ = log* Φ`
    Monotone,
}

impl CumulantKind {
    pub const ALL: [CumulantKind; 3] = [
        CumulantKind::Free,
        CumulantKind::Boolean,
        CumulantKind::Monotone,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CumulantKind::Free => "free",
            CumulantKind::Boolean => "boolean",
            CumulantKind::Monotone => "monotone",
        }
    }

    /// The logarithm taking a character to cumulants of this kind.
    pub fn log(&self, phi: &Functional) -> Result<Functional> {
        match self {
            CumulantKind::Free => phi.log_left(),
            CumulantKind::Boolean => phi.log_right(),
            CumulantKind::Monotone => phi.log_star(),
        }
    }

    /// The exponential taking cumulants of this kind back to the character.
    pub fn exp(&self, alpha: &Functional) -> Result<Functional> {
        match self {
            CumulantKind::Free => alpha.exp_left(),
            CumulantKind::Boolean => alpha.exp_right(),
            CumulantKind::Monotone => alpha.exp_star(),
        }
    }
}

impl fmt::Display for CumulantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CumulantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(CumulantKind::Free),
            "boolean" => Ok(CumulantKind::Boolean),
            "monotone" => Ok(CumulantKind::Monotone),
            _ => Err(Error::validation(format!("unknown cumulant kind {s:?}"))),
        }
    }
}

fn parse_letters(names: &[String]) -> Result<Vec<Letter>> {
    if names.is_empty() {
        return Err(Error::validation("at least one letter is required"));
    }
    let letters = names
        .iter()
        .map(|n| Letter::new(n, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = names.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != names.len() {
        return Err(Error::validation("letters must be distinct"));
    }
    Ok(letters)
}

/// Words of degree `1..=max_degree` over the letters.
fn word_table(
    letters: &[Letter],
    max_degree: usize,
    entries: BTreeMap<String, Rational>,
) -> Result<BTreeMap<Word, Rational>> {
    let mut out = BTreeMap::new();
    for (key, value) in entries {
        let w = Word::parse(&key)?;
        if let Some(bad) = w.letters().iter().find(|a| !letters.contains(a)) {
            return Err(Error::validation(format!(
                "word {key:?} uses undeclared letter {bad}"
            )));
        }
        if w.degree() > max_degree {
            return Err(Error::validation(format!(
                "word {key:?} exceeds max_degree {max_degree}"
            )));
        }
        if !value.is_zero() {
            out.insert(w, value);
        }
    }
    Ok(out)
}

fn check_degree(max_degree: usize) -> Result<()> {
    if max_degree == 0 || max_degree > crate::algebra::MAX_BAR_DEGREE / 4 {
        return Err(Error::validation(format!(
            "max_degree {max_degree} outside 1..=16"
        )));
    }
    Ok(())
}

/// A unital moment map on all words of degree at most `max_degree`;
/// missing words have moment 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    letters: Vec<Letter>,
    max_degree: usize,
    moments: BTreeMap<Word, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionJson {
    letters: Vec<String>,
    max_degree: usize,
    #[serde(default)]
    moments: BTreeMap<String, Rational>,
}

impl Distribution {
    pub fn new(
        letters: Vec<Letter>,
        max_degree: usize,
        moments: impl IntoIterator<Item = (Word, Rational)>,
    ) -> Result<Distribution> {
        check_degree(max_degree)?;
        if letters.is_empty() {
            return Err(Error::validation("at least one letter is required"));
        }
        let mut table = BTreeMap::new();
        for (w, v) in moments {
            if w.is_empty() {
                if !v.is_one() {
                    return Err(Error::validation(format!(
                        "moment of the empty word must be 1, got {v}"
                    )));
                }
                continue;
            }
            if w.degree() > max_degree {
                return Err(Error::validation(format!(
                    "word {w} exceeds max_degree {max_degree}"
                )));
            }
            if let Some(bad) = w.letters().iter().find(|a| !letters.contains(a)) {
                return Err(Error::validation(format!(
                    "word {w} uses undeclared letter {bad}"
                )));
            }
            if !v.is_zero() {
                table.insert(w, v);
            }
        }
        Ok(Distribution {
            letters,
            max_degree,
            moments: table,
        })
    }

    /// Moments of a character on every word up to `max_degree`.
    pub fn from_character(
        phi: &Functional,
        letters: Vec<Letter>,
        max_degree: usize,
    ) -> Result<Distribution> {
        let words = Word::all_up_to(&letters, max_degree);
        let moments = words.into_iter().map(|w| {
            let v = phi.eval_word(&w);
            (w, v)
        });
        Distribution::new(letters, max_degree, moments.collect::<Vec<_>>())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn moment(&self, w: &Word) -> Rational {
        if w.is_empty() {
            return Rational::one();
        }
        self.moments.get(w).cloned().unwrap_or_default()
    }

    /// The nonzero moments.
    pub fn moments(&self) -> &BTreeMap<Word, Rational> {
        &self.moments
    }

    pub fn words(&self) -> Vec<Word> {
        Word::all_up_to(&self.letters, self.max_degree)
    }

    /// The moment character `Φ`.
    pub fn character(&self) -> Functional {
        Functional::character(self.moments.iter().map(|(w, v)| (w.clone(), v.clone())))
    }

    pub fn from_json(text: &str) -> Result<Distribution> {
        let raw: DistributionJson = serde_json::from_str(text)?;
        let letters = parse_letters(&raw.letters)?;
        check_degree(raw.max_degree)?;
        let moments = word_table(&letters, raw.max_degree, raw.moments)?;
        Distribution::new(letters, raw.max_degree, moments)
    }

    pub fn to_json(&self) -> String {
        let raw = DistributionJson {
            letters: self.letters.iter().map(|a| a.name().to_string()).collect(),
            max_degree: self.max_degree,
            moments: self
                .moments
                .iter()
                .map(|(w, v)| (w.to_string(), v.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable") + "\n"
    }
}

/// Cumulants of one kind on all words up to `max_degree`; missing words are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantMap {
    kind: CumulantKind,
    letters: Vec<Letter>,
    max_degree: usize,
    values: BTreeMap<Word, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CumulantJson {
    kind: CumulantKind,
    letters: Vec<String>,
    max_degree: usize,
    #[serde(default)]
    values: BTreeMap<String, Rational>,
}

impl CumulantMap {
    pub fn new(
        kind: CumulantKind,
        letters: Vec<Letter>,
        max_degree: usize,
        values: impl IntoIterator<Item = (Word, Rational)>,
    ) -> Result<CumulantMap> {
        check_degree(max_degree)?;
        if letters.is_empty() {
            return Err(Error::validation("at least one letter is required"));
        }
        let mut table = BTreeMap::new();
        for (w, v) in values {
            if w.is_empty() {
                if !v.is_zero() {
                    return Err(Error::validation("cumulant of the empty word must be 0"));
                }
                continue;
            }
            if w.degree() > max_degree {
                return Err(Error::validation(format!(
                    "word {w} exceeds max_degree {max_degree}"
                )));
            }
            if let Some(bad) = w.letters().iter().find(|a| !letters.contains(a)) {
                return Err(Error::validation(format!(
                    "word {w} uses undeclared letter {bad}"
                )));
            }
            if !v.is_zero() {
                table.insert(w, v);
            }
        }
        Ok(CumulantMap {
            kind,
            letters,
            max_degree,
            values: table,
        })
    }

    fn from_functional(
        kind: CumulantKind,
        f: &Functional,
        letters: &[Letter],
        max_degree: usize,
    ) -> Result<CumulantMap> {
        let values: Vec<_> = Word::all_up_to(letters, max_degree)
            .into_iter()
            .map(|w| {
                let v = f.eval_word(&w);
                (w, v)
            })
            .collect();
        CumulantMap::new(kind, letters.to_vec(), max_degree, values)
    }

    pub fn kind(&self) -> CumulantKind {
        self.kind
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn value(&self, w: &Word) -> Rational {
        self.values.get(w).cloned().unwrap_or_default()
    }

    pub fn values(&self) -> &BTreeMap<Word, Rational> {
        &self.values
    }

    /// The infinitesimal character with these values.
    pub fn infinitesimal(&self) -> Functional {
        Functional::infinitesimal(self.values.iter().map(|(w, v)| (w.clone(), v.clone())))
    }

    pub fn from_json(text: &str) -> Result<CumulantMap> {
        let raw: CumulantJson = serde_json::from_str(text)?;
        let letters = parse_letters(&raw.letters)?;
        check_degree(raw.max_degree)?;
        let values = word_table(&letters, raw.max_degree, raw.values)?;
        CumulantMap::new(raw.kind, letters, raw.max_degree, values)
    }

    pub fn to_json(&self) -> String {
        let raw = CumulantJson {
            kind: self.kind,
            letters: self.letters.iter().map(|a| a.name().to_string()).collect(),
            max_degree: self.max_degree,
            values: self
                .values
                .iter()
                .map(|(w, v)| (w.to_string(), v.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable") + "\n"
    }
}

/// Cumulants of the given kind, evaluated on every word of the distribution.
pub fn to_cumulants(d: &Distribution, kind: CumulantKind) -> Result<CumulantMap> {
    let log = kind.log(&d.character())?;
    CumulantMap::from_functional(kind, &log, d.letters(), d.max_degree())
}

/// The distribution whose cumulants of `c.kind()` are `c`.
pub fn from_cumulants(c: &CumulantMap) -> Result<Distribution> {
    let phi = c.kind().exp(&c.infinitesimal())?;
    Distribution::from_character(&phi, c.letters().to_vec(), c.max_degree())
}

/// Changes cumulant kind directly on infinitesimal characters, through the
/// Magnus expansion `Ω′` and its inverse `W`:
/// `κ = W(ρ)`, `β = −W(−ρ)`, `κ = W(−Ω′(−β))`, `β = −W(−Ω′(κ))`.
pub fn convert_functional(
    alpha: &Functional,
    from: CumulantKind,
    to: CumulantKind,
) -> Result<Functional> {
    use CumulantKind::*;
    let minus = |f: &Functional| f.neg();
    Ok(match (from, to) {
        _ if from == to => alpha.clone(),
        (Monotone, Free) => magnus_inverse(alpha)?,
        (Free, Monotone) => magnus(alpha)?,
        (Monotone, Boolean) => minus(&magnus_inverse(&minus(alpha))?),
        (Boolean, Monotone) => minus(&magnus(&minus(alpha))?),
        (Boolean, Free) => magnus_inverse(&minus(&magnus(&minus(alpha))?))?,
        (Free, Boolean) => minus(&magnus_inverse(&minus(&magnus(alpha)?))?),
        _ => unreachable!("all kind pairs covered"),
    })
}

pub fn convert(c: &CumulantMap, to: CumulantKind) -> Result<CumulantMap> {
    let out = convert_functional(&c.infinitesimal(), c.kind(), to)?;
    CumulantMap::from_functional(to, &out, c.letters(), c.max_degree())
}

/// A noncommutative polynomial truncated above `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    max_degree: usize,
    coeffs: BTreeMap<Word, Rational>,
}

impl TruncatedSeries {
    pub fn new(
        max_degree: usize,
        coeffs: impl IntoIterator<Item = (Word, Rational)>,
    ) -> TruncatedSeries {
        TruncatedSeries {
            max_degree,
            coeffs: coeffs
                .into_iter()
                .filter(|(w, c)| w.degree() <= max_degree && !c.is_zero())
                .collect(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.coeffs.get(w).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, Rational> {
        &self.coeffs
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let mut coeffs = self.coeffs.clone();
        for (w, c) in &other.coeffs {
            *coeffs.entry(w.clone()).or_default() += c;
        }
        TruncatedSeries::new(self.max_degree.min(other.max_degree), coeffs)
    }

    /// Concatenation product, dropping words above the truncation degree.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let n = self.max_degree.min(other.max_degree);
        let mut coeffs: BTreeMap<Word, Rational> = BTreeMap::new();
        for (u, a) in &self.coeffs {
            for (v, b) in &other.coeffs {
                if u.degree() + v.degree() <= n {
                    *coeffs.entry(u.concat(v)).or_default() += a * b;
                }
            }
        }
        TruncatedSeries::new(n, coeffs)
    }

    pub fn from_json(text: &str) -> Result<TruncatedSeries> {
        let raw: SeriesJson = serde_json::from_str(text)?;
        let coeffs = raw
            .coeffs
            .into_iter()
            .map(|(k, v)| Ok((Word::parse(&k)?, v)))
            .collect::<Result<Vec<_>>>()?;
        if let Some((w, _)) = coeffs.iter().find(|(w, _)| w.degree() > raw.max_degree) {
            return Err(Error::validation(format!(
                "word {w} exceeds max_degree {}",
                raw.max_degree
            )));
        }
        Ok(TruncatedSeries::new(raw.max_degree, coeffs))
    }

    pub fn to_json(&self) -> String {
        let raw = SeriesJson {
            max_degree: self.max_degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(w, c)| (w.to_string(), c.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable") + "\n"
    }

    /// Pairing with a linear form on words: `Σ c_w f(w)`.
    pub fn pair(&self, f: &Functional) -> Rational {
        self.coeffs.iter().map(|(w, c)| c * &f.eval_word(w)).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesJson {
    max_degree: usize,
    #[serde(default)]
    coeffs: BTreeMap<String, Rational>,
}

/// Which generating series to build from a distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// moments
    M,
    /// free cumulants
    R,
    /// boolean cumulants
    Eta,
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" | "moments" => Ok(SeriesKind::M),
            "R" | "r" => Ok(SeriesKind::R),
            "eta" | "η" => Ok(SeriesKind::Eta),
            _ => Err(Error::validation(format!("unknown series {s:?}"))),
        }
    }
}

/// Moments (`M`), free cumulants (`R`) or boolean cumulants (`η`) as a series
/// in noncommuting indeterminates named by the letters.
pub fn series(d: &Distribution, which: SeriesKind) -> Result<TruncatedSeries> {
    let n = d.max_degree();
    Ok(match which {
        SeriesKind::M => TruncatedSeries::new(n, d.moments().clone()),
        SeriesKind::R => {
            TruncatedSeries::new(n, to_cumulants(d, CumulantKind::Free)?.values().clone())
        }
        SeriesKind::Eta => {
            TruncatedSeries::new(n, to_cumulants(d, CumulantKind::Boolean)?.values().clone())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Vec<Letter> {
        vec![Letter::named("a")]
    }

    fn univariate(values: &[i64]) -> Vec<(Word, Rational)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                (
                    Word::new(std::iter::repeat_n(Letter::named("a"), i + 1)),
                    Rational::from_integer(v),
                )
            })
            .collect()
    }

    fn sequence(f: impl Fn(&Word) -> Rational, n: usize) -> Vec<Rational> {
        (1..=n)
            .map(|k| f(&Word::new(std::iter::repeat_n(Letter::named("a"), k))))
            .collect()
    }

    fn ints(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&v| Rational::from_integer(v)).collect()
    }

    #[test]
    fn semicircle_cumulants() {
        let d = Distribution::new(a(), 6, univariate(&[0, 1, 0, 2, 0, 5])).unwrap();
        let free = to_cumulants(&d, CumulantKind::Free).unwrap();
        assert_eq!(sequence(|w| free.value(w), 6), ints(&[0, 1, 0, 0, 0, 0]));
        let boolean = to_cumulants(&d, CumulantKind::Boolean).unwrap();
        assert_eq!(sequence(|w| boolean.value(w), 6), ints(&[0, 1, 0, 1, 0, 2]));
        let monotone = to_cumulants(&d, CumulantKind::Monotone).unwrap();
        assert_eq!(
            monotone.value(&Word::parse("a.a.a.a").unwrap()),
            Rational::new(1, 2)
        );
        assert_eq!(
            monotone.value(&Word::parse("a.a").unwrap()),
            Rational::one()
        );
    }

    #[test]
    fn cumulants_to_moments() {
        let free = CumulantMap::new(CumulantKind::Free, a(), 6, univariate(&[0, 1])).unwrap();
        let d = from_cumulants(&free).unwrap();
        assert_eq!(sequence(|w| d.moment(w), 6), ints(&[0, 1, 0, 2, 0, 5]));
        let boolean = CumulantMap::new(CumulantKind::Boolean, a(), 6, univariate(&[0, 1])).unwrap();
        let d = from_cumulants(&boolean).unwrap();
        assert_eq!(sequence(|w| d.moment(w), 6), ints(&[0, 1, 0, 1, 0, 1]));
        let zero = CumulantMap::new(CumulantKind::Monotone, a(), 4, []).unwrap();
        assert!(from_cumulants(&zero).unwrap().moments().is_empty());
    }

    #[test]
    fn conversions() {
        let free = CumulantMap::new(CumulantKind::Free, a(), 4, univariate(&[0, 1])).unwrap();
        let boolean = convert(&free, CumulantKind::Boolean).unwrap();
        assert_eq!(sequence(|w| boolean.value(w), 4), ints(&[0, 1, 0, 1]));
        assert_eq!(convert(&free, CumulantKind::Free).unwrap(), free);
        let pair = CumulantMap::new(CumulantKind::Boolean, a(), 4, univariate(&[0, 1])).unwrap();
        let monotone = convert(&pair, CumulantKind::Monotone).unwrap();
        assert_eq!(
            monotone.value(&Word::parse("a.a.a.a").unwrap()),
            Rational::new(-1, 2)
        );
        assert_eq!(
            monotone.value(&Word::parse("a.a").unwrap()),
            Rational::one()
        );
    }

    #[test]
    fn point_mass_series() {
        let c = Rational::new(3, 2);
        let moments: Vec<_> = (1..=5)
            .map(|k| {
                (
                    Word::new(std::iter::repeat_n(Letter::named("a"), k)),
                    c.pow(k as i32),
                )
            })
            .collect();
        let d = Distribution::new(a(), 5, moments).unwrap();
        let eta = series(&d, SeriesKind::Eta).unwrap();
        assert_eq!(
            eta,
            TruncatedSeries::new(5, [(Word::parse("a").unwrap(), c)])
        );
    }

    #[test]
    fn semicircle_r_transform() {
        let d = Distribution::new(a(), 6, univariate(&[0, 1, 0, 2, 0, 5])).unwrap();
        let r = series(&d, SeriesKind::R).unwrap();
        assert_eq!(
            r,
            TruncatedSeries::new(6, [(Word::parse("a.a").unwrap(), Rational::one())])
        );
    }

    #[test]
    fn json_round_trip() {
        let text =
            r#"{"letters":["a","b"],"max_degree":3,"moments":{"a":0,"a.b":"1/2","b.b":"3"}}"#;
        let d = Distribution::from_json(text).unwrap();
        assert_eq!(d.moment(&Word::parse("a.b").unwrap()), Rational::new(1, 2));
        let again = Distribution::from_json(&d.to_json()).unwrap();
        assert_eq!(again, d);
        assert_eq!(again.to_json(), d.to_json());
        assert!(!d.to_json().contains("\"a\":"));
    }

    #[test]
    fn series_json_round_trip() {
        let d = Distribution::new(a(), 4, univariate(&[1, 2, 0, 5])).unwrap();
        let r = series(&d, SeriesKind::R).unwrap();
        let text = r.to_json();
        assert_eq!(TruncatedSeries::from_json(&text).unwrap(), r);
        let cumulants = to_cumulants(&d, CumulantKind::Monotone).unwrap();
        let text = cumulants.to_json();
        assert_eq!(CumulantMap::from_json(&text).unwrap().to_json(), text);
        assert!(TruncatedSeries::from_json(r#"{"max_degree":1,"coeffs":{"a.a":"1"}}"#).is_err());
    }

    #[test]
    fn json_errors() {
        assert!(matches!(
            Distribution::from_json(r#"{"letters":["a"],"max_degree":2,"moments":{"c":1}}"#),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Distribution::from_json(r#"{"letters":["a"],"max_degree":2,"moments":{"a.a.a":1}}"#),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Distribution::from_json("{\n  \"letters\": [\"a\"],\n  \"max_degree\": 2,\n  \"moments\": {\"a\": \"x\"}\n}"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            Distribution::from_json(r#"{"letters":["a"],"max_degree":0}"#),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Distribution::from_json(r#"{"letters":["a"],"max_degree":2,"moments":{"1":"2"}}"#),
            Err(Error::Validation(_))
        ));
    }
}
