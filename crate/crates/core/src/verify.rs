//! Named identity suites with deterministic JSON reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{BarWord, Letter, Word};
use crate::coproduct::{check_axioms_with, Defects, HalfSide};
use crate::corpus::Corpus;
use crate::cumulants::{
    convert, convert_functional, from_cumulants, series, to_cumulants, CumulantKind, CumulantMap,
    Distribution, SeriesKind, TruncatedSeries,
};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::magnus::{
    bch, group_law_left, group_law_left_defining, group_law_right, group_law_right_defining,
    magnus, magnus_inverse, BernoulliTable,
};
use crate::partition::oracle_moments;
use crate::products::{
    boolean_conv, bp, bp_inverse, bp_t, bp_t_boolean, bp_t_powers, factorize, factorize_right,
    free_conv, subordinate, LabeledContext,
};
use crate::rational::Rational;
use crate::report::{Check, Status, SuiteReport};

/// Largest degree any suite accepts.
pub const MAX_DEGREE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Coalgebra,
    Shuffle,
    Cumulants,
    Magnus,
    Products,
    Convolution,
    Bp,
    Subordination,
    Mutation,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Coalgebra,
        Suite::Shuffle,
        Suite::Cumulants,
        Suite::Magnus,
        Suite::Products,
        Suite::Convolution,
        Suite::Bp,
        Suite::Subordination,
        Suite::Mutation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Coalgebra => "coalgebra",
            Suite::Shuffle => "shuffle",
            Suite::Cumulants => "cumulants",
            Suite::Magnus => "magnus",
            Suite::Products => "products",
            Suite::Convolution => "convolution",
            Suite::Bp => "bp",
            Suite::Subordination => "subordination",
            Suite::Mutation => "mutation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown suite {s:?}")))
    }
}

/// Parameters shared by every suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub max_degree: usize,
    pub seed: u64,
    pub defects: Defects,
}

impl Config {
    pub fn new(max_degree: usize, seed: u64) -> Config {
        Config {
            max_degree,
            seed,
            defects: Defects::NONE,
        }
    }

    pub fn with_defects(self, defects: Defects) -> Config {
        Config { defects, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.max_degree == 0 || self.max_degree > MAX_DEGREE {
            return Err(Error::validation(format!(
                "max_degree {} outside 1..={MAX_DEGREE}",
                self.max_degree
            )));
        }
        Ok(())
    }

    fn corpus(&self, salt: u64) -> Corpus {
        Corpus::new(
            self.seed ^ salt.wrapping_mul(0x2545_f491_4f6c_dd1d),
            two_letters(),
            self.max_degree,
        )
        .with_defects(self.defects)
    }
}

/// The combined outcome of several suites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub max_degree: usize,
    #[serde(default, skip_serializing_if = "is_clean")]
    pub defects: Defects,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

fn is_clean(d: &Defects) -> bool {
    !d.any()
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.suites
            .iter()
            .flat_map(|s| s.failures().map(move |c| (s.suite.as_str(), c)))
    }
}

/// Runs the given suites in order.
pub fn run_suites(suites: &[Suite], config: &Config) -> Result<Report> {
    config.validate()?;
    let reports = suites
        .iter()
        .map(|s| run(*s, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        seed: config.seed,
        max_degree: config.max_degree,
        defects: config.defects,
        passed: reports.iter().all(SuiteReport::passed),
        suites: reports,
    })
}

pub fn run(suite: Suite, config: &Config) -> Result<SuiteReport> {
    config.validate()?;
    let checks = match suite {
        Suite::Coalgebra => {
            return check_axioms_with(&two_letters(), config.max_degree, config.defects)
        }
        Suite::Shuffle => shuffle(config)?,
        Suite::Cumulants => cumulants(config)?,
        Suite::Magnus => magnus_suite(config)?,
        Suite::Products => products(config)?,
        Suite::Convolution => convolution(config)?,
        Suite::Bp => bercovici_pata(config)?,
        Suite::Subordination => subordination(config)?,
        Suite::Mutation => mutation(config)?,
    };
    Ok(SuiteReport::new(suite.name(), checks))
}

fn two_letters() -> Vec<Letter> {
    vec![Letter::named("a"), Letter::named("b")]
}

fn bars(max_degree: usize) -> Vec<BarWord> {
    BarWord::all_up_to(&two_letters(), max_degree)
}

fn bars_with_unit(max_degree: usize) -> Vec<BarWord> {
    let mut out = vec![BarWord::unit()];
    out.extend(bars(max_degree));
    out
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn agree(axiom: &str, formula: &str, lhs: &Functional, rhs: &Functional, on: &[BarWord]) -> Check {
    Check::over(axiom, formula, on, |b| lhs.eval(b) == rhs.eval(b))
}

/// Collects one identity over a corpus; construction errors count as failures.
struct Collector {
    axiom: &'static str,
    formula: &'static str,
    parts: Vec<Check>,
}

impl Collector {
    fn new(axiom: &'static str, formula: &'static str) -> Collector {
        Collector {
            axiom,
            formula,
            parts: Vec::new(),
        }
    }

    fn agree(&mut self, lhs: Result<Functional>, rhs: Result<Functional>, on: &[BarWord]) {
        let part = match (lhs, rhs) {
            (Ok(l), Ok(r)) => agree(self.axiom, self.formula, &l, &r, on),
            (Err(e), _) | (_, Err(e)) => {
                Check::failed(self.axiom, self.formula, e.to_string(), 0, 0)
            }
        };
        self.parts.push(part);
    }

    fn push(&mut self, check: Check) {
        self.parts.push(check);
    }

    fn finish(self) -> Check {
        Check::merge(self.axiom, self.formula, self.parts)
    }
}

fn fixed(axiom: &str, formula: &str, degree: usize, got: &[Rational], want: &[Rational]) -> Check {
    match got.iter().zip(want).position(|(g, w)| g != w) {
        None => Check::ok(axiom, formula, want.len() as u64),
        Some(i) => Check::failed(
            axiom,
            formula,
            format!("index {}: got {}, expected {}", i + 1, got[i], want[i]),
            degree.min(i + 1),
            i as u64 + 1,
        ),
    }
}

fn ints(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| Rational::from_integer(v)).collect()
}

fn power(letter: Letter, k: usize) -> Word {
    Word::new(std::iter::repeat_n(letter, k))
}

fn univariate(values: &[Rational]) -> Distribution {
    let a = Letter::named("a");
    let moments = values
        .iter()
        .enumerate()
        .map(|(i, v)| (power(a, i + 1), v.clone()));
    Distribution::new(vec![a], values.len(), moments.collect::<Vec<_>>()).expect("one letter")
}

fn univariate_cumulants(kind: CumulantKind, values: &[Rational]) -> CumulantMap {
    let a = Letter::named("a");
    let entries = values
        .iter()
        .enumerate()
        .map(|(i, v)| (power(a, i + 1), v.clone()));
    CumulantMap::new(kind, vec![a], values.len(), entries.collect::<Vec<_>>()).expect("one letter")
}

fn sequence(n: usize, f: impl Fn(&Word) -> Rational) -> Vec<Rational> {
    (1..=n).map(|k| f(&power(Letter::named("a"), k))).collect()
}

// shuffle identities

fn shuffle(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let all = bars(n);
    let with_unit = bars_with_unit(n);
    let mut corpus = config.corpus(1);
    let fs: Vec<Functional> = (0..20)
        .map(|i| {
            if i % 2 == 0 {
                corpus.augmented()
            } else {
                corpus.unital()
            }
        })
        .collect();
    let augmented: Vec<&Functional> = fs.iter().step_by(2).collect();
    let unital: Vec<&Functional> = fs.iter().skip(1).step_by(2).collect();
    let triples: Vec<[&Functional; 3]> = (0..7)
        .map(|k| [0, 1, 2].map(|j| &fs[(3 * k + j) % 20]))
        .collect();
    let e = Functional::unit();
    let mut checks = Vec::new();

    let mut left_assoc = Collector::new("left half associativity", "(f≺g)≺h = f≺(g*h)");
    let mut middle_assoc = Collector::new("middle half associativity", "(f≻g)≺h = f≻(g≺h)");
    let mut right_assoc = Collector::new("right half associativity", "f≻(g≻h) = (f*g)≻h");
    let mut split = Collector::new("splitting", "f*g = f≺g + f≻g");
    for [f, g, h] in &triples {
        left_assoc.agree(f.hs_left(g)?.hs_left(h), f.hs_left(&g.conv(h)), &with_unit);
        middle_assoc.agree(
            f.hs_right(g)?.hs_left(h),
            f.hs_right(&g.hs_left(h)?),
            &with_unit,
        );
        right_assoc.agree(
            f.hs_right(&g.hs_right(h)?),
            f.conv(g).hs_right(h),
            &with_unit,
        );
        split.agree(Ok(f.conv(g)), Ok(f.hs_left(g)?.add(&f.hs_right(g)?)), &all);
    }
    checks.extend([
        left_assoc.finish(),
        middle_assoc.finish(),
        right_assoc.finish(),
        split.finish(),
    ]);

    let mut units = Collector::new(
        "unit conventions",
        "e≻f = f, f≺e = f, e≺f = 0, f≻e = 0 off the empty bar word",
    );
    let zero = Functional::zero();
    for f in &fs {
        units.agree(e.hs_right(f), Ok(f.clone()), &all);
        units.agree(f.hs_left(&e), Ok(f.clone()), &all);
        units.agree(e.hs_left(f), Ok(zero.clone()), &with_unit);
        units.agree(f.hs_right(&e), Ok(zero.clone()), &with_unit);
    }
    checks.push(units.finish());
    checks.push(match e.hs_left(&e) {
        Err(Error::Domain(_)) => {
            Check::ok("undefined unit products", "e≺e and e≻e are rejected", 1)
        }
        _ => Check::failed(
            "undefined unit products",
            "e≺e and e≻e are rejected",
            "e≺e".into(),
            0,
            1,
        ),
    });

    let mut prelie = Collector::new("pre-Lie", "(f▷g)▷h − f▷(g▷h) = (g▷f)▷h − g▷(f▷h)");
    let mut bracket = Collector::new("pre-Lie bracket", "f▷g − g▷f = f*g − g*f");
    for k in 0..4 {
        let [f, g, h] = [0, 1, 2].map(|j| augmented[(3 * k + j) % augmented.len()]);
        let lhs = f.prelie(g)?.prelie(h)?.sub(&f.prelie(&g.prelie(h)?)?);
        let rhs = g.prelie(f)?.prelie(h)?.sub(&g.prelie(&f.prelie(h)?)?);
        prelie.agree(Ok(lhs), Ok(rhs), &with_unit);
        let lhs = f.prelie(g)?.sub(&g.prelie(f)?);
        bracket.agree(Ok(lhs), Ok(f.conv(g).sub(&g.conv(f))), &with_unit);
    }
    checks.extend([prelie.finish(), bracket.finish()]);

    let mut inverse_shuffle = Collector::new("inverse shuffle", "ℰ≻(−α) * ℰ≺(α) = e");
    let mut inverse = Collector::new("inverse", "Φ * Φ⁻¹ = e = Φ⁻¹ * Φ");
    for (alpha, phi) in augmented.iter().zip(&unital) {
        let lhs = alpha
            .neg()
            .exp_right()
            .map(|x| x.conv(&alpha.exp_left().expect("augmented")));
        inverse_shuffle.agree(lhs, Ok(e.clone()), &with_unit);
        let inv = phi.inverse()?;
        inverse.agree(Ok(phi.conv(&inv)), Ok(e.clone()), &with_unit);
        inverse.agree(Ok(inv.conv(phi)), Ok(e.clone()), &with_unit);
    }
    checks.extend([inverse_shuffle.finish(), inverse.finish()]);

    let mut left = Collector::new("left exp/log", "log≺ℰ≺(κ) = κ, ℰ≺log≺(Φ) = Φ");
    let mut right = Collector::new("right exp/log", "log≻ℰ≻(κ) = κ, ℰ≻log≻(Φ) = Φ");
    let mut star = Collector::new("convolution exp/log", "log*exp*(κ) = κ, exp*log*(Φ) = Φ");
    for _ in 0..10 {
        let (kappa, phi) = (corpus.infinitesimal(), corpus.character());
        let back = |f: Result<Functional>| f.map(|x| x.unassumed());
        left.agree(
            back(kappa.exp_left().and_then(|x| x.log_left())),
            Ok(kappa.clone()),
            &with_unit,
        );
        left.agree(
            back(phi.log_left().and_then(|x| x.exp_left())),
            Ok(phi.clone()),
            &with_unit,
        );
        right.agree(
            back(kappa.exp_right().and_then(|x| x.log_right())),
            Ok(kappa.clone()),
            &with_unit,
        );
        right.agree(
            back(phi.log_right().and_then(|x| x.exp_right())),
            Ok(phi.clone()),
            &with_unit,
        );
        star.agree(
            back(kappa.exp_star().and_then(|x| x.log_star())),
            Ok(kappa.clone()),
            &with_unit,
        );
        star.agree(
            back(phi.log_star().and_then(|x| x.exp_star())),
            Ok(phi.clone()),
            &with_unit,
        );
    }
    checks.extend([left.finish(), right.finish(), star.finish()]);

    let mut character = Collector::new(
        "character property",
        "ℰ≺(κ), ℰ≻(κ), exp*(κ) multiplicative over bars",
    );
    for _ in 0..3 {
        let kappa = corpus.infinitesimal();
        for phi in [kappa.exp_left()?, kappa.exp_right()?, kappa.exp_star()?] {
            let raw = phi.unassumed();
            character.push(Check::over(
                character.axiom,
                character.formula,
                &with_unit,
                |b| {
                    let product: Rational = b
                        .parts()
                        .map(|p| raw.eval(&BarWord::from_slice(p)))
                        .product();
                    raw.eval(b) == product
                },
            ));
        }
    }
    checks.push(character.finish());
    Ok(checks)
}

// cumulants

fn cumulants(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let mut corpus = config.corpus(2);
    let distributions: Vec<Distribution> = (0..10).map(|_| corpus.distribution()).collect();
    let words = Word::all_up_to(&two_letters(), n);
    let word_bars: Vec<BarWord> = words.iter().cloned().map(BarWord::from_word).collect();
    let mut checks = Vec::new();

    for kind in CumulantKind::ALL {
        let (axiom, formula) = match kind {
            CumulantKind::Free => ("free oracle", "log≺ matches non-crossing partition sums"),
            CumulantKind::Boolean => ("boolean oracle", "log≻ matches interval partition sums"),
            CumulantKind::Monotone => (
                "monotone oracle",
                "log* matches tree-factorial weighted partition sums",
            ),
        };
        let mut c = Collector::new(axiom, formula);
        for d in &distributions {
            let phi = d.character().with_defects(config.defects);
            let log = kind.log(&phi)?;
            let mut failure = None;
            for w in &words {
                if oracle_moments(|u| log.eval_word(u), kind, w)? != d.moment(w) {
                    failure = Some(w.clone());
                    break;
                }
            }
            c.push(match failure {
                None => Check::ok(axiom, formula, words.len() as u64),
                Some(w) => Check::failed(axiom, formula, w.to_string(), w.degree(), 0),
            });
        }
        checks.push(c.finish());
    }

    let mut round = Collector::new(
        "round trips",
        "from_cumulants ∘ to_cumulants = id for every kind",
    );
    let mut detour = Collector::new(
        "conversion",
        "Magnus conversions equal the moment detour for every kind pair",
    );
    let mut back = Collector::new(
        "conversion round trips",
        "convert(convert(c, A, B), B, A) = c",
    );
    for d in distributions.iter().take(4) {
        for from in CumulantKind::ALL {
            let c = to_cumulants(d, from)?;
            let again = from_cumulants(&c)?;
            round.push(if &again == d {
                Check::ok(round.axiom, round.formula, words.len() as u64)
            } else {
                let w = words
                    .iter()
                    .find(|w| again.moment(w) != d.moment(w))
                    .expect("differ");
                Check::failed(round.axiom, round.formula, w.to_string(), w.degree(), 0)
            });
            for to in CumulantKind::ALL {
                let direct =
                    convert_functional(&c.infinitesimal().with_defects(config.defects), from, to)?;
                let via = to.log(&d.character())?;
                detour.push(agree(
                    detour.axiom,
                    detour.formula,
                    &direct,
                    &via,
                    &word_bars,
                ));
                let there = convert(&c, to)?;
                let home = convert(&there, from)?;
                back.push(if home == c {
                    Check::ok(back.axiom, back.formula, words.len() as u64)
                } else {
                    Check::failed(back.axiom, back.formula, format!("{from}→{to}"), 0, 0)
                });
            }
        }
    }
    checks.extend([round.finish(), detour.finish(), back.finish()]);

    let mut low = Collector::new(
        "low degrees",
        "κ, β, ρ agree with moments in degree 1 and with m₂ − m₁² in degree 2",
    );
    for d in &distributions {
        let maps = CumulantKind::ALL.map(|k| to_cumulants(d, k));
        let maps: Vec<CumulantMap> = maps.into_iter().collect::<Result<_>>()?;
        let mut ok = true;
        for w in words.iter().filter(|w| w.degree() <= 2) {
            let want = if w.degree() == 1 {
                d.moment(w)
            } else {
                let [x, y] = [w.letters()[0], w.letters()[1]];
                d.moment(w) - d.moment(&Word::new([x])) * d.moment(&Word::new([y]))
            };
            ok &= maps.iter().all(|m| m.value(w) == want);
        }
        low.push(if ok {
            Check::ok(low.axiom, low.formula, 1)
        } else {
            Check::failed(low.axiom, low.formula, "degree ≤ 2".into(), 2, 1)
        });
    }
    checks.push(low.finish());

    let mut mseries = Collector::new("moment series", "M = η + M·η");
    for d in &distributions {
        let m = series(d, SeriesKind::M)?;
        let eta = series(d, SeriesKind::Eta)?;
        let rhs = eta.add(&m.mul(&eta));
        mseries.push(series_check(
            mseries.axiom,
            mseries.formula,
            &m,
            &rhs,
            &words,
        ));
    }
    checks.push(mseries.finish());

    let semicircle = univariate(&ints(&[0, 1, 0, 2, 0, 5]));
    let free = to_cumulants(&semicircle, CumulantKind::Free)?;
    checks.push(fixed(
        "semicircle free cumulants",
        "moments (0,1,0,2,0,5) ↦ free cumulants (0,1,0,0,0,0)",
        6,
        &sequence(6, |w| free.value(w)),
        &ints(&[0, 1, 0, 0, 0, 0]),
    ));
    let moments = from_cumulants(&univariate_cumulants(
        CumulantKind::Free,
        &ints(&[0, 1, 0, 0, 0, 0]),
    ))?;
    checks.push(fixed(
        "semicircle moments",
        "free cumulants (0,1,0,0,0,0) ↦ moments (0,1,0,2,0,5)",
        6,
        &sequence(6, |w| moments.moment(w)),
        &ints(&[0, 1, 0, 2, 0, 5]),
    ));
    let boolean = to_cumulants(&semicircle, CumulantKind::Boolean)?;
    checks.push(fixed(
        "semicircle boolean cumulants",
        "moments (0,1,0,2,0,5) ↦ boolean cumulants (0,1,0,1,0,2)",
        6,
        &sequence(6, |w| boolean.value(w)),
        &ints(&[0, 1, 0, 1, 0, 2]),
    ));
    let monotone = to_cumulants(&univariate(&ints(&[0, 1, 0, 2])), CumulantKind::Monotone)?;
    checks.push(fixed(
        "semicircle monotone cumulants",
        "moments (0,1,0,2) ↦ monotone cumulants (0,1,0,1/2)",
        4,
        &sequence(4, |w| monotone.value(w)),
        &[r(0, 1), r(1, 1), r(0, 1), r(1, 2)],
    ));
    let pair = univariate_cumulants(CumulantKind::Boolean, &ints(&[0, 1, 0, 0]));
    let monotone = convert(&pair, CumulantKind::Monotone)?;
    checks.push(fixed(
        "boolean to monotone",
        "boolean cumulants (0,1,0,0) ↦ monotone cumulants (0,1,0,−1/2)",
        4,
        &sequence(4, |w| monotone.value(w)),
        &[r(0, 1), r(1, 1), r(0, 1), r(-1, 2)],
    ));
    let moments = from_cumulants(&univariate_cumulants(
        CumulantKind::Boolean,
        &ints(&[0, 1, 0, 0, 0, 0]),
    ))?;
    checks.push(fixed(
        "boolean pair moments",
        "boolean cumulants (0,1,0,0,0,0) ↦ moments (0,1,0,1,0,1)",
        6,
        &sequence(6, |w| moments.moment(w)),
        &ints(&[0, 1, 0, 1, 0, 1]),
    ));
    Ok(checks)
}

fn series_check(
    axiom: &str,
    formula: &str,
    lhs: &TruncatedSeries,
    rhs: &TruncatedSeries,
    words: &[Word],
) -> Check {
    match words.iter().find(|w| lhs.coeff(w) != rhs.coeff(w)) {
        None => Check::ok(axiom, formula, words.len() as u64),
        Some(w) => Check::failed(axiom, formula, w.to_string(), w.degree(), 0),
    }
}

// Magnus expansion and group laws

fn magnus_suite(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let on = bars_with_unit(n);
    let low = bars_with_unit(n.min(5));
    let lower = bars_with_unit(n.min(4));
    let mut corpus = config.corpus(3);
    let gammas: Vec<Functional> = (0..6).map(|_| corpus.infinitesimal()).collect();
    let mut checks = Vec::new();

    let mut table = BernoulliTable::new();
    let recurrence = (1..=12usize).all(|m| {
        let mut binom = Rational::one();
        let mut acc = Rational::zero();
        for j in 0..=m {
            acc += &binom * &table.get(j);
            binom = binom * Rational::new((m + 1 - j) as i64, (j + 1) as i64);
        }
        acc.is_zero()
    });
    let odd = (1..6).all(|k| table.get(2 * k + 1).is_zero()) && table.get(1) == r(-1, 2);
    checks.push(if recurrence && odd {
        Check::ok(
            "Bernoulli numbers",
            "Σ_{j≤m} C(m+1,j) B_j = 0, B₁ = −1/2, odd B_m = 0",
            12,
        )
    } else {
        Check::failed(
            "Bernoulli numbers",
            "Σ_{j≤m} C(m+1,j) B_j = 0",
            "m ≤ 12".into(),
            0,
            12,
        )
    });

    let mut inverse = Collector::new("Magnus inverse", "W∘Ω′ = Ω′∘W = id");
    let mut log = Collector::new("Magnus logarithm", "Ω′(κ) = log*(ℰ≺(κ))");
    let mut transform = Collector::new("transforming", "ℰ≺(W(γ)) = exp*(γ) = ℰ≻(−W(−γ))");
    for g in &gammas[..3] {
        inverse.agree(
            magnus(g).and_then(|x| magnus_inverse(&x)),
            Ok(g.clone()),
            &on,
        );
        inverse.agree(
            magnus_inverse(g).and_then(|x| magnus(&x)),
            Ok(g.clone()),
            &on,
        );
        log.agree(magnus(g), g.exp_left().and_then(|x| x.log_star()), &on);
        let star = g.exp_star();
        transform.agree(
            magnus_inverse(g).and_then(|x| x.exp_left()),
            star.clone(),
            &on,
        );
        transform.agree(
            magnus_inverse(&g.neg()).and_then(|x| x.neg().exp_right()),
            star,
            &on,
        );
    }
    checks.extend([inverse.finish(), log.finish(), transform.finish()]);

    let mut monotone_mix = Collector::new("monotone from free and boolean", "ρ = Ω′(κ) = −Ω′(−β)");
    let mut free_from_boolean = Collector::new("free from boolean", "κ = W(−Ω′(−β))");
    let mut boolean_from_free = Collector::new("boolean from free", "β = −W(−Ω′(κ))");
    let mut booleanfree = Collector::new("boolean-free", "β = Φ⁻¹ ≻ κ ≺ Φ");
    for _ in 0..3 {
        let phi = corpus.character();
        let kappa = phi.log_left()?;
        let beta = phi.log_right()?;
        let rho = phi.log_star()?;
        monotone_mix.agree(magnus(&kappa), Ok(rho.clone()), &on);
        monotone_mix.agree(magnus(&beta.neg()).map(|x| x.neg()), Ok(rho), &on);
        free_from_boolean.agree(
            magnus(&beta.neg()).and_then(|x| magnus_inverse(&x.neg())),
            Ok(kappa.clone()),
            &on,
        );
        boolean_from_free.agree(
            magnus(&kappa)
                .and_then(|x| magnus_inverse(&x.neg()))
                .map(|x| x.neg()),
            Ok(beta.clone()),
            &on,
        );
        booleanfree.agree(Functional::adjoint(&phi, &kappa), Ok(beta), &on);
    }
    checks.extend([
        monotone_mix.finish(),
        free_from_boolean.finish(),
        boolean_from_free.finish(),
        booleanfree.finish(),
    ]);

    let mut closed = Collector::new(
        "left group law",
        "γ₁ + ℰ≺(γ₁) ≻ γ₂ ≺ ℰ≻(−γ₁) = log≺(ℰ≺(γ₁) * ℰ≺(γ₂))",
    );
    let mut closed_right =
        Collector::new("right group law", "−(−γ₂ # −γ₁) = log≻(ℰ≻(γ₁) * ℰ≻(γ₂))");
    let mut bch_law = Collector::new("BCH transport", "Ω′(γ₁ # γ₂) = BCH(Ω′(γ₁), Ω′(γ₂))");
    let mut bch_sym = Collector::new("BCH symmetry", "BCH(−a, −b) = −BCH(b, a)");
    for pair in gammas.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        closed.agree(group_law_left(a, b), group_law_left_defining(a, b), &low);
        closed_right.agree(group_law_right(a, b), group_law_right_defining(a, b), &low);
        let lhs = group_law_left(a, b).and_then(|x| magnus(&x));
        let rhs = magnus(a).and_then(|x| bch(&x, &magnus(b)?));
        bch_law.agree(lhs, rhs, &low);
        bch_sym.agree(bch(&a.neg(), &b.neg()), bch(b, a).map(|x| x.neg()), &low);
    }
    checks.extend([
        closed.finish(),
        closed_right.finish(),
        bch_law.finish(),
        bch_sym.finish(),
    ]);

    let mut group = Collector::new(
        "group axioms",
        "# associative with unit 0 and inverse −γ; ⊙ associative",
    );
    let zero = Functional::zero();
    let (a, b, c) = (&gammas[0], &gammas[1], &gammas[2]);
    group.agree(
        group_law_left(&group_law_left(a, b)?, c),
        group_law_left(a, &group_law_left(b, c)?),
        &lower,
    );
    group.agree(
        group_law_right(&group_law_right(a, b)?, c),
        group_law_right(a, &group_law_right(b, c)?),
        &lower,
    );
    group.agree(group_law_left(a, &zero), Ok(a.clone()), &lower);
    group.agree(group_law_left(&zero, a), Ok(a.clone()), &lower);
    let inv = a.exp_left()?.inverse()?.log_left()?;
    group.agree(group_law_left(a, &inv), Ok(zero.clone()), &lower);
    checks.push(group.finish());
    Ok(checks)
}

// universal products

fn products(config: &Config) -> Result<Vec<Check>> {
    let mut corpus = config.corpus(4);
    let len = config.max_degree.min(5);
    let mut checks = Vec::new();
    let mut items: Vec<(&str, Collector)> = vec![
        (
            "monotone",
            Collector::new("monotone product", "(Φ₁*Φ₂)(w) = φ₁(Π x ∈ A₁) Π φ₂(y)"),
        ),
        (
            "antimonotone",
            Collector::new("antimonotone product", "(Φ₂*Φ₁)(w) = φ₂(Π y ∈ A₂) Π φ₁(x)"),
        ),
        (
            "free",
            Collector::new(
                "free product",
                "(Φ₁⊞≺Φ₂)(w) by the subset recursion over blocks",
            ),
        ),
        (
            "free recursion",
            Collector::new(
                "free recursion",
                "Φ(w) = −(Φ ≺ (Φ⁻¹ − e))(w) on mixed words",
            ),
        ),
        (
            "boolean",
            Collector::new("boolean product", "(Φ₁⊞≻Φ₂)(w) = Π φ(xᵢ)"),
        ),
    ];
    for _ in 0..4 {
        let x = corpus.univariate(Letter::named("x"));
        let y = corpus.univariate(Letter::named("y"));
        let ctx = LabeledContext::new(&x, &y)?;
        let words = ctx.alternating_words(len);
        for (name, c) in items.iter_mut() {
            let mut failure = None;
            let mut checked = 0;
            for w in &words {
                if *name == "free recursion" && w.degree() < 2 {
                    continue;
                }
                checked += 1;
                let (lhs, rhs) = match *name {
                    "monotone" => (ctx.monotone_product(w)?, ctx.monotone_closed_form(w)?),
                    "antimonotone" => (
                        ctx.antimonotone_product(w)?,
                        ctx.antimonotone_closed_form(w)?,
                    ),
                    "free" => (ctx.free_product(w)?, ctx.free_closed_form(w)?),
                    "free recursion" => (ctx.free_product(w)?, ctx.free_recursion(w)?),
                    _ => (ctx.boolean_product(w)?, ctx.boolean_closed_form(w)?),
                };
                if lhs != rhs {
                    failure = Some(w.clone());
                    break;
                }
            }
            c.push(match failure {
                None => Check::ok(c.axiom, c.formula, checked),
                Some(w) => Check::failed(c.axiom, c.formula, w.to_string(), w.degree(), checked),
            });
        }
    }
    checks.extend(items.into_iter().map(|(_, c)| c.finish()));
    Ok(checks)
}

// additive convolutions

fn convolution(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let on = bars_with_unit(n);
    let mut corpus = config.corpus(5);
    let mut checks = Vec::new();

    let mut left_factor = Collector::new("left factorization", "ℰ≺(γ₁) * ℰ≺(γ₂^{γ₁}) = ℰ≺(γ₁+γ₂)");
    let mut right_factor =
        Collector::new("right factorization", "ℰ≻(γ₁^{−γ₂}) * ℰ≻(γ₂) = ℰ≻(γ₁+γ₂)");
    for _ in 0..3 {
        let (a, b) = (corpus.infinitesimal(), corpus.infinitesimal());
        let sum = a.add(&b);
        left_factor.agree(
            factorize(&a, &b).map(|(x, y)| x.conv(&y)),
            sum.exp_left(),
            &on,
        );
        right_factor.agree(
            factorize_right(&a, &b).map(|(x, y)| x.conv(&y)),
            sum.exp_right(),
            &on,
        );
    }
    checks.extend([left_factor.finish(), right_factor.finish()]);

    let mut left_lin = Collector::new("left linearisation", "log≺(Φ₁ ⊞≺ Φ₂) = log≺Φ₁ + log≺Φ₂");
    let mut right_lin = Collector::new("right linearisation", "log≻(Φ₁ ⊞≻ Φ₂) = log≻Φ₁ + log≻Φ₂");
    let mut comm = Collector::new("commutativity", "Φ₁ ⊞≺ Φ₂ = Φ₂ ⊞≺ Φ₁, Φ₁ ⊞≻ Φ₂ = Φ₂ ⊞≻ Φ₁");
    let mut assoc = Collector::new(
        "associativity",
        "(Φ₁ ⊞ Φ₂) ⊞ Φ₃ = Φ₁ ⊞ (Φ₂ ⊞ Φ₃) for ⊞≺ and ⊞≻",
    );
    let mut unit = Collector::new("unit", "Φ ⊞≺ e = Φ = Φ ⊞≻ e");
    let mut powers = Collector::new("power laws", "Φ^{⊞s} ⊞ Φ^{⊞t} = Φ^{⊞(s+t)} on both sides");
    let e = Functional::unit();
    for _ in 0..3 {
        let (p, q, s) = (corpus.character(), corpus.character(), corpus.character());
        left_lin.agree(
            free_conv(&p, &q)?.log_left(),
            Ok(p.log_left()?.add(&q.log_left()?)),
            &on,
        );
        right_lin.agree(
            boolean_conv(&p, &q)?.log_right(),
            Ok(p.log_right()?.add(&q.log_right()?)),
            &on,
        );
        comm.agree(free_conv(&p, &q), free_conv(&q, &p), &on);
        comm.agree(boolean_conv(&p, &q), boolean_conv(&q, &p), &on);
        assoc.agree(
            free_conv(&free_conv(&p, &q)?, &s),
            free_conv(&p, &free_conv(&q, &s)?),
            &on,
        );
        assoc.agree(
            boolean_conv(&boolean_conv(&p, &q)?, &s),
            boolean_conv(&p, &boolean_conv(&q, &s)?),
            &on,
        );
        unit.agree(free_conv(&p, &e), Ok(p.clone()), &on);
        unit.agree(boolean_conv(&p, &e), Ok(p.clone()), &on);
        let (a, b) = (corpus.rational(), corpus.rational());
        let sum = &a + &b;
        for side in [HalfSide::Left, HalfSide::Right] {
            let conv = if side == HalfSide::Left {
                free_conv
            } else {
                boolean_conv
            };
            let lhs = conv(&p.hs_power(&a, side)?, &p.hs_power(&b, side)?);
            powers.agree(lhs, p.hs_power(&sum, side), &on);
            powers.agree(p.hs_power(&Rational::one(), side), Ok(p.clone()), &on);
            powers.agree(p.hs_power(&Rational::zero(), side), Ok(e.clone()), &on);
        }
    }
    checks.extend([
        left_lin.finish(),
        right_lin.finish(),
        comm.finish(),
        assoc.finish(),
        unit.finish(),
        powers.finish(),
    ]);

    let semicircle = univariate(&ints(&[0, 1, 0, 2]));
    let doubled = crate::products::convolve(
        &semicircle,
        &semicircle,
        crate::products::ConvolutionKind::Free,
    )?;
    checks.push(fixed(
        "semicircle square",
        "semicircle ⊞≺ semicircle has moments (0,2,0,8)",
        4,
        &sequence(4, |w| doubled.moment(w)),
        &ints(&[0, 2, 0, 8]),
    ));
    let power = semicircle.character().hs_power(&r(2, 1), HalfSide::Left)?;
    checks.push(fixed(
        "semicircle power",
        "semicircle^{⊞≺2} has moments (0,2,0,8)",
        4,
        &sequence(4, |w| power.eval_word(w)),
        &ints(&[0, 2, 0, 8]),
    ));
    Ok(checks)
}

// Bercovici–Pata

fn bercovici_pata(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let on = bars_with_unit(n);
    let words = Word::all_up_to(&two_letters(), n);
    let mut corpus = config.corpus(6);
    let mut checks = Vec::new();
    let characters: Vec<Functional> = (0..3).map(|_| corpus.character()).collect();

    let mut self_sub = Collector::new("bp subordination", "B(Φ) = Φ ⊳ Φ");
    let mut inverse = Collector::new("bp inverse", "ℰ≻∘log≺ inverts B on both sides");
    let mut endpoints = Collector::new("bp endpoints", "B₀ = id, B₁ = B");
    let mut forms = Collector::new(
        "bp closed forms",
        "ℰ≺(κ^{tκ}) = (Φ^{⊞≺(1+t)})^{⊞≻1/(1+t)} = ℰ≺(t·log≻Φ)^{⊞≻1/t}",
    );
    let mut semigroup = Collector::new("bp semigroup", "B_t ∘ B_s = B_{t+s}");
    for phi in &characters {
        let image = bp(phi)?;
        self_sub.agree(
            Ok(image.clone()),
            subordinate(phi, phi, HalfSide::Left),
            &on,
        );
        inverse.agree(bp_inverse(&image), Ok(phi.clone()), &on);
        inverse.agree(bp(&bp_inverse(phi)?), Ok(phi.clone()), &on);
        endpoints.agree(bp_t(phi, &Rational::zero()), Ok(phi.clone()), &on);
        endpoints.agree(bp_t(phi, &Rational::one()), Ok(image), &on);
        for t in [r(1, 2), r(2, 1)] {
            let main = bp_t(phi, &t);
            forms.agree(main.clone(), bp_t_powers(phi, &t), &on);
            forms.agree(main, bp_t_boolean(phi, &t), &on);
        }
    }
    for (t, s) in [(r(1, 2), r(1, 2)), (r(1, 1), r(1, 1)), (r(1, 3), r(2, 3))] {
        let phi = &characters[0];
        semigroup.agree(bp_t(&bp_t(phi, &s)?, &t), bp_t(phi, &(&t + &s)), &on);
    }
    checks.extend([
        self_sub.finish(),
        inverse.finish(),
        endpoints.finish(),
        forms.finish(),
        semigroup.finish(),
    ]);

    let mut transform = Collector::new("bp transform", "R_{B(μ)} = η_μ");
    for _ in 0..3 {
        let d = corpus.distribution();
        let image = Distribution::from_character(
            &bp(&d.character().with_defects(config.defects))?,
            d.letters().to_vec(),
            n,
        )?;
        let lhs = series(&image, SeriesKind::R)?;
        let rhs = series(&d, SeriesKind::Eta)?;
        transform.push(series_check(
            transform.axiom,
            transform.formula,
            &lhs,
            &rhs,
            &words,
        ));
    }
    checks.push(transform.finish());

    let bernoulli = univariate(&ints(&[0, 1, 0, 1, 0, 1]));
    let image = crate::products::bp_distribution(&bernoulli, &Rational::one())?;
    checks.push(fixed(
        "Bernoulli to semicircle",
        "B maps moments (0,1,0,1,0,1) to (0,1,0,2,0,5)",
        6,
        &sequence(6, |w| image.moment(w)),
        &ints(&[0, 1, 0, 2, 0, 5]),
    ));
    Ok(checks)
}

// subordination and adjoint actions

fn subordination(config: &Config) -> Result<Vec<Check>> {
    let n = config.max_degree;
    let on = bars_with_unit(n);
    let words = Word::all_up_to(&two_letters(), n);
    let mut corpus = config.corpus(7);
    let mut checks = Vec::new();
    let left = HalfSide::Left;
    let right = HalfSide::Right;

    let mut ad = Collector::new(
        "ad closed form",
        "Σ_{1,n∈S} γ₂(a_S) ℰ≺(γ₁)(a_{J^S}) = ℰ≺(γ₁)⁻¹ ≻ γ₂ ≺ ℰ≺(γ₁)",
    );
    let mut ad_self = Collector::new("ad self", "γ^γ = log≻(ℰ≺(γ))");
    let mut twisted_exp = Collector::new(
        "twisted exponential",
        "ℰ≺(γ₂^{γ₁}) = e + ℰ≺(γ₁)⁻¹ ≻ γ₂ ≺ ℰ≺(γ₁+γ₂)",
    );
    let mut compat = Collector::new(
        "adjoint compatibility",
        "Φ⁻¹≻(μ≻ν)≺Φ = (Φ⁻¹*μ*Φ)≻(Φ⁻¹≻ν≺Φ), Φ⁻¹≻(μ≺ν)≺Φ = (Φ⁻¹≻μ≺Φ)≺(Φ⁻¹*ν*Φ)",
    );
    let mut product_change = Collector::new(
        "product change",
        "ℰ≺(γ₁+γ₂) = (ℰ≺γ₁ ⊳ ℰ≺γ₂) ⊞≻ (ℰ≺γ₂ ⊳ ℰ≺γ₁)",
    );
    let mut log_additive = Collector::new(
        "log additivity",
        "log≻ℰ≺(γ₁+γ₂) = log≻ℰ≺(γ₁^{γ₂}) + log≻ℰ≺(γ₂^{γ₁})",
    );
    for _ in 0..4 {
        let (g1, g2) = (corpus.infinitesimal(), corpus.infinitesimal());
        ad.agree(
            Functional::ad_left(&g1, &g2),
            Functional::ad_left_composed(&g1, &g2),
            &on,
        );
        ad_self.agree(
            Functional::ad_left(&g1, &g1),
            g1.exp_left()?.log_right(),
            &on,
        );
        let exp1 = g1.exp_left()?;
        let sum = g1.add(&g2);
        let rhs =
            Functional::unit().add(&exp1.inverse()?.hs_right(&g2)?.hs_left(&sum.exp_left()?)?);
        twisted_exp.agree(Functional::ad_left(&g1, &g2)?.exp_left(), Ok(rhs), &on);

        let phi = corpus.character();
        let inv = phi.inverse()?;
        let conj = |f: &Functional| inv.conv(f).conv(&phi);
        let adj = |f: &Functional| Functional::adjoint(&phi, f);
        compat.agree(adj(&g1.hs_right(&g2)?), conj(&g1).hs_right(&adj(&g2)?), &on);
        compat.agree(adj(&g1.hs_left(&g2)?), adj(&g1)?.hs_left(&conj(&g2)), &on);

        let (e1, e2) = (g1.exp_left()?, g2.exp_left()?);
        let rhs = boolean_conv(&subordinate(&e1, &e2, left)?, &subordinate(&e2, &e1, left)?);
        product_change.agree(sum.exp_left(), rhs, &on);
        let lhs = sum.exp_left()?.log_right();
        let rhs = Functional::ad_left(&g2, &g1)?
            .exp_left()?
            .log_right()?
            .add(&Functional::ad_left(&g1, &g2)?.exp_left()?.log_right()?);
        log_additive.agree(lhs, Ok(rhs), &on);
    }
    checks.extend([
        ad.finish(),
        ad_self.finish(),
        twisted_exp.finish(),
        compat.finish(),
        product_change.finish(),
        log_additive.finish(),
    ]);

    let mut decomposition = Collector::new(
        "left decomposition",
        "Φ₁ ⊞≺ Φ₂ = Φ₁ * (Φ₂ ⊳ Φ₁) = Φ₂ * (Φ₁ ⊳ Φ₂)",
    );
    let mut decomposition_right = Collector::new(
        "right decomposition",
        "Φ₁ ⊞≻ Φ₂ = (Φ₂ ⊲ Φ₁) * Φ₂ = (Φ₁ ⊲ Φ₂) * Φ₁",
    );
    let mut distributivity =
        Collector::new("distributivity", "(Φ₁ ⊞≺ Φ₂) ⊳ Φ₃ = (Φ₁ ⊳ Φ₃) ⊞≺ (Φ₂ ⊳ Φ₃)");
    let mut eta = Collector::new("boolean log additivity", "η_{μ⊞ν} = η_{μ⊳ν} + η_{ν⊳μ}");
    for _ in 0..3 {
        let (p, q, s) = (corpus.character(), corpus.character(), corpus.character());
        let sum = free_conv(&p, &q)?;
        decomposition.agree(
            Ok(sum.clone()),
            Ok(p.conv(&subordinate(&q, &p, left)?)),
            &on,
        );
        decomposition.agree(
            Ok(sum.clone()),
            Ok(q.conv(&subordinate(&p, &q, left)?)),
            &on,
        );
        let bsum = boolean_conv(&p, &q)?;
        decomposition_right.agree(
            Ok(bsum.clone()),
            Ok(subordinate(&q, &p, right)?.conv(&q)),
            &on,
        );
        decomposition_right.agree(Ok(bsum), Ok(subordinate(&p, &q, right)?.conv(&p)), &on);
        let lhs = subordinate(&sum, &s, left);
        let rhs = free_conv(&subordinate(&p, &s, left)?, &subordinate(&q, &s, left)?);
        distributivity.agree(lhs, rhs, &on);

        let letters = two_letters();
        let dist = |f: &Functional| Distribution::from_character(f, letters.clone(), n);
        let lhs = series(&dist(&sum)?, SeriesKind::Eta)?;
        let rhs = series(&dist(&subordinate(&p, &q, left)?)?, SeriesKind::Eta)?.add(&series(
            &dist(&subordinate(&q, &p, left)?)?,
            SeriesKind::Eta,
        )?);
        eta.push(series_check(eta.axiom, eta.formula, &lhs, &rhs, &words));
    }
    checks.extend([
        decomposition.finish(),
        decomposition_right.finish(),
        distributivity.finish(),
        eta.finish(),
    ]);
    Ok(checks)
}

// mutation sensitivity

const MUTATION_DEGREE: usize = 4;

/// Probes always run at [`MUTATION_DEGREE`], whatever the configured degree.
fn mutation(config: &Config) -> Result<Vec<Check>> {
    let degree = MUTATION_DEGREE;
    let probes = [
        Suite::Coalgebra,
        Suite::Magnus,
        Suite::Subordination,
        Suite::Shuffle,
    ];
    let defects = [
        (
            "drop left singleton",
            "dropping the S = {1} term of Δ≺⁺ is detected",
            Defects {
                drop_left_singleton: true,
                ..Defects::NONE
            },
        ),
        (
            "skip second Bernoulli",
            "dropping the B₂ term of Ω′ is detected",
            Defects {
                skip_second_bernoulli: true,
                ..Defects::NONE
            },
        ),
        (
            "flip adjoint sign",
            "using ℰ≺(−γ₁) in the ad closed form is detected",
            Defects {
                flip_adjoint_sign: true,
                ..Defects::NONE
            },
        ),
    ];
    let mut checks = Vec::new();
    for (axiom, formula, defect) in defects {
        let probe = Config {
            max_degree: degree,
            seed: config.seed,
            defects: defect,
        };
        let mut caught = None;
        let mut checked = 0;
        for suite in probes {
            let report = run(suite, &probe)?;
            checked += 1;
            let hit = report
                .failures()
                .find(|c| c.witness_degree.is_some_and(|d| d <= degree))
                .map(|c| {
                    let witness = c.witness.clone().unwrap_or_default();
                    (format!("{suite}/{}: {witness}", c.axiom), c.witness_degree)
                });
            if hit.is_some() {
                caught = hit;
                break;
            }
        }
        checks.push(match caught {
            Some((witness, witness_degree)) => Check {
                axiom: axiom.to_string(),
                formula: formula.to_string(),
                status: Status::Pass,
                witness: Some(witness),
                witness_degree,
                checked,
            },
            None => Check::failed(axiom, formula, "not detected".into(), degree, checked),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn degree_bounds() {
        assert!(matches!(
            run(Suite::Shuffle, &Config::new(0, 1)),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            run(Suite::Shuffle, &Config::new(9, 1)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn small_suites_pass() {
        let config = Config::new(3, 11);
        for s in Suite::ALL {
            let report = run(s, &config).unwrap();
            assert!(
                report.passed(),
                "{s}: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn report_round_trip() {
        let report = run_suites(&[Suite::Coalgebra, Suite::Products], &Config::new(2, 5)).unwrap();
        let text = report.to_json();
        assert_eq!(Report::from_json(&text).unwrap().to_json(), text);
        assert!(report.passed);
    }
}
