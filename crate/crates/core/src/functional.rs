//! Linear forms on `T̄(T(A))` and the operations of the shuffle calculus.
//!
//! A [`Functional`] is an immutable expression tree. Each node memoizes its
//! values by bar word, and every recursive operator is evaluated by a degree
//! recursion whose right-hand side only touches strictly smaller arguments of
//! the node being defined, so evaluation always terminates.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use parking_lot::{Mutex, RwLock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHasher};

use crate::algebra::{BarWord, Word};
use crate::coproduct::{Defects, HalfSide, Splits};
use crate::error::{Error, Result};
use crate::magnus::magnus_coefficient;
use crate::rational::Rational;

/// What is known structurally about a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// unital and multiplicative over bars
    Character,
    /// zero on the unit and on every bar word with two or more components
    Infinitesimal,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SeriesKind {
    ExpStar,
    LogStar,
    MagnusInverse,
}

struct Series {
    kind: SeriesKind,
    base: Functional,
    terms: Mutex<Vec<Functional>>,
}

enum Op {
    Unit,
    Moments(FxHashMap<Word, Rational>),
    Values(FxHashMap<Word, Rational>),
    Random {
        seed: u64,
        on_unit: Rational,
    },
    Linear(Vec<(Rational, Functional)>),
    Conv(Functional, Functional),
    HalfLeft(Functional, Functional),
    HalfRight(Functional, Functional),
    Inverse(Functional),
    ExpLeft(Functional),
    ExpRight(Functional),
    Series(Series),
    Magnus {
        base: Functional,
        chain: RwLock<FxHashMap<(usize, BarWord), Rational>>,
    },
    AdLeft {
        acting: Functional,
        target: Functional,
        exp: OnceLock<Functional>,
    },
}

struct Node {
    op: Op,
    kind: Kind,
    /// `kind` may be used to short-cut evaluation
    trusted: bool,
    defects: Defects,
    memo: RwLock<FxHashMap<BarWord, Rational>>,
}

/// A linear form on the double tensor algebra with exact rational values.
#[derive(Clone)]
pub struct Functional(Arc<Node>);

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.0.op {
            Op::Unit => "unit",
            Op::Moments(_) => "character",
            Op::Values(_) => "infinitesimal",
            Op::Random { .. } => "random",
            Op::Linear(_) => "linear",
            Op::Conv(..) => "conv",
            Op::HalfLeft(..) => "half-left",
            Op::HalfRight(..) => "half-right",
            Op::Inverse(_) => "inverse",
            Op::ExpLeft(_) => "exp-left",
            Op::ExpRight(_) => "exp-right",
            Op::Series(s) => match s.kind {
                SeriesKind::ExpStar => "exp-star",
                SeriesKind::LogStar => "log-star",
                SeriesKind::MagnusInverse => "magnus-inverse",
            },
            Op::Magnus { .. } => "magnus",
            Op::AdLeft { .. } => "ad-left",
        };
        write!(f, "Functional({name}, {:?})", self.0.kind)
    }
}

fn unit_value(b: &BarWord) -> Rational {
    if b.is_unit() {
        Rational::one()
    } else {
        Rational::zero()
    }
}

impl Functional {
    fn build(op: Op, kind: Kind, operands: &[&Functional]) -> Functional {
        let trusted = operands.iter().all(|f| f.0.trusted);
        let defects = operands
            .iter()
            .fold(Defects::NONE, |d, f| d.union(f.0.defects));
        Functional(Arc::new(Node {
            op,
            kind,
            trusted,
            defects,
            memo: RwLock::new(FxHashMap::default()),
        }))
    }

    /// The counit `e`: 1 on the empty bar word, 0 elsewhere.
    pub fn unit() -> Functional {
        Functional::build(Op::Unit, Kind::Character, &[])
    }

    pub fn zero() -> Functional {
        Functional::build(Op::Linear(Vec::new()), Kind::Infinitesimal, &[])
    }

    /// The character extending a moment map multiplicatively over bars.
    ///
    /// Missing words have moment 0; an entry for the empty word is ignored.
    pub fn character(moments: impl IntoIterator<Item = (Word, Rational)>) -> Functional {
        let map = moments
            .into_iter()
            .filter(|(w, c)| !w.is_empty() && !c.is_zero())
            .collect();
        Functional::build(Op::Moments(map), Kind::Character, &[])
    }

    /// The infinitesimal character with the given values on words.
    pub fn infinitesimal(values: impl IntoIterator<Item = (Word, Rational)>) -> Functional {
        let map = values
            .into_iter()
            .filter(|(w, c)| !w.is_empty() && !c.is_zero())
            .collect();
        Functional::build(Op::Values(map), Kind::Infinitesimal, &[])
    }

    /// A structureless linear form with small pseudo-random values on every
    /// nonempty bar word and `on_unit` on the empty one.
    pub fn random(seed: u64, on_unit: Rational) -> Functional {
        Functional::build(Op::Random { seed, on_unit }, Kind::General, &[])
    }

    pub fn kind(&self) -> Kind {
        self.0.kind
    }

    pub fn defects(&self) -> Defects {
        self.0.defects
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.0.op, Op::Unit)
    }

    pub fn eval_word(&self, w: &Word) -> Rational {
        self.eval(&BarWord::from_word(w.clone()))
    }

    pub fn eval(&self, b: &BarWord) -> Rational {
        let node = &*self.0;
        if node.trusted {
            match node.kind {
                Kind::Infinitesimal if b.is_unit() || b.bar_len() > 1 => return Rational::zero(),
                Kind::Character if b.is_unit() => return Rational::one(),
                Kind::Character if b.bar_len() > 1 => {
                    let mut acc = Rational::one();
                    for part in b.parts() {
                        let v = self.eval(&BarWord::from_slice(part));
                        if v.is_zero() {
                            return v;
                        }
                        acc *= &v;
                    }
                    return acc;
                }
                _ => {}
            }
        }
        if matches!(node.op, Op::Unit | Op::Moments(_) | Op::Values(_)) {
            return self.compute(b);
        }
        if let Some(v) = node.memo.read().get(b) {
            return v.clone();
        }
        let v = self.compute(b);
        node.memo.write().insert(b.clone(), v.clone());
        v
    }

    fn compute(&self, b: &BarWord) -> Rational {
        let defects = self.0.defects;
        match &self.0.op {
            Op::Unit => unit_value(b),
            Op::Moments(map) => {
                let mut acc = Rational::one();
                for part in b.parts() {
                    match map.get(part) {
                        Some(v) => acc *= v,
                        None => return Rational::zero(),
                    }
                }
                acc
            }
            Op::Values(map) => match b.bar_len() {
                1 => map.get(b.letters()).cloned().unwrap_or_default(),
                _ => Rational::zero(),
            },
            Op::Random { seed, on_unit } => {
                if b.is_unit() {
                    return on_unit.clone();
                }
                let mut h = FxHasher::default();
                seed.hash(&mut h);
                b.to_string().hash(&mut h);
                let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
                Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=3))
            }
            Op::Linear(terms) => terms
                .iter()
                .map(|(c, f)| {
                    let v = f.eval(b);
                    if v.is_zero() {
                        v
                    } else {
                        c * &v
                    }
                })
                .sum(),
            Op::Conv(f, g) => split_sum(b, HalfSide::Full, defects, f, g),
            Op::HalfLeft(f, g) => split_sum(b, HalfSide::Left, defects, f, g),
            Op::HalfRight(f, g) => split_sum(b, HalfSide::Right, defects, f, g),
            Op::Inverse(phi) => {
                if b.is_unit() {
                    return Rational::one();
                }
                let mut acc = Rational::zero();
                for (l, r) in Splits::new(b, HalfSide::Full, defects) {
                    if l.is_unit() {
                        continue;
                    }
                    let x = phi.eval(&l);
                    if !x.is_zero() {
                        acc -= x * self.eval(&r);
                    }
                }
                acc
            }
            Op::ExpLeft(alpha) => {
                unit_value(b) + split_sum(b, HalfSide::Left, defects, alpha, self)
            }
            Op::ExpRight(alpha) => {
                unit_value(b) + split_sum(b, HalfSide::Right, defects, self, alpha)
            }
            Op::Series(series) => series.eval(b),
            Op::Magnus { base, chain } => {
                let d = b.degree();
                let mut acc = Rational::zero();
                for m in 0..d.max(1) {
                    if m == 2 && defects.skip_second_bernoulli {
                        continue;
                    }
                    let c = magnus_coefficient(m);
                    if c.is_zero() {
                        continue;
                    }
                    let v = self.magnus_chain(base, chain, m, b);
                    if !v.is_zero() {
                        acc += c * v;
                    }
                }
                acc
            }
            Op::AdLeft {
                acting,
                target,
                exp,
            } => {
                if b.bar_len() != 1 {
                    return Rational::zero();
                }
                let exp = exp.get_or_init(|| {
                    let g = if defects.flip_adjoint_sign {
                        acting.neg()
                    } else {
                        acting.clone()
                    };
                    Functional::build(Op::ExpLeft(g.clone()), Kind::Character, &[&g])
                });
                let n = b.degree();
                let ends = 1u64 | (1u64 << (n - 1));
                let mut acc = Rational::zero();
                for inner in 0..(1u64 << n) {
                    if inner & ends != ends {
                        continue;
                    }
                    let x = target.eval(&b.restrict_to(inner));
                    if !x.is_zero() {
                        acc += x * exp.eval(&b.complement_of(inner));
                    }
                }
                acc
            }
        }
    }

    /// `L^m_{Ω′▷}(α)` evaluated at `b`, where `self` is `Ω′`.
    fn magnus_chain(
        &self,
        base: &Functional,
        memo: &RwLock<FxHashMap<(usize, BarWord), Rational>>,
        m: usize,
        b: &BarWord,
    ) -> Rational {
        if m == 0 {
            return base.eval(b);
        }
        let vanishes_on_bars = self.0.trusted && self.0.kind == Kind::Infinitesimal;
        if b.degree() <= m || (vanishes_on_bars && b.bar_len() > 1) {
            return Rational::zero();
        }
        let key = (m, b.clone());
        if let Some(v) = memo.read().get(&key) {
            return v.clone();
        }
        let defects = self.0.defects;
        let mut acc = Rational::zero();
        for (l, r) in Splits::new(b, HalfSide::Right, defects) {
            if l.is_unit() {
                continue;
            }
            let x = self.eval(&l);
            if !x.is_zero() {
                acc += x * self.magnus_chain(base, memo, m - 1, &r);
            }
        }
        for (l, r) in Splits::new(b, HalfSide::Left, defects) {
            if r.is_unit() {
                continue;
            }
            let y = self.eval(&r);
            if !y.is_zero() {
                acc -= self.magnus_chain(base, memo, m - 1, &l) * y;
            }
        }
        memo.write().insert(key, acc.clone());
        acc
    }

    /// Rebuilds the tree, optionally disabling kind short-cuts and adding defects.
    fn remake(
        &self,
        trusted: bool,
        extra: Defects,
        seen: &mut FxHashMap<usize, Functional>,
    ) -> Functional {
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(f) = seen.get(&key) {
            return f.clone();
        }
        let mut go = |f: &Functional| f.remake(trusted, extra, seen);
        let op = match &self.0.op {
            Op::Unit => Op::Unit,
            Op::Moments(m) => Op::Moments(m.clone()),
            Op::Values(m) => Op::Values(m.clone()),
            Op::Random { seed, on_unit } => Op::Random {
                seed: *seed,
                on_unit: on_unit.clone(),
            },
            Op::Linear(terms) => {
                Op::Linear(terms.iter().map(|(c, f)| (c.clone(), go(f))).collect())
            }
            Op::Conv(f, g) => Op::Conv(go(f), go(g)),
            Op::HalfLeft(f, g) => Op::HalfLeft(go(f), go(g)),
            Op::HalfRight(f, g) => Op::HalfRight(go(f), go(g)),
            Op::Inverse(f) => Op::Inverse(go(f)),
            Op::ExpLeft(f) => Op::ExpLeft(go(f)),
            Op::ExpRight(f) => Op::ExpRight(go(f)),
            Op::Series(s) => Op::Series(Series::new(s.kind, go(&s.base))),
            Op::Magnus { base, .. } => Op::Magnus {
                base: go(base),
                chain: Default::default(),
            },
            Op::AdLeft { acting, target, .. } => Op::AdLeft {
                acting: go(acting),
                target: go(target),
                exp: OnceLock::new(),
            },
        };
        let out = Functional(Arc::new(Node {
            op,
            kind: self.0.kind,
            trusted: trusted && self.0.trusted,
            defects: self.0.defects.union(extra),
            memo: RwLock::new(FxHashMap::default()),
        }));
        seen.insert(key, out.clone());
        out
    }

    /// The same functional with every structural short-cut disabled, so that
    /// character and infinitesimal properties are recomputed rather than assumed.
    pub fn unassumed(&self) -> Functional {
        self.remake(false, Defects::NONE, &mut FxHashMap::default())
    }

    /// The same functional with the given defects injected at every node.
    pub fn with_defects(&self, defects: Defects) -> Functional {
        if !defects.any() {
            return self.clone();
        }
        self.remake(true, defects, &mut FxHashMap::default())
    }

    // linear structure

    pub fn linear(terms: Vec<(Rational, Functional)>) -> Functional {
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        let kind = if terms.iter().all(|(_, f)| f.kind() == Kind::Infinitesimal) {
            Kind::Infinitesimal
        } else {
            Kind::General
        };
        let operands: Vec<Functional> = terms.iter().map(|(_, f)| f.clone()).collect();
        let operands: Vec<&Functional> = operands.iter().collect();
        Functional::build(Op::Linear(terms), kind, &operands)
    }

    pub fn add(&self, other: &Functional) -> Functional {
        Functional::linear(vec![
            (Rational::one(), self.clone()),
            (Rational::one(), other.clone()),
        ])
    }

    pub fn sub(&self, other: &Functional) -> Functional {
        Functional::linear(vec![
            (Rational::one(), self.clone()),
            (-Rational::one(), other.clone()),
        ])
    }

    pub fn scale(&self, s: &Rational) -> Functional {
        Functional::linear(vec![(s.clone(), self.clone())])
    }

    pub fn neg(&self) -> Functional {
        self.scale(&-Rational::one())
    }

    fn value_on_unit(&self) -> Rational {
        self.eval(&BarWord::unit())
    }

    fn require_unital(&self, what: &str) -> Result<()> {
        let v = self.value_on_unit();
        if v.is_one() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} needs value 1 on the empty bar word, found {v}"
            )))
        }
    }

    fn require_augmented(&self, what: &str) -> Result<()> {
        let v = self.value_on_unit();
        if v.is_zero() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} needs value 0 on the empty bar word, found {v}"
            )))
        }
    }

    pub(crate) fn require_infinitesimal(&self, what: &str) -> Result<()> {
        self.require_augmented(what)?;
        if self.kind() != Kind::Infinitesimal {
            return Err(Error::domain(format!(
                "{what} needs an infinitesimal character"
            )));
        }
        Ok(())
    }

    pub(crate) fn require_character(&self, what: &str) -> Result<()> {
        self.require_unital(what)?;
        if self.kind() != Kind::Character {
            return Err(Error::domain(format!("{what} needs a character")));
        }
        Ok(())
    }

    // products

    /// `(f*g)(b) = Σ f(b⁽¹⁾) g(b⁽²⁾)` over the full coproduct.
    pub fn conv(&self, other: &Functional) -> Functional {
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }
        let kind = match (self.kind(), other.kind()) {
            (Kind::Character, Kind::Character) => Kind::Character,
            _ => Kind::General,
        };
        Functional::build(Op::Conv(self.clone(), other.clone()), kind, &[self, other])
    }

    /// `f ≺ g` over the left half-coproduct, zero on the empty bar word.
    pub fn hs_left(&self, other: &Functional) -> Result<Functional> {
        if self.is_unit() && other.is_unit() {
            return Err(Error::domain("e ≺ e is undefined"));
        }
        Ok(self.half_left(other, Kind::General))
    }

    /// `f ≻ g` over the right half-coproduct, zero on the empty bar word.
    pub fn hs_right(&self, other: &Functional) -> Result<Functional> {
        if self.is_unit() && other.is_unit() {
            return Err(Error::domain("e ≻ e is undefined"));
        }
        Ok(self.half_right(other, Kind::General))
    }

    fn half_left(&self, other: &Functional, kind: Kind) -> Functional {
        Functional::build(
            Op::HalfLeft(self.clone(), other.clone()),
            kind,
            &[self, other],
        )
    }

    fn half_right(&self, other: &Functional, kind: Kind) -> Functional {
        Functional::build(
            Op::HalfRight(self.clone(), other.clone()),
            kind,
            &[self, other],
        )
    }

    /// The pre-Lie product `f ▷ g = f ≻ g − g ≺ f`.
    pub fn prelie(&self, other: &Functional) -> Result<Functional> {
        self.require_augmented("pre-Lie product")?;
        other.require_augmented("pre-Lie product")?;
        Ok(self.prelie_unchecked(other))
    }

    pub(crate) fn prelie_unchecked(&self, other: &Functional) -> Functional {
        let kind = if self.kind() == Kind::Infinitesimal && other.kind() == Kind::Infinitesimal {
            Kind::Infinitesimal
        } else {
            Kind::General
        };
        let terms = vec![
            (Rational::one(), self.half_right(other, Kind::General)),
            (-Rational::one(), other.half_left(self, Kind::General)),
        ];
        let lin = Functional::linear(terms);
        if kind == lin.kind() {
            lin
        } else {
            lin.with_kind(kind)
        }
    }

    fn with_kind(&self, kind: Kind) -> Functional {
        match &self.0.op {
            Op::Linear(terms) => {
                let operands: Vec<&Functional> = terms.iter().map(|(_, f)| f).collect();
                Functional::build(Op::Linear(terms.clone()), kind, &operands)
            }
            _ => Functional::build(
                Op::Linear(vec![(Rational::one(), self.clone())]),
                kind,
                &[self],
            ),
        }
    }

    // inverses, exponentials and logarithms

    /// The convolution inverse `Φ⁻¹`, given by the recursion
    /// `Φ⁻¹(b) = −Σ_{b⁽¹⁾ ≠ 1} Φ(b⁽¹⁾) Φ⁻¹(b⁽²⁾)`.
    pub fn inverse(&self) -> Result<Functional> {
        let v = self.value_on_unit();
        if !v.is_one() {
            return Err(Error::NotInvertible(v.to_string()));
        }
        if self.is_unit() {
            return Ok(self.clone());
        }
        Ok(self.inverse_unchecked())
    }

    fn inverse_unchecked(&self) -> Functional {
        let kind = match self.kind() {
            Kind::Character => Kind::Character,
            _ => Kind::General,
        };
        Functional::build(Op::Inverse(self.clone()), kind, &[self])
    }

    /// The unique solution of `Φ = e + α ≺ Φ`.
    pub fn exp_left(&self) -> Result<Functional> {
        self.require_augmented("left half-shuffle exponential")?;
        Ok(self.exp_left_unchecked())
    }

    pub(crate) fn exp_left_unchecked(&self) -> Functional {
        Functional::build(Op::ExpLeft(self.clone()), self.exp_kind(), &[self])
    }

    /// The unique solution of `Φ = e + Φ ≻ α`.
    pub fn exp_right(&self) -> Result<Functional> {
        self.require_augmented("right half-shuffle exponential")?;
        Ok(self.exp_right_unchecked())
    }

    pub(crate) fn exp_right_unchecked(&self) -> Functional {
        Functional::build(Op::ExpRight(self.clone()), self.exp_kind(), &[self])
    }

    fn exp_kind(&self) -> Kind {
        match self.kind() {
            Kind::Infinitesimal => Kind::Character,
            _ => Kind::General,
        }
    }

    fn log_kind(&self) -> Kind {
        match self.kind() {
            Kind::Character => Kind::Infinitesimal,
            _ => Kind::General,
        }
    }

    /// `log≺ Φ = (Φ − e) ≺ Φ⁻¹`.
    pub fn log_left(&self) -> Result<Functional> {
        self.require_unital("left half-shuffle logarithm")?;
        let inv = self.inverse()?;
        let shifted = self.sub(&Functional::unit());
        Ok(shifted.half_left(&inv, self.log_kind()))
    }

    /// `log≻ Φ = Φ⁻¹ ≻ (Φ − e)`.
    pub fn log_right(&self) -> Result<Functional> {
        self.require_unital("right half-shuffle logarithm")?;
        let inv = self.inverse()?;
        let shifted = self.sub(&Functional::unit());
        Ok(inv.half_right(&shifted, self.log_kind()))
    }

    /// `exp*(α) = Σ α^{*n}/n!`.
    pub fn exp_star(&self) -> Result<Functional> {
        self.require_augmented("convolution exponential")?;
        Ok(self.exp_star_unchecked())
    }

    pub(crate) fn exp_star_unchecked(&self) -> Functional {
        let series = Series::new(SeriesKind::ExpStar, self.clone());
        Functional::build(Op::Series(series), self.exp_kind(), &[self])
    }

    /// `log*(Φ) = −Σ_{n>0} (−1)ⁿ (Φ − e)^{*n}/n`.
    pub fn log_star(&self) -> Result<Functional> {
        self.require_unital("convolution logarithm")?;
        let shifted = self.sub(&Functional::unit());
        let series = Series::new(SeriesKind::LogStar, shifted.clone());
        Ok(Functional::build(
            Op::Series(series),
            self.log_kind(),
            &[&shifted],
        ))
    }

    pub(crate) fn magnus_inverse_unchecked(&self) -> Functional {
        let series = Series::new(SeriesKind::MagnusInverse, self.clone());
        Functional::build(Op::Series(series), self.kind(), &[self])
    }

    pub(crate) fn magnus_unchecked(&self) -> Functional {
        let op = Op::Magnus {
            base: self.clone(),
            chain: Default::default(),
        };
        Functional::build(op, self.kind(), &[self])
    }

    /// Half-shuffle power: `ℰ≺(s·log≺Φ)` on the left, `ℰ≻(s·log≻Φ)` on the right.
    pub fn hs_power(&self, s: &Rational, side: HalfSide) -> Result<Functional> {
        match side {
            HalfSide::Left => self.log_left()?.scale(s).exp_left(),
            HalfSide::Right => self.log_right()?.scale(s).exp_right(),
            HalfSide::Full => Err(Error::domain(
                "half-shuffle powers need a left or right side",
            )),
        }
    }

    // adjoint actions

    /// `Ad_Φ(μ) = Φ⁻¹ ≻ μ ≺ Φ`.
    pub fn adjoint(phi: &Functional, mu: &Functional) -> Result<Functional> {
        phi.require_unital("adjoint action")?;
        mu.require_augmented("adjoint action")?;
        Ok(Functional::adjoint_with(&phi.inverse()?, phi, mu))
    }

    /// `Φ⁻¹ ≻ μ ≺ Φ` with the inverse supplied by the caller.
    pub(crate) fn adjoint_with(inv: &Functional, phi: &Functional, mu: &Functional) -> Functional {
        let kind = if phi.kind() == Kind::Character && mu.kind() == Kind::Infinitesimal {
            Kind::Infinitesimal
        } else {
            Kind::General
        };
        inv.half_right(mu, Kind::General).half_left(phi, kind)
    }

    /// `γ₂^{γ₁} = ℰ≺(γ₁)⁻¹ ≻ γ₂ ≺ ℰ≺(γ₁)`, via the single subset sum
    /// `Σ_{1,n∈S} γ₂(a_S) ℰ≺(γ₁)(a_{J^S})` on words.
    pub fn ad_left(acting: &Functional, target: &Functional) -> Result<Functional> {
        acting.require_infinitesimal("left adjoint action")?;
        target.require_infinitesimal("left adjoint action")?;
        Ok(Functional::ad_left_unchecked(acting, target))
    }

    pub(crate) fn ad_left_unchecked(acting: &Functional, target: &Functional) -> Functional {
        let op = Op::AdLeft {
            acting: acting.clone(),
            target: target.clone(),
            exp: OnceLock::new(),
        };
        Functional::build(op, Kind::Infinitesimal, &[acting, target])
    }

    /// `ad≻_{γ₁}(γ₂) = ad≺_{−γ₁}(γ₂)`.
    pub fn ad_right(acting: &Functional, target: &Functional) -> Result<Functional> {
        Functional::ad_left(&acting.neg(), target)
    }

    /// The defining composition of [`Functional::ad_left`], for cross-checks.
    pub fn ad_left_composed(acting: &Functional, target: &Functional) -> Result<Functional> {
        acting.require_infinitesimal("left adjoint action")?;
        target.require_infinitesimal("left adjoint action")?;
        let exp = acting.exp_left_unchecked();
        let inv = acting.neg().exp_right_unchecked();
        Ok(Functional::adjoint_with(&inv, &exp, target))
    }

    /// First bar word (in the given order) where two functionals differ.
    pub fn first_difference<'a>(
        &self,
        other: &Functional,
        bars: impl IntoIterator<Item = &'a BarWord>,
    ) -> Option<&'a BarWord> {
        bars.into_iter().find(|b| self.eval(b) != other.eval(b))
    }

    pub fn agrees_with<'a>(
        &self,
        other: &Functional,
        bars: impl IntoIterator<Item = &'a BarWord>,
    ) -> bool {
        self.first_difference(other, bars).is_none()
    }
}

fn split_sum(
    b: &BarWord,
    side: HalfSide,
    defects: Defects,
    f: &Functional,
    g: &Functional,
) -> Rational {
    if side != HalfSide::Full && b.is_unit() {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    for (l, r) in Splits::new(b, side, defects) {
        let x = f.eval(&l);
        if x.is_zero() {
            continue;
        }
        let y = g.eval(&r);
        if !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

impl Series {
    fn new(kind: SeriesKind, base: Functional) -> Series {
        Series {
            kind,
            base,
            terms: Mutex::new(Vec::new()),
        }
    }

    /// `terms[n]` is `baseⁿ` (convolution power) or `L^n_{base▷}(base)`.
    fn terms_upto(&self, n: usize) -> Vec<Functional> {
        let mut terms = self.terms.lock();
        if terms.is_empty() {
            terms.push(match self.kind {
                SeriesKind::MagnusInverse => self.base.clone(),
                _ => Functional::unit(),
            });
        }
        while terms.len() <= n {
            let last = terms.last().expect("nonempty").clone();
            let next = match self.kind {
                SeriesKind::MagnusInverse => self.base.prelie_unchecked(&last),
                _ => {
                    let kind =
                        if self.base.kind() == Kind::Character && last.kind() == Kind::Character {
                            Kind::Character
                        } else {
                            Kind::General
                        };
                    Functional::build(
                        Op::Conv(last.clone(), self.base.clone()),
                        kind,
                        &[&last, &self.base],
                    )
                }
            };
            terms.push(next);
        }
        terms[..=n].to_vec()
    }

    fn eval(&self, b: &BarWord) -> Rational {
        let d = b.degree();
        match self.kind {
            SeriesKind::ExpStar => {
                let terms = self.terms_upto(d);
                let mut acc = Rational::zero();
                for (n, t) in terms.iter().enumerate() {
                    let v = t.eval(b);
                    if !v.is_zero() {
                        acc += v / Rational::factorial(n as u32);
                    }
                }
                acc
            }
            SeriesKind::LogStar => {
                if d == 0 {
                    return Rational::zero();
                }
                let terms = self.terms_upto(d);
                let mut acc = Rational::zero();
                for (n, t) in terms.iter().enumerate().skip(1) {
                    let v = t.eval(b);
                    if v.is_zero() {
                        continue;
                    }
                    let c = Rational::new(if n % 2 == 1 { 1 } else { -1 }, n as i64);
                    acc += c * v;
                }
                acc
            }
            SeriesKind::MagnusInverse => {
                if d == 0 {
                    return Rational::zero();
                }
                let terms = self.terms_upto(d - 1);
                let mut acc = Rational::zero();
                for (n, t) in terms.iter().enumerate() {
                    let v = t.eval(b);
                    if !v.is_zero() {
                        acc += v / Rational::factorial(n as u32 + 1);
                    }
                }
                acc
            }
        }
    }
}
