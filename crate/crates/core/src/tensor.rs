//! The free graded associative algebra on a graded alphabet: words, Koszul signs,
//! graded commutators and derivations extended by the graded Leibniz rule.

use std::fmt;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::field::Coeff;
use crate::plocal::PLocalRational;

/// Index of a generator inside its [`Alphabet`]; the alphabet order is the canonical letter order.
pub type Letter = u16;

/// A noncommutative monomial.
pub type Word = SmallVec<[Letter; 14]>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TensorError {
    #[error("operand is not homogeneous")]
    InhomogeneousOperand,
    #[error("no image for generator {0}")]
    UnknownGenerator(String),
    #[error("generator {0} declared twice")]
    DuplicateGenerator(String),
    #[error("generator {0} must have positive degree")]
    ZeroDegree(String),
    #[error("bad generator name {0:?}")]
    BadName(String),
    #[error("alphabet is full")]
    AlphabetFull,
}

/// Structured generator names. Vertex identifiers are restricted to `[A-Za-z0-9_]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorName {
    W(u8),
    X(String),
    Z(String, String),
    /// A cycle-killing generator; `class` is the sorted vertex content of the killed cycle.
    T { layer: u8, class: Vec<String>, index: usize },
    Suspension(Box<GeneratorName>),
    Copy(Box<GeneratorName>),
    Named(String),
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl GeneratorName {
    pub fn suspension(&self) -> Self {
        GeneratorName::Suspension(Box::new(self.clone()))
    }

    pub fn copy(&self) -> Self {
        GeneratorName::Copy(Box::new(self.clone()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorName::W(_) => "w",
            GeneratorName::X(_) => "x",
            GeneratorName::Z(..) => "z",
            GeneratorName::T { .. } => "t",
            GeneratorName::Suspension(_) => "suspension",
            GeneratorName::Copy(_) => "copy",
            GeneratorName::Named(_) => "named",
        }
    }

    /// Vertices mentioned by the name itself (x, z and t classes).
    pub fn vertices(&self) -> Vec<&str> {
        match self {
            GeneratorName::X(v) => vec![v],
            GeneratorName::Z(v, u) => vec![v, u],
            GeneratorName::T { class, .. } => class.iter().map(String::as_str).collect(),
            GeneratorName::Suspension(g) | GeneratorName::Copy(g) => g.vertices(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorName::W(i) => write!(f, "w{i}"),
            GeneratorName::X(v) => write!(f, "x.{v}"),
            GeneratorName::Z(v, u) => write!(f, "z.{v}~{u}"),
            GeneratorName::T { layer, class, index } if class.is_empty() => write!(f, "t{layer}.{index}"),
            GeneratorName::T { layer, class, index } => write!(f, "t{layer}.{}.{index}", class.join("~")),
            GeneratorName::Suspension(g) => write!(f, "s.{g}"),
            GeneratorName::Copy(g) => write!(f, "{g}'"),
            GeneratorName::Named(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for GeneratorName {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self, TensorError> {
        let bad = || TensorError::BadName(s.to_string());
        if let Some(rest) = s.strip_suffix('\'') {
            return Ok(rest.parse::<GeneratorName>()?.copy());
        }
        if let Some(rest) = s.strip_prefix("s.") {
            return Ok(rest.parse::<GeneratorName>()?.suspension());
        }
        if let Some(v) = s.strip_prefix("x.") {
            return if is_identifier(v) { Ok(GeneratorName::X(v.to_string())) } else { Err(bad()) };
        }
        if let Some(e) = s.strip_prefix("z.") {
            let (v, u) = e.split_once('~').ok_or_else(bad)?;
            if !is_identifier(v) || !is_identifier(u) {
                return Err(bad());
            }
            return Ok(GeneratorName::Z(v.to_string(), u.to_string()));
        }
        if let Some(i) = s.strip_prefix('w').and_then(|r| r.parse::<u8>().ok()) {
            if (1..=5).contains(&i) && s.len() == 2 {
                return Ok(GeneratorName::W(i));
            }
        }
        if let Some(rest) = s.strip_prefix('t') {
            if let Some((layer, tail)) = rest.split_once('.') {
                if let Ok(layer) = layer.parse::<u8>() {
                    let (class, index) = match tail.rsplit_once('.') {
                        Some((c, i)) => (c.split('~').map(str::to_string).collect::<Vec<_>>(), i),
                        None => (Vec::new(), tail),
                    };
                    let index = index.parse::<usize>().map_err(|_| bad())?;
                    if class.iter().any(|v| !is_identifier(v)) {
                        return Err(bad());
                    }
                    return Ok(GeneratorName::T { layer, class, index });
                }
            }
        }
        if is_identifier(s) {
            Ok(GeneratorName::Named(s.to_string()))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for GeneratorName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GeneratorName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedGenerator {
    pub name: GeneratorName,
    pub degree: u32,
}

impl GradedGenerator {
    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// An ordered list of graded generators with unique names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    generators: Vec<GradedGenerator>,
    index: FxHashMap<GeneratorName, Letter>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorRecord {
    name: GeneratorName,
    degree: u32,
    kind: String,
}

impl Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let recs: Vec<GeneratorRecord> = self
            .generators
            .iter()
            .map(|g| GeneratorRecord { name: g.name.clone(), degree: g.degree, kind: g.name.kind().into() })
            .collect();
        recs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let recs = Vec::<GeneratorRecord>::deserialize(d)?;
        let mut a = Alphabet::new();
        for r in recs {
            a.push(r.name, r.degree).map_err(serde::de::Error::custom)?;
        }
        Ok(a)
    }
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: GeneratorName, degree: u32) -> Result<Letter, TensorError> {
        if degree == 0 {
            return Err(TensorError::ZeroDegree(name.to_string()));
        }
        if self.index.contains_key(&name) {
            return Err(TensorError::DuplicateGenerator(name.to_string()));
        }
        let l = Letter::try_from(self.generators.len()).map_err(|_| TensorError::AlphabetFull)?;
        self.index.insert(name.clone(), l);
        self.generators.push(GradedGenerator { name, degree });
        Ok(l)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator(&self, l: Letter) -> &GradedGenerator {
        &self.generators[l as usize]
    }

    pub fn generators(&self) -> &[GradedGenerator] {
        &self.generators
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.generators.len() as Letter
    }

    pub fn name(&self, l: Letter) -> &GeneratorName {
        &self.generators[l as usize].name
    }

    pub fn degree(&self, l: Letter) -> u32 {
        self.generators[l as usize].degree
    }

    pub fn is_odd(&self, l: Letter) -> bool {
        self.degree(l) % 2 == 1
    }

    pub fn letter(&self, name: &GeneratorName) -> Option<Letter> {
        self.index.get(name).copied()
    }

    pub fn letter_str(&self, name: &str) -> Option<Letter> {
        name.parse::<GeneratorName>().ok().and_then(|n| self.letter(&n))
    }

    pub fn word_degree(&self, w: &[Letter]) -> u32 {
        w.iter().map(|&l| self.degree(l)).sum()
    }

    pub fn word_string(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter().map(|&l| self.name(l).to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Degree information of an element of a graded module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(u32),
    Inhomogeneous,
}

/// A sparse linear combination of words.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement<C = PLocalRational> {
    terms: FxHashMap<Word, C>,
}

impl<C: Coeff> Default for TensorElement<C> {
    fn default() -> Self {
        Self::zero()
    }
}

fn sign_coeff<C: Coeff>(negative: bool, c: &C) -> C {
    if negative {
        c.neg()
    } else {
        c.clone()
    }
}

impl<C: Coeff> TensorElement<C> {
    pub fn zero() -> Self {
        Self { terms: FxHashMap::default() }
    }

    pub fn unit() -> Self {
        Self::monomial(Word::new(), C::one())
    }

    pub fn monomial(w: Word, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(w, c);
        e
    }

    pub fn letter(l: Letter) -> Self {
        Self::monomial(smallvec::smallvec![l], C::one())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { terms: FxHashMap::with_capacity_and_hasher(n, Default::default()) }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of words with a nonzero coefficient.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &[Letter]) -> Option<&C> {
        self.terms.get(w)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Word, C)> {
        self.terms.into_iter()
    }

    /// Terms sorted by word, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(&Word, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn add_term(&mut self, w: Word, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &C) {
        if c.is_zero() {
            return;
        }
        for (w, d) in &other.terms {
            self.add_term(w.clone(), d.mul(c));
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (w, d) in &other.terms {
            self.add_term(w.clone(), d.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (w, d) in &other.terms {
            self.add_term(w.clone(), d.neg());
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(w, d)| (w.clone(), d.mul(c))).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, d)| (w.clone(), d.neg())).collect() }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::with_capacity(self.term_count() * other.term_count());
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                out.add_term(w, a.mul(b));
            }
        }
        out
    }

    pub fn homogeneity(&self, alphabet: &Alphabet) -> Homogeneity {
        let mut deg = None;
        for w in self.terms.keys() {
            let d = alphabet.word_degree(w);
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return Homogeneity::Inhomogeneous,
                _ => {}
            }
        }
        deg.map_or(Homogeneity::Zero, Homogeneity::Degree)
    }

    /// `ab - (-1)^{|a||b|} ba` for elements of the given degrees.
    pub fn commutator_with_degrees(a: &Self, da: u32, b: &Self, db: u32) -> Self {
        let mut out = a.concat(b);
        let anti = da % 2 == 1 && db % 2 == 1;
        for (v, y) in &b.terms {
            for (u, x) in &a.terms {
                let mut w = v.clone();
                w.extend_from_slice(u);
                out.add_term(w, sign_coeff(!anti, &x.mul(y)));
            }
        }
        out
    }

    pub fn graded_commutator(a: &Self, b: &Self, alphabet: &Alphabet) -> Result<Self, TensorError> {
        let da = match a.homogeneity(alphabet) {
            Homogeneity::Zero => return Ok(Self::zero()),
            Homogeneity::Degree(d) => d,
            Homogeneity::Inhomogeneous => return Err(TensorError::InhomogeneousOperand),
        };
        let db = match b.homogeneity(alphabet) {
            Homogeneity::Zero => return Ok(Self::zero()),
            Homogeneity::Degree(d) => d,
            Homogeneity::Inhomogeneous => return Err(TensorError::InhomogeneousOperand),
        };
        Ok(Self::commutator_with_degrees(a, da, b, db))
    }

    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> TensorElement<D> {
        let mut out = TensorElement::with_capacity(self.term_count());
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    /// Keep only the words accepted by `keep`.
    pub fn filter_words(&self, mut keep: impl FnMut(&[Letter]) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String
    where
        C: fmt::Display,
    {
        if self.is_zero() {
            return "0".into();
        }
        self.sorted_terms()
            .into_iter()
            .map(|(w, c)| format!("{c}*{}", alphabet.word_string(w)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl TensorElement<PLocalRational> {
    pub fn to_coeff<D: Coeff>(&self) -> Option<TensorElement<D>> {
        let mut out = TensorElement::with_capacity(self.term_count());
        for (w, c) in &self.terms {
            out.add_term(w.clone(), D::from_rational(c)?);
        }
        Some(out)
    }
}

/// A derivation of the tensor algebra determined by its values on generators.
#[derive(Debug, Clone)]
pub struct TensorDerivation<C = PLocalRational> {
    images: FxHashMap<Letter, TensorElement<C>>,
    zeros: FxHashSet<Letter>,
    shift: i32,
}

impl<C: Coeff> TensorDerivation<C> {
    pub fn new(shift: i32) -> Self {
        Self { images: FxHashMap::default(), zeros: FxHashSet::default(), shift }
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn set_image(&mut self, l: Letter, image: TensorElement<C>) {
        if image.is_zero() {
            self.set_zero(l);
        } else {
            self.zeros.remove(&l);
            self.images.insert(l, image);
        }
    }

    pub fn set_zero(&mut self, l: Letter) {
        self.images.remove(&l);
        self.zeros.insert(l);
    }

    pub fn image(&self, l: Letter) -> Option<&TensorElement<C>> {
        self.images.get(&l)
    }

    /// Every declared image must have degree `|g| + shift` or vanish.
    pub fn check_degrees(&self, alphabet: &Alphabet) -> Result<(), TensorError> {
        for (&l, img) in &self.images {
            let want = alphabet.degree(l) as i64 + self.shift as i64;
            match img.homogeneity(alphabet) {
                Homogeneity::Zero => {}
                Homogeneity::Degree(d) if d as i64 == want => {}
                _ => return Err(TensorError::InhomogeneousOperand),
            }
        }
        Ok(())
    }

    /// `D(g1...gk) = sum_i (-1)^{shift(|g1|+...+|g_{i-1}|)} g1...D(g_i)...gk`.
    pub fn apply(&self, a: &TensorElement<C>, alphabet: &Alphabet) -> Result<TensorElement<C>, TensorError> {
        let odd_shift = self.shift % 2 != 0;
        let mut out = TensorElement::zero();
        for (w, c) in a.terms() {
            let mut prefix_odd = false;
            for (i, &l) in w.iter().enumerate() {
                if let Some(img) = self.images.get(&l) {
                    let neg = odd_shift && prefix_odd;
                    let c = sign_coeff(neg, c);
                    for (v, d) in img.terms() {
                        let mut nw = Word::with_capacity(w.len() + v.len());
                        nw.extend_from_slice(&w[..i]);
                        nw.extend_from_slice(v);
                        nw.extend_from_slice(&w[i + 1..]);
                        out.add_term(nw, c.mul(d));
                    }
                } else if !self.zeros.contains(&l) {
                    return Err(TensorError::UnknownGenerator(alphabet.name(l).to_string()));
                }
                prefix_odd ^= alphabet.is_odd(l);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// w1..w5 with the n = 7 degrees.
    pub fn paper_w_alphabet() -> Alphabet {
        let mut a = Alphabet::new();
        for (i, d) in [115u32, 151, 201, 303, 403].iter().enumerate() {
            a.push(GeneratorName::W(i as u8 + 1), *d).unwrap();
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    type Q = PLocalRational;

    fn paper_alphabet() -> Alphabet {
        let mut a = Alphabet::new();
        for (i, d) in [115u32, 151, 201, 303, 403].iter().enumerate() {
            a.push(GeneratorName::W(i as u8 + 1), *d).unwrap();
        }
        a.push(GeneratorName::X("v".into()), 690).unwrap();
        a.push(GeneratorName::X("u".into()), 690).unwrap();
        a
    }

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn names_round_trip() {
        for s in ["w1", "x.v", "z.a~b", "t1.a~b.3", "t2.0", "s.w4", "w4'", "s.x.v'", "alpha"] {
            let n: GeneratorName = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert!("w 1".parse::<GeneratorName>().is_err());
        assert!("x.".parse::<GeneratorName>().is_err());
    }

    #[test]
    fn concatenation() {
        let w2 = TensorElement::<Q>::letter(1);
        assert_eq!(w2.concat(&w2), TensorElement::monomial(smallvec![1, 1], q(1)));
        assert_eq!(TensorElement::unit().concat(&w2), w2);
        let mut s = TensorElement::<Q>::letter(0);
        s.add_assign(&w2);
        let p = s.concat(&TensorElement::letter(2));
        assert_eq!(p.term_count(), 2);
        assert_eq!(p.coeff(&[0, 2]), Some(&q(1)));
    }

    #[test]
    fn commutator_signs() {
        let a = paper_alphabet();
        let w2 = TensorElement::<Q>::letter(1);
        let c = TensorElement::graded_commutator(&w2, &w2, &a).unwrap();
        assert_eq!(c, TensorElement::monomial(smallvec![1, 1], q(2)));
        let (xv, xu) = (TensorElement::<Q>::letter(5), TensorElement::letter(6));
        let c = TensorElement::graded_commutator(&xv, &xu, &a).unwrap();
        assert_eq!(c.coeff(&[5, 6]), Some(&q(1)));
        assert_eq!(c.coeff(&[6, 5]), Some(&q(-1)));
        let w1 = TensorElement::<Q>::letter(0);
        let sq = TensorElement::graded_commutator(&w1, &w1, &a).unwrap();
        assert!(TensorElement::graded_commutator(&w1, &sq, &a).unwrap().is_zero());
        let mut mixed = w1.clone();
        mixed.add_assign(&w2.concat(&w2));
        assert_eq!(
            TensorElement::graded_commutator(&mixed, &w1, &a),
            Err(TensorError::InhomogeneousOperand)
        );
    }

    #[test]
    fn leibniz_signs() {
        let a = paper_alphabet();
        let mut d = TensorDerivation::<Q>::new(-1);
        for l in a.letters() {
            d.set_zero(l);
        }
        d.set_image(3, TensorElement::monomial(smallvec![1, 1], q(2)));
        let w4w1 = TensorElement::monomial(smallvec![3, 0], q(1));
        assert_eq!(d.apply(&w4w1, &a).unwrap(), TensorElement::monomial(smallvec![1, 1, 0], q(2)));
        let w1w4 = TensorElement::monomial(smallvec![0, 3], q(1));
        assert_eq!(d.apply(&w1w4, &a).unwrap(), TensorElement::monomial(smallvec![0, 1, 1], q(-2)));
    }

    #[test]
    fn unknown_generator_is_reported() {
        let a = paper_alphabet();
        let d = TensorDerivation::<Q>::new(-1);
        assert!(matches!(d.apply(&TensorElement::letter(0), &a), Err(TensorError::UnknownGenerator(_))));
    }

    #[test]
    fn suspension_on_cylinder_alphabet() {
        let mut a = Alphabet::new();
        let w = a.push(GeneratorName::Named("w".into()), 5).unwrap();
        let sw = a.push(GeneratorName::Named("w".into()).suspension(), 6).unwrap();
        let wp = a.push(GeneratorName::Named("w".into()).copy(), 5).unwrap();
        let mut s = TensorDerivation::<Q>::new(1);
        s.set_image(w, TensorElement::letter(sw));
        s.set_zero(sw);
        s.set_zero(wp);
        assert_eq!(s.apply(&TensorElement::letter(w), &a).unwrap(), TensorElement::letter(sw));
        assert!(s.apply(&TensorElement::letter(sw), &a).unwrap().is_zero());
        assert!(s.check_degrees(&a).is_ok());
    }
}
