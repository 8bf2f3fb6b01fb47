//! Bracket expressions, their expansion into the tensor algebra, and Lyndon bases of the
//! free graded Lie algebra in a fixed multidegree.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use crate::field::Coeff;
use crate::plocal::PLocalRational;
use crate::tensor::{Alphabet, Letter, TensorElement, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LieError {
    #[error("expression is not homogeneous")]
    Inhomogeneous,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("coefficient {0} is not representable")]
    BadCoefficient(String),
}

/// A bracket expression over the letters of an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LieExpression {
    Leaf(Letter),
    Bracket(Box<LieExpression>, Box<LieExpression>),
    /// `[base,[base,...,[base,arg]...]]` with `base` applied `k` times.
    AdPower { base: Box<LieExpression>, k: u32, arg: Box<LieExpression> },
    Sum(Vec<(PLocalRational, LieExpression)>),
}

impl std::ops::Neg for LieExpression {
    type Output = Self;

    fn neg(self) -> Self {
        self.scaled(PLocalRational::from_i64(-1))
    }
}

impl LieExpression {
    pub fn zero() -> Self {
        LieExpression::Sum(Vec::new())
    }

    pub fn leaf(l: Letter) -> Self {
        LieExpression::Leaf(l)
    }

    /// Bracket that collapses to zero when an operand is formally zero.
    pub fn bracket(a: LieExpression, b: LieExpression) -> Self {
        if a.is_formal_zero() || b.is_formal_zero() {
            return Self::zero();
        }
        LieExpression::Bracket(Box::new(a), Box::new(b))
    }

    pub fn ad(base: LieExpression, k: u32, arg: LieExpression) -> Self {
        if k == 0 {
            return arg;
        }
        if base.is_formal_zero() || arg.is_formal_zero() {
            return Self::zero();
        }
        LieExpression::AdPower { base: Box::new(base), k, arg: Box::new(arg) }
    }

    pub fn scaled(self, c: PLocalRational) -> Self {
        if c.is_zero() || self.is_formal_zero() {
            return Self::zero();
        }
        if c.is_one() {
            return self;
        }
        match self {
            LieExpression::Sum(terms) => {
                LieExpression::Sum(terms.into_iter().map(|(d, e)| (&d * &c, e)).collect())
            }
            e => LieExpression::Sum(vec![(c, e)]),
        }
    }

    /// Linear combination, flattening nested sums and dropping formal zeros.
    pub fn sum(terms: impl IntoIterator<Item = (PLocalRational, LieExpression)>) -> Self {
        let mut out: Vec<(PLocalRational, LieExpression)> = Vec::new();
        for (c, e) in terms {
            if c.is_zero() || e.is_formal_zero() {
                continue;
            }
            match e {
                LieExpression::Sum(inner) => {
                    out.extend(inner.into_iter().map(|(d, f)| (&d * &c, f)).filter(|(d, _)| !d.is_zero()))
                }
                e => out.push((c, e)),
            }
        }
        if out.len() == 1 && out[0].0.is_one() {
            return out.pop().expect("one term").1;
        }
        LieExpression::Sum(out)
    }

    pub fn plus(self, other: LieExpression) -> Self {
        Self::sum([(PLocalRational::one(), self), (PLocalRational::one(), other)])
    }

    pub fn minus(self, other: LieExpression) -> Self {
        Self::sum([(PLocalRational::one(), self), (PLocalRational::from_i64(-1), other)])
    }

    pub fn is_formal_zero(&self) -> bool {
        match self {
            LieExpression::Sum(t) => t.iter().all(|(c, e)| c.is_zero() || e.is_formal_zero()),
            _ => false,
        }
    }

    /// Formal degree; `None` for a formal zero.
    pub fn degree(&self, alphabet: &Alphabet) -> Result<Option<u32>, LieError> {
        Ok(match self {
            LieExpression::Leaf(l) => Some(alphabet.degree(*l)),
            LieExpression::Bracket(a, b) => match (a.degree(alphabet)?, b.degree(alphabet)?) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
            LieExpression::AdPower { base, k, arg } => match (base.degree(alphabet)?, arg.degree(alphabet)?) {
                (Some(x), Some(y)) => Some(k * x + y),
                _ => None,
            },
            LieExpression::Sum(terms) => {
                let mut deg = None;
                for (c, e) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    if let Some(d) = e.degree(alphabet)? {
                        match deg {
                            None => deg = Some(d),
                            Some(x) if x != d => return Err(LieError::Inhomogeneous),
                            _ => {}
                        }
                    }
                }
                deg
            }
        })
    }

    /// Expansion in the tensor algebra via `[B,C] = BC - (-1)^{|B||C|} CB`.
    pub fn expand<C: Coeff>(&self, alphabet: &Alphabet) -> Result<TensorElement<C>, LieError> {
        Ok(self.expand_with_degree(alphabet)?.0)
    }

    fn expand_with_degree<C: Coeff>(&self, alphabet: &Alphabet) -> Result<(TensorElement<C>, Option<u32>), LieError> {
        match self {
            LieExpression::Leaf(l) => Ok((TensorElement::letter(*l), Some(alphabet.degree(*l)))),
            LieExpression::Bracket(a, b) => {
                let (ea, da) = a.expand_with_degree::<C>(alphabet)?;
                let (eb, db) = b.expand_with_degree::<C>(alphabet)?;
                match (da, db) {
                    (Some(x), Some(y)) => Ok((TensorElement::commutator_with_degrees(&ea, x, &eb, y), Some(x + y))),
                    _ => Ok((TensorElement::zero(), None)),
                }
            }
            LieExpression::AdPower { base, k, arg } => {
                let (eb, db) = base.expand_with_degree::<C>(alphabet)?;
                let (mut acc, mut da) = arg.expand_with_degree::<C>(alphabet)?;
                let (Some(x), Some(_)) = (db, da) else {
                    return Ok((TensorElement::zero(), None));
                };
                for _ in 0..*k {
                    let d = da.expect("degree tracked");
                    acc = TensorElement::commutator_with_degrees(&eb, x, &acc, d);
                    da = Some(d + x);
                }
                Ok((acc, da))
            }
            LieExpression::Sum(terms) => {
                let mut out = TensorElement::zero();
                let mut deg = None;
                for (c, e) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    let (ex, d) = e.expand_with_degree::<C>(alphabet)?;
                    if let Some(d) = d {
                        match deg {
                            None => deg = Some(d),
                            Some(x) if x != d => return Err(LieError::Inhomogeneous),
                            _ => {}
                        }
                    }
                    let c = C::from_rational(c).ok_or_else(|| LieError::BadCoefficient(c.to_string()))?;
                    out.add_scaled(&ex, &c);
                }
                Ok((out, deg))
            }
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        self.collect_letters(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_letters(&self, out: &mut Vec<Letter>) {
        match self {
            LieExpression::Leaf(l) => out.push(*l),
            LieExpression::Bracket(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
            LieExpression::AdPower { base, arg, .. } => {
                base.collect_letters(out);
                arg.collect_letters(out);
            }
            LieExpression::Sum(t) => t.iter().for_each(|(_, e)| e.collect_letters(out)),
        }
    }

    /// Multidegree when every summand shares one; `None` otherwise or for a formal zero.
    pub fn multidegree(&self) -> Option<MultiDegree> {
        match self {
            LieExpression::Leaf(l) => Some(MultiDegree::from_letters([*l])),
            LieExpression::Bracket(a, b) => Some(a.multidegree()?.add(&b.multidegree()?)),
            LieExpression::AdPower { base, k, arg } => {
                Some(arg.multidegree()?.add(&base.multidegree()?.times(*k)))
            }
            LieExpression::Sum(t) => {
                let mut md = None;
                for (c, e) in t {
                    if c.is_zero() || e.is_formal_zero() {
                        continue;
                    }
                    let m = e.multidegree()?;
                    match &md {
                        None => md = Some(m),
                        Some(x) if *x != m => return None,
                        _ => {}
                    }
                }
                md
            }
        }
    }

    /// Replace every leaf by an expression.
    pub fn substitute(&self, f: &dyn Fn(Letter) -> LieExpression) -> LieExpression {
        match self {
            LieExpression::Leaf(l) => f(*l),
            LieExpression::Bracket(a, b) => LieExpression::bracket(a.substitute(f), b.substitute(f)),
            LieExpression::AdPower { base, k, arg } => LieExpression::ad(base.substitute(f), *k, arg.substitute(f)),
            LieExpression::Sum(t) => LieExpression::sum(t.iter().map(|(c, e)| (c.clone(), e.substitute(f)))),
        }
    }

    /// Apply the Lie derivation with the given generator images and degree shift parity.
    pub fn derive(
        &self,
        image: &dyn Fn(Letter) -> LieExpression,
        odd_shift: bool,
        alphabet: &Alphabet,
    ) -> Result<LieExpression, LieError> {
        Ok(match self {
            LieExpression::Leaf(l) => image(*l),
            LieExpression::Bracket(a, b) => {
                let sign = odd_shift && a.degree(alphabet)?.is_some_and(|d| d % 2 == 1);
                let left = LieExpression::bracket(a.derive(image, odd_shift, alphabet)?, (**b).clone());
                let right = LieExpression::bracket((**a).clone(), b.derive(image, odd_shift, alphabet)?);
                LieExpression::sum([(PLocalRational::one(), left), (sign_of(sign), right)])
            }
            LieExpression::AdPower { base, k, arg } => {
                let inner = LieExpression::ad((**base).clone(), k - 1, (**arg).clone());
                LieExpression::Bracket(base.clone(), Box::new(inner)).derive(image, odd_shift, alphabet)?
            }
            LieExpression::Sum(t) => {
                let mut parts = Vec::with_capacity(t.len());
                for (c, e) in t {
                    parts.push((c.clone(), e.derive(image, odd_shift, alphabet)?));
                }
                LieExpression::sum(parts)
            }
        })
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> DisplayLie<'a> {
        DisplayLie { expr: self, alphabet }
    }
}

fn sign_of(negative: bool) -> PLocalRational {
    PLocalRational::from_i64(if negative { -1 } else { 1 })
}

/// Text form using the bracket grammar `[A,B]`, `ad(A,k,B)`, `c*E`, `E+E`.
pub struct DisplayLie<'a> {
    expr: &'a LieExpression,
    alphabet: &'a Alphabet,
}

impl fmt::Display for DisplayLie<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.alphabet, f, false)
    }
}

fn write_expr(e: &LieExpression, a: &Alphabet, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
    match e {
        LieExpression::Leaf(l) => write!(f, "{}", a.name(*l)),
        LieExpression::Bracket(x, y) => {
            write!(f, "[")?;
            write_expr(x, a, f, true)?;
            write!(f, ",")?;
            write_expr(y, a, f, true)?;
            write!(f, "]")
        }
        LieExpression::AdPower { base, k, arg } => {
            write!(f, "ad(")?;
            write_expr(base, a, f, true)?;
            write!(f, ",{k},")?;
            write_expr(arg, a, f, true)?;
            write!(f, ")")
        }
        LieExpression::Sum(t) if t.is_empty() => write!(f, "0"),
        LieExpression::Sum(t) => {
            let paren = nested && (t.len() > 1 || !t[0].0.is_one());
            if paren {
                write!(f, "(")?;
            }
            for (i, (c, x)) in t.iter().enumerate() {
                if i > 0 {
                    write!(f, "+")?;
                }
                if !c.is_one() {
                    write!(f, "{c}*")?;
                }
                write_expr(x, a, f, true)?;
            }
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

/// Parse the bracket grammar against an alphabet.
pub fn parse_lie(text: &str, alphabet: &Alphabet) -> Result<LieExpression, LieError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, alphabet };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> LieError {
        LieError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), LieError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn sum(&mut self) -> Result<LieExpression, LieError> {
        let mut terms = vec![self.term()?];
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            if op == b'+' {
                self.pos += 1;
            }
            terms.push(self.term()?);
        }
        if terms.len() == 1 {
            let (c, e) = terms.pop().expect("one term");
            return Ok(if c.is_one() { e } else { LieExpression::Sum(vec![(c, e)]) });
        }
        Ok(LieExpression::Sum(terms))
    }

    fn term(&mut self) -> Result<(PLocalRational, LieExpression), LieError> {
        match self.peek() {
            Some(c) if c == b'-' || c.is_ascii_digit() => {
                let negative = c == b'-';
                if negative {
                    self.pos += 1;
                    if !self.peek().is_some_and(|d| d.is_ascii_digit()) {
                        return Ok((PLocalRational::from_i64(-1), self.atom()?));
                    }
                }
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'/') {
                    self.pos += 1;
                }
                let lit = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                let c: PLocalRational = lit.parse().map_err(|_| self.err("bad coefficient"))?;
                if c.is_zero() && self.peek() != Some(b'*') {
                    return Ok((PLocalRational::one(), LieExpression::zero()));
                }
                self.expect(b'*')?;
                Ok((if negative { -c } else { c }, self.atom()?))
            }
            _ => Ok((PLocalRational::one(), self.atom()?)),
        }
    }

    fn atom(&mut self) -> Result<LieExpression, LieError> {
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let a = self.sum()?;
                self.expect(b',')?;
                let b = self.sum()?;
                self.expect(b']')?;
                Ok(LieExpression::Bracket(Box::new(a), Box::new(b)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(_) => {
                let start = self.pos;
                while self.pos < self.s.len() && !b"[](),+* \t\r\n".contains(&self.s[self.pos]) {
                    self.pos += 1;
                }
                let tok = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                if tok.is_empty() {
                    return Err(self.err("expected an expression"));
                }
                if tok == "0" {
                    return Ok(LieExpression::zero());
                }
                if tok == "ad" && self.peek() == Some(b'(') {
                    self.pos += 1;
                    let base = self.sum()?;
                    self.expect(b',')?;
                    self.skip_ws();
                    let ks = self.pos;
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let k: u32 = std::str::from_utf8(&self.s[ks..self.pos])
                        .expect("ascii")
                        .parse()
                        .map_err(|_| self.err("bad ad exponent"))?;
                    if k == 0 {
                        return Err(self.err("ad exponent must be positive"));
                    }
                    self.expect(b',')?;
                    let arg = self.sum()?;
                    self.expect(b')')?;
                    return Ok(LieExpression::AdPower { base: Box::new(base), k, arg: Box::new(arg) });
                }
                self.alphabet
                    .letter_str(tok)
                    .map(LieExpression::Leaf)
                    .ok_or_else(|| LieError::UnknownGenerator(tok.to_string()))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Exponent vector over the letters of an alphabet, with no zero entries stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize, serde::Deserialize)]
pub struct MultiDegree(BTreeMap<Letter, u32>);

impl MultiDegree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_letters(ls: impl IntoIterator<Item = Letter>) -> Self {
        let mut m = BTreeMap::new();
        for l in ls {
            *m.entry(l).or_insert(0) += 1;
        }
        Self(m)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Letter, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (l, k) in pairs {
            if k > 0 {
                *m.entry(l).or_insert(0) += k;
            }
        }
        Self(m)
    }

    pub fn get(&self, l: Letter) -> u32 {
        self.0.get(&l).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Letter, u32)> + '_ {
        self.0.iter().map(|(l, k)| (*l, *k))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of letters counted with multiplicity.
    pub fn length(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn total_degree(&self, alphabet: &Alphabet) -> u32 {
        self.iter().map(|(l, k)| k * alphabet.degree(l)).sum()
    }

    pub fn is_odd(&self, alphabet: &Alphabet) -> bool {
        self.total_degree(alphabet) % 2 == 1
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_pairs(self.iter().chain(o.iter()))
    }

    pub fn times(&self, k: u32) -> Self {
        Self::from_pairs(self.iter().map(|(l, e)| (l, e * k)))
    }

    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        let mut m = self.0.clone();
        for (l, k) in o.iter() {
            let e = m.get_mut(&l)?;
            *e = e.checked_sub(k)?;
            if *e == 0 {
                m.remove(&l);
            }
        }
        Some(Self(m))
    }

    pub fn half(&self) -> Option<Self> {
        if self.0.values().all(|k| k % 2 == 0) {
            Some(Self(self.0.iter().map(|(l, k)| (*l, k / 2)).collect()))
        } else {
            None
        }
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.is_empty() {
            return "1".into();
        }
        self.iter()
            .map(|(l, k)| if k == 1 { alphabet.name(l).to_string() } else { format!("{}^{k}", alphabet.name(l)) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Lyndon words with the given content, in increasing lexicographic order.
pub fn lyndon_words(md: &MultiDegree) -> Vec<Word> {
    let letters: Vec<Letter> = md.iter().map(|(l, _)| l).collect();
    let mut counts: Vec<u32> = md.iter().map(|(_, k)| k).collect();
    let n = md.length() as usize;
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut a = vec![0usize; n + 1];
    fkm(1, 1, n, &mut a, &mut counts, &letters, &mut out);
    out
}

fn fkm(t: usize, p: usize, n: usize, a: &mut [usize], counts: &mut [u32], letters: &[Letter], out: &mut Vec<Word>) {
    if t > n {
        if p == n {
            out.push(a[1..].iter().map(|&i| letters[i]).collect());
        }
        return;
    }
    let start = if t == 1 { 0 } else { a[t - p] };
    for j in start..letters.len() {
        if counts[j] == 0 {
            continue;
        }
        counts[j] -= 1;
        a[t] = j;
        if j == a[t - p] && t > 1 {
            fkm(t + 1, p, n, a, counts, letters, out);
        } else {
            fkm(t + 1, t, n, a, counts, letters, out);
        }
        counts[j] += 1;
        if t == 1 {
            break;
        }
    }
}

pub fn is_lyndon(w: &[Letter]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// Standard bracketing: `w = uv` with `v` the longest proper Lyndon suffix.
pub fn standard_bracketing(w: &[Letter]) -> LieExpression {
    if w.len() == 1 {
        return LieExpression::Leaf(w[0]);
    }
    let split = (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("single letters are Lyndon");
    LieExpression::Bracket(Box::new(standard_bracketing(&w[..split])), Box::new(standard_bracketing(&w[split..])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Lyndon,
    /// `[P_u, P_u]` for an odd Lyndon word `u`.
    Square,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieBasisElement {
    pub bracketing: LieExpression,
    /// The Lyndon word `u` (for squares, the leading word is `uu`).
    pub lyndon_word: Word,
    pub kind: BasisKind,
}

impl LieBasisElement {
    pub fn leading_word(&self) -> Word {
        match self.kind {
            BasisKind::Lyndon => self.lyndon_word.clone(),
            BasisKind::Square => {
                let mut w = self.lyndon_word.clone();
                w.extend_from_slice(&self.lyndon_word);
                w
            }
        }
    }
}

/// Basis of the multidegree-`md` component of the free graded Lie algebra.
pub fn lie_multidegree_basis(alphabet: &Alphabet, md: &MultiDegree) -> Vec<LieBasisElement> {
    let mut out: Vec<LieBasisElement> = lyndon_words(md)
        .into_iter()
        .map(|w| LieBasisElement { bracketing: standard_bracketing(&w), lyndon_word: w, kind: BasisKind::Lyndon })
        .collect();
    if let Some(h) = md.half() {
        if h.is_odd(alphabet) {
            for w in lyndon_words(&h) {
                let p = standard_bracketing(&w);
                out.push(LieBasisElement {
                    bracketing: LieExpression::Bracket(Box::new(p.clone()), Box::new(p)),
                    lyndon_word: w,
                    kind: BasisKind::Square,
                });
            }
        }
    }
    out
}

fn mobius(mut n: u32) -> i32 {
    let mut r = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            r = -r;
        }
        d += 1;
    }
    if n > 1 {
        -r
    } else {
        r
    }
}

fn multinomial(parts: &[u32]) -> BigInt {
    let mut r = BigInt::one();
    let mut total = 0u32;
    for &k in parts {
        for i in 1..=k {
            total += 1;
            r = r * total / i;
        }
    }
    r
}

/// Dimension from the super-Witt formula, including odd squares.
pub fn lie_dimension(alphabet: &Alphabet, md: &MultiDegree) -> u128 {
    let len = md.length();
    if len == 0 {
        return 0;
    }
    let exps: Vec<(Letter, u32)> = md.iter().collect();
    let g = exps.iter().fold(0u32, |g, (_, k)| num_integer::gcd(g, *k));
    let sign = |m: &[(Letter, u32)]| {
        let deg: u32 = m.iter().map(|(l, k)| k * alphabet.degree(*l)).sum();
        if deg % 2 == 1 {
            -1
        } else {
            1
        }
    };
    let mut total = BigInt::zero();
    for d in (1..=g).filter(|d| g % d == 0) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let m: Vec<(Letter, u32)> = exps.iter().map(|(l, k)| (*l, k / d)).collect();
        let parts: Vec<u32> = m.iter().map(|(_, k)| *k).collect();
        total += multinomial(&parts) * (mu * sign(&m));
    }
    let v = total * sign(&exps) / len;
    v.to_u128().expect("nonnegative dimension")
}

/// Split into the coefficients on single letters and the remaining words.
pub fn decomposable_split<C: Coeff>(e: &TensorElement<C>) -> (BTreeMap<Letter, C>, TensorElement<C>) {
    let mut linear = BTreeMap::new();
    let mut rest = TensorElement::zero();
    for (w, c) in e.terms() {
        if w.len() == 1 {
            linear.insert(w[0], c.clone());
        } else {
            rest.add_term(w.clone(), c.clone());
        }
    }
    (linear, rest)
}

/// Memoized expansions of standard bracketings.
pub struct LyndonExpander<'a, C: Coeff> {
    alphabet: &'a Alphabet,
    cache: FxHashMap<Word, TensorElement<C>>,
    max_cached_len: usize,
}

impl<'a, C: Coeff> LyndonExpander<'a, C> {
    pub fn new(alphabet: &'a Alphabet) -> Self {
        Self::with_cache_limit(alphabet, usize::MAX)
    }

    /// Only words of length at most `max_len` are memoized.
    pub fn with_cache_limit(alphabet: &'a Alphabet, max_len: usize) -> Self {
        Self { alphabet, cache: FxHashMap::default(), max_cached_len: max_len }
    }

    pub fn lyndon(&mut self, w: &[Letter]) -> TensorElement<C> {
        if let Some(e) = self.cache.get(w) {
            return e.clone();
        }
        let e = if w.len() == 1 {
            TensorElement::letter(w[0])
        } else {
            let split = (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("Lyndon suffix");
            let (u, v) = w.split_at(split);
            let (eu, ev) = (self.lyndon(u), self.lyndon(v));
            TensorElement::commutator_with_degrees(&eu, self.alphabet.word_degree(u), &ev, self.alphabet.word_degree(v))
        };
        if w.len() <= self.max_cached_len {
            self.cache.insert(w.into(), e.clone());
        }
        e
    }

    pub fn basis_element(&mut self, b: &LieBasisElement) -> TensorElement<C> {
        let e = self.lyndon(&b.lyndon_word);
        match b.kind {
            BasisKind::Lyndon => e,
            BasisKind::Square => {
                let d = self.alphabet.word_degree(&b.lyndon_word);
                TensorElement::commutator_with_degrees(&e, d, &e, d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::GeneratorName;

    fn alphabet(degs: &[u32]) -> Alphabet {
        let mut a = Alphabet::new();
        for (i, d) in degs.iter().enumerate() {
            a.push(GeneratorName::Named(format!("g{i}")), *d).unwrap();
        }
        a
    }

    type Q = PLocalRational;

    #[test]
    fn ad_power_degree_and_expansion() {
        let a = crate::tensor::tests_support::paper_w_alphabet();
        let e = LieExpression::ad(LieExpression::leaf(0), 19, LieExpression::leaf(1));
        assert_eq!(e.degree(&a).unwrap(), Some(2336));
        let x = e.expand::<crate::field::Mod61>(&a).unwrap();
        assert_eq!(x.homogeneity(&a), crate::tensor::Homogeneity::Degree(2336));
    }

    #[test]
    fn odd_self_bracket_vanishes() {
        let a = alphabet(&[1]);
        let u = LieExpression::leaf(0);
        let e = LieExpression::bracket(u.clone(), LieExpression::bracket(u.clone(), u));
        assert!(e.expand::<Q>(&a).unwrap().is_zero());
    }

    #[test]
    fn even_nested_leading_coefficient() {
        let a = alphabet(&[2, 4, 6]);
        let (s, t, x) = (LieExpression::leaf(0), LieExpression::leaf(1), LieExpression::leaf(2));
        let e = LieExpression::bracket(s.clone(), LieExpression::bracket(t, LieExpression::bracket(s, x)));
        let ex = e.expand::<Q>(&a).unwrap();
        assert_eq!(ex.coeff(&[0, 1, 0, 2]), Some(&Q::from_i64(1)));
    }

    #[test]
    fn lyndon_generation() {
        let md = MultiDegree::from_pairs([(0, 2), (1, 2)]);
        let ws = lyndon_words(&md);
        assert_eq!(ws, vec![Word::from_slice(&[0, 0, 1, 1])]);
        let md = MultiDegree::from_pairs([(0, 3), (1, 2)]);
        assert_eq!(lyndon_words(&md).len(), 2);
        assert!(lyndon_words(&md).iter().all(|w| is_lyndon(w)));
    }

    #[test]
    fn dimension_examples() {
        let odd = alphabet(&[1, 1]);
        assert_eq!(lie_dimension(&odd, &MultiDegree::from_pairs([(0, 1), (1, 1)])), 1);
        let even = alphabet(&[2, 2]);
        assert_eq!(lie_dimension(&even, &MultiDegree::from_pairs([(0, 2), (1, 1)])), 1);
        assert_eq!(lie_dimension(&odd, &MultiDegree::from_pairs([(0, 2)])), 1);
        assert_eq!(lie_dimension(&even, &MultiDegree::from_pairs([(0, 2)])), 0);
        assert_eq!(lie_dimension(&odd, &MultiDegree::from_pairs([(0, 3)])), 0);
        let mixed = alphabet(&[1, 2]);
        assert_eq!(lie_dimension(&mixed, &MultiDegree::from_pairs([(0, 2), (1, 2)])), 2);
    }

    #[test]
    fn basis_squares() {
        let a = alphabet(&[1]);
        let b = lie_multidegree_basis(&a, &MultiDegree::from_pairs([(0, 2)]));
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].kind, BasisKind::Square);
        let a = alphabet(&[2]);
        assert!(lie_multidegree_basis(&a, &MultiDegree::from_pairs([(0, 2)])).is_empty());
    }

    #[test]
    fn leading_words() {
        let a = alphabet(&[1, 2, 3]);
        let md = MultiDegree::from_pairs([(0, 2), (1, 2), (2, 2)]);
        let basis = lie_multidegree_basis(&a, &md);
        let mut ex = LyndonExpander::<Q>::new(&a);
        for b in &basis {
            let e = ex.basis_element(b);
            let lead = b.leading_word();
            assert!(e.coeff(&lead).is_some());
            assert!(e.terms().all(|(w, _)| *w >= lead));
            assert_eq!(e, b.bracketing.expand::<Q>(&a).unwrap());
        }
        assert_eq!(basis.len() as u128, lie_dimension(&a, &md));
    }

    #[test]
    fn parse_and_print() {
        let a = crate::tensor::tests_support::paper_w_alphabet();
        for s in ["[w1,w2]", "ad(w1,3,[w2,w3])", "2*[w2,w2]+-1/3*[w1,[w1,w4]]", "[(w1+w2),w3]"] {
            let e = parse_lie(s, &a).unwrap();
            let back = parse_lie(&e.display(&a).to_string(), &a).unwrap();
            assert_eq!(e.expand::<Q>(&a), back.expand::<Q>(&a));
        }
        assert!(parse_lie("[w1,w9]", &a).is_err());
        assert!(parse_lie("[w1,w2", &a).is_err());
        assert!(parse_lie("ad(w1,0,w2)", &a).is_err());
        let diff = parse_lie("[w1,w2] - 2*[w1,w2]", &a).unwrap();
        let neg = parse_lie("-[w1,w2]", &a).unwrap();
        assert_eq!(diff.expand::<Q>(&a), neg.expand::<Q>(&a));
        for z in ["0", " 0 ", "[w1,0]", "w1 - w1 + 0"] {
            assert!(parse_lie(z, &a).unwrap().expand::<Q>(&a).unwrap().is_zero(), "{z}");
        }
    }

    #[test]
    fn split_linear_part() {
        let a = crate::tensor::tests_support::paper_w_alphabet();
        let e = parse_lie("w2", &a).unwrap().expand::<Q>(&a).unwrap();
        let mut e2 = e.clone();
        e2.add_assign(&parse_lie("[w2,w2]", &a).unwrap().expand::<Q>(&a).unwrap());
        let (lin, dec) = decomposable_split(&e2);
        assert_eq!(lin.get(&1), Some(&Q::from_i64(1)));
        assert_eq!(dec.term_count(), 1);
        let (lin, dec) = decomposable_split(&TensorElement::<Q>::zero());
        assert!(lin.is_empty() && dec.is_zero());
    }

    #[test]
    fn derivation_leibniz() {
        let a = crate::tensor::tests_support::paper_w_alphabet();
        let d4 = parse_lie("[w2,w2]", &a).unwrap();
        let img = |l: Letter| if l == 3 { d4.clone() } else { LieExpression::zero() };
        let e = parse_lie("[w1,w4]", &a).unwrap();
        let de = e.derive(&img, true, &a).unwrap();
        let want = parse_lie("-1*[w1,[w2,w2]]", &a).unwrap();
        assert_eq!(de.expand::<Q>(&a), want.expand::<Q>(&a));
    }
}
