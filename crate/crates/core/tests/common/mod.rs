//! Oracles that share nothing with the library beyond its public inputs: word polynomials modulo
//! 2^61 - 1, brackets and derivations with their own sign bookkeeping, and spans of all bracketings.

#![allow(dead_code)]

use std::collections::HashMap;

use rustc_hash::FxHashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dglr_core::dgl::{homology_ranks, CycleOptions};
use dglr_core::dgl::{DglPresentation, Scale};
use dglr_core::lie::{lie_dimension, lie_multidegree_basis};
use dglr_core::{Alphabet, GeneratorName, LieExpression, LocalPrime, Mod61, MultiDegree, PLocalRational, TensorElement};

pub const MODULUS: u64 = (1 << 61) - 1;

fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn addm(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS { s - MODULUS } else { s }
}

fn negm(a: u64) -> u64 {
    if a == 0 { 0 } else { MODULUS - a }
}

fn invm(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a, MODULUS - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, base);
        }
        base = mulm(base, base);
        e >>= 1;
    }
    acc
}

pub fn from_i64(c: i64) -> u64 {
    if c >= 0 { c as u64 % MODULUS } else { negm((-c) as u64 % MODULUS) }
}

/// A word packed three bits per letter below a leading sentinel bit.
pub type Word = u64;

const LETTER_BITS: u32 = 3;

pub fn pack(letters: &[u8]) -> Word {
    letters.iter().fold(1, |w, &l| (w << LETTER_BITS) | l as u64)
}

pub fn unpack(mut w: Word) -> Vec<u8> {
    let mut out = Vec::new();
    while w > 1 {
        out.push((w & 7) as u8);
        w >>= LETTER_BITS;
    }
    out.reverse();
    out
}

fn word_len(w: Word) -> u32 {
    (63 - w.leading_zeros()) / LETTER_BITS
}

fn concat(a: Word, b: Word) -> Word {
    let lb = word_len(b);
    (a << (LETTER_BITS * lb)) | (b & ((1 << (LETTER_BITS * lb)) - 1))
}

/// A noncommutative polynomial with coefficients modulo `MODULUS`, terms sorted by word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly(pub Vec<(Word, u64)>);

impl Poly {
    pub fn letter(l: u8) -> Self {
        Poly(vec![(pack(&[l]), 1)])
    }

    fn from_terms(mut terms: Vec<(Word, u64)>) -> Self {
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(Word, u64)> = Vec::with_capacity(terms.len());
        for (w, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == w => last.1 = addm(last.1, c),
                _ => out.push((w, c)),
            }
        }
        out.retain(|t| t.1 != 0);
        Poly(out)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn lead(&self) -> Option<(Word, u64)> {
        self.0.last().copied()
    }

    pub fn add_scaled(&mut self, other: &Poly, c: u64) {
        if c == 0 || other.is_zero() {
            return;
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, mulm(b[j].1, c)));
                j += 1;
            } else {
                let v = addm(a[i].1, mulm(b[j].1, c));
                if v != 0 {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        self.0 = out;
    }

    pub fn product(&self, other: &Poly) -> Poly {
        Poly::from_terms(self.0.iter().flat_map(|&(a, x)| other.0.iter().map(move |&(b, y)| (concat(a, b), mulm(x, y)))).collect())
    }
}

/// Generator degrees, indexed by letter.
#[derive(Debug, Clone)]
pub struct Degrees(pub Vec<u32>);

impl Degrees {
    pub fn of_word(&self, w: Word) -> u32 {
        unpack(w).iter().map(|&l| self.0[l as usize]).sum()
    }

    fn of_poly(&self, p: &Poly) -> u32 {
        p.0.first().map_or(0, |t| self.of_word(t.0))
    }

    /// `[a,b] = ab - (-1)^{|a||b|} ba` for homogeneous `a`, `b`.
    pub fn bracket(&self, a: &Poly, b: &Poly) -> Poly {
        let (da, db) = (self.of_poly(a), self.of_poly(b));
        let mut out = a.product(b);
        let sign = if (da * db) % 2 == 0 { negm(1) } else { 1 };
        out.add_scaled(&b.product(a), sign);
        out
    }

    /// The degree -1 derivation with the given values on letters.
    pub fn derive(&self, d: &[Poly], p: &Poly) -> Poly {
        let mut terms = Vec::new();
        for &(w, c) in &p.0 {
            let letters = unpack(w);
            let mut prefix_degree = 0;
            for i in 0..letters.len() {
                let l = letters[i] as usize;
                let (left, right) = (pack(&letters[..i]), pack(&letters[i + 1..]));
                let sign = if prefix_degree % 2 == 0 { c } else { negm(c) };
                for &(m, x) in &d[l].0 {
                    terms.push((concat(concat(left, m), right), mulm(x, sign)));
                }
                prefix_degree += self.0[l];
            }
        }
        Poly::from_terms(terms)
    }
}

/// Incremental row reduction keyed on each row's largest word.
#[derive(Default, Clone)]
pub struct Reducer {
    rows: FxHashMap<Word, Poly>,
    order: Vec<Word>,
}

impl Reducer {
    /// Rows that already have distinct leading words.
    fn from_echelon(rows: &[Poly]) -> Self {
        let mut r = Reducer::default();
        for p in rows {
            let lead = p.lead().expect("nonzero row").0;
            r.order.push(lead);
            r.rows.insert(lead, p.clone());
        }
        r
    }

    /// Adds `v` if it is independent of the rows so far.
    pub fn insert(&mut self, mut v: Poly) -> bool {
        while let Some((lead, c)) = v.lead() {
            match self.rows.get(&lead) {
                Some(row) => {
                    let f = mulm(negm(c), invm(row.lead().expect("nonzero row").1));
                    v.add_scaled(row, f);
                }
                None => {
                    self.order.push(lead);
                    self.rows.insert(lead, v);
                    return true;
                }
            }
        }
        false
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> Vec<Poly> {
        self.order.iter().map(|w| self.rows[w].clone()).collect()
    }
}

/// Span of every bracketing of every arrangement of the multidegree, built split by split.
pub struct BracketSpans {
    degrees: Degrees,
    memo: HashMap<Vec<u32>, Vec<Poly>>,
}

impl BracketSpans {
    pub fn new(degrees: Degrees) -> Self {
        Self { degrees, memo: HashMap::new() }
    }

    pub fn degrees(&self) -> &Degrees {
        &self.degrees
    }

    pub fn basis(&mut self, md: &[u32]) -> Vec<Poly> {
        if let Some(b) = self.memo.get(md) {
            return b.clone();
        }
        let length: u32 = md.iter().sum();
        let out = if length == 1 {
            vec![Poly::letter(md.iter().position(|&k| k == 1).expect("one letter") as u8)]
        } else {
            let mut red = Reducer::default();
            for left in sub_vectors(md) {
                let right: Vec<u32> = md.iter().zip(&left).map(|(a, b)| a - b).collect();
                let (ll, rl): (u32, u32) = (left.iter().sum(), right.iter().sum());
                if ll == 0 || rl == 0 || left > right {
                    continue;
                }
                let (lb, rb) = (self.basis(&left), self.basis(&right));
                for a in &lb {
                    for b in &rb {
                        red.insert(self.degrees.bracket(a, b));
                    }
                }
            }
            red.basis()
        };
        self.memo.insert(md.to_vec(), out.clone());
        out
    }
}

fn sub_vectors(md: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &k in md {
        out = out.into_iter().flat_map(|v| (0..=k).map(move |i| [v.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Exponent vectors with the given weighted total degree.
pub fn multidegrees_of_degree(degrees: &[u32], total: u32) -> Vec<Vec<u32>> {
    fn go(degrees: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == degrees.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left / degrees[i] {
            cur.push(k);
            go(degrees, i + 1, left - k * degrees[i], cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(degrees, 0, total, &mut Vec::new(), &mut out);
    out.retain(|v| v.iter().any(|&k| k > 0));
    out
}

/// Number of words with the given letter counts.
pub fn word_count(md: &[u32]) -> u128 {
    let mut num: u128 = 1;
    let mut n = 0u128;
    for &k in md {
        for j in 1..=k as u128 {
            n += 1;
            num = num * n / j;
        }
    }
    num
}

pub fn to_multidegree(md: &[u32]) -> MultiDegree {
    MultiDegree::from_pairs(md.iter().enumerate().filter(|(_, &k)| k > 0).map(|(l, &k)| (l as u16, k)))
}

pub fn named_alphabet(degrees: &[u32]) -> Alphabet {
    let mut a = Alphabet::new();
    for (i, &d) in degrees.iter().enumerate() {
        a.push(GeneratorName::Named(format!("g{i}")), d).expect("distinct names");
    }
    a
}

/// Up to four generators of degree 1 to 4; with two or more, both parities occur.
pub fn random_degrees(rng: &mut ChaCha8Rng) -> Vec<u32> {
    let k = rng.gen_range(1..=4);
    loop {
        let mut d: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
        d.sort_unstable();
        if k == 1 || (d.iter().any(|x| x % 2 == 0) && d.iter().any(|x| x % 2 == 1)) {
            return d;
        }
    }
}

/// A random dgl whose differentials are combinations of brackets of earlier cycle generators.
pub struct RandomDgl {
    pub degrees: Vec<u32>,
    /// For each generator, `(coefficient, a, b)` with `d(g) = sum c [a,b]`.
    pub terms: Vec<Vec<(i64, u8, u8)>>,
}

impl RandomDgl {
    pub fn sample(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(2..=5);
        let mut degrees: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
        degrees.sort_unstable();
        let mut terms: Vec<Vec<(i64, u8, u8)>> = Vec::new();
        for g in 0..k {
            let cycles: Vec<usize> = (0..g).filter(|&i| terms[i].is_empty()).collect();
            let mut t = Vec::new();
            if rng.gen_bool(0.7) {
                for &a in &cycles {
                    for &b in &cycles {
                        if a <= b && degrees[a] + degrees[b] + 1 == degrees[g] && rng.gen_bool(0.7) {
                            t.push((rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 }, a as u8, b as u8));
                        }
                    }
                }
            }
            terms.push(t);
        }
        Self { degrees, terms }
    }

    pub fn presentation(&self) -> DglPresentation {
        let a = named_alphabet(&self.degrees);
        let leaf = |l: u8| LieExpression::leaf(l as u16);
        let diff = self
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(g, t)| {
                let e = LieExpression::sum(t.iter().map(|&(c, x, y)| (PLocalRational::from_i64(c), LieExpression::bracket(leaf(x), leaf(y)))));
                (g as u16, e)
            })
            .collect();
        DglPresentation::new(a, diff, LocalPrime::new(101).unwrap(), Scale::Custom).expect("valid random dgl")
    }

    pub fn oracle_differentials(&self, deg: &Degrees) -> Vec<Poly> {
        self.terms
            .iter()
            .map(|t| {
                let mut p = Poly::default();
                for &(c, x, y) in t {
                    p.add_scaled(&deg.bracket(&Poly::letter(x), &Poly::letter(y)), from_i64(c));
                }
                p
            })
            .collect()
    }

    /// `(chains, homology)` in one degree from dense spans of all bracketings.
    pub fn oracle_homology(&self, degree: u32) -> (usize, usize) {
        let deg = Degrees(self.degrees.clone());
        let d = self.oracle_differentials(&deg);
        let mut spans = BracketSpans::new(deg.clone());
        let mut chains = |k: u32| -> Vec<Poly> {
            if k == 0 {
                return Vec::new();
            }
            multidegrees_of_degree(&self.degrees, k).iter().flat_map(|m| spans.basis(m)).collect()
        };
        let here = chains(degree);
        let up = chains(degree + 1);
        let rank = |basis: &[Poly]| {
            let mut r = Reducer::default();
            for b in basis {
                r.insert(deg.derive(&d, b));
            }
            r.rank()
        };
        let (out_rank, in_rank) = (rank(&here), rank(&up));
        (here.len(), here.len() - out_rank - in_rank)
    }
}

pub fn from_library(e: &TensorElement<Mod61>) -> Poly {
    let letters = |w: &[u16]| w.iter().map(|&l| l as u8).collect::<Vec<u8>>();
    Poly::from_terms(e.terms().map(|(w, c)| (pack(&letters(w)), c.0 % MODULUS)).collect())
}

/// Largest word count of a multidegree the brute-force span is asked to handle.
pub const WORD_CAP: u128 = 3000;
pub const MAX_TOTAL_DEGREE: u32 = 12;

/// Compares the Lyndon basis, the dimension formula and the span of all bracketings on every
/// multidegree of total degree at most `max_total` within `WORD_CAP`. Returns how many were compared.
pub fn lie_case(degrees: &[u32], max_total: u32) -> Result<usize, String> {
    let alphabet = named_alphabet(degrees);
    let mut spans = BracketSpans::new(Degrees(degrees.to_vec()));
    let mut compared = 0;
    for total in 1..=max_total {
        for md in multidegrees_of_degree(degrees, total) {
            if word_count(&md) > WORD_CAP {
                continue;
            }
            let brute = spans.basis(&md);
            let lmd = to_multidegree(&md);
            let formula = lie_dimension(&alphabet, &lmd);
            let basis = lie_multidegree_basis(&alphabet, &lmd);
            let mut own = Reducer::default();
            let mut joint = Reducer::from_echelon(&brute);
            for b in &basis {
                let e = b.bracketing.expand::<Mod61>(&alphabet).map_err(|e| e.to_string())?;
                let p = from_library(&e);
                own.insert(p.clone());
                if joint.insert(p) {
                    return Err(format!("degrees {degrees:?} multidegree {md:?}: basis element outside the bracket span"));
                }
            }
            if own.rank() != basis.len() || basis.len() as u128 != formula || formula != brute.len() as u128 {
                return Err(format!(
                    "degrees {degrees:?} multidegree {md:?}: basis {} independent {} formula {formula} brute {}",
                    basis.len(),
                    own.rank(),
                    brute.len()
                ));
            }
            compared += 1;
        }
    }
    Ok(compared)
}

/// Compares library homology ranks with the dense oracle in degrees `1..=max_degree`.
pub fn homology_case(dgl: &RandomDgl, max_degree: u32) -> Result<(), String> {
    let pres = dgl.presentation();
    for k in 1..=max_degree {
        let lib = homology_ranks(&pres, k, &CycleOptions::default()).map_err(|e| e.to_string())?;
        let (chains, homology) = dgl.oracle_homology(k);
        if lib.chains != chains as u128 || lib.homology != homology as u128 {
            return Err(format!(
                "degrees {:?} terms {:?} degree {k}: library ({}, {}) oracle ({chains}, {homology})",
                dgl.degrees, dgl.terms, lib.chains, lib.homology
            ));
        }
    }
    Ok(())
}
