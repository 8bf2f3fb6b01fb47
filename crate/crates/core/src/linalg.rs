//! Sparse linear algebra: rank, kernels and span membership over Q, Z_(p) and prime fields.

use rand::SeedableRng;
use rustc_hash::FxHashMap;

use crate::field::{random_word_prime, Field, PrimeField, Rationals};
use crate::plocal::PLocalRational;

/// A sparse vector stored as index-sorted pairs with no zero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseVector<E = PLocalRational> {
    entries: Vec<(usize, E)>,
}

impl<E> Default for SparseVector<E> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<E: Clone + PartialEq> SparseVector<E> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Build from arbitrary pairs, summing repeated indices and dropping zeros.
    pub fn from_pairs<F: Field<Elem = E>>(f: &F, pairs: impl IntoIterator<Item = (usize, E)>) -> Self {
        let mut v: Vec<(usize, E)> = pairs.into_iter().collect();
        v.sort_by_key(|(i, _)| *i);
        let mut entries: Vec<(usize, E)> = Vec::with_capacity(v.len());
        for (i, e) in v {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc = f.add(acc, &e),
                _ => entries.push((i, e)),
            }
        }
        entries.retain(|(_, e)| !f.is_zero(e));
        Self { entries }
    }

    pub fn unit<F: Field<Elem = E>>(f: &F, i: usize) -> Self {
        Self { entries: vec![(i, f.one())] }
    }

    pub fn entries(&self) -> &[(usize, E)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &E)> {
        self.entries.iter().map(|(i, e)| (*i, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&E> {
        self.entries
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|k| &self.entries[k].1)
    }

    pub fn leading(&self) -> Option<(usize, &E)> {
        self.entries.first().map(|(i, e)| (*i, e))
    }

    pub fn scale<F: Field<Elem = E>>(&self, f: &F, a: &E) -> Self {
        if f.is_zero(a) {
            return Self::new();
        }
        Self { entries: self.entries.iter().map(|(i, e)| (*i, f.mul(a, e))).collect() }
    }

    /// `self + a * x`.
    pub fn axpy<F: Field<Elem = E>>(&self, f: &F, a: &E, x: &Self) -> Self {
        if f.is_zero(a) || x.is_empty() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() + x.len());
        let (mut p, mut q) = (0, 0);
        while p < self.entries.len() || q < x.entries.len() {
            let take_left = q >= x.entries.len()
                || (p < self.entries.len() && self.entries[p].0 < x.entries[q].0);
            if take_left {
                out.push(self.entries[p].clone());
                p += 1;
            } else if p >= self.entries.len() || x.entries[q].0 < self.entries[p].0 {
                out.push((x.entries[q].0, f.mul(a, &x.entries[q].1)));
                q += 1;
            } else {
                let s = f.add(&self.entries[p].1, &f.mul(a, &x.entries[q].1));
                if !f.is_zero(&s) {
                    out.push((self.entries[p].0, s));
                }
                p += 1;
                q += 1;
            }
        }
        Self { entries: out }
    }

    pub fn map<G: Clone + PartialEq>(&self, mut g: impl FnMut(&E) -> Option<G>) -> Option<SparseVector<G>> {
        let mut entries = Vec::with_capacity(self.len());
        for (i, e) in &self.entries {
            entries.push((*i, g(e)?));
        }
        Some(SparseVector { entries })
    }

    /// Keep only the coordinates accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self { entries: self.entries.iter().filter(|(i, _)| keep(*i)).cloned().collect() }
    }
}

impl SparseVector<PLocalRational> {
    pub fn from_i64(values: &[i64]) -> Self {
        Self::from_pairs(
            &Rationals,
            values.iter().enumerate().map(|(i, &v)| (i, PLocalRational::from_i64(v))),
        )
    }

    pub fn from_rationals(values: &[PLocalRational]) -> Self {
        Self::from_pairs(&Rationals, values.iter().cloned().enumerate())
    }
}

/// Linear combination `sum coeffs[i] * vectors[i]`.
pub fn combine<F: Field>(f: &F, vectors: &[SparseVector<F::Elem>], coeffs: &[F::Elem]) -> SparseVector<F::Elem> {
    vectors
        .iter()
        .zip(coeffs)
        .fold(SparseVector::new(), |acc, (v, c)| acc.axpy(f, c, v))
}

/// Outcome of inserting a vector into an [`Echelon`].
#[derive(Debug, Clone, PartialEq)]
pub enum Insertion<E> {
    /// New pivot at this leading index.
    Pivot(usize),
    /// The vector depends on earlier inputs; the relation is over input positions when tracked.
    Dependent(SparseVector<E>),
}

/// Incremental semi-echelon form with lowest-index pivoting and optional input tracking.
pub struct Echelon<F: Field> {
    field: F,
    rows: Vec<SparseVector<F::Elem>>,
    combos: Vec<SparseVector<F::Elem>>,
    lead_row: FxHashMap<usize, usize>,
    pivot_inputs: Vec<usize>,
    inserted: usize,
    track: bool,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, track: bool) -> Self {
        Self {
            field,
            rows: Vec::new(),
            combos: Vec::new(),
            lead_row: FxHashMap::default(),
            pivot_inputs: Vec::new(),
            inserted: 0,
            track,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Input positions that produced pivots, in insertion order.
    pub fn pivot_inputs(&self) -> &[usize] {
        &self.pivot_inputs
    }

    /// Leading indices of the stored rows in insertion order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.leading().expect("nonzero row").0).collect()
    }

    /// Returns `(remainder, combo)` with `v = remainder + sum combo_j input_j` when tracked.
    pub fn reduce(&self, v: &SparseVector<F::Elem>) -> (SparseVector<F::Elem>, SparseVector<F::Elem>) {
        let f = &self.field;
        let mut rem = v.clone();
        let mut combo = SparseVector::new();
        let mut kept: Vec<(usize, F::Elem)> = Vec::new();
        while let Some((lead, c)) = rem.leading().map(|(i, c)| (i, c.clone())) {
            match self.lead_row.get(&lead) {
                Some(&r) => {
                    rem = rem.axpy(f, &f.neg(&c), &self.rows[r]);
                    if self.track {
                        combo = combo.axpy(f, &c, &self.combos[r]);
                    }
                }
                None => {
                    kept.push((lead, c));
                    rem.entries.remove(0);
                }
            }
        }
        (SparseVector { entries: kept }, combo)
    }

    /// Leading-term membership test: true iff `v` lies in the span of the inputs so far.
    pub fn contains(&self, v: &SparseVector<F::Elem>) -> bool {
        let f = &self.field;
        let mut rem = v.clone();
        while let Some((lead, c)) = rem.leading().map(|(i, c)| (i, c.clone())) {
            match self.lead_row.get(&lead) {
                Some(&r) => rem = rem.axpy(f, &f.neg(&c), &self.rows[r]),
                None => return false,
            }
        }
        true
    }

    pub fn insert(&mut self, v: &SparseVector<F::Elem>) -> Insertion<F::Elem> {
        let id = self.inserted;
        self.inserted += 1;
        let f = &self.field;
        let mut rem = v.clone();
        let mut combo = if self.track { SparseVector::unit(f, id) } else { SparseVector::new() };
        while let Some((lead, c)) = rem.leading().map(|(i, c)| (i, c.clone())) {
            match self.lead_row.get(&lead) {
                Some(&r) => {
                    let m = f.neg(&c);
                    rem = rem.axpy(f, &m, &self.rows[r]);
                    if self.track {
                        combo = combo.axpy(f, &m, &self.combos[r]);
                    }
                }
                None => {
                    let s = f.inv(&c);
                    let row = rem.scale(f, &s);
                    if self.track {
                        combo = combo.scale(f, &s);
                    }
                    self.lead_row.insert(lead, self.rows.len());
                    self.rows.push(row);
                    self.combos.push(combo);
                    self.pivot_inputs.push(id);
                    return Insertion::Pivot(lead);
                }
            }
        }
        Insertion::Dependent(combo)
    }
}

/// How [`rank`] computes its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    Exact,
    /// Rank modulo a random word-sized prime, optionally certified exactly.
    Modular { certify: bool, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOutcome {
    pub rank: usize,
    pub modulus: Option<u64>,
    /// True when the value equals the rank over Q.
    pub certified: bool,
}

pub fn rank(vectors: &[SparseVector], mode: RankMode) -> usize {
    rank_detailed(vectors, mode).rank
}

pub fn exact_rank(vectors: &[SparseVector]) -> usize {
    let mut e = Echelon::new(Rationals, false);
    vectors.iter().for_each(|v| {
        e.insert(v);
    });
    e.rank()
}

pub fn rank_detailed(vectors: &[SparseVector], mode: RankMode) -> RankOutcome {
    let RankMode::Modular { certify, seed } = mode else {
        return RankOutcome { rank: exact_rank(vectors), modulus: None, certified: true };
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (field, reduced) = loop {
        let field = PrimeField::new(random_word_prime(&mut rng));
        let reduced: Option<Vec<SparseVector<u64>>> =
            vectors.iter().map(|v| v.map(|c| field.reduce_rational(c))).collect();
        if let Some(r) = reduced {
            break (field, r.into_iter().map(|v| SparseVector::from_pairs(&field, v.entries)).collect::<Vec<_>>());
        }
    };
    let mut ech = Echelon::new(field, false);
    for v in &reduced {
        ech.insert(v);
    }
    let r = ech.rank();
    let q = Some(field.modulus());
    if r == vectors.len() {
        return RankOutcome { rank: r, modulus: q, certified: true };
    }
    if !certify {
        return RankOutcome { rank: r, modulus: q, certified: false };
    }
    if certify_dependencies(vectors, ech.pivot_inputs(), &ech.pivot_columns()) {
        RankOutcome { rank: r, modulus: q, certified: true }
    } else {
        RankOutcome { rank: exact_rank(vectors), modulus: q, certified: true }
    }
}

/// Checks exactly that every non-pivot input lies in the Q-span of the pivot inputs.
fn certify_dependencies(vectors: &[SparseVector], pivots: &[usize], columns: &[usize]) -> bool {
    let colset: rustc_hash::FxHashSet<usize> = columns.iter().copied().collect();
    let mut sub = Echelon::new(Rationals, true);
    for &i in pivots {
        sub.insert(&vectors[i].restrict(|c| colset.contains(&c)));
    }
    let basis: Vec<&SparseVector> = pivots.iter().map(|&i| &vectors[i]).collect();
    let is_pivot: rustc_hash::FxHashSet<usize> = pivots.iter().copied().collect();
    (0..vectors.len()).filter(|i| !is_pivot.contains(i)).all(|i| {
        let (rem, combo) = sub.reduce(&vectors[i].restrict(|c| colset.contains(&c)));
        if !rem.is_empty() {
            return false;
        }
        let rebuilt = combo
            .iter()
            .fold(SparseVector::new(), |acc, (j, c)| acc.axpy(&Rationals, c, basis[j]));
        rebuilt == vectors[i]
    })
}

/// A basis of the relation space `{c : sum c_i v_i = 0}`.
pub fn kernel<F: Field + Clone>(field: &F, vectors: &[SparseVector<F::Elem>]) -> Vec<SparseVector<F::Elem>> {
    let mut e = Echelon::new(field.clone(), true);
    vectors
        .iter()
        .filter_map(|v| match e.insert(v) {
            Insertion::Dependent(rel) => Some(rel),
            Insertion::Pivot(_) => None,
        })
        .collect()
}

/// Result of [`certified_kernel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelOutcome {
    pub basis: Vec<SparseVector>,
    pub modulus: Option<u64>,
    /// True when the modular relations did not all lift and exact elimination was used.
    pub fallback: bool,
}

/// Relation space of `vectors` over Q: relations found modulo a random prime, lifted by rational
/// reconstruction and accepted only if they vanish exactly; otherwise exact elimination.
pub fn certified_kernel(vectors: &[SparseVector], seed: u64) -> KernelOutcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let field = PrimeField::new(random_word_prime(&mut rng));
        let Some(reduced) = vectors
            .iter()
            .map(|v| v.map(|c| field.reduce_rational(c)).map(|m| SparseVector::from_pairs(&field, m.entries)))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let relations = kernel(&field, &reduced);
        let lifted: Option<Vec<SparseVector>> = relations
            .iter()
            .map(|rel| {
                let pairs: Option<Vec<(usize, PLocalRational)>> =
                    rel.iter().map(|(i, &c)| rational_reconstruction(c, field.modulus()).map(|q| (i, q))).collect();
                let cand = SparseVector::from_pairs(&Rationals, pairs?);
                let sum = cand.iter().fold(SparseVector::new(), |acc, (i, c)| acc.axpy(&Rationals, c, &vectors[i]));
                sum.is_empty().then_some(cand)
            })
            .collect();
        if let Some(basis) = lifted {
            return KernelOutcome { basis, modulus: Some(field.modulus()), fallback: false };
        }
        return KernelOutcome { basis: kernel(&Rationals, vectors), modulus: Some(field.modulus()), fallback: true };
    }
    KernelOutcome { basis: kernel(&Rationals, vectors), modulus: None, fallback: true }
}

/// The fraction `r/s` with `|r|, s < sqrt(q/2)` congruent to `a` modulo `q`, if one exists.
pub fn rational_reconstruction(a: u64, q: u64) -> Option<PLocalRational> {
    let bound = ((q / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (q as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 >= bound {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if t1 == 0 || t1.abs() >= bound || num_integer::gcd(r1, t1) != 1 {
        return None;
    }
    let (num, den) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
    PLocalRational::new(num_bigint::BigInt::from(num), num_bigint::BigInt::from(den)).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locality {
    OverQ,
    /// Coefficients must lie in Z_(p).
    OverZp(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanQuery {
    pub target: SparseVector,
    pub generators: Vec<SparseVector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpanAnswer {
    No,
    Yes(Vec<PLocalRational>),
}

impl SpanAnswer {
    pub fn is_yes(&self) -> bool {
        matches!(self, SpanAnswer::Yes(_))
    }
}

pub fn in_span(query: &SpanQuery, locality: Locality) -> SpanAnswer {
    let n = query.generators.len();
    let mut e = Echelon::new(Rationals, true);
    query.generators.iter().for_each(|g| {
        e.insert(g);
    });
    let (rem, combo) = e.reduce(&query.target);
    if !rem.is_empty() {
        return SpanAnswer::No;
    }
    let mut coeffs = vec![PLocalRational::zero(); n];
    for (j, c) in combo.iter() {
        coeffs[j] = c.clone();
    }
    match locality {
        Locality::OverQ => SpanAnswer::Yes(coeffs),
        Locality::OverZp(p) => {
            if coeffs.iter().all(|c| c.is_p_local(p)) {
                SpanAnswer::Yes(coeffs)
            } else {
                local_solution(query, p)
            }
        }
    }
}

/// Smith-style elimination over the discrete valuation ring Z_(p).
fn local_solution(query: &SpanQuery, p: u64) -> SpanAnswer {
    let n = query.generators.len();
    let mut rows: Vec<usize> = query
        .generators
        .iter()
        .chain(std::iter::once(&query.target))
        .flat_map(|v| v.iter().map(|(i, _)| i))
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let pos: FxHashMap<usize, usize> = rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = rows.len();
    let mut a = vec![vec![PLocalRational::zero(); n]; m];
    for (j, g) in query.generators.iter().enumerate() {
        for (i, c) in g.iter() {
            a[pos[&i]][j] = c.clone();
        }
    }
    let mut b = vec![PLocalRational::zero(); m];
    for (i, c) in query.target.iter() {
        b[pos[&i]] = c.clone();
    }
    let min_val = a
        .iter()
        .flatten()
        .chain(b.iter())
        .filter_map(|c| c.valuation(p))
        .min()
        .unwrap_or(0);
    if min_val < 0 {
        let s = PLocalRational::from_integer(num_bigint::BigInt::from(p).pow((-min_val) as u32));
        a.iter_mut().flatten().chain(b.iter_mut()).for_each(|c| *c = &*c * &s);
    }
    // x = C y, with C invertible over Z_(p)
    let mut c: Vec<Vec<PLocalRational>> = (0..n)
        .map(|i| (0..n).map(|j| PLocalRational::from_i64((i == j) as i64)).collect())
        .collect();
    let r = m.min(n);
    let mut rank = 0;
    for k in 0..r {
        let best = (k..m)
            .flat_map(|i| (k..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| a[i][j].valuation(p).map(|v| (v, i, j)))
            .min();
        let Some((_, pi, pj)) = best else { break };
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in c.iter_mut() {
            row.swap(k, pj);
        }
        let pivot_row = a[k].clone();
        let piv = pivot_row[k].clone();
        for i in 0..m {
            if i != k && !a[i][k].is_zero() {
                let f = a[i][k].checked_div(&piv).expect("nonzero pivot");
                for (x, y) in a[i].iter_mut().zip(&pivot_row).skip(k) {
                    *x -= &(y * &f);
                }
                let t = &b[k] * &f;
                b[i] -= &t;
            }
        }
        for j in (k + 1)..n {
            if !a[k][j].is_zero() {
                let f = a[k][j].checked_div(&piv).expect("nonzero pivot");
                for row in a.iter_mut() {
                    let t = &row[k] * &f;
                    row[j] -= &t;
                }
                for row in c.iter_mut() {
                    let t = &row[k] * &f;
                    row[j] -= &t;
                }
            }
        }
        rank += 1;
    }
    if b[rank..].iter().any(|x| !x.is_zero()) {
        return SpanAnswer::No;
    }
    let mut y = vec![PLocalRational::zero(); n];
    for k in 0..rank {
        y[k] = b[k].checked_div(&a[k][k]).expect("nonzero pivot");
        if !y[k].is_p_local(p) {
            return SpanAnswer::No;
        }
    }
    let x: Vec<PLocalRational> = (0..n)
        .map(|i| (0..n).fold(PLocalRational::zero(), |acc, j| acc + &c[i][j] * &y[j]))
        .collect();
    SpanAnswer::Yes(x)
}
