//! Cycles and boundaries in a fixed degree, computed blockwise over multidegrees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::{DglError, DglPresentation};
use crate::field::{Coeff, Mod61, Mod61Field, MERSENNE_61};
use crate::frobenius::degree_support_over;
use crate::lie::{lie_dimension, lie_multidegree_basis, lyndon_words, LieBasisElement, LieExpression, LyndonExpander, MultiDegree};
use crate::linalg::{certified_kernel, exact_rank, in_span, kernel, rational_reconstruction, Locality, SpanAnswer, SpanQuery, SparseVector};
use crate::plocal::PLocalRational;
use crate::tensor::{Alphabet, Letter, TensorDerivation, TensorElement, Word};

/// Default work budget, in free Lie basis elements.
pub const DEFAULT_BUDGET: u128 = 60_000;
const CACHED_WORD_LEN: usize = 9;
/// Preimage blocks up to this size are decided by an exact span test before anything else.
const SMALL_BLOCK: u128 = 4_000;

pub type MultiDegreeFilter = Arc<dyn Fn(&MultiDegree) -> bool + Send + Sync>;

/// Restrictions and limits shared by the cycle and boundary computations.
#[derive(Clone)]
pub struct CycleOptions {
    /// Work in the sub-dgl generated by these letters.
    pub letters: Option<Vec<Letter>>,
    pub filter: Option<MultiDegreeFilter>,
    pub budget: u128,
    pub seed: u64,
    /// Letter permutations commuting with the differential, used to transport bases between blocks.
    pub symmetries: Vec<Vec<Letter>>,
    /// Re-check every basis element by exact expansion.
    pub verify: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { letters: None, filter: None, budget: DEFAULT_BUDGET, seed: 0x5eed, symmetries: Vec::new(), verify: true }
    }
}

impl fmt::Debug for CycleOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CycleOptions")
            .field("letters", &self.letters)
            .field("filtered", &self.filter.is_some())
            .field("budget", &self.budget)
            .field("seed", &self.seed)
            .field("symmetries", &self.symmetries.len())
            .finish()
    }
}

impl CycleOptions {
    pub fn with_letters(mut self, letters: Vec<Letter>) -> Self {
        self.letters = Some(letters);
        self
    }

    pub fn with_filter(mut self, f: impl Fn(&MultiDegree) -> bool + Send + Sync + 'static) -> Self {
        self.filter = Some(Arc::new(f));
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }
}

/// The differential seen from one sub-dgl: multidegree shifts, reachable factors and derivations.
pub(crate) struct DifferentialData<'p> {
    pub pres: &'p DglPresentation,
    pub letters: Vec<Letter>,
    allowed: Vec<bool>,
    shifts: Vec<Vec<MultiDegree>>,
    factors: FxHashMap<Letter, Vec<Word>>,
    pub exact: TensorDerivation<PLocalRational>,
    pub modular: TensorDerivation<Mod61>,
}

impl<'p> DifferentialData<'p> {
    pub fn new(pres: &'p DglPresentation, letters: Option<&[Letter]>) -> Result<Self, DglError> {
        let a = pres.alphabet();
        let letters: Vec<Letter> = match letters {
            Some(ls) => {
                let mut v = ls.to_vec();
                v.sort_unstable();
                v.dedup();
                v
            }
            None => pres.letters().collect(),
        };
        let mut allowed = vec![false; a.len()];
        for &l in &letters {
            allowed[l as usize] = true;
        }
        let mut shifts = vec![Vec::new(); a.len()];
        let mut factors: FxHashMap<Letter, Vec<Word>> = FxHashMap::default();
        let mut exact = TensorDerivation::new(-1);
        let mut modular = TensorDerivation::new(-1);
        for l in pres.letters() {
            let img: TensorElement<PLocalRational> = pres.differential(l).expand(a)?;
            let md: BTreeSet<MultiDegree> = img.terms().map(|(w, _)| MultiDegree::from_letters(w.iter().copied())).collect();
            if allowed[l as usize] {
                if md.iter().flat_map(|m| m.iter()).any(|(x, _)| !allowed[x as usize]) {
                    return Err(DglError::BadParameters(format!("letters do not span a sub-dgl: d({}) leaves them", a.name(l))));
                }
                shifts[l as usize] = md.into_iter().collect();
                if !img.is_zero() {
                    let mut words: Vec<Word> = img.terms().map(|(w, _)| w.clone()).collect();
                    words.sort();
                    factors.insert(l, words);
                }
            }
            modular.set_image(l, img.to_coeff::<Mod61>().ok_or_else(|| DglError::BadParameters("coefficient not invertible mod 2^61-1".into()))?);
            exact.set_image(l, img);
        }
        Ok(Self { pres, letters, allowed, shifts, factors, exact, modular })
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.pres.alphabet()
    }

    fn check_letters(&self, e: &LieExpression) -> Result<(), DglError> {
        match e.letters().into_iter().find(|&l| !self.allowed[l as usize]) {
            Some(l) => Err(DglError::BadParameters(format!("{} is outside the chosen letters", self.alphabet().name(l)))),
            None => Ok(()),
        }
    }

    /// Multidegrees of the image of a multidegree-`m` component.
    pub fn targets(&self, m: &MultiDegree) -> Vec<MultiDegree> {
        let mut out = BTreeSet::new();
        for (l, _) in m.iter() {
            let Some(rest) = m.checked_sub(&MultiDegree::from_pairs([(l, 1)])) else { continue };
            for d in &self.shifts[l as usize] {
                out.insert(rest.add(d));
            }
        }
        out.into_iter().collect()
    }

    /// Multidegrees one degree up whose image meets multidegree `t`.
    pub fn sources(&self, t: &MultiDegree) -> Vec<MultiDegree> {
        let mut out = BTreeSet::new();
        for &l in &self.letters {
            for d in &self.shifts[l as usize] {
                if let Some(rest) = t.checked_sub(d) {
                    let s = rest.add(&MultiDegree::from_pairs([(l, 1)]));
                    if lie_dimension(self.alphabet(), &s) > 0 {
                        out.insert(s);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Whether `w` has a factor equal to a word of some `d(l)`; boundaries only contain such words.
    pub fn reachable(&self, w: &[Letter]) -> bool {
        (0..w.len()).any(|i| {
            self.factors.iter().any(|(_, fs)| fs.iter().any(|f| f.len() <= w.len() - i && w[i..i + f.len()] == f[..]))
        })
    }

    pub fn is_cycle_expansion(&self, e: &TensorElement<PLocalRational>) -> Result<bool, DglError> {
        Ok(self.exact.apply(e, self.alphabet())?.is_zero())
    }

    pub fn support(&self, degree: u32, filter: Option<&MultiDegreeFilter>) -> Vec<(MultiDegree, u128)> {
        degree_support_over(self.alphabet(), &self.letters, degree, &[])
            .multidegrees
            .into_iter()
            .filter(|m| filter.is_none_or(|f| f(m)))
            .filter_map(|m| {
                let d = lie_dimension(self.alphabet(), &m);
                (d > 0).then_some((m, d))
            })
            .collect()
    }
}

/// Leading words of the Lie basis of `md`; projection onto them is injective on Lie elements.
pub fn key_words(alphabet: &Alphabet, md: &MultiDegree) -> Vec<Word> {
    let mut out = lyndon_words(md);
    if let Some(h) = md.half() {
        if h.is_odd(alphabet) {
            out.extend(lyndon_words(&h).into_iter().map(|u| {
                let mut w = u.clone();
                w.extend_from_slice(&u);
                w
            }));
        }
    }
    out
}

struct Keys(FxHashMap<Word, usize>);

impl Keys {
    fn new<'a>(alphabet: &Alphabet, mds: impl IntoIterator<Item = &'a MultiDegree>) -> Self {
        let mut map = FxHashMap::default();
        for md in mds {
            for w in key_words(alphabet, md) {
                let n = map.len();
                map.entry(w).or_insert(n);
            }
        }
        Self(map)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn project<C: Coeff>(&self, e: &TensorElement<C>) -> SparseVector<C> {
        SparseVector::from_pairs(&C::field(), e.terms().filter_map(|(w, c)| self.0.get(w).map(|&i| (i, c.clone()))))
    }
}

fn boundary_columns<C: Coeff>(data: &DifferentialData, deriv: &TensorDerivation<C>, basis: &[LieBasisElement], keys: &Keys) -> Vec<SparseVector<C>> {
    let a = data.alphabet();
    basis
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let mut exp = LyndonExpander::<C>::with_cache_limit(a, CACHED_WORD_LEN);
            chunk
                .iter()
                .map(|b| keys.project(&deriv.apply(&exp.basis_element(b), a).expect("every letter has an image")))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn combination_expression(basis: &[LieBasisElement], coeffs: &[(usize, PLocalRational)]) -> LieExpression {
    if let [(i, c)] = coeffs {
        if c.is_one() {
            return basis[*i].bracketing.clone();
        }
    }
    LieExpression::sum(coeffs.iter().map(|(i, c)| (c.clone(), basis[*i].bracketing.clone())))
}

/// Clear denominators and common factors; the first coefficient becomes positive.
fn primitive(coeffs: &[(usize, PLocalRational)]) -> Vec<(usize, PLocalRational)> {
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|(_, c)| c.numer() * (&lcm / c.denom())).collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Vec::new();
    }
    if ints[0].is_negative() {
        g = -g;
    }
    coeffs.iter().zip(ints).map(|((i, _), n)| (*i, PLocalRational::from_integer(n / &g))).collect()
}

fn exact_expansion(data: &DifferentialData, basis: &[LieBasisElement], coeffs: &[(usize, PLocalRational)]) -> TensorElement<PLocalRational> {
    let mut exp = LyndonExpander::<PLocalRational>::with_cache_limit(data.alphabet(), CACHED_WORD_LEN);
    let mut acc = TensorElement::zero();
    for (i, c) in coeffs {
        acc.add_scaled(&exp.basis_element(&basis[*i]), c);
    }
    acc
}

/// Relations among the boundaries of one block.
struct BlockKernel {
    basis: Vec<LieBasisElement>,
    relations: Vec<Vec<(usize, PLocalRational)>>,
    keys: usize,
    fallback: bool,
}

fn block_kernel(data: &DifferentialData, sources: &[MultiDegree], targets: &[MultiDegree], seed: u64) -> BlockKernel {
    let a = data.alphabet();
    let basis: Vec<LieBasisElement> = sources.iter().flat_map(|m| lie_multidegree_basis(a, m)).collect();
    if targets.is_empty() {
        let relations = (0..basis.len()).map(|i| vec![(i, PLocalRational::one())]).collect();
        return BlockKernel { basis, relations, keys: 0, fallback: false };
    }
    let keys = Keys::new(a, targets);
    let modular = boundary_columns(data, &data.modular, &basis, &keys);
    let lifted: Option<Vec<Vec<(usize, PLocalRational)>>> = kernel(&Mod61Field, &modular)
        .into_iter()
        .map(|rel| {
            let pairs: Option<Vec<(usize, PLocalRational)>> =
                rel.iter().map(|(i, c): (usize, &Mod61)| rational_reconstruction(c.0, MERSENNE_61).map(|q| (i, q))).collect();
            let pairs = primitive(&pairs?);
            let ex = exact_expansion(data, &basis, &pairs);
            data.is_cycle_expansion(&ex).ok()?.then_some(pairs)
        })
        .collect();
    if let Some(relations) = lifted {
        return BlockKernel { basis, relations, keys: keys.len(), fallback: false };
    }
    let exact = boundary_columns(data, &data.exact, &basis, &keys);
    let outcome = certified_kernel(&exact, seed);
    let relations = outcome.basis.iter().map(|v| primitive(v.entries())).collect();
    BlockKernel { basis, relations, keys: keys.len(), fallback: true }
}

/// Multidegrees of one degree linked through shared image multidegrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub sources: Vec<MultiDegree>,
    pub targets: Vec<MultiDegree>,
    pub columns: u128,
}

fn components(data: &DifferentialData, support: Vec<(MultiDegree, u128)>) -> Vec<Component> {
    let n = support.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let targets: Vec<Vec<MultiDegree>> = support.par_iter().map(|(m, _)| data.targets(m)).collect();
    let mut owner: BTreeMap<&MultiDegree, usize> = BTreeMap::new();
    for (i, ts) in targets.iter().enumerate() {
        for t in ts {
            match owner.get(t) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
                None => {
                    owner.insert(t, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .into_values()
        .map(|idx| {
            let ts: BTreeSet<MultiDegree> = idx.iter().flat_map(|&i| targets[i].iter().cloned()).collect();
            Component {
                sources: idx.iter().map(|&i| support[i].0.clone()).collect(),
                targets: ts.into_iter().collect(),
                columns: idx.iter().map(|&i| support[i].1).sum(),
            }
        })
        .collect()
}

/// A basis cycle with its label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleElement {
    pub label: String,
    /// Sorted vertex names occurring in the cycle's letters.
    pub class: Vec<String>,
    /// Index within its class, from 1.
    pub index: usize,
    #[serde(serialize_with = "serialize_expression_debug")]
    pub expression: LieExpression,
    pub block: usize,
}

fn serialize_expression_debug<S: serde::Serializer>(e: &LieExpression, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{e:?}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentBlock {
    pub component: Component,
    pub rank: usize,
    pub nullity: usize,
    /// Representative block and index of the symmetry carrying it here.
    pub transported_from: Option<(usize, usize)>,
    pub exact_fallback: bool,
    pub key_rows: usize,
}

/// Basis of the cycles in one degree, labelled by vertex content.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleBasis {
    pub degree: u32,
    pub layer: u8,
    pub elements: Vec<CycleElement>,
    pub blocks: Vec<ComponentBlock>,
    pub columns: u128,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn expressions(&self) -> impl Iterator<Item = &LieExpression> {
        self.elements.iter().map(|e| &e.expression)
    }

    /// Counts per class size: pure-w, one vertex, two vertices, more.
    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for e in &self.elements {
            *m.entry(e.class.len()).or_insert(0) += 1;
        }
        m
    }

    /// Exact check: every element is a cycle of the stated degree and the expansions are independent.
    pub fn verify(&self, pres: &DglPresentation) -> Result<(), DglError> {
        let a = pres.alphabet();
        let d = pres.derivation::<PLocalRational>()?;
        let expansions: Vec<TensorElement<PLocalRational>> =
            self.elements.par_iter().map(|e| e.expression.expand(a)).collect::<Result<_, _>>()?;
        for (e, ex) in self.elements.iter().zip(&expansions) {
            if e.expression.degree(a)? != Some(self.degree) || !d.apply(ex, a)?.is_zero() {
                return Err(DglError::NotACycle(e.label.clone()));
            }
        }
        let mut by_block: BTreeMap<usize, Vec<&TensorElement<PLocalRational>>> = BTreeMap::new();
        for (e, ex) in self.elements.iter().zip(&expansions) {
            by_block.entry(e.block).or_default().push(ex);
        }
        for (b, exs) in by_block {
            let keys = Keys::new(a, &self.blocks[b].component.sources);
            let vs: Vec<SparseVector> = exs.iter().map(|x| keys.project(x)).collect();
            if exact_rank(&vs) != vs.len() {
                return Err(DglError::NotACycle(format!("dependent cycles in block {b}")));
            }
        }
        Ok(())
    }
}

fn class_of(alphabet: &Alphabet, e: &LieExpression) -> Vec<String> {
    let mut v: Vec<String> = e.letters().into_iter().flat_map(|l| alphabet.name(l).vertices().into_iter().map(str::to_string)).collect();
    v.sort();
    v.dedup();
    v
}

pub fn cycle_label(layer: u8, class: &[String], index: usize) -> String {
    if class.is_empty() {
        format!("y{layer}.{index}")
    } else {
        format!("y{layer}.{}.{index}", class.join("~"))
    }
}

fn permute_md(md: &MultiDegree, perm: &[Letter]) -> MultiDegree {
    MultiDegree::from_pairs(md.iter().map(|(l, k)| (perm[l as usize], k)))
}

fn budget_error(comps: &[&Component], budget: u128) -> DglError {
    let needed: u128 = comps.iter().map(|c| c.columns).sum();
    let mut big: Vec<&&Component> = comps.iter().collect();
    big.sort_by_key(|c| std::cmp::Reverse(c.columns));
    let detail = big.iter().take(3).map(|c| format!("{} multidegrees / {} columns", c.sources.len(), c.columns)).collect::<Vec<_>>().join("; ");
    DglError::BudgetExceeded { needed, budget, detail }
}

/// Kernel of the differential on the degree-`degree` component, blockwise.
pub fn cycle_space_basis(pres: &DglPresentation, degree: u32, options: &CycleOptions) -> Result<CycleBasis, DglError> {
    let data = DifferentialData::new(pres, options.letters.as_deref())?;
    let a = pres.alphabet();
    let comps = components(&data, data.support(degree, options.filter.as_ref()));
    let first_source: BTreeMap<&MultiDegree, usize> = comps.iter().enumerate().map(|(i, c)| (&c.sources[0], i)).collect();
    let by_source: BTreeMap<&MultiDegree, usize> =
        comps.iter().enumerate().flat_map(|(i, c)| c.sources.iter().map(move |m| (m, i))).collect();
    let mut origin: Vec<Option<(usize, usize)>> = vec![None; comps.len()];
    let mut is_rep = vec![false; comps.len()];
    for i in 0..comps.len() {
        if origin[i].is_some() || is_rep[i] {
            continue;
        }
        is_rep[i] = true;
        for (s, perm) in options.symmetries.iter().enumerate() {
            let img: Vec<MultiDegree> = comps[i].sources.iter().map(|m| permute_md(m, perm)).collect();
            let Some(&j) = by_source.get(&img[0]) else { continue };
            if j == i || is_rep[j] || origin[j].is_some() {
                continue;
            }
            let mut sorted = img.clone();
            sorted.sort();
            if sorted == comps[j].sources && first_source.contains_key(&comps[j].sources[0]) {
                origin[j] = Some((i, s));
            }
        }
    }
    let reps: Vec<&Component> = comps.iter().zip(&is_rep).filter(|(_, r)| **r).map(|(c, _)| c).collect();
    let work: u128 = reps.iter().map(|c| if c.targets.is_empty() { 0 } else { c.columns }).sum();
    let columns: u128 = comps.iter().map(|c| c.columns).sum();
    if work > options.budget || columns > options.budget.saturating_mul(64) {
        return Err(budget_error(&reps, options.budget));
    }
    let kernels: Vec<Option<BlockKernel>> = comps
        .par_iter()
        .enumerate()
        .map(|(i, c)| is_rep[i].then(|| block_kernel(&data, &c.sources, &c.targets, options.seed ^ i as u64)))
        .collect();
    let mut cycles: Vec<Vec<LieExpression>> = vec![Vec::new(); comps.len()];
    for (i, k) in kernels.iter().enumerate() {
        if let Some(k) = k {
            cycles[i] = k.relations.iter().map(|r| combination_expression(&k.basis, r)).collect();
        }
    }
    for i in 0..comps.len() {
        if let Some((r, s)) = origin[i] {
            let perm = &options.symmetries[s];
            cycles[i] = cycles[r].iter().map(|e| e.substitute(&|l| LieExpression::leaf(perm[l as usize]))).collect();
        }
    }
    let layer = pres.level();
    let mut counters: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let mut elements = Vec::new();
    let mut blocks = Vec::new();
    for (i, (c, cs)) in comps.into_iter().zip(cycles).enumerate() {
        let src = origin[i].map(|(r, _)| r).unwrap_or(i);
        let (key_rows, fallback) = kernels[src].as_ref().map(|k| (k.keys, k.fallback)).unwrap_or((0, false));
        let nullity = cs.len();
        for e in cs {
            let class = class_of(a, &e);
            let counter = counters.entry(class.clone()).or_insert(0);
            *counter += 1;
            elements.push(CycleElement { label: cycle_label(layer, &class, *counter), class, index: *counter, expression: e, block: i });
        }
        let rank = (c.columns as usize) - nullity;
        blocks.push(ComponentBlock { component: c, rank, nullity, transported_from: origin[i], exact_fallback: fallback, key_rows });
    }
    let basis = CycleBasis { degree, layer, elements, blocks, columns };
    if options.verify {
        basis.verify(pres)?;
    }
    Ok(basis)
}

/// Rank of the boundary map on each block of a degree, certifying a zero cycle space when full.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroCycleCertificate {
    pub degree: u32,
    pub components: Vec<Component>,
    /// Modular rank per component.
    pub ranks: Vec<usize>,
    pub modulus: u64,
}

impl ZeroCycleCertificate {
    /// Full column rank modulo a prime bounds the rational rank from below, so then the kernel is zero.
    pub fn is_zero(&self) -> bool {
        self.components.iter().zip(&self.ranks).all(|(c, r)| c.columns == *r as u128)
    }

    pub fn nullity(&self) -> u128 {
        self.components.iter().zip(&self.ranks).map(|(c, r)| c.columns - *r as u128).sum()
    }
}

pub fn zero_cycle_certificate(pres: &DglPresentation, degree: u32, options: &CycleOptions) -> Result<ZeroCycleCertificate, DglError> {
    let data = DifferentialData::new(pres, options.letters.as_deref())?;
    let comps = components(&data, data.support(degree, options.filter.as_ref()));
    let refs: Vec<&Component> = comps.iter().collect();
    if comps.iter().map(|c| c.columns).sum::<u128>() > options.budget {
        return Err(budget_error(&refs, options.budget));
    }
    let ranks = comps
        .iter()
        .map(|c| {
            if c.targets.is_empty() {
                return 0;
            }
            let basis: Vec<LieBasisElement> = c.sources.iter().flat_map(|m| lie_multidegree_basis(data.alphabet(), m)).collect();
            let keys = Keys::new(data.alphabet(), &c.targets);
            let cols = boundary_columns(&data, &data.modular, &basis, &keys);
            modular_rank(&cols)
        })
        .collect();
    Ok(ZeroCycleCertificate { degree, components: comps, ranks, modulus: MERSENNE_61 })
}

fn modular_rank(cols: &[SparseVector<Mod61>]) -> usize {
    let mut e = crate::linalg::Echelon::new(Mod61Field, false);
    for c in cols {
        e.insert(c);
    }
    e.rank()
}

/// A nonzero boundary in the given degree, found by applying the differential to basis elements one degree up.
pub fn boundary_witness_search(
    pres: &DglPresentation,
    degree: u32,
    options: &CycleOptions,
) -> Result<Option<(LieExpression, LieExpression)>, DglError> {
    let data = DifferentialData::new(pres, options.letters.as_deref())?;
    let a = pres.alphabet();
    let mut support: Vec<(MultiDegree, u128)> =
        data.support(degree + 1, None).into_iter().filter(|(m, _)| !data.targets(m).is_empty()).collect();
    if let Some(f) = &options.filter {
        support.retain(|(m, _)| data.targets(m).iter().any(|t| f(t)));
    }
    support.sort_by_key(|(m, d)| (*d, m.clone()));
    let mut spent = 0u128;
    for (m, _) in support {
        for b in lie_multidegree_basis(a, &m) {
            spent += 1;
            if spent > options.budget {
                return Ok(None);
            }
            let db = pres.d_expression(&b.bracketing)?;
            let ex: TensorElement<PLocalRational> = db.expand(a)?;
            if !ex.is_zero() {
                return Ok(Some((b.bracketing, db)));
            }
        }
    }
    Ok(None)
}

/// Why an element is not a boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NonBoundaryCertificate {
    /// No multidegree one degree up maps onto the element's support.
    NoSources,
    /// A word of the expansion contains no word of any generator's differential as a factor.
    UnreachableWord { word: String },
    /// Projections onto unreachable words have full rank.
    UnreachableRank { words: usize, rank: usize },
    /// Exact span test on the full preimage block.
    SpanCheck { columns: usize, rows: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMethod {
    Span,
    Structural,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryAnswer {
    No(NonBoundaryCertificate),
    /// An explicit preimage, re-verified by expansion.
    Yes { preimage: LieExpression, method: BoundaryMethod },
}

impl BoundaryAnswer {
    pub fn is_boundary(&self) -> bool {
        matches!(self, BoundaryAnswer::Yes { .. })
    }
}

/// The preimage block of a set of target multidegrees: sources and every target they reach, closed.
fn closure(data: &DifferentialData, seeds: &BTreeSet<MultiDegree>, budget: u128) -> Option<(Vec<MultiDegree>, Vec<MultiDegree>)> {
    let mut targets: BTreeSet<MultiDegree> = seeds.clone();
    let mut sources: BTreeSet<MultiDegree> = BTreeSet::new();
    let mut frontier: Vec<MultiDegree> = seeds.iter().cloned().collect();
    let mut cost = 0u128;
    while let Some(t) = frontier.pop() {
        for s in data.sources(&t) {
            if sources.insert(s.clone()) {
                cost += lie_dimension(data.alphabet(), &s);
                if cost > budget {
                    return None;
                }
                for t2 in data.targets(&s) {
                    if targets.insert(t2.clone()) {
                        frontier.push(t2);
                    }
                }
            }
        }
    }
    Some((sources.into_iter().collect(), targets.into_iter().collect()))
}

fn support_of(e: &TensorElement<PLocalRational>) -> BTreeSet<MultiDegree> {
    e.terms().map(|(w, _)| MultiDegree::from_letters(w.iter().copied())).collect()
}

fn is_p_local_expression(e: &LieExpression, p: u64) -> bool {
    match e {
        LieExpression::Leaf(_) => true,
        LieExpression::Bracket(a, b) => is_p_local_expression(a, p) && is_p_local_expression(b, p),
        LieExpression::AdPower { base, arg, .. } => is_p_local_expression(base, p) && is_p_local_expression(arg, p),
        LieExpression::Sum(t) => t.iter().all(|(c, x)| c.is_p_local(p) && is_p_local_expression(x, p)),
    }
}

enum SpanResult {
    No { columns: usize, rows: usize },
    Yes(LieExpression),
    OverBudget,
    NoSources,
}

fn span_decision(data: &DifferentialData, ex: &TensorElement<PLocalRational>, locality: Locality, budget: u128) -> SpanResult {
    let seeds = support_of(ex);
    let Some((sources, targets)) = closure(data, &seeds, budget) else {
        return SpanResult::OverBudget;
    };
    if sources.is_empty() {
        return SpanResult::NoSources;
    }
    let a = data.alphabet();
    let basis: Vec<LieBasisElement> = sources.iter().flat_map(|m| lie_multidegree_basis(a, m)).collect();
    let keys = Keys::new(a, &targets);
    let cols = boundary_columns(data, &data.exact, &basis, &keys);
    let query = SpanQuery { target: keys.project(ex), generators: cols };
    match in_span(&query, locality) {
        SpanAnswer::No => SpanResult::No { columns: basis.len(), rows: keys.len() },
        SpanAnswer::Yes(c) => {
            let pairs: Vec<(usize, PLocalRational)> = c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
            SpanResult::Yes(combination_expression(&basis, &pairs))
        }
    }
}

struct Structural<'d, 'p> {
    data: &'d DifferentialData<'p>,
    locality: Locality,
}

impl Structural<'_, '_> {
    fn a(&self) -> &Alphabet {
        self.data.alphabet()
    }

    fn is_cycle(&self, e: &LieExpression) -> Result<bool, DglError> {
        self.data.is_cycle_expansion(&e.expand(self.a())?)
    }

    fn preimage(&self, e: &LieExpression) -> Result<Option<LieExpression>, DglError> {
        if e.is_formal_zero() {
            return Ok(Some(LieExpression::zero()));
        }
        let ex: TensorElement<PLocalRational> = e.expand(self.a())?;
        if ex.is_zero() {
            return Ok(Some(LieExpression::zero()));
        }
        if !self.data.is_cycle_expansion(&ex)? || ex.terms().any(|(w, _)| !self.data.reachable(w)) {
            return Ok(None);
        }
        match span_decision(self.data, &ex, self.locality, SMALL_BLOCK) {
            SpanResult::Yes(p) => return Ok(Some(p)),
            SpanResult::No { .. } | SpanResult::NoSources => return Ok(None),
            SpanResult::OverBudget => {}
        }
        self.decompose(e)
    }

    fn decompose(&self, e: &LieExpression) -> Result<Option<LieExpression>, DglError> {
        match e {
            LieExpression::Leaf(_) => Ok(None),
            LieExpression::Sum(terms) => {
                let mut parts = Vec::with_capacity(terms.len());
                for (c, t) in terms {
                    match self.preimage(t)? {
                        Some(p) => parts.push((c.clone(), p)),
                        None => return Ok(None),
                    }
                }
                Ok(Some(LieExpression::sum(parts)))
            }
            LieExpression::Bracket(x, y) => {
                if self.is_cycle(x)? {
                    if let Some(py) = self.preimage(y)? {
                        let odd = x.degree(self.a())?.is_some_and(|d| d % 2 == 1);
                        let sign = PLocalRational::from_i64(if odd { -1 } else { 1 });
                        return Ok(Some(LieExpression::bracket((**x).clone(), py).scaled(sign)));
                    }
                }
                if self.is_cycle(y)? {
                    if let Some(px) = self.preimage(x)? {
                        return Ok(Some(LieExpression::bracket(px, (**y).clone())));
                    }
                }
                Ok(None)
            }
            LieExpression::AdPower { base, k, arg } => {
                let odd = base.degree(self.a())?.is_some_and(|d| d % 2 == 1);
                if odd && *k >= 2 {
                    let half = PLocalRational::new(1, 2).expect("nonzero denominator");
                    let square = LieExpression::bracket((**base).clone(), (**base).clone());
                    let inner = LieExpression::bracket(square, (**arg).clone()).scaled(half);
                    return self.preimage(&LieExpression::ad((**base).clone(), k - 2, inner));
                }
                let inner = LieExpression::ad((**base).clone(), k - 1, (**arg).clone());
                self.decompose(&LieExpression::Bracket(base.clone(), Box::new(inner)))
            }
        }
    }
}

fn verified(data: &DifferentialData, pre: &LieExpression, ex: &TensorElement<PLocalRational>, locality: Locality) -> Result<bool, DglError> {
    let dp: TensorElement<PLocalRational> = data.exact.apply(&pre.expand(data.alphabet())?, data.alphabet())?;
    let local = match locality {
        Locality::OverQ => true,
        Locality::OverZp(p) => is_p_local_expression(pre, p),
    };
    Ok(local && &dp == ex)
}

/// Decide whether a cycle is a boundary in the sub-dgl chosen by `options.letters`.
pub fn is_boundary(pres: &DglPresentation, e: &LieExpression, locality: Locality, options: &CycleOptions) -> Result<BoundaryAnswer, DglError> {
    let data = DifferentialData::new(pres, options.letters.as_deref())?;
    data.check_letters(e)?;
    let a = pres.alphabet();
    let ex: TensorElement<PLocalRational> = e.expand(a)?;
    if ex.is_zero() {
        return Ok(BoundaryAnswer::Yes { preimage: LieExpression::zero(), method: BoundaryMethod::Span });
    }
    if !data.is_cycle_expansion(&ex)? {
        return Err(DglError::NotACycle(e.display(a).to_string()));
    }
    if let Some((w, _)) = ex.sorted_terms().into_iter().find(|(w, _)| !data.reachable(w)) {
        return Ok(BoundaryAnswer::No(NonBoundaryCertificate::UnreachableWord { word: a.word_string(w) }));
    }
    let small = options.budget.min(SMALL_BLOCK);
    let mut spans = vec![small];
    if options.budget > small {
        spans.push(options.budget);
    }
    for (round, budget) in spans.into_iter().enumerate() {
        match span_decision(&data, &ex, locality, budget) {
            SpanResult::NoSources => return Ok(BoundaryAnswer::No(NonBoundaryCertificate::NoSources)),
            SpanResult::No { columns, rows } => return Ok(BoundaryAnswer::No(NonBoundaryCertificate::SpanCheck { columns, rows })),
            SpanResult::Yes(p) => {
                if verified(&data, &p, &ex, locality)? {
                    return Ok(BoundaryAnswer::Yes { preimage: p, method: BoundaryMethod::Span });
                }
            }
            SpanResult::OverBudget => {}
        }
        if round == 0 {
            let st = Structural { data: &data, locality };
            if let Some(p) = st.decompose(e)? {
                if verified(&data, &p, &ex, locality)? {
                    return Ok(BoundaryAnswer::Yes { preimage: p, method: BoundaryMethod::Structural });
                }
            }
        }
    }
    let seeds = support_of(&ex);
    let cost: u128 = seeds.iter().flat_map(|t| data.sources(t)).map(|s| lie_dimension(a, &s)).sum();
    Err(DglError::BudgetExceeded { needed: cost.max(options.budget + 1), budget: options.budget, detail: "preimage block of the element".into() })
}

/// Whether some nonzero combination of the given cycles is a boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum CombinationAnswer {
    NoNonzeroBoundary(NonBoundaryCertificate),
    /// `sum c_i e_i = d(preimage)` with some `c_i` nonzero.
    Boundary { coefficients: Vec<PLocalRational>, preimage: LieExpression },
}

pub fn combination_boundary_check(
    pres: &DglPresentation,
    exprs: &[LieExpression],
    locality: Locality,
    options: &CycleOptions,
) -> Result<CombinationAnswer, DglError> {
    let data = DifferentialData::new(pres, options.letters.as_deref())?;
    let a = pres.alphabet();
    let mut expansions = Vec::with_capacity(exprs.len());
    for e in exprs {
        data.check_letters(e)?;
        let ex: TensorElement<PLocalRational> = e.expand(a)?;
        if !data.is_cycle_expansion(&ex)? {
            return Err(DglError::NotACycle(e.display(a).to_string()));
        }
        expansions.push(ex);
    }
    let unit = |i: usize| (0..exprs.len()).map(|j| PLocalRational::from_i64((i == j) as i64)).collect::<Vec<_>>();
    let mut all_words: FxHashMap<Word, usize> = FxHashMap::default();
    let mut free_words: FxHashMap<Word, usize> = FxHashMap::default();
    for ex in &expansions {
        for (w, _) in ex.terms() {
            let n = all_words.len();
            all_words.entry(w.clone()).or_insert(n);
            if !data.reachable(w) {
                let n = free_words.len();
                free_words.entry(w.clone()).or_insert(n);
            }
        }
    }
    let vectorize = |ex: &TensorElement<PLocalRational>, idx: &FxHashMap<Word, usize>| {
        SparseVector::from_pairs(&crate::field::Rationals, ex.terms().filter_map(|(w, c)| idx.get(w).map(|&i| (i, c.clone()))))
    };
    let full: Vec<SparseVector> = expansions.iter().map(|x| vectorize(x, &all_words)).collect();
    if let Some(rel) = certified_kernel(&full, options.seed).basis.first() {
        let mut c = vec![PLocalRational::zero(); exprs.len()];
        for (i, x) in rel.iter() {
            c[i] = x.clone();
        }
        return Ok(CombinationAnswer::Boundary { coefficients: c, preimage: LieExpression::zero() });
    }
    let projected: Vec<SparseVector> = expansions.iter().map(|x| vectorize(x, &free_words)).collect();
    let rank = exact_rank(&projected);
    if rank == exprs.len() {
        return Ok(CombinationAnswer::NoNonzeroBoundary(NonBoundaryCertificate::UnreachableRank { words: free_words.len(), rank }));
    }
    for (i, e) in exprs.iter().enumerate() {
        if let BoundaryAnswer::Yes { preimage, .. } = is_boundary(pres, e, locality, options).or_else(|err| match err {
            DglError::BudgetExceeded { .. } => Ok(BoundaryAnswer::No(NonBoundaryCertificate::NoSources)),
            other => Err(other),
        })? {
            return Ok(CombinationAnswer::Boundary { coefficients: unit(i), preimage });
        }
    }
    let seeds: BTreeSet<MultiDegree> = expansions.iter().flat_map(support_of).collect();
    if let Some((sources, targets)) = closure(&data, &seeds, options.budget) {
        let basis: Vec<LieBasisElement> = sources.iter().flat_map(|m| lie_multidegree_basis(a, m)).collect();
        let keys = Keys::new(a, &targets);
        let mut vectors: Vec<SparseVector> = expansions.iter().map(|x| keys.project(x)).collect();
        vectors.extend(boundary_columns(&data, &data.exact, &basis, &keys));
        let n = exprs.len();
        let rel = certified_kernel(&vectors, options.seed).basis.into_iter().find(|r| r.iter().any(|(i, _)| i < n));
        return Ok(match rel {
            None => CombinationAnswer::NoNonzeroBoundary(NonBoundaryCertificate::SpanCheck { columns: basis.len(), rows: keys.len() }),
            Some(r) => {
                let mut c = vec![PLocalRational::zero(); n];
                let mut pre = Vec::new();
                for (i, x) in r.iter() {
                    if i < n {
                        c[i] = x.clone();
                    } else {
                        pre.push((i - n, -x));
                    }
                }
                CombinationAnswer::Boundary { coefficients: c, preimage: combination_expression(&basis, &pre) }
            }
        });
    }
    let needed: u128 = seeds.iter().flat_map(|t| data.sources(t)).map(|s| lie_dimension(a, &s)).sum();
    Err(DglError::BudgetExceeded { needed: needed.max(options.budget + 1), budget: options.budget, detail: "joint preimage block".into() })
}

/// `word` occurs in the expansion of `e` and has no differential word as a factor.
pub fn certifies_unreachable(pres: &DglPresentation, e: &LieExpression, word: &[Letter], letters: Option<&[Letter]>) -> Result<bool, DglError> {
    let data = DifferentialData::new(pres, letters)?;
    let ex: TensorElement<PLocalRational> = e.expand(pres.alphabet())?;
    Ok(ex.coeff(word).is_some_and(|c| !c.is_zero()) && !data.reachable(word))
}

/// Ranks of chains, cycles, boundaries and homology of the whole dgl in one degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyRanks {
    pub degree: u32,
    pub chains: u128,
    pub cycles: u128,
    pub boundaries: u128,
    pub homology: u128,
}

/// `dim H_k = dim Z_k - (dim L_{k+1} - dim Z_{k+1})`; any multidegree filter is ignored.
pub fn homology_ranks(pres: &DglPresentation, degree: u32, options: &CycleOptions) -> Result<HomologyRanks, DglError> {
    let mut opts = options.clone();
    opts.filter = None;
    let data = DifferentialData::new(pres, opts.letters.as_deref())?;
    let chains: u128 = data.support(degree, None).iter().map(|(_, d)| d).sum();
    let chains_up: u128 = data.support(degree + 1, None).iter().map(|(_, d)| d).sum();
    let cycles = cycle_space_basis(pres, degree, &opts)?.len() as u128;
    let cycles_up = cycle_space_basis(pres, degree + 1, &opts)?.len() as u128;
    let boundaries = chains_up - cycles_up;
    Ok(HomologyRanks { degree, chains, cycles, boundaries, homology: cycles - boundaries })
}

pub fn reachable_factors(pres: &DglPresentation, letters: Option<&[Letter]>) -> Result<Vec<String>, DglError> {
    let data = DifferentialData::new(pres, letters)?;
    let mut out: Vec<String> = data.factors.values().flatten().map(|w| data.alphabet().word_string(w)).collect();
    out.sort();
    Ok(out)
}

/// Multidegrees one degree up that map onto the support of `e`.
pub fn boundary_sources(pres: &DglPresentation, e: &LieExpression, letters: Option<&[Letter]>) -> Result<Vec<MultiDegree>, DglError> {
    let data = DifferentialData::new(pres, letters)?;
    let ex: TensorElement<PLocalRational> = e.expand(pres.alphabet())?;
    let set: FxHashSet<MultiDegree> = support_of(&ex).iter().flat_map(|t| data.sources(t)).collect();
    let mut v: Vec<MultiDegree> = set.into_iter().collect();
    v.sort();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgl::{build_l1, default_prime, Scale};
    use crate::digraph::Digraph;
    use crate::plocal::LocalPrime;
    use crate::tensor::GeneratorName;

    fn tiny(gens: &[(&str, u32)], diffs: &[(&str, &str)]) -> DglPresentation {
        let mut a = Alphabet::new();
        for (n, d) in gens {
            a.push(GeneratorName::Named(n.to_string()), *d).unwrap();
        }
        let mut m = BTreeMap::new();
        for (g, e) in diffs {
            m.insert(a.letter_str(g).unwrap(), crate::lie::parse_lie(e, &a).unwrap());
        }
        DglPresentation::new(a, m, LocalPrime::new(7).unwrap(), Scale::Custom).unwrap()
    }

    #[test]
    fn trivial_cycle_bases() {
        let p = tiny(&[("a", 2), ("b", 3)], &[]);
        let z = cycle_space_basis(&p, 5, &CycleOptions::default()).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.elements[0].expression.expand::<PLocalRational>(p.alphabet()).unwrap(), p.parse("[a,b]").unwrap().expand(p.alphabet()).unwrap());
        let q = tiny(&[("a", 1)], &[]);
        let z = cycle_space_basis(&q, 2, &CycleOptions::default()).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.elements[0].expression, q.parse("[a,a]").unwrap());
    }

    #[test]
    fn kernel_and_boundaries_in_a_small_dgl() {
        let p = tiny(&[("a", 1), ("b", 3)], &[("b", "[a,a]")]);
        let z3 = cycle_space_basis(&p, 3, &CycleOptions::default()).unwrap();
        // degree 3: b and [a,[a,a]] = 0; the cycle space is zero since d b = [a,a] != 0
        assert!(z3.is_empty());
        let z4 = cycle_space_basis(&p, 4, &CycleOptions::default()).unwrap();
        // degree 4: [a,b] with d[a,b] = -[a,[a,a]] = 0
        assert_eq!(z4.len(), 1);
        let aa = p.parse("[a,a]").unwrap();
        match is_boundary(&p, &aa, Locality::OverQ, &CycleOptions::default()).unwrap() {
            BoundaryAnswer::Yes { preimage, .. } => assert_eq!(preimage.expand::<PLocalRational>(p.alphabet()).unwrap(), TensorElement::letter(1)),
            other => panic!("{other:?}"),
        }
        let ab = p.parse("[a,b]").unwrap();
        assert!(!is_boundary(&p, &ab, Locality::OverQ, &CycleOptions::default()).unwrap().is_boundary());
        assert!(matches!(is_boundary(&p, &p.parse("b").unwrap(), Locality::OverQ, &CycleOptions::default()), Err(DglError::NotACycle(_))));
    }

    #[test]
    fn structural_route_agrees_with_span() {
        let p = tiny(&[("a", 1), ("c", 2), ("b", 3)], &[("b", "[a,a]")]);
        let e = p.parse("[c,ad(a,2,c)]").unwrap();
        let exact = is_boundary(&p, &e, Locality::OverQ, &CycleOptions::default()).unwrap();
        let forced = is_boundary(&p, &e, Locality::OverQ, &CycleOptions::default().with_budget(0)).unwrap();
        assert!(exact.is_boundary());
        assert!(matches!(forced, BoundaryAnswer::Yes { method: BoundaryMethod::Structural, .. }));
    }

    #[test]
    fn combinations() {
        let p = tiny(&[("a", 1), ("c", 2), ("b", 3)], &[("b", "[a,a]")]);
        let e1 = p.parse("[a,c]").unwrap();
        let e2 = p.parse("[c,[a,a]]").unwrap();
        let r = combination_boundary_check(&p, std::slice::from_ref(&e1), Locality::OverQ, &CycleOptions::default()).unwrap();
        assert!(matches!(r, CombinationAnswer::NoNonzeroBoundary(_)));
        let r = combination_boundary_check(&p, &[e1, e2], Locality::OverQ, &CycleOptions::default()).unwrap();
        let CombinationAnswer::Boundary { coefficients, preimage } = r else { panic!() };
        assert!(coefficients[0].is_zero() && !coefficients[1].is_zero());
        assert!(!preimage.is_formal_zero());
    }

    #[test]
    fn lemma_three_three_brackets_in_the_z_free_part() {
        let l1 = build_l1(&Digraph::two_cycle(), Scale::Paper { n: 7 }, default_prime(7)).unwrap();
        let tilde = crate::dgl::BaseLetters::of(&l1).unwrap().z_free();
        let opts = CycleOptions::default().with_letters(tilde);
        let e = l1.parse("ad(x.v,3,[w1,w2])").unwrap();
        for loc in [Locality::OverQ, Locality::OverZp(1117)] {
            assert!(!is_boundary(&l1, &e, loc, &opts).unwrap().is_boundary());
        }
        let d4 = l1.parse("[w2,w2]").unwrap();
        assert!(is_boundary(&l1, &d4, Locality::OverQ, &opts).unwrap().is_boundary());
    }

    #[test]
    fn rank_nullity_on_synthetic_l1() {
        let l1 = build_l1(&Digraph::two_cycle(), Scale::Synthetic, default_prime(7)).unwrap();
        let tilde = crate::dgl::BaseLetters::of(&l1).unwrap().z_free();
        let opts = CycleOptions::default().with_letters(tilde);
        let z = cycle_space_basis(&l1, 198, &opts).unwrap();
        for b in &z.blocks {
            assert_eq!(b.rank + b.nullity, b.component.columns as usize);
        }
        assert!(boundary_sources(&l1, &l1.parse("[w2,w2]").unwrap(), None).unwrap().contains(&MultiDegree::from_letters([l1.letter("w4").unwrap()])));
    }
}
