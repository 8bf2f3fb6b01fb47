//! Free differential graded Lie algebras given by generators and differentials, the digraph
//! construction `L(G,1)`, and the cycle-killing tower above it.

mod cycles;
mod tower;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::field::Coeff;
use crate::lie::{parse_lie, LieError, LieExpression};
use crate::plocal::{LocalPrime, PLocalRational};
use crate::tensor::{Alphabet, GeneratorName, Homogeneity, Letter, TensorDerivation, TensorElement, TensorError};

pub use cycles::{
    boundary_sources, boundary_witness_search, certifies_unreachable, combination_boundary_check, cycle_label, cycle_space_basis,
    homology_ranks, is_boundary, key_words,
    reachable_factors, zero_cycle_certificate, BoundaryAnswer, BoundaryMethod, CombinationAnswer, Component, ComponentBlock,
    CycleBasis, CycleElement, CycleOptions, HomologyRanks, MultiDegreeFilter, NonBoundaryCertificate, ZeroCycleCertificate, DEFAULT_BUDGET,
};
pub use tower::{
    base_action, build_next_level, build_tower, cycle_multidegrees, extend_action, CycleCoordinates, LetterAction, LevelSummary, Tower,
    TowerOptions,
};

/// For each generator, the generators occurring linearly in its differential.
pub type LinearPart = Vec<(Letter, Vec<(Letter, PLocalRational)>)>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DglError {
    #[error("digraph is not strongly connected")]
    NotStronglyConnected,
    #[error("digraph needs at least two vertices")]
    TooFewVertices,
    #[error("digraph has loops")]
    HasLoops,
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("differential of {generator} is not homogeneous of degree {expected}")]
    Inhomogeneous { generator: String, expected: u32 },
    #[error("d^2 is nonzero on {0}")]
    SquareNonzero(String),
    #[error("{0} is not a cycle")]
    NotACycle(String),
    #[error("work budget {budget} exceeded: {needed} basis elements needed ({detail})")]
    BudgetExceeded { needed: u128, budget: u128, detail: String },
    #[error("{0}")]
    NotAnAutomorphism(String),
    #[error("cycle basis is not equivariant: {0}")]
    NonEquivariantCycleBasis(String),
    #[error("cannot parse presentation: {0}")]
    Parse(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Where the generator degrees come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scale {
    /// The degree family indexed by an odd `n >= 7`.
    Paper { n: u32 },
    /// The small fixed profile used for exhaustive checks.
    Synthetic,
    /// A hand-written presentation.
    Custom,
}

/// Exponents in the differential of an edge generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDifferentialShape {
    /// `(ad x_v)^a([w1,w2])`
    pub x_power: u32,
    /// `(ad w1)^b([w2,[x_v,x_u]])`
    pub w1_on_pair: u32,
    /// `(ad w1)^c(w2)`
    pub w1_on_w2: u32,
    /// `(ad w1)^e([[w2,w3],[w3,w5]])`
    pub w1_outer: u32,
    /// `[(ad w1)^f(w3), [(ad w2)^g(w3), (ad w2)^h([w3,w5])]]`
    pub w1_inner: u32,
    pub w2_left: u32,
    pub w2_right: u32,
}

/// Degrees of `w1..w5`, `x_v`, `z_(v,u)` and the shape of the edge differential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub w: [u32; 5],
    pub x: u32,
    pub z: u32,
    pub shape: EdgeDifferentialShape,
}

impl DegreeProfile {
    pub fn paper(n: u32) -> Result<Self, DglError> {
        if n < 7 || n.is_multiple_of(2) {
            return Err(DglError::BadParameters(format!("n = {n} must be odd and at least 7")));
        }
        let p = Self {
            w: [16 * n + 3, 21 * n + 4, 28 * n + 5, 42 * n + 9, 56 * n + 11],
            x: 96 * n + 18,
            z: 325 * n + 62,
            shape: EdgeDifferentialShape { x_power: 3, w1_on_pair: 7, w1_on_w2: 19, w1_outer: 12, w1_inner: 5, w2_left: 3, w2_right: 2 },
        };
        p.check()?;
        Ok(p)
    }

    /// Same parities and relations `|w4| = 2|w2|+1`, `|w5| = 2|w3|+1` with every word of length at most 11.
    pub fn synthetic() -> Self {
        let p = Self {
            w: [39, 49, 29, 99, 59],
            x: 78,
            z: 323,
            shape: EdgeDifferentialShape { x_power: 3, w1_on_pair: 3, w1_on_w2: 7, w1_outer: 4, w1_inner: 2, w2_left: 1, w2_right: 1 },
        };
        p.check().expect("synthetic profile is homogeneous");
        p
    }

    pub fn for_scale(scale: Scale) -> Result<Self, DglError> {
        match scale {
            Scale::Paper { n } => Self::paper(n),
            Scale::Synthetic => Ok(Self::synthetic()),
            Scale::Custom => Err(DglError::BadParameters("custom presentations have no degree profile".into())),
        }
    }

    /// Degree of each summand of the edge differential; all must equal `z - 1`.
    pub fn summand_degrees(&self) -> [u32; 6] {
        let [w1, w2, w3, _, w5] = self.w;
        let s = &self.shape;
        [
            s.x_power * self.x + w1 + w2,
            s.w1_on_pair * w1 + w2 + 2 * self.x,
            s.w1_on_w2 * w1 + w2,
            w5 + 2 * w3 + 2 * self.x + w2,
            s.w1_outer * w1 + w2 + 2 * w3 + w5,
            s.w1_inner * w1 + 3 * w3 + (s.w2_left + s.w2_right) * w2 + w5,
        ]
    }

    fn check(&self) -> Result<(), DglError> {
        let [_, w2, w3, w4, w5] = self.w;
        if w4 != 2 * w2 + 1 || w5 != 2 * w3 + 1 {
            return Err(DglError::BadParameters("|w4| = 2|w2|+1 and |w5| = 2|w3|+1 are required".into()));
        }
        if self.summand_degrees().iter().any(|&d| d + 1 != self.z) {
            return Err(DglError::BadParameters("edge differential is not homogeneous".into()));
        }
        Ok(())
    }

    /// Degrees of the three cycle-killing layers.
    pub fn layer_degrees(&self) -> [u32; 3] {
        [self.z + 1, self.z + 2, self.z + 3]
    }
}

/// Smallest prime above `(309n+62)/2`.
pub fn default_prime(n: u32) -> LocalPrime {
    let mut q = (309 * n as u64 + 62) / 2 + 1;
    loop {
        if let Ok(p) = LocalPrime::new(q) {
            return p;
        }
        q += 1;
    }
}

/// A free dgl: an alphabet with one differential image per generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DglPresentation {
    alphabet: Alphabet,
    differential: Vec<LieExpression>,
    prime: LocalPrime,
    scale: Scale,
    level: u8,
    digraph: Option<Digraph>,
}

impl DglPresentation {
    /// Validates degrees and `d∘d = 0` on every generator. Missing images are zero.
    pub fn new(
        alphabet: Alphabet,
        differential: BTreeMap<Letter, LieExpression>,
        prime: LocalPrime,
        scale: Scale,
    ) -> Result<Self, DglError> {
        let d = (0..alphabet.len() as Letter).map(|l| differential.get(&l).cloned().unwrap_or_else(LieExpression::zero)).collect();
        let pres = Self { alphabet, differential: d, prime, scale, level: 0, digraph: None };
        pres.validate(0)?;
        Ok(pres)
    }

    /// Checks generators from `from` on.
    fn validate(&self, from: usize) -> Result<(), DglError> {
        let deriv = self.derivation::<PLocalRational>()?;
        for l in (from..self.alphabet.len()).map(|i| i as Letter) {
            let name = self.alphabet.name(l).to_string();
            let expected = self.alphabet.degree(l) - 1;
            let image = self.differential[l as usize].expand::<PLocalRational>(&self.alphabet)?;
            match image.homogeneity(&self.alphabet) {
                Homogeneity::Zero => continue,
                Homogeneity::Degree(d) if d == expected => {}
                _ => return Err(DglError::Inhomogeneous { generator: name, expected }),
            }
            if !deriv.apply(&image, &self.alphabet)?.is_zero() {
                return Err(DglError::SquareNonzero(name));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn prime(&self) -> LocalPrime {
        self.prime
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// 1 for the digraph construction, k for the k-th tower level, 0 for a custom presentation.
    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn digraph(&self) -> Option<&Digraph> {
        self.digraph.as_ref()
    }

    pub fn differential(&self, l: Letter) -> &LieExpression {
        &self.differential[l as usize]
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.alphabet.len() as Letter
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.alphabet.letter_str(name)
    }

    pub fn parse(&self, text: &str) -> Result<LieExpression, DglError> {
        Ok(parse_lie(text, &self.alphabet)?)
    }

    /// Letters with nonzero differential.
    pub fn active_letters(&self) -> Vec<Letter> {
        self.letters().filter(|&l| !self.differential[l as usize].is_formal_zero()).collect()
    }

    /// The differential extended to the tensor algebra as a derivation of degree -1.
    pub fn derivation<C: Coeff>(&self) -> Result<TensorDerivation<C>, DglError> {
        let mut d = TensorDerivation::new(-1);
        for l in self.letters() {
            d.set_image(l, self.differential[l as usize].expand::<C>(&self.alphabet)?);
        }
        Ok(d)
    }

    pub fn apply_d<C: Coeff>(&self, deriv: &TensorDerivation<C>, e: &TensorElement<C>) -> Result<TensorElement<C>, DglError> {
        Ok(deriv.apply(e, &self.alphabet)?)
    }

    /// The differential as a Lie expression, by the Leibniz rule.
    pub fn d_expression(&self, e: &LieExpression) -> Result<LieExpression, DglError> {
        Ok(e.derive(&|l| self.differential[l as usize].clone(), true, &self.alphabet)?)
    }

    pub fn is_cycle(&self, e: &LieExpression) -> Result<bool, DglError> {
        let deriv = self.derivation::<PLocalRational>()?;
        let ex = e.expand::<PLocalRational>(&self.alphabet)?;
        Ok(deriv.apply(&ex, &self.alphabet)?.is_zero())
    }

    /// Adjoins generators with given differentials, revalidating only the new ones.
    pub fn extend(&self, generators: Vec<(GeneratorName, u32, LieExpression)>) -> Result<Self, DglError> {
        let mut next = self.clone();
        let from = next.alphabet.len();
        for (name, degree, d) in generators {
            next.alphabet.push(name, degree)?;
            next.differential.push(d);
        }
        next.validate(from)?;
        next.level = self.level.saturating_add(1);
        Ok(next)
    }

    pub fn generator_count_by_degree(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for g in self.alphabet.generators() {
            *m.entry(g.degree).or_insert(0) += 1;
        }
        m
    }

    /// Linear part of the differential: coefficients of single generators in each image.
    pub fn linear_part(&self) -> Result<LinearPart, DglError> {
        let mut out = Vec::new();
        for l in self.letters() {
            let ex = self.differential[l as usize].expand::<PLocalRational>(&self.alphabet)?;
            let (lin, _) = crate::lie::decomposable_split(&ex);
            out.push((l, lin.into_iter().collect()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PresentationJson::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, DglError> {
        let j: PresentationJson = serde_json::from_str(text).map_err(|e| DglError::Parse(e.to_string()))?;
        if j.schema != 1 {
            return Err(DglError::Parse(format!("unsupported schema {}", j.schema)));
        }
        let mut alphabet = Alphabet::new();
        for g in &j.generators {
            alphabet.push(g.name.clone(), g.degree)?;
        }
        let mut diff = BTreeMap::new();
        for d in &j.differential {
            let l = alphabet.letter(&d.generator).ok_or_else(|| DglError::Parse(format!("unknown generator {}", d.generator)))?;
            diff.insert(l, parse_lie(&d.expression, &alphabet)?);
        }
        let prime = LocalPrime::new(j.p.parse().map_err(|_| DglError::Parse("p".into()))?)
            .map_err(|e| DglError::Parse(e.to_string()))?;
        let mut pres = Self::new(alphabet, diff, prime, j.scale)?;
        pres.level = j.level;
        pres.digraph = j.digraph;
        Ok(pres)
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorJson {
    name: GeneratorName,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct DifferentialJson {
    generator: GeneratorName,
    expression: String,
}

#[derive(Serialize, Deserialize)]
struct PresentationJson {
    schema: u32,
    scale: Scale,
    p: String,
    level: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    digraph: Option<Digraph>,
    generators: Vec<GeneratorJson>,
    differential: Vec<DifferentialJson>,
}

impl From<&DglPresentation> for PresentationJson {
    fn from(p: &DglPresentation) -> Self {
        let a = &p.alphabet;
        Self {
            schema: 1,
            scale: p.scale,
            p: p.prime.get().to_string(),
            level: p.level,
            digraph: p.digraph.clone(),
            generators: a.generators().iter().map(|g| GeneratorJson { name: g.name.clone(), degree: g.degree }).collect(),
            differential: p
                .letters()
                .filter(|&l| !p.differential[l as usize].is_formal_zero())
                .map(|l| DifferentialJson { generator: a.name(l).clone(), expression: p.differential[l as usize].display(a).to_string() })
                .collect(),
        }
    }
}

/// Letters of the digraph construction.
#[derive(Debug, Clone)]
pub struct BaseLetters {
    pub w: [Letter; 5],
    pub x: Vec<Letter>,
    pub z: Vec<Letter>,
}

impl BaseLetters {
    pub fn of(p: &DglPresentation) -> Option<Self> {
        let g = p.digraph()?;
        let a = p.alphabet();
        let w = [1u8, 2, 3, 4, 5].map(|i| a.letter(&GeneratorName::W(i)));
        let w = [w[0]?, w[1]?, w[2]?, w[3]?, w[4]?];
        let x = g.vertices().iter().map(|v| a.letter(&GeneratorName::X(v.clone()))).collect::<Option<Vec<_>>>()?;
        let z = g.named_edges().map(|(v, u)| a.letter(&GeneratorName::Z(v.into(), u.into()))).collect::<Option<Vec<_>>>()?;
        Some(Self { w, x, z })
    }

    /// Letters other than the edge generators.
    pub fn z_free(&self) -> Vec<Letter> {
        let mut v: Vec<Letter> = self.w.to_vec();
        v.extend(&self.x);
        v.sort_unstable();
        v
    }
}

/// The three summands named in the edge differential besides the first three.
pub struct EdgeSummands {
    pub x_cube: LieExpression,
    pub w1_pair: LieExpression,
    pub w1_w2: LieExpression,
    pub x_term: LieExpression,
    pub y_term: LieExpression,
    pub z_term: LieExpression,
}

impl EdgeSummands {
    pub fn new(shape: &EdgeDifferentialShape, w: [Letter; 5], xv: Letter, xu: Letter) -> Self {
        let leaf = LieExpression::leaf;
        let br = LieExpression::bracket;
        let ad = LieExpression::ad;
        let [w1, w2, w3, _, w5] = w.map(leaf);
        let (xv, xu) = (leaf(xv), leaf(xu));
        let w3w5 = br(w3.clone(), w5.clone());
        Self {
            x_cube: ad(xv.clone(), shape.x_power, br(w1.clone(), w2.clone())),
            w1_pair: ad(w1.clone(), shape.w1_on_pair, br(w2.clone(), br(xv.clone(), xu))),
            w1_w2: ad(w1.clone(), shape.w1_on_w2, w2.clone()),
            x_term: br(br(w5, w3.clone()), br(xv.clone(), br(xv, br(w2.clone(), w3.clone())))),
            y_term: ad(w1.clone(), shape.w1_outer, br(br(w2.clone(), w3.clone()), w3w5.clone())),
            z_term: br(
                ad(w1, shape.w1_inner, w3.clone()),
                br(ad(w2.clone(), shape.w2_left, w3), ad(w2, shape.w2_right, w3w5)),
            ),
        }
    }

    pub fn total(self) -> LieExpression {
        let one = PLocalRational::one;
        LieExpression::sum([
            (one(), self.x_cube),
            (one(), self.w1_pair),
            (one(), self.w1_w2),
            (one(), self.x_term),
            (one(), self.y_term),
            (one(), self.z_term),
        ])
    }
}

/// `L(G,1)`: generators `w1..w5`, `x_v` per vertex and `z_(v,u)` per edge.
pub fn build_l1(g: &Digraph, scale: Scale, prime: LocalPrime) -> Result<DglPresentation, DglError> {
    if g.len() < 2 {
        return Err(DglError::TooFewVertices);
    }
    if g.has_loops() {
        return Err(DglError::HasLoops);
    }
    if !g.is_strongly_connected() {
        return Err(DglError::NotStronglyConnected);
    }
    let profile = DegreeProfile::for_scale(scale)?;
    if let Scale::Paper { n } = scale {
        if 2 * prime.get() <= 309 * n as u64 + 62 {
            return Err(DglError::BadParameters(format!("p = {} must exceed (309n+62)/2", prime.get())));
        }
    }
    let mut a = Alphabet::new();
    let mut w = [0 as Letter; 5];
    for (i, d) in profile.w.iter().enumerate() {
        w[i] = a.push(GeneratorName::W(i as u8 + 1), *d)?;
    }
    let x: Vec<Letter> = g.vertices().iter().map(|v| a.push(GeneratorName::X(v.clone()), profile.x)).collect::<Result<_, _>>()?;
    let mut diff = BTreeMap::new();
    diff.insert(w[3], LieExpression::bracket(LieExpression::leaf(w[1]), LieExpression::leaf(w[1])));
    diff.insert(w[4], LieExpression::bracket(LieExpression::leaf(w[2]), LieExpression::leaf(w[2])));
    for (v, u) in g.edges() {
        let z = a.push(GeneratorName::Z(g.vertex(v).into(), g.vertex(u).into()), profile.z)?;
        diff.insert(z, EdgeSummands::new(&profile.shape, w, x[v], x[u]).total());
    }
    let mut pres = DglPresentation::new(a, diff, prime, scale)?;
    pres.level = 1;
    pres.digraph = Some(g.clone());
    Ok(pres)
}

/// Ranks of the generator module, of the linear part `d`, and of `H(W,d)` per degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyReport {
    pub degrees: Vec<HomologyRow>,
    pub linear_part_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyRow {
    pub degree: u32,
    pub generators: usize,
    /// Rank of `d` leaving this degree.
    pub d_rank_out: usize,
    /// Rank of `d` arriving in this degree.
    pub d_rank_in: usize,
    pub homology: usize,
}

pub fn homology_report(p: &DglPresentation, degrees: &[u32]) -> Result<HomologyReport, DglError> {
    let lin = p.linear_part()?;
    let a = p.alphabet();
    let linear_part_zero = lin.iter().all(|(_, v)| v.is_empty());
    let by_degree = p.generator_count_by_degree();
    let rank_from = |deg: u32| -> usize {
        let columns: Vec<crate::linalg::SparseVector> = lin
            .iter()
            .filter(|(l, _)| a.degree(*l) == deg)
            .map(|(_, v)| crate::linalg::SparseVector::from_pairs(&crate::field::Rationals, v.iter().map(|(t, c)| (*t as usize, c.clone()))))
            .collect();
        crate::linalg::exact_rank(&columns)
    };
    let mut rows = Vec::new();
    for &deg in degrees {
        let generators = by_degree.get(&deg).copied().unwrap_or(0);
        let d_rank_out = rank_from(deg);
        let d_rank_in = rank_from(deg + 1);
        rows.push(HomologyRow { degree: deg, generators, d_rank_out, d_rank_in, homology: generators - d_rank_out - d_rank_in });
    }
    Ok(HomologyReport { degrees: rows, linear_part_zero })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> LocalPrime {
        default_prime(7)
    }

    #[test]
    fn paper_degrees() {
        let d = DegreeProfile::paper(7).unwrap();
        assert_eq!(d.w, [115, 151, 201, 303, 403]);
        assert_eq!((d.x, d.z), (690, 2337));
        assert_eq!(d.summand_degrees(), [2336; 6]);
        assert_eq!(p().get(), 1117);
        assert!(DegreeProfile::paper(8).is_err());
        for n in [9, 11, 13] {
            assert!(DegreeProfile::paper(n).is_ok());
        }
    }

    #[test]
    fn l1_on_two_cycle() {
        let l1 = build_l1(&Digraph::two_cycle(), Scale::Paper { n: 7 }, p()).unwrap();
        assert_eq!(l1.alphabet().len(), 9);
        let z = l1.letter("z.v~u").unwrap();
        let dz = l1.differential(z).expand::<PLocalRational>(l1.alphabet()).unwrap();
        assert_eq!(dz.homogeneity(l1.alphabet()), Homogeneity::Degree(2336));
        assert!(l1.is_cycle(&l1.parse("ad(w1,19,w2)").unwrap()).unwrap());
        assert!(!l1.is_cycle(&l1.parse("w4").unwrap()).unwrap());
        let c = l1.parse("[[x.v,x.u],[[w2,w4],[w2,[w2,w3]]]]").unwrap();
        assert!(l1.is_cycle(&c).unwrap());
        assert_eq!(c.degree(l1.alphabet()).unwrap(), Some(2337));
    }

    #[test]
    fn builder_validation() {
        let loopy = Digraph::new(["v", "u"], [("v", "u"), ("u", "v"), ("v", "v")]).unwrap();
        assert_eq!(build_l1(&loopy, Scale::Synthetic, p()), Err(DglError::HasLoops));
        let one = Digraph::new(["v"], Vec::<(String, String)>::new()).unwrap();
        assert_eq!(build_l1(&one, Scale::Synthetic, p()), Err(DglError::TooFewVertices));
        let path = Digraph::new(["v", "u"], [("v", "u")]).unwrap();
        assert_eq!(build_l1(&path, Scale::Synthetic, p()), Err(DglError::NotStronglyConnected));
        let small = LocalPrime::new(1109).unwrap();
        assert!(matches!(build_l1(&Digraph::two_cycle(), Scale::Paper { n: 7 }, small), Err(DglError::BadParameters(_))));
    }

    #[test]
    fn json_round_trip() {
        let l1 = build_l1(&Digraph::directed_cycle(3), Scale::Synthetic, p()).unwrap();
        let back = DglPresentation::from_json(&l1.to_json()).unwrap();
        assert_eq!(back.alphabet(), l1.alphabet());
        for l in l1.letters() {
            let a = l1.differential(l).expand::<PLocalRational>(l1.alphabet()).unwrap();
            let b = back.differential(l).expand::<PLocalRational>(back.alphabet()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn homology_of_l1() {
        let g = Digraph::complete(3);
        let l1 = build_l1(&g, Scale::Paper { n: 7 }, p()).unwrap();
        let r = homology_report(&l1, &[115, 151, 201, 303, 403, 690, 2337]).unwrap();
        assert!(r.linear_part_zero);
        let h: Vec<usize> = r.degrees.iter().map(|row| row.homology).collect();
        assert_eq!(h, vec![1, 1, 1, 1, 1, 3, 6]);
        assert!(homology_report(&l1, &[]).unwrap().degrees.is_empty());
    }

    #[test]
    fn d_expression_agrees_with_derivation() {
        let l1 = build_l1(&Digraph::two_cycle(), Scale::Synthetic, p()).unwrap();
        let e = l1.parse("[w4,[w5,x.v]]").unwrap();
        let via_lie = l1.d_expression(&e).unwrap().expand::<PLocalRational>(l1.alphabet()).unwrap();
        let d = l1.derivation::<PLocalRational>().unwrap();
        let via_tensor = d.apply(&e.expand(l1.alphabet()).unwrap(), l1.alphabet()).unwrap();
        assert_eq!(via_lie, via_tensor);
    }
}
