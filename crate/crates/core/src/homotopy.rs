//! Dgl maps, the cylinder `L(W, sW, W')`, `e^θ`, and explicit homotopies.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::dgl::{is_boundary, BoundaryAnswer, CycleOptions, DglError, DglPresentation, NonBoundaryCertificate};
use crate::lie::{LieError, LieExpression};
use crate::linalg::Locality;
use crate::plocal::{LocalRing, PLocalRational};
use crate::tensor::{Alphabet, Letter, TensorElement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomotopyError {
    #[error("1/{n}! is not {prime}-local")]
    NotPLocalFactorial { n: u32, prime: u64 },
    #[error("not a chain map on generator {0}")]
    NotAChainMap(String),
    #[error("bad image: {0}")]
    BadImage(String),
    #[error("correction on {0} is not the boundary of the given preimage")]
    NotABoundaryWitness(String),
    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),
    #[error(transparent)]
    Dgl(#[from] DglError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

fn expand(e: &LieExpression, a: &Alphabet) -> Result<TensorElement<PLocalRational>, HomotopyError> {
    Ok(e.expand(a)?)
}

fn same_expansion(x: &LieExpression, y: &LieExpression, a: &Alphabet) -> Result<bool, HomotopyError> {
    let mut d = expand(x, a)?;
    d.sub_assign(&expand(y, a)?);
    Ok(d.is_zero())
}

/// A degree-preserving Lie map given by the image of every source generator.
#[derive(Debug, Clone)]
pub struct DglMap {
    source: Arc<DglPresentation>,
    target: Arc<DglPresentation>,
    images: Vec<LieExpression>,
}

impl DglMap {
    /// Checks degrees and the chain-map identity on every generator.
    pub fn new(source: Arc<DglPresentation>, target: Arc<DglPresentation>, images: Vec<LieExpression>) -> Result<Self, HomotopyError> {
        let map = Self::unchecked(source, target, images)?;
        map.check_chain_map()?;
        Ok(map)
    }

    /// Checks only the number and degrees of the images.
    pub fn unchecked(source: Arc<DglPresentation>, target: Arc<DglPresentation>, images: Vec<LieExpression>) -> Result<Self, HomotopyError> {
        if images.len() != source.alphabet().len() {
            return Err(HomotopyError::BadImage(format!("{} images for {} generators", images.len(), source.alphabet().len())));
        }
        for (l, e) in source.letters().zip(&images) {
            let want = source.alphabet().degree(l);
            match e.degree(target.alphabet())? {
                None => {}
                Some(d) if d == want => {}
                Some(d) => {
                    return Err(HomotopyError::BadImage(format!("{} has degree {want} but its image has degree {d}", source.alphabet().name(l))))
                }
            }
        }
        Ok(Self { source, target, images })
    }

    pub fn identity(p: Arc<DglPresentation>) -> Self {
        let images = p.letters().map(LieExpression::leaf).collect();
        Self { source: p.clone(), target: p, images }
    }

    pub fn source(&self) -> &Arc<DglPresentation> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DglPresentation> {
        &self.target
    }

    pub fn image(&self, l: Letter) -> &LieExpression {
        &self.images[l as usize]
    }

    pub fn images(&self) -> &[LieExpression] {
        &self.images
    }

    pub fn apply(&self, e: &LieExpression) -> LieExpression {
        e.substitute(&|l| self.images[l as usize].clone())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &DglMap) -> Result<DglMap, HomotopyError> {
        if !Arc::ptr_eq(&other.target, &self.source) && other.target.alphabet() != self.source.alphabet() {
            return Err(HomotopyError::BadImage("composing maps with unmatched ends".into()));
        }
        Ok(Self { source: other.source.clone(), target: self.target.clone(), images: other.images.iter().map(|e| self.apply(e)).collect() })
    }

    /// The first generator on which `d∘f ≠ f∘d`, if any.
    pub fn chain_defect(&self) -> Result<Option<Letter>, HomotopyError> {
        let ta = self.target.alphabet();
        let d = self.target.derivation::<PLocalRational>()?;
        for l in self.source.letters() {
            let mut lhs = d.apply(&expand(&self.images[l as usize], ta)?, ta).map_err(DglError::from)?;
            lhs.sub_assign(&expand(&self.apply(self.source.differential(l)), ta)?);
            if !lhs.is_zero() {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }

    pub fn check_chain_map(&self) -> Result<(), HomotopyError> {
        match self.chain_defect()? {
            None => Ok(()),
            Some(l) => Err(HomotopyError::NotAChainMap(self.source.alphabet().name(l).to_string())),
        }
    }

    /// Generators on which the two maps have different expansions.
    pub fn differences(&self, other: &DglMap) -> Result<Vec<Letter>, HomotopyError> {
        if self.images.len() != other.images.len() {
            return Err(HomotopyError::BadImage("maps have different sources".into()));
        }
        let a = self.target.alphabet();
        let mut out = Vec::new();
        for l in self.source.letters() {
            if !same_expansion(&self.images[l as usize], &other.images[l as usize], a)? {
                out.push(l);
            }
        }
        Ok(out)
    }

    pub fn agrees_with(&self, other: &DglMap) -> Result<bool, HomotopyError> {
        Ok(self.differences(other)?.is_empty())
    }
}

/// Which letter block of the cylinder a letter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderPart {
    Base(Letter),
    Suspension(Letter),
    Copy(Letter),
}

/// `L(W, sW, W')` with `D(w) = dw`, `D(sw) = w'`, `D(w') = 0`, and the derivation `S` of degree +1.
#[derive(Debug)]
pub struct Cylinder {
    base: Arc<DglPresentation>,
    presentation: Arc<DglPresentation>,
    exponentials: Vec<OnceLock<LieExpression>>,
}

pub fn cylinder(base: Arc<DglPresentation>) -> Result<Cylinder, HomotopyError> {
    let n = base.alphabet().len();
    let mut alphabet = base.alphabet().clone();
    for g in base.alphabet().generators() {
        alphabet.push(g.name.suspension(), g.degree + 1).map_err(DglError::from)?;
    }
    for g in base.alphabet().generators() {
        alphabet.push(g.name.copy(), g.degree).map_err(DglError::from)?;
    }
    let mut d = BTreeMap::new();
    for l in base.letters() {
        d.insert(l, base.differential(l).clone());
        d.insert((n + l as usize) as Letter, LieExpression::leaf((2 * n + l as usize) as Letter));
    }
    let presentation = Arc::new(DglPresentation::new(alphabet, d, base.prime(), base.scale())?);
    Ok(Cylinder { base, presentation, exponentials: (0..n).map(|_| OnceLock::new()).collect() })
}

impl Cylinder {
    pub fn base(&self) -> &Arc<DglPresentation> {
        &self.base
    }

    pub fn presentation(&self) -> &Arc<DglPresentation> {
        &self.presentation
    }

    fn width(&self) -> usize {
        self.base.alphabet().len()
    }

    pub fn suspension(&self, w: Letter) -> Letter {
        (self.width() + w as usize) as Letter
    }

    pub fn copy(&self, w: Letter) -> Letter {
        (2 * self.width() + w as usize) as Letter
    }

    pub fn part(&self, l: Letter) -> CylinderPart {
        let n = self.width();
        match l as usize {
            i if i < n => CylinderPart::Base(l),
            i if i < 2 * n => CylinderPart::Suspension((i - n) as Letter),
            i => CylinderPart::Copy((i - 2 * n) as Letter),
        }
    }

    pub fn d(&self, e: &LieExpression) -> Result<LieExpression, HomotopyError> {
        Ok(self.presentation.d_expression(e)?)
    }

    pub fn s(&self, e: &LieExpression) -> Result<LieExpression, HomotopyError> {
        let image = |l: Letter| match self.part(l) {
            CylinderPart::Base(w) => LieExpression::leaf(self.suspension(w)),
            _ => LieExpression::zero(),
        };
        Ok(e.derive(&image, true, self.presentation.alphabet())?)
    }

    /// `θ = D∘S + S∘D`.
    pub fn theta(&self, e: &LieExpression) -> Result<LieExpression, HomotopyError> {
        Ok(self.d(&self.s(e)?)?.plus(self.s(&self.d(e)?)?))
    }

    /// Checks `D² = 0` and `S² = 0` on generators and on all brackets of two generators.
    pub fn check_squares(&self) -> Result<(), HomotopyError> {
        let a = self.presentation.alphabet();
        let mut probes: Vec<LieExpression> = self.presentation.letters().map(LieExpression::leaf).collect();
        let n = probes.len();
        for i in 0..n {
            for j in i..n {
                probes.push(LieExpression::bracket(probes[i].clone(), probes[j].clone()));
            }
        }
        for e in &probes {
            if !expand(&self.d(&self.d(e)?)?, a)?.is_zero() {
                return Err(HomotopyError::NotAChainMap(format!("D² on {}", e.display(a))));
            }
            if !expand(&self.s(&self.s(e)?)?, a)?.is_zero() {
                return Err(HomotopyError::BadImage(format!("S² on {}", e.display(a))));
            }
        }
        Ok(())
    }

    /// `e^θ(w) = w + w' + Σ_{n≥1} (S∘D)^n(w)/n!`, memoized per generator.
    pub fn e_theta(&self, w: Letter) -> Result<LieExpression, HomotopyError> {
        let slot = self.exponentials.get(w as usize).ok_or_else(|| HomotopyError::BadImage(format!("letter {w} is not a base generator")))?;
        if let Some(e) = slot.get() {
            return Ok(e.clone());
        }
        let e = self.compute_e_theta(w)?;
        Ok(slot.get_or_init(|| e).clone())
    }

    fn compute_e_theta(&self, w: Letter) -> Result<LieExpression, HomotopyError> {
        let a = self.presentation.alphabet();
        let ring = LocalRing::new(self.base.prime());
        let min_degree = a.generators().iter().map(|g| g.degree).min().unwrap_or(1).max(1);
        let max_steps = a.degree(w) / min_degree + 1;
        let mut terms = vec![(PLocalRational::one(), LieExpression::leaf(w)), (PLocalRational::one(), LieExpression::leaf(self.copy(w)))];
        let mut current = LieExpression::leaf(w);
        for n in 1.. {
            current = self.s(&self.d(&current)?)?;
            if expand(&current, a)?.is_zero() {
                break;
            }
            if n > max_steps {
                return Err(HomotopyError::BadImage("S∘D is not nilpotent on this generator".into()));
            }
            let c = ring.inverse_factorial(n).map_err(|_| HomotopyError::NotPLocalFactorial { n, prime: self.base.prime().get() })?;
            terms.push((c, current.clone()));
        }
        Ok(LieExpression::sum(terms))
    }
}

/// `y = α'(w) − α(w)` on one top generator, with `y = dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub y: LieExpression,
    pub z: LieExpression,
}

/// Which endpoint the homotopy restricts to on `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `F|W = α` and `F∘e^θ|W = α'`.
    AsDefined,
    /// `F|W = α'` and `F∘e^θ|W = α`.
    Swapped,
}

#[derive(Debug, Clone)]
pub struct HomotopyWitness {
    pub cylinder: Arc<Cylinder>,
    pub homotopy: DglMap,
    pub alpha: DglMap,
    pub alpha_prime: DglMap,
    pub orientation: Orientation,
}

impl HomotopyWitness {
    /// `F` restricted to `W`.
    pub fn restriction(&self) -> Result<DglMap, HomotopyError> {
        let images = self.cylinder.base.letters().map(|l| self.homotopy.image(l).clone()).collect();
        DglMap::unchecked(self.cylinder.base.clone(), self.homotopy.target().clone(), images)
    }

    /// `F∘e^θ` on `W`.
    pub fn transported(&self) -> Result<DglMap, HomotopyError> {
        let mut images = Vec::with_capacity(self.cylinder.width());
        for l in self.cylinder.base.letters() {
            images.push(self.homotopy.apply(&self.cylinder.e_theta(l)?));
        }
        DglMap::unchecked(self.cylinder.base.clone(), self.homotopy.target().clone(), images)
    }

    /// Recomputes the chain-map identity and both endpoint identities.
    pub fn verify(&self) -> Result<(), HomotopyError> {
        self.homotopy.check_chain_map()?;
        let (first, second) = match self.orientation {
            Orientation::AsDefined => (&self.alpha, &self.alpha_prime),
            Orientation::Swapped => (&self.alpha_prime, &self.alpha),
        };
        if !self.restriction()?.agrees_with(first)? {
            return Err(HomotopyError::EndpointMismatch("F|W is not the recorded endpoint".into()));
        }
        if !self.transported()?.agrees_with(second)? {
            return Err(HomotopyError::EndpointMismatch("F∘e^θ|W is not the recorded endpoint".into()));
        }
        Ok(())
    }
}

/// The explicit homotopy for maps that agree below degree `n` and differ by boundaries `y = dz` in degree `n`.
///
/// Generators without a correction must have `α = α'`. The orientation is read off the verified
/// endpoint identities.
pub fn build_lemma_homotopy(
    alpha: &DglMap,
    alpha_prime: &DglMap,
    n: u32,
    corrections: &BTreeMap<Letter, Correction>,
) -> Result<HomotopyWitness, HomotopyError> {
    let source = alpha.source().clone();
    let target = alpha.target().clone();
    if source.alphabet() != alpha_prime.source().alphabet() || target.alphabet() != alpha_prime.target().alphabet() {
        return Err(HomotopyError::EndpointMismatch("maps have different ends".into()));
    }
    let (sa, ta) = (source.alphabet(), target.alphabet());
    let d = target.derivation::<PLocalRational>()?;
    for l in source.letters() {
        let name = sa.name(l);
        let degree = sa.degree(l);
        if degree > n {
            return Err(HomotopyError::EndpointMismatch(format!("generator {name} lies above degree {n}")));
        }
        let correction = corrections.get(&l);
        if correction.is_some() && degree != n {
            return Err(HomotopyError::EndpointMismatch(format!("correction on {name} below degree {n}")));
        }
        let y = correction.map(|c| c.y.clone()).unwrap_or_else(LieExpression::zero);
        if let Some(c) = correction {
            let mut dz = d.apply(&expand(&c.z, ta)?, ta).map_err(DglError::from)?;
            dz.sub_assign(&expand(&c.y, ta)?);
            if !dz.is_zero() {
                return Err(HomotopyError::NotABoundaryWitness(name.to_string()));
            }
        }
        if !same_expansion(alpha_prime.image(l), &alpha.image(l).clone().plus(y), ta)? {
            return Err(HomotopyError::EndpointMismatch(format!("α' ≠ α + y on {name}")));
        }
    }
    let cyl = Arc::new(cylinder(source.clone())?);
    let width = sa.len();
    let mut images = vec![LieExpression::zero(); 3 * width];
    for l in source.letters() {
        let i = l as usize;
        match corrections.get(&l) {
            Some(c) => {
                images[i] = alpha_prime.image(l).clone();
                images[width + i] = -c.z.clone();
                images[2 * width + i] = -c.y.clone();
            }
            None => images[i] = alpha.image(l).clone(),
        }
    }
    let homotopy = DglMap::new(cyl.presentation().clone(), target, images)?;
    let mut witness = HomotopyWitness { cylinder: cyl, homotopy, alpha: alpha.clone(), alpha_prime: alpha_prime.clone(), orientation: Orientation::AsDefined };
    let restriction = witness.restriction()?;
    let transported = witness.transported()?;
    witness.orientation = if restriction.agrees_with(alpha)? && transported.agrees_with(alpha_prime)? {
        Orientation::AsDefined
    } else if restriction.agrees_with(alpha_prime)? && transported.agrees_with(alpha)? {
        Orientation::Swapped
    } else {
        return Err(HomotopyError::EndpointMismatch("neither endpoint orientation holds".into()));
    };
    Ok(witness)
}

#[derive(Debug, Clone)]
pub enum HomotopyAnswer {
    Yes(Box<HomotopyWitness>),
    /// The maps differ only on top generators, and on `generator` by a cycle that is not a boundary.
    No { generator: String, certificate: NonBoundaryCertificate },
    Unknown(String),
}

impl HomotopyAnswer {
    pub fn is_yes(&self) -> bool {
        matches!(self, HomotopyAnswer::Yes(_))
    }
}

/// Semi-decision of `α ≃ α'` by one correction step in the top degree.
pub fn homotopic_on_generators(alpha: &DglMap, alpha_prime: &DglMap, budget: u128, locality: Locality) -> Result<HomotopyAnswer, HomotopyError> {
    let source = alpha.source();
    let sa = source.alphabet();
    let top = source.letters().map(|l| sa.degree(l)).max().unwrap_or(0);
    let differing = alpha.differences(alpha_prime)?;
    if differing.is_empty() {
        return Ok(HomotopyAnswer::Yes(Box::new(build_lemma_homotopy(alpha, alpha_prime, top, &BTreeMap::new())?)));
    }
    if budget == 0 {
        return Ok(HomotopyAnswer::Unknown("budget exhausted".into()));
    }
    if let Some(&l) = differing.iter().find(|&&l| sa.degree(l) < top) {
        return Ok(HomotopyAnswer::Unknown(format!("maps differ on {} below the top degree", sa.name(l))));
    }
    let target = alpha.target();
    let options = CycleOptions::default().with_budget(budget);
    let mut corrections = BTreeMap::new();
    for l in differing {
        let y = alpha_prime.image(l).clone().minus(alpha.image(l).clone());
        match is_boundary(target, &y, locality, &options) {
            Ok(BoundaryAnswer::Yes { preimage, .. }) => {
                corrections.insert(l, Correction { y, z: preimage });
            }
            Ok(BoundaryAnswer::No(certificate)) => return Ok(HomotopyAnswer::No { generator: sa.name(l).to_string(), certificate }),
            Err(DglError::BudgetExceeded { .. }) => return Ok(HomotopyAnswer::Unknown(format!("budget exceeded on {}", sa.name(l)))),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(HomotopyAnswer::Yes(Box::new(build_lemma_homotopy(alpha, alpha_prime, top, &corrections)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgl::Scale;
    use crate::plocal::LocalPrime;
    use crate::tensor::{GeneratorName, TensorDerivation};

    fn pres(gens: &[(&str, u32)], d: &[(&str, &str)], p: u64) -> Arc<DglPresentation> {
        let mut a = Alphabet::new();
        for (n, k) in gens {
            a.push(GeneratorName::Named(n.to_string()), *k).unwrap();
        }
        let mut m = BTreeMap::new();
        for (g, e) in d {
            m.insert(a.letter_str(g).unwrap(), crate::lie::parse_lie(e, &a).unwrap());
        }
        Arc::new(DglPresentation::new(a, m, LocalPrime::new(p).unwrap(), Scale::Custom).unwrap())
    }

    /// `Σ θ^n(w)/n!` by iterating a tensor derivation.
    fn exp_theta_oracle(c: &Cylinder, w: Letter) -> TensorElement<PLocalRational> {
        let a = c.presentation.alphabet();
        let d = c.presentation.derivation::<PLocalRational>().unwrap();
        let mut s = TensorDerivation::new(1);
        for l in c.presentation.letters() {
            match c.part(l) {
                CylinderPart::Base(b) => s.set_image(l, TensorElement::letter(c.suspension(b))),
                _ => s.set_zero(l),
            }
        }
        let theta = |x: &TensorElement<PLocalRational>| {
            let mut t = d.apply(&s.apply(x, a).unwrap(), a).unwrap();
            t.add_assign(&s.apply(&d.apply(x, a).unwrap(), a).unwrap());
            t
        };
        let mut total = TensorElement::letter(w);
        let mut cur = TensorElement::letter(w);
        let mut fact = PLocalRational::one();
        for n in 1..20i64 {
            cur = theta(&cur);
            if cur.is_zero() {
                break;
            }
            fact = &fact * &PLocalRational::from_i64(n);
            total.add_scaled(&cur, &fact.recip().unwrap());
        }
        total
    }

    #[test]
    fn cylinder_degrees_and_squares() {
        let base = pres(&[("w", 5)], &[], 7);
        let c = cylinder(base).unwrap();
        let a = c.presentation().alphabet();
        assert_eq!(a.len(), 3);
        assert_eq!(a.name(1).to_string(), "s.w");
        assert_eq!(a.degree(1), 6);
        assert_eq!(a.name(2).to_string(), "w'");
        assert_eq!(c.presentation().differential(1), &LieExpression::leaf(2));
        c.check_squares().unwrap();
        assert_eq!(c.e_theta(0).unwrap(), LieExpression::leaf(0).plus(LieExpression::leaf(2)));
    }

    #[test]
    fn e_theta_matches_exponential_of_theta() {
        let base = pres(&[("a", 1), ("b", 1), ("c", 3), ("e", 4)], &[("c", "[a,b]"), ("e", "[a,[a,b]]")], 101);
        let c = cylinder(base).unwrap();
        c.check_squares().unwrap();
        let a = c.presentation().alphabet();
        for w in 0..4 {
            let e = c.e_theta(w).unwrap();
            assert_eq!(e.expand::<PLocalRational>(a).unwrap(), exp_theta_oracle(&c, w), "generator {w}");
        }
        let d = c.presentation().derivation::<PLocalRational>().unwrap();
        let map_images: Vec<LieExpression> = (0..4).map(|w| c.e_theta(w).unwrap()).collect();
        for w in 0..4u16 {
            let lhs = d.apply(&map_images[w as usize].expand(a).unwrap(), a).unwrap();
            let rhs = c.base().differential(w).substitute(&|l| map_images[l as usize].clone()).expand(a).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn e_theta_on_a_square() {
        let base = pres(&[("u", 3), ("v", 7)], &[("v", "[u,u]")], 7);
        let c = cylinder(base).unwrap();
        let a = c.presentation().alphabet();
        let (u, v) = (LieExpression::leaf(0), LieExpression::leaf(1));
        let (su, u1) = (LieExpression::leaf(c.suspension(0)), LieExpression::leaf(c.copy(0)));
        let expected = LieExpression::sum([
            (PLocalRational::one(), v),
            (PLocalRational::one(), LieExpression::leaf(c.copy(1))),
            (PLocalRational::from_i64(2), LieExpression::bracket(su.clone(), u)),
            (PLocalRational::from_i64(-1), LieExpression::bracket(u1, su)),
        ]);
        assert_eq!(c.e_theta(1).unwrap().expand::<PLocalRational>(a).unwrap(), expected.expand(a).unwrap());
    }

    #[test]
    fn factorials_must_be_local() {
        let base = pres(&[("a", 1), ("c", 2), ("e", 4)], &[("e", "[a,c]")], 2);
        let c = cylinder(base).unwrap();
        assert!(matches!(c.e_theta(2), Err(HomotopyError::NotPLocalFactorial { n: 2, prime: 2 })));
    }

    #[test]
    fn reflexive_homotopy() {
        let p = pres(&[("a", 1), ("b", 1), ("c", 3)], &[("c", "[a,b]")], 7);
        let id = DglMap::identity(p);
        let h = build_lemma_homotopy(&id, &id, 3, &BTreeMap::new()).unwrap();
        assert_eq!(h.orientation, Orientation::AsDefined);
        h.verify().unwrap();
    }

    #[test]
    fn lemma_homotopy_on_a_boundary_correction() {
        let p = pres(&[("a", 1), ("b", 3), ("w", 5)], &[("b", "[a,a]")], 7);
        let id = DglMap::identity(p.clone());
        let w = p.letter("w").unwrap();
        let y = p.parse("2*[[a,a],b]").unwrap();
        let mut images = id.images().to_vec();
        images[w as usize] = LieExpression::leaf(w).plus(y.clone());
        let shifted = DglMap::new(p.clone(), p.clone(), images).unwrap();
        let corrections = BTreeMap::from([(w, Correction { y: y.clone(), z: p.parse("[b,b]").unwrap() })]);
        let h = build_lemma_homotopy(&id, &shifted, 5, &corrections).unwrap();
        assert_eq!(h.orientation, Orientation::Swapped);
        h.verify().unwrap();

        let bad = BTreeMap::from([(w, Correction { y, z: LieExpression::zero() })]);
        assert!(matches!(build_lemma_homotopy(&id, &shifted, 5, &bad), Err(HomotopyError::NotABoundaryWitness(_))));
        assert!(matches!(build_lemma_homotopy(&id, &shifted, 5, &BTreeMap::new()), Err(HomotopyError::EndpointMismatch(_))));
        assert!(matches!(build_lemma_homotopy(&id, &shifted, 4, &corrections), Err(HomotopyError::EndpointMismatch(_))));
    }

    #[test]
    fn semi_decision() {
        let p = pres(&[("a", 1), ("b", 3), ("w", 5)], &[("b", "[a,a]")], 7);
        let id = DglMap::identity(p.clone());
        let w = p.letter("w").unwrap();
        assert!(homotopic_on_generators(&id, &id, 0, Locality::OverQ).unwrap().is_yes());

        let mut images = id.images().to_vec();
        images[w as usize] = LieExpression::leaf(w).plus(p.parse("[[a,a],b]").unwrap());
        let by_boundary = DglMap::new(p.clone(), p.clone(), images).unwrap();
        let answer = homotopic_on_generators(&id, &by_boundary, 1000, Locality::OverZp(7)).unwrap();
        let HomotopyAnswer::Yes(h) = answer else { panic!("expected a homotopy") };
        h.verify().unwrap();
        assert!(matches!(homotopic_on_generators(&id, &by_boundary, 0, Locality::OverQ).unwrap(), HomotopyAnswer::Unknown(_)));

        let q = pres(&[("a", 3), ("b", 4), ("w", 7)], &[], 7);
        let id = DglMap::identity(q.clone());
        let mut images = id.images().to_vec();
        images[2] = LieExpression::leaf(2).plus(q.parse("[a,b]").unwrap());
        let by_cycle = DglMap::new(q.clone(), q.clone(), images).unwrap();
        assert!(matches!(homotopic_on_generators(&id, &by_cycle, 1000, Locality::OverQ).unwrap(), HomotopyAnswer::No { .. }));
    }

    #[test]
    fn chain_map_rejects_bad_images() {
        let p = pres(&[("a", 1), ("b", 1), ("c", 3)], &[("c", "[a,b]")], 7);
        let bad = vec![LieExpression::leaf(0), LieExpression::leaf(0), LieExpression::leaf(2)];
        assert!(matches!(DglMap::new(p.clone(), p.clone(), bad), Err(HomotopyError::NotAChainMap(_))));
        let wrong_degree = vec![LieExpression::leaf(2), LieExpression::leaf(1), LieExpression::leaf(2)];
        assert!(matches!(DglMap::new(p.clone(), p, wrong_degree), Err(HomotopyError::BadImage(_))));
    }
}
