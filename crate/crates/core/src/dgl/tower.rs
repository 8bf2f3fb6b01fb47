//! Killing cycles degree by degree: `L(G,k+1)` adjoins one generator per basis cycle of `L(G,k)`.

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::cycles::{cycle_space_basis, key_words, CycleBasis, CycleOptions};
use super::{build_l1, BaseLetters, DegreeProfile, DglError, DglPresentation, Scale};
use crate::digraph::{Digraph, VertexPermutation};
use crate::field::Rationals;
use crate::lie::{LieExpression, MultiDegree};
use crate::linalg::{Echelon, SparseVector};
use crate::plocal::{LocalPrime, PLocalRational};
use crate::tensor::{GeneratorName, Letter, TensorElement, Word};

/// A dgl endomorphism given by the image of every generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterAction {
    pub images: Vec<LieExpression>,
}

impl LetterAction {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n as Letter).map(LieExpression::leaf).collect() }
    }

    pub fn from_permutation(perm: &[Letter]) -> Self {
        Self { images: perm.iter().map(|&l| LieExpression::leaf(l)).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `Some` when every generator goes to a generator.
    pub fn as_permutation(&self) -> Option<Vec<Letter>> {
        self.images.iter().map(|e| if let LieExpression::Leaf(l) = e { Some(*l) } else { None }).collect()
    }

    pub fn apply(&self, e: &LieExpression) -> LieExpression {
        e.substitute(&|l| self.images[l as usize].clone())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { images: other.images.iter().map(|e| self.apply(e)).collect() }
    }
}

/// The action of a vertex permutation on `L(G,1)`: w fixed, x and z relabelled.
pub fn base_action(pres: &DglPresentation, sigma: &VertexPermutation) -> Result<LetterAction, DglError> {
    let g = pres.digraph().ok_or_else(|| DglError::NotAnAutomorphism("presentation has no digraph".into()))?;
    if sigma.len() != g.len() || !g.is_automorphism(sigma) {
        return Err(DglError::NotAnAutomorphism(format!("{sigma} is not an automorphism of the digraph")));
    }
    let a = pres.alphabet();
    let image_of = |name: &GeneratorName| -> Result<Letter, DglError> {
        let v = |s: &str| g.vertex_index(s).map(|i| g.vertex(sigma.apply(i)).to_string());
        let mapped = match name {
            GeneratorName::X(x) => GeneratorName::X(v(x).expect("vertex of the digraph")),
            GeneratorName::Z(x, y) => GeneratorName::Z(v(x).expect("vertex"), v(y).expect("vertex")),
            other => other.clone(),
        };
        a.letter(&mapped).ok_or_else(|| DglError::NotAnAutomorphism(format!("no generator {mapped}")))
    };
    let base = BaseLetters::of(pres).ok_or_else(|| DglError::NotAnAutomorphism("not a digraph construction".into()))?;
    let n_base = 5 + base.x.len() + base.z.len();
    let mut images = Vec::with_capacity(a.len());
    for l in pres.letters() {
        images.push(if (l as usize) < n_base { LieExpression::leaf(image_of(a.name(l))?) } else { LieExpression::leaf(l) });
    }
    Ok(LetterAction { images })
}

/// Coordinates of cycles in a cycle basis, through leading-word projection.
pub struct CycleCoordinates {
    keys: FxHashMap<Word, usize>,
    echelon: Echelon<Rationals>,
    fingerprints: FxHashMap<Vec<(usize, PLocalRational)>, usize>,
}

impl CycleCoordinates {
    pub fn new(pres: &DglPresentation, basis: &CycleBasis) -> Result<Self, DglError> {
        let a = pres.alphabet();
        let mut keys = FxHashMap::default();
        for b in &basis.blocks {
            for md in &b.component.sources {
                for w in key_words(a, md) {
                    let n = keys.len();
                    keys.entry(w).or_insert(n);
                }
            }
        }
        let mut coords = Self { keys, echelon: Echelon::new(Rationals, true), fingerprints: FxHashMap::default() };
        for (i, e) in basis.elements.iter().enumerate() {
            let v = coords.project(&e.expression.expand(a)?);
            coords.fingerprints.insert(v.entries().to_vec(), i);
            coords.echelon.insert(&v);
        }
        Ok(coords)
    }

    fn project(&self, e: &TensorElement<PLocalRational>) -> SparseVector {
        SparseVector::from_pairs(&Rationals, e.terms().filter_map(|(w, c)| self.keys.get(w).map(|&i| (i, c.clone()))))
    }

    /// `e = sum c_j y_j`, or `None` when `e` is outside the span.
    pub fn solve(&self, pres: &DglPresentation, e: &LieExpression) -> Result<Option<Vec<(usize, PLocalRational)>>, DglError> {
        let ex = e.expand(pres.alphabet())?;
        let v = self.project(&ex);
        if let Some(&j) = self.fingerprints.get(v.entries()) {
            return Ok(Some(vec![(j, PLocalRational::one())]));
        }
        let (rem, combo) = self.echelon.reduce(&v);
        if !rem.is_empty() {
            return Ok(None);
        }
        let pivots = self.echelon.pivot_inputs();
        Ok(Some(combo.iter().map(|(k, c)| (pivots[k], c.clone())).collect()))
    }
}

/// Extends an automorphism of `L(G,k)` to `L(G,k+1)` by `t_i ↦ sum M_ij t_j`, where `σ(y_i) = sum M_ij y_j`.
pub fn extend_action(
    prev: &DglPresentation,
    next: &DglPresentation,
    basis: &CycleBasis,
    coords: &CycleCoordinates,
    action: &LetterAction,
) -> Result<LetterAction, DglError> {
    let offset = prev.alphabet().len();
    let mut images = action.images.clone();
    for (i, y) in basis.elements.iter().enumerate() {
        let image = action.apply(&y.expression);
        let row = coords.solve(prev, &image)?.ok_or_else(|| {
            DglError::NonEquivariantCycleBasis(format!("image of {} leaves the cycle span", y.label))
        })?;
        let t = |j: usize| LieExpression::leaf((offset + j) as Letter);
        images.push(match row.as_slice() {
            [(j, c)] if c.is_one() => t(*j),
            _ => LieExpression::sum(row.iter().map(|(j, c)| (c.clone(), t(*j)))),
        });
        debug_assert_eq!(images.len(), offset + i + 1);
    }
    debug_assert_eq!(images.len(), next.alphabet().len());
    Ok(LetterAction { images })
}

/// Adjoins `t` with `d t = y` for every basis cycle `y`.
pub fn build_next_level(prev: &DglPresentation, cycles: &CycleBasis) -> Result<DglPresentation, DglError> {
    let a = prev.alphabet();
    for y in &cycles.elements {
        if y.expression.degree(a)? != Some(cycles.degree) {
            return Err(DglError::NotACycle(y.label.clone()));
        }
    }
    let gens = cycles
        .elements
        .iter()
        .map(|y| (GeneratorName::T { layer: cycles.layer, class: y.class.clone(), index: y.index }, cycles.degree + 1, y.expression.clone()))
        .collect();
    prev.extend(gens).map_err(|e| match e {
        DglError::SquareNonzero(name) => DglError::NotACycle(name),
        other => other,
    })
}

#[derive(Debug, Clone)]
pub struct TowerOptions {
    /// Highest level to build, 1 to 4.
    pub top: u8,
    pub cycles: CycleOptions,
    /// Transport cycle bases along automorphism orbits.
    pub equivariant: bool,
}

impl Default for TowerOptions {
    fn default() -> Self {
        Self { top: 4, cycles: CycleOptions::default(), equivariant: true }
    }
}

/// Summary of one killing step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub level: u8,
    pub cycle_degree: u32,
    pub killed: usize,
    /// Killed cycles by number of vertices in their class.
    pub by_class_size: Vec<(usize, usize)>,
    pub blocks: usize,
    pub transported_blocks: usize,
    /// Every automorphism permutes the new generators.
    pub permutation_form: bool,
}

/// `L(G,1)` up to `L(G,top)` with the automorphism actions on each level.
#[derive(Debug, Clone)]
pub struct Tower {
    pub digraph: Digraph,
    pub automorphisms: Vec<VertexPermutation>,
    pub levels: Vec<DglPresentation>,
    pub cycle_bases: Vec<CycleBasis>,
    /// `actions[s][k]` is the action of `automorphisms[s]` on `levels[k]`.
    pub actions: Vec<Vec<LetterAction>>,
    pub summaries: Vec<LevelSummary>,
}

impl Tower {
    pub fn top(&self) -> &DglPresentation {
        self.levels.last().expect("at least L(G,1)")
    }
}

pub fn build_tower(g: &Digraph, scale: Scale, prime: LocalPrime, options: &TowerOptions) -> Result<Tower, DglError> {
    if !(1..=4).contains(&options.top) {
        return Err(DglError::BadParameters(format!("level {} is not in 1..4", options.top)));
    }
    let profile = DegreeProfile::for_scale(scale)?;
    let l1 = build_l1(g, scale, prime)?;
    let automorphisms = g.automorphism_group().map_err(|e| DglError::BadParameters(e.to_string()))?;
    let mut actions: Vec<Vec<LetterAction>> = automorphisms.iter().map(|s| base_action(&l1, s).map(|a| vec![a])).collect::<Result<_, _>>()?;
    let mut levels = vec![l1];
    let mut cycle_bases = Vec::new();
    let mut summaries = Vec::new();
    for k in 1..options.top {
        let prev = levels.last().expect("nonempty");
        let degree = profile.z + k as u32 - 1;
        let mut opts = options.cycles.clone();
        if options.equivariant {
            opts.symmetries = actions.iter().filter_map(|a| a.last().expect("one per level").as_permutation()).collect();
        }
        let basis = cycle_space_basis(prev, degree, &opts)?;
        let next = build_next_level(prev, &basis)?;
        let coords = CycleCoordinates::new(prev, &basis)?;
        let mut permutation_form = true;
        for a in actions.iter_mut() {
            let ext = extend_action(prev, &next, &basis, &coords, a.last().expect("one per level"))?;
            permutation_form &= ext.as_permutation().is_some();
            a.push(ext);
        }
        let mut by_class: Vec<(usize, usize)> = basis.class_counts().into_iter().collect();
        by_class.sort();
        summaries.push(LevelSummary {
            level: k + 1,
            cycle_degree: degree,
            killed: basis.len(),
            by_class_size: by_class,
            blocks: basis.blocks.len(),
            transported_blocks: basis.blocks.iter().filter(|b| b.transported_from.is_some()).count(),
            permutation_form,
        });
        cycle_bases.push(basis);
        levels.push(next);
    }
    Ok(Tower { digraph: g.clone(), automorphisms, levels, cycle_bases, actions, summaries })
}

/// Multidegrees of the cycles at one level, for reporting.
pub fn cycle_multidegrees(basis: &CycleBasis) -> Vec<MultiDegree> {
    basis.elements.iter().filter_map(|e| e.expression.multidegree()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgl::default_prime;

    #[test]
    fn two_cycle_tower_at_synthetic_scale() {
        let g = Digraph::two_cycle();
        let t = build_tower(&g, Scale::Synthetic, default_prime(7), &TowerOptions::default()).unwrap();
        assert_eq!(t.levels.len(), 4);
        assert_eq!(t.automorphisms.len(), 2);
        for (k, s) in t.summaries.iter().enumerate() {
            let before = t.levels[k].alphabet().len();
            assert_eq!(t.levels[k + 1].alphabet().len(), before + s.killed);
        }
        let top = t.top();
        let d = top.derivation::<PLocalRational>().unwrap();
        for (s, acts) in t.actions.iter().enumerate() {
            let act = acts.last().unwrap();
            for l in top.letters() {
                let lhs = d.apply(&act.images[l as usize].expand(top.alphabet()).unwrap(), top.alphabet()).unwrap();
                let rhs = act.apply(top.differential(l)).expand(top.alphabet()).unwrap();
                assert_eq!(lhs, rhs, "automorphism {s} fails on {}", top.alphabet().name(l));
            }
        }
    }

    #[test]
    fn next_level_rejects_non_cycles() {
        let l1 = build_l1(&Digraph::two_cycle(), Scale::Synthetic, default_prime(7)).unwrap();
        let mut basis = cycle_space_basis(&l1, 78, &CycleOptions::default()).unwrap();
        assert_eq!(basis.len(), 4);
        basis.elements[0].expression = l1.parse("[w1,w5]").unwrap();
        basis.degree = 98;
        assert!(matches!(build_next_level(&l1, &basis), Err(DglError::NotACycle(_))));
    }

    #[test]
    fn action_composition() {
        let a = LetterAction::from_permutation(&[1, 2, 0]);
        let b = a.compose(&a).compose(&a);
        assert_eq!(b, LetterAction::identity(3));
        assert!(a.as_permutation().is_some());
    }
}
