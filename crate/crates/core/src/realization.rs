//! Digraph automorphisms as strict self-maps of the tower.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::dgl::{base_action, BaseLetters, CycleBasis, DglError, DglPresentation, Tower};
use crate::digraph::{Digraph, DigraphError, GroupTable, VertexPermutation};
use crate::homotopy::{DglMap, HomotopyError};
use crate::plocal::PLocalRational;
use crate::tensor::{GeneratorName, Letter, TensorElement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealizationError {
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("cycle basis is not permuted by the automorphism: {0}")]
    NonEquivariantCycleBasis(String),
    #[error("induced map is not a chain map on {0}")]
    NotAChainMap(String),
    #[error("composition law fails: {0}")]
    NotAHomomorphism(String),
    #[error("distinct automorphisms induce the same map on x generators: {0}")]
    NotInjective(String),
    #[error(transparent)]
    Digraph(#[from] DigraphError),
    #[error(transparent)]
    Dgl(#[from] DglError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

/// The self-map of `L(G,k)` induced by a digraph automorphism.
#[derive(Debug, Clone)]
pub struct InducedSelfMap {
    pub sigma: VertexPermutation,
    pub map: DglMap,
}

struct Fingerprint(u64);

impl Fingerprint {
    fn of(e: &TensorElement<PLocalRational>) -> Self {
        let mut h = DefaultHasher::new();
        for (w, c) in e.sorted_terms() {
            w.hash(&mut h);
            c.to_string().hash(&mut h);
        }
        Fingerprint(h.finish())
    }
}

fn digraph_of(pres: &DglPresentation) -> Result<&Digraph, RealizationError> {
    pres.digraph().ok_or_else(|| RealizationError::NotAnAutomorphism("presentation has no digraph".into()))
}

fn relabel_class(g: &Digraph, sigma: &VertexPermutation, class: &[String]) -> Vec<String> {
    let mut out: Vec<String> = class.iter().map(|v| g.vertex_index(v).map_or_else(|| v.clone(), |i| g.vertex(sigma.apply(i)).to_string())).collect();
    out.sort();
    out
}

fn check_chain(map: DglMap, pres: &DglPresentation) -> Result<DglMap, RealizationError> {
    match map.chain_defect()? {
        None => Ok(map),
        Some(l) => {
            let name = pres.alphabet().name(l);
            Err(match name {
                GeneratorName::T { .. } => RealizationError::NonEquivariantCycleBasis(format!("chain condition fails on {name}")),
                _ => RealizationError::NotAChainMap(name.to_string()),
            })
        }
    }
}

/// `w_i ↦ w_i`, `x_v ↦ x_σ(v)`, `z_(v,u) ↦ z_(σv,σu)`, and each killing generator to the one whose boundary is the image of its boundary.
///
/// Works from the presentation alone: no stored cycle bases are needed.
pub fn induce(pres: &Arc<DglPresentation>, sigma: &VertexPermutation) -> Result<InducedSelfMap, RealizationError> {
    let g = digraph_of(pres)?;
    if sigma.len() != g.len() || !g.is_automorphism(sigma) {
        return Err(RealizationError::NotAnAutomorphism(sigma.display(g)));
    }
    let a = pres.alphabet();
    let base = BaseLetters::of(pres).ok_or_else(|| RealizationError::NotAnAutomorphism("not a digraph construction".into()))?;
    let n_base = 5 + base.x.len() + base.z.len();
    let mut images = base_action(pres, sigma)?.images;
    let mut by_print: FxHashMap<(u8, u64), Vec<Letter>> = FxHashMap::default();
    let mut expansions: Vec<Option<TensorElement<PLocalRational>>> = vec![None; a.len()];
    for l in pres.letters().skip(n_base) {
        if let GeneratorName::T { layer, .. } = a.name(l) {
            let e = pres.differential(l).expand(a).map_err(DglError::from)?;
            by_print.entry((*layer, Fingerprint::of(&e).0)).or_default().push(l);
            expansions[l as usize] = Some(e);
        }
    }
    for l in pres.letters().skip(n_base) {
        let GeneratorName::T { layer, class, .. } = a.name(l) else {
            return Err(RealizationError::NotAnAutomorphism(format!("unexpected generator {}", a.name(l))));
        };
        let image = pres.differential(l).substitute(&|m| images[m as usize].clone()).expand(a).map_err(DglError::from)?;
        let want = relabel_class(g, sigma, class);
        let hit = by_print.get(&(*layer, Fingerprint::of(&image).0)).and_then(|c| {
            c.iter().copied().find(|&m| expansions[m as usize].as_ref() == Some(&image) && matches!(a.name(m), GeneratorName::T { class, .. } if *class == want))
        });
        let m = hit.ok_or_else(|| RealizationError::NonEquivariantCycleBasis(format!("image of d{} is not the boundary of a generator", a.name(l))))?;
        images[l as usize] = crate::lie::LieExpression::leaf(m);
    }
    let map = DglMap::unchecked(pres.clone(), pres.clone(), images)?;
    Ok(InducedSelfMap { sigma: sigma.clone(), map: check_chain(map, pres)? })
}

/// The induced map on `tower.levels[level - 1]` from the actions stored with the tower.
pub fn induce_from_tower(tower: &Tower, level: usize, sigma: &VertexPermutation) -> Result<InducedSelfMap, RealizationError> {
    let s = tower
        .automorphisms
        .iter()
        .position(|t| t == sigma)
        .ok_or_else(|| RealizationError::NotAnAutomorphism(sigma.display(&tower.digraph)))?;
    let pres = tower
        .levels
        .get(level.wrapping_sub(1))
        .ok_or_else(|| RealizationError::Dgl(DglError::BadParameters(format!("tower has no level {level}"))))?;
    let pres = Arc::new(pres.clone());
    let map = DglMap::unchecked(pres.clone(), pres.clone(), tower.actions[s][level - 1].images.clone())?;
    Ok(InducedSelfMap { sigma: sigma.clone(), map: check_chain(map, &pres)? })
}

/// Evidence that `σ ↦ α_σ` is an injective homomorphism, checked on generator images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiChecks {
    pub order: usize,
    pub chain_maps: usize,
    pub composition_pairs: usize,
    pub inverse_pairs: usize,
    pub injective: bool,
    /// Every induced map sends generators to generators.
    pub permutation_form: bool,
}

#[derive(Debug, Clone)]
pub struct PhiImage {
    pub group: GroupTable,
    pub elements: Vec<VertexPermutation>,
    pub maps: Vec<InducedSelfMap>,
    pub checks: PhiChecks,
}

impl PhiImage {
    pub fn order(&self) -> usize {
        self.maps.len()
    }
}

/// Φ on a presentation, inducing every map from scratch.
pub fn phi(pres: &Arc<DglPresentation>, aut: &[VertexPermutation]) -> Result<PhiImage, RealizationError> {
    let maps = aut.par_iter().map(|s| induce(pres, s)).collect::<Result<Vec<_>, _>>()?;
    checked_image(aut, maps)
}

/// Φ on the top of a tower, from the stored actions.
pub fn phi_on_tower(tower: &Tower) -> Result<PhiImage, RealizationError> {
    let level = tower.levels.len();
    let maps = tower.automorphisms.par_iter().map(|s| induce_from_tower(tower, level, s)).collect::<Result<Vec<_>, _>>()?;
    checked_image(&tower.automorphisms, maps)
}

fn checked_image(aut: &[VertexPermutation], maps: Vec<InducedSelfMap>) -> Result<PhiImage, RealizationError> {
    let group = GroupTable::from_permutations(aut)?;
    let n = aut.len();
    let pres = maps.first().map(|m| m.map.source().clone()).ok_or_else(|| RealizationError::NotAHomomorphism("empty group".into()))?;
    let id = group.identity();
    if !aut[id].is_identity() || !maps[id].map.agrees_with(&DglMap::identity(pres.clone()))? {
        return Err(RealizationError::NotAHomomorphism("identity does not map to the identity".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs.par_iter().try_for_each(|&(i, j)| -> Result<(), RealizationError> {
        let k = group.mul(i, j);
        if !maps[i].map.compose(&maps[j].map)?.agrees_with(&maps[k].map)? {
            return Err(RealizationError::NotAHomomorphism(format!("Φ({i}∘{j}) ≠ Φ({i})∘Φ({j})")));
        }
        Ok(())
    })?;
    for i in 0..n {
        let inv = group.inverse(i);
        if !maps[inv].map.compose(&maps[i].map)?.agrees_with(&DglMap::identity(pres.clone()))? {
            return Err(RealizationError::NotAHomomorphism(format!("Φ({i})⁻¹ ≠ Φ({i}⁻¹)")));
        }
    }
    let base = BaseLetters::of(&pres).ok_or_else(|| RealizationError::NotAnAutomorphism("not a digraph construction".into()))?;
    for i in 0..n {
        for j in i + 1..n {
            if base.x.iter().all(|&x| maps[i].map.image(x) == maps[j].map.image(x)) {
                return Err(RealizationError::NotInjective(format!("elements {i} and {j}")));
            }
        }
    }
    let permutation_form = maps.iter().all(|m| m.map.images().iter().all(|e| matches!(e, crate::lie::LieExpression::Leaf(_))));
    let checks = PhiChecks { order: n, chain_maps: n, composition_pairs: n * n, inverse_pairs: n, injective: true, permutation_form };
    Ok(PhiImage { group, elements: aut.to_vec(), maps, checks })
}

/// A cycle basis moved by an induced map, with the label permutation it realizes.
#[derive(Debug, Clone)]
pub struct Relabeling {
    pub basis: CycleBasis,
    /// `σ(y_i) = y_{targets[i]}`.
    pub targets: Vec<usize>,
}

/// Applies `α_σ` to every cycle and certifies that the result is the same basis up to a label permutation.
pub fn relabel_cycles(basis: &CycleBasis, induced: &InducedSelfMap) -> Result<Relabeling, RealizationError> {
    let pres = induced.map.source();
    let a = pres.alphabet();
    let g = digraph_of(pres)?;
    let expansions: Vec<TensorElement<PLocalRational>> =
        basis.elements.par_iter().map(|y| y.expression.expand(a)).collect::<Result<_, _>>().map_err(DglError::from)?;
    let mut by_print: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
    for (j, e) in expansions.iter().enumerate() {
        by_print.entry(Fingerprint::of(e).0).or_default().push(j);
    }
    let images: Vec<_> = basis.elements.par_iter().map(|y| induced.map.apply(&y.expression)).collect();
    let mut targets = Vec::with_capacity(images.len());
    let mut out = basis.clone();
    let mut seen = vec![false; images.len()];
    for (i, image) in images.into_iter().enumerate() {
        let ex = image.expand(a).map_err(DglError::from)?;
        let want = relabel_class(g, &induced.sigma, &basis.elements[i].class);
        let j = by_print
            .get(&Fingerprint::of(&ex).0)
            .and_then(|c| c.iter().copied().find(|&j| expansions[j] == ex && basis.elements[j].class == want))
            .ok_or_else(|| RealizationError::NonEquivariantCycleBasis(format!("image of {} is not a basis cycle", basis.elements[i].label)))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(RealizationError::NonEquivariantCycleBasis(format!("two cycles map to {}", basis.elements[j].label)));
        }
        targets.push(j);
        let e = &mut out.elements[i];
        e.expression = image;
        e.class = want;
        e.index = basis.elements[j].index;
        e.label = basis.elements[j].label.clone();
    }
    Ok(Relabeling { basis: out, targets })
}
