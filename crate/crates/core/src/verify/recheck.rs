//! Re-verification of report witnesses from their own payload.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::suites::{dense_kernel_dimension, expansion_vectors};
use super::{DglRef, Resolved, VerificationReport, Witness};
use crate::dgl::{
    boundary_sources, build_tower, certifies_unreachable, combination_boundary_check, homology_report, is_boundary, zero_cycle_certificate,
    BoundaryAnswer, CombinationAnswer, CycleOptions, DglError, DglPresentation, NonBoundaryCertificate, TowerOptions, DEFAULT_BUDGET,
};
use crate::frobenius::{lie_support, FrobeniusInstance};
use crate::homotopy::{build_lemma_homotopy, cylinder, Correction, DglMap, HomotopyError};
use crate::lie::{LieError, LieExpression};
use crate::linalg::exact_rank;
use crate::plocal::PLocalRational;
use crate::realization::{phi, phi_on_tower, PhiImage};
use crate::tensor::{GeneratorName, Letter, TensorElement, TensorError};

#[derive(Debug, thiserror::Error)]
pub enum RecheckError {
    #[error(transparent)]
    Dgl(#[from] DglError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("malformed witness: {0}")]
    Malformed(String),
}

fn malformed(s: impl Into<String>) -> RecheckError {
    RecheckError::Malformed(s.into())
}

/// `Ok(true)` when every witness of every check re-verifies.
pub fn recheck_report(report: &VerificationReport) -> Result<bool, RecheckError> {
    for check in &report.witnesses {
        for w in &check.evidence {
            if !recheck_witness(w)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Ctx {
    resolved: Resolved,
}

impl Ctx {
    fn new(r: &DglRef) -> Result<Self, RecheckError> {
        Ok(Self { resolved: Resolved::from_ref(r)? })
    }

    fn pres(&self) -> &Arc<DglPresentation> {
        &self.resolved.pres
    }

    fn letters(&self) -> Option<&[Letter]> {
        self.resolved.letters.as_deref()
    }

    fn options(&self) -> CycleOptions {
        let o = CycleOptions::default().with_budget(DEFAULT_BUDGET);
        match &self.resolved.letters {
            Some(l) => o.with_letters(l.clone()),
            None => o,
        }
    }

    fn parse(&self, text: &str) -> Result<LieExpression, RecheckError> {
        let e = self.pres().parse(text)?;
        if let Some(allowed) = self.letters() {
            if e.letters().iter().any(|l| !allowed.contains(l)) {
                return Err(malformed(format!("{text} uses letters outside the recorded letter set")));
            }
        }
        Ok(e)
    }

    fn expand(&self, e: &LieExpression) -> Result<TensorElement<PLocalRational>, RecheckError> {
        Ok(e.expand(self.pres().alphabet())?)
    }

    fn d_expand(&self, e: &LieExpression) -> Result<TensorElement<PLocalRational>, RecheckError> {
        let d = self.pres().derivation::<PLocalRational>()?;
        Ok(d.apply(&self.expand(e)?, self.pres().alphabet())?)
    }

    fn is_cycle(&self, e: &LieExpression) -> Result<bool, RecheckError> {
        Ok(self.d_expand(e)?.is_zero())
    }
}

fn rational(s: &str) -> Result<PLocalRational, RecheckError> {
    s.parse().map_err(|_| malformed(format!("coefficient {s}")))
}

pub fn recheck_witness(w: &Witness) -> Result<bool, RecheckError> {
    match w {
        Witness::Solutions { denominations, target, constraints, solutions } => {
            let mut inst = FrobeniusInstance::new(denominations.clone(), *target).map_err(|e| malformed(e.to_string()))?;
            for c in constraints {
                inst = inst.with_constraint(c.index, c.bound).map_err(|e| malformed(e.to_string()))?;
            }
            let sums = solutions.iter().all(|s| s.len() == denominations.len() && s.iter().zip(denominations).map(|(a, d)| a * d).sum::<u64>() == *target);
            Ok(sums && &inst.solve().solutions == solutions)
        }
        Witness::Cycle { dgl, element, degree, differential } => {
            let cx = Ctx::new(dgl)?;
            let e = cx.parse(element)?;
            let recorded = cx.pres().parse(differential)?;
            Ok(e.degree(cx.pres().alphabet())?.unwrap_or(0) == *degree && cx.d_expand(&e)? == cx.expand(&recorded)?)
        }
        Witness::NonBoundary { dgl, element, locality, certificate } => {
            let cx = Ctx::new(dgl)?;
            let e = cx.parse(element)?;
            if !cx.is_cycle(&e)? || cx.expand(&e)?.is_zero() {
                return Ok(false);
            }
            match certificate {
                NonBoundaryCertificate::NoSources => Ok(boundary_sources(cx.pres(), &e, cx.letters())?.is_empty()),
                NonBoundaryCertificate::UnreachableWord { word } => {
                    let a = cx.pres().alphabet();
                    let ex = cx.expand(&e)?;
                    let Some((found, _)) = ex.terms().find(|(w, _)| a.word_string(w) == *word) else {
                        return Ok(false);
                    };
                    Ok(certifies_unreachable(cx.pres(), &e, found, cx.letters())?)
                }
                _ => {
                    let answer = is_boundary(cx.pres(), &e, locality.locality(cx.pres().prime()), &cx.options())?;
                    Ok(answer == BoundaryAnswer::No(certificate.clone()))
                }
            }
        }
        Witness::Boundary { dgl, element, preimage, .. } => {
            let cx = Ctx::new(dgl)?;
            let (e, pre) = (cx.parse(element)?, cx.parse(preimage)?);
            Ok(cx.d_expand(&pre)? == cx.expand(&e)?)
        }
        Witness::Rank { dgl, elements, rank } => {
            let cx = Ctx::new(dgl)?;
            let exprs: Vec<LieExpression> = elements.iter().map(|s| cx.parse(s)).collect::<Result<_, _>>()?;
            Ok(exact_rank(&expansion_vectors(cx.pres(), &exprs)?) == *rank)
        }
        Witness::NoBoundaryCombination { dgl, elements, locality, certificate } => {
            let cx = Ctx::new(dgl)?;
            let exprs: Vec<LieExpression> = elements.iter().map(|s| cx.parse(s)).collect::<Result<_, _>>()?;
            let answer = combination_boundary_check(cx.pres(), &exprs, locality.locality(cx.pres().prime()), &cx.options())?;
            Ok(answer == CombinationAnswer::NoNonzeroBoundary(certificate.clone()))
        }
        Witness::Combination { dgl, elements, coefficients, preimage } => {
            let cx = Ctx::new(dgl)?;
            if elements.len() != coefficients.len() {
                return Err(malformed("one coefficient per element"));
            }
            let cs: Vec<PLocalRational> = coefficients.iter().map(|c| rational(c)).collect::<Result<_, _>>()?;
            if cs.iter().all(|c| c.is_zero()) {
                return Ok(false);
            }
            let terms: Vec<(PLocalRational, LieExpression)> =
                cs.into_iter().zip(elements).map(|(c, s)| Ok((c, cx.parse(s)?))).collect::<Result<_, RecheckError>>()?;
            let sum = LieExpression::sum(terms);
            Ok(cx.d_expand(&cx.parse(preimage)?)? == cx.expand(&sum)?)
        }
        Witness::Support { dgl, degree, constraints, multidegrees } => {
            let cx = Ctx::new(dgl)?;
            let a = cx.pres().alphabet();
            let letters: Vec<Letter> = cx.letters().map(<[Letter]>::to_vec).unwrap_or_else(|| cx.pres().letters().collect());
            let found: Vec<(String, String)> =
                lie_support(a, &letters, *degree, constraints).iter().map(|(m, d)| (m.display(a).to_string(), d.to_string())).collect();
            let recorded: Vec<(String, String)> = multidegrees.iter().map(|e| (e.multidegree.clone(), e.dimension.clone())).collect();
            Ok(found == recorded)
        }
        Witness::NonzeroCycle { dgl, degree, preimage, cycle } => {
            let cx = Ctx::new(dgl)?;
            let (pre, c) = (cx.parse(preimage)?, cx.parse(cycle)?);
            let image = cx.expand(&c)?;
            Ok(!image.is_zero() && c.degree(cx.pres().alphabet())? == Some(*degree) && cx.d_expand(&pre)? == image)
        }
        Witness::ModularRank { dgl, degree, modulus, columns, rank, nullity } => {
            let cx = Ctx::new(dgl)?;
            let c = zero_cycle_certificate(cx.pres(), *degree, &cx.options())?;
            let cols: u128 = c.components.iter().map(|x| x.columns).sum();
            let r: usize = c.ranks.iter().sum();
            Ok(c.modulus.to_string() == *modulus && cols.to_string() == *columns && r.to_string() == *rank && c.nullity().to_string() == *nullity)
        }
        Witness::ZeroKernel { dgl, degree, columns, rank, route } => {
            let cx = Ctx::new(dgl)?;
            match route.as_str() {
                "modular-certificate" => {
                    let c = zero_cycle_certificate(cx.pres(), *degree, &cx.options())?;
                    let cols: u128 = c.components.iter().map(|x| x.columns).sum();
                    Ok(c.is_zero() && cols == *columns as u128 && c.ranks.iter().sum::<usize>() == *rank && rank == columns)
                }
                "all-bracketings" => {
                    let (chains, kernel) = dense_kernel_dimension(cx.pres(), *degree)?;
                    Ok(chains == *columns && chains - kernel == *rank && kernel == 0)
                }
                other => Err(malformed(format!("unknown route {other}"))),
            }
        }
        Witness::DifferentialSquare { dgl, generators, edge_term_degree } => {
            let cx = Ctx::new(dgl)?;
            let pres = cx.pres();
            let a = pres.alphabet();
            let d = pres.derivation::<PLocalRational>()?;
            let mut ok = a.len() == *generators;
            for l in pres.letters() {
                let image = pres.differential(l).expand::<PLocalRational>(a)?;
                ok &= image.terms().all(|(w, _)| a.word_degree(w) + 1 == a.degree(l));
                ok &= d.apply(&image, a)?.is_zero();
                if let (Some(deg), GeneratorName::Z(..)) = (edge_term_degree, a.name(l)) {
                    ok &= !image.is_zero() && a.degree(l) == deg + 1;
                }
            }
            Ok(ok)
        }
        Witness::CylinderSquares { dgl, generators } => {
            let cx = Ctx::new(dgl)?;
            let cyl = cylinder(cx.pres().clone())?;
            Ok(cyl.presentation().alphabet().len() == *generators && cyl.check_squares().is_ok())
        }
        Witness::Exponential { dgl, generator, image } => {
            let cx = Ctx::new(dgl)?;
            let w = cx.pres().letter(generator).ok_or_else(|| malformed(format!("generator {generator}")))?;
            let cyl = cylinder(cx.pres().clone())?;
            let ca = cyl.presentation().alphabet();
            let recorded = cyl.presentation().parse(image)?.expand::<PLocalRational>(ca)?;
            let computed = cyl.e_theta(w)?.expand::<PLocalRational>(ca)?;
            let expected = LieExpression::leaf(w).plus(LieExpression::leaf(cyl.copy(w))).expand::<PLocalRational>(ca)?;
            Ok(recorded == computed && (!cx.pres().differential(w).is_formal_zero() || computed == expected))
        }
        Witness::Homotopy { dgl, degree, alpha, alpha_prime, corrections, orientation } => {
            let cx = Ctx::new(dgl)?;
            let pres = cx.pres().clone();
            let parse_all = |v: &[String]| v.iter().map(|s| cx.parse(s)).collect::<Result<Vec<_>, _>>();
            let (images, images_prime) = (parse_all(alpha)?, parse_all(alpha_prime)?);
            let mut table: BTreeMap<Letter, Correction> = BTreeMap::new();
            for c in corrections {
                let l = pres.letter(&c.generator).ok_or_else(|| malformed(format!("generator {}", c.generator)))?;
                table.insert(l, Correction { y: cx.parse(&c.y)?, z: cx.parse(&c.z)? });
            }
            let a = DglMap::new(pres.clone(), pres.clone(), images.clone())?;
            let b = DglMap::new(pres.clone(), pres.clone(), images_prime.clone())?;
            let h = build_lemma_homotopy(&a, &b, *degree, &table)?;
            h.verify()?;
            Ok(h.orientation == *orientation)
        }
        Witness::Phi { dgl, permutations, checks } => {
            let image = recompute_phi(dgl)?;
            let perms: Vec<Vec<usize>> = image.elements.iter().map(|s| s.images().to_vec()).collect();
            Ok(&perms == permutations && image.checks == *checks && checks.injective && checks.chain_maps == checks.order)
        }
        Witness::Homology { dgl, rows, linear_part_zero } => {
            let cx = Ctx::new(dgl)?;
            let degrees: Vec<u32> = rows.iter().map(|r| r.degree).collect();
            let r = homology_report(cx.pres(), &degrees)?;
            Ok(&r.degrees == rows && r.linear_part_zero == *linear_part_zero)
        }
        Witness::Summary { .. } => Ok(true),
    }
}

/// Φ from the rebuilt dgl; on a tower the stored actions and the induced maps must agree.
fn recompute_phi(dgl: &DglRef) -> Result<PhiImage, RecheckError> {
    let realization = |e: crate::realization::RealizationError| malformed(e.to_string());
    if let DglRef::Construction { digraph, scale, p, level, .. } = dgl {
        if *level > 1 {
            if digraph.content_hash() != dgl_hash(dgl) {
                return Err(DglError::BadParameters("digraph does not match its recorded hash".into()).into());
            }
            let prime = p.parse::<u64>().ok().and_then(|q| crate::plocal::LocalPrime::new(q).ok()).ok_or_else(|| malformed(format!("prime {p}")))?;
            let tower = build_tower(digraph, *scale, prime, &TowerOptions { top: *level, ..TowerOptions::default() })?;
            let stored = phi_on_tower(&tower).map_err(realization)?;
            let fresh = phi(&Arc::new(tower.top().clone()), &tower.automorphisms).map_err(realization)?;
            let agree = stored.maps.iter().zip(&fresh.maps).all(|(x, y)| x.map.agrees_with(&y.map).unwrap_or(false));
            if !agree {
                return Err(malformed("stored and induced actions differ"));
            }
            let mut image = stored;
            image.checks.permutation_form &= tower.summaries.iter().all(|s| s.permutation_form);
            return Ok(image);
        }
    }
    let cx = Ctx::new(dgl)?;
    let g = cx.pres().digraph().ok_or_else(|| malformed("presentation has no digraph"))?;
    let aut = g.automorphism_group().map_err(|e| malformed(e.to_string()))?;
    phi(cx.pres(), &aut).map_err(realization)
}

fn dgl_hash(dgl: &DglRef) -> String {
    match dgl {
        DglRef::Construction { digraph_hash, .. } => digraph_hash.clone(),
        DglRef::Presentation { .. } => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{run_suite, Status, SuiteId, SuiteParams};

    #[test]
    fn fast_suites_recheck() {
        let params = SuiteParams::paper_default();
        for id in [SuiteId::Frobenius, SuiteId::Decomposables690, SuiteId::FirstCycles, SuiteId::ThirdCycles, SuiteId::VertexTriples] {
            let r = run_suite(id, &params);
            assert!(recheck_report(&r).unwrap(), "{id}");
            let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let r = run_suite(SuiteId::FirstCycles, &SuiteParams::paper_default());
        let mut w = r.check("cycle-1").unwrap().evidence[0].clone();
        if let Witness::Cycle { degree, .. } = &mut w {
            *degree += 1;
        }
        assert!(!recheck_witness(&w).unwrap());

        let mut f = run_suite(SuiteId::Frobenius, &SuiteParams::paper_default());
        assert_eq!(f.status, Status::Fail);
        if let Witness::Solutions { solutions, .. } = &mut f.witnesses[0].evidence[0] {
            solutions.push(vec![0, 0, 0, 0, 0]);
        }
        assert!(!recheck_report(&f).unwrap());
    }
}
