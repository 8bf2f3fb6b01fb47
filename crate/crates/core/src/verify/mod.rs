//! Lemma suites with JSON reports whose witnesses can be re-verified on their own.

mod recheck;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dgl::{build_l1, build_tower, BaseLetters, BoundaryMethod, DglError, DglPresentation, HomologyRow, NonBoundaryCertificate, Scale, TowerOptions};
use crate::digraph::Digraph;
use crate::frobenius::{Constraint, DegreeConstraint};
use crate::homotopy::Orientation;
use crate::linalg::Locality;
use crate::plocal::LocalPrime;
use crate::realization::PhiChecks;
use crate::tensor::{GeneratorName, Letter};

pub use recheck::{recheck_report, recheck_witness, RecheckError};
pub use suites::{run_suite, run_suites, SuiteParams};

pub const SCHEMA: u32 = 1;

/// Outcome of a check, ordered so that the worst outcome is the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    BudgetExceeded,
    Fail,
}

impl Status {
    /// Any failure fails; otherwise any budget overrun; otherwise pass.
    pub fn aggregate(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().max().unwrap_or(Status::Pass)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BudgetExceeded => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::BudgetExceeded => "budget-exceeded",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SuiteId {
    #[serde(rename = "frobenius")]
    Frobenius,
    #[serde(rename = "square-zero")]
    SquareZero,
    #[serde(rename = "edge-summands")]
    EdgeSummands,
    #[serde(rename = "vertex-triples")]
    VertexTriples,
    #[serde(rename = "edge-tail")]
    EdgeTail,
    #[serde(rename = "decomposables-690")]
    Decomposables690,
    #[serde(rename = "first-cycles")]
    FirstCycles,
    #[serde(rename = "second-cycles")]
    SecondCycles,
    #[serde(rename = "third-cycles")]
    ThirdCycles,
    #[serde(rename = "top-degree")]
    TopDegree,
    #[serde(rename = "homotopy")]
    Homotopy,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "homology")]
    Homology,
}

impl SuiteId {
    pub const ALL: [SuiteId; 13] = [
        SuiteId::Frobenius,
        SuiteId::SquareZero,
        SuiteId::EdgeSummands,
        SuiteId::VertexTriples,
        SuiteId::EdgeTail,
        SuiteId::Decomposables690,
        SuiteId::FirstCycles,
        SuiteId::SecondCycles,
        SuiteId::ThirdCycles,
        SuiteId::TopDegree,
        SuiteId::Homotopy,
        SuiteId::Phi,
        SuiteId::Homology,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteId::Frobenius => "frobenius",
            SuiteId::SquareZero => "square-zero",
            SuiteId::EdgeSummands => "edge-summands",
            SuiteId::VertexTriples => "vertex-triples",
            SuiteId::EdgeTail => "edge-tail",
            SuiteId::Decomposables690 => "decomposables-690",
            SuiteId::FirstCycles => "first-cycles",
            SuiteId::SecondCycles => "second-cycles",
            SuiteId::ThirdCycles => "third-cycles",
            SuiteId::TopDegree => "top-degree",
            SuiteId::Homotopy => "homotopy",
            SuiteId::Phi => "phi",
            SuiteId::Homology => "homology",
        }
    }

    /// Alternative identifier accepted on the command line.
    pub fn alias(self) -> Option<&'static str> {
        match self {
            SuiteId::EdgeSummands => Some("L3.3"),
            SuiteId::VertexTriples => Some("L3.4"),
            SuiteId::EdgeTail => Some("L3.5"),
            SuiteId::Decomposables690 => Some("L4.2"),
            SuiteId::FirstCycles => Some("L4.4"),
            SuiteId::SecondCycles => Some("L4.9"),
            SuiteId::ThirdCycles => Some("L4.10"),
            SuiteId::TopDegree => Some("L4.14"),
            SuiteId::Phi => Some("T4.16-phi"),
            _ => None,
        }
    }

    /// Suites whose degrees are those of `n = 7`, whatever the requested parameters.
    pub fn pinned_to_seven(self) -> bool {
        matches!(
            self,
            SuiteId::Frobenius
                | SuiteId::Decomposables690
                | SuiteId::FirstCycles
                | SuiteId::SecondCycles
                | SuiteId::ThirdCycles
                | SuiteId::TopDegree
        )
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for SuiteId {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, UnknownSuite> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.as_str() == s || id.alias().is_some_and(|a| a.eq_ignore_ascii_case(s)))
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

/// Which letters of a presentation a check works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LetterSet {
    All,
    /// Every letter except the edge generators.
    EdgeFree,
    /// Only `w1..w5`.
    WOnly,
}

impl LetterSet {
    pub fn resolve(self, pres: &DglPresentation) -> Result<Option<Vec<Letter>>, DglError> {
        match self {
            LetterSet::All => Ok(None),
            LetterSet::EdgeFree => {
                let b = BaseLetters::of(pres).ok_or_else(|| DglError::BadParameters("edge-free letters need a digraph construction".into()))?;
                Ok(Some(b.z_free()))
            }
            LetterSet::WOnly => {
                let a = pres.alphabet();
                Ok(Some(pres.letters().filter(|&l| matches!(a.name(l), GeneratorName::W(_))).collect()))
            }
        }
    }
}

/// Enough data to rebuild the dgl a witness lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "from")]
pub enum DglRef {
    /// `L(G,level)` of the digraph construction.
    Construction { digraph: Digraph, digraph_hash: String, scale: Scale, p: String, level: u8, letters: LetterSet },
    /// A presentation given in full.
    Presentation { presentation: serde_json::Value, letters: LetterSet },
}

impl DglRef {
    pub fn construction(digraph: &Digraph, scale: Scale, prime: LocalPrime, level: u8, letters: LetterSet) -> Self {
        DglRef::Construction {
            digraph: digraph.clone(),
            digraph_hash: digraph.content_hash(),
            scale,
            p: prime.get().to_string(),
            level,
            letters,
        }
    }

    pub fn presentation(pres: &DglPresentation, letters: LetterSet) -> Self {
        let presentation = serde_json::from_str(&pres.to_json()).expect("presentation JSON is valid");
        DglRef::Presentation { presentation, letters }
    }

    pub fn letters(&self) -> LetterSet {
        match self {
            DglRef::Construction { letters, .. } | DglRef::Presentation { letters, .. } => *letters,
        }
    }

    /// Rebuilds the presentation, checking the digraph hash.
    pub fn rebuild(&self) -> Result<DglPresentation, DglError> {
        match self {
            DglRef::Construction { digraph, digraph_hash, scale, p, level, .. } => {
                if &digraph.content_hash() != digraph_hash {
                    return Err(DglError::BadParameters("digraph does not match its recorded hash".into()));
                }
                let prime = p.parse::<u64>().ok().and_then(|q| LocalPrime::new(q).ok()).ok_or_else(|| DglError::Parse(format!("prime {p}")))?;
                match level {
                    1 => build_l1(digraph, *scale, prime),
                    2..=4 => {
                        let tower = build_tower(digraph, *scale, prime, &TowerOptions { top: *level, ..TowerOptions::default() })?;
                        Ok(tower.levels.last().expect("nonempty tower").clone())
                    }
                    other => Err(DglError::BadParameters(format!("level {other} is not in 1..4"))),
                }
            }
            DglRef::Presentation { presentation, .. } => DglPresentation::from_json(&presentation.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalityTag {
    OverQ,
    /// Over the integers localized at the presentation's prime.
    OverZp,
}

impl LocalityTag {
    pub fn locality(self, prime: LocalPrime) -> Locality {
        match self {
            LocalityTag::OverQ => Locality::OverQ,
            LocalityTag::OverZp => Locality::OverZp(prime.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub multidegree: String,
    pub dimension: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    pub generator: String,
    pub y: String,
    pub z: String,
}

/// Evidence attached to a check. Elements are written in the bracket grammar; rationals and
/// wide integers as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    Solutions { denominations: Vec<u64>, target: u64, constraints: Vec<Constraint>, solutions: Vec<Vec<u64>> },
    /// `differential` is `d(element)`, written `0` for a cycle.
    Cycle { dgl: DglRef, element: String, degree: u32, differential: String },
    NonBoundary { dgl: DglRef, element: String, locality: LocalityTag, certificate: NonBoundaryCertificate },
    Boundary { dgl: DglRef, element: String, preimage: String, method: BoundaryMethod },
    Rank { dgl: DglRef, elements: Vec<String>, rank: usize },
    NoBoundaryCombination { dgl: DglRef, elements: Vec<String>, locality: LocalityTag, certificate: NonBoundaryCertificate },
    /// `sum c_i e_i = d(preimage)` with the coefficients not all zero.
    Combination { dgl: DglRef, elements: Vec<String>, coefficients: Vec<String>, preimage: String },
    Support { dgl: DglRef, degree: u32, constraints: Vec<DegreeConstraint>, multidegrees: Vec<SupportEntry> },
    /// `cycle = d(preimage)` is nonzero.
    NonzeroCycle { dgl: DglRef, degree: u32, preimage: String, cycle: String },
    ModularRank { dgl: DglRef, degree: u32, modulus: String, columns: String, rank: String, nullity: String },
    /// Full column rank of the boundary map on all Lie basis elements of a degree.
    ZeroKernel { dgl: DglRef, degree: u32, columns: usize, rank: usize, route: String },
    /// `d∘d = 0` and homogeneity on every generator.
    DifferentialSquare { dgl: DglRef, generators: usize, edge_term_degree: Option<u32> },
    CylinderSquares { dgl: DglRef, generators: usize },
    Exponential { dgl: DglRef, generator: String, image: String },
    Homotopy { dgl: DglRef, degree: u32, alpha: Vec<String>, alpha_prime: Vec<String>, corrections: Vec<CorrectionRecord>, orientation: Orientation },
    Phi { dgl: DglRef, permutations: Vec<Vec<usize>>, checks: PhiChecks },
    Homology { dgl: DglRef, rows: Vec<HomologyRow>, linear_part_zero: bool },
    Summary { facts: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub status: Status,
    pub claim: String,
    pub evidence: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SubCheck {
    pub fn new(name: impl Into<String>, claim: impl Into<String>, status: Status, evidence: Vec<Witness>) -> Self {
        Self { name: name.into(), status, claim: claim.into(), evidence, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// `pass` when the condition holds, `fail` otherwise.
    pub fn holds(name: impl Into<String>, claim: impl Into<String>, ok: bool, evidence: Vec<Witness>) -> Self {
        Self::new(name, claim, if ok { Status::Pass } else { Status::Fail }, evidence)
    }

    /// A check that could not be completed.
    pub fn from_error(name: impl Into<String>, claim: impl Into<String>, err: &DglError) -> Self {
        let status = match err {
            DglError::BudgetExceeded { .. } => Status::BudgetExceeded,
            _ => Status::Fail,
        };
        Self::new(name, claim, status, Vec::new()).with_note(err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub n: Option<u32>,
    pub p: String,
    pub digraph_hash: String,
    pub scale: String,
    pub budget: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub lemma_id: SuiteId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
    pub claim: String,
    pub status: Status,
    pub parameters: Parameters,
    pub witnesses: Vec<SubCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(id: SuiteId, claim: impl Into<String>, parameters: Parameters, witnesses: Vec<SubCheck>) -> Self {
        let status = Status::aggregate(witnesses.iter().map(|w| w.status));
        Self {
            schema: SCHEMA,
            lemma_id: id,
            alias: id.alias().map(str::to_string),
            claim: claim.into(),
            status,
            parameters,
            witnesses,
            timing_ms: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&SubCheck> {
        self.witnesses.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report is serializable")
    }
}

/// A rebuilt presentation and its resolved letter set.
#[derive(Debug, Clone)]
pub(crate) struct Resolved {
    pub pres: Arc<DglPresentation>,
    pub letters: Option<Vec<Letter>>,
}

impl Resolved {
    pub fn from_ref(r: &DglRef) -> Result<Self, DglError> {
        let pres = r.rebuild()?;
        let letters = r.letters().resolve(&pres)?;
        Ok(Self { pres: Arc::new(pres), letters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_aggregation() {
        use Status::*;
        assert_eq!(Status::aggregate([]), Pass);
        assert_eq!(Status::aggregate([Pass, BudgetExceeded]), BudgetExceeded);
        assert_eq!(Status::aggregate([BudgetExceeded, Fail, Pass]), Fail);
        assert_eq!(serde_json::to_string(&BudgetExceeded).unwrap(), "\"budget-exceeded\"");
    }

    #[test]
    fn ids_and_aliases() {
        for id in SuiteId::ALL {
            assert_eq!(id.as_str().parse::<SuiteId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
            if let Some(a) = id.alias() {
                assert_eq!(a.parse::<SuiteId>().unwrap(), id);
            }
        }
        assert_eq!("l4.14".parse::<SuiteId>().unwrap(), SuiteId::TopDegree);
        assert!("L9.9".parse::<SuiteId>().is_err());
    }

    #[test]
    fn references_rebuild() {
        let g = Digraph::two_cycle();
        let p = crate::dgl::default_prime(7);
        let r = DglRef::construction(&g, Scale::Synthetic, p, 1, LetterSet::EdgeFree);
        let back: DglRef = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        let res = Resolved::from_ref(&back).unwrap();
        assert_eq!(res.letters.unwrap().len(), 7);
        let l1 = build_l1(&g, Scale::Synthetic, p).unwrap();
        let r2 = DglRef::presentation(&l1, LetterSet::WOnly);
        assert_eq!(Resolved::from_ref(&r2).unwrap().letters.unwrap().len(), 5);
        let mut tampered = r;
        if let DglRef::Construction { digraph_hash, .. } = &mut tampered {
            digraph_hash.push('0');
        }
        assert!(tampered.rebuild().is_err());
    }
}
