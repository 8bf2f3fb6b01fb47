//! Exhaustive nonnegative solutions of `sum a_i d_i = N`, and the generator-level multidegrees
//! of a graded alphabet in a fixed total degree.

use serde::{Deserialize, Serialize};

use crate::lie::{lie_dimension, MultiDegree};
use crate::tensor::{Alphabet, Letter};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrobeniusError {
    #[error("no denominations given")]
    Empty,
    #[error("denominations must be positive")]
    NonPositive,
    #[error("constraint index {0} out of range")]
    IndexOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast(u64),
    AtMost(u64),
    Exactly(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub index: usize,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusInstance {
    denominations: Vec<u64>,
    target: u64,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusSolutionSet {
    /// Exponent vectors in lexicographic order.
    pub solutions: Vec<Vec<u64>>,
}

impl FrobeniusInstance {
    pub fn new(denominations: Vec<u64>, target: u64) -> Result<Self, FrobeniusError> {
        if denominations.is_empty() {
            return Err(FrobeniusError::Empty);
        }
        if denominations.contains(&0) {
            return Err(FrobeniusError::NonPositive);
        }
        Ok(Self { denominations, target, constraints: Vec::new() })
    }

    pub fn with_constraint(mut self, index: usize, bound: Bound) -> Result<Self, FrobeniusError> {
        if index >= self.denominations.len() {
            return Err(FrobeniusError::IndexOutOfRange(index));
        }
        self.constraints.push(Constraint { index, bound });
        Ok(self)
    }

    pub fn denominations(&self) -> &[u64] {
        &self.denominations
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn ranges(&self) -> Vec<(u64, u64)> {
        let mut r = vec![(0u64, u64::MAX); self.denominations.len()];
        for c in &self.constraints {
            let (lo, hi) = &mut r[c.index];
            match c.bound {
                Bound::AtLeast(v) => *lo = (*lo).max(v),
                Bound::AtMost(v) => *hi = (*hi).min(v),
                Bound::Exactly(v) => {
                    *lo = (*lo).max(v);
                    *hi = (*hi).min(v);
                }
            }
        }
        r
    }

    pub fn satisfies(&self, a: &[u64]) -> bool {
        a.len() == self.denominations.len()
            && a.iter().zip(&self.denominations).map(|(x, d)| x * d).sum::<u64>() == self.target
            && self.ranges().iter().zip(a).all(|((lo, hi), x)| lo <= x && x <= hi)
    }

    /// Depth-first search in decreasing-denomination order with gcd and lower-bound pruning.
    pub fn solve(&self) -> FrobeniusSolutionSet {
        let n = self.denominations.len();
        let ranges = self.ranges();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.denominations[b].cmp(&self.denominations[a]).then(a.cmp(&b)));
        let mut suffix_gcd = vec![0u64; n + 1];
        let mut suffix_min = vec![0u64; n + 1];
        for k in (0..n).rev() {
            let i = order[k];
            suffix_gcd[k] = num_integer::gcd(suffix_gcd[k + 1], self.denominations[i]);
            suffix_min[k] = suffix_min[k + 1].saturating_add(ranges[i].0.saturating_mul(self.denominations[i]));
        }
        let mut out = Vec::new();
        let mut cur = vec![0u64; n];
        let ctx = Search { denoms: &self.denominations, order: &order, ranges: &ranges, suffix_gcd: &suffix_gcd, suffix_min: &suffix_min };
        ctx.dfs(0, self.target, &mut cur, &mut out);
        out.sort();
        FrobeniusSolutionSet { solutions: out }
    }
}

struct Search<'a> {
    denoms: &'a [u64],
    order: &'a [usize],
    ranges: &'a [(u64, u64)],
    suffix_gcd: &'a [u64],
    suffix_min: &'a [u64],
}

impl Search<'_> {
    fn dfs(&self, k: usize, rest: u64, cur: &mut [u64], out: &mut Vec<Vec<u64>>) {
        if k == self.order.len() {
            if rest == 0 {
                out.push(cur.to_vec());
            }
            return;
        }
        let i = self.order[k];
        let d = self.denoms[i];
        let (lo, hi) = self.ranges[i];
        let after_min = self.suffix_min[k + 1];
        if rest < after_min {
            return;
        }
        let top = hi.min((rest - after_min) / d);
        let g = self.suffix_gcd[k + 1];
        let mut c = lo;
        while c <= top {
            let r = rest - c * d;
            let feasible = if g == 0 { r == 0 } else { r.is_multiple_of(g) };
            if feasible {
                cur[i] = c;
                self.dfs(k + 1, r, cur, out);
            }
            c += 1;
        }
        cur[i] = 0;
    }
}

/// A bound on how many letters of a given degree a multidegree uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeConstraint {
    pub degree: u32,
    pub bound: Bound,
}

/// Degree-level solutions and their expansion into per-letter exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSupport {
    /// Distinct letter degrees, increasing.
    pub denominations: Vec<u64>,
    pub degree_solutions: Vec<Vec<u64>>,
    pub multidegrees: Vec<MultiDegree>,
}

/// All multidegrees over `letters` with the given total degree.
pub fn degree_support_over(
    alphabet: &Alphabet,
    letters: &[Letter],
    target: u32,
    constraints: &[DegreeConstraint],
) -> DegreeSupport {
    let mut denoms: Vec<u64> = letters.iter().map(|&l| alphabet.degree(l) as u64).collect();
    denoms.sort_unstable();
    denoms.dedup();
    let classes: Vec<Vec<Letter>> = denoms
        .iter()
        .map(|&d| letters.iter().copied().filter(|&l| alphabet.degree(l) as u64 == d).collect())
        .collect();
    if denoms.is_empty() {
        let sols = if target == 0 { vec![Vec::new()] } else { Vec::new() };
        let mds = if target == 0 { vec![MultiDegree::new()] } else { Vec::new() };
        return DegreeSupport { denominations: denoms, degree_solutions: sols, multidegrees: mds };
    }
    let mut inst = FrobeniusInstance::new(denoms.clone(), target as u64).expect("positive degrees");
    for c in constraints {
        match denoms.iter().position(|&d| d == c.degree as u64) {
            Some(i) => inst = inst.with_constraint(i, c.bound).expect("index in range"),
            None => {
                let forbids_all = match c.bound {
                    Bound::AtLeast(v) | Bound::Exactly(v) => v > 0,
                    Bound::AtMost(_) => false,
                };
                if forbids_all {
                    return DegreeSupport { denominations: denoms, degree_solutions: Vec::new(), multidegrees: Vec::new() };
                }
            }
        }
    }
    let sols = inst.solve().solutions;
    let mut mds = Vec::new();
    for s in &sols {
        let mut partial: Vec<Vec<(Letter, u32)>> = vec![Vec::new()];
        for (count, class) in s.iter().zip(&classes) {
            let comps = compositions(*count as u32, class.len());
            let mut next = Vec::with_capacity(partial.len() * comps.len());
            for p in &partial {
                for c in &comps {
                    let mut q = p.clone();
                    q.extend(class.iter().copied().zip(c.iter().copied()));
                    next.push(q);
                }
            }
            partial = next;
        }
        mds.extend(partial.into_iter().map(MultiDegree::from_pairs));
    }
    mds.sort();
    DegreeSupport { denominations: denoms, degree_solutions: sols, multidegrees: mds }
}

/// All multidegrees of the whole alphabet with the given total degree.
pub fn degree_support(alphabet: &Alphabet, target: u32, constraints: &[DegreeConstraint]) -> Vec<MultiDegree> {
    let letters: Vec<Letter> = alphabet.letters().collect();
    degree_support_over(alphabet, &letters, target, constraints).multidegrees
}

/// The multidegrees whose free Lie component is nonzero.
pub fn lie_support(alphabet: &Alphabet, letters: &[Letter], target: u32, constraints: &[DegreeConstraint]) -> Vec<(MultiDegree, u128)> {
    degree_support_over(alphabet, letters, target, constraints)
        .multidegrees
        .into_iter()
        .filter_map(|m| {
            let d = lie_dimension(alphabet, &m);
            (d > 0).then_some((m, d))
        })
        .collect()
}

/// Weak compositions of `n` into `k` parts, lexicographically decreasing in the first part.
pub fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::GeneratorName;

    const PAPER: [u64; 9] = [115, 151, 201, 303, 403, 690, 2337, 2338, 2339];

    #[test]
    fn unique_solution_at_690() {
        let s = FrobeniusInstance::new(PAPER[..5].to_vec(), 690).unwrap().solve();
        assert_eq!(s.solutions, vec![vec![6, 0, 0, 0, 0]]);
    }

    #[test]
    fn constrained_emptiness() {
        let s = FrobeniusInstance::new(PAPER[..7].to_vec(), 2337)
            .unwrap()
            .with_constraint(5, Bound::AtLeast(3))
            .unwrap()
            .solve();
        assert!(s.solutions.is_empty());
        assert!(FrobeniusInstance::new(vec![2, 3], 1).unwrap().solve().solutions.is_empty());
    }

    #[test]
    fn two_solutions_at_2340() {
        let s = FrobeniusInstance::new(PAPER.to_vec(), 2340).unwrap().solve();
        assert_eq!(s.solutions, vec![vec![5, 1, 2, 4, 0, 0, 0, 0, 0], vec![5, 3, 0, 3, 1, 0, 0, 0, 0]]);
    }

    #[test]
    fn errors() {
        assert_eq!(FrobeniusInstance::new(vec![], 3), Err(FrobeniusError::Empty));
        assert_eq!(FrobeniusInstance::new(vec![0, 2], 3), Err(FrobeniusError::NonPositive));
        assert!(FrobeniusInstance::new(vec![2], 3).unwrap().with_constraint(1, Bound::AtMost(1)).is_err());
    }

    #[test]
    fn generator_level_support() {
        let mut a = Alphabet::new();
        for (i, d) in PAPER[..5].iter().enumerate() {
            a.push(GeneratorName::W(i as u8 + 1), *d as u32).unwrap();
        }
        a.push(GeneratorName::X("v".into()), 690).unwrap();
        a.push(GeneratorName::X("u".into()), 690).unwrap();
        let s = degree_support(&a, 690, &[]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(&MultiDegree::from_pairs([(0, 6)])));
        assert!(s.contains(&MultiDegree::from_pairs([(5, 1)])));
        assert_eq!(degree_support(&a, 0, &[]), vec![MultiDegree::new()]);
        let at = [DegreeConstraint { degree: 690, bound: Bound::AtLeast(1) }];
        assert!(degree_support(&a, 2339, &at).is_empty());
        // 2338 = 690 + 6*115 + 151 + 201 + 2*303 = 2*690 + 151 + 201 + 2*303
        let s = degree_support(&a, 2338, &at);
        assert_eq!(s.len(), 2 + 3);
    }

    #[test]
    fn x_containing_solutions_at_2338() {
        let inst = FrobeniusInstance::new(PAPER[..8].to_vec(), 2338).unwrap().with_constraint(5, Bound::AtLeast(1)).unwrap();
        assert_eq!(inst.solve().solutions, vec![vec![0, 1, 1, 2, 0, 2, 0, 0], vec![6, 1, 1, 2, 0, 1, 0, 0]]);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
        assert_eq!(compositions(2, 3).len(), 6);
    }
}
