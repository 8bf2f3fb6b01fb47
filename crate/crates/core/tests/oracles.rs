mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dglr_core::frobenius::{Bound, FrobeniusInstance};
use dglr_core::homotopy::cylinder;
use dglr_core::lie::parse_lie;
use dglr_core::{Digraph, LieExpression, Mod61, PLocalRational, VertexPermutation};

fn naive_solutions(denoms: &[u64], target: u64, lower: &[u64]) -> Vec<Vec<u64>> {
    fn go(denoms: &[u64], left: u64, lower: &[u64], cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let i = cur.len();
        if i == denoms.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in 0..=left / denoms[i] {
            if a >= lower[i] {
                cur.push(a);
                go(denoms, left - a * denoms[i], lower, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(denoms, target, lower, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    permutations(n - 1)
        .into_iter()
        .flat_map(|p| (0..n).map(move |pos| {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            q
        }))
        .collect()
}

fn lie_strategy(letters: u16) -> impl Strategy<Value = LieExpression> {
    let leaf = (0..letters).prop_map(LieExpression::leaf);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LieExpression::bracket(a, b)),
            (-3i64..=3, inner.clone(), -3i64..=3, inner).prop_map(|(c, a, e, b)| LieExpression::sum([
                (PLocalRational::from_i64(c), LieExpression::bracket(a.clone(), b.clone())),
                (PLocalRational::from_i64(e), LieExpression::bracket(b, a)),
            ])),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn frobenius_matches_enumeration(
        denoms in prop::collection::vec(1u64..=12, 1..=4),
        target in 0u64..=60,
        bound in 0u64..=3,
        index in 0usize..4,
    ) {
        let index = index % denoms.len();
        let mut lower = vec![0; denoms.len()];
        lower[index] = bound;
        let inst = FrobeniusInstance::new(denoms.clone(), target).unwrap().with_constraint(index, Bound::AtLeast(bound)).unwrap();
        let got = inst.solve().solutions;
        prop_assert_eq!(&got, &naive_solutions(&denoms, target, &lower));
        prop_assert!(got.iter().all(|a| inst.satisfies(a)));
    }

    #[test]
    fn automorphisms_match_permutations(n in 1usize..=5, bits in any::<u32>()) {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .enumerate()
            .filter(|(k, _)| bits >> (k % 32) & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        let g = Digraph::from_indices(n, edges, |i| format!("v{i}"));
        let got: BTreeSet<Vec<usize>> = g.automorphism_group().unwrap().iter().map(|p| p.images().to_vec()).collect();
        let brute: BTreeSet<Vec<usize>> = permutations(n)
            .into_iter()
            .filter(|p| g.is_automorphism(&VertexPermutation::new(p.clone()).unwrap()))
            .collect();
        prop_assert!(brute.iter().all(|p| g.edges().all(|(a, b)| g.has_edge(p[a], p[b]))));
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn permutation_inverse_composes_to_identity(images in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let p = VertexPermutation::new(images).unwrap();
        prop_assert!(p.compose(&p.invert()).unwrap().is_identity());
        prop_assert!(p.invert().compose(&p).unwrap().is_identity());
    }

    #[test]
    fn lie_basis_matches_bracket_span(seed in any::<u64>()) {
        let degrees = common::random_degrees(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(common::lie_case(&degrees, 8).is_ok(), "{:?}", common::lie_case(&degrees, 8));
    }

    #[test]
    fn homology_matches_dense_complex(seed in any::<u64>()) {
        let dgl = common::RandomDgl::sample(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = common::homology_case(&dgl, 5);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn cylinder_squares_vanish(seed in any::<u64>()) {
        let dgl = common::RandomDgl::sample(&mut ChaCha8Rng::seed_from_u64(seed));
        let cyl = cylinder(Arc::new(dgl.presentation())).unwrap();
        prop_assert!(cyl.check_squares().is_ok());
    }

    #[test]
    fn printed_expressions_parse_back(e in lie_strategy(3)) {
        let a = common::named_alphabet(&[1, 2, 3]);
        let text = e.display(&a).to_string();
        let back = parse_lie(&text, &a).unwrap();
        prop_assert_eq!(back.expand::<Mod61>(&a).unwrap(), e.expand::<Mod61>(&a).unwrap());
    }

    #[test]
    fn library_brackets_match_oracle(e in lie_strategy(3)) {
        let a = common::named_alphabet(&[1, 2, 3]);
        let deg = common::Degrees(vec![1, 2, 3]);
        prop_assert_eq!(common::from_library(&e.expand::<Mod61>(&a).unwrap()), oracle_expand(&deg, &e));
    }
}

fn oracle_expand(deg: &common::Degrees, e: &LieExpression) -> common::Poly {
    match e {
        LieExpression::Leaf(l) => common::Poly::letter(*l as u8),
        LieExpression::Bracket(a, b) => deg.bracket(&oracle_expand(deg, a), &oracle_expand(deg, b)),
        LieExpression::AdPower { base, k, arg } => {
            let b = oracle_expand(deg, base);
            (0..*k).fold(oracle_expand(deg, arg), |acc, _| deg.bracket(&b, &acc))
        }
        LieExpression::Sum(terms) => {
            let mut out = common::Poly::default();
            for (c, t) in terms {
                let c = c.numer().to_string().parse::<i64>().unwrap();
                out.add_scaled(&oracle_expand(deg, t), common::from_i64(c));
            }
            out
        }
    }
}
