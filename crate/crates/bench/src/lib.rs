//! Fixtures shared by the benchmarks.

use dglr_core::dgl::{build_l1, default_prime, DglPresentation, Scale};
use dglr_core::frobenius::{Bound, FrobeniusInstance};
use dglr_core::{Digraph, LocalPrime};

pub const PAPER: Scale = Scale::Paper { n: 7 };

pub fn paper_prime() -> LocalPrime {
    default_prime(7)
}

pub fn two_cycle_l1(scale: Scale) -> DglPresentation {
    let prime = if scale == PAPER { paper_prime() } else { LocalPrime::new(7).expect("prime") };
    build_l1(&Digraph::two_cycle(), scale, prime).expect("two-cycle builds")
}

/// Degree 2339 over the five `w` degrees plus `x` and `z`, with at least one `x`.
pub fn third_layer_instance() -> FrobeniusInstance {
    FrobeniusInstance::new(vec![115, 151, 201, 303, 403, 690, 2337], 2339)
        .and_then(|f| f.with_constraint(5, Bound::AtLeast(1)))
        .expect("valid instance")
}
