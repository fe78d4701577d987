//! Fixtures shared by the benchmarks.

use entbound::states::{hamiltonian, horodecki_3x3, thermal_state, SpinModel};
use entbound::tensor::{random_density_matrix, SubsystemLayout};
use entbound::DensityMatrix;

/// Seeded full-rank 3⊗3 state.
pub fn random_qutrit_pair(seed: u64) -> DensityMatrix {
    random_density_matrix(
        &SubsystemLayout::new(vec![3, 3]).expect("valid layout"),
        9,
        seed,
    )
    .expect("valid rank")
}

pub fn horodecki(a: f64) -> DensityMatrix {
    horodecki_3x3(a).expect("a in range")
}

/// Thermal state of the three-site XX ring.
pub fn xx_ring(beta: f64, j: f64) -> DensityMatrix {
    let m = SpinModel::xx(3, j);
    thermal_state(&hamiltonian(&m).expect("valid model"), beta, &m.layout()).expect("valid beta")
}
