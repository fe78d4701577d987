//! Named states, spin-chain Gibbs states and local noise channels.

mod channel;
mod named;
mod spin;

pub use channel::{amplitude_damping, apply_local_channel, depolarizing, KrausChannel};
pub use named::{
    ghz, ghz_w_mixture, horodecki_3x3, w, xxx_intermediate_witness, xxx_reference_state,
    XxxReference,
};
pub use spin::{ground_state, hamiltonian, thermal_state, SpinModel, MAX_SPINS};
