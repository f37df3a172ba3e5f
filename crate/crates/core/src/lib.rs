//! Fidelity of noisy one-way (measurement-based) quantum computations and the
//! correlations of their decohered resource states.
//!
//! Local decoherence is the Lindblad family in [`channels`]; patterns live in
//! [`pattern`] and run over graph states from [`graphstate`]. [`fidelity`] has
//! the closed-form engines, [`oracle`] a brute-force density-matrix
//! simulator used to check them.
//!
//! ## Examples
//!
//! ```text
//! examples/
//! ├── rsp_noise.rs          # two-vertex remote state preparation, F and C vs time
//! ├── correlations.rs       # concurrence, negativity, discord, MEP of one state
//! ├── rotation_fidelity.rs  # five-vertex rotation, matched noise
//! ├── cnot15.rs             # fifteen-vertex CNOT
//! ├── deutsch_jozsa.rs      # noisy readout and the separable replacement
//! ├── ancilla_driven.rs     # one ancilla-driven step vs register mixedness
//! ├── custom_pattern.rs     # hand-built pattern, engines vs oracle
//! └── sweep.rs              # config-driven sweeps rendered as CSV
//! ```
//!
//! ```text
//! cargo run --release --example rsp_noise
//! ```

pub mod channels;
pub mod correlations;
pub mod error;
pub mod experiment;
pub mod fidelity;
pub mod graphstate;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod pattern;
pub mod protocols;
pub mod verify;

pub use error::{Error, Result};
