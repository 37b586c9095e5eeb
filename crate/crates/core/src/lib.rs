//! Schur–Weyl decompositions of multi-qudit tensor spaces and closed-form
//! twirling channels.
//!
//! The tensor space `(ℂ^d)^⊗t` splits under the collective action `U^⊗t` and
//! the permutation action of `S_t` into blocks labelled by Young diagrams.
//! This crate builds an orthonormal basis `|i, m, λ⟩` adapted to that split
//! ([`schurbasis`]) and uses it to evaluate three averaging channels exactly:
//!
//! - unitary twirling `ρ ↦ ∫ U^⊗t ρ U^†⊗t dU`,
//! - symmetric twirling `ρ ↦ (1/t!) Σ_p O_p ρ O_pᵀ`,
//! - SLOCC twirling over Cartan-decomposed `SL(d, ℂ)` operators `K A K′`,
//!   weighted by their success probability.
//!
//! The [`montecarlo`] module holds independent stochastic and brute-force
//! oracles for all three channels.
//!
//! ```
//! use schurtwirl::{schurbasis::build_schur_basis, TensorSpace};
//!
//! let space = TensorSpace::new(2, 4).unwrap();
//! let basis = build_schur_basis(space).unwrap();
//! let dims: Vec<usize> = basis.blocks().iter().map(|b| b.dimension()).collect();
//! assert_eq!(dims, vec![5, 9, 2]);
//! ```
//!
//! Averaging over the non-compact factor of `SL(d, ℂ)` needs a normalizable
//! measure: the group is not amenable, so there is no uniform average to
//! fall back on. See [`measures`].

pub mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod montecarlo;
pub mod permops;
pub mod schurbasis;
pub mod space;
pub mod tableaux;
pub mod twirl;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use space::TensorSpace;

/// Version string used to key on-disk caches of Schur bases.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
