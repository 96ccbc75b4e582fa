//! Numerical laboratory for polynomially bounded operators of Hankel type.
//!
//! The crate builds finite truncations of the operator
//! `T = [[ᵗS, εΓ], [0, S]]` on `H²(H)* ⊕ H²(H)`, where `Γ` is a vectorial
//! Hankel operator whose coefficients come from a CAR system, Haar unitaries
//! or canonical basis vectors, and computes:
//!
//! * empirical lower bounds on the polynomial-boundedness constant `‖u_T‖`,
//! * certified lower bounds on the completely bounded norm `‖u_T‖_cb`, which
//!   by Paulsen's criterion bound every similarity constant `‖V‖‖V⁻¹‖`,
//! * Monte Carlo checks of the dyadic Möbius martingale that transports the
//!   Fourier coefficient extraction onto a Hardy martingale.
//!
//! Modules are layered bottom-up: [`numkit`] (dense complex linear algebra and
//! polynomials), [`coeff_systems`], [`hankel`], [`counterexample`] and
//! [`martingale`].

pub mod coeff_systems;
pub mod counterexample;
pub mod error;
pub mod hankel;
pub mod martingale;
pub mod numkit;
pub mod rng;
pub mod thresholds;

pub use error::{Error, Result};
pub use num_complex::Complex64;
