//! Numerical laboratory for the Báez-Duarte distance problem.
//!
//! The crate evaluates the objects that appear when one approximates the
//! indicator `χ = [x ≥ 1]` by dilated fractional parts `e_n(t) = {t/n}` in
//! `H = L²(0, ∞; t⁻² dt)`:
//!
//! * [`special_functions`]: ζ, ζ′, the completed ξ, log-Γ and the
//!   Riemann–Siegel phase θ.
//! * [`arithmetic`]: sieved Möbius and von Mangoldt tables, Mertens sums,
//!   Dirichlet partial sums and Chebyshev's sandwich.
//! * [`hilbert`]: inner products in `H`, the Gram system, `d_N` and the
//!   Möbius-weighted approximation `ν_{N,ε}` by two independent routes.
//! * [`integrals`]: the critical-line integrals `K_ε`, `L_ε`, `J_ε`,
//!   `I_{N,ε}` and ratio monitors for the asymptotic bounds.
//! * [`zeros`]: zero-table ingestion, zero counting and the V-typical
//!   ordinate machinery.
//! * [`contour`]: Perron's formula for `M_N(iτ)` along a straight line and
//!   along the deformed contour `𝒮_N`.
//!
//! Everything is double precision. Sums that feed quadrature go through the
//! compensated accumulators in [`numerics`].

pub mod arithmetic;
pub mod contour;
pub mod hilbert;
pub mod integrals;
pub mod numerics;
pub mod report;
pub mod special_functions;
pub mod zeros;

pub use num_complex::Complex64;

/// A point of the complex plane, `s = σ + iτ`.
pub type ComplexValue = Complex64;
