//! Numerical probes of frame constants and Lipschitz behavior.
//!
//! For `x = u + v`, `y = u − v` one has
//!
//! ```text
//! ‖α(x) − α(y)‖² / d₁(x̂, ŷ)² = Q(u, v) / ρ(u, v),
//! Q(u, v) = Σ_k (Re ⟨u, f_k⟩⟨f_k, v⟩)²,
//! ρ(u, v) = ‖u‖²‖v‖² − (Im ⟨u, v⟩)²,
//! ```
//!
//! a ratio that is scale invariant in `u` and `v` separately. Its infimum
//! over unit spheres is the lower frame constant `a₀` of `α`, its supremum
//! the upper constant `b₀`.

mod bounds;
mod omega;
mod property_k;

pub use bounds::{
    a0_grid_oracle, estimate_a0, estimate_b0, pair_objective, pr_verdict, probe_bilipschitz, verdict_from_estimate,
    A0Estimate, A0Method, B0Estimate, BilipschitzReport, PairValue, PrVerdict, Verdict, Witness, DEFAULT_A0_STARTS,
    DEFAULT_VERDICT_THRESHOLD, GRID_RESOLUTION, RHO_FLOOR,
};
pub use omega::{probe_omega, OmegaProbeConfig, OmegaProbeReport, OmegaProbeRow};
pub use property_k::{
    certify_min_max, verify_property_k, verify_property_k_with_radii, Certificate, DistanceCheck, MembershipCheck,
    PropertyKExample, PropertyKRecord, CERTIFY_MARGIN,
};
