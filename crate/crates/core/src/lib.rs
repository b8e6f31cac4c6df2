//! Geodesics, optimality and reachability for a one-parameter family of
//! left-invariant Lorentzian structures on the universal cover of SL(2,ℝ).
//!
//! The metric is built from moments of inertia I1 = I2, I3 on the Lie
//! algebra of SU(1,1) ≅ SL(2,ℝ); the deformation parameter μ = I1/I3 − 1
//! splits the family into oblate (μ < 0), prolate (μ > 0) and anti-de Sitter
//! (μ = 0) regimes, with the sub-Lorentzian structure as the exact μ = −1
//! limit. The crate provides:
//!
//! * exact arithmetic on the universal cover ([`group`]): the group law,
//!   covering projection, Lie bracket and group exponential, with the
//!   unbounded angle coordinate lifted continuously;
//! * the Pontryagin covector dynamics ([`dynamics`]): Hamiltonians, the
//!   closed-form covector flow, causal classification, and a fixed-step
//!   RK–Munthe-Kaas integrator that serves as the numerical oracle;
//! * the closed-form exponential map and its Jacobian determinant
//!   ([`geodesic`]), in all three causal branches;
//! * conjugate, Maxwell and cut times, caustic sampling and Maxwell-point
//!   verification ([`optimality`]);
//! * attainable-set membership, boundary construction, abnormal geodesics
//!   and a constructive controllability synthesizer ([`reach`]).
//!
//! Everything is plain `f64`; all operations are pure and thread-safe.

pub mod dynamics;
pub mod error;
pub mod geodesic;
pub mod group;
pub mod lift;
pub mod optimality;
pub mod reach;
pub mod roots;

pub use dynamics::{
    classify, control_from_covector, covector_flow, hamiltonian, hamiltonian_sub,
    integrate_default, integrate_full_system, lightlike_h3bar, normalize, timelike_from_h3bar,
    validate_class, CausalClass, Covector, GeodesicDescriptor, Inertia, Normality,
    NormalizeTarget, Regime, StructureParams,
};
pub use error::{Error, Result};
pub use geodesic::{
    exp_map, exp_map_product_form, exp_map_quad, first_jacobian_zero, jacobian_det_analytic,
    jacobian_det_numeric, trace, GeodesicSample,
};
pub use group::{algebra_exp, killing_form, so11_conjugate, AlgebraElement, GroupPoint, QuadCoords, Su11};
pub use optimality::{
    caustic_sample, conjugate_time, cut_time, maxwell_pair_check, maxwell_time,
    maxwell_time_detailed, ordering_report, times_row, times_table, ExtendedTime, MaxwellDetail,
    OrderingRow,
};
pub use reach::{
    a_tmax_membership, abnormal_endpoint, lightlike_reach, longest_arc_exists, lower_boundary_c,
    maxwell_cap_c, oblate_membership, prolate_membership, sublorentzian_boundary_c,
    sublorentzian_membership, synthesize_controls, ControlArc, ControlProgram, LightlikeReach,
    Membership, MembershipStatus, SynthesisError,
};
