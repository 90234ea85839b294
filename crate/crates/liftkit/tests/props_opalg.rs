//! Randomized invariants of the operator-algebra layer.

#[macro_use]
mod common;

property_suite! {
    s_inner_gram_is_positive in 2usize..=4;
    kms_adjoint_is_an_involution in 2usize..=4;
    weighting_inverse_and_modular_identity in 2usize..=4;
    partial_trace_inverts_tensor in 0usize..=3;
    choi_of_cp_composition_is_psd in 2usize..=4;
}
