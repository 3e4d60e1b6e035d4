// negated comparisons are deliberate: NaN must fail range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod hermitian;
pub mod lab;
pub mod maps;
pub mod matrix_json;
pub mod nnls;
pub mod random;
pub mod verify;
pub mod quantities;
