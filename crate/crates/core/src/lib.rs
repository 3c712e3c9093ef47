// NaN parameters must fail validation, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod function;
pub mod measure;
pub mod norms;
pub mod quad;
pub mod report;
pub mod verify;
pub mod young;
