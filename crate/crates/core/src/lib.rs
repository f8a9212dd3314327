#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod dimension;
pub mod error;
pub mod export;
pub mod expr;
pub mod fixtures;
pub mod grid;
pub mod ifs;
pub mod pipeline;
pub mod poly;
pub mod scaling;
