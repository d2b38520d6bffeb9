//! The chapters of the guide in `book/src`, one module each, so that
//! `cargo test --doc` compiles and runs every snippet.
#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/inequalities.md")]
pub mod inequalities {}

#[doc = include_str!("../../../book/src/blowups.md")]
pub mod blowups {}

#[doc = include_str!("../../../book/src/calculus.md")]
pub mod calculus {}

#[doc = include_str!("../../../book/src/structure.md")]
pub mod structure {}

#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
