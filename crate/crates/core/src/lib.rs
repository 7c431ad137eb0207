//! Desk-scale structural verification toolkit for small satellites.
//!
//! - [`model`]: domain types, the text deck, validation, panel simplification
//! - [`fea`]: beam/shell elements, assembly, static and eigen solvers
//! - [`modal`], [`statics`], [`bolt`]: analysis workflows and requirement checks
//! - [`punch`]: fixed-width element-force result files
//! - [`randvib`]: PSD profiles, Grms, Miles, peak search, magnification
//! - [`surrogate`]: generators for the sample decks shipped in `decks/`

pub mod bolt;
pub mod fea;
pub mod modal;
pub mod model;
pub mod punch;
pub mod randvib;
pub mod statics;
pub mod surrogate;
