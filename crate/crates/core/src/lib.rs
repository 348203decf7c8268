//! Design-to-code toolkit: Figma metadata refinement, a layout IR with a
//! rule-based HTML/Tailwind generator, and static/visual quality metrics for
//! generated UI code.

pub mod ablate;
pub mod cli;
pub mod agent;
pub mod codegen;
pub mod config;
pub mod curate;
pub mod figma;
pub mod ir;
pub mod metrics;
pub mod refine;
pub mod tailwind;
pub mod visual;
