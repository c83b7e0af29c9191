//! Synthetic video-grounded dialogue benchmark generation over CATER-like scene
//! metadata: scene simulation, a typed functional-program DSL, question
//! templates, ten-turn dialogue synthesis and an evaluation harness.

pub mod corpus;
pub mod dialogue;
pub mod eval;
pub mod interval;
pub mod program;
pub mod scene;
pub mod state;
pub mod template;
pub mod vocab;
