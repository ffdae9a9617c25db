//! Pegasus hardware graphs, minor embeddings and their verification.

mod embedding;
mod pegasus;
mod router;

pub use embedding::{
    embed_model, unembed_sample, verify_embedding, ChainStrength, EmbeddedModel, Embedding,
    EmbeddingReport, Violation,
};
pub use pegasus::{
    build_pegasus, coord_to_linear, linear_to_coord, DefectList, HardwareGraph, PegasusCoord,
    HORIZONTAL_OFFSETS, VERTICAL_OFFSETS,
};
pub use router::{build_cfa_placement, embed_heuristic, embed_heuristic_with, DEFAULT_MAX_PASSES};
