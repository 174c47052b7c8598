pub mod cli;
pub mod formulation;
pub mod index;
pub mod ingest;
pub mod llm_bridge;
pub mod model;
pub mod registry;
pub mod report;
pub mod spec_template;
pub mod text;
