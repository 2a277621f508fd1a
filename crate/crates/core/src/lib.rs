pub mod code;
pub mod codegen;
pub mod decompose;
pub mod exec;
pub mod ff;
pub mod instances;
pub mod netgraph;
pub mod pipeline;
pub mod transform;
pub mod verify;
