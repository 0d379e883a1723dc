pub mod bounds;
pub mod cli;
pub mod constructions;
pub mod corners;
pub mod field;
pub mod mpoly;
pub mod oracle;
pub mod partition;
pub mod tensor;
