pub mod alloy;
pub mod checker;
pub mod corpus;
pub mod encoder;
pub mod frontend;
pub mod typing;
pub mod value;
