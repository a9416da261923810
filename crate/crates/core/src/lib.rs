//! Regular condition games with delayed output: fixed-delay solving,
//! the finite-delay decision, and constant-delay strategy synthesis.

pub mod automata;
pub mod cli;
pub mod delaygame;
pub mod monoid;
pub mod paritygame;
pub mod sggame;
pub(crate) mod textio;
