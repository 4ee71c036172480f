//! Library half of the `plexi` binary: CSV formats and the four
//! experiment commands (`gen`, `bench`, `compare`, `evolve`). Splitting
//! it out keeps the commands callable from integration tests.

pub mod commands;
pub mod io;
