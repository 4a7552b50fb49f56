//! Killall-Go solving with relevance zones, a zone pattern table and
//! iterative zone reduction.

pub mod game;
pub mod zone;
pub mod search;
pub mod table;
pub mod reduce;
pub mod workbench;
