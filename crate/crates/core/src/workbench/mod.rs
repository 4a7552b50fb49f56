//! Workbench plumbing: position and problem-set I/O, zone rendering,
//! benchmark aggregation and problem generation.

mod bench;
mod generate;
mod io;

pub use bench::{bucket_of, format_size_rate, summarize, BenchRow, BenchSummary, GroupBy, RateMode};
pub use generate::{generate_problems, GeneratorConfig};
pub use io::{
    load_problems, parse_position, parse_problem_set, parse_sgf, render_zone, InputError,
    ProblemSet, RenderError,
};
