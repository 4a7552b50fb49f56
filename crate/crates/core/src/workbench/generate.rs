use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{BoardPosition, Cell, Color, GameStatus};
use crate::search::{solve_with, Budget, Constraint, SolveOptions, SolveStatus};

use super::io::ProblemSet;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub size: u8,
    pub count: usize,
    pub seed: u64,
    pub white_density: f64,
    pub black_density: f64,
    /// Expansions allowed to prove a candidate; unproven candidates are
    /// discarded.
    pub solve_budget: u64,
    /// Smallest accepted root zone.
    pub min_zone: usize,
    /// Accept candidates whose root zone is the whole board.
    pub allow_full_board: bool,
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            size: 5,
            count: 50,
            seed: 1,
            white_density: 0.45,
            black_density: 0.20,
            solve_budget: 20_000,
            min_zone: 8,
            allow_full_board: false,
            max_attempts: 200_000,
        }
    }
}

/// Random non-terminal positions that White provably wins, ids `g<seed>-<n>`.
pub fn generate_problems(cfg: &GeneratorConfig) -> ProblemSet {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let area = cfg.size as usize * cfg.size as usize;
    let opts = SolveOptions {
        collect_patterns: false,
        ..SolveOptions::default()
    };
    let mut out = Vec::new();
    for _ in 0..cfg.max_attempts {
        if out.len() >= cfg.count {
            break;
        }
        let cells: Vec<Cell> = (0..area)
            .map(|_| {
                let x: f64 = rng.gen();
                if x < cfg.white_density {
                    Cell::White
                } else if x < cfg.white_density + cfg.black_density {
                    Cell::Black
                } else {
                    Cell::Empty
                }
            })
            .collect();
        let to_move = if rng.gen_bool(0.5) { Color::Black } else { Color::White };
        let Ok(pos) = BoardPosition::from_cells(cfg.size, &cells, to_move) else {
            continue;
        };
        if pos.adjudicate() != GameStatus::Ongoing {
            continue;
        }
        let r = solve_with(&pos, &Constraint::none(), Budget::new(cfg.solve_budget), None, &opts);
        let accepted = r
            .zone
            .is_some_and(|z| z.len() >= cfg.min_zone && (cfg.allow_full_board || z.len() < area));
        if r.status == SolveStatus::Proven && accepted {
            out.push((format!("g{}-{:03}", cfg.seed, out.len()), pos));
        }
    }
    out
}
