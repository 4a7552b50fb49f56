//! Iterative relevance-zone reduction: solve once without constraints, then
//! repeatedly lock everything outside the best zone, ban one more point
//! inside it and re-solve, until K rounds in a row fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::game::{BoardPosition, Point, PointSet};
use crate::search::{solve_with, Budget, Constraint, SolutionTree, SolveOptions, SolveStatus};
use crate::table::{PatternSource, RZTable, SharedTable};
use crate::zone::{pattern_of, RZPattern, Zone};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Erosion,
    Heatmap,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Erosion, Strategy::Heatmap];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Erosion => "erosion",
            Strategy::Heatmap => "heatmap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    pub strategy: Strategy,
    pub init_budget: u64,
    pub iter_budget: u64,
    pub k: u32,
    pub seed: u64,
    pub use_rzt: bool,
    /// Restrict Heatmap to empty points, as Erosion is.
    pub heatmap_empty_only: bool,
    pub solve: SolveOptions,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            strategy: Strategy::Heatmap,
            init_budget: 100_000,
            iter_budget: 20_000,
            k: 5,
            seed: 0,
            use_rzt: true,
            heatmap_empty_only: false,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("K must be at least 1")]
    ZeroK,
    #[error("budgets must be positive")]
    ZeroBudget,
    #[error("chosen point {0} is not inside the zone")]
    PointOutsideZone(String),
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<(), ReduceError> {
        if self.k == 0 {
            return Err(ReduceError::ZeroK);
        }
        if self.init_budget == 0 || self.iter_budget == 0 {
            return Err(ReduceError::ZeroBudget);
        }
        Ok(())
    }
}

/// Points whose ban made a round fail. Never cleared within one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FailedLedger {
    points: PointSet,
}

impl FailedLedger {
    pub fn points(&self) -> PointSet {
        self.points
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.contains(p)
    }

    fn add(&mut self, p: Point) {
        self.points.insert(p);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IterationStatus {
    Success,
    Fail,
}

/// Why a round failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureCause {
    Budget,
    Constraint,
    Disproven,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub round: u32,
    #[serde(serialize_with = "ser_index")]
    pub chosen_point: Point,
    pub constraint_size: usize,
    pub status: IterationStatus,
    pub zone_size_after: Option<usize>,
    pub expansions_used: u64,
    pub failure: Option<FailureCause>,
    #[serde(skip)]
    pub zone_after: Option<Zone>,
    #[serde(skip)]
    pub constraint: Zone,
}

fn ser_index<S: Serializer>(p: &Point, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(p.index() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionStatus {
    Reduced,
    Irreducible,
    Unsolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub init: u64,
    pub iter: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub problem_id: String,
    pub status: ReductionStatus,
    pub strategy: Strategy,
    pub seed: u64,
    pub budgets: Budgets,
    pub k: u32,
    pub use_rzt: bool,
    pub initial_size: Option<usize>,
    pub final_size: Option<usize>,
    pub reduction_rate: Option<f64>,
    pub initial_zone: Option<String>,
    pub final_zone: Option<String>,
    pub init_expansions: u64,
    pub iterations: Vec<IterationRecord>,
    #[serde(skip)]
    pub initial: Option<Zone>,
    #[serde(skip)]
    pub final_pattern: Option<RZPattern>,
    #[serde(skip)]
    pub final_zone_set: Option<Zone>,
}

impl ReductionReport {
    /// Mean expansions over the re-solving rounds.
    pub fn mean_iteration_expansions(&self) -> Option<f64> {
        if self.iterations.is_empty() {
            return None;
        }
        let total: u64 = self.iterations.iter().map(|r| r.expansions_used).sum();
        Some(total as f64 / self.iterations.len() as f64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything outside `best_zone`, plus the chosen point inside it.
pub fn build_constraint(best_zone: Zone, chosen: Point, size: u8) -> Result<Constraint, ReduceError> {
    if !best_zone.contains(chosen) {
        return Err(ReduceError::PointOutsideZone(chosen.label(size)));
    }
    let mut forbidden = best_zone.complement(size);
    forbidden.insert(chosen);
    Ok(Constraint::new(forbidden))
}

/// Per-point count of tree nodes whose zone covers the point.
pub fn heat(tree: &SolutionTree, size: u8) -> Vec<u32> {
    let mut h = vec![0u32; size as usize * size as usize];
    for node in &tree.nodes {
        for p in node.zone.iter() {
            h[p.index()] += 1;
        }
    }
    h
}

/// Picks the next point to ban, or `None` when no eligible point is left.
pub fn select_point(
    strategy: Strategy,
    best_zone: Zone,
    pos: &BoardPosition,
    ledger: &FailedLedger,
    tree: &SolutionTree,
    rng: &mut impl Rng,
    heatmap_empty_only: bool,
) -> Option<Point> {
    let mut eligible = best_zone - ledger.points();
    let empty_only = match strategy {
        Strategy::Random => false,
        Strategy::Erosion => true,
        Strategy::Heatmap => heatmap_empty_only,
    };
    if empty_only {
        eligible = eligible & pos.empty_points();
    }
    let points: Vec<Point> = eligible.iter().collect();
    if points.is_empty() {
        return None;
    }
    let n = pos.size();
    match strategy {
        Strategy::Random => Some(points[rng.gen_range(0..points.len())]),
        Strategy::Erosion => points.into_iter().min_by_key(|&p| {
            let outside = neighbours(p, n).filter(|q| !best_zone.contains(*q)).count();
            (std::cmp::Reverse(outside), p.index())
        }),
        Strategy::Heatmap => {
            let h = heat(tree, n);
            points.into_iter().min_by_key(|p| (h[p.index()], p.index()))
        }
    }
}

fn neighbours(p: Point, n: u8) -> impl Iterator<Item = Point> {
    let (r, c) = (p.row(n) as i32, p.col(n) as i32);
    [(-1, 0), (1, 0), (0, -1), (0, 1)]
        .into_iter()
        .map(move |(dr, dc)| (r + dr, c + dc))
        .filter(move |&(r, c)| r >= 0 && c >= 0 && r < n as i32 && c < n as i32)
        .map(move |(r, c)| Point::from_rc(r as u8, c as u8, n))
}

/// Runs a reduction against a private table.
pub fn reduce(pos: &BoardPosition, id: &str, cfg: &ReductionConfig, table: &mut RZTable) -> ReductionReport {
    let shared = SharedTable::new(std::mem::replace(table, RZTable::new(pos.size())));
    let report = reduce_shared(pos, id, cfg, &shared);
    *table = shared.into_inner();
    report
}

/// Runs a reduction against a table that other runs may share.
pub fn reduce_shared(
    pos: &BoardPosition,
    id: &str,
    cfg: &ReductionConfig,
    table: &SharedTable,
) -> ReductionReport {
    let pos = pos.with_fresh_history();
    let n = pos.size();
    let source: Option<&dyn PatternSource> = if cfg.use_rzt { Some(table) } else { None };
    let store = |patterns: &[RZPattern]| {
        if cfg.use_rzt && !patterns.is_empty() {
            let mut t = table.write();
            for p in patterns {
                let _ = t.insert(p.clone());
            }
        }
    };
    let mut report = ReductionReport {
        problem_id: id.to_string(),
        status: ReductionStatus::Unsolved,
        strategy: cfg.strategy,
        seed: cfg.seed,
        budgets: Budgets {
            init: cfg.init_budget,
            iter: cfg.iter_budget,
        },
        k: cfg.k,
        use_rzt: cfg.use_rzt,
        initial_size: None,
        final_size: None,
        reduction_rate: None,
        initial_zone: None,
        final_zone: None,
        init_expansions: 0,
        iterations: Vec::new(),
        initial: None,
        final_pattern: None,
        final_zone_set: None,
    };

    let first = solve_with(
        &pos,
        &Constraint::none(),
        Budget::new(cfg.init_budget),
        source,
        &cfg.solve,
    );
    report.init_expansions = first.expansions_used;
    store(&first.patterns);
    if first.status != SolveStatus::Proven {
        return report;
    }
    let initial = first.zone.expect("proven results carry a zone");
    let mut best = initial;
    let mut ko_free = first.ko_free;
    let mut tree = first.tree.expect("proven results carry a tree");
    let mut ledger = FailedLedger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fails = 0;
    let mut round = 0;
    while fails < cfg.k {
        let Some(p) = select_point(
            cfg.strategy,
            best,
            &pos,
            &ledger,
            &tree,
            &mut rng,
            cfg.heatmap_empty_only,
        ) else {
            break;
        };
        round += 1;
        let constraint = build_constraint(best, p, n).expect("selected points lie in the zone");
        let r = solve_with(&pos, &constraint, Budget::new(cfg.iter_budget), source, &cfg.solve);
        store(&r.patterns);
        let mut rec = IterationRecord {
            round,
            chosen_point: p,
            constraint_size: constraint.forbidden.len(),
            status: IterationStatus::Fail,
            zone_size_after: None,
            expansions_used: r.expansions_used,
            failure: None,
            zone_after: None,
            constraint: constraint.forbidden,
        };
        match (r.status, r.zone, r.tree) {
            (SolveStatus::Proven, Some(z), Some(t)) => {
                rec.status = IterationStatus::Success;
                rec.zone_size_after = Some(z.len());
                rec.zone_after = Some(z);
                best = z;
                ko_free = r.ko_free;
                tree = t;
                fails = 0;
            }
            (status, _, _) => {
                rec.failure = Some(match status {
                    SolveStatus::Disproven => FailureCause::Disproven,
                    _ if r.budget_exhausted => FailureCause::Budget,
                    _ => FailureCause::Constraint,
                });
                ledger.add(p);
                fails += 1;
            }
        }
        report.iterations.push(rec);
    }

    report.status = if best.len() < initial.len() {
        ReductionStatus::Reduced
    } else {
        ReductionStatus::Irreducible
    };
    report.initial_size = Some(initial.len());
    report.final_size = Some(best.len());
    report.reduction_rate = Some(best.len() as f64 / initial.len() as f64);
    report.initial_zone = Some(initial.to_hex(n));
    report.final_zone = Some(best.to_hex(n));
    report.initial = Some(initial);
    report.final_zone_set = Some(best);
    report.final_pattern = pattern_of(&pos, best, ko_free).ok();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{NodeKind, ProofOrigin, TreeNode};

    fn pt(i: u8) -> Point {
        Point::new(i)
    }

    fn zone(points: &[u8]) -> Zone {
        points.iter().map(|&i| pt(i)).collect()
    }

    fn tree_of(zones: &[Zone]) -> SolutionTree {
        SolutionTree {
            nodes: zones
                .iter()
                .map(|&z| TreeNode {
                    digest: 0,
                    kind: NodeKind::Or,
                    mv: None,
                    zone: z,
                    origin: ProofOrigin::Terminal,
                    children: Vec::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn constraint_from_zone() {
        let full = Zone::full(5);
        assert_eq!(build_constraint(full, pt(7), 5).unwrap().forbidden, zone(&[7]));
        let ten = zone(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(build_constraint(ten, pt(3), 5).unwrap().forbidden.len(), 16);
        assert!(build_constraint(ten, pt(20), 5).is_err());
    }

    #[test]
    fn heat_counts_cover() {
        let t = tree_of(&[zone(&[0, 1, 2]), zone(&[1, 2]), zone(&[2])]);
        let h = heat(&t, 5);
        assert_eq!((h[0], h[1], h[2]), (1, 2, 3));
        assert!(h[3..].iter().all(|&x| x == 0));
        let twice = tree_of(&[zone(&[4, 9]), zone(&[4, 9])]);
        let h = heat(&twice, 5);
        assert_eq!((h[4], h[9], h[0]), (2, 2, 0));
    }

    #[test]
    fn heatmap_picks_coolest_point() {
        let pos = BoardPosition::empty(5).unwrap();
        let t = tree_of(&[zone(&[0, 1, 2]), zone(&[1, 2]), zone(&[2])]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ledger = FailedLedger::default();
        let p = select_point(Strategy::Heatmap, zone(&[0, 1, 2]), &pos, &ledger, &t, &mut rng, false);
        assert_eq!(p, Some(pt(0)));
    }

    #[test]
    fn erosion_prefers_exposed_points() {
        // 3x3 block in the top-left corner: only its inner corner (row 2,
        // col 2) has two neighbours outside; edge points have one.
        let pos = BoardPosition::empty(5).unwrap();
        let z = zone(&[0, 1, 2, 5, 6, 7, 10, 11, 12]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ledger = FailedLedger::default();
        let t = SolutionTree::default();
        let first = select_point(Strategy::Erosion, z, &pos, &ledger, &t, &mut rng, false);
        assert_eq!(first, Some(pt(12)));
        ledger.add(pt(12));
        let next = select_point(Strategy::Erosion, z, &pos, &ledger, &t, &mut rng, false);
        assert_eq!(next, Some(pt(2)));
    }

    #[test]
    fn nothing_eligible() {
        let pos = BoardPosition::empty(5).unwrap();
        let mut ledger = FailedLedger::default();
        ledger.add(pt(3));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = SolutionTree::default();
        for s in Strategy::ALL {
            assert_eq!(select_point(s, zone(&[3]), &pos, &ledger, &t, &mut rng, false), None);
        }
    }

    #[test]
    fn random_is_seeded_and_in_zone() {
        let pos = BoardPosition::empty(5).unwrap();
        let z = zone(&[1, 5, 9, 13, 17]);
        let t = SolutionTree::default();
        let ledger = FailedLedger::default();
        let pick = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            select_point(Strategy::Random, z, &pos, &ledger, &t, &mut rng, false).unwrap()
        };
        assert_eq!(pick(7), pick(7));
        assert!(z.contains(pick(11)));
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ReductionConfig::default();
        assert_eq!((cfg.init_budget, cfg.iter_budget, cfg.k), (100_000, 20_000, 5));
        assert!(cfg.use_rzt);
        assert_eq!(ReductionConfig { k: 0, ..cfg.clone() }.validate(), Err(ReduceError::ZeroK));
        assert_eq!(
            ReductionConfig { iter_budget: 0, ..cfg }.validate(),
            Err(ReduceError::ZeroBudget)
        );
    }
}
