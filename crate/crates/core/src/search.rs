//! Budgeted df-pn proof search for White wins with relevance zones.
//!
//! White is the OR player. Proven nodes carry a closed zone; AND nodes only
//! need refutations of the pass and of Black moves inside the zone built so
//! far. Zones that touch the forbidden region make a node count as a
//! failure that is not a genuine Black win ("tainted"), so the search moves
//! on to alternatives while disproofs stay exact.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::game::{BoardPosition, Color, GameStatus, Move};
use crate::table::PatternSource;
use crate::zone::{and_zone, closure, or_propagate, pattern_of, refutation_zone, RZPattern, Zone};

/// Region the zone of every accepted proof must avoid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Constraint {
    pub forbidden: Zone,
}

impl Constraint {
    pub fn none() -> Self {
        Constraint::default()
    }

    pub fn new(forbidden: Zone) -> Self {
        Constraint { forbidden }
    }

    pub fn allows(&self, zone: Zone) -> bool {
        !zone.intersects(self.forbidden)
    }
}

/// Node expansion limit; one expansion generates the children of one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_expansions: u64,
}

impl Budget {
    pub fn new(max_expansions: u64) -> Self {
        Budget { max_expansions }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Proven,
    Disproven,
    Unknown,
}

/// Where the constraint is checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Enforcement {
    /// Every node that produces a zone.
    #[default]
    Everywhere,
    /// Terminal and table-hit zones, plus the final root zone.
    LeafOnly,
}

/// Which zone a proven node reports when several are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZoneChoice {
    /// The whole Benson life zone at terminals and the first proven move
    /// in move order at OR nodes; smaller alternatives only when the
    /// constraint rules these out.
    #[default]
    FirstProven,
    /// The smallest compliant zone among everything already proven.
    Smallest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub use_tt: bool,
    pub enforcement: Enforcement,
    /// Gather patterns from every eligible proven node.
    pub collect_patterns: bool,
    pub zone_choice: ZoneChoice,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            use_tt: true,
            enforcement: Enforcement::Everywhere,
            collect_patterns: true,
            zone_choice: ZoneChoice::FirstProven,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Or,
    And,
}

/// How a proven node got its zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofOrigin {
    Expanded,
    Terminal,
    TableHit,
    Transposition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub digest: u64,
    pub kind: NodeKind,
    pub mv: Option<Move>,
    pub zone: Zone,
    pub origin: ProofOrigin,
    pub children: Vec<usize>,
}

/// Proof tree; node 0 is the root, children follow their parents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionTree {
    pub nodes: Vec<TreeNode>,
}

impl SolutionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub table_hits: u64,
    pub tt_hits: u64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub zone: Option<Zone>,
    pub expansions_used: u64,
    pub tree: Option<SolutionTree>,
    /// Ko-free, history-independent proven White wins met during the search.
    pub patterns: Vec<RZPattern>,
    pub stats: SearchStats,
    /// The expansion limit was reached before the root was decided.
    pub budget_exhausted: bool,
    /// The root proof involves no ko and no superko exclusion.
    pub ko_free: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no solution tree: the result is not proven")]
pub struct NotProven;

impl SolveResult {
    pub fn extract_tree(&self) -> Result<&SolutionTree, NotProven> {
        self.tree.as_ref().ok_or(NotProven)
    }
}

/// Ranks moves: captures, then moves raising the mover's weakest block,
/// then distance to the last move, then distance to the centre, then point
/// index. Pass comes last.
pub fn order_moves(pos: &BoardPosition) -> Vec<Move> {
    let (succ, _) = pos.successors();
    ranked(pos, succ).into_iter().map(|(m, _)| m).collect()
}

fn ranked(pos: &BoardPosition, succ: Vec<(Move, BoardPosition)>) -> Vec<(Move, BoardPosition)> {
    let n = pos.size() as i32;
    let mover = pos.to_move();
    let before = pos.min_liberties(mover).unwrap_or(0);
    let last = pos.last_move();
    let mut keyed: Vec<((u8, u8, i32, i32, usize), (Move, BoardPosition))> = succ
        .into_iter()
        .map(|(m, child)| {
            let key = match m {
                Move::Pass => (2, 2, 0, 0, usize::MAX),
                Move::Play(p) => {
                    let captures = pos.stone_bits(mover.opponent()) & !child.stone_bits(mover.opponent()) != 0;
                    let raises = child.min_liberties(mover).unwrap_or(0) > before;
                    let (r, c) = (p.row(pos.size()) as i32, p.col(pos.size()) as i32);
                    let near = last.map_or(0, |q| {
                        (r - q.row(pos.size()) as i32).abs() + (c - q.col(pos.size()) as i32).abs()
                    });
                    let centre = (2 * r - (n - 1)).abs() + (2 * c - (n - 1)).abs();
                    (u8::from(!captures), u8::from(!raises), near, centre, p.index())
                }
            };
            (key, (m, child))
        })
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    keyed.into_iter().map(|(_, x)| x).collect()
}

pub fn solve(
    pos: &BoardPosition,
    constraint: &Constraint,
    budget: Budget,
    table: Option<&dyn PatternSource>,
) -> SolveResult {
    solve_with(pos, constraint, budget, table, &SolveOptions::default())
}

const INF: u32 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Open,
    Proven,
    Failed,
}

const EXPANDED: u8 = 1;
const GENUINE: u8 = 2;
const KO: u8 = 4;
const PATH_DEP: u8 = 8;
/// Proven, but the zone seen from the parent breaks the constraint.
const EDGE_BAD: u8 = 16;

const NO_PROOF: u32 = u32::MAX;
/// New open nodes start at proof number 1 + depth / DEPTH_STEP, so long
/// forcing lines look costlier than short ones.
const DEPTH_STEP: u32 = 4;

#[derive(Clone, Copy, Debug)]
struct Node {
    mv: Move,
    pn: u32,
    dn: u32,
    first: u32,
    len: u16,
    state: State,
    flags: u8,
    origin: ProofOrigin,
    proof: u32,
    depth: u16,
}

#[derive(Clone, Copy, Debug)]
struct Proof {
    zone: Zone,
    /// Zone of the parent move through this node; empty until computed.
    edge: Option<Zone>,
    /// Chosen child at an expanded OR node.
    chosen: u32,
}

#[derive(Clone, Copy, Debug)]
enum TtEntry {
    Proven { zone: Zone, ko: bool },
    Failed,
}

struct Outcome {
    state: State,
    flags: u8,
    origin: ProofOrigin,
    zone: Option<Zone>,
}

impl Outcome {
    fn open() -> Self {
        Outcome {
            state: State::Open,
            flags: 0,
            origin: ProofOrigin::Expanded,
            zone: None,
        }
    }

    fn failed(genuine: bool) -> Self {
        Outcome {
            state: State::Failed,
            flags: if genuine { GENUINE } else { 0 },
            origin: ProofOrigin::Terminal,
            zone: None,
        }
    }
}

struct Solver<'a> {
    constraint: Constraint,
    budget: u64,
    expansions: u64,
    exhausted: bool,
    opts: SolveOptions,
    table: Option<&'a dyn PatternSource>,
    nodes: Vec<Node>,
    proofs: Vec<Proof>,
    tt: HashMap<u64, TtEntry>,
    stats: SearchStats,
}

fn tt_key(pos: &BoardPosition) -> u64 {
    pos.digest() ^ (pos.pass_streak() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Stack for the search thread; recursion depth is bounded only by the
/// expansion budget.
const SEARCH_STACK: usize = 1 << 30;

pub fn solve_with(
    pos: &BoardPosition,
    constraint: &Constraint,
    budget: Budget,
    table: Option<&dyn PatternSource>,
    opts: &SolveOptions,
) -> SolveResult {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("rzr-search".into())
            .stack_size(SEARCH_STACK)
            .spawn_scoped(s, || run(pos, constraint, budget, table, opts))
            .expect("spawn search thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

fn run(
    pos: &BoardPosition,
    constraint: &Constraint,
    budget: Budget,
    table: Option<&dyn PatternSource>,
    opts: &SolveOptions,
) -> SolveResult {
    let unknown = |expansions_used| SolveResult {
        status: SolveStatus::Unknown,
        zone: None,
        expansions_used,
        tree: None,
        patterns: Vec::new(),
        stats: SearchStats::default(),
        budget_exhausted: false,
        ko_free: false,
    };
    if constraint.forbidden.is_subset(Zone::full(pos.size()))
        && constraint.forbidden.len() == pos.area()
        && pos.adjudicate() == GameStatus::Ongoing
    {
        return unknown(0);
    }
    let mut s = Solver {
        constraint: *constraint,
        budget: budget.max_expansions,
        expansions: 0,
        exhausted: false,
        opts: *opts,
        table,
        nodes: Vec::new(),
        proofs: Vec::new(),
        tt: HashMap::new(),
        stats: SearchStats::default(),
    };
    let root_eval = s.evaluate(pos, true);
    s.push(Move::Pass, root_eval, 0);
    if s.nodes[0].state == State::Open {
        s.mid(0, pos, INF, INF);
    }
    s.stats.nodes = s.nodes.len() as u64;
    let root = s.nodes[0];
    let status = match root.state {
        State::Proven => SolveStatus::Proven,
        State::Failed if root.flags & GENUINE != 0 => SolveStatus::Disproven,
        _ => SolveStatus::Unknown,
    };
    let mut patterns = Vec::new();
    if opts.collect_patterns {
        let mut seen = HashSet::new();
        s.collect(0, pos, &mut patterns, &mut seen);
    }
    if status != SolveStatus::Proven {
        return SolveResult {
            status,
            zone: None,
            expansions_used: s.expansions,
            tree: None,
            patterns,
            stats: s.stats,
            budget_exhausted: s.exhausted,
            ko_free: false,
        };
    }
    let zone = s.proofs[root.proof as usize].zone;
    if !s.constraint.allows(zone) {
        let mut r = unknown(s.expansions);
        r.patterns = patterns;
        r.stats = s.stats;
        r.budget_exhausted = s.exhausted;
        return r;
    }
    let mut tree = SolutionTree::default();
    s.extract(0, pos, None, &mut tree);
    SolveResult {
        status,
        zone: Some(zone),
        expansions_used: s.expansions,
        tree: Some(tree),
        patterns,
        stats: s.stats,
        budget_exhausted: false,
        ko_free: root.flags & (KO | PATH_DEP) == 0,
    }
}

impl Solver<'_> {
    fn checks_interior(&self) -> bool {
        self.opts.enforcement == Enforcement::Everywhere
    }

    fn push(&mut self, mv: Move, out: Outcome, depth: u16) -> u32 {
        let (pn, dn) = match out.state {
            State::Open => (1 + depth as u32 / DEPTH_STEP, 1),
            State::Proven => (0, INF),
            State::Failed => (INF, 0),
        };
        let proof = match out.zone {
            Some(zone) => {
                self.proofs.push(Proof {
                    zone,
                    edge: None,
                    chosen: NO_PROOF,
                });
                (self.proofs.len() - 1) as u32
            }
            None => NO_PROOF,
        };
        self.nodes.push(Node {
            mv,
            pn,
            dn,
            first: 0,
            len: 0,
            state: out.state,
            flags: out.flags,
            origin: out.origin,
            proof,
            depth,
        });
        (self.nodes.len() - 1) as u32
    }

    /// Static evaluation on node creation: terminal rules, transposition
    /// table, pattern table.
    fn evaluate(&mut self, pos: &BoardPosition, is_root: bool) -> Outcome {
        match pos.adjudicate() {
            GameStatus::WhiteWin => {
                let whole = closure(pos, pos.benson_alive(Color::White).life_zone);
                let zone = if self.opts.zone_choice == ZoneChoice::FirstProven && self.constraint.allows(whole) {
                    Some(whole)
                } else {
                    pos.life_candidates(Color::White)
                        .into_iter()
                        .map(|c| closure(pos, c))
                        .filter(|z| self.constraint.allows(*z))
                        .min_by_key(|z| (z.len(), z.bits()))
                };
                return match zone {
                    Some(z) => Outcome {
                        state: State::Proven,
                        flags: if pos.ko_ban().is_some() { KO } else { 0 },
                        origin: ProofOrigin::Terminal,
                        zone: Some(z),
                    },
                    None => Outcome::failed(false),
                };
            }
            GameStatus::BlackWin => return Outcome::failed(true),
            GameStatus::Ongoing => {}
        }
        if pos.to_move() == Color::Black && pos.pass_streak() > 0 {
            // Black ends the game by passing.
            return Outcome::failed(true);
        }
        if self.opts.use_tt {
            if let Some(entry) = self.tt.get(&tt_key(pos)) {
                self.stats.tt_hits += 1;
                return match *entry {
                    TtEntry::Proven { zone, ko } => Outcome {
                        state: State::Proven,
                        flags: if ko { KO } else { 0 },
                        origin: ProofOrigin::Transposition,
                        zone: Some(zone),
                    },
                    TtEntry::Failed => Outcome::failed(true),
                };
            }
        }
        if let Some(table) = self.table {
            if !is_root && pos.ko_ban().is_none() {
                if let Some(p) = table.best_match(pos, &self.constraint) {
                    let zone = closure(pos, p.zone());
                    if self.constraint.allows(zone) {
                        self.stats.table_hits += 1;
                        return Outcome {
                            state: State::Proven,
                            flags: 0,
                            origin: ProofOrigin::TableHit,
                            zone: Some(zone),
                        };
                    }
                }
            }
        }
        Outcome::open()
    }

    fn expand(&mut self, id: u32, pos: &BoardPosition) -> bool {
        if self.expansions >= self.budget {
            self.exhausted = true;
            return false;
        }
        self.expansions += 1;
        let (succ, superko_hit) = pos.successors();
        let first = self.nodes.len() as u32;
        let depth = self.nodes[id as usize].depth.saturating_add(1);
        let mut len = 0u16;
        for (mv, child) in ranked(pos, succ) {
            let out = self.evaluate(&child, false);
            self.push(mv, out, depth);
            len += 1;
        }
        let n = &mut self.nodes[id as usize];
        n.first = first;
        n.len = len;
        n.flags |= EXPANDED;
        if superko_hit {
            n.flags |= PATH_DEP;
        }
        true
    }

    fn children(&self, id: u32) -> std::ops::Range<u32> {
        let n = &self.nodes[id as usize];
        n.first..n.first + n.len as u32
    }

    /// Zone of the parent through proven child `c`, cached.
    fn edge(&mut self, pos: &BoardPosition, c: u32) -> Zone {
        let node = self.nodes[c as usize];
        let proof = &mut self.proofs[node.proof as usize];
        if let Some(e) = proof.edge {
            return e;
        }
        let e = match pos.to_move() {
            Color::White => or_propagate(pos, node.mv, proof.zone),
            Color::Black => refutation_zone(pos, node.mv, proof.zone),
        };
        proof.edge = Some(e);
        if self.checks_interior() && !self.constraint.allows(e) {
            self.nodes[c as usize].flags |= EDGE_BAD;
        }
        e
    }

    fn set_proven(&mut self, id: u32, zone: Zone, chosen: u32, flags: u8) {
        self.proofs.push(Proof {
            zone,
            edge: None,
            chosen,
        });
        let n = &mut self.nodes[id as usize];
        n.proof = (self.proofs.len() - 1) as u32;
        n.state = State::Proven;
        n.pn = 0;
        n.dn = INF;
        n.flags = (n.flags & (EXPANDED | PATH_DEP)) | flags;
    }

    fn set_failed(&mut self, id: u32, genuine: bool, path_dep: bool) {
        let n = &mut self.nodes[id as usize];
        n.state = State::Failed;
        n.pn = INF;
        n.dn = 0;
        n.flags &= EXPANDED;
        if genuine {
            n.flags |= GENUINE;
        }
        if path_dep {
            n.flags |= PATH_DEP;
        }
    }

    fn store_tt(&mut self, id: u32, pos: &BoardPosition) {
        if !self.opts.use_tt {
            return;
        }
        let n = self.nodes[id as usize];
        if n.flags & PATH_DEP != 0 {
            return;
        }
        let entry = match n.state {
            State::Proven => TtEntry::Proven {
                zone: self.proofs[n.proof as usize].zone,
                ko: n.flags & KO != 0,
            },
            State::Failed if n.flags & GENUINE != 0 => TtEntry::Failed,
            _ => return,
        };
        self.tt.insert(tt_key(pos), entry);
    }

    fn update(&mut self, id: u32, pos: &BoardPosition) {
        match pos.to_move() {
            Color::White => self.update_or(id, pos),
            Color::Black => self.update_and(id, pos),
        }
        if self.nodes[id as usize].state != State::Open {
            self.store_tt(id, pos);
        }
    }

    fn update_or(&mut self, id: u32, pos: &BoardPosition) {
        let own_ko = if pos.ko_ban().is_some() { KO } else { 0 };
        let own_dep = self.nodes[id as usize].flags & PATH_DEP != 0;
        let (mut pn, mut dn) = (INF, 0u64);
        let mut tainted = false;
        let mut any_dep = own_dep;
        let mut best: Option<(u32, Zone)> = None;
        for c in self.children(id) {
            let child = self.nodes[c as usize];
            match child.state {
                State::Proven => {
                    let e = self.edge(pos, c);
                    if self.nodes[c as usize].flags & EDGE_BAD != 0 {
                        tainted = true;
                    } else if best.map_or(true, |(_, z)| {
                        self.opts.zone_choice == ZoneChoice::Smallest && e.len() < z.len()
                    }) {
                        best = Some((c, e));
                    }
                }
                State::Failed => {
                    tainted |= child.flags & GENUINE == 0;
                    any_dep |= child.flags & PATH_DEP != 0;
                }
                State::Open => {
                    pn = pn.min(child.pn);
                    dn += child.dn as u64;
                }
            }
        }
        if let Some((c, zone)) = best {
            let cf = self.nodes[c as usize].flags;
            self.set_proven(id, zone, c, own_ko | (cf & (KO | PATH_DEP)));
            // The node's own superko exclusions only removed White options.
            if cf & PATH_DEP == 0 {
                self.nodes[id as usize].flags &= !PATH_DEP;
            }
        } else if pn == INF {
            self.set_failed(id, !tainted, any_dep);
        } else {
            let n = &mut self.nodes[id as usize];
            n.pn = pn;
            n.dn = dn.min(INF as u64 - 1) as u32;
        }
    }

    fn update_and(&mut self, id: u32, pos: &BoardPosition) {
        let kids = self.children(id);
        if let Some(c) = kids
            .clone()
            .filter(|&c| {
                let n = &self.nodes[c as usize];
                n.state == State::Failed && n.flags & GENUINE != 0
            })
            .min_by_key(|&c| self.nodes[c as usize].flags & PATH_DEP)
        {
            let dep = self.nodes[c as usize].flags & PATH_DEP != 0;
            self.set_failed(id, true, dep);
            return;
        }
        let (zone, required_mask) = self.and_required(id, pos);
        let own_dep = self.nodes[id as usize].flags & PATH_DEP != 0;
        if self.checks_interior() && !self.constraint.allows(zone) {
            self.set_failed(id, false, own_dep);
            return;
        }
        let (mut pn, mut dn) = (0u64, INF);
        let mut failed = false;
        let mut flags = if pos.ko_ban().is_some() { KO } else { 0 };
        for c in kids {
            let n = self.nodes[c as usize];
            if !is_required(n.mv, required_mask) {
                // May become required once the zone grows.
                if n.state == State::Open {
                    pn += n.pn as u64;
                }
                continue;
            }
            match n.state {
                State::Open => {
                    pn += n.pn as u64;
                    dn = dn.min(n.dn);
                }
                State::Failed => failed = true,
                State::Proven => {
                    failed |= n.flags & EDGE_BAD != 0;
                    flags |= n.flags & (KO | PATH_DEP);
                }
            }
        }
        if failed {
            self.set_failed(id, false, own_dep);
        } else if dn == INF {
            self.set_proven(id, zone, NO_PROOF, flags);
        } else {
            let n = &mut self.nodes[id as usize];
            n.pn = pn.min(INF as u64 - 1) as u32;
            n.dn = dn;
        }
    }

    /// Fixed point of an AND node's zone over proven required children.
    /// Returns the zone and the mask of required Black points.
    fn and_required(&mut self, id: u32, pos: &BoardPosition) -> (Zone, u128) {
        let kids = self.children(id);
        let mut legal = 0u128;
        for c in kids.clone() {
            if let Move::Play(p) = self.nodes[c as usize].mv {
                legal |= 1 << p.index();
            }
        }
        let suicide = pos.suicide_points(Color::Black).bits();
        let mut union = Zone::EMPTY;
        let mut counted: HashSet<u32> = HashSet::new();
        let mut required_mask = 0u128;
        loop {
            for c in kids.clone() {
                let n = self.nodes[c as usize];
                if is_required(n.mv, required_mask) && n.state == State::Proven && counted.insert(c) {
                    union = union | self.edge(pos, c);
                }
            }
            let (z, req) = and_zone(pos, legal, suicide, union);
            if req == required_mask {
                return (z, req);
            }
            required_mask = req;
        }
    }

    fn mid(&mut self, id: u32, pos: &BoardPosition, th_pn: u32, th_dn: u32) {
        if self.nodes[id as usize].flags & EXPANDED == 0 && !self.expand(id, pos) {
            return;
        }
        loop {
            self.update(id, pos);
            let n = self.nodes[id as usize];
            if n.state != State::Open || n.pn >= th_pn || n.dn >= th_dn || self.exhausted {
                return;
            }
            let (child, c_pn, c_dn) = match pos.to_move() {
                Color::White => {
                    let mut best: Option<u32> = None;
                    let mut second = INF;
                    for c in self.children(id) {
                        let cn = &self.nodes[c as usize];
                        if cn.state != State::Open {
                            continue;
                        }
                        match best {
                            Some(b) if cn.pn >= self.nodes[b as usize].pn => {
                                second = second.min(cn.pn);
                            }
                            Some(b) => {
                                second = second.min(self.nodes[b as usize].pn);
                                best = Some(c);
                            }
                            None => best = Some(c),
                        }
                    }
                    let b = best.expect("open OR node has an open child");
                    let cn = self.nodes[b as usize];
                    let t_pn = th_pn.min(second.saturating_add(1));
                    let t_dn = (th_dn as u64 - n.dn as u64 + cn.dn as u64).min(INF as u64) as u32;
                    (b, t_pn, t_dn)
                }
                Color::Black => {
                    let (_, required_mask) = self.and_required(id, pos);
                    let mut best: Option<u32> = None;
                    let mut second = INF;
                    for c in self.children(id) {
                        let cn = &self.nodes[c as usize];
                        if cn.state != State::Open || !is_required(cn.mv, required_mask) {
                            continue;
                        }
                        match best {
                            Some(b) if cn.dn >= self.nodes[b as usize].dn => {
                                second = second.min(cn.dn);
                            }
                            Some(b) => {
                                second = second.min(self.nodes[b as usize].dn);
                                best = Some(c);
                            }
                            None => best = Some(c),
                        }
                    }
                    let b = best.expect("open AND node has an open required child");
                    let cn = self.nodes[b as usize];
                    let t_dn = th_dn.min(second.saturating_add(1));
                    let t_pn = (th_pn as u64 - n.pn as u64 + cn.pn as u64).min(INF as u64) as u32;
                    (b, t_pn, t_dn)
                }
            };
            let mv = self.nodes[child as usize].mv;
            let child_pos = pos.play(mv).expect("stored moves stay legal");
            self.mid(child, &child_pos, c_pn, c_dn);
        }
    }

    fn extract(&self, id: u32, pos: &BoardPosition, mv: Option<Move>, tree: &mut SolutionTree) -> usize {
        let n = self.nodes[id as usize];
        let proof = self.proofs[n.proof as usize];
        let at = tree.nodes.len();
        let expanded = n.flags & EXPANDED != 0 && n.origin == ProofOrigin::Expanded;
        tree.nodes.push(TreeNode {
            digest: pos.digest(),
            kind: match pos.to_move() {
                Color::White => NodeKind::Or,
                Color::Black => NodeKind::And,
            },
            mv,
            zone: proof.zone,
            origin: n.origin,
            children: Vec::new(),
        });
        if !expanded {
            return at;
        }
        let picks: Vec<u32> = match pos.to_move() {
            Color::White => vec![proof.chosen],
            Color::Black => self
                .children(id)
                .filter(|&c| match self.nodes[c as usize].mv {
                    Move::Pass => true,
                    Move::Play(p) => proof.zone.contains(p),
                })
                .collect(),
        };
        for c in picks {
            let cm = self.nodes[c as usize].mv;
            let child_pos = pos.play(cm).expect("stored moves stay legal");
            let k = self.extract(c, &child_pos, Some(cm), tree);
            tree.nodes[at].children.push(k);
        }
        at
    }

    fn collect(
        &self,
        id: u32,
        pos: &BoardPosition,
        out: &mut Vec<RZPattern>,
        seen: &mut HashSet<(u128, u128, u128, Color)>,
    ) {
        let n = self.nodes[id as usize];
        if n.state == State::Proven
            && n.flags & (KO | PATH_DEP) == 0
            && matches!(n.origin, ProofOrigin::Expanded | ProofOrigin::Terminal)
            && pos.ko_ban().is_none()
            && !(pos.to_move() == Color::Black && pos.pass_streak() > 0)
        {
            let zone = self.proofs[n.proof as usize].zone;
            if let Ok(p) = pattern_of(pos, zone, true) {
                let (b, w) = p.stone_masks();
                if seen.insert((zone.bits(), b, w, p.to_move())) {
                    out.push(p);
                }
            }
        }
        if n.flags & EXPANDED == 0 {
            return;
        }
        for c in self.children(id) {
            let child = self.nodes[c as usize];
            if child.flags & EXPANDED == 0 && child.state != State::Proven {
                continue;
            }
            let child_pos = pos.play(child.mv).expect("stored moves stay legal");
            self.collect(c, &child_pos, out, seen);
        }
    }
}

fn is_required(mv: Move, required_mask: u128) -> bool {
    match mv {
        Move::Pass => true,
        Move::Play(p) => required_mask >> p.index() & 1 == 1,
    }
}
