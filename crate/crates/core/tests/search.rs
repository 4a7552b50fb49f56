mod common;

use common::*;
use rzr::game::{BoardPosition, Color, Move, PointSet};
use rzr::search::*;
use rzr::table::RZTable;
use rzr::zone::closure;

fn check_tree(root: &BoardPosition, r: &SolveResult, constraint: &Constraint) {
    let tree = r.extract_tree().expect("proven");
    assert_eq!(tree.root().zone, r.zone.unwrap());
    let mut stack = vec![(0usize, root.clone())];
    while let Some((i, pos)) = stack.pop() {
        let node = &tree.nodes[i];
        assert_eq!(node.digest, pos.digest());
        assert_eq!(closure(&pos, node.zone), node.zone, "zone not closed");
        assert!(constraint.allows(node.zone), "node zone touches the forbidden region");
        let kind = if pos.to_move() == Color::White { NodeKind::Or } else { NodeKind::And };
        assert_eq!(node.kind, kind);
        let kids: Vec<(Move, usize)> = node.children.iter().map(|&c| (tree.nodes[c].mv.unwrap(), c)).collect();
        match node.kind {
            NodeKind::Or => assert!(kids.len() <= 1),
            NodeKind::And if !node.children.is_empty() => {
                let mut want: Vec<Move> = pos
                    .legal_moves()
                    .into_iter()
                    .filter(|m| m.point().map_or(true, |p| node.zone.contains(p)))
                    .collect();
                want.sort();
                let mut got: Vec<Move> = kids.iter().map(|(m, _)| *m).collect();
                got.sort();
                assert_eq!(got, want, "AND children differ from in-zone legal moves");
            }
            NodeKind::And => {}
        }
        for (m, c) in kids {
            let child = pos.play(m).unwrap();
            assert!(tree.nodes[c].zone.is_subset(node.zone), "child zone escapes its parent");
            stack.push((c, child));
        }
    }
}

#[test]
fn benson_alive_root_is_a_single_node() {
    let pos = from_rows(&[".O.OX", "OOOOX", "XXXXX", ".....", "....."], Color::Black);
    let r = solve(&pos, &Constraint::none(), Budget::new(1000), None);
    assert_eq!(r.status, SolveStatus::Proven);
    let life = pos.benson_alive(Color::White).life_zone;
    assert_eq!(r.zone, Some(closure(&pos, life)));
    assert_eq!(r.extract_tree().unwrap().nodes.len(), 1);
    assert!(r.expansions_used <= 1);
}

#[test]
fn zero_budget_and_full_board_constraint_give_unknown() {
    let pos = from_rows(&[".....", "OOOOO", "XXXXX", ".....", "....."], Color::Black);
    assert_eq!(solve(&pos, &Constraint::none(), Budget::new(0), None).status, SolveStatus::Unknown);
    let all = Constraint::new(PointSet::full(5));
    let r = solve(&pos, &all, Budget::new(10_000), None);
    assert_eq!(r.status, SolveStatus::Unknown);
    assert!(r.zone.is_none() && r.tree.is_none());
}

#[test]
fn corner_life_agrees_with_oracle_and_tree_is_valid() {
    for (rows, to_move) in [
        (["...OX", "...OX", "OOOOX", "XXXXX", "XX.X."], Color::White),
        (["..OXX", "...OX", "OOOOX", "XXXXX", "XX.X."], Color::White),
        (["....O", "OOOOO", "XXXXX", "XXXXX", "XX.X."], Color::Black),
        (["...OX", "...OX", "OOOOX", "XXXXX", "....."], Color::White),
    ] {
        let pos = from_rows(&rows, to_move);
        assert_eq!(oracle(&pos, 2_000_000), Some(true));
        let r = solve(&pos, &Constraint::none(), Budget::new(200_000), None);
        assert_eq!(r.status, SolveStatus::Proven, "{pos}");
        check_tree(&pos, &r, &Constraint::none());
    }
}

#[test]
fn constrained_proofs_respect_the_constraint_everywhere() {
    let pos = from_rows(&[".....", "OOOOO", "XXXXX", ".....", "....."], Color::White);
    let r = solve(&pos, &Constraint::none(), Budget::new(50_000), None);
    let zone = r.zone.unwrap();
    for p in zone.iter() {
        let mut forbidden = zone.complement(5);
        forbidden.insert(p);
        let c = Constraint::new(forbidden);
        let r2 = solve(&pos, &c, Budget::new(20_000), None);
        if r2.status == SolveStatus::Proven {
            assert!(r2.zone.unwrap().len() < zone.len());
            check_tree(&pos, &r2, &c);
        }
    }
}

#[test]
fn table_hits_shortcut_search_and_agree() {
    let pos = from_rows(&[".....", "OOOOO", "XXXXX", ".....", "....."], Color::Black);
    let first = solve(&pos, &Constraint::none(), Budget::new(50_000), None);
    assert_eq!(first.status, SolveStatus::Proven);
    let mut table = RZTable::new(5);
    for p in &first.patterns {
        table.insert(p.clone()).unwrap();
    }
    assert!(!table.is_empty());
    let shifted = from_rows(&[".....", "OOOOO", "XXXXX", "..X..", "....."], Color::Black);
    let with = solve(&shifted, &Constraint::none(), Budget::new(50_000), Some(&table));
    let without = solve(&shifted, &Constraint::none(), Budget::new(50_000), None);
    assert_eq!(with.status, without.status);
    assert!(with.expansions_used <= without.expansions_used);
}

#[test]
fn leaf_only_enforcement_still_returns_compliant_roots() {
    let pos = from_rows(&[".....", "OOOOO", "XXXXX", ".....", "....."], Color::White);
    let opts = SolveOptions { enforcement: Enforcement::LeafOnly, ..SolveOptions::default() };
    let c = Constraint::new(PointSet::single(pt(4, 4, 5)));
    let r = solve_with(&pos, &c, Budget::new(50_000), None, &opts);
    if let Some(z) = r.zone {
        assert!(c.allows(z));
    }
}
