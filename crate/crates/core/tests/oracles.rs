mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scanplan::gridmap::{distance_field, inflate, CellClass, CellIndex, OccupancyGrid};
use scanplan::pathplan::astar;
use scanplan::visibility::{contour, is_visible, visible_set, VisibilityContext};

fn mixed_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> OccupancyGrid {
    let mut g = random_grid(rng, w, h, 0.1, density);
    for _ in 0..(w * h / 40) {
        let c = CellIndex::new(rng.gen_range(0..h), rng.gen_range(0..w));
        g.set(c, CellClass::Unknown);
    }
    g
}

fn sorted(mut v: Vec<CellIndex>) -> Vec<CellIndex> {
    v.sort();
    v
}

#[test]
fn both_visibility_backends_match_brute_force() {
    let mut rng = rng(11);
    for inst in 0..30 {
        let (w, h) = (rng.gen_range(10..=24), rng.gen_range(10..=24));
        let density = rng.gen_range(0.05..0.3);
        let grid = mixed_grid(&mut rng, w, h, density);
        let r = [0.4, 0.7, 1.2][inst % 3];
        let shadow = VisibilityContext::with_shadows(&grid, r);
        let trie = VisibilityContext::with_trie(&grid, r);
        let mut free = free_cells(&grid);
        free.shuffle(&mut rng);
        for &src in free.iter().take(12) {
            let expect = brute_visible_set(&grid, src, r);
            assert_eq!(
                sorted(shadow.visible_cells(src)),
                expect,
                "shadow table, instance {inst}, source {src:?}"
            );
            assert_eq!(
                sorted(trie.visible_cells(src)),
                expect,
                "ray trie, instance {inst}, source {src:?}"
            );
        }
    }
}

#[test]
fn pairwise_visibility_matches_brute_force() {
    let mut rng = rng(12);
    for _ in 0..40 {
        let grid = mixed_grid(&mut rng, 20, 16, 0.2);
        let free = free_cells(&grid);
        if free.len() < 2 {
            continue;
        }
        for _ in 0..40 {
            let a = *free.choose(&mut rng).unwrap();
            let b = *free.choose(&mut rng).unwrap();
            let r = rng.gen_range(0.2..2.0);
            assert_eq!(
                is_visible(&grid, a, b, r).unwrap(),
                brute_visible(&grid, a, b, r),
                "{a:?} {b:?} r {r}"
            );
            assert_eq!(
                is_visible(&grid, a, b, r).unwrap(),
                is_visible(&grid, b, a, r).unwrap()
            );
        }
    }
}

#[test]
fn inflation_matches_pairwise_distance_check() {
    let mut rng = rng(13);
    for _ in 0..25 {
        let (w, h) = (rng.gen_range(5..=25), rng.gen_range(5..=25));
        let grid = mixed_grid(&mut rng, w, h, 0.08);
        for radius in [0.0, 0.1, 0.15, 0.3, 0.45] {
            assert_eq!(
                inflate(&grid, radius).unwrap(),
                brute_inflate(&grid, radius),
                "radius {radius}"
            );
        }
    }
}

#[test]
fn distance_field_matches_nearest_blocking_center() {
    let mut rng = rng(14);
    for _ in 0..25 {
        let (w, h) = (rng.gen_range(3..=25), rng.gen_range(3..=25));
        let grid = mixed_grid(&mut rng, w, h, 0.05);
        let field = distance_field(&grid);
        let blocked: Vec<CellIndex> = (0..grid.len())
            .map(|i| grid.cell_at(i))
            .filter(|&c| !grid.is_free(c))
            .collect();
        assert_eq!(field.has_obstacles(), !blocked.is_empty());
        for i in 0..grid.len() {
            let c = grid.cell_at(i);
            let best = blocked.iter().map(|&b| c.dist2(b)).min();
            match best {
                Some(d2) => {
                    assert_eq!(field.squared_cells(c), d2 as u64);
                    assert!((field.at(c) - (d2 as f64).sqrt() * 0.1).abs() < EPS);
                }
                None => assert!(field.at(c).is_infinite()),
            }
        }
    }
}

#[test]
fn contour_is_the_four_neighbor_boundary_of_the_set() {
    let mut rng = rng(15);
    for _ in 0..30 {
        let grid = mixed_grid(&mut rng, 22, 18, 0.15);
        let free = free_cells(&grid);
        let Some(&src) = free.choose(&mut rng) else {
            continue;
        };
        let set = visible_set(&grid, src, 0.9).unwrap();
        let members = sorted(set.iter().collect());
        let inside = |r: i64, c: i64| {
            r >= 0
                && c >= 0
                && members
                    .binary_search(&CellIndex::new(r as usize, c as usize))
                    .is_ok()
        };
        let expect: Vec<CellIndex> = members
            .iter()
            .copied()
            .filter(|m| {
                let (r, c) = (m.row as i64, m.col as i64);
                [(0, 1), (1, 0), (0, -1), (-1, 0)]
                    .iter()
                    .any(|(dr, dc)| !inside(r + dr, c + dc))
            })
            .collect();
        let got = contour(&grid, &set).unwrap();
        assert_eq!(got.len(), expect.len(), "contour has no duplicates");
        assert_eq!(sorted(got), expect);
    }
}

#[test]
fn astar_paths_are_legal_and_shortest() {
    let mut rng = rng(16);
    for _ in 0..60 {
        let (w, h) = (rng.gen_range(4..=24), rng.gen_range(4..=24));
        let grid = random_grid(&mut rng, w, h, 0.05, 0.3);
        let free = free_cells(&grid);
        if free.is_empty() {
            continue;
        }
        for _ in 0..4 {
            let a = *free.choose(&mut rng).unwrap();
            let b = *free.choose(&mut rng).unwrap();
            let got = astar(&grid, a, b).unwrap();
            let want = dijkstra_steps(&grid, a, b);
            assert_eq!(got.is_some(), want.is_some());
            let (Some(p), Some((o, d))) = (got, want) else {
                continue;
            };
            assert_eq!((p.cells.first(), p.cells.last()), (Some(&a), Some(&b)));
            for s in p.cells.windows(2) {
                let (dr, dc) = (
                    s[1].row as i64 - s[0].row as i64,
                    s[1].col as i64 - s[0].col as i64,
                );
                assert!(dr.abs() <= 1 && dc.abs() <= 1 && (dr, dc) != (0, 0));
                assert!(grid.is_free(s[1]));
                if dr != 0 && dc != 0 {
                    let side_a = grid.is_free(CellIndex::new(s[1].row, s[0].col));
                    let side_b = grid.is_free(CellIndex::new(s[0].row, s[1].col));
                    assert!(
                        side_a || side_b,
                        "diagonal squeezes between two blocked cells"
                    );
                }
            }
            let oracle = 0.05 * (o as f64 + d as f64 * std::f64::consts::SQRT_2);
            assert!((p.length - oracle).abs() < EPS);
        }
    }
}

fn subset_cover(universe: usize, sets: &[Vec<usize>]) -> usize {
    (0u32..1 << sets.len())
        .filter(|mask| {
            let mut hit = vec![false; universe];
            for (k, s) in sets.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    s.iter().for_each(|&e| hit[e] = true);
                }
            }
            hit.iter().all(|&h| h)
        })
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

#[test]
fn exact_set_cover_agrees_with_subset_enumeration() {
    // Largest-first picks the eight-element set, then four, then two: three sets.
    let trap = vec![
        (0..7).collect(),
        (7..14).collect(),
        vec![0, 7],
        vec![1, 2, 8, 9],
        vec![3, 4, 5, 6, 10, 11, 12, 13],
    ];
    assert_eq!(exact_set_cover(14, &trap), 2);

    let mut rng = rng(17);
    for _ in 0..200 {
        let universe = rng.gen_range(1..=14);
        let count = rng.gen_range(1..=12);
        let mut sets: Vec<Vec<usize>> = (0..count)
            .map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).collect())
            .collect();
        // Singletons keep every instance coverable.
        sets.extend((0..universe).filter(|_| rng.gen_bool(0.5)).map(|e| vec![e]));
        let mut hit = vec![false; universe];
        sets.iter().flatten().for_each(|&e| hit[e] = true);
        sets.extend(
            hit.iter()
                .enumerate()
                .filter(|(_, &h)| !h)
                .map(|(e, _)| vec![e]),
        );
        if sets.len() > 20 {
            continue;
        }
        assert_eq!(
            exact_set_cover(universe, &sets),
            subset_cover(universe, &sets),
            "{sets:?}"
        );
    }
}
