//! Open-path TSP over a symmetric distance matrix with a fixed start.
//!
//! Nearest-neighbor construction, then first-improvement 2-opt scanning
//! (i, j) lexicographically. Instances up to [`EXACT_TSP_LIMIT`] nodes are
//! additionally solved exactly by dynamic programming over subsets.

/// Largest node count solved exactly.
pub const EXACT_TSP_LIMIT: usize = 12;

const IMPROVEMENT_EPS: f64 = 1e-12;

pub fn path_length(dist: &[Vec<f64>], order: &[usize]) -> f64 {
    order.windows(2).fold(0.0, |acc, w| acc + dist[w[0]][w[1]])
}

/// Nearest unvisited node at each step; ties go to the lower index.
pub fn nearest_neighbor(dist: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = dist.len();
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut at = start;
    used[at] = true;
    order.push(at);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| dist[at][a].total_cmp(&dist[at][b]).then(a.cmp(&b)))
            .expect("unvisited node remains");
        used[next] = true;
        order.push(next);
        at = next;
    }
    order
}

/// Reverse `order[i+1..=j]` whenever that shortens the open path, restarting
/// the scan after each accepted move. `order[0]` never moves.
pub fn two_opt(dist: &[Vec<f64>], order: &mut [usize]) {
    let n = order.len();
    'scan: loop {
        for i in 0..n.saturating_sub(2) {
            for j in i + 2..n {
                let (a, b, c) = (order[i], order[i + 1], order[j]);
                let mut delta = dist[a][c] - dist[a][b];
                if j + 1 < n {
                    let d = order[j + 1];
                    delta += dist[b][d] - dist[c][d];
                }
                if delta < -IMPROVEMENT_EPS {
                    order[i + 1..=j].reverse();
                    continue 'scan;
                }
            }
        }
        break;
    }
}

/// Shortest open path from `start` through every node.
pub fn exact_open_path(dist: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = dist.len();
    assert!(n <= 20, "subset DP is exponential");
    if n <= 2 {
        let mut order = vec![start];
        order.extend((0..n).filter(|&j| j != start));
        return order;
    }
    let full = 1usize << n;
    let mut best = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    best[(1 << start) * n + start] = 0.0;
    for set in 0..full {
        if set & (1 << start) == 0 {
            continue;
        }
        for last in 0..n {
            let here = best[set * n + last];
            if !here.is_finite() {
                continue;
            }
            for (next, &step) in dist[last].iter().enumerate() {
                if set & (1 << next) != 0 {
                    continue;
                }
                let key = (set | 1 << next) * n + next;
                let cand = here + step;
                if cand < best[key] {
                    best[key] = cand;
                    parent[key] = last;
                }
            }
        }
    }
    let done = full - 1;
    let mut last = (0..n)
        .min_by(|&a, &b| {
            best[done * n + a]
                .total_cmp(&best[done * n + b])
                .then(a.cmp(&b))
        })
        .expect("non-empty");
    let mut set = done;
    let mut order = Vec::with_capacity(n);
    while last != usize::MAX {
        order.push(last);
        let p = parent[set * n + last];
        set &= !(1 << last);
        last = p;
    }
    order.reverse();
    order
}

/// Visiting order starting at `start`.
pub fn solve(dist: &[Vec<f64>], start: usize) -> Vec<usize> {
    if dist.is_empty() {
        return Vec::new();
    }
    let mut order = nearest_neighbor(dist, start);
    two_opt(dist, &mut order);
    if dist.len() <= EXACT_TSP_LIMIT {
        let exact = exact_open_path(dist, start);
        if path_length(dist, &exact) < path_length(dist, &order) - IMPROVEMENT_EPS {
            order = exact;
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| (a.0 - b.0).hypot(a.1 - b.1))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn collinear_points() {
        let d = matrix(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0)]);
        assert_eq!(solve(&d, 0), vec![0, 2, 1]);
        assert_eq!(path_length(&d, &solve(&d, 0)), 2.0);
    }

    #[test]
    fn single_node() {
        let d = matrix(&[(3.0, 4.0)]);
        assert_eq!(solve(&d, 0), vec![0]);
        assert_eq!(path_length(&d, &[0]), 0.0);
    }

    #[test]
    fn two_opt_untangles_crossing() {
        let d = matrix(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        let mut order = vec![0, 1, 2, 3];
        let before = path_length(&d, &order);
        two_opt(&d, &mut order);
        assert!(path_length(&d, &order) < before);
        assert_eq!(order[0], 0);
        assert_eq!(path_length(&d, &order), 3.0);
    }

    #[test]
    fn exact_matches_heuristic_on_easy_case() {
        let d = matrix(&[(0.0, 0.0), (5.0, 0.0), (1.0, 0.0), (3.0, 0.0)]);
        assert_eq!(exact_open_path(&d, 0), vec![0, 2, 3, 1]);
        assert_eq!(exact_open_path(&d, 1), vec![1, 3, 2, 0]);
    }
}
