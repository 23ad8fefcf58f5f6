//! Independent oracles used by the integration tests. Nothing here calls the
//! library's solvers.
#![allow(dead_code)]

use rand::Rng;
use rrn_core::gw::FamilyTree;

/// Two-terminal resistance by contracting zero edges, keeping the conducting
/// component of the source, and Gaussian elimination on the Dirichlet system.
pub fn oracle_resistance(
    n: usize,
    edges: &[(usize, usize, f64)],
    a0: &[usize],
    a1: &[usize],
) -> f64 {
    let mut class: Vec<usize> = (0..n).collect();
    let relabel = |class: &mut Vec<usize>, from: usize, to: usize| {
        if from != to {
            for c in class.iter_mut() {
                if *c == from {
                    *c = to;
                }
            }
        }
    };
    for w in a0.windows(2) {
        let (x, y) = (class[w[0]], class[w[1]]);
        relabel(&mut class, x, y);
    }
    for w in a1.windows(2) {
        let (x, y) = (class[w[0]], class[w[1]]);
        relabel(&mut class, x, y);
    }
    for &(u, v, r) in edges {
        if r == 0.0 {
            let (x, y) = (class[u], class[v]);
            relabel(&mut class, x, y);
        }
    }
    let (s, t) = (class[a0[0]], class[a1[0]]);
    if s == t {
        return 0.0;
    }
    let conducting: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter(|e| e.2.is_finite() && e.2 > 0.0 && class[e.0] != class[e.1])
        .map(|&(u, v, r)| (class[u], class[v], 1.0 / r))
        .collect();

    // component of the source
    let mut reached = vec![false; n];
    reached[s] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v, _) in &conducting {
            if reached[u] != reached[v] {
                reached[u] = true;
                reached[v] = true;
                changed = true;
            }
        }
    }
    if !reached[t] {
        return f64::INFINITY;
    }
    let unknowns: Vec<usize> = (0..n)
        .filter(|&c| reached[c] && c != s && c != t && class.contains(&c))
        .collect();
    let m = unknowns.len();
    let pos = |c: usize| unknowns.iter().position(|&u| u == c);
    let mut a = vec![vec![0.0; m + 1]; m];
    for &(u, v, g) in &conducting {
        for (x, y) in [(u, v), (v, u)] {
            if let Some(i) = pos(x) {
                a[i][i] += g;
                match pos(y) {
                    Some(j) => a[i][j] -= g,
                    None if y == t => a[i][m] += g,
                    None => {}
                }
            }
        }
    }
    let potentials = gaussian_elimination(a);
    let potential = |c: usize| {
        if c == s {
            0.0
        } else if c == t {
            1.0
        } else {
            potentials[pos(c).unwrap()]
        }
    };
    let current: f64 = conducting
        .iter()
        .filter_map(|&(u, v, g)| {
            if u == s {
                Some(g * potential(v))
            } else if v == s {
                Some(g * potential(u))
            } else {
                None
            }
        })
        .sum();
    1.0 / current
}

/// Solves the augmented system `[A | b]` with partial pivoting.
pub fn gaussian_elimination(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            if factor != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let tail: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][m] - tail) / a[row][row];
    }
    x
}

/// Unit-resistor complete graph on `m` vertices between vertices 0 and 1.
pub fn complete_graph(m: usize) -> Vec<(usize, usize, f64)> {
    (0..m)
        .flat_map(|u| (u + 1..m).map(move |v| (u, v, 1.0)))
        .collect()
}

/// Root of `q = exp(-gamma (1 - q))` below 1, by bisection.
pub fn extinction_by_bisection(gamma: f64) -> f64 {
    if gamma <= 1.0 {
        return 1.0;
    }
    let f = |q: f64| q - (-gamma * (1.0 - q)).exp();
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Resistance between root and generation `depth`, by the series/parallel
/// recursion written out directly on child counts.
pub fn oracle_tree_resistance(counts: &[usize], resistances: &[f64], depth: usize) -> f64 {
    let mut first_child = vec![0; counts.len()];
    let mut next = 1;
    for (v, &c) in counts.iter().enumerate() {
        first_child[v] = next;
        next += c;
    }
    fn go(v: usize, left: usize, counts: &[usize], first: &[usize], r: &[f64]) -> f64 {
        if left == 0 {
            return 0.0;
        }
        let conductance: f64 = (first[v]..first[v] + counts[v])
            .map(|c| {
                let below = r[c] + go(c, left - 1, counts, first, r);
                if below == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / below
                }
            })
            .sum();
        1.0 / conductance
    }
    go(0, depth, counts, &first_child, resistances)
}

/// A random finite tree of depth at most `max_depth`, as breadth-first child
/// counts and per-node edge resistances.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    max_depth: usize,
    mut resistance: impl FnMut(&mut R) -> f64,
) -> (Vec<usize>, Vec<f64>) {
    let mut counts = Vec::new();
    let mut resistances = vec![0.0];
    let mut generation = 1usize;
    for depth in 0..=max_depth {
        let mut next = 0;
        for _ in 0..generation {
            let c = if depth == max_depth {
                0
            } else {
                rng.random_range(0..=3)
            };
            counts.push(c);
            next += c;
        }
        for _ in 0..next {
            resistances.push(resistance(rng));
        }
        generation = next;
        if generation == 0 {
            break;
        }
    }
    (counts, resistances)
}

pub fn build_tree(counts: &[usize], resistances: &[f64]) -> FamilyTree {
    FamilyTree::from_child_counts(counts, resistances).expect("valid tree")
}

/// A random network with resistances drawn from {0, ∞, (0.1, 5)}.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, edges: usize) -> Vec<(usize, usize, f64)> {
    (0..edges)
        .map(|_| {
            let u = rng.random_range(0..n);
            let v = (u + rng.random_range(1..n)) % n;
            let r = match rng.random_range(0..10) {
                0 => 0.0,
                1 => f64::INFINITY,
                _ => rng.random_range(0.1..5.0),
            };
            (u, v, r)
        })
        .collect()
}

/// Prints the verdict line for an acceptance criterion and returns `ok`.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) -> bool {
    println!(
        "criterion {id:>2} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}
