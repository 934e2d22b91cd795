//! Marching squares on a lattice inset into the domain's bounding box.

use std::collections::HashMap;

use super::Domain;
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    // (i, j) -> (i + 1, j)
    H(usize, usize),
    // (i, j) -> (i, j + 1)
    V(usize, usize),
}

/// Polylines approximating `{x in domain : f(x) = level}`.
///
/// Vertices are located by bisection along lattice edges, so each one sits on
/// the level set to near machine precision. Cells with a node outside the
/// domain are skipped.
pub(crate) fn level_pieces(
    domain: &Domain,
    f: &dyn Fn(Point2) -> f64,
    level: f64,
    res: usize,
) -> Vec<Vec<Point2>> {
    let res = res.max(4);
    let (lo, hi) = domain.bounding_box();
    let node = |i: usize, j: usize| {
        Point2::new(
            lo.x1 + (i as f64 + 0.5) * (hi.x1 - lo.x1) / res as f64,
            lo.x2 + (j as f64 + 0.5) * (hi.x2 - lo.x2) / res as f64,
        )
    };
    let mut g = vec![f64::NAN; res * res];
    for j in 0..res {
        for i in 0..res {
            let x = node(i, j);
            if domain.contains(x) {
                g[j * res + i] = f(x) - level;
            }
        }
    }
    let val = |i: usize, j: usize| g[j * res + i];

    let mut adj: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for j in 0..res - 1 {
        for i in 0..res - 1 {
            let v = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            if v.iter().any(|x| x.is_nan()) {
                continue;
            }
            let below = v.map(|x| x < 0.0);
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            // edge k joins corners k and k + 1 (mod 4)
            let cut: Vec<usize> = (0..4).filter(|&k| below[k] != below[(k + 1) % 4]).collect();
            match cut.len() {
                2 => link(edges[cut[0]], edges[cut[1]]),
                4 => {
                    let center = f(node(i, j).lerp(node(i + 1, j + 1), 0.5)) - level;
                    if (center < 0.0) == below[0] {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let point_on = |e: Edge| -> Point2 {
        let (a, b) = match e {
            Edge::H(i, j) => (node(i, j), node(i + 1, j)),
            Edge::V(i, j) => (node(i, j), node(i, j + 1)),
        };
        bisect_edge(f, level, a, b)
    };

    // Walk open chains from their ends first, then the remaining cycles.
    let mut keys: Vec<Edge> = adj.keys().copied().collect();
    keys.sort_by_key(|e| match *e {
        Edge::H(i, j) => (0, j, i),
        Edge::V(i, j) => (1, j, i),
    });
    let mut starts: Vec<Edge> = keys.iter().copied().filter(|e| adj[e].len() == 1).collect();
    starts.extend(keys.iter().copied().filter(|e| adj[e].len() != 1));
    let mut visited: HashMap<Edge, bool> = HashMap::new();
    let mut pieces = Vec::new();
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|e| !visited.contains_key(e));
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => {
                    // close a cycle back to its start
                    if chain.len() > 2 && adj[&cur].contains(&start) {
                        chain.push(start);
                    }
                    break;
                }
            }
        }
        pieces.push(chain.into_iter().map(point_on).collect());
    }
    pieces
}

fn bisect_edge(f: &dyn Fn(Point2) -> f64, level: f64, a: Point2, b: Point2) -> Point2 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let below_a = f(a) - level < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (f(a.lerp(b, mid)) - level < 0.0) == below_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a.lerp(b, 0.5 * (lo + hi))
}
