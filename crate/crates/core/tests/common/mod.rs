//! Reference computations for the integration tests. Everything here works
//! from raw edge lists and brute force, without the crate's search or
//! bookkeeping code.

#![allow(dead_code)]

use rog_core::instances::{paper_lower_bound_instance, random_instance, Instance};
use rog_core::rational::Rational;

pub fn edges(instance: &Instance, player: usize) -> Vec<(usize, usize)> {
    instance
        .valuation(player)
        .as_vertex_cover()
        .expect("vertex cover player")
        .graph()
        .edges()
        .to_vec()
}

/// Edges with an endpoint in `set` (indexed by item, slot 0 unused).
pub fn covered(edges: &[(usize, usize)], set: &[bool]) -> u64 {
    edges.iter().filter(|&&(a, b)| set[a] || set[b]).count() as u64
}

/// Best welfare over all `n^m` owner vectors.
pub fn naive_opt(instance: &Instance) -> u64 {
    let n = instance.player_count();
    let m = instance.item_count();
    let graphs: Vec<_> = (0..n).map(|i| edges(instance, i)).collect();
    let mut best = 0;
    for code in 0..n.pow(m as u32) {
        let mut sets = vec![vec![false; m + 1]; n];
        let mut c = code;
        for j in 1..=m {
            sets[c % n][j] = true;
            c /= n;
        }
        let w = (0..n).map(|i| covered(&graphs[i], &sets[i])).sum();
        best = best.max(w);
    }
    best
}

/// Every ordering of `1..=m`.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (1..=m).collect(), &mut out);
    out
}

/// Closed forms for the star-plus-matchings family: the star player expects
/// `m - 1`, the first matching player `(m - 1)/3`, the second `17(m - 3)/120`.
pub fn lower_bound_closed_form(m: usize) -> [Rational; 3] {
    let m = m as i128;
    [
        Rational::from_int(m - 1),
        Rational::new(m - 1, 3).unwrap(),
        Rational::new(17 * (m - 3), 120).unwrap(),
    ]
}

/// Random vertex cover instances with at most 3 players and 6 items, then
/// the lower-bound family at `m = 5, 7`.
pub fn suite() -> Vec<(String, Instance)> {
    let probs = [0.3, 0.5, 0.7, 0.9];
    let mut out: Vec<(String, Instance)> = (0..60u64)
        .map(|s| {
            let n = 1 + (s % 3) as usize;
            let m = 2 + (s / 3 % 5) as usize;
            let p = probs[(s % 4) as usize];
            let label = format!("random(n={n}, m={m}, p={p}, seed={s})");
            (label, random_instance(n, m, p, s).unwrap())
        })
        .collect();
    for m in [5, 7] {
        out.push((format!("lower-bound(m={m})"), paper_lower_bound_instance(m).unwrap()));
    }
    out
}
