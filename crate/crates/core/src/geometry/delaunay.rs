//! Bowyer–Watson insertion and Lawson edge flips for planar point sets.

use std::collections::HashMap;

use super::{cross, sub, Point};

/// Positive when `d` lies strictly inside the circumcircle of the CCW
/// triangle `(a, b, c)`.
pub(crate) fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Delaunay triangulation of `pts` (CCW triangles). Points are inserted in
/// the given order, which makes the output deterministic.
pub(crate) fn bowyer_watson(pts: &[Point]) -> Vec<[usize; 3]> {
    let n = pts.len();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let mut all = pts.to_vec();
    all.push([mid[0] - 20.0 * span, mid[1] - 10.0 * span]);
    all.push([mid[0] + 20.0 * span, mid[1] - 10.0 * span]);
    all.push([mid[0], mid[1] + 20.0 * span]);

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for i in 0..n {
        let p = all[i];
        let mut bad = Vec::new();
        let mut keep = Vec::with_capacity(tris.len() + 2);
        for t in tris.drain(..) {
            if incircle(all[t[0]], all[t[1]], all[t[2]], p) > 0.0 {
                bad.push(t);
            } else {
                keep.push(t);
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &bad {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for t in &bad {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if edge_count[&(a.min(b), a.max(b))] == 1 {
                    keep.push([a, b, i]);
                }
            }
        }
        tris = keep;
    }
    tris.retain(|t| t.iter().all(|&v| v < n));
    tris
}

/// Flips interior edges until every edge is locally Delaunay. Edges listed in
/// `fixed` (unordered node pairs) are never flipped.
pub(crate) fn lawson_flip(pts: &[Point], tris: &mut [[usize; 3]], fixed: &[(usize, usize)]) -> usize {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let fixed: std::collections::HashSet<(usize, usize)> =
        fixed.iter().map(|&(a, b)| key(a, b)).collect();
    let mut flips = 0;
    let scale = {
        let mut s: f64 = 0.0;
        for t in tris.iter() {
            for k in 0..3 {
                let d = sub(pts[t[k]], pts[t[(k + 1) % 3]]);
                s = s.max(d[0].abs()).max(d[1].abs());
            }
        }
        s.max(1e-300)
    };
    let tol = 1e-10 * scale.powi(4);
    for _sweep in 0..1000 {
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                edges.entry(key(t[k], t[(k + 1) % 3])).or_default().push(ti);
            }
        }
        let mut keys: Vec<_> = edges.keys().copied().collect();
        keys.sort_unstable();
        let mut touched = vec![false; tris.len()];
        let mut changed = false;
        for e in keys {
            let ts = &edges[&e];
            if ts.len() != 2 || fixed.contains(&e) || touched[ts[0]] || touched[ts[1]] {
                continue;
            }
            let (t0, t1) = (tris[ts[0]], tris[ts[1]]);
            let opp = |t: [usize; 3]| *t.iter().find(|&&v| v != e.0 && v != e.1).unwrap();
            let (c, d) = (opp(t0), opp(t1));
            if incircle(pts[t0[0]], pts[t0[1]], pts[t0[2]], pts[d]) <= tol {
                continue;
            }
            // New triangles (c, a, d) and (d, b, c) with a, b the shared edge
            // ordered so that both come out counter-clockwise.
            let (a, b) = (e.0, e.1);
            let (n0, n1) = if orient(pts[c], pts[a], pts[d]) > 0.0 {
                ([c, a, d], [d, b, c])
            } else {
                ([c, b, d], [d, a, c])
            };
            if orient(pts[n0[0]], pts[n0[1]], pts[n0[2]]) <= 0.0
                || orient(pts[n1[0]], pts[n1[1]], pts[n1[2]]) <= 0.0
            {
                continue;
            }
            tris[ts[0]] = n0;
            tris[ts[1]] = n1;
            touched[ts[0]] = true;
            touched[ts[1]] = true;
            flips += 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    flips
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incircle_sign() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert!(incircle(a, b, c, [0.5, 0.5]) > 0.0);
        assert!(incircle(a, b, c, [2.0, 2.0]) < 0.0);
    }

    #[test]
    fn lattice_triangulation_covers_hull() {
        let mut pts = Vec::new();
        for j in 0..5 {
            for i in 0..5 {
                pts.push([i as f64 * 0.25 + 0.01 * (j % 2) as f64, j as f64 * 0.25]);
            }
        }
        let tris = bowyer_watson(&pts);
        let area: f64 = tris
            .iter()
            .map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]]))
            .sum();
        assert!(tris.iter().all(|t| orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0));
        assert!(area > 0.99 && area < 1.02);
    }

    #[test]
    fn flip_repairs_skinny_pair() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.2], [0.0, 0.2]];
        let mut tris = [[0, 1, 3], [1, 2, 3]];
        // Already Delaunay for this rectangle up to cocircularity.
        assert_eq!(lawson_flip(&pts, &mut tris, &[]), 0);
        let pts = [[0.0, 0.0], [2.0, -0.1], [4.0, 0.0], [2.0, 0.1]];
        let mut tris = [[0, 1, 2], [0, 2, 3]];
        assert_eq!(lawson_flip(&pts, &mut tris, &[]), 1);
    }
}
