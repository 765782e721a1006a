//! Point clouds on level sets `U = U₀` by sign changes along grid edges.

use std::fmt::Write;

use crate::error::Result;
use crate::fields::seed;

use super::catalog::TodaSolution;

/// Accepted `|U − U₀|` after refinement.
pub const LEVEL_TOL: f64 = 1e-6;

const BISECTIONS: usize = 80;

fn value(sol: &TodaSolution, p: &[f64]) -> Option<f64> {
    let x = seed(p, 0).ok()?;
    sol.eval(&x).ok().map(|u| u.value()).filter(|v| v.is_finite())
}

/// Points `(X, Y, Z, U)` with `|U − U₀| ≤ LEVEL_TOL` found on the edges of a
/// grid with `resolution` cells per axis over the solution's box. Grid
/// vertices outside the chart guards or without a tracked root are skipped.
pub fn extract_levelset(sol: &TodaSolution, u0: f64, resolution: usize) -> Result<Vec<[f64; 4]>> {
    let chart = sol.chart();
    let n = resolution.max(1);
    let b = &chart.domain_box;
    let at = |i: usize, j: usize, k: usize| -> [f64; 3] {
        let f = |t: usize, (lo, hi): (f64, f64)| {
            // stay strictly inside the open box
            let s = (t as f64 + 0.5) / (n as f64 + 1.0);
            lo + (hi - lo) * s
        };
        [f(i, b[0]), f(j, b[1]), f(k, b[2])]
    };
    let m = n + 1;
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let mut vals = vec![None; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let p = at(i, j, k);
                if chart.is_valid(&p) {
                    vals[idx(i, j, k)] = value(sol, &p).map(|v| v - u0);
                }
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let Some(fa) = vals[idx(i, j, k)] else { continue };
                for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                    let (i2, j2, k2) = (i + di, j + dj, k + dk);
                    if i2 >= m || j2 >= m || k2 >= m {
                        continue;
                    }
                    let Some(fb) = vals[idx(i2, j2, k2)] else { continue };
                    if fa == 0.0 {
                        let p = at(i, j, k);
                        out.push([p[0], p[1], p[2], u0]);
                        continue;
                    }
                    if fa * fb >= 0.0 {
                        continue;
                    }
                    if let Some(p) = bisect(sol, u0, at(i, j, k), at(i2, j2, k2), fa) {
                        out.push(p);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn bisect(sol: &TodaSolution, u0: f64, mut a: [f64; 3], mut b: [f64; 3], mut fa: f64) -> Option<[f64; 4]> {
    let mut best = None;
    for _ in 0..BISECTIONS {
        let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
        let fc = value(sol, &c)? - u0;
        best = Some((c, fc));
        if fc == 0.0 || fc.abs() <= 1e-14 {
            break;
        }
        if fa * fc < 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    let (c, fc) = best?;
    (fc.abs() <= LEVEL_TOL).then_some([c[0], c[1], c[2], u0 + fc])
}

/// CSV with header `X,Y,Z,U`.
pub fn to_csv(points: &[[f64; 4]]) -> String {
    let mut s = String::from("X,Y,Z,U\n");
    for p in points {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", p[0], p[1], p[2], p[3]);
    }
    s
}

/// Vertex-only OBJ.
pub fn to_obj(points: &[[f64; 4]]) -> String {
    let mut s = String::new();
    for p in points {
        let _ = writeln!(s, "v {:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    s
}
