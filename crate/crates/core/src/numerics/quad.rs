//! Gauss–Legendre panels and adaptive Gauss–Kronrod integration.

use gauss_quad::GaussLegendre;
use std::sync::OnceLock;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

const MAX_CACHED: usize = 256;

fn table() -> &'static Vec<OnceLock<Rule>> {
    static TABLE: OnceLock<Vec<OnceLock<Rule>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=MAX_CACHED).map(|_| OnceLock::new()).collect())
}

fn build(n: usize) -> Rule {
    let gl = GaussLegendre::new(n).expect("Gauss-Legendre order must be at least 2");
    let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        x: pairs.iter().map(|p| p.0).collect(),
        w: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Legendre rule with `n` nodes, cached for `n <= 256`.
pub fn legendre(n: usize) -> &'static Rule {
    let n = n.clamp(2, MAX_CACHED);
    table()[n].get_or_init(|| build(n))
}

/// Fixed-order Gauss–Legendre over [a, b].
pub fn gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let r = legendre(n);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in r.x.iter().zip(&r.w) {
        s += w * f(m + h * x);
    }
    s * h
}

/// Gauss–Legendre applied on each consecutive pair of `breaks`.
pub fn gauss_panels<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], n: usize) -> f64 {
    breaks.windows(2).map(|p| gauss(&mut f, p[0], p[1], n)).sum()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive G7/K15 bisection over [a, b] with the given `breaks` inside.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Adaptive {
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for p in breaks.windows(2) {
        if p[1] > p[0] {
            let (v, e) = kronrod(&mut f, p[0], p[1]);
            segs.push((p[0], p[1], v, e));
        }
    }
    let mut iters = 0;
    loop {
        let value: f64 = segs.iter().map(|s| s.2).sum();
        let error: f64 = segs.iter().map(|s| s.3).sum();
        let tol = abs_tol.max(rel_tol * value.abs());
        if error <= tol || iters >= 4000 {
            return Adaptive { value, error, converged: error <= tol };
        }
        let (k, _) = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("non-empty segment list");
        let (a, b, _, _) = segs.swap_remove(k);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Adaptive { value, error, converged: false };
        }
        let (v1, e1) = kronrod(&mut f, a, m);
        let (v2, e2) = kronrod(&mut f, m, b);
        segs.push((a, m, v1, e1));
        segs.push((m, b, v2, e2));
        iters += 1;
    }
}

/// Geometric break points from `lo` out to `hi`, both positive.
pub fn geometric(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut v = vec![lo];
    let mut t = lo;
    while t * ratio < hi {
        t *= ratio;
        v.push(t);
    }
    v.push(hi);
    v
}
