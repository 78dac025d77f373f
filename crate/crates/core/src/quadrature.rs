//! Quadrature rules over the latent shift variable ξ.

use crate::error::{Error, Result};
use crate::num::{Real, C};

/// Nodes and weights of a rule. The weights already include the line-shape
/// density, so an average is `Σ wᵢ f(ξᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    /// Weights of an embedded lower-order rule on the same nodes, when one exists.
    pub coarse: Option<Vec<T>>,
}

impl<T: Real> Grid<T> {
    /// One node at ξ = 0 with unit weight.
    pub fn point() -> Self {
        Self { nodes: vec![T::zero()], weights: vec![T::one()], coarse: None }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, &w| s + w)
    }
}

/// Gauss–Hermite nodes and weights for the weight function exp(−x²).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("Gauss–Hermite rule needs at least one node"));
    }
    let guesses = jacobi_eigenvalues(n)?;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = guesses[i];
        let mut pp = 0.0;
        let mut log_scale = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            log_scale = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                if p1.abs() > 1e150 {
                    p1 *= 1e-150;
                    p2 *= 1e-150;
                    log_scale += 150.0 * std::f64::consts::LN_10;
                }
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { iterations: 100, residual: f64::NAN });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = (std::f64::consts::LN_2 - 2.0 * (pp.abs().ln() + log_scale)).exp();
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Eigenvalues of the Hermite Jacobi matrix, descending (implicit QL).
fn jacobi_eigenvalues(n: usize) -> Result<Vec<f64>> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64 / 2.0).sqrt() } else { 0.0 }).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence { iterations: iter, residual: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Gauss–Hermite grid for the density exp(−ξ²)/√π.
pub fn gauss_hermite_grid<T: Real>(n: usize) -> Result<Grid<T>> {
    let (x, w) = gauss_hermite(n)?;
    let norm = std::f64::consts::PI.sqrt();
    Ok(Grid {
        nodes: x.into_iter().map(T::lit).collect(),
        weights: w.into_iter().map(|w| T::lit(w / norm)).collect(),
        coarse: None,
    })
}

/// Equal-spacing trapezoid grid on [−cutoff, cutoff] for `density`. With an
/// odd node count the every-other-node rule is embedded as the coarse rule.
pub fn trapezoid_grid<T: Real>(n: usize, cutoff: T, density: impl Fn(T) -> T) -> Result<Grid<T>> {
    if n < 2 {
        return Err(Error::domain("trapezoid rule needs at least two nodes"));
    }
    if !(cutoff > T::zero()) {
        return Err(Error::domain("cutoff must be > 0"));
    }
    let h = T::lit(2.0) * cutoff / T::lit((n - 1) as f64);
    let half = T::lit(0.5);
    let nodes: Vec<T> = (0..n).map(|i| -cutoff + h * T::lit(i as f64)).collect();
    let weights: Vec<T> = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == 0 || i == n - 1 { half * h * density(x) } else { h * density(x) })
        .collect();
    let coarse = (n % 2 == 1 && n >= 3).then(|| {
        nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| match i {
                _ if i % 2 == 1 => T::zero(),
                _ if i == 0 || i == n - 1 => h * density(x),
                _ => T::lit(2.0) * h * density(x),
            })
            .collect()
    });
    Ok(Grid { nodes, weights, coarse })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 Kronrod abscissae on [a, b] with Kronrod and embedded Gauss weights.
fn kronrod_panel<T: Real>(a: T, b: T) -> [(T, T, T); 15] {
    let half = T::lit(0.5);
    let mid = half * (a + b);
    let hl = half * (b - a);
    let mut out = [(T::zero(), T::zero(), T::zero()); 15];
    for k in 0..7 {
        let gauss = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        let dx = hl * T::lit(XGK[k]);
        let wk = hl * T::lit(WGK[k]);
        let wg = hl * T::lit(gauss);
        out[k] = (mid - dx, wk, wg);
        out[14 - k] = (mid + dx, wk, wg);
    }
    out[7] = (mid, hl * T::lit(WGK[7]), hl * T::lit(WG[3]));
    out
}

/// Breakpoints at `center ± h·2^k` for k = −2, −1, … inside [lo, hi], plus
/// the centers and the endpoints.
pub fn graded_breakpoints<T: Real>(centers: &[T], h: T, lo: T, hi: T) -> Vec<T> {
    let mut pts = vec![lo, hi];
    if h > T::zero() && h.is_finite() {
        for &c in centers {
            if !(c > lo && c < hi) {
                continue;
            }
            pts.push(c);
            let mut step = h * T::lit(0.25);
            while step < hi - lo {
                for p in [c - step, c + step] {
                    if p > lo && p < hi {
                        pts.push(p);
                    }
                }
                step = step * T::lit(2.0);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let min_gap = (hi - lo) * T::lit(1e-12);
    pts.dedup_by(|b, a| (*b - *a).abs() <= min_gap);
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveTolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_panels: usize,
}

impl<T: Real> Default for AdaptiveTolerance<T> {
    fn default() -> Self {
        Self { rel: T::lit(1e-9), abs: T::lit(1e-15), max_panels: 20_000 }
    }
}

/// Result of adaptive refinement: the final grid and the integrand samples
/// at its nodes, in node order.
#[derive(Debug, Clone)]
pub struct Adaptive<T, S> {
    pub grid: Grid<T>,
    pub samples: Vec<S>,
    /// Componentwise |Kronrod − Gauss| summed over panels.
    pub error: Vec<T>,
    pub converged: bool,
}

struct Panel<T, S, const M: usize> {
    a: T,
    b: T,
    samples: Vec<S>,
    nodes: [(T, T, T); 15],
    err: [T; M],
    kronrod: [C<T>; M],
}

/// Globally adaptive G7–K15 integration of `density(ξ)·project(f(ξ))` over
/// the panels delimited by `breakpoints`, bisecting the panel with the worst
/// normalised error until every component meets the tolerance.
pub fn adaptive_grid<T, S, F, P, D, const M: usize>(
    breakpoints: &[T],
    density: D,
    mut f: F,
    project: P,
    tol: AdaptiveTolerance<T>,
) -> Result<Adaptive<T, S>>
where
    T: Real,
    F: FnMut(T) -> Result<S>,
    P: Fn(&S) -> [C<T>; M],
    D: Fn(T) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::domain("adaptive quadrature needs an interval"));
    }
    let mut eval_panel = |a: T, b: T| -> Result<Panel<T, S, M>> {
        let nodes = kronrod_panel(a, b);
        let mut kronrod = [C::new(T::zero(), T::zero()); M];
        let mut gauss = kronrod;
        let mut samples = Vec::with_capacity(15);
        for &(x, wk, wg) in &nodes {
            let s = f(x)?;
            let v = project(&s);
            let rho = density(x);
            for m in 0..M {
                kronrod[m] += v[m].scale(wk * rho);
                gauss[m] += v[m].scale(wg * rho);
            }
            samples.push(s);
        }
        let err = std::array::from_fn(|m| (kronrod[m] - gauss[m]).norm());
        Ok(Panel { a, b, samples, nodes, err, kronrod })
    };

    let mut panels = Vec::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            panels.push(eval_panel(w[0], w[1])?);
        }
    }

    let mut converged = false;
    loop {
        let mut total = [C::new(T::zero(), T::zero()); M];
        let mut err = [T::zero(); M];
        for p in &panels {
            for m in 0..M {
                total[m] += p.kronrod[m];
                err[m] += p.err[m];
            }
        }
        let target: [T; M] = std::array::from_fn(|m| (tol.rel * total[m].norm()).max(tol.abs));
        if (0..M).all(|m| err[m] <= target[m]) {
            converged = true;
            break;
        }
        if panels.len() >= tol.max_panels {
            break;
        }
        let score = |p: &Panel<T, S, M>| (0..M).fold(T::zero(), |s, m| s.max(p.err[m] / target[m]));
        let worst = (0..panels.len())
            .max_by(|&i, &j| score(&panels[i]).partial_cmp(&score(&panels[j])).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = T::lit(0.5) * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            panels.push(p);
            break;
        }
        panels.push(eval_panel(p.a, mid)?);
        panels.push(eval_panel(mid, p.b)?);
    }

    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(std::cmp::Ordering::Equal));
    let mut grid = Grid { nodes: Vec::new(), weights: Vec::new(), coarse: Some(Vec::new()) };
    let mut samples = Vec::with_capacity(panels.len() * 15);
    let mut error = vec![T::zero(); M];
    for p in panels {
        for m in 0..M {
            error[m] += p.err[m];
        }
        let coarse = grid.coarse.as_mut().expect("coarse weights present");
        for ((x, wk, wg), s) in p.nodes.into_iter().zip(p.samples) {
            let rho = density(x);
            grid.nodes.push(x);
            grid.weights.push(wk * rho);
            coarse.push(wg * rho);
            samples.push(s);
        }
    }
    Ok(Adaptive { grid, samples, error, converged })
}
