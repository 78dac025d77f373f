//! Averages over an inhomogeneously broadened ensemble of packets.
//!
//! Packets are labelled by a latent shift ξ with density `distribution_weight`;
//! transition ik of packet ξ is shifted by ν_ik = u_ik·ξ.

use std::fmt;

use crate::error::{Error, Result};
use crate::levels::Detunings;
use crate::liouville::{steady_state, steady_state_with_response, IrResponse, PacketParams, PacketState};
use crate::num::{im_unit, Real, C};
use crate::quadrature::{
    adaptive_grid, gauss_hermite_grid, graded_breakpoints, trapezoid_grid, AdaptiveTolerance, Grid,
};

pub const MIN_NODES: usize = 17;
pub const MIN_CUTOFF: f64 = 5.0;
pub const DEFAULT_NODES: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineShape {
    Homogeneous,
    Gaussian,
    Lorentzian,
}

impl fmt::Display for LineShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineShape::Homogeneous => "homogeneous",
            LineShape::Gaussian => "gaussian",
            LineShape::Lorentzian => "lorentzian",
        })
    }
}

/// How nodes are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Standard rule when the line is narrow compared with the homogeneous
    /// widths, adaptive otherwise.
    Auto,
    /// Gauss–Hermite (Gaussian) or trapezoid on ±cutoff (Lorentzian).
    Standard,
    /// Adaptive G7–K15 on panels graded around every resonance.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadeningSpec<T> {
    kind: LineShape,
    u21: T,
    u31: T,
    u32: T,
    nodes: usize,
    cutoff: T,
    rule: QuadratureRule,
    tolerance: AdaptiveTolerance<T>,
}

impl<T: Real> BroadeningSpec<T> {
    pub fn homogeneous() -> Self {
        Self {
            kind: LineShape::Homogeneous,
            u21: T::zero(),
            u31: T::zero(),
            u32: T::zero(),
            nodes: DEFAULT_NODES,
            cutoff: T::lit(MIN_CUTOFF),
            rule: QuadratureRule::Auto,
            tolerance: AdaptiveTolerance::default(),
        }
    }

    /// Half-widths `u = [u21, u31, u32]` in meV. A broadened line needs every
    /// width positive; the homogeneous kind needs all of them zero.
    pub fn new(kind: LineShape, u: [T; 3]) -> Result<Self> {
        let spec = Self { kind, u21: u[0], u31: u[1], u32: u[2], ..Self::homogeneous() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        self.nodes = nodes;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cutoff(mut self, cutoff: T) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_tolerance(mut self, tolerance: AdaptiveTolerance<T>) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        let widths = [("u21", self.u21), ("u31", self.u31), ("u32", self.u32)];
        for (name, u) in widths {
            if !(u >= T::zero() && u.is_finite()) {
                return Err(Error::domain(format!("{name} must be finite and ≥ 0")));
            }
        }
        match self.kind {
            LineShape::Homogeneous => {
                if let Some((name, _)) = widths.iter().find(|(_, u)| *u > T::zero()) {
                    return Err(Error::domain(format!("homogeneous line requires {name} = 0")));
                }
            }
            kind => {
                if let Some((name, _)) = widths.iter().find(|(_, u)| *u == T::zero()) {
                    return Err(Error::domain(format!("{kind} line requires {name} > 0")));
                }
            }
        }
        if self.nodes < MIN_NODES {
            return Err(Error::domain(format!("node count must be ≥ {MIN_NODES}")));
        }
        if !(self.cutoff >= T::lit(MIN_CUTOFF)) {
            return Err(Error::domain(format!("cutoff must be ≥ {MIN_CUTOFF}")));
        }
        Ok(())
    }

    pub fn kind(&self) -> LineShape {
        self.kind
    }

    pub fn widths(&self) -> [T; 3] {
        [self.u21, self.u31, self.u32]
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn tolerance(&self) -> AdaptiveTolerance<T> {
        self.tolerance
    }

    /// Per-transition shifts of packet ξ.
    pub fn shift(&self, xi: T) -> Detunings<T> {
        Detunings { d21: self.u21 * xi, d31: self.u31 * xi, d32: self.u32 * xi }
    }

    fn max_width(&self) -> T {
        self.u21.max(self.u31).max(self.u32)
    }
}

/// Normalised density of ξ: exp(−ξ²)/√π or 1/(π(1 + ξ²)).
pub fn distribution_weight<T: Real>(xi: T, kind: LineShape) -> Result<T> {
    match kind {
        LineShape::Homogeneous => Err(Error::contract("a homogeneous line has no shift distribution")),
        LineShape::Gaussian => Ok((-xi * xi).exp() / T::PI().sqrt()),
        LineShape::Lorentzian => Ok(T::one() / (T::PI() * (T::one() + xi * xi))),
    }
}

const N_VALUES: usize = 10;

/// Packet-level quantities gathered at one node.
#[derive(Debug, Clone, Copy)]
struct NodeSample<T> {
    values: [C<T>; N_VALUES],
    n23: T,
}

fn sample<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>, xi: T, with_response: bool) -> Result<NodeSample<T>> {
    let q = p.with_shift(b.shift(xi));
    let wrap = |e: Error| Error::PacketSolve { xi: xi.to_f64_lossy(), source: Box::new(e) };
    let (s, r): (PacketState<T>, Option<IrResponse<T>>) = if with_response {
        let (s, r) = steady_state_with_response(&q).map_err(wrap)?;
        (s, Some(r))
    } else {
        (steady_state(&q).map_err(wrap)?, None)
    };
    let d = q.drives();
    let i = im_unit::<T>();
    let ratio = |sigma: C<T>, e: C<T>| if e.norm_sqr() > T::zero() { i * sigma / e } else { C::new(T::zero(), T::zero()) };
    let g = q.gamma_factors();
    let re = |x: T| C::new(x, T::zero());
    let zero = C::new(T::zero(), T::zero());
    Ok(NodeSample {
        values: [
            s.sigma32,
            ratio(s.sigma21, d.e1),
            ratio(s.sigma31, d.e2),
            re(s.rho[0]),
            re(s.rho[1]),
            re(s.rho[2]),
            g.s12(s.n12()),
            g.s13(s.n13()),
            r.map_or(zero, |r| r.along_e),
            r.map_or(zero, |r| r.along_conj),
        ],
        n23: s.n23(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<T> {
    /// ⟨σ32⟩, the parametric source at the current IR field.
    pub sigma32: C<T>,
    /// ⟨iσ21/e1⟩ (zero without e1).
    pub response21: C<T>,
    /// ⟨iσ31/e2⟩ (zero without e2).
    pub response31: C<T>,
    /// ⟨ρ11⟩, ⟨ρ22⟩, ⟨ρ33⟩.
    pub populations: [T; 3],
    /// ⟨n12/(Γ21*Γ̃32)⟩
    pub s12: C<T>,
    /// ⟨n13/(Γ31Γ̃32)⟩
    pub s13: C<T>,
    /// Mean linear response of σ32 to the IR amplitude, when requested.
    pub ir_response: Option<IrResponse<T>>,
    /// Smallest n23 = ρ22 − ρ33 over all nodes.
    pub min_n23: T,
    /// Largest relative change of σ32, Σ and the populations between the
    /// rule and its embedded coarse rule, when one exists.
    pub error_estimate: Option<T>,
    pub nodes: usize,
}

impl<T: Real> EnsembleResult<T> {
    pub fn n12(&self) -> T {
        self.populations[0] - self.populations[1]
    }

    pub fn n13(&self) -> T {
        self.populations[0] - self.populations[2]
    }

    pub fn n23(&self) -> T {
        self.populations[1] - self.populations[2]
    }

    /// Σ = ⟨n12/(Γ21*Γ̃32) + n13/(Γ31Γ̃32)⟩
    pub fn ir_source_sum(&self) -> C<T> {
        self.s12 + self.s13
    }

    /// Small-signal IR gain coefficient Re(i·∂⟨σ32⟩/∂e), positive for gain
    /// and negative for absorption.
    pub fn ir_gain(&self) -> Option<T> {
        self.ir_response.map(|r| (im_unit::<T>() * r.along_e).re)
    }
}

fn reduce<T: Real>(grid: &Grid<T>, samples: &[NodeSample<T>], with_response: bool) -> EnsembleResult<T> {
    let sum = |weights: &[T]| {
        let mut acc = [C::new(T::zero(), T::zero()); N_VALUES];
        for (w, s) in weights.iter().zip(samples) {
            for (a, v) in acc.iter_mut().zip(&s.values) {
                *a += v.scale(*w);
            }
        }
        acc
    };
    let fine = sum(&grid.weights);
    let error_estimate = grid.coarse.as_ref().map(|cw| {
        let coarse = sum(cw);
        let rel = |k: usize| {
            let scale = fine[k].norm().max(coarse[k].norm());
            if scale > T::zero() {
                (fine[k] - coarse[k]).norm() / scale
            } else {
                T::zero()
            }
        };
        let sigma = {
            let f = fine[6] + fine[7];
            let c = coarse[6] + coarse[7];
            let scale = f.norm().max(c.norm());
            if scale > T::zero() {
                (f - c).norm() / scale
            } else {
                T::zero()
            }
        };
        [0, 3, 4, 5].iter().map(|&k| rel(k)).fold(sigma, T::max)
    });
    let min_n23 = samples.iter().fold(T::infinity(), |m, s| m.min(s.n23));
    EnsembleResult {
        sigma32: fine[0],
        response21: fine[1],
        response31: fine[2],
        populations: [fine[3].re, fine[4].re, fine[5].re],
        s12: fine[6],
        s13: fine[7],
        ir_response: with_response.then_some(IrResponse { along_e: fine[8], along_conj: fine[9] }),
        min_n23,
        error_estimate,
        nodes: grid.len(),
    }
}

fn uses_adaptive<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>) -> bool {
    match b.rule {
        QuadratureRule::Standard => false,
        QuadratureRule::Adaptive => true,
        QuadratureRule::Auto => b.max_width() > feature_width(p),
    }
}

/// Narrowest homogeneous width in the packet, in meV.
fn feature_width<T: Real>(p: &PacketParams<T>) -> T {
    p.relaxation()
        .gammas()
        .iter()
        .copied()
        .filter(|&g| g > T::zero())
        .fold(T::infinity(), T::min)
}

fn standard_grid<T: Real>(b: &BroadeningSpec<T>, nodes: usize) -> Result<Grid<T>> {
    match b.kind {
        LineShape::Homogeneous => Ok(Grid::point()),
        LineShape::Gaussian => gauss_hermite_grid(nodes),
        LineShape::Lorentzian => {
            let n = if nodes % 2 == 0 { nodes + 1 } else { nodes };
            trapezoid_grid(n, b.cutoff, |x| distribution_weight(x, LineShape::Lorentzian).unwrap_or(T::zero()))
        }
    }
}

/// Breakpoints graded around every packet resonance. Transition ik of packet
/// ξ is resonant at ξ = −Δ_ik/u_ik; the finest panel is a quarter of the
/// narrowest homogeneous width in ξ units.
fn resonance_breakpoints<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>) -> Vec<T> {
    let d = p.detunings();
    let centers: Vec<T> = [(d.d21, b.u21), (d.d31, b.u31), (d.d32, b.u32)]
        .iter()
        .filter(|(_, u)| *u > T::zero())
        .map(|&(delta, u)| -delta / u)
        .collect();
    let h = feature_width(p) / b.max_width();
    let mut all = centers.clone();
    all.push(T::zero());
    graded_breakpoints(&all, h, -b.cutoff, b.cutoff)
}

/// A node set fixed once and reused for repeated averages, e.g. during the
/// IR fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGrid<T> {
    pub grid: Grid<T>,
    pub adaptive: bool,
    pub converged: bool,
}

fn build<T: Real>(
    p: &PacketParams<T>,
    b: &BroadeningSpec<T>,
    with_response: bool,
    adaptive: bool,
    nodes: usize,
) -> Result<(EnsembleGrid<T>, Vec<NodeSample<T>>)> {
    if b.kind == LineShape::Homogeneous {
        let s = sample(p, b, T::zero(), with_response)?;
        return Ok((EnsembleGrid { grid: Grid::point(), adaptive: false, converged: true }, vec![s]));
    }
    if adaptive {
        let kind = b.kind;
        let out = adaptive_grid(
            &resonance_breakpoints(p, b),
            |x| distribution_weight(x, kind).unwrap_or(T::zero()),
            |xi| sample(p, b, xi, with_response),
            |s: &NodeSample<T>| s.values,
            b.tolerance,
        )?;
        Ok((EnsembleGrid { grid: out.grid, adaptive: true, converged: out.converged }, out.samples))
    } else {
        let grid = standard_grid(b, nodes)?;
        let samples = grid
            .nodes
            .iter()
            .map(|&xi| sample(p, b, xi, with_response))
            .collect::<Result<Vec<_>>>()?;
        Ok((EnsembleGrid { grid, adaptive: false, converged: true }, samples))
    }
}

/// Ensemble average of the packet quantities at the drives in `p`.
pub fn ensemble_average<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>) -> Result<EnsembleResult<T>> {
    ensemble_average_with(p, b, false).map(|(r, _)| r)
}

/// As [`ensemble_average`], optionally including the IR linear response,
/// and returning the node set it settled on.
pub fn ensemble_average_with<T: Real>(
    p: &PacketParams<T>,
    b: &BroadeningSpec<T>,
    with_response: bool,
) -> Result<(EnsembleResult<T>, EnsembleGrid<T>)> {
    let (grid, samples) = build(p, b, with_response, uses_adaptive(p, b), b.nodes)?;
    Ok((reduce(&grid.grid, &samples, with_response), grid))
}

/// Averages on a previously built node set.
pub fn average_on_grid<T: Real>(
    p: &PacketParams<T>,
    b: &BroadeningSpec<T>,
    grid: &EnsembleGrid<T>,
    with_response: bool,
) -> Result<EnsembleResult<T>> {
    let samples = grid
        .grid
        .nodes
        .iter()
        .map(|&xi| sample(p, b, xi, with_response))
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(&grid.grid, &samples, with_response))
}

/// Ensemble mean of an arbitrary packet quantity, using the same node
/// selection as [`ensemble_average`].
pub fn average_quantity<T, F>(p: &PacketParams<T>, b: &BroadeningSpec<T>, f: F) -> Result<C<T>>
where
    T: Real,
    F: Fn(&PacketParams<T>, &PacketState<T>) -> C<T>,
{
    let eval = |xi: T| -> Result<C<T>> {
        let q = p.with_shift(b.shift(xi));
        let s = steady_state(&q).map_err(|e| Error::PacketSolve { xi: xi.to_f64_lossy(), source: Box::new(e) })?;
        Ok(f(&q, &s))
    };
    if b.kind == LineShape::Homogeneous {
        return eval(T::zero());
    }
    if uses_adaptive(p, b) {
        let kind = b.kind;
        let out = adaptive_grid(
            &resonance_breakpoints(p, b),
            |x| distribution_weight(x, kind).unwrap_or(T::zero()),
            eval,
            |v: &C<T>| [*v],
            b.tolerance,
        )?;
        Ok(out.grid.weights.iter().zip(&out.samples).fold(C::new(T::zero(), T::zero()), |s, (w, v)| s + v.scale(*w)))
    } else {
        let grid = standard_grid(b, b.nodes)?;
        let mut acc = C::new(T::zero(), T::zero());
        for (&xi, &w) in grid.nodes.iter().zip(&grid.weights) {
            acc += eval(xi)?.scale(w);
        }
        Ok(acc)
    }
}

/// Scale-separation requirements of the hole-burning regime that `p` and
/// `b` fail.
pub fn holeburning_regime<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>) -> Vec<String> {
    let ratio = T::lit(crate::analytic::REGIME_RATIO);
    let d = p.drives();
    let gamma = p.relaxation().gammas().iter().copied().fold(T::zero(), T::max);
    let drive = d.e1.norm().max(d.e2.norm());
    let mut out = Vec::new();
    if b.kind == LineShape::Homogeneous {
        out.push("inhomogeneous line required".to_string());
    }
    for (name, e) in [("|e1|", d.e1.norm()), ("|e2|", d.e2.norm())] {
        if !(e >= ratio * gamma) {
            out.push(format!("{name} ≥ {ratio}·γ (have {e}, γ = {gamma})"));
        }
    }
    for (name, u) in [("u21", b.u21), ("u31", b.u31)] {
        if !(u >= ratio * drive) {
            out.push(format!("{name} ≥ {ratio}·|e| (have {u}, |e| = {drive})"));
        }
    }
    out
}

/// Ensemble average in the strong-drive regime. With `refine` the nodes are
/// placed adaptively around the burned holes; without it the standard rule
/// with the spec's node count is used.
pub fn holeburning_average<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>, refine: bool) -> Result<EnsembleResult<T>> {
    let violations = holeburning_regime(p, b);
    if !violations.is_empty() {
        return Err(Error::Regime(violations));
    }
    let (grid, samples) = build(p, b, false, refine, b.nodes)?;
    Ok(reduce(&grid.grid, &samples, false))
}

/// Bracket coefficients of the hole-burning closed form recovered from the
/// ensemble.
///
/// With the optical losses clamped by κ_i = Re(g_i²⟨iσ/e⟩), the weak-IR field
/// is e = (i g² e1* e2/κ)·(Q1·κ1/g1² + Q2·κ2/g2²) where Q1 = ⟨S12⟩/⟨iσ21/e1⟩ and
/// Q2 = ⟨S13⟩/⟨iσ31/e2⟩. Scaled to the closed form's prefactor, the bracket
/// coefficients are a_i = |Q_i|·γ·u32/u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleBurningCoefficients<T> {
    pub q1: C<T>,
    pub q2: C<T>,
    pub a1: T,
    pub a2: T,
    /// a1/(a1 + a2)
    pub c1: T,
    /// a2/(a1 + a2)
    pub c2: T,
    /// The two terms enter with opposite signs.
    pub opposite_signs: bool,
}

pub fn holeburning_coefficients<T: Real>(p: &PacketParams<T>, b: &BroadeningSpec<T>) -> Result<HoleBurningCoefficients<T>> {
    let r = holeburning_average(p, b, true)?;
    let q1 = r.s12 / r.response21;
    let q2 = r.s13 / r.response31;
    let scale = p.relaxation().gamma21 * b.u32 / b.u21;
    let a1 = q1.norm() * scale;
    let a2 = q2.norm() * scale;
    Ok(HoleBurningCoefficients {
        q1,
        q2,
        a1,
        a2,
        c1: a1 / (a1 + a2),
        c2: a2 / (a1 + a2),
        opposite_signs: (q1 / q2).re < T::zero(),
    })
}
