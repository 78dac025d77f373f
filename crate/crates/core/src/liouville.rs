//! Steady state of a single homogeneous packet of the three-level medium.
//!
//! Rotating-frame equations, with n_ik = ρii − ρkk and Γ_ik = γ_ik + iΔ_ik:
//!
//! ```text
//! ρ̇33 = Λρ11 − (r31 + r32)ρ33 + 2Im(e2*σ31) + 2Im(e*σ32)
//! ρ̇22 = r32ρ33 − r21ρ22 + 2Im(e1*σ21) − 2Im(e*σ32)
//! σ̇21 = −Γ21σ21 + i e1 n12 + i e*σ31 − i e2 σ32*
//! σ̇31 = −Γ31σ31 + i e2 n13 + i e σ21 − i e1 σ32
//! σ̇32 = −Γ32σ32 + i e n23 + i e2 σ21* − i e1*σ31
//! ```
//!
//! ρ11 is eliminated through the trace. The unknowns are ordered
//! `[ρ22, ρ33, σ21, σ21*, σ31, σ31*, σ32, σ32*]` and treated as eight
//! independent complex numbers; the solution carries the conjugate structure.
//! With these signs the e = 0 solution gives exactly
//! σ32 = e1*e2 (n12/Γ21* + n13/Γ31)/Γ̃32.

use num_traits::Zero;

use crate::analytic::GammaFactors;
use crate::error::{Error, Result};
use crate::levels::{Detunings, RelaxationSpec};
use crate::linalg::{mat_vec, Lu, Matrix, Vector};
use crate::num::{im_unit, Real, C};

pub const DIM: usize = 8;

const RHO22: usize = 0;
const RHO33: usize = 1;
const S21: usize = 2;
const S21C: usize = 3;
const S31: usize = 4;
const S31C: usize = 5;
const S32: usize = 6;
const S32C: usize = 7;

/// Largest condition number accepted by [`steady_state`].
pub const MAX_CONDITION: f64 = 1e12;

/// Complex Rabi amplitudes of the three fields (meV).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Drives<T> {
    pub e1: C<T>,
    pub e2: C<T>,
    pub e: C<T>,
}

impl<T: Real> Drives<T> {
    pub fn new(e1: C<T>, e2: C<T>, e: C<T>) -> Self {
        Self { e1, e2, e }
    }

    pub fn optical(e1: C<T>, e2: C<T>) -> Self {
        Self { e1, e2, e: C::zero() }
    }

    pub fn conj(&self) -> Self {
        Self { e1: self.e1.conj(), e2: self.e2.conj(), e: self.e.conj() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams<T> {
    detunings: Detunings<T>,
    shift: Detunings<T>,
    relaxation: RelaxationSpec<T>,
    drives: Drives<T>,
}

impl<T: Real> PacketParams<T> {
    /// `detunings` are the bare field detunings and must close the loop.
    pub fn new(detunings: Detunings<T>, relaxation: RelaxationSpec<T>, drives: Drives<T>) -> Result<Self> {
        let scale = detunings.d21.abs().max(detunings.d31.abs()).max(detunings.d32.abs()).max(T::one());
        if detunings.loop_defect().abs() > T::lit(1e-9) * scale {
            return Err(Error::contract(format!(
                "detunings violate the loop identity Δ31 = Δ21 + Δ32 (defect {})",
                detunings.loop_defect()
            )));
        }
        relaxation.validate()?;
        let p = Self { detunings, shift: Detunings::zero(), relaxation, drives };
        p.check_driven_gammas()?;
        Ok(p)
    }

    fn check_driven_gammas(&self) -> Result<()> {
        let d = &self.drives;
        let r = &self.relaxation;
        let checks = [
            ("gamma21", r.gamma21, !d.e1.is_zero()),
            ("gamma31", r.gamma31, !d.e2.is_zero()),
            ("gamma32", r.gamma32, !d.e.is_zero() || (!d.e1.is_zero() && !d.e2.is_zero())),
        ];
        for (name, g, driven) in checks {
            if driven && !(g > T::zero()) {
                return Err(Error::domain(format!("{name} must be > 0 on a driven transition")));
            }
        }
        let finite = |z: C<T>| z.re.is_finite() && z.im.is_finite();
        if !(finite(d.e1) && finite(d.e2) && finite(d.e)) {
            return Err(Error::domain("Rabi amplitudes must be finite"));
        }
        Ok(())
    }

    /// Adds a per-transition inhomogeneous shift ν_ik to each Γ_ik. The shifts
    /// need not close the loop.
    pub fn with_shift(mut self, shift: Detunings<T>) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_ir(mut self, e: C<T>) -> Result<Self> {
        self.drives.e = e;
        self.check_driven_gammas()?;
        Ok(self)
    }

    pub fn with_drives(mut self, drives: Drives<T>) -> Result<Self> {
        self.drives = drives;
        self.check_driven_gammas()?;
        Ok(self)
    }

    pub fn detunings(&self) -> &Detunings<T> {
        &self.detunings
    }

    pub fn shift(&self) -> &Detunings<T> {
        &self.shift
    }

    /// Bare detunings plus the packet shift.
    pub fn effective_detunings(&self) -> Detunings<T> {
        Detunings {
            d21: self.detunings.d21 + self.shift.d21,
            d31: self.detunings.d31 + self.shift.d31,
            d32: self.detunings.d32 + self.shift.d32,
        }
    }

    pub fn relaxation(&self) -> &RelaxationSpec<T> {
        &self.relaxation
    }

    pub fn drives(&self) -> &Drives<T> {
        &self.drives
    }

    /// Γ factors of this packet at its effective detunings.
    pub fn gamma_factors(&self) -> GammaFactors<T> {
        GammaFactors::new(self.relaxation.gammas(), &self.effective_detunings(), self.drives.e1, self.drives.e2)
    }

    /// Complex-conjugate image: detunings negated and the couplings −e
    /// conjugated (e → −e*). Its steady state has the same populations and
    /// conjugated coherences.
    pub fn mirrored(&self) -> Self {
        let d = self.drives.conj();
        Self {
            detunings: self.detunings.negated(),
            shift: self.shift.negated(),
            relaxation: self.relaxation,
            drives: Drives { e1: -d.e1, e2: -d.e2, e: -d.e },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketState<T> {
    /// Populations ρ11, ρ22, ρ33.
    pub rho: [T; 3],
    pub sigma21: C<T>,
    pub sigma31: C<T>,
    pub sigma32: C<T>,
    /// Max-norm residual of the steady-state equations at this state.
    pub residual: T,
    /// False when the state is not a valid density matrix (negative
    /// population or coherence exceeding the Cauchy–Schwarz bound).
    pub admissible: bool,
}

impl<T: Real> PacketState<T> {
    pub fn n12(&self) -> T {
        self.rho[0] - self.rho[1]
    }

    pub fn n13(&self) -> T {
        self.rho[0] - self.rho[2]
    }

    pub fn n23(&self) -> T {
        self.rho[1] - self.rho[2]
    }

    pub fn trace(&self) -> T {
        self.rho[0] + self.rho[1] + self.rho[2]
    }

    fn to_vector(self) -> Vector<T, DIM> {
        let re = |x: T| C::new(x, T::zero());
        [
            re(self.rho[1]),
            re(self.rho[2]),
            self.sigma21,
            self.sigma21.conj(),
            self.sigma31,
            self.sigma31.conj(),
            self.sigma32,
            self.sigma32.conj(),
        ]
    }

    fn from_vector(x: &Vector<T, DIM>) -> Self {
        let half = T::lit(0.5);
        let rho22 = x[RHO22].re;
        let rho33 = x[RHO33].re;
        let mut s = Self {
            rho: [T::one() - rho22 - rho33, rho22, rho33],
            sigma21: (x[S21] + x[S21C].conj()).scale(half),
            sigma31: (x[S31] + x[S31C].conj()).scale(half),
            sigma32: (x[S32] + x[S32C].conj()).scale(half),
            residual: T::zero(),
            admissible: true,
        };
        s.admissible = s.is_admissible();
        s
    }

    fn is_admissible(&self) -> bool {
        let tol = T::lit(1e-10);
        let [r1, r2, r3] = self.rho;
        if self.rho.iter().any(|&r| r < -tol || r > T::one() + tol) {
            return false;
        }
        // 2×2 principal minors and the full determinant of the Hermitian 3×3 matrix.
        let m21 = r2 * r1 - self.sigma21.norm_sqr();
        let m31 = r3 * r1 - self.sigma31.norm_sqr();
        let m32 = r3 * r2 - self.sigma32.norm_sqr();
        if m21 < -tol || m31 < -tol || m32 < -tol {
            return false;
        }
        // ρ = [[r1, s21*, s31*], [s21, r2, s32*], [s31, s32, r3]]
        let cross = (self.sigma21 * self.sigma32.conj() * self.sigma31.conj()).re;
        let det = r1 * r2 * r3 + T::lit(2.0) * cross
            - r1 * self.sigma32.norm_sqr()
            - r2 * self.sigma31.norm_sqr()
            - r3 * self.sigma21.norm_sqr();
        det >= -tol
    }
}

/// Affine system dx/dt = A·x + b over the eight unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadySystem<T> {
    pub matrix: Matrix<T, DIM>,
    pub rhs: Vector<T, DIM>,
}

impl<T: Real> SteadySystem<T> {
    /// dx/dt at `x`.
    pub fn apply(&self, x: &Vector<T, DIM>) -> Vector<T, DIM> {
        let mut y = mat_vec(&self.matrix, x);
        for (yi, bi) in y.iter_mut().zip(&self.rhs) {
            *yi += *bi;
        }
        y
    }

    pub fn residual(&self, state: &PacketState<T>) -> T {
        self.apply(&state.to_vector()).iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

pub fn build_steady_system<T: Real>(p: &PacketParams<T>) -> SteadySystem<T> {
    let i = im_unit::<T>();
    let zero = C::zero();
    let two = T::lit(2.0);
    let Drives { e1, e2, e } = p.drives;
    let r = &p.relaxation;
    let det = p.effective_detunings();
    let g21 = C::new(r.gamma21, det.d21);
    let g31 = C::new(r.gamma31, det.d31);
    let g32 = C::new(r.gamma32, det.d32);

    let mut a = [[zero; DIM]; DIM];
    let mut b = [zero; DIM];

    a[RHO22][RHO22] = C::from(-r.r21);
    a[RHO22][RHO33] = C::from(r.r32);
    a[RHO22][S21] = -i * e1.conj();
    a[RHO22][S21C] = i * e1;
    a[RHO22][S32] = i * e.conj();
    a[RHO22][S32C] = -i * e;

    b[RHO33] = C::from(r.pump);
    a[RHO33][RHO22] = C::from(-r.pump);
    a[RHO33][RHO33] = C::from(-(r.pump + r.r31 + r.r32));
    a[RHO33][S31] = -i * e2.conj();
    a[RHO33][S31C] = i * e2;
    a[RHO33][S32] = -i * e.conj();
    a[RHO33][S32C] = i * e;

    // n12 = 1 − 2ρ22 − ρ33
    b[S21] = i * e1;
    a[S21][RHO22] = -i * e1.scale(two);
    a[S21][RHO33] = -i * e1;
    a[S21][S21] = -g21;
    a[S21][S31] = i * e.conj();
    a[S21][S32C] = -i * e2;

    // n13 = 1 − ρ22 − 2ρ33
    b[S31] = i * e2;
    a[S31][RHO22] = -i * e2;
    a[S31][RHO33] = -i * e2.scale(two);
    a[S31][S31] = -g31;
    a[S31][S21] = i * e;
    a[S31][S32] = -i * e1;

    // n23 = ρ22 − ρ33
    a[S32][RHO22] = i * e;
    a[S32][RHO33] = -i * e;
    a[S32][S32] = -g32;
    a[S32][S21C] = i * e2;
    a[S32][S31] = -i * e1.conj();

    // Conjugate rows: conjugate every coefficient and swap each variable with its partner.
    let partner = |k: usize| match k {
        RHO22 | RHO33 => k,
        k if k % 2 == 0 => k + 1,
        k => k - 1,
    };
    for (row, conj_row) in [(S21, S21C), (S31, S31C), (S32, S32C)] {
        b[conj_row] = b[row].conj();
        for col in 0..DIM {
            a[conj_row][partner(col)] = a[row][col].conj();
        }
    }

    SteadySystem { matrix: a, rhs: b }
}

/// Linear response of σ32 to the IR amplitude: δσ32 ≈ along_e·δe + along_conj·δe*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrResponse<T> {
    pub along_e: C<T>,
    pub along_conj: C<T>,
}

struct Solved<T> {
    lu: Lu<T, DIM>,
    x: Vector<T, DIM>,
    state: PacketState<T>,
}

fn solve<T: Real>(p: &PacketParams<T>) -> Result<Solved<T>> {
    let system = build_steady_system(p);
    let lu = Lu::factor(&system.matrix);
    let cond = lu.condition();
    if !(cond <= T::lit(MAX_CONDITION)) {
        let zero_rates: Vec<String> = p
            .relaxation
            .named()
            .iter()
            .filter(|(_, v)| *v == T::zero())
            .map(|(n, _)| format!("{n} = 0"))
            .collect();
        let detail = if zero_rates.is_empty() {
            "steady-state system is ill-conditioned".to_string()
        } else {
            format!("steady state not unique with {}", zero_rates.join(", "))
        };
        return Err(Error::DegenerateParameters { condition: cond.to_f64_lossy(), detail });
    }
    let neg_b: Vector<T, DIM> = std::array::from_fn(|k| -system.rhs[k]);
    let x = lu.solve(&neg_b);
    let mut state = PacketState::from_vector(&x);
    state.residual = system.residual(&state);
    Ok(Solved { lu, x, state })
}

/// Unique steady state of the packet.
pub fn steady_state<T: Real>(p: &PacketParams<T>) -> Result<PacketState<T>> {
    solve(p).map(|s| s.state)
}

/// Steady state together with the exact linear response of σ32 to the IR
/// amplitude at the packet's current IR field.
pub fn steady_state_with_response<T: Real>(p: &PacketParams<T>) -> Result<(PacketState<T>, IrResponse<T>)> {
    let solved = solve(p)?;
    let response = ir_response(p, &solved);
    Ok((solved.state, response))
}

fn ir_response<T: Real>(p: &PacketParams<T>, solved: &Solved<T>) -> IrResponse<T> {
    // A is affine in (e, e*); recover both partial matrices from two probes.
    let probe = |e: C<T>| {
        let mut q = *p;
        q.drives.e = e;
        build_steady_system(&q).matrix
    };
    let base = probe(C::zero());
    let d_one = probe(C::new(T::one(), T::zero()));
    let d_i = probe(im_unit());
    let i = im_unit::<T>();
    let half = T::lit(0.5);
    let mut a_e = [[C::zero(); DIM]; DIM];
    let mut a_conj = [[C::zero(); DIM]; DIM];
    for r in 0..DIM {
        for c in 0..DIM {
            let p1 = d_one[r][c] - base[r][c];
            let pi = d_i[r][c] - base[r][c];
            a_e[r][c] = (p1 - i * pi).scale(half);
            a_conj[r][c] = (p1 + i * pi).scale(half);
        }
    }
    let solve_partial = |da: &Matrix<T, DIM>| {
        let v = mat_vec(da, &solved.x);
        let neg: Vector<T, DIM> = std::array::from_fn(|k| -v[k]);
        solved.lu.solve(&neg)
    };
    let dx_e = solve_partial(&a_e);
    let dx_conj = solve_partial(&a_conj);
    IrResponse {
        along_e: (dx_e[S32] + dx_conj[S32C].conj()).scale(half),
        along_conj: (dx_conj[S32] + dx_e[S32C].conj()).scale(half),
    }
}

/// σ32 at vanishing IR field and its first-order response to an IR probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResponse<T> {
    /// Parametric source σ32(e = 0).
    pub source: C<T>,
    pub response: IrResponse<T>,
    pub gamma: GammaFactors<T>,
    pub state: PacketState<T>,
}

/// Perturbative IR response of the packet. The IR amplitude in `p` is
/// ignored and taken as zero.
pub fn sigma32_perturbative<T: Real>(p: &PacketParams<T>) -> Result<ProbeResponse<T>> {
    let mut q = *p;
    q.drives.e = C::zero();
    let gamma = q.gamma_factors();
    let magnitude = gamma.g32_tilde.norm();
    if !(magnitude > T::epsilon() * q.relaxation.gamma32.max(T::min_positive_value())) {
        return Err(Error::Singularity { magnitude: magnitude.to_f64_lossy() });
    }
    let solved = solve(&q)?;
    let response = ir_response(&q, &solved);
    Ok(ProbeResponse { source: solved.state.sigma32, response, gamma, state: solved.state })
}
