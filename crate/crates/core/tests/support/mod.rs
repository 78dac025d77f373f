#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triwave_core::levels::{Detunings, RelaxationSpec};
use triwave_core::liouville::{Drives, PacketParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut impl Rng, scale: f64) -> C {
    C::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

pub fn rand_relaxation(r: &mut impl Rng) -> RelaxationSpec<f64> {
    RelaxationSpec::new(
        [r.gen_range(0.5..2.0), r.gen_range(0.5..2.0), r.gen_range(0.5..2.0)],
        r.gen_range(0.05..1.0),
        r.gen_range(0.05..1.0),
        r.gen_range(0.05..1.0),
        r.gen_range(0.1..3.0),
    )
    .unwrap()
}

pub fn rand_closed_detunings(r: &mut impl Rng, scale: f64) -> Detunings<f64> {
    let d21 = r.gen_range(-scale..scale);
    let d32 = r.gen_range(-scale..scale);
    Detunings { d21, d31: d21 + d32, d32 }
}

pub fn rand_packet(r: &mut impl Rng) -> PacketParams<f64> {
    let drives = Drives::new(rand_c(r, 1.5), rand_c(r, 1.5), rand_c(r, 1.0));
    PacketParams::new(rand_closed_detunings(r, 2.0), rand_relaxation(r), drives).unwrap()
}

/// Time derivative of the density matrix written directly as
/// −i[H, ρ] plus relaxation, with the rotating-frame Hamiltonian
/// H = [[0, −e1*, −e2*], [−e1, Δ21, −e*], [−e2, −e, Δ31]].
///
/// `x` holds [ρ22, ρ33, ρ21, ρ12, ρ31, ρ13, ρ32, ρ23] as independent entries
/// and ρ11 = 1 − ρ22 − ρ33. Valid for closed-loop detunings only.
pub fn oracle_derivative(p: &PacketParams<f64>, x: &[C; 8]) -> [C; 8] {
    let d = p.effective_detunings();
    let Drives { e1, e2, e } = *p.drives();
    let r = p.relaxation();
    let one = C::new(1.0, 0.0);
    let h = [
        [C::new(0.0, 0.0), -e1.conj(), -e2.conj()],
        [-e1, C::new(d.d21, 0.0), -e.conj()],
        [-e2, -e, C::new(d.d31, 0.0)],
    ];
    let rho = [
        [one - x[0] - x[1], x[3], x[5]],
        [x[2], x[0], x[7]],
        [x[4], x[6], x[1]],
    ];
    let comm = |i: usize, k: usize| {
        let mut s = C::new(0.0, 0.0);
        for j in 0..3 {
            s += h[i][j] * rho[j][k] - rho[i][j] * h[j][k];
        }
        -C::i() * s
    };
    let g = |i: usize, k: usize| match (i.max(k), i.min(k)) {
        (1, 0) => r.gamma21,
        (2, 0) => r.gamma31,
        _ => r.gamma32,
    };
    let coh = |i: usize, k: usize| comm(i, k) - rho[i][k] * g(i, k);
    [
        comm(1, 1) + rho[2][2] * r.r32 - rho[1][1] * r.r21,
        comm(2, 2) + rho[0][0] * r.pump - rho[2][2] * (r.r31 + r.r32),
        coh(1, 0),
        coh(0, 1),
        coh(2, 0),
        coh(0, 2),
        coh(2, 1),
        coh(1, 2),
    ]
}

pub fn state_vector(s: &triwave_core::liouville::PacketState<f64>) -> [C; 8] {
    [
        C::new(s.rho[1], 0.0),
        C::new(s.rho[2], 0.0),
        s.sigma21,
        s.sigma21.conj(),
        s.sigma31,
        s.sigma31.conj(),
        s.sigma32,
        s.sigma32.conj(),
    ]
}

pub fn max_norm(v: &[C]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}
