//! Assembling the physical model from a configuration and evaluating it.

use num_complex::Complex64 as C;
use triwave_core::analytic::{
    eq10a_eq11_inhomogeneous, eq13_ir_field_holeburning, eq6_ir_field, eq7_ir_field_homogeneous, eta_parameter, AnalyticContext, Loss,
};
use triwave_core::cavity::{
    clamp_drives, coupling_g2, fixed_point_residual, output_power, phase_mismatch, self_consistent_ir, ClampTarget, CavityModeSpec,
    Damping, Device, IrProblem, IrSolution, OpticalMode, SolverOptions,
};
use triwave_core::ensemble::{ensemble_average, holeburning_regime, BroadeningSpec, LineShape, QuadratureRule};
use triwave_core::levels::{closed_loop_detunings, Detunings, DipoleSet, LevelScheme, RelaxationSpec};
use triwave_core::liouville::{Drives, PacketParams};
use triwave_core::units::loss_cm_to_rate;

use crate::config::ScenarioConfig;
use crate::emit::{Cell, Record};
use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveSetting {
    Fixed(Drives<f64>),
    /// Gain-clamped amplitudes with the given phases.
    Clamp { phase1: f64, phase2: f64 },
}

/// A validated scenario; the optical drives are still unresolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub levels: LevelScheme<f64>,
    pub dipoles: DipoleSet<f64>,
    pub relaxation: RelaxationSpec<f64>,
    pub detunings: Detunings<f64>,
    /// Optical and IR field frequencies, meV.
    pub omega1: f64,
    pub omega2: f64,
    pub omega: f64,
    pub broadening: BroadeningSpec<f64>,
    /// cm⁻³
    pub density: f64,
    pub ir: CavityModeSpec<f64>,
    pub opt: [CavityModeSpec<f64>; 2],
    /// Intensity losses (cm⁻¹) of the IR and the two optical modes.
    pub losses: [f64; 3],
    /// Coupling constants g², g1², g2² (meV²).
    pub couplings: [f64; 3],
    pub device: Device<f64>,
    pub drives: DriveSetting,
    pub solver: SolverOptions<f64>,
}

fn ctx(what: &str) -> impl FnOnce(triwave_core::Error) -> RunError + '_ {
    move |e| RunError::model(what)(e)
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        let n = |k: &str| cfg.number(k);
        let levels = LevelScheme::from_transitions(n("levels.omega21"), n("levels.omega32")).map_err(ctx("levels"))?;
        let dipoles = DipoleSet::new(n("dipoles.d21"), n("dipoles.d31"), n("dipoles.d32")).map_err(ctx("dipoles"))?;
        let relaxation = RelaxationSpec::new(
            [n("relaxation.gamma21"), n("relaxation.gamma31"), n("relaxation.gamma32")],
            n("relaxation.r32"),
            n("relaxation.r31"),
            n("relaxation.r21"),
            n("relaxation.pump"),
        )
        .map_err(ctx("relaxation"))?;

        let omega1 = levels.omega21() - n("drives.detuning1");
        let omega2 = levels.omega31() - n("drives.detuning2");
        let omega = omega2 - omega1;
        if !(omega1 > 0.0 && omega > 0.0) {
            return Err(RunError::model("drives")(triwave_core::Error::Domain(format!(
                "field frequencies must be positive (ω1 = {omega1}, ω = {omega} meV)"
            ))));
        }
        let detunings = closed_loop_detunings(&levels, omega1, omega2, omega).map_err(ctx("drives"))?;

        let kind = match cfg.choice("broadening.kind") {
            "gaussian" => LineShape::Gaussian,
            "lorentzian" => LineShape::Lorentzian,
            _ => LineShape::Homogeneous,
        };
        let rule = match cfg.choice("broadening.rule") {
            "standard" => QuadratureRule::Standard,
            "adaptive" => QuadratureRule::Adaptive,
            _ => QuadratureRule::Auto,
        };
        let widths = [n("broadening.u21"), n("broadening.u31"), n("broadening.u32")];
        let broadening = if kind == LineShape::Homogeneous && widths.iter().all(|&u| u == 0.0) {
            BroadeningSpec::homogeneous()
        } else {
            BroadeningSpec::new(kind, widths).map_err(ctx("broadening"))?
        };
        let broadening = broadening
            .with_nodes(cfg.count("broadening.nodes"))
            .and_then(|b| b.with_cutoff(n("broadening.cutoff")))
            .map_err(ctx("broadening"))?
            .with_rule(rule);

        let density = n("medium.density");
        let mode = |prefix: &str, omega_c: f64, omega: f64| -> Result<(CavityModeSpec<f64>, f64), RunError> {
            let index = n(&format!("{prefix}.index"));
            let loss = n(&format!("{prefix}.loss"));
            let kappa = loss_cm_to_rate(loss, omega, index).map_err(ctx(prefix))?;
            let m = CavityModeSpec::new(omega_c, kappa, n(&format!("{prefix}.confinement")), index).map_err(ctx(prefix))?;
            Ok((m, loss))
        };
        let (ir, loss) = mode("ir", omega + n("ir.detuning"), omega)?;
        let (opt1, loss1) = mode("opt1", omega1, omega1)?;
        let (opt2, loss2) = mode("opt2", omega2, omega2)?;
        let g = |d: f64, w: f64, m: &CavityModeSpec<f64>| coupling_g2(density, d, w, m.index(), m.conf()).map(|c| c.g2).map_err(ctx("medium"));
        let couplings = [g(dipoles.d32, omega, &ir)?, g(dipoles.d21, omega1, &opt1)?, g(dipoles.d31, omega2, &opt2)?];

        let device = Device {
            length_um: n("device.length"),
            width_um: n("device.width"),
            thickness_um: n("device.thickness"),
            outcoupling: n("device.outcoupling"),
        };
        device.validate().map_err(ctx("device"))?;

        let (phase1, phase2) = (n("drives.phase1"), n("drives.phase2"));
        let drives = match cfg.choice("drives.mode") {
            "fixed" => DriveSetting::Fixed(Drives::optical(C::from_polar(n("drives.e1"), phase1), C::from_polar(n("drives.e2"), phase2))),
            _ => DriveSetting::Clamp { phase1, phase2 },
        };
        let damping = cfg.damping().map_or(Damping::Auto, Damping::Fixed);
        let solver = SolverOptions { damping, max_iter: cfg.count("solver.max_iter"), tolerance: n("solver.tolerance") };

        Ok(Scenario {
            levels,
            dipoles,
            relaxation,
            detunings,
            omega1,
            omega2,
            omega,
            broadening,
            density,
            ir,
            opt: [opt1, opt2],
            losses: [loss, loss1, loss2],
            couplings,
            device,
            drives,
            solver,
        })
    }

    /// Packet parameters with the given drives and no IR field.
    pub fn packet(&self, drives: Drives<f64>) -> Result<PacketParams<f64>, RunError> {
        PacketParams::new(self.detunings, self.relaxation, drives).map_err(ctx("packet"))
    }

    /// Optical drive amplitudes, clamping them if requested.
    pub fn resolve_drives(&self) -> Result<Drives<f64>, RunError> {
        match self.drives {
            DriveSetting::Fixed(d) => Ok(d),
            DriveSetting::Clamp { phase1, phase2 } => {
                let target = ClampTarget {
                    g1_sq: self.couplings[1],
                    g2_sq: self.couplings[2],
                    kappa1: self.opt[0].kappa(),
                    kappa2: self.opt[1].kappa(),
                    phase1,
                    phase2,
                };
                clamp_drives(&self.packet(Drives::default())?, &self.broadening, &target).map_err(ctx("gain clamp"))
            }
        }
    }

    pub fn problem(&self, drives: Drives<f64>) -> Result<IrProblem<f64>, RunError> {
        Ok(IrProblem {
            packet: self.packet(drives)?,
            broadening: self.broadening,
            g2: self.couplings[0],
            mode: self.ir,
            omega: self.omega,
            dipole: self.dipoles.d32,
            optical: [
                OpticalMode { dipole: self.dipoles.d21, mode: self.opt[0] },
                OpticalMode { dipole: self.dipoles.d31, mode: self.opt[1] },
            ],
            device: self.device,
        })
    }

    pub fn analytic_context(&self, drives: &Drives<f64>) -> AnalyticContext<f64> {
        let [u21, u31, u32] = self.broadening.widths();
        AnalyticContext {
            omega: self.omega,
            omega1: self.omega1,
            omega2: self.omega2,
            d: self.dipoles.d32,
            d1: self.dipoles.d21,
            d2: self.dipoles.d31,
            kappa: self.ir.kappa(),
            kappa1: self.opt[0].kappa(),
            kappa2: self.opt[1].kappa(),
            conf: self.ir.conf(),
            conf1: self.opt[0].conf(),
            conf2: self.opt[1].conf(),
            relaxation: self.relaxation,
            u21,
            u31,
            u32,
            detunings: self.detunings,
            e1: drives.e1,
            e2: drives.e2,
        }
    }
}

/// Everything one scenario evaluation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub drives: Drives<f64>,
    pub solution: IrSolution<f64>,
    /// Fixed-point residual re-evaluated on a fresh quadrature grid.
    pub certificate: f64,
    pub power_mw: f64,
    pub record: Record,
}

pub fn evaluate(s: &Scenario) -> Result<Outcome, RunError> {
    let drives = s.resolve_drives()?;
    let problem = s.problem(drives)?;
    let sol = self_consistent_ir(&problem, &s.solver).map_err(ctx("IR fixed point"))?;
    let certificate = fixed_point_residual(&problem, sol.e).map_err(ctx("certificate"))?;
    let uncapped_power = output_power(sol.e, s.dipoles.d32, &s.ir, &s.device);
    let power_mw = if sol.cap_applied && sol.uncapped_flux > 0.0 {
        uncapped_power * sol.photon_flux / sol.uncapped_flux
    } else {
        uncapped_power
    };

    let ctx_a = s.analytic_context(&drives);
    let at_zero = ensemble_average(&problem.packet, &s.broadening).map_err(ctx("weak-IR ensemble"))?;
    let weak = eq6_ir_field(&ctx_a, s.couplings[0], at_zero.ir_source_sum());
    let homogeneous = s.broadening.kind() == LineShape::Homogeneous;
    let centered = s.detunings.d21 == 0.0 && s.detunings.d31 == 0.0;
    let clamped = eq7_ir_field_homogeneous(&ctx_a);
    let inhom = eq10a_eq11_inhomogeneous(&ctx_a);
    let holes = eq13_ir_field_holeburning(&ctx_a).ok();
    let holeburning_valid = holes.is_some() && !homogeneous && holeburning_regime(&problem.packet, &s.broadening).is_empty();
    let eta = eta_parameter(Loss::PerCm(s.losses[1]), s.opt[0].conf(), Loss::PerCm(s.losses[0]), s.ir.conf()).ok();
    let pm = phase_mismatch(s.opt[0].kx(), s.opt[1].kx(), s.ir.kx(), s.device.length_um);

    let ens = &sol.ensemble;
    let columns: Vec<(&str, Cell)> = vec![
        ("omega_mev", Cell::num(s.omega)),
        ("e1_abs", Cell::num(drives.e1.norm())),
        ("e2_abs", Cell::num(drives.e2.norm())),
        ("e_abs", Cell::num(sol.e.norm())),
        ("e_re", Cell::num(sol.e.re)),
        ("e_im", Cell::num(sol.e.im)),
        ("converged", Cell::Bool(sol.converged)),
        ("iterations", Cell::Int(sol.iterations as u64)),
        ("residual", Cell::num(sol.residual)),
        ("certificate", Cell::num(certificate)),
        ("damping", Cell::num(sol.damping)),
        ("weak_ir", Cell::Bool(sol.weak_ir)),
        ("intensity_w_cm2", Cell::num(sol.intensity)),
        ("photon_flux", Cell::num(sol.photon_flux)),
        ("uncapped_flux", Cell::num(sol.uncapped_flux)),
        ("opt1_flux", Cell::num(sol.optical_flux[0])),
        ("opt2_flux", Cell::num(sol.optical_flux[1])),
        ("cap_applied", Cell::Bool(sol.cap_applied)),
        ("power_mw", Cell::num(power_mw)),
        ("n12", Cell::num(ens.n12())),
        ("n13", Cell::num(ens.n13())),
        ("n23", Cell::num(ens.n23())),
        ("min_n23", Cell::num(ens.min_n23)),
        ("inversionless", Cell::Bool(ens.min_n23 >= 0.0)),
        ("g2", Cell::num(s.couplings[0])),
        ("kappa", Cell::num(s.ir.kappa())),
        ("eta", Cell::opt(eta)),
        ("delta_k", Cell::num(pm.delta_k)),
        ("phase_matched", Cell::Bool(pm.matched)),
        ("weak_ir_abs", Cell::num(weak.e.norm())),
        ("weak_ir_valid", Cell::Bool(weak.within_gate)),
        ("clamped_abs", Cell::num(clamped)),
        ("clamped_valid", Cell::Bool(homogeneous && centered)),
        ("inhomogeneous_abs", Cell::num(inhom.e_abs)),
        ("inhomogeneous_intensity_ratio", Cell::num(inhom.intensity_ratio)),
        ("inhomogeneous_valid", Cell::Bool(!homogeneous && centered && inhom.within_gate)),
        ("holeburning_abs", Cell::opt(holes)),
        ("holeburning_valid", Cell::Bool(holeburning_valid && centered)),
    ];
    let record = columns.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok(Outcome { drives, solution: sol, certificate, power_mw, record })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Record, RunError> {
    evaluate(&Scenario::from_config(cfg)?).map(|o| o.record)
}
