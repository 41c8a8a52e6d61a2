//! Figure presets. Each name maps to one or more sweeps whose rows are
//! concatenated in the listed order.
//!
//! Preset choices:
//! - fig2: the (p_Y, p_Z) grid spans [0, 0.45] in 19 steps per axis.
//! - fig3: fixed μ and p values per panel are the constants below.
//! - fig5: fixed-unitary capacity uses the key-rate optimal unitary for the
//!   channel, (π/2, 0, 0) for phase flip, (0, π/4, 0) for bit-phase flip and I otherwise.

use std::f64::consts::PI;

use super::{Mode, SweepAxis, SweepSpec};
use crate::channels::NoiseKind;
use crate::error::{Error, Result};
use crate::optimize::OptimizerSettings;
use crate::protocols::Protocol;

pub const PRESET_NAMES: [&str; 21] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e",
    "fig3f", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b", "fig5c", "fig5d",
];

const FIG3_MU: [f64; 2] = [0.35, 0.7];
const FIG3_P: [f64; 4] = [0.05, 0.10, 0.15, 0.17];
const FIG4_ALPHA: [f64; 4] = [0.0, 0.35, 0.7, 1.0];
const FIG2_PX: [f64; 3] = [0.0, 0.02, 0.05];

fn base(protocol: Protocol, kind: NoiseKind, modes: &[Mode]) -> SweepSpec {
    let d = OptimizerSettings::default();
    SweepSpec {
        protocol,
        kind,
        p: 0.0,
        mu: 0.0,
        alpha: None,
        p_x: None,
        pauli_probs: None,
        axis: SweepAxis::P,
        from: 0.0,
        to: 0.5,
        steps: 51,
        modes: modes.to_vec(),
        fixed_unitary: None,
        grid_n: d.grid_n,
        refine_tol: d.refine_tol,
    }
}

pub fn figure_preset(name: &str) -> Result<Vec<SweepSpec>> {
    let rates = [Mode::Adaptive, Mode::Conventional, Mode::Delta];
    let unknown = || Error::UnknownPreset(name.to_string());
    let (fig, panel) = name.split_at(name.len().min(4));
    let panel = match panel.as_bytes() {
        [c @ b'a'..=b'f'] => (c - b'a') as usize,
        _ => return Err(unknown()),
    };
    let specs = match (fig, panel) {
        ("fig1", 0..=3) => {
            let kind = [NoiseKind::BitFlip, NoiseKind::PhaseFlip, NoiseKind::BitPhaseFlip, NoiseKind::AmplitudeDamping]
                [panel];
            Protocol::ALL.iter().map(|&pr| base(pr, kind, &rates)).collect()
        }
        ("fig2", 0..=2) => {
            let mut s = base(Protocol::Sdc, NoiseKind::GeneralPauli, &rates);
            s.axis = SweepAxis::PyPzGrid;
            s.p_x = Some(FIG2_PX[panel]);
            s.to = 0.45;
            s.steps = 19;
            vec![s]
        }
        ("fig3", 0..=5) => {
            let (protocol, kind) = match panel / 2 {
                0 => (Protocol::Sdc, NoiseKind::PhaseFlip),
                1 => (Protocol::Sdc, NoiseKind::BitPhaseFlip),
                _ => (Protocol::Lm05, NoiseKind::BitPhaseFlip),
            };
            if panel % 2 == 0 {
                FIG3_MU
                    .iter()
                    .map(|&mu| SweepSpec { mu, ..base(protocol, kind, &rates) })
                    .collect()
            } else {
                FIG3_P
                    .iter()
                    .map(|&p| SweepSpec { p, axis: SweepAxis::Mu, to: 1.0, ..base(protocol, kind, &rates) })
                    .collect()
            }
        }
        ("fig4", 0..=3) => {
            let (protocol, kind) = [
                (Protocol::Sdc, NoiseKind::NmPhaseFlip),
                (Protocol::Sdc, NoiseKind::NmBitPhaseFlip),
                (Protocol::Lm05, NoiseKind::NmBitPhaseFlip),
                (Protocol::Bb84TwoWay, NoiseKind::NmBitPhaseFlip),
            ][panel];
            FIG4_ALPHA
                .iter()
                .map(|&a| SweepSpec { alpha: Some(a), ..base(protocol, kind, &rates) })
                .collect()
        }
        ("fig5", 0..=3) => {
            let (kind, u) = [
                (NoiseKind::BitFlip, [0.0, 0.0, 0.0]),
                (NoiseKind::PhaseFlip, [PI / 2.0, 0.0, 0.0]),
                (NoiseKind::BitPhaseFlip, [0.0, PI / 4.0, 0.0]),
                (NoiseKind::Depolarizing, [0.0, 0.0, 0.0]),
            ][panel];
            let modes = [Mode::Adaptive, Mode::Conventional, Mode::Delta, Mode::DcCapacity, Mode::DcCapacityFixed];
            vec![SweepSpec { fixed_unitary: Some(u), ..base(Protocol::Sdc, kind, &modes) }]
        }
        _ => return Err(unknown()),
    };
    Ok(specs)
}
