//! Primitive gates and the composite sequences of the detection protocol:
//! state preparation, drives, system-detector couplings, engineered
//! relaxation, and detector readout rotations.
//!
//! The system qubit is index 0 in every register this crate builds; see
//! [`crate::sim::QubitLayout`] for the full assignment.

use crate::error::{Error, Result};
use crate::sim::DensityMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// Pauli basis in which a coupling or relaxation acts on the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliBasis {
    X,
    Z,
}

/// A named unitary primitive with bound qubit indices.
///
/// Two-qubit matrices are written with the first-listed qubit as the most
/// significant bit of the 4×4 index (|q_first q_second⟩ ordering).
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    Hadamard {
        qubit: usize,
    },
    /// diag(1, e^{iθ})
    Phase {
        qubit: usize,
        angle: f64,
    },
    /// (1/√2) [[1, −e^{iλ}], [e^{iφ}, e^{i(φ+λ)}]]
    U2 {
        qubit: usize,
        phi: f64,
        lambda: f64,
    },
    /// exp(−i·angle·σx)
    RotX {
        qubit: usize,
        angle: f64,
    },
    /// exp(−i·angle·σz)
    RotZ {
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// Rotation R_y(angle) on `target` when `control` is set:
    /// |0⟩→cos(θ/2)|0⟩+sin(θ/2)|1⟩, |1⟩→cos(θ/2)|1⟩−sin(θ/2)|0⟩.
    ControlledRotation {
        control: usize,
        target: usize,
        angle: f64,
    },
    /// exp(i·angle·σ_basis ⊗ σz) on (qubit_a, qubit_b); diagonal for basis Z
    /// with |00⟩ entry e^{i·angle}.
    Coupling {
        qubit_a: usize,
        qubit_b: usize,
        basis: PauliBasis,
        angle: f64,
    },
}

/// Dense matrix of a gate, sized by arity.
#[derive(Debug, Clone, Copy)]
pub enum GateMatrix {
    Single([[Complex64; 2]; 2]),
    Two([[Complex64; 4]; 4]),
}

const C0: Complex64 = Complex64::ZERO;
const C1: Complex64 = Complex64::ONE;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl GateOp {
    /// Qubits the gate acts on, first-listed = high bit of the matrix index.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Hadamard { qubit }
            | GateOp::Phase { qubit, .. }
            | GateOp::U2 { qubit, .. }
            | GateOp::RotX { qubit, .. }
            | GateOp::RotZ { qubit, .. } => vec![qubit],
            GateOp::Cnot { control, target }
            | GateOp::ControlledRotation {
                control, target, ..
            } => vec![control, target],
            GateOp::Coupling {
                qubit_a, qubit_b, ..
            } => vec![qubit_a, qubit_b],
        }
    }

    /// Dense matrix, validated to be unitary within 1e-12.
    pub fn matrix(&self) -> Result<GateMatrix> {
        let m = self.raw_matrix()?;
        check_unitary(&m).map_err(|worst| {
            Error::internal(format!(
                "gate {self:?} produced a non-unitary matrix (deviation {worst:.3e})"
            ))
        })?;
        Ok(m)
    }

    fn raw_matrix(&self) -> Result<GateMatrix> {
        let finite = |vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::internal(format!(
                    "gate {self:?} has a non-finite parameter"
                )))
            }
        };
        let s = 1.0 / SQRT_2;
        Ok(match *self {
            GateOp::Hadamard { .. } => GateMatrix::Single([
                [c(s, 0.0), c(s, 0.0)],
                [c(s, 0.0), c(-s, 0.0)],
            ]),
            GateOp::Phase { angle, .. } => {
                finite(&[angle])?;
                GateMatrix::Single([[C1, C0], [C0, Complex64::from_polar(1.0, angle)]])
            }
            GateOp::U2 { phi, lambda, .. } => {
                finite(&[phi, lambda])?;
                GateMatrix::Single([
                    [c(s, 0.0), -Complex64::from_polar(s, lambda)],
                    [
                        Complex64::from_polar(s, phi),
                        Complex64::from_polar(s, phi + lambda),
                    ],
                ])
            }
            GateOp::RotX { angle, .. } => {
                finite(&[angle])?;
                let (ca, sa) = (angle.cos(), angle.sin());
                GateMatrix::Single([
                    [c(ca, 0.0), c(0.0, -sa)],
                    [c(0.0, -sa), c(ca, 0.0)],
                ])
            }
            GateOp::RotZ { angle, .. } => {
                finite(&[angle])?;
                GateMatrix::Single([
                    [Complex64::from_polar(1.0, -angle), C0],
                    [C0, Complex64::from_polar(1.0, angle)],
                ])
            }
            GateOp::Cnot { .. } => GateMatrix::Two([
                [C1, C0, C0, C0],
                [C0, C1, C0, C0],
                [C0, C0, C0, C1],
                [C0, C0, C1, C0],
            ]),
            GateOp::ControlledRotation { angle, .. } => {
                finite(&[angle])?;
                let (ch, sh) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                GateMatrix::Two([
                    [C1, C0, C0, C0],
                    [C0, C1, C0, C0],
                    [C0, C0, c(ch, 0.0), c(-sh, 0.0)],
                    [C0, C0, c(sh, 0.0), c(ch, 0.0)],
                ])
            }
            GateOp::Coupling { basis, angle, .. } => {
                finite(&[angle])?;
                let plus = Complex64::from_polar(1.0, angle);
                let minus = Complex64::from_polar(1.0, -angle);
                match basis {
                    PauliBasis::Z => GateMatrix::Two([
                        [plus, C0, C0, C0],
                        [C0, minus, C0, C0],
                        [C0, C0, minus, C0],
                        [C0, C0, C0, plus],
                    ]),
                    PauliBasis::X => {
                        // cos·I + i·sin·(σx ⊗ σz)
                        let (ca, sa) = (angle.cos(), angle.sin());
                        let d = c(ca, 0.0);
                        let (up, dn) = (c(0.0, sa), c(0.0, -sa));
                        GateMatrix::Two([
                            [d, C0, up, C0],
                            [C0, d, C0, dn],
                            [up, C0, d, C0],
                            [C0, dn, C0, d],
                        ])
                    }
                }
            }
        })
    }
}

/// Returns Err(worst deviation) if U†U differs from the identity by more
/// than 1e-12 in any entry.
fn check_unitary(m: &GateMatrix) -> std::result::Result<(), f64> {
    fn check<const N: usize>(m: &[[Complex64; N]; N]) -> std::result::Result<(), f64> {
        let mut worst = 0.0f64;
        for r in 0..N {
            for col in 0..N {
                let dot: Complex64 = (0..N).map(|k| m[k][r].conj() * m[k][col]).sum();
                let expect = if r == col { C1 } else { C0 };
                worst = worst.max((dot - expect).norm());
            }
        }
        if worst > 1e-12 {
            Err(worst)
        } else {
            Ok(())
        }
    }
    match m {
        GateMatrix::Single(m) => check(m),
        GateMatrix::Two(m) => check(m),
    }
}

/// Gate sequence taking |0⟩ to cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩ up to a
/// global phase.
pub fn init_system(theta: f64, phi: f64, qubit: usize) -> Vec<GateOp> {
    vec![
        GateOp::Hadamard { qubit },
        GateOp::Phase {
            qubit,
            angle: theta,
        },
        GateOp::Hadamard { qubit },
        GateOp::Phase {
            qubit,
            angle: phi + FRAC_PI_2,
        },
    ]
}

/// Drive exp(−iα σx) in closed form.
pub fn drive_x(alpha: f64, qubit: usize) -> GateOp {
    GateOp::RotX {
        qubit,
        angle: alpha,
    }
}

/// Drive exp(−iβ σz) in closed form.
pub fn drive_z(beta: f64, qubit: usize) -> GateOp {
    GateOp::RotZ { qubit, angle: beta }
}

/// Phase/Hadamard decomposition of the full drive exp(−iβσz)·exp(−iασx);
/// equals the closed forms up to the global phase e^{i(α+β)}. Note the
/// doubled phase-gate angles.
pub fn drive_decomposition(alpha: f64, beta: f64, qubit: usize) -> Vec<GateOp> {
    vec![
        GateOp::Hadamard { qubit },
        GateOp::Phase {
            qubit,
            angle: 2.0 * alpha,
        },
        GateOp::Hadamard { qubit },
        GateOp::Phase {
            qubit,
            angle: 2.0 * beta,
        },
    ]
}

/// System-detector coupling exp(i·χ·σ_basis ⊗ σz) on (qubit_a, qubit_b).
/// A negative `chi` gives the inverse coupling.
pub fn coupling_gate(basis: PauliBasis, chi: f64, qubit_a: usize, qubit_b: usize) -> GateOp {
    GateOp::Coupling {
        qubit_a,
        qubit_b,
        basis,
        angle: chi,
    }
}

/// Engineered relaxation channel: strength, basis, and ancilla index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Relaxation probability in [0, 1].
    pub p: f64,
    pub basis: PauliBasis,
    /// Environment qubit; must be in |0⟩ when the circuit runs.
    pub env: usize,
}

/// Controlled-rotation angle realizing relaxation probability `p`:
/// cos(θ/2) = √(1−p).
pub fn controlled_rotation_angle(p: f64) -> f64 {
    2.0 * (1.0 - p).sqrt().acos()
}

/// Ancilla circuit for one relaxation event on (system = 0, `spec.env`).
///
/// With the environment in |0⟩, the reduced map on the system is the cold
/// amplitude-damping channel: populations (a², b²) → (a² + p·b², (1−p)·b²),
/// coherences scaled by √(1−p). Basis X conjugates the same map by Hadamard.
pub fn relaxation_circuit(spec: &ChannelSpec) -> Result<Vec<GateOp>> {
    if !(0.0..=1.0).contains(&spec.p) || !spec.p.is_finite() {
        return Err(Error::config(
            "p",
            format!("relaxation probability must be in [0, 1], got {}", spec.p),
        ));
    }
    let system = 0usize;
    let angle = controlled_rotation_angle(spec.p);
    let core = [
        GateOp::Cnot {
            control: spec.env,
            target: system,
        },
        GateOp::ControlledRotation {
            control: system,
            target: spec.env,
            angle,
        },
        GateOp::Cnot {
            control: spec.env,
            target: system,
        },
    ];
    Ok(match spec.basis {
        PauliBasis::Z => core.to_vec(),
        PauliBasis::X => {
            let h = GateOp::Hadamard { qubit: system };
            let mut seq = vec![h.clone()];
            seq.extend(core);
            seq.push(h);
            seq
        }
    })
}

/// Operator-sum form of the cold amplitude-damping channel,
/// M⁰ρM⁰† + M¹ρM¹† with M⁰ = diag(1, √(1−p)) and M¹ = [[0, √p], [0, 0]].
///
/// Deliberately a separate code path from [`relaxation_circuit`]; the two are
/// cross-checked against each other in tests.
pub fn kraus_oracle(p: f64, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::config(
            "p",
            format!("relaxation probability must be in [0, 1], got {p}"),
        ));
    }
    if rho_in.dim() != 2 {
        return Err(Error::internal("kraus_oracle expects a single-qubit state"));
    }
    rho_in.validate()?;

    let m0 = [[C1, C0], [C0, c((1.0 - p).sqrt(), 0.0)]];
    let m1 = [[C0, c(p.sqrt(), 0.0)], [C0, C0]];

    let apply = |m: &[[Complex64; 2]; 2]| -> [[Complex64; 2]; 2] {
        // m · ρ · m†
        let mut out = [[C0; 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                let mut sum = C0;
                for i in 0..2 {
                    for j in 0..2 {
                        sum += m[r][i] * rho_in.entry(i, j) * m[col][j].conj();
                    }
                }
                out[r][col] = sum;
            }
        }
        out
    };

    let (a, b) = (apply(&m0), apply(&m1));
    let entries = (0..2)
        .flat_map(|r| (0..2).map(move |col| (r, col)))
        .map(|(r, col)| a[r][col] + b[r][col])
        .collect();
    DensityMatrix::from_entries(2, entries)
}

/// Which quadrature of the detector coherence a readout run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutPart {
    Re,
    Im,
}

/// Post-rotation population difference p0 − p1 equals IM_READOUT_SIGN · Im G
/// for the Im readout (and Re G for the Re readout). Calibrated once against
/// the exact detector coherence; see the readout tests.
pub const IM_READOUT_SIGN: f64 = 1.0;

/// Detector rotation preceding a population measurement: Hadamard for the
/// real part, u2(π/2, −π/2) for the imaginary part.
pub fn readout_rotation(part: ReadoutPart, qubit: usize) -> GateOp {
    match part {
        ReadoutPart::Re => GateOp::Hadamard { qubit },
        ReadoutPart::Im => GateOp::U2 {
            qubit,
            phi: FRAC_PI_2,
            lambda: -FRAC_PI_2,
        },
    }
}
