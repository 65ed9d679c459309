//! Independent brute-force oracles for the integration and acceptance
//! suites. Everything here propagates states through dense 2^n × 2^n
//! matrices and explicit index arithmetic, deliberately avoiding the
//! stride-based kernels in the library.

// Each test target compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use num_complex::Complex64;
use qthermo_core::gates::{
    drive_x, drive_z, init_system, relaxation_circuit, ChannelSpec, GateMatrix, GateOp, PauliBasis,
};
use qthermo_core::protocol::ExperimentConfig;
use qthermo_core::sim::{QubitLayout, StateVector};

pub type CMat = Vec<Vec<Complex64>>;

pub fn identity(dim: usize) -> CMat {
    let mut m = vec![vec![Complex64::ZERO; dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::ONE;
    }
    m
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let dim = a.len();
    let mut out = vec![vec![Complex64::ZERO; dim]; dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut sum = Complex64::ZERO;
            for k in 0..dim {
                sum += a[r][k] * b[k][c];
            }
            out[r][c] = sum;
        }
    }
    out
}

/// Dense 2^n × 2^n embedding of a gate; first-listed qubit is the high bit
/// of the gate's own matrix index.
pub fn embed_gate(n_qubits: usize, gate: &GateOp) -> CMat {
    let qs = gate.qubits();
    let small: CMat = match gate.matrix().unwrap() {
        GateMatrix::Single(m) => m.iter().map(|r| r.to_vec()).collect(),
        GateMatrix::Two(m) => m.iter().map(|r| r.to_vec()).collect(),
    };
    let gate_mask: usize = qs.iter().map(|&q| 1usize << q).sum();
    let local = |global: usize| -> usize {
        let mut l = 0usize;
        for (pos, &q) in qs.iter().enumerate() {
            l |= ((global >> q) & 1) << (qs.len() - 1 - pos);
        }
        l
    };
    let dim = 1usize << n_qubits;
    let mut out = vec![vec![Complex64::ZERO; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            if i & !gate_mask == j & !gate_mask {
                out[i][j] = small[local(i)][local(j)];
            }
        }
    }
    out
}

/// Full circuit unitary: later gates multiply on the left.
pub fn circuit_unitary(n_qubits: usize, gates: &[GateOp]) -> CMat {
    let mut u = identity(1 << n_qubits);
    for g in gates {
        u = matmul(&embed_gate(n_qubits, g), &u);
    }
    u
}

/// Propagate |0…0⟩ through the dense circuit unitary.
pub fn propagate_ground(n_qubits: usize, gates: &[GateOp]) -> Vec<Complex64> {
    let u = circuit_unitary(n_qubits, gates);
    u.iter().map(|row| row[0]).collect()
}

/// ⟨0|ρ_D|1⟩ of the detector from raw amplitudes, by explicit bit sums.
pub fn detector_coherence(amps: &[Complex64], layout: &QubitLayout) -> Complex64 {
    let mask = 1usize << layout.detector;
    let mut sum = Complex64::ZERO;
    for (i, a) in amps.iter().enumerate() {
        if i & mask == 0 {
            sum += a * amps[i | mask].conj();
        }
    }
    sum
}

/// Brute-force G: dense propagation plus explicit coherence sum.
pub fn brute_force_g(n_qubits: usize, gates: &[GateOp], layout: &QubitLayout) -> Complex64 {
    let amps = propagate_ground(n_qubits, gates);
    detector_coherence(&amps, layout) / 0.5
}

/// Partial trace from the explicit 2^n × 2^n outer product ρ = |ψ⟩⟨ψ|,
/// summing index pairs directly. `keep[0]` is the high bit of the reduced
/// index, matching the library convention.
pub fn partial_trace_explicit(amps: &[Complex64], n_qubits: usize, keep: &[usize]) -> CMat {
    let dim_full = 1usize << n_qubits;
    let mut rho_full = vec![vec![Complex64::ZERO; dim_full]; dim_full];
    for i in 0..dim_full {
        for j in 0..dim_full {
            rho_full[i][j] = amps[i] * amps[j].conj();
        }
    }

    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let dim = 1usize << keep.len();
    let mut out = vec![vec![Complex64::ZERO; dim]; dim];
    let global = |kept_bits: usize, env_bits: usize| -> usize {
        let mut g = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            g |= ((kept_bits >> (keep.len() - 1 - pos)) & 1) << q;
        }
        for (pos, &q) in traced.iter().enumerate() {
            g |= ((env_bits >> pos) & 1) << q;
        }
        g
    };
    for r in 0..dim {
        for c in 0..dim {
            for e in 0..(1usize << traced.len()) {
                out[r][c] += rho_full[global(r, e)][global(c, e)];
            }
        }
    }
    out
}

/// Direct density-matrix oracles for the three averages, computed on the
/// three-qubit register (system + two environments, no detector): ΔU is the
/// change in excited-level occupation between the final σz basis and the
/// initial σx basis, Q is the total quanta deposited in the environments,
/// and W = ΔU + Q.
pub fn density_matrix_averages(cfg: &ExperimentConfig) -> (f64, f64, f64) {
    let prep = init_system(cfg.theta, cfg.phi, 0);
    let state0 = StateVector::new(3).unwrap().apply_all(&prep).unwrap();
    let rho0 = state0.reduced_density(&[0]).unwrap();
    // n_x = (1 − σx)/2, and ⟨σx⟩ = 2·Re ρ01
    let nx0 = (1.0 - 2.0 * rho0.entry(0, 1).re) / 2.0;

    let mut seq = prep;
    seq.push(drive_x(cfg.alpha, 0));
    seq.extend(
        relaxation_circuit(&ChannelSpec {
            p: cfg.p,
            basis: PauliBasis::X,
            env: 1,
        })
        .unwrap(),
    );
    seq.push(drive_z(cfg.beta, 0));
    seq.extend(
        relaxation_circuit(&ChannelSpec {
            p: cfg.p,
            basis: PauliBasis::Z,
            env: 2,
        })
        .unwrap(),
    );
    let final_state = StateVector::new(3).unwrap().apply_all(&seq).unwrap();

    let nz_fin = final_state.reduced_density(&[0]).unwrap().entry(1, 1).re;
    let env1 = final_state.reduced_density(&[1]).unwrap().entry(1, 1).re;
    let env2 = final_state.reduced_density(&[2]).unwrap().entry(1, 1).re;

    let du = nz_fin - nx0;
    let q = env1 + env2;
    (du, q, du + q)
}
