//! Dense pure-state simulator for small qubit registers.
//!
//! Index convention, used everywhere in this crate: basis-state index `i`
//! assigns qubit `q` the bit `(i >> q) & 1`, so qubit 0 is the fastest-varying
//! (least significant) bit. Where an explicit small matrix or an ordered
//! subsystem list appears (two-qubit gate matrices, `reduced_density` keep
//! lists), the *first listed* qubit is the most significant bit of the local
//! index, matching the usual |q_a q_b⟩ ket notation.

use crate::error::{Error, Result};
use crate::gates::{GateMatrix, GateOp};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Largest register size supported by the dense simulator.
pub const MAX_QUBITS: usize = 4;

const NORM_TOL: f64 = 1e-12;

/// Fixed qubit assignment for the four-qubit detection register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitLayout {
    pub system: usize,
    pub detector: usize,
    pub env1: usize,
    pub env2: usize,
}

impl Default for QubitLayout {
    fn default() -> Self {
        QubitLayout {
            system: 0,
            detector: 1,
            env1: 2,
            env2: 3,
        }
    }
}

impl QubitLayout {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let idx = [self.system, self.detector, self.env1, self.env2];
        for (k, &a) in idx.iter().enumerate() {
            if a >= n_qubits {
                return Err(Error::internal(format!(
                    "layout qubit index {a} out of range for {n_qubits} qubits"
                )));
            }
            if idx[..k].contains(&a) {
                return Err(Error::internal("layout qubit indices must be distinct"));
            }
        }
        Ok(())
    }
}

/// Pure state of an `n`-qubit register, 1 ≤ n ≤ 4.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {n_qubits}"),
            ));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Build a state from explicit amplitudes; must be normalized and finite.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {n_qubits}"),
            ));
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::internal(format!(
                "amplitude vector has length {}, expected {}",
                amps.len(),
                1 << n_qubits
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::internal("amplitudes must be finite"));
        }
        let state = StateVector { n_qubits, amps };
        if (state.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::internal(format!(
                "state norm {} is not 1",
                state.norm()
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply one gate, returning the transformed state. The input is left
    /// untouched; states are cheap to copy at these sizes.
    pub fn apply_gate(&self, gate: &GateOp) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    /// Apply a time-ordered gate sequence (first element acts first).
    pub fn apply_all(&self, gates: &[GateOp]) -> Result<StateVector> {
        let mut out = self.clone();
        for g in gates {
            out.apply_gate_mut(g)?;
        }
        Ok(out)
    }

    fn apply_gate_mut(&mut self, gate: &GateOp) -> Result<()> {
        for &q in gate.qubits().iter() {
            if q >= self.n_qubits {
                return Err(Error::internal(format!(
                    "gate {gate:?} addresses qubit {q}, register has {} qubits",
                    self.n_qubits
                )));
            }
        }
        match gate.matrix()? {
            GateMatrix::Single(m) => {
                let q = gate.qubits()[0];
                self.apply_single(q, &m);
            }
            GateMatrix::Two(m) => {
                let qs = gate.qubits();
                self.apply_two(qs[0], qs[1], &m);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, q: usize, m: &[[Complex64; 2]; 2]) {
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `qa` is the high bit of the 4×4 matrix index, `qb` the low bit.
    fn apply_two(&mut self, qa: usize, qb: usize, m: &[[Complex64; 4]; 4]) {
        let (ma, mb) = (1usize << qa, 1usize << qb);
        for i in 0..self.amps.len() {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | mb, i | ma, i | ma | mb];
                let old = idx.map(|k| self.amps[k]);
                for r in 0..4 {
                    self.amps[idx[r]] = (0..4).map(|c| m[r][c] * old[c]).sum();
                }
            }
        }
    }

    /// Marginal probabilities (p0, p1) of one qubit in the computational basis.
    pub fn measure_probs(&self, qubit: usize) -> Result<(f64, f64)> {
        if qubit >= self.n_qubits {
            return Err(Error::internal(format!(
                "measure_probs: qubit {qubit} out of range"
            )));
        }
        let mask = 1usize << qubit;
        let mut p = [0.0f64; 2];
        for (i, a) in self.amps.iter().enumerate() {
            p[usize::from(i & mask != 0)] += a.norm_sqr();
        }
        Ok((p[0], p[1]))
    }

    /// Partial trace over every qubit not in `keep`. Within the reduced
    /// matrix, `keep[0]` is the most significant bit of the row/column index.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::internal("reduced_density: empty keep list"));
        }
        for (k, &q) in keep.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::internal(format!(
                    "reduced_density: qubit {q} out of range"
                )));
            }
            if keep[..k].contains(&q) {
                return Err(Error::internal(format!(
                    "reduced_density: duplicate qubit {q} in keep list"
                )));
            }
        }
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let dim = 1usize << keep.len();
        let mut entries = vec![Complex64::ZERO; dim * dim];

        // Global index for a given kept-bit pattern and traced-bit pattern.
        let global = |kept_bits: usize, env_bits: usize| -> usize {
            let mut g = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                // keep[0] is the high bit of the reduced index
                let bit = (kept_bits >> (keep.len() - 1 - pos)) & 1;
                g |= bit << q;
            }
            for (pos, &q) in traced.iter().enumerate() {
                g |= ((env_bits >> pos) & 1) << q;
            }
            g
        };

        for r in 0..dim {
            for c in 0..dim {
                let mut sum = Complex64::ZERO;
                for e in 0..(1usize << traced.len()) {
                    sum += self.amps[global(r, e)] * self.amps[global(c, e)].conj();
                }
                entries[r * dim + c] = sum;
            }
        }
        Ok(DensityMatrix { dim, entries })
    }
}

/// Square complex matrix holding a (reduced) density operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::internal(format!(
                "density matrix needs {}x{} entries, got {}",
                dim,
                dim,
                entries.len()
            )));
        }
        Ok(DensityMatrix { dim, entries })
    }

    /// ρ = |ψ⟩⟨ψ| for a single-qubit ket.
    pub fn from_pure_qubit(a0: Complex64, a1: Complex64) -> Self {
        DensityMatrix {
            dim: 2,
            entries: vec![
                a0 * a0.conj(),
                a0 * a1.conj(),
                a1 * a0.conj(),
                a1 * a1.conj(),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim + c]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn max_hermiticity_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Checks the density-matrix contract: Hermitian, unit trace, finite.
    pub fn validate(&self) -> Result<()> {
        if self
            .entries
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::internal("density matrix has non-finite entries"));
        }
        if self.max_hermiticity_violation() > NORM_TOL {
            return Err(Error::internal("density matrix is not Hermitian"));
        }
        if (self.trace() - Complex64::ONE).norm() > NORM_TOL {
            return Err(Error::internal(format!(
                "density matrix trace is {}, expected 1",
                self.trace()
            )));
        }
        Ok(())
    }

    /// Largest entry-wise distance to another matrix.
    pub fn max_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Draw binomial shot counts for a two-outcome measurement.
///
/// `n0` is binomial with parameters (`shots`, `p0`); `n0 + n1 == shots`.
/// Deterministic for a fixed RNG state.
pub fn sample_counts(p0: f64, shots: u64, rng: &mut impl Rng) -> Result<(u64, u64)> {
    if shots == 0 {
        return Err(Error::config("shots", "must be at least 1"));
    }
    if !p0.is_finite() || !(-NORM_TOL..=1.0 + NORM_TOL).contains(&p0) {
        return Err(Error::internal(format!(
            "sample_counts: probability {p0} outside [0, 1]"
        )));
    }
    let p = p0.clamp(0.0, 1.0);
    let binom = Binomial::new(shots, p)
        .map_err(|e| Error::internal(format!("binomial setup failed: {e}")))?;
    let n0 = binom.sample(rng);
    Ok((n0, shots - n0))
}
