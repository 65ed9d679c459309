//! Exact two-measurement-protocol reference on the three-qubit register
//! (system = 0, env1 = 1, env2 = 2).
//!
//! The initial projective energy measurement is modeled by classical mixing
//! over the two σx eigenstates with Born weights; no initial coherence
//! survives. Each branch then evolves through the same drive/relaxation
//! sequence as the detection schemes, and the eight computational-basis
//! outcomes are enumerated exactly.
//!
//! Energies follow the crate convention (see [`crate::protocol`]): the upper
//! level of each basis is the excited one, so the initial σx eigenstate |+⟩
//! carries energy −1/2 and the final computational state |1⟩ carries +1/2.

use crate::error::{Error, Result};
use crate::gates::{drive_x, drive_z, relaxation_circuit, ChannelSpec, PauliBasis};
use crate::protocol::{derive_stream, ExperimentConfig};
use crate::sim::{sample_counts, StateVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// One joint outcome of the two-measurement protocol.
#[derive(Debug, Clone, Copy)]
pub struct TmpOutcome {
    /// Energy of the measured initial σx eigenstate, ±1/2.
    pub initial_energy: f64,
    /// Energy of the measured final σz eigenstate, ±1/2.
    pub final_energy: f64,
    /// Quanta found in the two environment qubits.
    pub q1: u8,
    pub q2: u8,
    pub probability: f64,
}

impl TmpOutcome {
    pub fn du(&self) -> f64 {
        self.final_energy - self.initial_energy
    }

    pub fn q(&self) -> f64 {
        f64::from(self.q1) + f64::from(self.q2)
    }

    /// Work is a derived quantity: W = ΔU + Q holds per outcome exactly.
    pub fn w(&self) -> f64 {
        self.du() + self.q()
    }
}

/// Full outcome list plus the marginal masses of ΔU, Q and W.
#[derive(Debug, Clone)]
pub struct TmpDistribution {
    pub outcomes: Vec<TmpOutcome>,
}

impl TmpDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    fn masses(&self, value: impl Fn(&TmpOutcome) -> f64) -> Vec<(f64, f64)> {
        // Energies are multiples of 1/2; bin by the doubled integer value.
        let mut acc: std::collections::BTreeMap<i64, f64> = Default::default();
        for o in &self.outcomes {
            *acc.entry((2.0 * value(o)).round() as i64).or_default() += o.probability;
        }
        acc.into_iter()
            .map(|(k, p)| (k as f64 / 2.0, p))
            .collect()
    }

    pub fn du_masses(&self) -> Vec<(f64, f64)> {
        self.masses(TmpOutcome::du)
    }

    pub fn q_masses(&self) -> Vec<(f64, f64)> {
        self.masses(TmpOutcome::q)
    }

    pub fn w_masses(&self) -> Vec<(f64, f64)> {
        self.masses(TmpOutcome::w)
    }
}

/// Probability-weighted means of the distribution. Exact: no stochastic
/// error enters the enumeration path.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TmpAverages {
    pub du: f64,
    pub q: f64,
    pub w: f64,
}

fn branch_states() -> [(f64, StateVector); 2] {
    // σx eigenstates |±⟩ on the system qubit, environments in |0⟩.
    let mut plus = vec![Complex64::ZERO; 8];
    plus[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    plus[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut minus = vec![Complex64::ZERO; 8];
    minus[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    minus[1] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
    [
        // |+⟩ is the σx ground state: energy −1/2.
        (-0.5, StateVector::from_amplitudes(3, plus).unwrap()),
        (0.5, StateVector::from_amplitudes(3, minus).unwrap()),
    ]
}

fn evolution(cfg: &ExperimentConfig) -> Result<Vec<crate::gates::GateOp>> {
    let mut gates = vec![drive_x(cfg.alpha, 0)];
    gates.extend(relaxation_circuit(&ChannelSpec {
        p: cfg.p,
        basis: PauliBasis::X,
        env: 1,
    })?);
    gates.push(drive_z(cfg.beta, 0));
    gates.extend(relaxation_circuit(&ChannelSpec {
        p: cfg.p,
        basis: PauliBasis::Z,
        env: 2,
    })?);
    Ok(gates)
}

/// Branch weights |⟨±|ψ₀⟩|² = (1 ± sinθ·cosφ)/2.
fn branch_weights(cfg: &ExperimentConfig) -> [f64; 2] {
    let sx = cfg.theta.sin() * cfg.phi.cos();
    [(1.0 + sx) / 2.0, (1.0 - sx) / 2.0]
}

/// Enumerate the exact TMP outcome distribution. χ-grid and shot settings in
/// `cfg` are ignored; this path carries no sampling noise.
pub fn tmp_distribution(cfg: &ExperimentConfig) -> Result<TmpDistribution> {
    cfg.validate()?;
    let gates = evolution(cfg)?;
    let weights = branch_weights(cfg);
    let mut outcomes = Vec::with_capacity(16);
    for ((initial_energy, state), weight) in branch_states().into_iter().zip(weights) {
        let final_state = state.apply_all(&gates)?;
        for (idx, amp) in final_state.amplitudes().iter().enumerate() {
            let s = idx & 1;
            let e1 = (idx >> 1) & 1;
            let e2 = (idx >> 2) & 1;
            outcomes.push(TmpOutcome {
                initial_energy,
                final_energy: s as f64 - 0.5,
                q1: e1 as u8,
                q2: e2 as u8,
                probability: weight * amp.norm_sqr(),
            });
        }
    }
    Ok(TmpDistribution { outcomes })
}

/// Shot-sampled variant, provided for parity with the detection schemes'
/// sampled mode: outcome counts are multinomial over the exact distribution,
/// drawn from the master seed's TMP lane.
pub fn tmp_distribution_sampled(cfg: &ExperimentConfig) -> Result<TmpDistribution> {
    if cfg.shots == 0 {
        return Err(Error::config("shots", "must be at least 1"));
    }
    let exact = tmp_distribution(cfg)?;
    let mut rng = derive_stream(cfg.seed, 3, 0, 0);

    // Multinomial via sequential binomial splitting.
    let mut counts = vec![0u64; exact.outcomes.len()];
    let mut remaining_shots = cfg.shots;
    let mut remaining_mass = 1.0f64;
    for (i, o) in exact.outcomes.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        let cond = if remaining_mass > 1e-15 {
            (o.probability / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (n, _) = sample_counts(cond, remaining_shots, &mut rng)?;
        counts[i] = n;
        remaining_shots -= n;
        remaining_mass -= o.probability;
    }

    let outcomes = exact
        .outcomes
        .iter()
        .zip(&counts)
        .map(|(o, &n)| TmpOutcome {
            probability: n as f64 / cfg.shots as f64,
            ..*o
        })
        .collect();
    Ok(TmpDistribution { outcomes })
}

/// Probability-weighted means of ΔU, Q, W.
pub fn tmp_averages(dist: &TmpDistribution) -> TmpAverages {
    let mut avg = TmpAverages {
        du: 0.0,
        q: 0.0,
        w: 0.0,
    };
    for o in &dist.outcomes {
        avg.du += o.probability * o.du();
        avg.q += o.probability * o.q();
        avg.w += o.probability * o.w();
    }
    avg
}
