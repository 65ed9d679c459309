//! Assembly and execution of the three detection schemes, producing sampled
//! or exact tables of the detector-phase function G(χ).
//!
//! Energy bookkeeping: energies are normalized to the level splitting, and
//! the *upper* level of each basis (|1⟩ for σz, |−⟩ for σx) is the excited
//! one — the state the engineered relaxation empties. The excited-level
//! occupation n_b = (1 − σ_b)/2 carries energy n_b − 1/2.
//!
//! A coupling event listed as couple(basis, s, χ) maps to the primitive
//! exp(i·λ·σ_basis⊗σz) with λ = −s·χ/4. The factor 1/4 comes from the
//! half-unit level splittings of system and detector (the σ⊗σ generator has
//! twice the eigenvalue gap of each ±1/2 observable); the overall sign makes
//! the detector phase advance by e^{+iχ·(energy gained)} for the ΔU/W
//! orderings and e^{+iχ·(energy released)} for the heat ordering. Scale and
//! sign are pinned by two testable identities: −i·dG/dχ at χ = 0 equals
//! the direct energy-change expectation, and dissipated heat is nonnegative
//! for a cold environment.

use crate::error::{Error, Result};
use crate::gates::{
    coupling_gate, drive_x, drive_z, init_system, readout_rotation, relaxation_circuit,
    ChannelSpec, GateOp, PauliBasis, ReadoutPart, IM_READOUT_SIGN,
};
use crate::sim::{sample_counts, QubitLayout, StateVector};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};

/// Which observable a detection scheme targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    InternalEnergy,
    Work,
    Heat,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::InternalEnergy, SchemeKind::Work, SchemeKind::Heat];

    /// Short label used in file names and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::InternalEnergy => "du",
            SchemeKind::Work => "w",
            SchemeKind::Heat => "q",
        }
    }

    pub fn parse(s: &str) -> Option<SchemeKind> {
        match s {
            "du" => Some(SchemeKind::InternalEnergy),
            "w" => Some(SchemeKind::Work),
            "q" => Some(SchemeKind::Heat),
            _ => None,
        }
    }

    fn id(self) -> u8 {
        match self {
            SchemeKind::InternalEnergy => 0,
            SchemeKind::Work => 1,
            SchemeKind::Heat => 2,
        }
    }
}

/// Whether G is computed from the exact detector coherence or estimated
/// from simulated shot counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Exact,
    Sampled,
}

/// All protocol parameters. Angles in radians, energies in units of the
/// level splitting (fixed at 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Relaxation probability of both engineered channels.
    pub p: f64,
    pub chi_max: f64,
    pub dchi: f64,
    pub shots: u64,
    pub mode: RunMode,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            theta: 0.7,
            phi: 1.2,
            alpha: 1.0,
            beta: 0.5,
            p: 0.0,
            chi_max: 100.0,
            dchi: 0.1,
            shots: 8000,
            mode: RunMode::Exact,
            seed: 7,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite, got {v}")))
            }
        };
        finite("theta", self.theta)?;
        finite("phi", self.phi)?;
        finite("alpha", self.alpha)?;
        finite("beta", self.beta)?;
        finite("p", self.p)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config(
                "p",
                format!("must be in [0, 1], got {}", self.p),
            ));
        }
        finite("chi_max", self.chi_max)?;
        if self.chi_max <= 0.0 {
            return Err(Error::config(
                "chi_max",
                format!("must be positive, got {}", self.chi_max),
            ));
        }
        finite("dchi", self.dchi)?;
        if self.dchi <= 0.0 || self.dchi > self.chi_max {
            return Err(Error::config(
                "dchi",
                format!(
                    "must satisfy 0 < dchi <= chi_max, got {} (chi_max {})",
                    self.dchi, self.chi_max
                ),
            ));
        }
        if self.mode == RunMode::Sampled && self.shots == 0 {
            return Err(Error::config("shots", "must be at least 1 in sampled mode"));
        }
        Ok(())
    }

    /// Index of the largest grid point: χ_k = k·Δχ for k = 0..=k_max.
    pub fn k_max(&self) -> usize {
        (self.chi_max / self.dchi + 1e-9).floor() as usize
    }

    /// Stable fingerprint used to detect mixed-config analysis.
    pub fn digest(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in [
            self.theta, self.phi, self.alpha, self.beta, self.p, self.chi_max, self.dchi,
        ] {
            v.to_bits().hash(&mut h);
        }
        self.shots.hash(&mut h);
        (self.mode == RunMode::Sampled).hash(&mut h);
        self.seed.hash(&mut h);
        h.finish()
    }
}

/// Sampled detector-phase function G(χ) on a symmetric grid.
///
/// Only the nonnegative half is simulated; the negative half is filled via
/// G(−χ) = conj G(χ), which the exact evaluation satisfies identically
/// (spot-checked in tests).
#[derive(Debug, Clone)]
pub struct QcgfTable {
    chis: Vec<f64>,
    values: Vec<Complex64>,
    scheme: Option<SchemeKind>,
    config: Option<ExperimentConfig>,
}

impl QcgfTable {
    /// Assemble a table from raw rows (e.g. parsed from CSV). The grid must
    /// be strictly ascending and symmetric about 0.
    pub fn from_parts(
        chis: Vec<f64>,
        values: Vec<Complex64>,
        scheme: Option<SchemeKind>,
        config: Option<ExperimentConfig>,
    ) -> Result<Self> {
        if chis.len() != values.len() || chis.is_empty() {
            return Err(Error::analysis("table grid and values must match and be nonempty"));
        }
        if chis.len().is_multiple_of(2) {
            return Err(Error::analysis(
                "table grid must have an odd number of points (symmetric about 0)",
            ));
        }
        let n = chis.len();
        for i in 1..n {
            if chis[i] <= chis[i - 1] {
                return Err(Error::analysis("table grid must be strictly ascending"));
            }
        }
        for i in 0..n {
            if (chis[i] + chis[n - 1 - i]).abs() > 1e-9 {
                return Err(Error::analysis("table grid must be symmetric about 0"));
            }
        }
        Ok(QcgfTable {
            chis,
            values,
            scheme,
            config,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.chis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scheme(&self) -> Option<SchemeKind> {
        self.scheme
    }

    pub fn config(&self) -> Option<&ExperimentConfig> {
        self.config.as_ref()
    }

    pub fn config_digest(&self) -> Option<u64> {
        self.config.as_ref().map(|c| c.digest())
    }

    pub fn len(&self) -> usize {
        self.chis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chis.is_empty()
    }

    /// Index of χ = 0.
    pub fn center(&self) -> usize {
        self.chis.len() / 2
    }

    /// Grid spacing, inferred from the stored grid.
    pub fn dchi(&self) -> f64 {
        self.chis[self.center() + 1] - self.chis[self.center()]
    }

    /// Value at offset `k` from the center (χ = k·Δχ), if in range.
    pub fn value_at_offset(&self, k: isize) -> Option<Complex64> {
        let idx = self.center() as isize + k;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    /// Value at the grid point closest to `chi`, if within 1e-9 of it.
    pub fn value_at_chi(&self, chi: f64) -> Option<Complex64> {
        let k = (chi / self.dchi()).round() as isize;
        let idx = self.center() as isize + k;
        if idx < 0 || idx as usize >= self.chis.len() {
            return None;
        }
        if (self.chis[idx as usize] - chi).abs() > 1e-9 {
            return None;
        }
        Some(self.values[idx as usize])
    }
}

fn protocol_coupling(basis: PauliBasis, sign: f64, chi: f64, layout: &QubitLayout) -> GateOp {
    // λ = −s·χ/4; see module docs.
    coupling_gate(basis, -sign * chi / 4.0, layout.system, layout.detector)
}

/// Time-ordered gate list (first applied first) for one scheme at coupling
/// strength `chi`, including system and detector preparation.
pub fn build_scheme_circuit(
    scheme: SchemeKind,
    chi: f64,
    cfg: &ExperimentConfig,
) -> Result<Vec<GateOp>> {
    build_scheme_circuit_split(scheme, chi, cfg, cfg.p, cfg.p)
}

/// Same as [`build_scheme_circuit`] but with independent relaxation
/// strengths for the σx-basis and σz-basis segments, used to probe the
/// segment structure of the heat scheme.
pub fn build_scheme_circuit_split(
    scheme: SchemeKind,
    chi: f64,
    cfg: &ExperimentConfig,
    p_x: f64,
    p_z: f64,
) -> Result<Vec<GateOp>> {
    cfg.validate()?;
    if !chi.is_finite() {
        return Err(Error::config("chi", "must be finite"));
    }
    let layout = QubitLayout::default();
    let relax_x = relaxation_circuit(&ChannelSpec {
        p: p_x,
        basis: PauliBasis::X,
        env: layout.env1,
    })?;
    let relax_z = relaxation_circuit(&ChannelSpec {
        p: p_z,
        basis: PauliBasis::Z,
        env: layout.env2,
    })?;

    let mut gates = init_system(cfg.theta, cfg.phi, layout.system);
    gates.push(GateOp::Hadamard {
        qubit: layout.detector,
    });

    let ux = drive_x(cfg.alpha, layout.system);
    let uz = drive_z(cfg.beta, layout.system);
    let couple = |basis, sign| protocol_coupling(basis, sign, chi, &layout);

    match scheme {
        SchemeKind::InternalEnergy => {
            gates.push(couple(PauliBasis::X, -1.0));
            gates.push(ux);
            gates.extend(relax_x);
            gates.push(uz);
            gates.extend(relax_z);
            gates.push(couple(PauliBasis::Z, 1.0));
        }
        SchemeKind::Work => {
            gates.push(ux);
            gates.extend(relax_x);
            gates.push(couple(PauliBasis::X, -1.0));
            gates.push(couple(PauliBasis::Z, 1.0));
            gates.push(uz);
            gates.extend(relax_z);
        }
        SchemeKind::Heat => {
            gates.push(couple(PauliBasis::X, 1.0));
            gates.push(ux);
            gates.extend(relax_x);
            gates.push(couple(PauliBasis::X, -1.0));
            gates.push(couple(PauliBasis::Z, 1.0));
            gates.push(uz);
            gates.extend(relax_z);
            gates.push(couple(PauliBasis::Z, -1.0));
        }
    }
    Ok(gates)
}

/// Exact G for one circuit: the final detector coherence over its prepared
/// value 1/2, with no sampling noise.
pub fn run_exact(circuit: &[GateOp], layout: &QubitLayout) -> Result<Complex64> {
    layout.validate(4)?;
    let state = StateVector::new(4)?.apply_all(circuit)?;
    let rho_d = state.reduced_density(&[layout.detector])?;
    Ok(rho_d.entry(0, 1) / 0.5)
}

/// Independent RNG streams for the two readout variants of one (scheme, χ)
/// grid point.
pub struct ReadoutStreams {
    re: ChaCha8Rng,
    im: ChaCha8Rng,
}

/// Counter-keyed substream: master seed plus (lane, variant, index) select
/// an independent ChaCha8 stream. Lanes 0–2 are the three schemes (keyed by
/// χ-index and readout variant); lane 3 is the sampled TMP reference.
pub(crate) fn derive_stream(seed: u64, lane: u8, variant: u8, index: u32) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(b"qthermo\0");
    key[8..16].copy_from_slice(&seed.to_le_bytes());
    key[16] = lane;
    key[17] = variant;
    key[18..22].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Derive the per-point RNG streams from the master seed. Each
/// (scheme, χ-index, readout-variant) triple keys its own ChaCha8 stream, so
/// sweeps are reproducible independent of evaluation order.
pub fn readout_streams(seed: u64, scheme: SchemeKind, chi_index: u32) -> ReadoutStreams {
    ReadoutStreams {
        re: derive_stream(seed, scheme.id(), 0, chi_index),
        im: derive_stream(seed, scheme.id(), 1, chi_index),
    }
}

/// Shot-sampled estimate of G: the circuit is executed once per readout
/// variant (Re and Im rotation on the detector), detector populations are
/// sampled binomially, and each part is estimated as 2·n0/shots − 1.
pub fn run_sampled(
    circuit: &[GateOp],
    layout: &QubitLayout,
    shots: u64,
    streams: &mut ReadoutStreams,
) -> Result<Complex64> {
    layout.validate(4)?;
    if shots == 0 {
        return Err(Error::config("shots", "must be at least 1"));
    }
    let base = StateVector::new(4)?.apply_all(circuit)?;
    let estimate = |part, rng: &mut ChaCha8Rng| -> Result<f64> {
        let rotated = base.apply_gate(&readout_rotation(part, layout.detector))?;
        let (p0, _) = rotated.measure_probs(layout.detector)?;
        let (n0, _) = sample_counts(p0, shots, rng)?;
        Ok(2.0 * (n0 as f64) / (shots as f64) - 1.0)
    };
    let re = estimate(ReadoutPart::Re, &mut streams.re)?;
    let im = estimate(ReadoutPart::Im, &mut streams.im)?;
    Ok(Complex64::new(re, IM_READOUT_SIGN * im))
}

/// Evaluate G over the full grid for one scheme. Positive-half points are
/// independent and evaluated in parallel; the negative half is the complex
/// conjugate mirror.
pub fn sweep(scheme: SchemeKind, cfg: &ExperimentConfig) -> Result<QcgfTable> {
    cfg.validate()?;
    let layout = QubitLayout::default();
    let k_max = cfg.k_max();

    let half: Vec<Complex64> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let chi = k as f64 * cfg.dchi;
            let circuit = build_scheme_circuit(scheme, chi, cfg)?;
            match cfg.mode {
                RunMode::Exact => run_exact(&circuit, &layout),
                RunMode::Sampled => {
                    let mut streams = readout_streams(cfg.seed, scheme, k as u32);
                    run_sampled(&circuit, &layout, cfg.shots, &mut streams)
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut chis = Vec::with_capacity(2 * k_max + 1);
    let mut values = Vec::with_capacity(2 * k_max + 1);
    for k in (1..=k_max).rev() {
        chis.push(-(k as f64) * cfg.dchi);
        values.push(half[k].conj());
    }
    for (k, v) in half.iter().enumerate() {
        chis.push(k as f64 * cfg.dchi);
        values.push(*v);
    }
    QcgfTable::from_parts(chis, values, Some(scheme), Some(*cfg))
}
