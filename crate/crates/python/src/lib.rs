//! Python bindings: configuration, scheme sweeps, spectral analysis and the
//! TMP reference, mirroring the `qthermo` CLI surface.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use qthermo_core::error::Error;
use qthermo_core::io;
use qthermo_core::protocol::{self, ExperimentConfig, QcgfTable, RunMode, SchemeKind};
use qthermo_core::spectral;
use qthermo_core::tmp;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Parse { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_scheme(label: &str) -> PyResult<SchemeKind> {
    SchemeKind::parse(label)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scheme `{label}`, expected du|w|q")))
}

/// Protocol parameters; fields mirror the CLI flags.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Config {
    #[pyo3(get, set)]
    theta: f64,
    #[pyo3(get, set)]
    phi: f64,
    #[pyo3(get, set)]
    alpha: f64,
    #[pyo3(get, set)]
    beta: f64,
    #[pyo3(get, set)]
    p: f64,
    #[pyo3(get, set)]
    chi_max: f64,
    #[pyo3(get, set)]
    dchi: f64,
    #[pyo3(get, set)]
    shots: u64,
    #[pyo3(get, set)]
    mode: String,
    #[pyo3(get, set)]
    seed: u64,
}

impl Config {
    fn to_core(&self) -> PyResult<ExperimentConfig> {
        let mode = match self.mode.as_str() {
            "exact" => RunMode::Exact,
            "sampled" => RunMode::Sampled,
            other => {
                return Err(PyValueError::new_err(format!(
                    "mode must be `exact` or `sampled`, got `{other}`"
                )))
            }
        };
        let cfg = ExperimentConfig {
            theta: self.theta,
            phi: self.phi,
            alpha: self.alpha,
            beta: self.beta,
            p: self.p,
            chi_max: self.chi_max,
            dchi: self.dchi,
            shots: self.shots,
            mode,
            seed: self.seed,
        };
        cfg.validate().map_err(to_py_err)?;
        Ok(cfg)
    }
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (
        theta = 0.7, phi = 1.2, alpha = 1.0, beta = 0.5, p = 0.0,
        chi_max = 100.0, dchi = 0.1, shots = 8000, mode = "exact", seed = 7
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        theta: f64,
        phi: f64,
        alpha: f64,
        beta: f64,
        p: f64,
        chi_max: f64,
        dchi: f64,
        shots: u64,
        mode: &str,
        seed: u64,
    ) -> Self {
        Config {
            theta,
            phi,
            alpha,
            beta,
            p,
            chi_max,
            dchi,
            shots,
            mode: mode.to_string(),
            seed,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(theta={}, phi={}, alpha={}, beta={}, p={}, chi_max={}, dchi={}, shots={}, mode='{}', seed={})",
            self.theta, self.phi, self.alpha, self.beta, self.p, self.chi_max, self.dchi,
            self.shots, self.mode, self.seed
        )
    }
}

/// A sampled G(χ) table with its analysis methods.
#[pyclass]
struct Qcgf {
    table: QcgfTable,
}

/// (min_density, min_at, ringing_floor, negative_regions)
type NegativitySummary = (f64, f64, f64, Vec<(f64, f64)>);

#[pymethods]
impl Qcgf {
    /// Full symmetric χ grid.
    fn chis(&self) -> Vec<f64> {
        self.table.grid().to_vec()
    }

    fn re(&self) -> Vec<f64> {
        self.table.values().iter().map(|g| g.re).collect()
    }

    fn im(&self) -> Vec<f64> {
        self.table.values().iter().map(|g| g.im).collect()
    }

    /// (energies, density) of the reconstructed quasi-probability density.
    fn qpdf(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let q = spectral::qpdf(&self.table, &spectral::default_f_grid()).map_err(to_py_err)?;
        Ok((q.energies().to_vec(), q.density().to_vec()))
    }

    /// Raw Dirichlet-projected peak weights as (energy, weight) pairs.
    fn peak_weights(&self) -> PyResult<Vec<(f64, f64)>> {
        let peaks = spectral::peak_weights(&self.table).map_err(to_py_err)?;
        Ok(peaks.peaks.iter().map(|p| (p.energy, p.weight)).collect())
    }

    /// Peak weights rescaled to unit total.
    fn renormalized_peaks(&self) -> PyResult<Vec<(f64, f64)>> {
        let peaks = spectral::peak_weights(&self.table).map_err(to_py_err)?;
        let renorm = spectral::renormalize_peaks(&peaks).map_err(to_py_err)?;
        Ok(renorm.peaks.iter().map(|p| (p.energy, p.weight)).collect())
    }

    /// (mean, stderr) from the slope of Im G at χ̄.
    fn average_slope(&self, chi_bar: f64) -> PyResult<(f64, f64)> {
        let m = spectral::average_from_slope(&self.table, chi_bar).map_err(to_py_err)?;
        Ok((m.mean, m.stderr))
    }

    /// (mean, stderr) from the central difference at the origin.
    fn average_derivative(&self) -> PyResult<(f64, f64)> {
        let m = spectral::average_from_derivative(&self.table).map_err(to_py_err)?;
        Ok((m.mean, m.stderr))
    }

    /// (min_density, min_at, ringing_floor, regions) of the negativity scan.
    fn negativity(&self) -> PyResult<NegativitySummary> {
        let q = spectral::qpdf(&self.table, &spectral::default_f_grid()).map_err(to_py_err)?;
        let n = spectral::negativity(&q);
        Ok((n.min_density, n.min_at, n.ringing_floor, n.negative_regions))
    }

    /// Write the table in the `chi,re_g,im_g` format.
    fn save_csv(&self, path: &str) -> PyResult<()> {
        io::write_qcgf_csv(&self.table, std::path::Path::new(path)).map_err(to_py_err)
    }

    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Qcgf> {
        let table = io::read_qcgf_csv(std::path::Path::new(path)).map_err(to_py_err)?;
        Ok(Qcgf { table })
    }
}

/// Evaluate G(χ) for one scheme ("du", "w" or "q") over the configured grid.
#[pyfunction]
fn sweep(scheme: &str, config: &Config) -> PyResult<Qcgf> {
    let table = protocol::sweep(parse_scheme(scheme)?, &config.to_core()?).map_err(to_py_err)?;
    Ok(Qcgf { table })
}

/// Reference first moment of one scheme from the exact pipeline.
#[pyfunction]
fn exact_average(scheme: &str, config: &Config) -> PyResult<f64> {
    let m = spectral::exact_first_moment(parse_scheme(scheme)?, &config.to_core()?)
        .map_err(to_py_err)?;
    Ok(m.mean)
}

/// (du, w, q, residual, stderr) of the energy balance. Exact mode uses the
/// fine-step reference averages; sampled mode uses slope estimates at Δχ.
#[pyfunction]
fn conservation(config: &Config) -> PyResult<(f64, f64, f64, f64, f64)> {
    let cfg = config.to_core()?;
    let moments: Vec<_> = match cfg.mode {
        RunMode::Exact => SchemeKind::ALL
            .iter()
            .map(|&s| spectral::exact_first_moment(s, &cfg))
            .collect::<Result<_, _>>()
            .map_err(to_py_err)?,
        RunMode::Sampled => {
            let mini = ExperimentConfig {
                chi_max: cfg.dchi,
                ..cfg
            };
            SchemeKind::ALL
                .iter()
                .map(|&s| {
                    protocol::sweep(s, &mini)
                        .and_then(|t| spectral::average_from_slope(&t, mini.dchi))
                })
                .collect::<Result<_, _>>()
                .map_err(to_py_err)?
        }
    };
    let report =
        spectral::conservation_check(&moments[0], &moments[1], &moments[2]).map_err(to_py_err)?;
    Ok((
        report.du,
        report.w,
        report.q,
        report.residual,
        report.stderr,
    ))
}

/// (du, q, w) averages of the exact two-measurement reference.
#[pyfunction]
fn tmp_averages(config: &Config) -> PyResult<(f64, f64, f64)> {
    let avg = tmp::tmp_averages(&tmp::tmp_distribution(&config.to_core()?).map_err(to_py_err)?);
    Ok((avg.du, avg.q, avg.w))
}

/// TMP outcome masses as (du, q, w, probability) rows, merged over the
/// environment-resolved outcomes.
#[pyfunction]
fn tmp_distribution(config: &Config) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let dist = tmp::tmp_distribution(&config.to_core()?).map_err(to_py_err)?;
    let mut acc: std::collections::BTreeMap<(i64, i64), f64> = Default::default();
    for o in &dist.outcomes {
        *acc.entry(((2.0 * o.du()).round() as i64, (2.0 * o.q()).round() as i64))
            .or_default() += o.probability;
    }
    Ok(acc
        .into_iter()
        .map(|((du2, q2), prob)| {
            let (du, q) = (du2 as f64 / 2.0, q2 as f64 / 2.0);
            (du, q, du + q, prob)
        })
        .collect())
}

#[pymodule]
fn qthermo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Qcgf>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(exact_average, m)?)?;
    m.add_function(wrap_pyfunction!(conservation, m)?)?;
    m.add_function(wrap_pyfunction!(tmp_averages, m)?)?;
    m.add_function(wrap_pyfunction!(tmp_distribution, m)?)?;
    Ok(())
}
