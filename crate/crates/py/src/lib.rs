//! Python bindings: experiment runner, SNR/noise conversion, the augmented
//! QPSK alphabet, and the LDPC code with alist import/export.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mmtc_core::coding::{build_ldpc, LdpcCode};
use mmtc_core::harness::{diagnostics_to_jsonl, to_csv, ExperimentConfig};
use mmtc_core::rng::{substream, Stream};
use mmtc_core::sysmodel::{build_alphabet, Modulation};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Noise variance for a target average SNR (dB) at N devices, code rate
/// `rate`, and per-symbol variance `symbol_var`.
#[pyfunction]
#[pyo3(signature = (snr_db, n, rate=1.0, symbol_var=1.0))]
fn snr_to_noise_var(snr_db: f64, n: usize, rate: f64, symbol_var: f64) -> f64 {
    mmtc_core::sysmodel::snr_to_noise_var(snr_db, n, rate, symbol_var)
}

/// The default experiment configuration as a JSON string.
#[pyfunction]
fn default_config() -> PyResult<String> {
    serde_json::to_string_pretty(&ExperimentConfig::default()).map_err(value_err)
}

/// QPSK augmented-alphabet points as (complex, bit label) pairs; the zero
/// symbol carries an empty label.
#[pyfunction]
fn qpsk_alphabet() -> PyResult<Vec<(num_complex_py::Complex, Vec<i8>)>> {
    let alphabet = build_alphabet(Modulation::Qpsk).map_err(value_err)?;
    Ok((0..alphabet.num_symbols())
        .map(|i| {
            let p = alphabet.point(i);
            (
                num_complex_py::Complex { re: p.re, im: p.im },
                alphabet.label(i).map(|l| l.to_vec()).unwrap_or_default(),
            )
        })
        .collect())
}

/// Tiny complex shim: pyo3 converts (f64, f64)-like structs poorly, so expose
/// points as Python complex via a dedicated conversion.
mod num_complex_py {
    use pyo3::prelude::*;
    use pyo3::types::PyComplex;

    pub struct Complex {
        pub re: f64,
        pub im: f64,
    }

    impl<'py> IntoPyObject<'py> for Complex {
        type Target = PyComplex;
        type Output = Bound<'py, PyComplex>;
        type Error = std::convert::Infallible;

        fn into_pyobject(self, py: Python<'py>) -> Result<Self::Output, Self::Error> {
            Ok(PyComplex::from_doubles(py, self.re, self.im))
        }
    }
}

/// Run a full experiment from a JSON config string. Returns a dict with the
/// parsed per-(variant, SNR) records, the CSV text, and diagnostics JSONL.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<Py<PyDict>> {
    let cfg: ExperimentConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let out = py
        .detach(|| mmtc_core::harness::run_experiment(&cfg))
        .map_err(value_err)?;

    let dict = PyDict::new(py);
    let records: Vec<Py<PyDict>> = out
        .records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("variant", r.variant.to_string())?;
            d.set_item("snr_db", r.snr_db)?;
            d.set_item("nser", r.nser())?;
            d.set_item("ber", r.ber())?;
            d.set_item("fa_rate", r.false_alarm_rate())?;
            d.set_item("miss_rate", r.miss_rate())?;
            d.set_item(
                "cmults_per_symbol",
                r.cmults_per_symbol(cfg.system.n, cfg.system.data_len),
            )?;
            d.set_item("trials_run", r.trials_run)?;
            d.set_item("trials_skipped", r.trials_skipped)?;
            Ok(d.unbind())
        })
        .collect::<PyResult<_>>()?;
    dict.set_item("records", records)?;
    dict.set_item("csv", to_csv(&cfg, &out.records))?;
    dict.set_item("diagnostics_jsonl", diagnostics_to_jsonl(&out.diagnostics))?;
    Ok(dict.unbind())
}

/// A binary LDPC code with systematic encoder and sum-product decoder.
#[pyclass(name = "Ldpc")]
struct PyLdpc {
    code: LdpcCode,
}

#[pymethods]
impl PyLdpc {
    /// Build an n x m-check, column-weight-regular, 4-cycle-free code.
    #[new]
    #[pyo3(signature = (n=256, checks=128, col_weight=6, seed=1))]
    fn new(n: usize, checks: usize, col_weight: usize, seed: u64) -> PyResult<Self> {
        let mut rng = substream(seed, 0, Stream::CodeConstruction);
        let code = build_ldpc(n, checks, col_weight, &mut rng).map_err(value_err)?;
        Ok(PyLdpc { code })
    }

    #[staticmethod]
    fn from_alist(text: &str) -> PyResult<Self> {
        Ok(PyLdpc {
            code: LdpcCode::from_alist(text).map_err(value_err)?,
        })
    }

    fn to_alist(&self) -> String {
        self.code.to_alist()
    }

    #[getter]
    fn message_len(&self) -> usize {
        self.code.message_len()
    }

    #[getter]
    fn codeword_len(&self) -> usize {
        self.code.codeword_len()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.code.rate()
    }

    fn encode(&self, message: Vec<u8>) -> PyResult<Vec<u8>> {
        self.code.encode(&message).map_err(value_err)
    }

    fn syndrome_is_zero(&self, bits: Vec<u8>) -> PyResult<bool> {
        if bits.len() != self.code.codeword_len() {
            return Err(PyValueError::new_err("bit vector length mismatch"));
        }
        Ok(self.code.syndrome_is_zero(&bits))
    }

    /// Sum-product decode; returns (hard_bits, posterior_llrs, converged,
    /// iterations).
    #[pyo3(signature = (channel_llrs, max_iters=30))]
    fn spa_decode(
        &self,
        channel_llrs: Vec<f64>,
        max_iters: usize,
    ) -> PyResult<(Vec<u8>, Vec<f64>, bool, usize)> {
        if channel_llrs.len() != self.code.codeword_len() {
            return Err(PyValueError::new_err("LLR vector length mismatch"));
        }
        if max_iters == 0 {
            return Err(PyRuntimeError::new_err("max_iters must be >= 1"));
        }
        let res = self.code.spa_decode(&channel_llrs, max_iters);
        Ok((
            res.hard_bits,
            res.posterior_llrs,
            res.converged,
            res.iterations,
        ))
    }
}

#[pymodule]
fn mmtc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(snr_to_noise_var, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(qpsk_alphabet, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<PyLdpc>()?;
    Ok(())
}
