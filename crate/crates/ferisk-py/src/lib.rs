//! Python bindings for the ferisk risk library.
//!
//! Exposes the entropy functions, prospects, risk scoring and the variance
//! diagnostics. Domain failures raise `ValueError`, I/O failures `IOError`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ferisk::market;
use ferisk::risk;
use ferisk::{entropy, EntropyParams, Measure, RiskConfig, SupportRule};

fn to_py_err(e: ferisk::Error) -> PyErr {
    match e {
        ferisk::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// `bins = None` counts only the occupied outcomes; an integer fixes the
/// support size, as when every prospect shares one histogram grid.
fn entropy_params(q: f64, bins: Option<usize>) -> PyResult<EntropyParams> {
    let rule = match bins {
        Some(n) => SupportRule::FixedBinCount(n),
        None => SupportRule::NonzeroSupport,
    };
    EntropyParams::new(q, rule).map_err(to_py_err)
}

fn risk_config(measure: &str, lam: f64, q: f64, bins: Option<usize>) -> PyResult<RiskConfig> {
    let measure = Measure::parse(measure).map_err(to_py_err)?;
    RiskConfig::new(measure, lam, entropy_params(q, bins)?).map_err(to_py_err)
}

/// A labeled set of (payoff, probability) outcomes.
#[pyclass(module = "ferisk_py", frozen, from_py_object)]
#[derive(Clone)]
struct Prospect {
    inner: ferisk::Prospect,
}

#[pymethods]
impl Prospect {
    #[new]
    fn new(label: &str, outcomes: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(Prospect {
            inner: ferisk::Prospect::new(label, outcomes).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn label(&self) -> &str {
        self.inner.label()
    }

    #[getter]
    fn outcomes(&self) -> Vec<(f64, f64)> {
        self.inner
            .outcomes()
            .iter()
            .map(|o| (o.payoff, o.prob))
            .collect()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.outcomes().iter().map(|o| o.prob).collect()
    }

    fn expected_utility(&self) -> PyResult<f64> {
        self.inner.expected_utility().map_err(to_py_err)
    }

    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.inner.moments();
        let d = PyDict::new(py);
        d.set_item("mean", m.mean)?;
        d.set_item("variance", m.variance)?;
        d.set_item("skewness", m.skewness)?;
        d.set_item("kurtosis_m4", m.kurtosis_m4)?;
        Ok(d)
    }

    /// New prospect with `c` added to every payoff.
    fn translate(&self, c: f64) -> PyResult<Prospect> {
        Ok(Prospect {
            inner: self.inner.translate(c).map_err(to_py_err)?,
        })
    }

    /// New prospect with every payoff multiplied by `k`.
    fn scale(&self, k: f64) -> PyResult<Prospect> {
        Ok(Prospect {
            inner: self.inner.scale(k).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Prospect({:?}, {} outcomes)",
            self.inner.label(),
            self.inner.outcomes().len()
        )
    }
}

/// Logarithmic utility ln(1 + x) of a return x > -1.
#[pyfunction]
fn utility(x: f64) -> PyResult<f64> {
    ferisk::utility(x).map_err(to_py_err)
}

/// Fractional-order entropy S_q of a probability vector.
#[pyfunction]
fn fractional_entropy(probs: Vec<f64>, q: f64) -> PyResult<f64> {
    let d = entropy::Distribution::new(probs).map_err(to_py_err)?;
    entropy::fractional_entropy(&d, q).map_err(to_py_err)
}

/// Normalized fractional entropy NS_q in [0, 1].
#[pyfunction]
#[pyo3(signature = (probs, q, bins=None))]
fn normalized_fractional_entropy(probs: Vec<f64>, q: f64, bins: Option<usize>) -> PyResult<f64> {
    let d = entropy::Distribution::new(probs).map_err(to_py_err)?;
    entropy::normalized_fractional_entropy(&d, &entropy_params(q, bins)?).map_err(to_py_err)
}

/// Peak value q^q e^{-q} of a single entropy term.
#[pyfunction]
fn entropy_term_max(q: f64) -> PyResult<f64> {
    entropy::entropy_term_max(q).map_err(to_py_err)
}

/// Information gain (-ln p)^q of one event of probability p.
#[pyfunction]
fn information_gain(p: f64, q: f64) -> PyResult<f64> {
    entropy::information_gain(p, q).map_err(to_py_err)
}

/// Histogram `returns` on `bins` equal cells over [r_min, r_max] and wrap the
/// result as a prospect whose payoffs are the cell midpoints.
#[pyfunction]
fn bin_prospect(
    label: &str,
    returns: Vec<f64>,
    r_min: f64,
    r_max: f64,
    bins: usize,
) -> PyResult<Prospect> {
    let grid = market::make_bin_grid(r_min, r_max, bins).map_err(to_py_err)?;
    Ok(Prospect {
        inner: market::bin_prospect(label, &returns, &grid).map_err(to_py_err)?,
    })
}

/// Prospects built from a seeded synthetic price panel, one per ticker.
#[pyfunction]
#[pyo3(signature = (seed, tickers=48, days=246, vol=0.02, bins=15))]
fn synth_prospects(
    seed: u64,
    tickers: usize,
    days: usize,
    vol: f64,
    bins: usize,
) -> PyResult<Vec<Prospect>> {
    let panel = market::synth_panel(seed, tickers, days, vol).map_err(to_py_err)?;
    let returns = panel.log_returns().map_err(to_py_err)?;
    let grid = returns.grid(bins).map_err(to_py_err)?;
    let prospects = returns.prospects(&grid).map_err(to_py_err)?;
    Ok(prospects
        .into_iter()
        .map(|inner| Prospect { inner })
        .collect())
}

/// Score one prospect against a context of alternatives. Returns a dict with
/// the total and its entropy/variance/utility terms (lower total = safer).
#[pyfunction]
#[pyo3(signature = (prospect, context, measure="neu-fev", lam=0.5, q=0.5, bins=None))]
fn score<'py>(
    py: Python<'py>,
    prospect: &Prospect,
    context: Vec<Prospect>,
    measure: &str,
    lam: f64,
    q: f64,
    bins: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = risk_config(measure, lam, q, bins)?;
    let actions: Vec<ferisk::Prospect> = context.into_iter().map(|p| p.inner).collect();
    let ctx = ferisk::ActionSpace::new(&actions).map_err(to_py_err)?;
    let s = ferisk::score(&prospect.inner, &ctx, &cfg).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("total", s.total)?;
    d.set_item("entropy_term", s.entropy_term)?;
    d.set_item("variance_term", s.variance_term)?;
    d.set_item("utility_term", s.utility_term)?;
    Ok(d)
}

/// Rank prospects from safest to riskiest. Returns (rank, label, total) rows.
#[pyfunction]
#[pyo3(signature = (prospects, measure="neu-fev", lam=0.5, q=0.5, bins=None))]
fn rank(
    prospects: Vec<Prospect>,
    measure: &str,
    lam: f64,
    q: f64,
    bins: Option<usize>,
) -> PyResult<Vec<(usize, String, f64)>> {
    let cfg = risk_config(measure, lam, q, bins)?;
    let actions: Vec<ferisk::Prospect> = prospects.into_iter().map(|p| p.inner).collect();
    let ranking = ferisk::rank(&actions, &cfg).map_err(to_py_err)?;
    Ok(ranking
        .entries()
        .iter()
        .map(|e| (e.rank, e.label.clone(), e.score.total))
        .collect())
}

/// Largest entropy weight at which scaling payoffs by k > 1 still lowers the
/// variance-bearing normalized measure.
#[pyfunction]
fn scaling_lambda_bound(prospect: &Prospect, k: f64) -> PyResult<f64> {
    risk::scaling_lambda_bound(&prospect.inner, k).map_err(to_py_err)
}

/// Linearized score response lambda / (2 V_max) * delta_s2 to a small
/// spread change at fixed expected utility.
#[pyfunction]
fn target_shift(delta_s2: f64, lam: f64, v_max: f64) -> PyResult<f64> {
    risk::target_shift(delta_s2, lam, v_max).map_err(to_py_err)
}

/// Plug-in estimate (m4 - m2^2)/n of the sampling variance of the sample
/// variance.
#[pyfunction]
fn sample_variance_variance(series: Vec<f64>) -> PyResult<f64> {
    risk::sample_variance_variance(&series).map_err(to_py_err)
}

#[pymodule]
fn ferisk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Prospect>()?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_fractional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_term_max, m)?)?;
    m.add_function(wrap_pyfunction!(information_gain, m)?)?;
    m.add_function(wrap_pyfunction!(bin_prospect, m)?)?;
    m.add_function(wrap_pyfunction!(synth_prospects, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_lambda_bound, m)?)?;
    m.add_function(wrap_pyfunction!(target_shift, m)?)?;
    m.add_function(wrap_pyfunction!(sample_variance_variance, m)?)?;
    Ok(())
}
