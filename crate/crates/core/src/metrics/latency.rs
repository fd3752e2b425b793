//! Least-squares fit of `latency = a*Np + b*No + c`.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// One measured request: prompt tokens, output tokens, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub np: f64,
    pub no: f64,
    #[serde(rename = "latency_s")]
    pub latency: f64,
}

impl LatencySample {
    pub fn new(np: f64, no: f64, latency: f64) -> Self {
        Self { np, no, latency }
    }
}

/// Seconds per prompt token, seconds per output token, fixed overhead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LatencyModel {
    pub fn predict(&self, np: f64, no: f64) -> f64 {
        self.a * np + self.b * no + self.c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyFit {
    pub model: LatencyModel,
    /// Standard errors of a, b, c; zero for parameters pinned at 0.
    pub std_errors: [f64; 3],
    pub rms_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {0} has a negative or non-finite field")]
    BadSample(usize),
    #[error("design is rank-deficient: `{parameter}` cannot be identified")]
    DegenerateDesign {
        parameter: &'static str,
        /// Fit of the identifiable parameters, with the others pinned at 0.
        partial: Option<LatencyModel>,
    },
    #[error("cannot read samples: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOptions {
    /// Pin `a` to zero, for data where prompt length barely matters.
    pub fix_a_zero: bool,
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// OLS over the chosen columns (0 = Np, 1 = No); intercept always included.
fn ols(samples: &[LatencySample], cols: &[usize]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let n = samples.len();
    let p = cols.len() + 1;
    let x = DMatrix::from_fn(n, p, |i, j| match cols.get(j) {
        Some(0) => samples[i].np,
        Some(_) => samples[i].no,
        None => 1.0,
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.latency));
    let xtx = x.transpose() * &x;
    let inv = xtx.clone().try_inverse()?;
    // Reject near-singular systems that invert only through rounding.
    let cond = xtx.norm() * inv.norm();
    if !cond.is_finite() || cond > 1e14 {
        return None;
    }
    let beta = x.clone().svd(true, true).solve(&y, 1e-12).ok()?;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let dof = n.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let se = (0..p).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect();
    Some((beta.iter().copied().collect(), se, (rss / n as f64).sqrt()))
}

fn assemble(cols: &[usize], beta: &[f64], se: &[f64], rms: f64, n: usize) -> LatencyFit {
    let mut model = LatencyModel { a: 0.0, b: 0.0, c: 0.0 };
    let mut errs = [0.0; 3];
    for (j, &col) in cols.iter().enumerate() {
        if col == 0 {
            model.a = beta[j];
        } else {
            model.b = beta[j];
        }
        errs[col] = se[j];
    }
    model.c = beta[cols.len()];
    errs[2] = se[cols.len()];
    LatencyFit {
        model,
        std_errors: errs,
        rms_residual: rms,
        samples: n,
    }
}

/// Fits the affine latency model. Negative `a` or `b` are clamped to zero
/// by refitting without that regressor.
pub fn fit_latency(samples: &[LatencySample], opts: FitOptions) -> Result<LatencyFit, FitError> {
    if samples.len() < 3 {
        return Err(FitError::TooFewSamples(samples.len()));
    }
    if let Some(i) = samples
        .iter()
        .position(|s| ![s.np, s.no, s.latency].iter().all(|v| v.is_finite() && *v >= 0.0))
    {
        return Err(FitError::BadSample(i));
    }
    let n = samples.len();
    let fit_cols = |cols: &[usize]| ols(samples, cols).map(|(b, se, rms)| assemble(cols, &b, &se, rms, n));
    let vary_np = distinct(samples.iter().map(|s| s.np)) >= 2;
    let vary_no = distinct(samples.iter().map(|s| s.no)) >= 2;
    if !vary_no {
        let partial = if vary_np && !opts.fix_a_zero { fit_cols(&[0]) } else { fit_cols(&[]) };
        return Err(FitError::DegenerateDesign {
            parameter: "b",
            partial: partial.map(|f| f.model),
        });
    }
    if opts.fix_a_zero {
        return fit_cols(&[1]).ok_or(FitError::DegenerateDesign {
            parameter: "b",
            partial: None,
        });
    }
    if !vary_np {
        return Err(FitError::DegenerateDesign {
            parameter: "a",
            partial: fit_cols(&[1]).map(|f| f.model),
        });
    }
    let full = fit_cols(&[0, 1]).ok_or(FitError::DegenerateDesign {
        parameter: "a",
        partial: fit_cols(&[1]).map(|f| f.model),
    })?;
    let m = full.model;
    let refit = match (m.a < 0.0, m.b < 0.0) {
        (false, false) => return Ok(full),
        (true, false) => fit_cols(&[1]),
        (false, true) => fit_cols(&[0]),
        (true, true) => fit_cols(&[]),
    };
    let mut fit = refit.ok_or(FitError::DegenerateDesign {
        parameter: "a",
        partial: None,
    })?;
    // The one-regressor refit can itself go negative; pin it as well.
    if fit.model.a < 0.0 || fit.model.b < 0.0 {
        fit = fit_cols(&[]).expect("intercept-only fit always exists");
    }
    Ok(fit)
}

/// Reads `np,no,latency_s` CSV with a header row.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<LatencySample>, FitError> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(|e: csv::Error| FitError::Input(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_when_both_clamped() {
        let s = vec![
            LatencySample::new(1.0, 1.0, 3.0),
            LatencySample::new(2.0, 3.0, 2.0),
            LatencySample::new(3.0, 2.0, 1.0),
            LatencySample::new(4.0, 5.0, 0.5),
        ];
        let f = fit_latency(&s, FitOptions::default()).unwrap();
        assert!(f.model.a >= 0.0 && f.model.b >= 0.0);
    }

    #[test]
    fn csv_roundtrip() {
        let text = "np,no,latency_s\n100,10,1.5\n200,20,2.5\n";
        let s = read_samples_csv(text.as_bytes()).unwrap();
        assert_eq!(s[1], LatencySample::new(200.0, 20.0, 2.5));
        assert!(read_samples_csv("np,no\n1,2\n".as_bytes()).is_err());
    }
}
