//! Herbst constants, admissibility thresholds on the coupling and the Riesz
//! constants `c_alpha`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `M_kappa = 2^-kappa Gamma(3/4 - kappa/2) / Gamma(3/4 + kappa/2)`, `0 < kappa < 3/2`.
pub fn herbst_constant(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.5) {
        return Err(Error::OutOfRange { name: "kappa", value: kappa, range: "(0, 3/2)" });
    }
    Ok((-kappa * LN_2 + ln_gamma(0.75 - 0.5 * kappa) - ln_gamma(0.75 + 0.5 * kappa)).exp())
}

/// `c_alpha = pi^(-alpha/2) Gamma(alpha/2)`, `0 < alpha < 3`.
pub fn riesz_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 3.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, range: "(0, 3)" });
    }
    Ok((-0.5 * alpha * PI.ln() + ln_gamma(0.5 * alpha)).exp())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "kappa", value: kappa, range: "(0, 1]" })
    }
}

/// `|gamma| M^2 / (2 - |gamma| M^2)`, infinite once `|gamma| M^2 >= 2`.
pub fn schur_bound_from(gamma: f64, m_half_kappa_sq: f64) -> f64 {
    let x = gamma.abs() * m_half_kappa_sq;
    if x < 2.0 {
        x / (2.0 - x)
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub kappa: f64,
    pub m_kappa: f64,
    pub m_half_kappa_sq: f64,
    /// `1 / M_(kappa/2)^2`.
    pub gamma_threshold: f64,
    /// `2 / M_kappa`.
    pub gamma_max_kato: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schur_bound: Option<f64>,
}

impl CouplingReport {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let m_kappa = herbst_constant(kappa)?;
        let m_half = herbst_constant(0.5 * kappa)?;
        let m_half_kappa_sq = m_half * m_half;
        Ok(CouplingReport {
            kappa,
            m_kappa,
            m_half_kappa_sq,
            gamma_threshold: 1.0 / m_half_kappa_sq,
            gamma_max_kato: 2.0 / m_kappa,
            gamma: None,
            admissible: None,
            schur_bound: None,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self.admissible = Some(gamma.abs() * self.m_half_kappa_sq < 1.0);
        self.schur_bound = Some(self.schur_bound(gamma));
        self
    }

    pub fn schur_bound(&self, gamma: f64) -> f64 {
        schur_bound_from(gamma, self.m_half_kappa_sq)
    }
}

/// True iff `|gamma| M_(kappa/2)^2 < 1`, with the full report.
pub fn admissible(gamma: f64, kappa: f64) -> Result<(bool, CouplingReport)> {
    let report = CouplingReport::new(kappa)?.with_gamma(gamma);
    Ok((report.admissible == Some(true), report))
}

/// Error for an inadmissible coupling, carrying the threshold.
pub fn require_admissible(gamma: f64, kappa: f64) -> Result<CouplingReport> {
    let (ok, report) = admissible(gamma, kappa)?;
    if ok {
        Ok(report)
    } else {
        Err(Error::Inadmissible { gamma, kappa, threshold: report.gamma_threshold })
    }
}
