use std::fmt::Write as _;

use serde::Serialize;

use crate::cli::format::sig;
use crate::model::{squeeze_factor_to_db, InterferometerParams, Strategy};
use crate::sensitivity::{
    apriori_tolerance, dphi_min, fwhm, gain_db, implied_inefficiency, inefficiency, k_factor, required_eta, snl,
};

/// Headline figures for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub squeezing_db: f64,
    pub output_gain_db: f64,
    pub dphi_min: f64,
    pub dphi_snl: f64,
    pub gain_db: f64,
    /// `10 log10(dphi_SNL/dphi_min)`, half of `gain_db`.
    pub phase_ratio_db: f64,
    pub eps2: f64,
    pub a_factor: f64,
    pub k_factor: f64,
    pub fwhm_single: f64,
    pub fwhm_differential: f64,
    pub apriori_bound: f64,
    pub target: Option<TargetGain>,
}

/// What it takes to observe a given sensitivity gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetGain {
    pub gain_db: f64,
    /// `None` when the squeezing alone cannot reach the gain.
    pub implied_eps2: Option<f64>,
    /// External transmissivity giving `implied_eps2` at the current `mu` and `r2`.
    pub implied_eta: Option<f64>,
}

pub fn summarize(params: &InterferometerParams, target_gain_db: Option<f64>) -> Summary {
    let target = target_gain_db.map(|g| {
        let eps2 = implied_inefficiency(params.r1, g);
        TargetGain {
            gain_db: g,
            implied_eps2: eps2,
            implied_eta: eps2
                .and_then(|e| required_eta(params.mu, params.r2, e))
                .filter(|&eta| eta <= 1.0),
        }
    });
    Summary {
        squeezing_db: squeeze_factor_to_db(params.r1),
        output_gain_db: squeeze_factor_to_db(params.r2),
        dphi_min: dphi_min(params),
        dphi_snl: snl(params.n_photons),
        gain_db: gain_db(params),
        phase_ratio_db: 10.0 * (snl(params.n_photons) / dphi_min(params)).log10(),
        eps2: inefficiency(params),
        a_factor: params.technical_noise_factor(),
        k_factor: k_factor(params),
        fwhm_single: fwhm(Strategy::SingleDetector, params).expect("defined for single"),
        fwhm_differential: fwhm(Strategy::Differential, params).expect("defined for differential"),
        apriori_bound: apriori_tolerance(params),
        target,
    }
}

impl Summary {
    pub fn render(&self) -> String {
        let d = 8;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k:<44} {v}");
        };
        line("input squeezing [dB, variance 10log10 e^2r]", sig(self.squeezing_db, d));
        line("output amplification [dB, variance]", sig(self.output_gain_db, d));
        line("technical noise factor A", sig(self.a_factor, d));
        line("overall inefficiency eps^2", sig(self.eps2, d));
        line("shot-noise limit dphi_SNL [rad]", sig(self.dphi_snl, d));
        line("best sensitivity dphi_min [rad]", sig(self.dphi_min, d));
        line("dphi_min / dphi_SNL", sig(self.dphi_min / self.dphi_snl, d));
        line("sensitivity gain [dB, amplitude 20log10]", sig(self.gain_db, d));
        line("dphi_SNL / dphi_min [dB, 10log10]", sig(self.phase_ratio_db, d));
        line("deterioration factor K [rad^2]", sig(self.k_factor, d));
        line("FWHM single detector [rad]", sig(self.fwhm_single, d));
        line(
            "FWHM differential, per lobe, 2 lobes [rad]",
            sig(self.fwhm_differential, d),
        );
        line("a-priori phase tolerance [rad]", sig(self.apriori_bound, d));
        if let Some(t) = &self.target {
            line("target gain [dB, amplitude]", sig(t.gain_db, d));
            match t.implied_eps2 {
                Some(e) => line("  implied eps^2", sig(e, d)),
                None => line("  implied eps^2", "unreachable with this squeezing".into()),
            }
            if let Some(eta) = t.implied_eta {
                line("  implied eta at current mu, r2", sig(eta, d));
            }
        }
        out
    }
}
