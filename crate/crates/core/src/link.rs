//! Parametric model of the wearable-to-smartphone wireless link.
//!
//! Instead of simulating the Wi-Fi stack packet by packet, the link is
//! reduced to an effective data rate: the number of payload bits per second
//! a bulk transfer actually achieves once MAC and transport overheads are
//! absorbed. The deterministic default rate is recovered from two
//! independently observed offload-vs-local time ratios (a light task that
//! slows down 2.10x when offloaded and a heavy one that speeds up to 0.62x);
//! both anchors solve to about 20.3 Mbps, which is the strongest evidence
//! that a single effective rate is an adequate stand-in.
//!
//! A stochastic mode applies multiplicative log-normal noise per offloaded
//! task (effective throughput is positive and right-skewed), clamped below
//! at a configurable floor. The rate is sampled once per task, not per byte.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::model::{self, ApplicationClass, DeviceProfile};
use crate::presets;

/// Offload/local time ratio observed for the lightest application class;
/// one of the two calibration anchors.
pub const LIGHT_ANCHOR_TIME_RATIO: f64 = 2.10;
/// Offload/local time ratio observed for the heaviest application class;
/// the other calibration anchor.
pub const HEAVY_ANCHOR_TIME_RATIO: f64 = 0.62;

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("link rates must be positive and finite, got base={base_rate_bps} bps, floor={floor_rate_bps} bps")]
    InvalidRate { base_rate_bps: f64, floor_rate_bps: f64 },
    #[error("floor rate {floor_rate_bps} bps exceeds base rate {base_rate_bps} bps")]
    FloorAboveBase { base_rate_bps: f64, floor_rate_bps: f64 },
    #[error("rel_sigma must be >= 0 and finite, got {0}")]
    InvalidSigma(f64),
    #[error(
        "time ratio {target_ratio} is infeasible for `{app}`: remote execution alone takes \
         {remote_fraction:.4}x the local time, so the ratio must exceed that bound"
    )]
    InfeasibleRatio { app: String, target_ratio: f64, remote_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Deterministic,
    Stochastic,
}

/// Effective-rate link model. `rel_sigma` and `floor_rate_bps` only matter
/// for the stochastic kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkModel {
    pub kind: LinkKind,
    pub base_rate_bps: f64,
    pub rel_sigma: f64,
    pub floor_rate_bps: f64,
}

impl LinkModel {
    pub fn deterministic(base_rate_bps: f64) -> Result<Self, LinkError> {
        let link = Self { kind: LinkKind::Deterministic, base_rate_bps, rel_sigma: 0.0, floor_rate_bps: base_rate_bps };
        link.validate()?;
        Ok(link)
    }

    pub fn stochastic(base_rate_bps: f64, rel_sigma: f64, floor_rate_bps: f64) -> Result<Self, LinkError> {
        let link = Self { kind: LinkKind::Stochastic, base_rate_bps, rel_sigma, floor_rate_bps };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let rates_ok = self.base_rate_bps > 0.0
            && self.base_rate_bps.is_finite()
            && self.floor_rate_bps > 0.0
            && self.floor_rate_bps.is_finite();
        if !rates_ok {
            return Err(LinkError::InvalidRate {
                base_rate_bps: self.base_rate_bps,
                floor_rate_bps: self.floor_rate_bps,
            });
        }
        if self.floor_rate_bps > self.base_rate_bps {
            return Err(LinkError::FloorAboveBase {
                base_rate_bps: self.base_rate_bps,
                floor_rate_bps: self.floor_rate_bps,
            });
        }
        if !(self.rel_sigma >= 0.0 && self.rel_sigma.is_finite()) {
            return Err(LinkError::InvalidSigma(self.rel_sigma));
        }
        Ok(())
    }

    /// Effective rate for one offloaded task. Deterministic links return the
    /// base rate without touching the random stream; stochastic links draw
    /// `base * exp(N(0, rel_sigma^2))`, clamped below at the floor rate.
    pub fn sample_rate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            LinkKind::Deterministic => self.base_rate_bps,
            LinkKind::Stochastic => {
                let z: f64 = rng.sample(StandardNormal);
                (self.base_rate_bps * (self.rel_sigma * z).exp()).max(self.floor_rate_bps)
            }
        }
    }

    /// The deterministic default link, calibrated from the light-application
    /// anchor ratio. Solves to roughly 20.3 Mbps with the default profiles.
    pub fn calibrated_default() -> Self {
        let rate = anchor_rate(
            &presets::iot_sensors(),
            &presets::wearable(),
            &presets::smartphone(),
            LIGHT_ANCHOR_TIME_RATIO,
        )
        .expect("default anchor ratio is feasible");
        Self::deterministic(rate).expect("solved anchor rate is positive")
    }
}

/// Solves for the effective rate at which offloading `app` takes exactly
/// `target_ratio` times its local execution time:
/// `D/R + D*C/F_S = target_ratio * D*C/F_W`.
///
/// Infeasible when the remote execution alone already exceeds the target,
/// i.e. when `target_ratio <= (D*C/F_S) / (D*C/F_W)`.
pub fn anchor_rate(
    app: &ApplicationClass,
    wearable: &DeviceProfile,
    smartphone: &DeviceProfile,
    target_ratio: f64,
) -> Result<f64, LinkError> {
    let t_local = model::local_exec_time(app, wearable);
    let t_remote = model::remote_exec_time(app, smartphone);
    let transmit_s = target_ratio * t_local - t_remote;
    if !(transmit_s > 0.0) {
        return Err(LinkError::InfeasibleRatio {
            app: app.name.clone(),
            target_ratio,
            remote_fraction: t_remote / t_local,
        });
    }
    Ok(app.input_bits as f64 / transmit_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_link_always_returns_base_rate() {
        let link = LinkModel::deterministic(20.3e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(link.sample_rate(&mut rng), 20.3e6);
        }
    }

    #[test]
    fn zero_sigma_stochastic_link_is_degenerate() {
        let link = LinkModel::stochastic(20.3e6, 0.0, 2.03e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(link.sample_rate(&mut rng), 20.3e6);
        }
    }

    #[test]
    fn stochastic_median_tracks_base_rate() {
        // The median of a log-normal equals its base scale.
        let link = LinkModel::stochastic(20.3e6, 0.2, 2.03e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut draws: Vec<f64> = (0..100_000).map(|_| link.sample_rate(&mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = draws[draws.len() / 2];
        assert!((median - 20.3e6).abs() / 20.3e6 < 0.02, "median {median}");
    }

    #[test]
    fn samples_respect_the_floor_and_repeat_per_seed() {
        let link = LinkModel::stochastic(20.3e6, 1.5, 10.0e6).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let ra = link.sample_rate(&mut a);
            assert!(ra >= 10.0e6);
            assert_eq!(ra.to_bits(), link.sample_rate(&mut b).to_bits());
        }
    }

    #[test]
    fn light_anchor_solves_near_twenty_megabits() {
        let rate = anchor_rate(
            &presets::iot_sensors(),
            &presets::wearable(),
            &presets::smartphone(),
            LIGHT_ANCHOR_TIME_RATIO,
        )
        .unwrap();
        assert!((rate - 20.26e6).abs() / 20.26e6 < 0.01, "rate {rate}");
    }

    #[test]
    fn both_anchors_agree_within_two_percent() {
        let light = anchor_rate(
            &presets::iot_sensors(),
            &presets::wearable(),
            &presets::smartphone(),
            LIGHT_ANCHOR_TIME_RATIO,
        )
        .unwrap();
        let heavy = anchor_rate(
            &presets::face_recognition(),
            &presets::wearable(),
            &presets::smartphone(),
            HEAVY_ANCHOR_TIME_RATIO,
        )
        .unwrap();
        assert!((light - heavy).abs() / light < 0.02, "light {light}, heavy {heavy}");
    }

    #[test]
    fn calibrated_default_reproduces_heavy_speedup_and_midweight_parity() {
        let link = LinkModel::calibrated_default();
        let w = presets::wearable();
        let s = presets::smartphone();

        let face = presets::face_recognition();
        let (offload_time, _) = model::offload_totals(&face, link.base_rate_bps, &w, &s);
        let ratio = offload_time.total_s / model::local_exec_time(&face, &w);
        assert!((ratio - 0.62).abs() / 0.62 < 0.02, "face ratio {ratio}");

        let queens = presets::four_queens();
        let (offload_time, _) = model::offload_totals(&queens, link.base_rate_bps, &w, &s);
        let ratio = offload_time.total_s / model::local_exec_time(&queens, &w);
        assert!((ratio - 1.0).abs() < 0.05, "four_queens ratio {ratio}");
    }

    #[test]
    fn infeasible_ratio_is_rejected_with_the_bound() {
        let err = anchor_rate(
            &presets::face_recognition(),
            &presets::wearable(),
            &presets::smartphone(),
            0.40,
        )
        .unwrap_err();
        match err {
            LinkError::InfeasibleRatio { remote_fraction, .. } => {
                assert!((remote_fraction - 1.0 / 2.2).abs() < 1e-9);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(LinkModel::deterministic(0.0).is_err());
        assert!(LinkModel::stochastic(20.3e6, -0.1, 2.0e6).is_err());
        assert!(LinkModel::stochastic(20.3e6, 0.2, 30.0e6).is_err());
        assert!(LinkModel::stochastic(20.3e6, 0.2, 0.0).is_err());
    }
}
