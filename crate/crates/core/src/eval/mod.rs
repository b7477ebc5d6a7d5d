//! Quality metrics, rate accounting, RD cost and Bjøntegaard BD-rate.

mod bd;
mod metrics;
mod report;

pub use bd::{bd_rate, bd_rate_piecewise_linear};
pub use metrics::{
    bitrate_kbps, psnr, psnr_sequence, rd_cost, ssim, ssim_sequence, PSNR_CAP_DB,
};
pub use report::{emit_report, ReportRow, REPORT_HEADER};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricId {
    Psnr,
    Ssim,
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricId::Psnr => write!(f, "psnr"),
            MetricId::Ssim => write!(f, "ssim"),
        }
    }
}

/// One (rate, quality) sample of a codec configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RDPoint {
    pub rate_kbps: f64,
    pub quality: f64,
}

/// Rate-ordered samples of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RDCurve {
    metric: MetricId,
    points: Vec<RDPoint>,
}

impl RDCurve {
    pub fn new(metric: MetricId, mut points: Vec<RDPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConfig("an RD curve needs >= 2 points".into()));
        }
        for p in &points {
            if !(p.rate_kbps > 0.0) || !p.quality.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "invalid RD point ({}, {})",
                    p.rate_kbps, p.quality
                )));
            }
        }
        points.sort_by(|a, b| a.rate_kbps.partial_cmp(&b.rate_kbps).unwrap());
        if points.windows(2).any(|w| w[0].rate_kbps >= w[1].rate_kbps) {
            return Err(Error::InvalidConfig("rates must be strictly increasing".into()));
        }
        Ok(Self { metric, points })
    }

    pub fn metric(&self) -> MetricId {
        self.metric
    }

    pub fn points(&self) -> &[RDPoint] {
        &self.points
    }
}
