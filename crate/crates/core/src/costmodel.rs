//! Monthly cost of keeping a GOP in object storage versus re-transcoding it
//! for every view, and the storage/transcode ratio that drives placement.
//!
//! Units: GOP sizes are megabytes, storage prices are $/GB-month with
//! 1 GB = 2^10 MB, VM prices are $/hour, transcode times are seconds and
//! view counts are views per month. Every cost returned here is $/month.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::Video;

pub const MB_PER_GB: f64 = 1024.0;
pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Storage classes, hottest (most expensive) first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    Standard,
    StandardIa,
    OneZoneIa,
    Glacier,
}

impl Tier {
    pub const ALL: [Tier; 4] = [
        Tier::Standard,
        Tier::StandardIa,
        Tier::OneZoneIa,
        Tier::Glacier,
    ];

    /// 1-based tier number (1 = Standard ... 4 = Glacier).
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Tier> {
        match n {
            1..=4 => Some(Tier::ALL[n as usize - 1]),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Tier::Standard => "s3_standard",
            Tier::StandardIa => "s3_standard_ia",
            Tier::OneZoneIa => "s3_one_zone_ia",
            Tier::Glacier => "s3_glacier",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// AWS list prices used by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PricingCatalog {
    /// $/GB-month for tiers 1..=4 (Standard, Standard-IA, One Zone-IA, Glacier).
    pub storage: [f64; 4],
    /// $/VM-hour of the transcoding instance (t2.small).
    pub transcode: f64,
    /// $/GB-month CloudFront surcharge.
    pub cdn: f64,
    pub cdn_enabled: bool,
    /// How many CDN copies each stored byte is billed for.
    pub cdn_replication: f64,
}

impl Default for PricingCatalog {
    fn default() -> Self {
        Self {
            storage: [0.023, 0.0125, 0.01, 0.001],
            transcode: 0.026,
            cdn: 0.085,
            cdn_enabled: false,
            cdn_replication: 1.0,
        }
    }
}

impl PricingCatalog {
    pub fn with_cdn(mut self, enabled: bool) -> Self {
        self.cdn_enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.storage;
        let ordered = s[0] > s[1] && s[1] > s[2] && s[2] > s[3] && s[3] > 0.0;
        if !ordered || s.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config(format!(
                "storage prices must be finite and strictly decreasing to a positive Glacier price, got {s:?}"
            )));
        }
        if !(self.transcode > 0.0 && self.transcode.is_finite()) {
            return Err(Error::Config(format!(
                "transcode price must be positive, got {}",
                self.transcode
            )));
        }
        if !(self.cdn >= 0.0 && self.cdn.is_finite()) {
            return Err(Error::Config(format!(
                "cdn price must be >= 0, got {}",
                self.cdn
            )));
        }
        if !(self.cdn_replication >= 0.0 && self.cdn_replication.is_finite()) {
            return Err(Error::Config(format!(
                "cdn replication must be >= 0, got {}",
                self.cdn_replication
            )));
        }
        Ok(())
    }

    pub fn storage_price(&self, tier: Tier) -> f64 {
        self.storage[tier.index()]
    }

    /// Storage price actually billed for `tier`, including the CDN surcharge
    /// when the CDN is on. Glacier is never fronted by the CDN.
    pub fn effective_storage_price(&self, tier: Tier) -> f64 {
        let base = self.storage_price(tier);
        if self.cdn_enabled && tier != Tier::Glacier {
            base + self.cdn * self.cdn_replication
        } else {
            base
        }
    }
}

pub fn effective_storage_price(pricing: &PricingCatalog, tier: Tier) -> f64 {
    pricing.effective_storage_price(tier)
}

/// Per-GOP view decay exponent: a GOP at position j receives γ / j^alpha views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayModel {
    pub alpha: f64,
}

impl Default for DecayModel {
    fn default() -> Self {
        Self { alpha: 0.1 }
    }
}

impl DecayModel {
    pub fn new(alpha: f64) -> Result<Self> {
        let model = Self { alpha };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "decay alpha must be > 0, got {}",
                self.alpha
            )))
        }
    }

    /// `j^alpha` for j = 1..=m, so that `views / table[j-1]` equals
    /// [`gop_views`] bit for bit.
    pub fn divisors(&self, m: usize) -> Vec<f64> {
        (1..=m).map(|j| (j as f64).powf(self.alpha)).collect()
    }
}

/// Estimated monthly views of the GOP at 1-based position `j`.
pub fn gop_views(gamma: f64, j: usize, decay: &DecayModel) -> Result<f64> {
    if j == 0 {
        return Err(Error::GopIndex(j));
    }
    Ok(gamma / (j as f64).powf(decay.alpha))
}

/// Fills `est_views` on every GOP of `video` from its monthly view count.
pub fn estimate_views(video: &mut Video, decay: &DecayModel) {
    let gamma = video.views;
    for gop in &mut video.gops {
        gop.est_views = gamma / (gop.index as f64).powf(decay.alpha);
    }
}

/// Estimated views for every GOP of `video`, in GOP order.
pub fn estimated_views(video: &Video, decay: &DecayModel) -> Vec<f64> {
    video
        .gops
        .iter()
        .map(|g| video.views / (g.index as f64).powf(decay.alpha))
        .collect()
}

pub fn gop_storage_cost(size_mb: f64, price_per_gb_month: f64) -> f64 {
    size_mb * price_per_gb_month / MB_PER_GB
}

pub fn video_storage_cost(video: &Video, price_per_gb_month: f64) -> f64 {
    video
        .gops
        .iter()
        .map(|g| gop_storage_cost(g.size_mb, price_per_gb_month))
        .sum()
}

/// Monthly cost of transcoding a GOP once per view.
pub fn gop_transcode_cost(est_views: f64, tau_s: f64, price_per_hour: f64) -> f64 {
    est_views * tau_s * price_per_hour / SECONDS_PER_HOUR
}

pub fn video_transcode_cost(video: &Video, decay: &DecayModel, price_per_hour: f64) -> f64 {
    video
        .gops
        .iter()
        .map(|g| {
            let xi = video.views / (g.index as f64).powf(decay.alpha);
            gop_transcode_cost(xi, g.transcode_time_s, price_per_hour)
        })
        .sum()
}

/// Storage-to-transcode ratio. A ratio of at most 1 means "store".
///
/// Zero transcode cost yields `+inf` (nothing to save by storing) unless the
/// storage cost is zero as well, which is a tie and therefore 1.
pub fn gop_ratio(storage: f64, transcode: f64) -> f64 {
    if transcode > 0.0 {
        storage / transcode
    } else if storage > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Video-level ratio: total storage over total transcode (not a mean of GOP ratios).
/// Storage is priced at the tier-1 effective price.
pub fn video_ratio(video: &Video, pricing: &PricingCatalog, decay: &DecayModel) -> f64 {
    let sc = video_storage_cost(video, pricing.effective_storage_price(Tier::Standard));
    let tc = video_transcode_cost(video, decay, pricing.transcode);
    gop_ratio(sc, tc)
}

/// Costs of one GOP under both options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GopCost {
    pub storage: f64,
    pub transcode: f64,
    pub ratio: f64,
}

impl GopCost {
    pub fn new(storage: f64, transcode: f64) -> Self {
        Self {
            storage,
            transcode,
            ratio: gop_ratio(storage, transcode),
        }
    }

    pub fn prefers_storage(&self) -> bool {
        self.ratio <= 1.0
    }
}
