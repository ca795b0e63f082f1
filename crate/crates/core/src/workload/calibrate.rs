use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{synthesize_video, weibull_draw, GopStats, TranscodeTimeModel, Video, ViewModel};
use crate::costmodel::{gop_transcode_cost, video_storage_cost, DecayModel, PricingCatalog, Tier};
use crate::error::{Error, Result};

/// What a video costs per month if stored at tier 1, and what each monthly
/// view costs if it is transcoded instead. A video is frequently accessed
/// when `storage < views * transcode_per_view`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoEconomics {
    pub id: u64,
    pub storage: f64,
    pub transcode_per_view: f64,
}

impl VideoEconomics {
    pub fn of(video: &Video, pricing: &PricingCatalog, decay: &DecayModel) -> Self {
        let transcode_per_view = video
            .gops
            .iter()
            .map(|g| {
                let xi = 1.0 / (g.index as f64).powf(decay.alpha);
                gop_transcode_cost(xi, g.transcode_time_s, pricing.transcode)
            })
            .sum();
        Self {
            id: video.id,
            storage: video_storage_cost(video, pricing.effective_storage_price(Tier::Standard)),
            transcode_per_view,
        }
    }

    pub fn is_fav(&self, views: f64) -> bool {
        views > 0.0 && self.storage < views * self.transcode_per_view
    }
}

/// Repository reduced to what calibration needs, plus the seed of its view stream.
#[derive(Debug, Clone)]
pub struct CalibrationSet {
    pub seed: u64,
    pub videos: Vec<VideoEconomics>,
}

impl CalibrationSet {
    pub fn from_repo(
        seed: u64,
        repo: &[Video],
        pricing: &PricingCatalog,
        decay: &DecayModel,
    ) -> Self {
        Self {
            seed,
            videos: repo
                .par_iter()
                .map(|v| VideoEconomics::of(v, pricing, decay))
                .collect(),
        }
    }

    /// Synthesizes `n_videos` videos one at a time and keeps only their economics.
    pub fn synthesize(
        seed: u64,
        n_videos: usize,
        stats: &GopStats,
        time_model: &TranscodeTimeModel,
        pricing: &PricingCatalog,
        decay: &DecayModel,
    ) -> Result<Self> {
        if n_videos == 0 {
            return Err(Error::InvalidArgument(
                "calibration set needs at least one video".into(),
            ));
        }
        stats.validate()?;
        time_model.validate()?;
        let videos = (0..n_videos as u64)
            .into_par_iter()
            .map(|id| {
                synthesize_video(seed, id, stats, time_model)
                    .map(|v| VideoEconomics::of(&v, pricing, decay))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { seed, videos })
    }

    fn fav_fraction(&self, draws: &[f64], view_scale: f64) -> f64 {
        let fav = self
            .videos
            .iter()
            .zip(draws)
            .filter(|(e, w)| e.is_fav((view_scale * **w).round()))
            .count();
        fav as f64 / self.videos.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub weibull_shape: f64,
    pub target: f64,
    pub view_scale: f64,
    /// FAV fraction reached on the calibration set.
    pub achieved: f64,
}

impl Calibration {
    pub fn view_model(&self, weibull_scale: f64) -> ViewModel {
        ViewModel {
            weibull_shape: self.weibull_shape,
            weibull_scale,
            view_scale: self.view_scale,
        }
    }
}

/// Bisects `view_scale` until the FAV fraction of `set` is within `tolerance`
/// of `target`. The fraction is a non-decreasing step function of the scale.
pub fn calibrate_view_scale(
    set: &CalibrationSet,
    weibull_shape: f64,
    weibull_scale: f64,
    target: f64,
    tolerance: f64,
) -> Result<Calibration> {
    if set.videos.is_empty() {
        return Err(Error::InvalidArgument("empty calibration set".into()));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidArgument(format!(
            "FAV target {target} outside [0, 1]"
        )));
    }
    let unit = ViewModel::new(weibull_shape, weibull_scale, 1.0)?;
    let draws = set
        .videos
        .iter()
        .map(|e| weibull_draw(set.seed, e.id, &unit))
        .collect::<Result<Vec<_>>>()?;

    let fail = |achieved| Error::Calibration {
        shape: weibull_shape,
        target,
        achieved,
    };

    let mut lo = 0.0;
    let mut f_lo = set.fav_fraction(&draws, lo);
    let mut hi = 1.0;
    let mut f_hi = set.fav_fraction(&draws, hi);
    while f_hi < target {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(fail(f_hi));
        }
        f_hi = set.fav_fraction(&draws, hi);
    }
    // invariant: f(lo) < target <= f(hi), unless target is reached at lo = 0
    if f_lo >= target {
        hi = lo;
        f_hi = f_lo;
    }
    for _ in 0..200 {
        if hi - lo <= hi * 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f = set.fav_fraction(&draws, mid);
        if f < target {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    let (view_scale, achieved) = if (f_hi - target).abs() <= (target - f_lo).abs() {
        (hi, f_hi)
    } else {
        (lo, f_lo)
    };
    if (achieved - target).abs() > tolerance {
        return Err(fail(achieved));
    }
    Ok(Calibration {
        weibull_shape,
        target,
        view_scale,
        achieved,
    })
}
