//! Synthetic video repositories: GOP counts and sizes from truncated
//! Gaussians, per-GOP transcode times from a linear model, and long-tailed
//! monthly view counts from a Weibull distribution.
//!
//! Every video draws from its own RNG stream derived from `(seed, video id)`,
//! so a video can be regenerated in isolation and parallel synthesis is
//! independent of scheduling.

mod calibrate;
mod io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costmodel::{video_ratio, DecayModel, PricingCatalog};
use crate::error::{Error, Result};

pub use calibrate::{calibrate_view_scale, Calibration, CalibrationSet, VideoEconomics};
pub use io::{read_repository, write_repository};

pub const KB_PER_MB: f64 = 1024.0;

/// Redraw budget for rejection sampling of truncated Gaussians.
pub const MAX_REDRAWS: usize = 10_000;

/// Gaussian fit of GOP sizes (kilobytes) and GOP counts per video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GopStats {
    pub size_mean_kb: f64,
    pub size_std_kb: f64,
    pub size_min_kb: f64,
    pub size_max_kb: f64,
    pub count_mean: f64,
    pub count_std: f64,
    pub count_min: usize,
    pub count_max: usize,
}

impl Default for GopStats {
    fn default() -> Self {
        Self {
            size_mean_kb: 655.08,
            size_std_kb: 201.44,
            size_min_kb: 1.91,
            size_max_kb: 2192.65,
            count_mean: 1262.79,
            count_std: 271.46,
            count_min: 580,
            count_max: 2018,
        }
    }
}

impl GopStats {
    pub fn validate(&self) -> Result<()> {
        let sizes_ok = self.size_min_kb > 0.0
            && self.size_min_kb <= self.size_mean_kb
            && self.size_mean_kb <= self.size_max_kb
            && self.size_std_kb >= 0.0
            && self.size_max_kb.is_finite();
        let counts_ok = self.count_min >= 1
            && (self.count_min as f64) <= self.count_mean
            && self.count_mean <= self.count_max as f64
            && self.count_std >= 0.0
            && self.count_std.is_finite();
        if sizes_ok && counts_ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "inconsistent GOP statistics: {self:?}"
            )))
        }
    }
}

/// Linear GOP transcode time: `slope * size_kb + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranscodeTimeModel {
    pub slope_s_per_kb: f64,
    pub intercept_s: f64,
}

impl Default for TranscodeTimeModel {
    fn default() -> Self {
        Self {
            slope_s_per_kb: 7.5e-4,
            intercept_s: 0.0,
        }
    }
}

impl TranscodeTimeModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.slope_s_per_kb >= 0.0
            && self.intercept_s >= 0.0
            && self.slope_s_per_kb.is_finite()
            && self.intercept_s.is_finite()
            && (self.slope_s_per_kb > 0.0 || self.intercept_s > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "transcode time model must be non-negative and not identically zero: {self:?}"
            )))
        }
    }
}

/// Seconds needed to transcode a GOP of `size_mb` megabytes.
pub fn transcode_time(size_mb: f64, model: &TranscodeTimeModel) -> Result<f64> {
    if !(size_mb > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "GOP size must be > 0, got {size_mb}"
        )));
    }
    let t = model.slope_s_per_kb * size_mb * KB_PER_MB + model.intercept_s;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::Config(format!(
            "transcode time model yields non-positive time {t} for {size_mb} MB"
        )))
    }
}

/// Weibull popularity model; a video's monthly views are
/// `round(view_scale * w)` with `w ~ Weibull(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewModel {
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    pub view_scale: f64,
}

impl ViewModel {
    pub fn new(weibull_shape: f64, weibull_scale: f64, view_scale: f64) -> Result<Self> {
        let m = Self {
            weibull_shape,
            weibull_scale,
            view_scale,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.weibull_shape > 0.0
            && self.weibull_scale > 0.0
            && self.view_scale >= 0.0
            && self.weibull_shape.is_finite()
            && self.weibull_scale.is_finite()
            && self.view_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid view model: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gop {
    /// 1-based position in the video.
    pub index: usize,
    pub size_mb: f64,
    pub transcode_time_s: f64,
    /// Estimated views per month; zero until filled by the cost model.
    pub est_views: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Video {
    pub id: u64,
    /// Views per month.
    pub views: f64,
    pub gops: Vec<Gop>,
}

impl Video {
    pub fn gop_count(&self) -> usize {
        self.gops.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gops.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "video {} has no GOPs",
                self.id
            )));
        }
        if !(self.views >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "video {} has negative views {}",
                self.id, self.views
            )));
        }
        for (pos, g) in self.gops.iter().enumerate() {
            if g.index != pos + 1 {
                return Err(Error::InvalidArgument(format!(
                    "video {}: GOP at position {} has index {}",
                    self.id,
                    pos + 1,
                    g.index
                )));
            }
            if !(g.size_mb > 0.0) || !(g.transcode_time_s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "video {}: GOP {} must have positive size and transcode time",
                    self.id, g.index
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Gops = 1,
    Views = 2,
}

fn stream_rng(seed: u64, stream: Stream, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((id << 4) | stream as u64);
    rng
}

fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    what: &'static str,
    mean: f64,
    std: f64,
    accept: impl Fn(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let normal = Normal::new(mean, std)
        .map_err(|e| Error::Config(format!("{what}: bad normal({mean}, {std}): {e}")))?;
    for _ in 0..MAX_REDRAWS {
        if let Some(v) = accept(normal.sample(rng)) {
            return Ok(v);
        }
    }
    Err(Error::Sampling {
        what,
        lo,
        hi,
        redraws: MAX_REDRAWS,
    })
}

/// GOP count: a normal draw rounded to the nearest integer, redrawn until it
/// lies in `[count_min, count_max]`.
pub fn sample_gop_count<R: Rng + ?Sized>(rng: &mut R, stats: &GopStats) -> Result<usize> {
    let (lo, hi) = (stats.count_min as f64, stats.count_max as f64);
    let v = truncated_normal(
        rng,
        "GOP count",
        stats.count_mean,
        stats.count_std,
        |x| {
            let r = x.round();
            (r >= lo && r <= hi).then_some(r)
        },
        lo,
        hi,
    )?;
    Ok(v as usize)
}

/// GOP size in megabytes, from a normal in kilobytes truncated to
/// `[size_min_kb, size_max_kb]` by rejection.
pub fn sample_gop_size<R: Rng + ?Sized>(rng: &mut R, stats: &GopStats) -> Result<f64> {
    let (lo, hi) = (stats.size_min_kb, stats.size_max_kb);
    let kb = truncated_normal(
        rng,
        "GOP size",
        stats.size_mean_kb,
        stats.size_std_kb,
        |x| (x >= lo && x <= hi).then_some(x),
        lo,
        hi,
    )?;
    Ok(kb / KB_PER_MB)
}

/// Regenerates video `id` of the repository identified by `seed`. Views start at 0.
pub fn synthesize_video(
    seed: u64,
    id: u64,
    stats: &GopStats,
    time_model: &TranscodeTimeModel,
) -> Result<Video> {
    let mut rng = stream_rng(seed, Stream::Gops, id);
    let m = sample_gop_count(&mut rng, stats)?;
    let mut gops = Vec::with_capacity(m);
    for j in 1..=m {
        let size_mb = sample_gop_size(&mut rng, stats)?;
        gops.push(Gop {
            index: j,
            size_mb,
            transcode_time_s: transcode_time(size_mb, time_model)?,
            est_views: 0.0,
        });
    }
    Ok(Video {
        id,
        views: 0.0,
        gops,
    })
}

/// Videos `0..n_videos`, synthesized in parallel.
pub fn synthesize_repository(
    seed: u64,
    n_videos: usize,
    stats: &GopStats,
    time_model: &TranscodeTimeModel,
) -> Result<Vec<Video>> {
    if n_videos == 0 {
        return Err(Error::InvalidArgument(
            "repository needs at least one video".into(),
        ));
    }
    stats.validate()?;
    time_model.validate()?;
    (0..n_videos as u64)
        .into_par_iter()
        .map(|id| synthesize_video(seed, id, stats, time_model))
        .collect()
}

/// The Weibull draw behind video `id`'s views. It depends on the shape and
/// scale but not on `view_scale`, and uses a single uniform per video so
/// different shapes share common random numbers.
pub fn weibull_draw(seed: u64, id: u64, model: &ViewModel) -> Result<f64> {
    let dist = Weibull::new(model.weibull_scale, model.weibull_shape)
        .map_err(|e| Error::Config(format!("invalid Weibull parameters: {e}")))?;
    Ok(dist.sample(&mut stream_rng(seed, Stream::Views, id)))
}

pub fn draw_views(seed: u64, id: u64, model: &ViewModel) -> Result<f64> {
    Ok((model.view_scale * weibull_draw(seed, id, model)?).round())
}

pub fn assign_views(seed: u64, repo: &mut [Video], model: &ViewModel) -> Result<()> {
    if repo.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot assign views to an empty repository".into(),
        ));
    }
    model.validate()?;
    repo.par_iter_mut().try_for_each(|v| {
        v.views = draw_views(seed, v.id, model)?;
        Ok(())
    })
}

/// Fraction of videos for which storing is strictly cheaper than transcoding
/// on demand (video-level ratio < 1).
pub fn fav_fraction(repo: &[Video], pricing: &PricingCatalog, decay: &DecayModel) -> f64 {
    if repo.is_empty() {
        return 0.0;
    }
    let fav = repo
        .par_iter()
        .filter(|v| video_ratio(v, pricing, decay) < 1.0)
        .count();
    fav as f64 / repo.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn degenerate_count_is_rounded_mean() {
        let stats = GopStats {
            count_std: 0.0,
            ..GopStats::default()
        };
        let mut r = rng(3);
        for _ in 0..20 {
            assert_eq!(sample_gop_count(&mut r, &stats).unwrap(), 1263);
        }
    }

    #[test]
    fn counts_stay_in_bounds() {
        let stats = GopStats::default();
        let mut r = rng(11);
        for _ in 0..20_000 {
            let c = sample_gop_count(&mut r, &stats).unwrap();
            assert!((580..=2018).contains(&c));
        }
    }

    #[test]
    fn count_mean_law_of_large_numbers() {
        let stats = GopStats::default();
        let mut r = rng(42);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_gop_count(&mut r, &stats).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        // rounding to integers then rejecting outside [580, 2018] keeps the
        // continuous draws in [579.5, 2018.5)
        use statrs::distribution::{Continuous, ContinuousCDF, Normal as N};
        let (mu, sigma) = (1262.79, 271.46);
        let d = N::new(0.0, 1.0).unwrap();
        let (a, b) = ((579.5 - mu) / sigma, (2018.5 - mu) / sigma);
        let z = d.cdf(b) - d.cdf(a);
        let oracle = mu + sigma * (d.pdf(a) - d.pdf(b)) / z;
        let band = 3.0 * sigma / (n as f64).sqrt();
        assert!(
            (mean - oracle).abs() < band,
            "mean {mean} oracle {oracle} band {band}"
        );
    }

    #[test]
    fn degenerate_size() {
        let stats = GopStats {
            size_std_kb: 0.0,
            ..GopStats::default()
        };
        let s = sample_gop_size(&mut rng(1), &stats).unwrap();
        assert_eq!(s, 655.08 / 1024.0);
        assert!((s - 0.6397).abs() < 1e-4);
    }

    #[test]
    fn sizes_stay_in_bounds() {
        let stats = GopStats::default();
        let mut r = rng(5);
        for _ in 0..50_000 {
            let s = sample_gop_size(&mut r, &stats).unwrap();
            assert!((1.91 / 1024.0..=2192.65 / 1024.0).contains(&s));
        }
    }

    #[test]
    fn impossible_truncation_reports_sampling_error() {
        let stats = GopStats {
            size_mean_kb: 655.08,
            size_std_kb: 1e-3,
            size_min_kb: 1.0,
            size_max_kb: 2.0,
            ..GopStats::default()
        };
        assert!(matches!(
            sample_gop_size(&mut rng(0), &stats),
            Err(Error::Sampling {
                redraws: MAX_REDRAWS,
                ..
            })
        ));
    }

    #[test]
    fn transcode_time_cases() {
        let m = TranscodeTimeModel {
            slope_s_per_kb: 0.001,
            intercept_s: 0.0,
        };
        assert!((transcode_time(1.0, &m).unwrap() - 1.024).abs() < 1e-12);
        let c = TranscodeTimeModel {
            slope_s_per_kb: 0.0,
            intercept_s: 0.5,
        };
        assert_eq!(transcode_time(3.0, &c).unwrap(), 0.5);
        let t = transcode_time(655.08 / 1024.0, &TranscodeTimeModel::default()).unwrap();
        assert!((t - 0.49131).abs() < 1e-9, "{t}");
        assert!(transcode_time(0.0, &m).is_err());
        let zero = TranscodeTimeModel {
            slope_s_per_kb: 0.0,
            intercept_s: 0.0,
        };
        assert!(matches!(transcode_time(1.0, &zero), Err(Error::Config(_))));
    }

    #[test]
    fn transcode_time_monotone() {
        let m = TranscodeTimeModel::default();
        let mut prev = 0.0;
        for i in 1..1000 {
            let t = transcode_time(i as f64 * 0.002, &m).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn synthesis_is_deterministic_and_seed_sensitive() {
        let stats = GopStats::default();
        let tm = TranscodeTimeModel::default();
        let a = synthesize_repository(9, 1, &stats, &tm).unwrap();
        let b = synthesize_repository(9, 1, &stats, &tm).unwrap();
        assert_eq!(a, b);
        let c = synthesize_repository(10, 1, &stats, &tm).unwrap();
        assert_ne!(a[0].gops[0].size_mb, c[0].gops[0].size_mb);
        a[0].validate().unwrap();
        assert_eq!(a[0].views, 0.0);
        assert!(synthesize_repository(9, 0, &stats, &tm).is_err());
    }

    #[test]
    fn single_video_regeneration_matches_repository() {
        let stats = GopStats::default();
        let tm = TranscodeTimeModel::default();
        let repo = synthesize_repository(4, 6, &stats, &tm).unwrap();
        assert_eq!(synthesize_video(4, 5, &stats, &tm).unwrap(), repo[5]);
    }

    #[test]
    fn zero_view_scale_gives_zero_views() {
        let stats = GopStats::default();
        let mut repo =
            synthesize_repository(2, 20, &stats, &TranscodeTimeModel::default()).unwrap();
        assign_views(2, &mut repo, &ViewModel::new(1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(repo.iter().all(|v| v.views == 0.0));
        assert_eq!(
            fav_fraction(&repo, &PricingCatalog::default(), &DecayModel::default()),
            0.0
        );
    }

    #[test]
    fn huge_views_are_all_fav() {
        let stats = GopStats::default();
        let mut repo = synthesize_repository(2, 1, &stats, &TranscodeTimeModel::default()).unwrap();
        repo[0].views = 1e9;
        assert_eq!(
            fav_fraction(&repo, &PricingCatalog::default(), &DecayModel::default()),
            1.0
        );
    }

    #[test]
    fn views_are_non_negative_integers() {
        let stats = GopStats::default();
        let mut repo =
            synthesize_repository(8, 50, &stats, &TranscodeTimeModel::default()).unwrap();
        assign_views(8, &mut repo, &ViewModel::new(0.6, 1.0, 12.5).unwrap()).unwrap();
        assert!(repo
            .iter()
            .all(|v| v.views >= 0.0 && v.views.fract() == 0.0));
        assert!(assign_views(8, &mut [], &ViewModel::new(0.6, 1.0, 1.0).unwrap()).is_err());
    }
}
