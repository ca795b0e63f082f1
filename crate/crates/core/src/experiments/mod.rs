//! Sweep harness: popularity (FAV share), view growth and CDN scenarios.
//!
//! Each seed's repository is regenerated video by video rather than held
//! in memory. Every scenario point is evaluated on a video before moving to
//! the next, and per-point totals are summed in video id order, so results
//! do not depend on the number of worker threads.

mod report;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_1d, tiers_for_values, KMeansConfig};
use crate::costmodel::{gop_storage_cost, DecayModel, PricingCatalog};
use crate::error::{Error, Result};
use crate::policy::{plan_with_views, Policy};
use crate::workload::{
    calibrate_view_scale, synthesize_video, weibull_draw, Calibration, CalibrationSet, GopStats,
    TranscodeTimeModel, VideoEconomics, ViewModel,
};

pub use report::{emit_report, reduction_pct, summary_text, write_sweep_csv, SWEEP_HEADER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_videos: usize,
    /// Repository size used with `--paper-scale`.
    pub paper_scale_videos: usize,
    pub seeds: Vec<u64>,
    pub weibull_shapes: Vec<f64>,
    /// FAV share in percent that each shape is calibrated to.
    pub fav_targets_pct: Vec<f64>,
    pub weibull_scale: f64,
    pub calibration_seed: u64,
    pub calibration_videos: usize,
    pub calibration_tolerance_pct: f64,
    pub growth_shape: f64,
    pub growth_fav_target_pct: f64,
    pub view_growth_steps: Vec<f64>,
    /// Views at growth step g are multiplied by `1 + gain * (g - 1) / 100`.
    pub view_growth_gain: f64,
    pub pricing: PricingCatalog,
    pub gop_stats: GopStats,
    pub transcode_time: TranscodeTimeModel,
    pub decay: DecayModel,
    pub kmeans: KMeansConfig,
    pub cluster_scope: ClusterScope,
}

/// Whether the clustered policy clusters each video's stored GOPs on their
/// own or all stored GOPs of a repository together.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterScope {
    #[default]
    PerVideo,
    Global,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_videos: 2_000,
            paper_scale_videos: 50_000,
            seeds: vec![1, 2, 3],
            weibull_shapes: vec![0.4, 0.6, 1.0, 1.4, 1.8, 2.4],
            fav_targets_pct: vec![30.0, 25.0, 20.0, 15.0, 10.0, 5.0],
            weibull_scale: 1.0,
            calibration_seed: 9_001,
            calibration_videos: 20_000,
            calibration_tolerance_pct: 1.0,
            growth_shape: 1.0,
            growth_fav_target_pct: 20.0,
            view_growth_steps: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            view_growth_gain: 34.0,
            pricing: PricingCatalog::default(),
            gop_stats: GopStats::default(),
            transcode_time: TranscodeTimeModel::default(),
            decay: DecayModel::default(),
            kmeans: KMeansConfig::default(),
            cluster_scope: ClusterScope::PerVideo,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_videos == 0 || self.paper_scale_videos == 0 || self.calibration_videos == 0 {
            return bad("video counts must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.weibull_shapes.len() != self.fav_targets_pct.len() {
            return bad(format!(
                "{} Weibull shapes but {} FAV targets",
                self.weibull_shapes.len(),
                self.fav_targets_pct.len()
            ));
        }
        let shape_ok = |s: f64| s > 0.0 && s.is_finite();
        if !self.weibull_shapes.iter().all(|&s| shape_ok(s)) || !shape_ok(self.growth_shape) {
            return bad("Weibull shapes must be positive".into());
        }
        let pct_ok = |p: f64| (0.0..=100.0).contains(&p);
        if !self.fav_targets_pct.iter().all(|&p| pct_ok(p)) || !pct_ok(self.growth_fav_target_pct) {
            return bad("FAV targets must lie in [0, 100]".into());
        }
        if !(self.calibration_tolerance_pct >= 0.0) {
            return bad("calibration tolerance must be >= 0".into());
        }
        if !(self.view_growth_gain >= 0.0 && self.view_growth_gain.is_finite()) {
            return bad("view growth gain must be >= 0".into());
        }
        if self
            .view_growth_steps
            .iter()
            .any(|&g| !(view_multiplier(g, self.view_growth_gain) >= 0.0))
        {
            return bad("view growth steps must keep the multiplier non-negative".into());
        }
        ViewModel::new(self.growth_shape, self.weibull_scale, 1.0)?;
        self.pricing.validate()?;
        self.gop_stats.validate()?;
        self.transcode_time.validate()?;
        self.decay.validate()?;
        self.kmeans.validate()
    }

    pub fn at_paper_scale(mut self) -> Self {
        self.n_videos = self.paper_scale_videos;
        self
    }
}

/// Factor applied to every video's monthly views at growth step `step`.
pub fn view_multiplier(step: f64, gain: f64) -> f64 {
    1.0 + gain * (step - 1.0) / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fav,
    Views,
    Cdn,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Fav, Scenario::Views, Scenario::Cdn];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Fav => "fav",
            Scenario::Views => "views",
            Scenario::Cdn => "cdn",
        }
    }

    /// Scenarios named by a CLI argument; `all` expands to every scenario.
    pub fn parse_selection(s: &str) -> Result<Vec<Scenario>> {
        if s == "all" {
            return Ok(Scenario::ALL.to_vec());
        }
        s.parse().map(|sc| vec![sc])
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario `{s}`")))
    }
}

/// One CSV line: a policy's monthly total at one scenario point and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    /// FAV percent for `fav` and `cdn`, growth step for `views`.
    pub x: f64,
    pub policy: Policy,
    pub seed: u64,
    pub total_usd: f64,
    /// `total_usd` over the full-store total of the same point and seed.
    pub normalized: f64,
}

/// What was simulated at one scenario point for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub scenario: Scenario,
    pub x: f64,
    pub seed: u64,
    pub weibull_shape: f64,
    pub view_scale: f64,
    pub view_multiplier: f64,
    /// Share of videos with storage cheaper than transcoding, in percent.
    pub measured_fav_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFailure {
    pub weibull_shape: f64,
    pub target_pct: f64,
    pub achieved_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub n_videos: usize,
    pub rows: Vec<SweepRow>,
    pub points: Vec<PointRecord>,
    pub calibrations: Vec<Calibration>,
    /// Points skipped because their FAV target could not be reached.
    pub failures: Vec<CalibrationFailure>,
}

impl SweepOutput {
    pub fn totals(&self, scenario: Scenario, x: f64, policy: Policy, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.x == x && r.policy == policy && r.seed == seed)
            .map(|r| r.total_usd)
    }

    pub fn xs(&self, scenario: Scenario) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.scenario == scenario)
            .map(|p| p.x)
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

#[derive(Debug, Clone, Copy)]
struct EvalPoint {
    scenario: Scenario,
    x: f64,
    view: ViewModel,
    multiplier: f64,
    cdn: bool,
}

pub fn run_fav_sweep(cfg: &ScenarioConfig) -> Result<SweepOutput> {
    run_scenarios(cfg, &[Scenario::Fav])
}

pub fn run_views_sweep(cfg: &ScenarioConfig) -> Result<SweepOutput> {
    run_scenarios(cfg, &[Scenario::Views])
}

pub fn run_cdn_sweep(cfg: &ScenarioConfig) -> Result<SweepOutput> {
    run_scenarios(cfg, &[Scenario::Cdn])
}

/// Calibrates every needed shape once, then evaluates all requested
/// scenarios on each seed's repository in a single pass over the videos.
pub fn run_scenarios(cfg: &ScenarioConfig, scenarios: &[Scenario]) -> Result<SweepOutput> {
    cfg.validate()?;
    let plain = cfg.pricing.clone().with_cdn(false);
    let mut out = SweepOutput {
        n_videos: cfg.n_videos,
        ..SweepOutput::default()
    };

    let mut wanted: Vec<(f64, f64)> = Vec::new();
    if scenarios
        .iter()
        .any(|s| matches!(s, Scenario::Fav | Scenario::Cdn))
    {
        wanted.extend(
            cfg.weibull_shapes
                .iter()
                .copied()
                .zip(cfg.fav_targets_pct.iter().copied()),
        );
    }
    if scenarios.contains(&Scenario::Views) {
        wanted.push((cfg.growth_shape, cfg.growth_fav_target_pct));
    }
    if wanted.is_empty() {
        return Ok(out);
    }

    let set = CalibrationSet::synthesize(
        cfg.calibration_seed,
        cfg.calibration_videos,
        &cfg.gop_stats,
        &cfg.transcode_time,
        &plain,
        &cfg.decay,
    )?;
    let mut calibrated: Vec<((f64, f64), Calibration)> = Vec::new();
    for &(shape, target) in &wanted {
        if calibrated.iter().any(|(key, _)| *key == (shape, target))
            || out
                .failures
                .iter()
                .any(|f| (f.weibull_shape, f.target_pct) == (shape, target))
        {
            continue;
        }
        match calibrate_view_scale(
            &set,
            shape,
            cfg.weibull_scale,
            target / 100.0,
            cfg.calibration_tolerance_pct / 100.0,
        ) {
            Ok(c) => {
                out.calibrations.push(c);
                calibrated.push(((shape, target), c));
            }
            Err(Error::Calibration { achieved, .. }) => out.failures.push(CalibrationFailure {
                weibull_shape: shape,
                target_pct: target,
                achieved_pct: achieved * 100.0,
            }),
            Err(e) => return Err(e),
        }
    }
    let lookup = |shape: f64, target: f64| {
        calibrated
            .iter()
            .find(|(key, _)| *key == (shape, target))
            .map(|(_, c)| c.view_model(cfg.weibull_scale))
    };

    let mut points = Vec::new();
    for &scenario in scenarios {
        match scenario {
            Scenario::Fav | Scenario::Cdn => {
                for (&shape, &target) in cfg.weibull_shapes.iter().zip(&cfg.fav_targets_pct) {
                    if let Some(view) = lookup(shape, target) {
                        points.push(EvalPoint {
                            scenario,
                            x: target,
                            view,
                            multiplier: 1.0,
                            cdn: scenario == Scenario::Cdn,
                        });
                    }
                }
            }
            Scenario::Views => {
                if let Some(view) = lookup(cfg.growth_shape, cfg.growth_fav_target_pct) {
                    for &step in &cfg.view_growth_steps {
                        points.push(EvalPoint {
                            scenario,
                            x: step,
                            view,
                            multiplier: view_multiplier(step, cfg.view_growth_gain),
                            cdn: false,
                        });
                    }
                }
            }
        }
    }

    for &seed in &cfg.seeds {
        let results = evaluate_seed(cfg, seed, &points)?;
        for (point, (totals, fav)) in points.iter().zip(results) {
            let full_store = totals[0];
            for (policy, total) in Policy::ALL.into_iter().zip(totals) {
                out.rows.push(SweepRow {
                    scenario: point.scenario,
                    x: point.x,
                    policy,
                    seed,
                    total_usd: total,
                    normalized: if full_store > 0.0 {
                        total / full_store
                    } else {
                        0.0
                    },
                });
            }
            out.points.push(PointRecord {
                scenario: point.scenario,
                x: point.x,
                seed,
                weibull_shape: point.view.weibull_shape,
                view_scale: point.view.view_scale,
                view_multiplier: point.multiplier,
                measured_fav_pct: 100.0 * fav as f64 / cfg.n_videos as f64,
            });
        }
    }
    out.rows.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.x.total_cmp(&b.x))
            .then(a.policy.cmp(&b.policy))
            .then(a.seed.cmp(&b.seed))
    });
    out.points.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.x.total_cmp(&b.x))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(out)
}

struct VideoPoint {
    totals: [f64; 5],
    fav: bool,
    /// Stored prefix as (estimated views, size in MB) plus the transcoding
    /// bill of the rest; kept only for repository-wide clustering.
    pooled: Option<(Vec<f64>, Vec<f64>, f64)>,
}

/// Per point: policy totals in [`Policy::ALL`] order and the FAV count.
fn evaluate_seed(
    cfg: &ScenarioConfig,
    seed: u64,
    points: &[EvalPoint],
) -> Result<Vec<([f64; 5], usize)>> {
    let plain = cfg.pricing.clone().with_cdn(false);
    let with_cdn = cfg.pricing.clone().with_cdn(true);
    let divisors = cfg.decay.divisors(cfg.gop_stats.count_max);
    let global = cfg.cluster_scope == ClusterScope::Global;

    let per_video = (0..cfg.n_videos as u64)
        .into_par_iter()
        .map(|id| {
            let video = synthesize_video(seed, id, &cfg.gop_stats, &cfg.transcode_time)?;
            let economics = VideoEconomics::of(&video, &plain, &cfg.decay);
            let div = &divisors[..video.gops.len()];
            points
                .iter()
                .map(|p| {
                    let base = (p.view.view_scale * weibull_draw(seed, id, &p.view)?).round();
                    let views = base * p.multiplier;
                    let est: Vec<f64> = div.iter().map(|d| views / d).collect();
                    let pricing = if p.cdn { &with_cdn } else { &plain };
                    let mut totals = [0.0; 5];
                    let mut pooled = None;
                    for (t, policy) in totals.iter_mut().zip(Policy::ALL) {
                        if global && policy == Policy::Clustered {
                            let partial = plan_with_views(
                                Policy::PartialStore,
                                &video,
                                &est,
                                pricing,
                                &cfg.kmeans,
                            )?;
                            let n = partial.threshold_index.unwrap_or(0);
                            let sizes = video.gops[..n].iter().map(|g| g.size_mb).collect();
                            pooled = Some((est[..n].to_vec(), sizes, partial.cost.tc_remaining));
                        } else {
                            *t = plan_with_views(policy, &video, &est, pricing, &cfg.kmeans)?
                                .total();
                        }
                    }
                    Ok(VideoPoint {
                        totals,
                        fav: economics.is_fav(views),
                        pooled,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<Vec<VideoPoint>>>>()?;

    let mut sums = vec![([0.0; 5], 0usize); points.len()];
    for video in &per_video {
        for ((totals, fav), vp) in sums.iter_mut().zip(video) {
            for (acc, x) in totals.iter_mut().zip(vp.totals) {
                *acc += x;
            }
            *fav += usize::from(vp.fav);
        }
    }
    if global {
        for (i, p) in points.iter().enumerate() {
            let pricing = if p.cdn { &with_cdn } else { &plain };
            sums[i].0[4] =
                global_clustered_total(per_video.iter().map(|v| &v[i]), pricing, &cfg.kmeans)?;
        }
    }
    Ok(sums)
}

/// Clusters the stored GOPs of every video together, then prices each
/// video's stored prefix by tier and adds its transcoding remainder.
fn global_clustered_total<'a>(
    videos: impl Iterator<Item = &'a VideoPoint> + Clone,
    pricing: &PricingCatalog,
    kmeans: &KMeansConfig,
) -> Result<f64> {
    let pooled: Vec<f64> = videos
        .clone()
        .flat_map(|v| {
            v.pooled
                .as_ref()
                .map(|p| p.0.iter().copied())
                .into_iter()
                .flatten()
        })
        .collect();
    let tiers = if pooled.is_empty() {
        Vec::new()
    } else {
        tiers_for_values(&kmeans_1d(&pooled, kmeans)?)?
    };
    let mut offset = 0;
    let mut total = 0.0;
    for v in videos {
        let (_, sizes, tc) = v.pooled.as_ref().expect("pooled in global mode");
        let mut video_total = 0.0;
        for (size, tier) in sizes.iter().zip(&tiers[offset..]) {
            video_total += gop_storage_cost(*size, pricing.effective_storage_price(*tier));
        }
        offset += sizes.len();
        total += video_total + tc;
    }
    Ok(total)
}
