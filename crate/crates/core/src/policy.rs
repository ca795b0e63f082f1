//! Placement strategies. Each one turns a video into a per-GOP plan
//! (store in some tier, or delete and transcode on request) together with
//! its monthly cost.
//!
//! The `*_with_views` variants take the per-GOP view estimates explicitly;
//! the plain ones derive them from the video's monthly views and a
//! [`DecayModel`].

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_1d, tiers_for_values, KMeansConfig};
use crate::costmodel::{
    estimated_views, gop_ratio, gop_storage_cost, gop_transcode_cost, DecayModel, PricingCatalog,
    Tier,
};
use crate::error::{Error, Result};
use crate::workload::Video;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    FullStore,
    FullTranscode,
    StoreOrTranscode,
    PartialStore,
    Clustered,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::FullStore,
        Policy::FullTranscode,
        Policy::StoreOrTranscode,
        Policy::PartialStore,
        Policy::Clustered,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Policy::FullStore => "full_store",
            Policy::FullTranscode => "full_transcode",
            Policy::StoreOrTranscode => "store_or_transcode",
            Policy::PartialStore => "partial_store",
            Policy::Clustered => "clustered",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown policy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Store(Tier),
    Transcode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GopPlacement {
    pub j: usize,
    pub decision: Decision,
    /// Monthly storage bill of this GOP (0 when transcoded).
    pub storage_cost: f64,
    /// Monthly transcoding bill of this GOP (0 when stored).
    pub transcode_cost: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub sc_tier: [f64; 4],
    pub sc_stored_total: f64,
    pub tc_remaining: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn from_placements(placements: &[GopPlacement]) -> Self {
        let mut sc_tier = [0.0; 4];
        let mut tc_remaining = 0.0;
        for p in placements {
            match p.decision {
                Decision::Store(t) => sc_tier[t.index()] += p.storage_cost,
                Decision::Transcode => tc_remaining += p.transcode_cost,
            }
        }
        let sc_stored_total = sc_tier[0] + sc_tier[1] + sc_tier[2] + sc_tier[3];
        Self {
            sc_tier,
            sc_stored_total,
            tc_remaining,
            total: sc_stored_total + tc_remaining,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub video_id: u64,
    pub policy: Policy,
    pub placements: Vec<GopPlacement>,
    /// Last stored GOP of the stored prefix, if any.
    pub threshold_index: Option<usize>,
    pub cost: CostBreakdown,
}

impl PlacementPlan {
    fn build(
        video: &Video,
        policy: Policy,
        placements: Vec<GopPlacement>,
        threshold_index: Option<usize>,
    ) -> Self {
        let cost = CostBreakdown::from_placements(&placements);
        Self {
            video_id: video.id,
            policy,
            placements,
            threshold_index,
            cost,
        }
    }

    pub fn total(&self) -> f64 {
        self.cost.total
    }

    pub fn stored_count(&self) -> usize {
        self.placements
            .iter()
            .filter(|p| matches!(p.decision, Decision::Store(_)))
            .count()
    }
}

fn check_views(video: &Video, est_views: &[f64]) -> Result<()> {
    if est_views.len() != video.gops.len() {
        return Err(Error::InvalidArgument(format!(
            "video {}: {} view estimates for {} GOPs",
            video.id,
            est_views.len(),
            video.gops.len()
        )));
    }
    Ok(())
}

fn store(video: &Video, j0: usize, tier: Tier, pricing: &PricingCatalog) -> GopPlacement {
    let g = &video.gops[j0];
    GopPlacement {
        j: g.index,
        decision: Decision::Store(tier),
        storage_cost: gop_storage_cost(g.size_mb, pricing.effective_storage_price(tier)),
        transcode_cost: 0.0,
    }
}

fn transcode(video: &Video, j0: usize, xi: f64, pricing: &PricingCatalog) -> GopPlacement {
    let g = &video.gops[j0];
    GopPlacement {
        j: g.index,
        decision: Decision::Transcode,
        storage_cost: 0.0,
        transcode_cost: gop_transcode_cost(xi, g.transcode_time_s, pricing.transcode),
    }
}

/// Stored prefix length for a ratio sequence: the largest j with every
/// ratio up to j at most 1, or `None` when the first ratio exceeds 1.
pub fn threshold_from_ratios(ratios: &[f64]) -> Option<usize> {
    let n = ratios.iter().take_while(|&&r| r <= 1.0).count();
    (n > 0).then_some(n)
}

/// Storage/transcode ratio of every GOP, storage priced at tier 1.
pub fn gop_ratios_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
) -> Vec<f64> {
    let price = pricing.effective_storage_price(Tier::Standard);
    video
        .gops
        .iter()
        .zip(est_views)
        .map(|(g, &xi)| {
            gop_ratio(
                gop_storage_cost(g.size_mb, price),
                gop_transcode_cost(xi, g.transcode_time_s, pricing.transcode),
            )
        })
        .collect()
}

pub fn find_threshold_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
) -> Result<Option<usize>> {
    check_views(video, est_views)?;
    let price = pricing.effective_storage_price(Tier::Standard);
    let n = video
        .gops
        .iter()
        .zip(est_views)
        .take_while(|(g, &xi)| {
            gop_ratio(
                gop_storage_cost(g.size_mb, price),
                gop_transcode_cost(xi, g.transcode_time_s, pricing.transcode),
            ) <= 1.0
        })
        .count();
    Ok((n > 0).then_some(n))
}

/// Last GOP of the leading run whose storage/transcode ratio is at most 1.
/// GOPs after the first ratio above 1 are never stored, even if a later
/// one would qualify on its own.
pub fn find_threshold(
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
) -> Option<usize> {
    let est = estimated_views(video, decay);
    find_threshold_with_views(video, &est, pricing).expect("estimates match GOP count")
}

pub fn plan_full_store(video: &Video, pricing: &PricingCatalog) -> PlacementPlan {
    let placements = (0..video.gops.len())
        .map(|j0| store(video, j0, Tier::Standard, pricing))
        .collect();
    let threshold = (!video.gops.is_empty()).then_some(video.gops.len());
    PlacementPlan::build(video, Policy::FullStore, placements, threshold)
}

pub fn plan_full_transcode_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
) -> Result<PlacementPlan> {
    check_views(video, est_views)?;
    let placements = est_views
        .iter()
        .enumerate()
        .map(|(j0, &xi)| transcode(video, j0, xi, pricing))
        .collect();
    Ok(PlacementPlan::build(
        video,
        Policy::FullTranscode,
        placements,
        None,
    ))
}

pub fn plan_full_transcode(
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
) -> PlacementPlan {
    let est = estimated_views(video, decay);
    plan_full_transcode_with_views(video, &est, pricing).expect("estimates match GOP count")
}

/// Whole video stored at tier 1 if its video-level ratio is at most 1,
/// otherwise deleted and transcoded on request.
pub fn plan_store_or_transcode_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
) -> Result<PlacementPlan> {
    let stored = plan_full_store(video, pricing);
    let transcoded = plan_full_transcode_with_views(video, est_views, pricing)?;
    let ratio = gop_ratio(stored.cost.total, transcoded.cost.total);
    let mut plan = if ratio <= 1.0 { stored } else { transcoded };
    plan.policy = Policy::StoreOrTranscode;
    Ok(plan)
}

pub fn plan_store_or_transcode(
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
) -> PlacementPlan {
    let est = estimated_views(video, decay);
    plan_store_or_transcode_with_views(video, &est, pricing).expect("estimates match GOP count")
}

/// Stored prefix at tier 1, remainder transcoded.
pub fn plan_partial_store_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
) -> Result<PlacementPlan> {
    let threshold = find_threshold_with_views(video, est_views, pricing)?;
    let t = threshold.unwrap_or(0);
    let placements = est_views
        .iter()
        .enumerate()
        .map(|(j0, &xi)| {
            if j0 < t {
                store(video, j0, Tier::Standard, pricing)
            } else {
                transcode(video, j0, xi, pricing)
            }
        })
        .collect();
    Ok(PlacementPlan::build(
        video,
        Policy::PartialStore,
        placements,
        threshold,
    ))
}

pub fn plan_partial_store(
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
) -> PlacementPlan {
    let est = estimated_views(video, decay);
    plan_partial_store_with_views(video, &est, pricing).expect("estimates match GOP count")
}

/// Same stored prefix as [`plan_partial_store`], but the stored GOPs are
/// clustered by estimated views and each cluster goes to its own tier.
pub fn plan_clustered_with_views(
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
    kmeans: &KMeansConfig,
) -> Result<PlacementPlan> {
    let threshold = find_threshold_with_views(video, est_views, pricing)?;
    let t = threshold.unwrap_or(0);
    let tiers = if t > 0 {
        tiers_for_values(&kmeans_1d(&est_views[..t], kmeans)?)?
    } else {
        Vec::new()
    };
    let placements = est_views
        .iter()
        .enumerate()
        .map(|(j0, &xi)| {
            if j0 < t {
                store(video, j0, tiers[j0], pricing)
            } else {
                transcode(video, j0, xi, pricing)
            }
        })
        .collect();
    Ok(PlacementPlan::build(
        video,
        Policy::Clustered,
        placements,
        threshold,
    ))
}

pub fn plan_clustered(
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
    kmeans: &KMeansConfig,
) -> Result<PlacementPlan> {
    let est = estimated_views(video, decay);
    plan_clustered_with_views(video, &est, pricing, kmeans)
}

/// Clustered placement with one clustering over the stored GOPs of the
/// whole repository instead of one per video.
pub fn plan_clustered_global(
    repo: &[Video],
    pricing: &PricingCatalog,
    decay: &DecayModel,
    kmeans: &KMeansConfig,
) -> Result<Vec<PlacementPlan>> {
    let estimates: Vec<Vec<f64>> = repo.par_iter().map(|v| estimated_views(v, decay)).collect();
    let thresholds = repo
        .iter()
        .zip(&estimates)
        .map(|(v, est)| find_threshold_with_views(v, est, pricing).map(|t| t.unwrap_or(0)))
        .collect::<Result<Vec<_>>>()?;
    let pooled: Vec<f64> = estimates
        .iter()
        .zip(&thresholds)
        .flat_map(|(est, &t)| est[..t].iter().copied())
        .collect();
    let tiers = if pooled.is_empty() {
        Vec::new()
    } else {
        tiers_for_values(&kmeans_1d(&pooled, kmeans)?)?
    };

    let mut offset = 0;
    let mut plans = Vec::with_capacity(repo.len());
    for ((video, est), &t) in repo.iter().zip(&estimates).zip(&thresholds) {
        let placements = est
            .iter()
            .enumerate()
            .map(|(j0, &xi)| {
                if j0 < t {
                    store(video, j0, tiers[offset + j0], pricing)
                } else {
                    transcode(video, j0, xi, pricing)
                }
            })
            .collect();
        offset += t;
        plans.push(PlacementPlan::build(
            video,
            Policy::Clustered,
            placements,
            (t > 0).then_some(t),
        ));
    }
    Ok(plans)
}

/// Plan for `policy` given explicit per-GOP view estimates.
pub fn plan_with_views(
    policy: Policy,
    video: &Video,
    est_views: &[f64],
    pricing: &PricingCatalog,
    kmeans: &KMeansConfig,
) -> Result<PlacementPlan> {
    match policy {
        Policy::FullStore => {
            check_views(video, est_views)?;
            Ok(plan_full_store(video, pricing))
        }
        Policy::FullTranscode => plan_full_transcode_with_views(video, est_views, pricing),
        Policy::StoreOrTranscode => plan_store_or_transcode_with_views(video, est_views, pricing),
        Policy::PartialStore => plan_partial_store_with_views(video, est_views, pricing),
        Policy::Clustered => plan_clustered_with_views(video, est_views, pricing, kmeans),
    }
}

pub fn plan(
    policy: Policy,
    video: &Video,
    pricing: &PricingCatalog,
    decay: &DecayModel,
    kmeans: &KMeansConfig,
) -> Result<PlacementPlan> {
    plan_with_views(
        policy,
        video,
        &estimated_views(video, decay),
        pricing,
        kmeans,
    )
}

/// Sum of per-video plan totals, added in repository order so the result
/// does not depend on how planning was scheduled.
pub fn repo_total_cost<F>(repo: &[Video], plan_fn: F) -> Result<f64>
where
    F: Fn(&Video) -> Result<PlacementPlan> + Sync,
{
    let totals = repo
        .par_iter()
        .map(|v| plan_fn(v).map(|p| p.cost.total))
        .collect::<Result<Vec<_>>>()?;
    Ok(totals.iter().sum())
}

/// Writes `video_id,j,decision,tier,sc,tc` rows, one per GOP.
pub fn write_plans_csv(plans: &[PlacementPlan], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "video_id,j,decision,tier,sc,tc")?;
    for plan in plans {
        for p in &plan.placements {
            let (decision, tier) = match p.decision {
                Decision::Store(t) => ("store", t.number().to_string()),
                Decision::Transcode => ("transcode", String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                plan.video_id, p.j, decision, tier, p.storage_cost, p.transcode_cost
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Gop;

    fn uniform_video(views: f64, m: usize, size_mb: f64, tau: f64) -> Video {
        Video {
            id: 7,
            views,
            gops: (1..=m)
                .map(|j| Gop {
                    index: j,
                    size_mb,
                    transcode_time_s: tau,
                    est_views: 0.0,
                })
                .collect(),
        }
    }

    fn assert_breakdown_consistent(p: &PlacementPlan) {
        let c = &p.cost;
        assert_eq!(
            c.sc_stored_total,
            c.sc_tier[0] + c.sc_tier[1] + c.sc_tier[2] + c.sc_tier[3]
        );
        assert_eq!(c.total, c.sc_stored_total + c.tc_remaining);
        assert!(c.sc_tier.iter().all(|&x| x >= 0.0) && c.tc_remaining >= 0.0);
        assert_eq!(
            p.placements.len(),
            p.placements.iter().map(|g| g.j).max().unwrap_or(0)
        );
        if let Some(t) = p.threshold_index {
            for g in &p.placements {
                assert_eq!(g.j <= t, matches!(g.decision, Decision::Store(_)));
            }
        }
    }

    #[test]
    fn ratio_sequence_thresholds() {
        assert_eq!(threshold_from_ratios(&[0.5, 0.9, 1.0, 1.2]), Some(3));
        assert_eq!(threshold_from_ratios(&[2.0, 0.5]), None);
        assert_eq!(threshold_from_ratios(&[0.5, 2.0, 0.5]), Some(1));
        assert_eq!(threshold_from_ratios(&[]), None);
    }

    #[test]
    fn full_store_unit_case() {
        let v = uniform_video(0.0, 1, 1024.0, 1.0);
        let p = plan_full_store(&v, &PricingCatalog::default());
        assert_eq!(p.total(), 0.023);
        assert_eq!(p.cost.tc_remaining, 0.0);
        let loud = uniform_video(1e6, 1, 1024.0, 1.0);
        assert_eq!(
            plan_full_store(&loud, &PricingCatalog::default()).total(),
            p.total()
        );
    }

    #[test]
    fn full_store_three_gops() {
        let mut v = uniform_video(3.0, 3, 1.0, 1.0);
        v.gops[0].size_mb = 512.0;
        v.gops[1].size_mb = 100.0;
        v.gops[2].size_mb = 2048.0;
        let p = plan_full_store(&v, &PricingCatalog::default());
        let oracle = (512.0 + 100.0 + 2048.0) * 0.023 / 1024.0;
        assert!((p.total() - oracle).abs() < 1e-15);
        assert_breakdown_consistent(&p);
    }

    #[test]
    fn full_transcode_cases() {
        let pricing = PricingCatalog::default();
        let d = DecayModel::default();
        let zero = uniform_video(0.0, 5, 0.6, 0.5);
        assert_eq!(plan_full_transcode(&zero, &pricing, &d).total(), 0.0);

        let v = uniform_video(120.0, 2, 0.6, 0.5);
        let twice = uniform_video(240.0, 2, 0.6, 0.5);
        let a = plan_full_transcode(&v, &pricing, &d).total();
        let b = plan_full_transcode(&twice, &pricing, &d).total();
        assert!((b - 2.0 * a).abs() < 1e-15);
        let oracle: f64 = [1.0f64, 2.0]
            .iter()
            .map(|j| 120.0 / j.powf(0.1) * 0.5 * 0.026 / 3600.0)
            .sum();
        assert!((a - oracle).abs() < 1e-15);
    }

    #[test]
    fn store_or_transcode_branches() {
        let pricing = PricingCatalog::default();
        let d = DecayModel::default();
        let zero = uniform_video(0.0, 4, 0.6, 0.5);
        let p = plan_store_or_transcode(&zero, &pricing, &d);
        assert_eq!(p.total(), 0.0);
        assert!(p
            .placements
            .iter()
            .all(|g| g.decision == Decision::Transcode));

        // choose views so that storage is exactly twice transcoding
        let v1 = uniform_video(1.0, 3, 0.6, 0.5);
        let sc = plan_full_store(&v1, &pricing).total();
        let tc1 = plan_full_transcode(&v1, &pricing, &d).total();
        let v = uniform_video(sc / (2.0 * tc1), 3, 0.6, 0.5);
        let p = plan_store_or_transcode(&v, &pricing, &d);
        let tc = plan_full_transcode(&v, &pricing, &d).total();
        assert!((sc / tc - 2.0).abs() < 1e-12);
        assert_eq!(p.total(), tc);
        assert_eq!(p.policy, Policy::StoreOrTranscode);
    }

    #[test]
    fn store_or_transcode_tie_stores() {
        // alpha irrelevant with a single GOP; SC = TC exactly
        let pricing = PricingCatalog {
            storage: [0.5, 0.0125, 0.01, 0.001],
            transcode: 3600.0,
            ..PricingCatalog::default()
        };
        // sc = 1024 * 0.5 / 1024 = 0.5; tc = 1 * 0.5 * 3600 / 3600 = 0.5
        let v = uniform_video(1.0, 1, 1024.0, 0.5);
        let d = DecayModel::default();
        let sc = plan_full_store(&v, &pricing).total();
        let tc = plan_full_transcode(&v, &pricing, &d).total();
        assert_eq!(sc, tc);
        let p = plan_store_or_transcode(&v, &pricing, &d);
        assert!(matches!(
            p.placements[0].decision,
            Decision::Store(Tier::Standard)
        ));
    }

    #[test]
    fn partial_store_extremes() {
        let pricing = PricingCatalog::default();
        let d = DecayModel::default();
        let cold = uniform_video(0.5, 30, 0.6, 0.45);
        let p = plan_partial_store(&cold, &pricing, &d);
        assert_eq!(p.threshold_index, None);
        let ft = plan_full_transcode(&cold, &pricing, &d);
        assert_eq!(p.placements, ft.placements);
        assert_eq!(p.cost, ft.cost);

        let hot = uniform_video(1e5, 30, 0.6, 0.45);
        let p = plan_partial_store(&hot, &pricing, &d);
        assert_eq!(p.threshold_index, Some(30));
        let fs = plan_full_store(&hot, &pricing);
        assert_eq!(p.placements, fs.placements);
        assert_eq!(p.cost, fs.cost);
    }

    #[test]
    fn partial_store_crossing_at_ten() {
        // uniform GOPs: R_j = K * j^alpha / gamma with K = S*Ps*3600/(1024*tau*Pt).
        // gamma = K * 10.5^alpha puts the crossing between j = 10 and j = 11.
        let pricing = PricingCatalog::default();
        let d = DecayModel::default();
        let (s, tau) = (0.6, 0.45);
        let k = s * 0.023 * 3600.0 / (1024.0 * tau * 0.026);
        let v = uniform_video(k * 10.5f64.powf(0.1), 40, s, tau);
        assert_eq!(find_threshold(&v, &pricing, &d), Some(10));
        let p = plan_partial_store(&v, &pricing, &d);
        assert_eq!(p.threshold_index, Some(10));
        assert_eq!(p.stored_count(), 10);
        assert_breakdown_consistent(&p);
    }

    #[test]
    fn non_monotone_ratios_keep_strict_prefix() {
        let pricing = PricingCatalog::default();
        let mut v = uniform_video(8.0, 5, 0.6, 0.45);
        // an oversized GOP 2 breaks the prefix; GOP 3 would qualify but is transcoded
        v.gops[1].size_mb = 50.0;
        let est = vec![8.0; 5];
        let ratios = gop_ratios_with_views(&v, &est, &pricing);
        assert!(ratios[0] <= 1.0 && ratios[1] > 1.0 && ratios[2] <= 1.0);
        assert_eq!(
            find_threshold_with_views(&v, &est, &pricing).unwrap(),
            Some(1)
        );
    }

    #[test]
    fn clustered_without_stored_gops_is_full_transcode() {
        let pricing = PricingCatalog::default();
        let d = DecayModel::default();
        let v = uniform_video(0.5, 12, 0.6, 0.45);
        let c = plan_clustered(&v, &pricing, &d, &KMeansConfig::default()).unwrap();
        let ft = plan_full_transcode(&v, &pricing, &d);
        assert_eq!(c.placements, ft.placements);
        assert_eq!(c.total(), ft.total());
    }

    #[test]
    fn clustered_equal_views_collapse_to_tier_one() {
        let pricing = PricingCatalog::default();
        let v = uniform_video(1e4, 9, 0.6, 0.45);
        let est = vec![1e4; 9];
        let c = plan_clustered_with_views(&v, &est, &pricing, &KMeansConfig::default()).unwrap();
        let p = plan_partial_store_with_views(&v, &est, &pricing).unwrap();
        assert_eq!(c.threshold_index, Some(9));
        assert_eq!(c.total(), p.total());
        assert!(c
            .placements
            .iter()
            .all(|g| g.decision == Decision::Store(Tier::Standard)));
    }

    #[test]
    fn clustered_eight_gop_pattern() {
        let pricing = PricingCatalog::default();
        // tau large enough that even one view justifies storage
        let v = uniform_video(0.0, 8, 1.0, 3600.0);
        let est = [1001.0, 1000.0, 101.0, 100.0, 11.0, 10.0, 2.0, 1.0];
        let c = plan_clustered_with_views(&v, &est, &pricing, &KMeansConfig::default()).unwrap();
        assert_eq!(c.threshold_index, Some(8));
        let expect = [
            Tier::Standard,
            Tier::Standard,
            Tier::StandardIa,
            Tier::StandardIa,
            Tier::OneZoneIa,
            Tier::OneZoneIa,
            Tier::Glacier,
            Tier::Glacier,
        ];
        for (g, t) in c.placements.iter().zip(expect) {
            assert_eq!(g.decision, Decision::Store(t));
        }
        let oracle = 2.0 * (0.023 + 0.0125 + 0.01 + 0.001) / 1024.0;
        assert!((c.total() - oracle).abs() < 1e-15);
        assert_breakdown_consistent(&c);
    }

    #[test]
    fn repo_total_is_ordered_sum() {
        let pricing = PricingCatalog::default();
        let repo = vec![
            uniform_video(0.0, 1, 1024.0, 1.0),
            uniform_video(0.0, 2, 1024.0, 1.0),
            uniform_video(0.0, 3, 512.0, 1.0),
        ];
        let total = repo_total_cost(&repo, |v| Ok(plan_full_store(v, &pricing))).unwrap();
        assert!((total - (0.023 + 0.046 + 0.0345)).abs() < 1e-15);
        let single = repo_total_cost(&repo[..1], |v| Ok(plan_full_store(v, &pricing))).unwrap();
        assert_eq!(single, plan_full_store(&repo[0], &pricing).total());
    }

    #[test]
    fn view_count_mismatch_is_an_error() {
        let v = uniform_video(1.0, 3, 1.0, 1.0);
        assert!(plan_partial_store_with_views(&v, &[1.0], &PricingCatalog::default()).is_err());
    }

    #[test]
    fn policy_labels_parse() {
        for p in Policy::ALL {
            assert_eq!(p.label().parse::<Policy>().unwrap(), p);
        }
        assert!("zhao".parse::<Policy>().is_err());
    }

    #[test]
    fn plans_csv_has_one_row_per_gop() {
        let dir = tempfile::tempdir().unwrap();
        let pricing = PricingCatalog::default();
        let v = uniform_video(0.0, 8, 1.0, 3600.0);
        let est = [1001.0, 1000.0, 101.0, 100.0, 11.0, 10.0, 2.0, 1.0];
        let c = plan_clustered_with_views(&v, &est, &pricing, &KMeansConfig::default()).unwrap();
        let path = dir.path().join("plans.csv");
        write_plans_csv(&[c], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "video_id,j,decision,tier,sc,tc");
        assert_eq!(lines.len(), 9);
        assert!(lines[8].starts_with("7,8,store,4,"));
    }
}
