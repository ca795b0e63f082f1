use std::fmt::Write as _;
use std::path::Path;

use super::{Scenario, SweepOutput, SweepRow};
use crate::error::Result;
use crate::policy::Policy;

pub const SWEEP_HEADER: [&str; 6] = ["scenario", "x", "policy", "seed", "total_usd", "normalized"];

/// Percentage saved by going from cost `a` to cost `b`.
pub fn reduction_pct(a: f64, b: f64) -> f64 {
    (a - b) / a * 100.0
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.label().to_string(),
            r.x.to_string(),
            r.policy.label().to_string(),
            r.seed.to_string(),
            format!("{:.6}", r.total_usd),
            format!("{:.6}", r.normalized),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn x_label(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::Fav => "FAV %",
        Scenario::Views => "growth step",
        Scenario::Cdn => "FAV % (CDN on)",
    }
}

pub fn summary_text(out: &SweepOutput) -> String {
    let mut s = String::new();
    let seeds: Vec<u64> = {
        let mut v: Vec<u64> = out.points.iter().map(|p| p.seed).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let _ = writeln!(s, "videos per repository: {}", out.n_videos);
    let _ = writeln!(s, "seeds: {seeds:?}");
    let _ = writeln!(s, "totals in USD/month, mean ± sample std over seeds");

    for c in &out.calibrations {
        let _ = writeln!(
            s,
            "calibration: shape {} target {:.1}% view_scale {:.6} achieved {:.2}%",
            c.weibull_shape,
            c.target * 100.0,
            c.view_scale,
            c.achieved * 100.0
        );
    }
    for f in &out.failures {
        let _ = writeln!(
            s,
            "calibration FAILED: shape {} target {:.1}% closest {:.2}%",
            f.weibull_shape, f.target_pct, f.achieved_pct
        );
    }

    for scenario in Scenario::ALL {
        let xs = out.xs(scenario);
        if xs.is_empty() {
            continue;
        }
        let _ = writeln!(s, "\n[{scenario}] x = {}", x_label(scenario));
        for x in xs {
            let _ = write!(s, "x={x}");
            let recs: Vec<_> = out
                .points
                .iter()
                .filter(|p| p.scenario == scenario && p.x == x)
                .collect();
            let (fav, _) = mean_std(&recs.iter().map(|p| p.measured_fav_pct).collect::<Vec<_>>());
            let _ = write!(s, "  measured FAV {fav:.2}%");
            if scenario == Scenario::Views {
                let _ = write!(s, "  view multiplier {:.4}", recs[0].view_multiplier);
            }
            let _ = writeln!(s);

            let mut means = [0.0; 5];
            for (i, policy) in Policy::ALL.into_iter().enumerate() {
                let totals: Vec<f64> = out
                    .rows
                    .iter()
                    .filter(|r| r.scenario == scenario && r.x == x && r.policy == policy)
                    .map(|r| r.total_usd)
                    .collect();
                let (m, sd) = mean_std(&totals);
                means[i] = m;
                let _ = writeln!(s, "  {:<20}{m:>14.4} ± {sd:.4}", policy.label());
            }
            let (fs, partial, clustered) = (means[0], means[3], means[4]);
            let _ = writeln!(
                s,
                "  clustered vs partial_store: {:.2}%  clustered vs full_store: {:.2}%",
                reduction_pct(partial, clustered),
                reduction_pct(fs, clustered)
            );
        }
    }
    s
}

/// Writes `sweep.csv` and `summary.txt` into `dir`, creating it if needed.
pub fn emit_report(out: &SweepOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_sweep_csv(&out.rows, &dir.join("sweep.csv"))?;
    std::fs::write(dir.join("summary.txt"), summary_text(out))?;
    Ok(())
}
