//! Repository files: `videos.csv` with one `id,views,gop_count` record per
//! video and a GOP table `video_id,j,size_mb,tau_s`. Floats are written in
//! shortest round-trip form, so a read after a write is exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Gop, Video};
use crate::error::{Error, Result};

pub fn write_repository(repo: &[Video], videos_path: &Path, gops_path: &Path) -> Result<()> {
    let mut videos = BufWriter::new(File::create(videos_path)?);
    let mut gops = BufWriter::new(File::create(gops_path)?);
    writeln!(videos, "id,views,gop_count")?;
    writeln!(gops, "video_id,j,size_mb,tau_s")?;
    for v in repo {
        writeln!(videos, "{},{},{}", v.id, v.views, v.gops.len())?;
        for g in &v.gops {
            writeln!(
                gops,
                "{},{},{},{}",
                v.id, g.index, g.size_mb, g.transcode_time_s
            )?;
        }
    }
    videos.flush()?;
    gops.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
    path: &Path,
    line: usize,
) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            line,
            reason: format!("missing or unparsable `{name}`"),
        })
}

pub fn read_repository(videos_path: &Path, gops_path: &Path) -> Result<Vec<Video>> {
    let mut header: Vec<(u64, f64, usize, usize)> = Vec::new();
    let mut rdr = csv::Reader::from_path(videos_path)?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        header.push((
            field(&rec, 0, "id", videos_path, line)?,
            field(&rec, 1, "views", videos_path, line)?,
            field(&rec, 2, "gop_count", videos_path, line)?,
            line,
        ));
    }

    let mut gops: BTreeMap<u64, Vec<Gop>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(gops_path)?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let id: u64 = field(&rec, 0, "video_id", gops_path, line)?;
        let gop = Gop {
            index: field(&rec, 1, "j", gops_path, line)?,
            size_mb: field(&rec, 2, "size_mb", gops_path, line)?,
            transcode_time_s: field(&rec, 3, "tau_s", gops_path, line)?,
            est_views: 0.0,
        };
        gops.entry(id).or_default().push(gop);
    }

    let mut repo = Vec::with_capacity(header.len());
    for (id, views, count, line) in header {
        let mut list = gops.remove(&id).unwrap_or_default();
        list.sort_by_key(|g| g.index);
        if list.len() != count {
            return Err(Error::Format {
                path: videos_path.to_path_buf(),
                line,
                reason: format!(
                    "video {id} declares {count} GOPs, GOP table has {}",
                    list.len()
                ),
            });
        }
        let video = Video {
            id,
            views,
            gops: list,
        };
        video.validate().map_err(|e| Error::Format {
            path: gops_path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        repo.push(video);
    }
    if let Some(orphan) = gops.keys().next() {
        return Err(Error::Format {
            path: gops_path.to_path_buf(),
            line: 0,
            reason: format!("GOP rows reference unknown video {orphan}"),
        });
    }
    Ok(repo)
}
