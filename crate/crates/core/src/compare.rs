//! Cross-layout comparison helpers: a shared binwidth grid, the lowest-HBE
//! layout at each binwidth, and tuning curves shaped for plotting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::BestAtBinwidth;
use crate::error::{Error, Result};
use crate::scaling::ScaledLayout;
use crate::tuning::{default_b1_grid, TuningRecord};

/// HBE values this close to the minimum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Log-spaced b1 values valid for every layout (the tallest layout bounds the range).
pub fn common_b1_grid(n: usize, layouts: &[ScaledLayout], points: usize) -> Result<Vec<usize>> {
    let r2 = layouts
        .iter()
        .map(|l| l.r2)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        .ok_or_else(|| Error::InvalidParameter("no layouts given".into()))?;
    Ok(default_b1_grid(n, r2, points))
}

/// For each (b1, cutoff) pair, the layouts whose HBE is within
/// [`TIE_TOLERANCE`] of the lowest. Layout ids keep their input order.
pub fn best_layouts(records: &[TuningRecord]) -> Vec<BestAtBinwidth> {
    let mut groups: BTreeMap<(usize, u64), Vec<&TuningRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.b1, r.cutoff.to_bits())).or_default().push(r);
    }
    let mut out: Vec<BestAtBinwidth> = groups
        .into_values()
        .map(|group| {
            let hbe = group.iter().map(|r| r.hbe).fold(f64::INFINITY, f64::min);
            BestAtBinwidth {
                b1: group[0].b1,
                a1: group[0].a1,
                cutoff: group[0].cutoff,
                layout_ids: group
                    .iter()
                    .filter(|r| r.hbe - hbe <= TIE_TOLERANCE)
                    .map(|r| r.layout_id.clone())
                    .collect(),
                hbe,
            }
        })
        .collect();
    out.sort_by(|x, y| x.a1.total_cmp(&y.a1).then(x.cutoff.total_cmp(&y.cutoff)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub layout_id: String,
    /// Set for curves over cutoff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<usize>,
    /// Set for curves over binwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// The four tuning panels: HBE against binwidth, HBE against mean bin count,
/// share of non-empty bins against binwidth, and HBE against cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningPlots {
    pub hbe_vs_a1: Vec<Series>,
    pub hbe_vs_mean_count: Vec<Series>,
    pub nonempty_frac_vs_a1: Vec<Series>,
    pub hbe_vs_cutoff: Vec<Series>,
}

pub fn tuning_plots(records: &[TuningRecord]) -> TuningPlots {
    let mut by_cutoff: BTreeMap<(String, u64), Vec<&TuningRecord>> = BTreeMap::new();
    let mut by_b1: BTreeMap<(String, usize), Vec<&TuningRecord>> = BTreeMap::new();
    for r in records {
        by_cutoff
            .entry((r.layout_id.clone(), r.cutoff.to_bits()))
            .or_default()
            .push(r);
        by_b1.entry((r.layout_id.clone(), r.b1)).or_default().push(r);
    }
    let curve = |rs: &[&TuningRecord], b1, cutoff, x: fn(&TuningRecord) -> f64, y: fn(&TuningRecord) -> f64| {
        let mut pts: Vec<(f64, f64)> = rs.iter().map(|r| (x(r), y(r))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Series {
            layout_id: rs[0].layout_id.clone(),
            b1,
            cutoff,
            x: pts.iter().map(|p| p.0).collect(),
            y: pts.iter().map(|p| p.1).collect(),
        }
    };
    let mut plots = TuningPlots {
        hbe_vs_a1: Vec::new(),
        hbe_vs_mean_count: Vec::new(),
        nonempty_frac_vs_a1: Vec::new(),
        hbe_vs_cutoff: Vec::new(),
    };
    // a single point is not a curve
    for rs in by_cutoff.values().filter(|rs| rs.len() > 1) {
        let c = Some(rs[0].cutoff);
        plots.hbe_vs_a1.push(curve(rs, None, c, |r| r.a1, |r| r.hbe));
        plots.hbe_vs_mean_count.push(curve(rs, None, c, |r| r.mean_count, |r| r.hbe));
        plots.nonempty_frac_vs_a1.push(curve(rs, None, c, |r| r.a1, |r| r.nonempty_frac));
    }
    for rs in by_b1.values().filter(|rs| rs.len() > 1) {
        plots.hbe_vs_cutoff.push(curve(rs, Some(rs[0].b1), None, |r| r.cutoff, |r| r.hbe));
    }
    plots
}
