//! JSON export bundle consumed by the viewer, and the standalone model file.
//!
//! Bin ids are 1-based grid indices; row ids are 0-based observation indices.
//! Edges reference bin ids. Reals carry 17 significant digits.

use std::collections::{HashMap, HashSet};
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::binning::CenterMode;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::Fit;
use crate::metrics::MetricTable;
use crate::model::LiftedModel;
use crate::scaling::ScaledLayout;
use crate::tour::{ProjectionBasis, TourPath};
use crate::triangulation::neighbor_edges;
use crate::tuning::TuningRecord;

pub const SCHEMA_VERSION: &str = "1.0";

struct RealFormatter;

impl serde_json::ser::Formatter for RealFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes compactly with 17-significant-digit reals.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RealFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    crate::io::write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b1: usize,
    pub b2: usize,
    pub a1: f64,
    pub a2: f64,
    pub q: f64,
    pub cutoff: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
    pub center_mode: CenterMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub id: usize,
    pub c2d: [f64; 2],
    pub cpd: Vec<f64>,
    pub count: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub params: ModelParams,
    pub bins: Vec<BinRecord>,
    pub edges: Vec<[usize; 2]>,
}

impl ModelFile {
    pub fn from_fit(fit: &Fit, center_mode: CenterMode) -> Self {
        let g = &fit.grid;
        let model = &fit.model;
        let w = model.std_counts();
        let bins = (0..model.m())
            .map(|k| BinRecord {
                id: model.bin_ids[k] + 1,
                c2d: model.centroids2d[k],
                cpd: model.centroid_pd(k).to_vec(),
                count: model.counts[k],
                w: w[k],
            })
            .collect();
        let edges = model
            .edges
            .edges
            .iter()
            .map(|e| [model.bin_ids[e[0]] + 1, model.bin_ids[e[1]] + 1])
            .collect();
        Self {
            params: ModelParams {
                b1: g.b1,
                b2: g.b2,
                a1: g.a1,
                a2: g.a2,
                q: g.q,
                cutoff: model.cutoff,
                r2: g.r2,
                s1: g.s1,
                s2: g.s2,
                center_mode,
            },
            bins,
            edges,
        }
    }

    /// Rebuilds the in-memory model; edges are recomputed from the 2-D centroids.
    pub fn to_model(&self) -> Result<LiftedModel> {
        self.validate(None)?;
        let p = self.bins.first().map_or(0, |b| b.cpd.len());
        let centroids2d: Vec<[f64; 2]> = self.bins.iter().map(|b| b.c2d).collect();
        Ok(LiftedModel {
            bin_ids: self.bins.iter().map(|b| b.id - 1).collect(),
            centroids_pd: self.bins.iter().flat_map(|b| b.cpd.iter().copied()).collect(),
            counts: self.bins.iter().map(|b| b.count).collect(),
            edges: neighbor_edges(&centroids2d)?,
            centroids2d,
            p,
            cutoff: self.params.cutoff,
        })
    }

    pub fn validate(&self, p: Option<usize>) -> Result<()> {
        let bad = |msg: String| Err(Error::Bundle(msg));
        if self.bins.is_empty() {
            return bad("model has no bins".into());
        }
        let total = self.params.b1 * self.params.b2;
        let p = p.unwrap_or(self.bins[0].cpd.len());
        let mut last = 0;
        for bin in &self.bins {
            if bin.id == 0 || bin.id > total {
                return bad(format!("bin id {} outside 1..={total}", bin.id));
            }
            if bin.id <= last {
                return bad(format!("bin ids not strictly ascending at {}", bin.id));
            }
            last = bin.id;
            if bin.cpd.len() != p {
                return bad(format!("bin {} has {} coordinates, expected {p}", bin.id, bin.cpd.len()));
            }
        }
        let ids: HashSet<usize> = self.bins.iter().map(|b| b.id).collect();
        for e in &self.edges {
            if !ids.contains(&e[0]) || !ids.contains(&e[1]) || e[0] == e[1] {
                return bad(format!("edge {:?} does not join two model bins", e));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub row_id: usize,
    pub bin_id: usize,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSection {
    pub hbe: f64,
    pub rows: Vec<ResidualRow>,
}

impl ResidualSection {
    pub fn from_fit(fit: &Fit) -> Self {
        Self {
            hbe: fit.residuals.hbe,
            rows: fit
                .residuals
                .e
                .iter()
                .enumerate()
                .map(|(i, &e)| ResidualRow {
                    row_id: i,
                    bin_id: fit.binning.assignment[i] + 1,
                    e,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSection {
    pub layout_id: String,
    pub scaled: ScaledLayout,
    pub model: ModelFile,
    pub residuals: ResidualSection,
    #[serde(default)]
    pub tuning: Vec<TuningRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSection {
    pub n: usize,
    pub p: usize,
    pub column_names: Vec<String>,
    /// Path the data was read from, when it is not inlined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
}

impl DatasetSection {
    pub fn reference(data: &Dataset, source: &str) -> Self {
        Self {
            n: data.n(),
            p: data.p(),
            column_names: data.column_names().to_vec(),
            source: Some(source.to_string()),
            values: None,
            labels: None,
        }
    }

    pub fn inline(data: &Dataset, labels: Option<Vec<u8>>) -> Self {
        Self {
            n: data.n(),
            p: data.p(),
            column_names: data.column_names().to_vec(),
            source: None,
            values: Some(data.rows().map(<[f64]>::to_vec).collect()),
            labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourSection {
    pub p: usize,
    pub steps_per_segment: usize,
    /// Each frame as a row-major `p × 2` array.
    pub bases: Vec<Vec<f64>>,
}

impl TourSection {
    pub fn new(bases: &[ProjectionBasis], steps_per_segment: usize) -> Self {
        Self {
            p: bases.first().map_or(0, |b| b.p),
            steps_per_segment,
            bases: bases.iter().map(|b| b.values.clone()).collect(),
        }
    }

    pub fn from_path(path: &TourPath) -> Self {
        Self::new(&path.frames, path.steps_per_segment)
    }
}

/// Lowest-HBE layouts at one binwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestAtBinwidth {
    pub b1: usize,
    pub a1: f64,
    pub cutoff: f64,
    pub layout_ids: Vec<String>,
    pub hbe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub schema_version: String,
    pub dataset: DatasetSection,
    pub layouts: Vec<LayoutSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub best: Vec<BestAtBinwidth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tour: Option<TourSection>,
}

impl ExportBundle {
    pub fn new(dataset: DatasetSection) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dataset,
            layouts: Vec::new(),
            metrics: None,
            best: Vec::new(),
            tour: None,
        }
    }

    /// Checks that every cross-reference resolves.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Bundle(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {:?}", self.schema_version));
        }
        let (n, p) = (self.dataset.n, self.dataset.p);
        if self.dataset.column_names.len() != p {
            return bad("column_names length differs from p".into());
        }
        if let Some(values) = &self.dataset.values {
            if values.len() != n || values.iter().any(|r| r.len() != p) {
                return bad("inline data does not match n × p".into());
            }
        }
        if let Some(labels) = &self.dataset.labels {
            if labels.len() != n {
                return bad("labels length differs from n".into());
            }
        }
        let mut seen = HashSet::new();
        for layout in &self.layouts {
            let id = &layout.layout_id;
            if !seen.insert(id.as_str()) {
                return bad(format!("duplicate layout id {id:?}"));
            }
            if layout.scaled.points.len() != n {
                return bad(format!("layout {id:?} has {} points, expected {n}", layout.scaled.points.len()));
            }
            layout.model.validate(Some(p)).map_err(|e| Error::Bundle(format!("layout {id:?}: {e}")))?;
            let counts: HashMap<usize, usize> =
                layout.model.bins.iter().map(|b| (b.id, b.count)).collect();
            if counts.values().sum::<usize>() != n {
                return bad(format!("layout {id:?}: bin counts do not sum to {n}"));
            }
            let rows = &layout.residuals.rows;
            if rows.len() != n {
                return bad(format!("layout {id:?}: {} residual rows, expected {n}", rows.len()));
            }
            let mut tally: HashMap<usize, usize> = HashMap::new();
            for (i, r) in rows.iter().enumerate() {
                if r.row_id != i {
                    return bad(format!("layout {id:?}: residual row {i} has row_id {}", r.row_id));
                }
                if !counts.contains_key(&r.bin_id) {
                    return bad(format!("layout {id:?}: row {i} refers to unknown bin {}", r.bin_id));
                }
                *tally.entry(r.bin_id).or_default() += 1;
            }
            if tally != counts {
                return bad(format!("layout {id:?}: residual membership disagrees with bin counts"));
            }
            if layout.tuning.iter().any(|t| &t.layout_id != id) {
                return bad(format!("layout {id:?}: tuning record for another layout"));
            }
        }
        if let Some(metrics) = &self.metrics {
            for row in &metrics.rows {
                if !seen.contains(row.layout_id.as_str()) {
                    return bad(format!("metric row for unknown layout {:?}", row.layout_id));
                }
            }
        }
        for best in &self.best {
            for id in &best.layout_ids {
                if !seen.contains(id.as_str()) {
                    return bad(format!("best-layout flag for unknown layout {id:?}"));
                }
            }
        }
        if let Some(tour) = &self.tour {
            if tour.p != p || tour.bases.iter().any(|b| b.len() != 2 * p) {
                return bad("tour frames do not match p".into());
            }
        }
        Ok(())
    }

    pub fn layout(&self, id: &str) -> Option<&LayoutSection> {
        self.layouts.iter().find(|l| l.layout_id == id)
    }
}

/// Reads either a standalone model file or the first (or named) layout of a bundle.
pub fn load_model(path: &Path, layout_id: Option<&str>) -> Result<(ModelFile, Option<ScaledLayout>)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("schema_version").is_some() {
        let bundle: ExportBundle = from_json(&text)?;
        bundle.validate()?;
        let section = match layout_id {
            Some(id) => bundle
                .layout(id)
                .ok_or_else(|| Error::Bundle(format!("no layout {id:?} in bundle")))?,
            None => bundle
                .layouts
                .first()
                .ok_or_else(|| Error::Bundle("bundle holds no layouts".into()))?,
        };
        Ok((section.model.clone(), Some(section.scaled.clone())))
    } else {
        let model: ModelFile = from_json(&text)?;
        model.validate(None)?;
        Ok((model, None))
    }
}
