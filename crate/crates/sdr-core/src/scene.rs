//! Line-based label-raster scenes: a road band crosses the raster and each
//! object class sits on its own line parallel to the road. Position
//! attributes move lines, density attributes set spacing and occurrence,
//! environment attributes shift the camera and scale object visibility.
//! Rendering produces per-pixel class-ID grids directly; there is no
//! photometric channel.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::rng_from_seed;

pub type ClassId = u8;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("raster must be at least 16x16 (got {h}x{w})")]
    RasterTooSmall { h: usize, w: usize },
    #[error("duplicate class id {id}")]
    DuplicateClassId { id: ClassId },
    #[error("duplicate paint priority {priority}")]
    DuplicatePriority { priority: u8 },
    #[error("road band {lo}..{hi} outside raster of height {h}")]
    BadRoadBand { lo: usize, hi: usize, h: usize },
    #[error("class {id}: footprint must be at least 1x1")]
    EmptyFootprint { id: ClassId },
    #[error("class {id} has no {what} attribute")]
    MissingAttribute { id: ClassId, what: &'static str },
    #[error("attribute for unknown class id {id}")]
    UnknownClass { id: ClassId },
    #[error("class {id}: interval {interval} must be at least 1 pixel")]
    IntervalTooSmall { id: ClassId, interval: f64 },
    #[error("class {id}: line row {row} outside [0, {h})")]
    LineOutOfRaster { id: ClassId, row: f64, h: usize },
    #[error("{what} {value} must lie in [0, 1]")]
    UnitRange { what: &'static str, value: f64 },
    #[error("dataset must contain at least one raster")]
    EmptyDataset,
    #[error("raster sizes differ within one dataset: {a_h}x{a_w} vs {b_h}x{b_w}")]
    MixedSizes {
        a_h: usize,
        a_w: usize,
        b_h: usize,
        b_w: usize,
    },
    #[error("per-image attribute list has {got} entries for {expected} images")]
    WrongJitterCount { got: usize, expected: usize },
}

/// One placeable object class: footprint in pixels, relative size jitter,
/// and paint priority (higher priority paints later and occludes).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub id: ClassId,
    pub name: String,
    pub footprint_h: usize,
    pub footprint_w: usize,
    pub size_jitter: f64,
    pub priority: u8,
}

/// Static scene geometry: raster size, the class roster, and the road band.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub height: usize,
    pub width: usize,
    pub background_id: ClassId,
    pub background_name: String,
    pub road_id: ClassId,
    pub road_name: String,
    /// Rows covered by the road, `road_rows.0 <= r < road_rows.1`.
    pub road_rows: (usize, usize),
    /// Placeable classes; render order is ascending priority.
    pub classes: Vec<ClassSpec>,
    /// Visibility at zero illumination; ramps linearly to 1 at full
    /// illumination. Retention probability is occurrence * visibility.
    pub visibility_floor: f64,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.height < 16 || self.width < 16 {
            return Err(SceneError::RasterTooSmall {
                h: self.height,
                w: self.width,
            });
        }
        if self.road_rows.0 >= self.road_rows.1 || self.road_rows.1 > self.height {
            return Err(SceneError::BadRoadBand {
                lo: self.road_rows.0,
                hi: self.road_rows.1,
                h: self.height,
            });
        }
        if !(0.0..=1.0).contains(&self.visibility_floor) {
            return Err(SceneError::UnitRange {
                what: "visibility_floor",
                value: self.visibility_floor,
            });
        }
        let mut ids = vec![self.background_id, self.road_id];
        let mut priorities = Vec::new();
        for class in &self.classes {
            if class.footprint_h == 0 || class.footprint_w == 0 {
                return Err(SceneError::EmptyFootprint { id: class.id });
            }
            if !(0.0..=1.0).contains(&class.size_jitter) {
                return Err(SceneError::UnitRange {
                    what: "size_jitter",
                    value: class.size_jitter,
                });
            }
            ids.push(class.id);
            priorities.push(class.priority);
        }
        ids.sort_unstable();
        for pair in ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(SceneError::DuplicateClassId { id: pair[0] });
            }
        }
        priorities.sort_unstable();
        for pair in priorities.windows(2) {
            if pair[0] == pair[1] {
                return Err(SceneError::DuplicatePriority { priority: pair[0] });
            }
        }
        Ok(())
    }

    /// First row below the road band; line offsets are measured from here.
    pub fn road_edge(&self) -> usize {
        self.road_rows.1
    }

    pub fn class(&self, id: ClassId) -> Option<&ClassSpec> {
        self.classes.iter().find(|c| c.id == id)
    }

    /// All class ids in the scene, background and road included.
    pub fn all_class_ids(&self) -> Vec<ClassId> {
        let mut ids = vec![self.background_id, self.road_id];
        ids.extend(self.classes.iter().map(|c| c.id));
        ids
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        if id == self.background_id {
            &self.background_name
        } else if id == self.road_id {
            &self.road_name
        } else {
            self.class(id).map(|c| c.name.as_str()).unwrap_or("?")
        }
    }
}

/// Scene-level control values for one render: per-class line offsets,
/// spacing intervals, occurrence probabilities, plus camera shift and
/// illumination.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneAttributes {
    /// Rows from the road edge to each class's line.
    pub line_offset: BTreeMap<ClassId, f64>,
    /// Pixels between consecutive object anchors on a line.
    pub interval: BTreeMap<ClassId, f64>,
    /// Per-object retention probability in [0, 1]; classes absent from the
    /// map default to 1.
    pub occurrence: BTreeMap<ClassId, f64>,
    pub camera_dx: f64,
    pub camera_dy: f64,
    pub illumination: f64,
}

impl SceneAttributes {
    pub fn validate(&self, config: &SceneConfig) -> Result<(), SceneError> {
        for class in &config.classes {
            let offset = self
                .line_offset
                .get(&class.id)
                .ok_or(SceneError::MissingAttribute {
                    id: class.id,
                    what: "line offset",
                })?;
            let row = config.road_edge() as f64 + offset;
            if !(0.0..config.height as f64).contains(&row) {
                return Err(SceneError::LineOutOfRaster {
                    id: class.id,
                    row,
                    h: config.height,
                });
            }
            let interval = self
                .interval
                .get(&class.id)
                .ok_or(SceneError::MissingAttribute {
                    id: class.id,
                    what: "interval",
                })?;
            if *interval < 1.0 {
                return Err(SceneError::IntervalTooSmall {
                    id: class.id,
                    interval: *interval,
                });
            }
        }
        for (&id, &p) in &self.occurrence {
            if config.class(id).is_none() {
                return Err(SceneError::UnknownClass { id });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(SceneError::UnitRange {
                    what: "occurrence",
                    value: p,
                });
            }
        }
        for (&id, _) in self.line_offset.iter().chain(self.interval.iter()) {
            if config.class(id).is_none() {
                return Err(SceneError::UnknownClass { id });
            }
        }
        if !(0.0..=1.0).contains(&self.illumination) {
            return Err(SceneError::UnitRange {
                what: "illumination",
                value: self.illumination,
            });
        }
        Ok(())
    }
}

/// H x W grid of class IDs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelRaster {
    height: usize,
    width: usize,
    cells: Vec<ClassId>,
}

impl LabelRaster {
    pub fn filled(height: usize, width: usize, id: ClassId) -> Self {
        Self {
            height,
            width,
            cells: vec![id; height * width],
        }
    }

    pub fn from_cells(height: usize, width: usize, cells: Vec<ClassId>) -> Self {
        assert_eq!(cells.len(), height * width);
        Self {
            height,
            width,
            cells,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> ClassId {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, id: ClassId) {
        self.cells[row * self.width + col] = id;
    }

    pub fn cells(&self) -> &[ClassId] {
        &self.cells
    }

    pub fn count_class(&self, id: ClassId) -> usize {
        self.cells.iter().filter(|&&c| c == id).count()
    }

    /// Mean row index of a class's pixels, if it appears at all.
    pub fn mean_row(&self, id: ClassId) -> Option<f64> {
        let mut sum = 0usize;
        let mut n = 0usize;
        for (i, &c) in self.cells.iter().enumerate() {
            if c == id {
                sum += i / self.width;
                n += 1;
            }
        }
        (n > 0).then(|| sum as f64 / n as f64)
    }

    /// Portable greymap-style text: `P2` header, then one class ID per cell.
    pub fn to_pgm_text(&self) -> String {
        let max = self.cells.iter().copied().max().unwrap_or(0);
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, max);
        for row in 0..self.height {
            for col in 0..self.width {
                if col > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.get(row, col));
            }
            out.push('\n');
        }
        out
    }
}

/// Generation provenance kept alongside a rendered dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub attrs: SceneAttributes,
    pub seed: u64,
    pub images: usize,
    pub relaxed: bool,
}

/// An ordered set of uniformly sized label rasters plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rasters: Vec<LabelRaster>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(rasters: Vec<LabelRaster>, meta: DatasetMeta) -> Result<Self, SceneError> {
        let first = rasters.first().ok_or(SceneError::EmptyDataset)?;
        for r in &rasters {
            if r.height != first.height || r.width != first.width {
                return Err(SceneError::MixedSizes {
                    a_h: first.height,
                    a_w: first.width,
                    b_h: r.height,
                    b_w: r.width,
                });
            }
        }
        Ok(Self { rasters, meta })
    }

    pub fn rasters(&self) -> &[LabelRaster] {
        &self.rasters
    }

    pub fn len(&self) -> usize {
        self.rasters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rasters.is_empty()
    }

    pub fn height(&self) -> usize {
        self.rasters[0].height
    }

    pub fn width(&self) -> usize {
        self.rasters[0].width
    }

    pub fn count_distinct(&self) -> usize {
        let mut seen: std::collections::HashSet<&[ClassId]> = std::collections::HashSet::new();
        for r in &self.rasters {
            seen.insert(r.cells());
        }
        seen.len()
    }

    /// Writes `0001.pgm`-style rasters plus a `metadata.txt` sidecar.
    pub fn write_dir(&self, dir: &std::path::Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (i, raster) in self.rasters.iter().enumerate() {
            std::fs::write(dir.join(format!("{:04}.pgm", i + 1)), raster.to_pgm_text())?;
        }
        let mut meta = String::new();
        let _ = writeln!(meta, "images: {}", self.meta.images);
        let _ = writeln!(meta, "seed: {}", self.meta.seed);
        let _ = writeln!(meta, "relaxed: {}", self.meta.relaxed);
        let _ = writeln!(meta, "camera_dx: {}", self.meta.attrs.camera_dx);
        let _ = writeln!(meta, "camera_dy: {}", self.meta.attrs.camera_dy);
        let _ = writeln!(meta, "illumination: {}", self.meta.attrs.illumination);
        for (id, v) in &self.meta.attrs.line_offset {
            let _ = writeln!(meta, "line_offset[{id}]: {v}");
        }
        for (id, v) in &self.meta.attrs.interval {
            let _ = writeln!(meta, "interval[{id}]: {v}");
        }
        for (id, v) in &self.meta.attrs.occurrence {
            let _ = writeln!(meta, "occurrence[{id}]: {v}");
        }
        std::fs::write(dir.join("metadata.txt"), meta)
    }
}

/// Renders one label raster. Deterministic in `(config, attrs, seed)`:
/// background fill, road band, then each class painted along its line in
/// ascending priority order, and finally the whole raster shifted by the
/// camera offset with background fill behind.
pub fn render_scene(
    config: &SceneConfig,
    attrs: &SceneAttributes,
    seed: u64,
) -> Result<LabelRaster, SceneError> {
    config.validate()?;
    attrs.validate(config)?;
    let mut rng = rng_from_seed(seed);
    let mut raster = LabelRaster::filled(config.height, config.width, config.background_id);

    for row in config.road_rows.0..config.road_rows.1 {
        for col in 0..config.width {
            raster.set(row, col, config.road_id);
        }
    }

    let mut order: Vec<&ClassSpec> = config.classes.iter().collect();
    order.sort_by_key(|c| c.priority);

    let visibility =
        config.visibility_floor + (1.0 - config.visibility_floor) * attrs.illumination;
    for class in order {
        let offset = attrs.line_offset[&class.id];
        let interval = attrs.interval[&class.id];
        let occurrence = attrs.occurrence.get(&class.id).copied().unwrap_or(1.0);
        let retain_prob = occurrence * visibility;
        let line_row = (config.road_edge() as f64 + offset).round() as i64;

        let phase: f64 = rng.gen::<f64>() * interval;
        let mut anchor = phase;
        while anchor < config.width as f64 {
            let col = anchor.round() as i64;
            // Draws are consumed for every anchor so the stream does not
            // depend on earlier retention outcomes.
            let keep = rng.gen::<f64>() < retain_prob;
            let scale = 1.0 + (rng.gen::<f64>() * 2.0 - 1.0) * class.size_jitter;
            if keep {
                let h = ((class.footprint_h as f64 * scale).round() as i64).max(1);
                let w = ((class.footprint_w as f64 * scale).round() as i64).max(1);
                paint_rect(&mut raster, line_row, col, h, w, class.id);
            }
            anchor += interval;
        }
    }

    let dx = attrs.camera_dx.round() as i64;
    let dy = attrs.camera_dy.round() as i64;
    if dx != 0 || dy != 0 {
        raster = shift_raster(&raster, dy, dx, config.background_id);
    }
    Ok(raster)
}

fn paint_rect(raster: &mut LabelRaster, top: i64, left: i64, h: i64, w: i64, id: ClassId) {
    let row_lo = top.max(0);
    let row_hi = (top + h).min(raster.height as i64);
    let col_lo = left.max(0);
    let col_hi = (left + w).min(raster.width as i64);
    for row in row_lo..row_hi {
        for col in col_lo..col_hi {
            raster.set(row as usize, col as usize, id);
        }
    }
}

fn shift_raster(src: &LabelRaster, dy: i64, dx: i64, fill: ClassId) -> LabelRaster {
    let mut out = LabelRaster::filled(src.height, src.width, fill);
    for row in 0..src.height as i64 {
        let src_row = row - dy;
        if src_row < 0 || src_row >= src.height as i64 {
            continue;
        }
        for col in 0..src.width as i64 {
            let src_col = col - dx;
            if src_col < 0 || src_col >= src.width as i64 {
                continue;
            }
            out.set(
                row as usize,
                col as usize,
                src.get(src_row as usize, src_col as usize),
            );
        }
    }
    out
}

/// Renders `m` rasters with per-image seeds `seed + i`. When
/// `per_image_attrs` is given (one entry per image, typically relaxation
/// jitter around a discrete choice) each image is rendered from its own
/// attributes.
pub fn render_dataset(
    config: &SceneConfig,
    attrs: &SceneAttributes,
    m: usize,
    seed: u64,
    per_image_attrs: Option<&[SceneAttributes]>,
) -> Result<Dataset, SceneError> {
    if m == 0 {
        return Err(SceneError::EmptyDataset);
    }
    if let Some(list) = per_image_attrs {
        if list.len() != m {
            return Err(SceneError::WrongJitterCount {
                got: list.len(),
                expected: m,
            });
        }
    }
    let rasters: Vec<LabelRaster> = (0..m)
        .into_par_iter()
        .map(|i| {
            let image_attrs = per_image_attrs.map(|list| &list[i]).unwrap_or(attrs);
            render_scene(config, image_attrs, seed.wrapping_add(i as u64))
        })
        .collect::<Result<_, _>>()?;
    Dataset::new(
        rasters,
        DatasetMeta {
            attrs: attrs.clone(),
            seed,
            images: m,
            relaxed: per_image_attrs.is_some(),
        },
    )
}

/// Renders disjoint-seeded validation and test datasets from hidden target
/// attributes. The attributes stay inside the returned metadata for
/// diagnostics; optimizers only ever see the rasters.
pub fn make_target(
    config: &SceneConfig,
    hidden_attrs: &SceneAttributes,
    m_val: usize,
    m_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), SceneError> {
    let validation = render_dataset(config, hidden_attrs, m_val, seed, None)?;
    let test = render_dataset(
        config,
        hidden_attrs,
        m_test,
        seed.wrapping_add(m_val as u64),
        None,
    )?;
    Ok((validation, test))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn test_config() -> SceneConfig {
        SceneConfig {
            height: 64,
            width: 96,
            background_id: 0,
            background_name: "background".to_string(),
            road_id: 1,
            road_name: "road".to_string(),
            road_rows: (24, 32),
            classes: vec![
                ClassSpec {
                    id: 2,
                    name: "building".to_string(),
                    footprint_h: 10,
                    footprint_w: 12,
                    size_jitter: 0.1,
                    priority: 1,
                },
                ClassSpec {
                    id: 3,
                    name: "tree".to_string(),
                    footprint_h: 6,
                    footprint_w: 5,
                    size_jitter: 0.1,
                    priority: 2,
                },
                ClassSpec {
                    id: 4,
                    name: "person".to_string(),
                    footprint_h: 5,
                    footprint_w: 3,
                    size_jitter: 0.0,
                    priority: 3,
                },
            ],
            visibility_floor: 0.5,
        }
    }

    pub(crate) fn test_attrs() -> SceneAttributes {
        let mut line_offset = BTreeMap::new();
        line_offset.insert(2, 18.0);
        line_offset.insert(3, 8.0);
        line_offset.insert(4, 2.0);
        let mut interval = BTreeMap::new();
        interval.insert(2, 20.0);
        interval.insert(3, 12.0);
        interval.insert(4, 10.0);
        let mut occurrence = BTreeMap::new();
        occurrence.insert(2, 0.9);
        occurrence.insert(3, 0.8);
        occurrence.insert(4, 0.7);
        SceneAttributes {
            line_offset,
            interval,
            occurrence,
            camera_dx: 0.0,
            camera_dy: 0.0,
            illumination: 1.0,
        }
    }

    #[test]
    fn render_is_deterministic() {
        let config = test_config();
        let attrs = test_attrs();
        let a = render_scene(&config, &attrs, 12).unwrap();
        let b = render_scene(&config, &attrs, 12).unwrap();
        assert_eq!(a, b);
        let c = render_scene(&config, &attrs, 13).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_occurrence_removes_class() {
        let config = test_config();
        let mut attrs = test_attrs();
        attrs.occurrence.insert(3, 0.0);
        for seed in 0..20 {
            let raster = render_scene(&config, &attrs, seed).unwrap();
            assert_eq!(raster.count_class(3), 0);
        }
    }

    #[test]
    fn road_band_present_without_objects() {
        let config = test_config();
        let mut attrs = test_attrs();
        for id in [2, 3, 4] {
            attrs.occurrence.insert(id, 0.0);
        }
        let raster = render_scene(&config, &attrs, 0).unwrap();
        for row in 24..32 {
            for col in 0..config.width {
                assert_eq!(raster.get(row, col), 1);
            }
        }
        assert_eq!(
            raster.count_class(1),
            (32 - 24) * config.width,
            "road band only"
        );
    }

    #[test]
    fn halving_interval_increases_density() {
        // Monte-Carlo oracle over seeds: twice the anchors, more pixels.
        let config = test_config();
        let sparse = test_attrs();
        let mut dense = test_attrs();
        dense.interval.insert(3, 6.0);
        let count = |attrs: &SceneAttributes| -> f64 {
            (0..200)
                .map(|seed| render_scene(&config, attrs, seed).unwrap().count_class(3))
                .sum::<usize>() as f64
                / 200.0
        };
        let sparse_mean = count(&sparse);
        let dense_mean = count(&dense);
        assert!(
            dense_mean > sparse_mean,
            "dense {dense_mean} <= sparse {sparse_mean}"
        );
    }

    #[test]
    fn occurrence_and_illumination_monotone() {
        let config = test_config();
        let mean_count = |attrs: &SceneAttributes| -> f64 {
            (0..200)
                .map(|seed| render_scene(&config, attrs, seed).unwrap().count_class(4))
                .sum::<usize>() as f64
                / 200.0
        };
        let mut low_occ = test_attrs();
        low_occ.occurrence.insert(4, 0.3);
        let mut high_occ = test_attrs();
        high_occ.occurrence.insert(4, 0.9);
        assert!(mean_count(&high_occ) > mean_count(&low_occ));

        let mut dark = test_attrs();
        dark.illumination = 0.0;
        let mut bright = test_attrs();
        bright.illumination = 1.0;
        assert!(mean_count(&bright) > mean_count(&dark));
    }

    #[test]
    fn line_offset_shifts_mean_row_exactly() {
        // Keep the person line clear of clipping and other classes.
        let config = test_config();
        let mut base = test_attrs();
        base.occurrence.insert(2, 0.0);
        base.occurrence.insert(3, 0.0);
        base.occurrence.insert(4, 1.0);
        base.line_offset.insert(4, 6.0);
        let mut shifted = base.clone();
        shifted.line_offset.insert(4, 9.0);
        for seed in 0..20 {
            let a = render_scene(&config, &base, seed).unwrap();
            let b = render_scene(&config, &shifted, seed).unwrap();
            let ra = a.mean_row(4).unwrap();
            let rb = b.mean_row(4).unwrap();
            assert!(
                (rb - ra - 3.0).abs() < 1e-9,
                "seed {seed}: shift {}",
                rb - ra
            );
        }
    }

    #[test]
    fn higher_priority_occludes() {
        // Put tree and person on the same line; person paints later.
        let config = test_config();
        let mut attrs = test_attrs();
        attrs.occurrence.insert(2, 0.0);
        attrs.line_offset.insert(3, 5.0);
        attrs.line_offset.insert(4, 5.0);
        attrs.interval.insert(3, 7.0);
        attrs.interval.insert(4, 7.0);
        attrs.occurrence.insert(3, 1.0);
        attrs.occurrence.insert(4, 1.0);
        let raster = render_scene(&config, &attrs, 3).unwrap();
        assert!(raster.count_class(4) > 0, "person visible");
        // Re-render with the person removed: every person pixel must have
        // been covering a cell some lower-priority class painted.
        let mut without = attrs.clone();
        without.occurrence.insert(4, 0.0);
        let under = render_scene(&config, &without, 3).unwrap();
        let mut covered = 0;
        for row in 0..raster.height() {
            for col in 0..raster.width() {
                if raster.get(row, col) == 4 && under.get(row, col) == 3 {
                    covered += 1;
                }
            }
        }
        assert!(covered > 0, "person should overpaint tree pixels");
    }

    #[test]
    fn camera_shift_translates_and_fills() {
        let config = test_config();
        let base = test_attrs();
        let mut moved = test_attrs();
        moved.camera_dx = 5.0;
        moved.camera_dy = -3.0;
        let a = render_scene(&config, &base, 9).unwrap();
        let b = render_scene(&config, &moved, 9).unwrap();
        // Interior pixels translate exactly.
        for row in 10..40 {
            for col in 10..60 {
                assert_eq!(b.get((row - 3) as usize, col + 5), a.get(row, col));
            }
        }
        // Newly exposed left columns are background.
        for row in 0..config.height {
            for col in 0..5 {
                assert_eq!(b.get(row, col), config.background_id);
            }
        }
    }

    #[test]
    fn dataset_single_image_matches_render_scene() {
        let config = test_config();
        let attrs = test_attrs();
        let dataset = render_dataset(&config, &attrs, 1, 77, None).unwrap();
        assert_eq!(dataset.rasters()[0], render_scene(&config, &attrs, 77).unwrap());
    }

    #[test]
    fn dataset_is_reproducible() {
        let config = test_config();
        let attrs = test_attrs();
        let a = render_dataset(&config, &attrs, 180, 5, None).unwrap();
        let b = render_dataset(&config, &attrs, 180, 5, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 180);
    }

    #[test]
    fn relaxed_datasets_are_at_least_as_diverse() {
        // Quantized placement: without jitter the images collapse onto few
        // distinct rasters; attribute jitter that crosses placements can
        // only add diversity.
        let config = test_config();
        let mut attrs = test_attrs();
        attrs.occurrence.insert(2, 1.0);
        attrs.occurrence.insert(3, 1.0);
        attrs.occurrence.insert(4, 1.0);
        attrs.interval.insert(2, 96.0);
        attrs.interval.insert(3, 96.0);
        attrs.interval.insert(4, 96.0);
        let m = 50;
        let plain = render_dataset(&config, &attrs, m, 21, None).unwrap();

        let mut rng = rng_from_seed(99);
        let jittered: Vec<SceneAttributes> = (0..m)
            .map(|_| {
                let mut a = attrs.clone();
                for id in [2u8, 3, 4] {
                    let v = a.line_offset[&id] + (rng.gen::<f64>() * 2.0 - 1.0) * 1.5;
                    a.line_offset.insert(id, v.clamp(0.0, 20.0));
                }
                a
            })
            .collect();
        let relaxed = render_dataset(&config, &attrs, m, 21, Some(&jittered)).unwrap();
        assert!(relaxed.count_distinct() >= plain.count_distinct());
    }

    #[test]
    fn target_sets_are_disjoint_and_reproducible() {
        let config = test_config();
        let attrs = test_attrs();
        let (val_a, test_a) = make_target(&config, &attrs, 10, 10, 40).unwrap();
        let (val_b, test_b) = make_target(&config, &attrs, 10, 10, 40).unwrap();
        assert_eq!(val_a, val_b);
        assert_eq!(test_a, test_b);
        assert_ne!(val_a.rasters()[0], test_a.rasters()[0]);
    }

    #[test]
    fn validation_catches_bad_attrs() {
        let config = test_config();
        let mut attrs = test_attrs();
        attrs.interval.insert(3, 0.5);
        assert!(matches!(
            attrs.validate(&config),
            Err(SceneError::IntervalTooSmall { .. })
        ));
        let mut attrs = test_attrs();
        attrs.line_offset.insert(3, 400.0);
        assert!(matches!(
            attrs.validate(&config),
            Err(SceneError::LineOutOfRaster { .. })
        ));
        let mut attrs = test_attrs();
        attrs.occurrence.insert(3, 1.4);
        assert!(matches!(
            attrs.validate(&config),
            Err(SceneError::UnitRange { .. })
        ));
    }

    #[test]
    fn pgm_text_round_shape() {
        let raster = LabelRaster::from_cells(2, 3, vec![0, 1, 2, 3, 4, 5]);
        let text = raster.to_pgm_text();
        assert!(text.starts_with("P2\n3 2\n5\n"));
        assert!(text.contains("0 1 2"));
        assert!(text.contains("3 4 5"));
    }
}
