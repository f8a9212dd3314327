//! JSON job configuration: schema, validation that reports every problem
//! at once, and assembly of the IFS it describes.
//!
//! A document may start from a named fixture (`"fixture": "example2a"`);
//! its other top-level keys then replace the fixture's sections.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::boundary::{
    build_blend, build_boundary_curves, build_coons_blend, BlendSpec, BoundaryCurves, CurveSpec,
    FreeField, FreeFields, PatchBlend,
};
use crate::error::{ConfigIssue, Error, Result};
use crate::expr::ExprText;
use crate::grid::{build_domain_maps, CellIndex, DataGrid, Orientation};
use crate::ifs::{assemble_ifs, check_resolution, IfsSystem, SolveOptions};
use crate::scaling::{SamplingOptions, ScalingField, ScalingSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub grid: GridSource,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orientations: Vec<CellOrientation>,
    pub scaling: Vec<CellScaling>,
    pub boundary: CurveSpec,
    #[serde(default)]
    pub blend: BlendConfig,
    #[serde(default)]
    pub free_field: FreeFieldConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub dimension: DimensionConfig,
    #[serde(default)]
    pub chaos: ChaosConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Exactly one of: inline knots and rows, a grid file, or a named grid.
/// Inline `rows` are listed per y knot, each giving values along x.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOrientation {
    pub cell: CellIndex,
    #[serde(default)]
    pub x: Orientation,
    #[serde(default)]
    pub y: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScaling {
    pub cell: CellIndex,
    #[serde(flatten)]
    pub spec: ScalingSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefaultBlend {
    #[default]
    Coons,
    /// Every cell needs its own entry.
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlendConfig {
    #[serde(default)]
    pub default: DefaultBlend,
    #[serde(default)]
    pub cells: Vec<CellBlend>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBlend {
    pub cell: CellIndex,
    #[serde(flatten)]
    pub spec: BlendSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeFieldConfig {
    #[serde(default = "zero_text")]
    pub shared: ExprText,
    #[serde(default)]
    pub cells: Vec<CellFreeField>,
}

impl Default for FreeFieldConfig {
    fn default() -> Self {
        Self {
            shared: zero_text(),
            cells: Vec::new(),
        }
    }
}

fn zero_text() -> ExprText {
    ExprText::new("0")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFreeField {
    pub cell: CellIndex,
    pub expr: ExprText,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub certify_resolution: usize,
    pub extrema_resolution: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let d = SamplingOptions::default();
        Self {
            certify_resolution: d.certify_resolution,
            extrema_resolution: d.extrema_resolution,
        }
    }
}

impl From<SamplingConfig> for SamplingOptions {
    fn from(c: SamplingConfig) -> Self {
        Self {
            certify_resolution: c.certify_resolution,
            extrema_resolution: c.extrema_resolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub resolution: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            resolution: d.resolution,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

impl From<SolverConfig> for SolveOptions {
    fn from(c: SolverConfig) -> Self {
        Self {
            resolution: c.resolution,
            tol: c.tol,
            max_iter: c.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    #[default]
    HeightField,
    PointCloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DimensionConfig {
    /// Number of scales `δ_k = n^{−k}`, `k = first_scale..first_scale+scales−1`.
    pub scales: usize,
    pub first_scale: usize,
    /// Interior margin for the extrema of `|s|`, as a fraction of cell width.
    pub epsilon: f64,
    /// Lattice resolution for counting; derived from the finest scale when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    pub mode: CountMode,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self {
            scales: 5,
            first_scale: 1,
            epsilon: 1.0 / 64.0,
            resolution: None,
            mode: CountMode::HeightField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChaosConfig {
    pub points: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl Default for ChaosConfig {
    fn default() -> Self {
        Self {
            points: 100_000,
            seed: 0,
            burn_in: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Parses and validates a configuration document, resolving a top-level
/// `fixture` key against the built-in fixtures. Grid files are resolved
/// relative to `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<JobConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::Config(vec![ConfigIssue {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        }])
    })?;
    parse_config_value(doc, base_dir)
}

pub fn parse_config_value(doc: Value, base_dir: Option<&Path>) -> Result<JobConfig> {
    let mut issues = Vec::new();
    let doc = match resolve_fixture(doc, &mut issues) {
        Some(d) => d,
        None => return Err(Error::Config(issues)),
    };
    check_keys(&doc, &mut issues);
    let config = typed_sections(&doc, &mut issues);
    if let Some(config) = &config {
        check_semantics(config, base_dir, &mut issues);
    }
    match config {
        Some(c) if issues.is_empty() => Ok(c),
        _ => Err(Error::Config(issues)),
    }
}

fn resolve_fixture(doc: Value, issues: &mut Vec<ConfigIssue>) -> Option<Map<String, Value>> {
    let Value::Object(mut top) = doc else {
        issues.push(issue("document", "expected a JSON object"));
        return None;
    };
    let Some(name) = top.remove("fixture") else {
        return Some(top);
    };
    let Some(name) = name.as_str() else {
        issues.push(issue("fixture", "expected a fixture name"));
        return None;
    };
    match crate::fixtures::fixture(name) {
        Ok(base) => {
            let Value::Object(mut merged) = serde_json::to_value(base).expect("fixture serializes")
            else {
                unreachable!("configs serialize to objects")
            };
            merged.extend(top);
            Some(merged)
        }
        Err(e) => {
            issues.push(issue("fixture", &e.to_string()));
            None
        }
    }
}

fn issue(path: &str, message: &str) -> ConfigIssue {
    ConfigIssue {
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Reports unknown and missing keys of one object; returns it if it is one.
fn object<'a>(
    v: &'a Value,
    path: &str,
    required: &[&str],
    optional: &[&str],
    issues: &mut Vec<ConfigIssue>,
) -> Option<&'a Map<String, Value>> {
    let Some(map) = v.as_object() else {
        issues.push(issue(path, "expected an object"));
        return None;
    };
    for key in map.keys() {
        if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
            let mut known: Vec<&str> = required.iter().chain(optional).copied().collect();
            known.sort_unstable();
            issues.push(issue(
                &join(path, key),
                &format!("unknown key (expected one of: {})", known.join(", ")),
            ));
        }
    }
    for key in required {
        if !map.contains_key(*key) {
            issues.push(issue(&join(path, key), "missing required key"));
        }
    }
    Some(map)
}

fn array_items<'a>(
    v: &'a Value,
    path: &str,
    issues: &mut Vec<ConfigIssue>,
) -> Vec<(String, &'a Value)> {
    match v.as_array() {
        Some(items) => items
            .iter()
            .enumerate()
            .map(|(k, item)| (format!("{path}[{k}]"), item))
            .collect(),
        None => {
            issues.push(issue(path, "expected an array"));
            Vec::new()
        }
    }
}

/// Checks an object whose extra keys depend on a tag value.
fn tagged(
    v: &Value,
    path: &str,
    common: &[&str],
    tag: &str,
    variants: &[(&str, &[&str], &[&str])],
    issues: &mut Vec<ConfigIssue>,
) {
    let Some(map) = v.as_object() else {
        issues.push(issue(path, "expected an object"));
        return;
    };
    let Some(name) = map.get(tag) else {
        for key in common.iter().chain([tag].iter()) {
            if !map.contains_key(*key) {
                issues.push(issue(&join(path, key), "missing required key"));
            }
        }
        return;
    };
    let Some((_, required, optional)) = variants.iter().find(|(n, _, _)| Some(*n) == name.as_str())
    else {
        let names: Vec<&str> = variants.iter().map(|(n, _, _)| *n).collect();
        issues.push(issue(
            &join(path, tag),
            &format!(
                "unknown {tag} {name} (expected one of: {})",
                names.join(", ")
            ),
        ));
        return;
    };
    let required: Vec<&str> = common
        .iter()
        .chain(required.iter())
        .chain([tag].iter())
        .copied()
        .collect();
    object(v, path, &required, optional, issues);
}

fn check_keys(doc: &Map<String, Value>, issues: &mut Vec<ConfigIssue>) {
    let top = Value::Object(doc.clone());
    object(
        &top,
        "",
        &["grid", "scaling", "boundary"],
        &[
            "orientations",
            "blend",
            "free_field",
            "sampling",
            "solver",
            "dimension",
            "chaos",
            "output",
        ],
        issues,
    );
    if let Some(g) = doc.get("grid") {
        object(
            g,
            "grid",
            &[],
            &["x", "y", "rows", "file", "fixture"],
            issues,
        );
    }
    if let Some(v) = doc.get("orientations") {
        for (path, item) in array_items(v, "orientations", issues) {
            object(item, &path, &["cell"], &["x", "y"], issues);
        }
    }
    if let Some(v) = doc.get("scaling") {
        for (path, item) in array_items(v, "scaling", issues) {
            tagged(
                item,
                &path,
                &["cell"],
                "form",
                &[
                    ("separable-quartic", &["coefficient"], &[]),
                    ("polynomial-product", &["psi", "exponents"], &["outer"]),
                    ("expression", &["expr"], &[]),
                ],
                issues,
            );
        }
    }
    if let Some(v) = doc.get("boundary") {
        tagged(
            v,
            "boundary",
            &[],
            "method",
            &[("linear", &[], &[]), ("pieces", &["q", "r"], &[])],
            issues,
        );
    }
    if let Some(v) = doc.get("blend") {
        if let Some(map) = object(v, "blend", &[], &["default", "cells"], issues) {
            if let Some(cells) = map.get("cells") {
                for (path, item) in array_items(cells, "blend.cells", issues) {
                    tagged(
                        item,
                        &path,
                        &["cell"],
                        "kind",
                        &[("coons", &[], &[]), ("explicit", &["terms"], &[])],
                        issues,
                    );
                }
            }
        }
    }
    if let Some(v) = doc.get("free_field") {
        if let Some(map) = object(v, "free_field", &[], &["shared", "cells"], issues) {
            if let Some(cells) = map.get("cells") {
                for (path, item) in array_items(cells, "free_field.cells", issues) {
                    object(item, &path, &["cell", "expr"], &[], issues);
                }
            }
        }
    }
    let flat: [(&str, &[&str]); 5] = [
        ("sampling", &["certify_resolution", "extrema_resolution"]),
        ("solver", &["resolution", "tol", "max_iter"]),
        (
            "dimension",
            &["scales", "first_scale", "epsilon", "resolution", "mode"],
        ),
        ("chaos", &["points", "seed", "burn_in"]),
        ("output", &["dir"]),
    ];
    for (key, fields) in flat {
        if let Some(v) = doc.get(key) {
            object(v, key, &[], fields, issues);
        }
    }
}

fn section<T: DeserializeOwned>(
    doc: &Map<String, Value>,
    key: &str,
    issues: &mut Vec<ConfigIssue>,
) -> Option<Option<T>> {
    let Some(v) = doc.get(key) else {
        return Some(None);
    };
    match serde_path_to_error::deserialize::<_, T>(v.clone()) {
        Ok(t) => Some(Some(t)),
        Err(e) => {
            let inner = e.path().to_string();
            let path = if inner == "." {
                key.to_string()
            } else {
                join(key, &inner)
            };
            issues.push(ConfigIssue {
                path,
                message: e.into_inner().to_string(),
            });
            None
        }
    }
}

/// Deserializes each section separately so that type errors in different
/// sections are all reported.
fn typed_sections(doc: &Map<String, Value>, issues: &mut Vec<ConfigIssue>) -> Option<JobConfig> {
    let grid = section::<GridSource>(doc, "grid", issues);
    let orientations = section::<Vec<CellOrientation>>(doc, "orientations", issues);
    let scaling = section::<Vec<CellScaling>>(doc, "scaling", issues);
    let boundary = section::<CurveSpec>(doc, "boundary", issues);
    let blend = section::<BlendConfig>(doc, "blend", issues);
    let free_field = section::<FreeFieldConfig>(doc, "free_field", issues);
    let sampling = section::<SamplingConfig>(doc, "sampling", issues);
    let solver = section::<SolverConfig>(doc, "solver", issues);
    let dimension = section::<DimensionConfig>(doc, "dimension", issues);
    let chaos = section::<ChaosConfig>(doc, "chaos", issues);
    let output = section::<OutputConfig>(doc, "output", issues);
    Some(JobConfig {
        grid: grid??,
        orientations: orientations?.unwrap_or_default(),
        scaling: scaling??,
        boundary: boundary??,
        blend: blend?.unwrap_or_default(),
        free_field: free_field?.unwrap_or_default(),
        sampling: sampling?.unwrap_or_default(),
        solver: solver?.unwrap_or_default(),
        dimension: dimension?.unwrap_or_default(),
        chaos: chaos?.unwrap_or_default(),
        output: output?.unwrap_or_default(),
    })
}

fn check_cells<'a>(
    grid: &DataGrid,
    path: &str,
    cells: impl Iterator<Item = CellIndex> + 'a,
    issues: &mut Vec<ConfigIssue>,
) -> BTreeMap<CellIndex, usize> {
    let mut seen = BTreeMap::new();
    for (k, cell) in cells.enumerate() {
        let at = format!("{path}[{k}].cell");
        if !grid.contains_cell(cell) {
            issues.push(issue(
                &at,
                &format!(
                    "cell {cell} does not exist in a {}×{} grid",
                    grid.n(),
                    grid.m()
                ),
            ));
        } else if let Some(prev) = seen.insert(cell, k) {
            issues.push(issue(
                &at,
                &format!("cell {cell} already configured at {path}[{prev}]"),
            ));
        }
    }
    seen
}

fn check_semantics(config: &JobConfig, base_dir: Option<&Path>, issues: &mut Vec<ConfigIssue>) {
    let grid = match config.grid.load(base_dir) {
        Ok(g) => Some(g),
        Err(e) => {
            issues.push(issue("grid", &e.to_string()));
            None
        }
    };
    for (k, s) in config.scaling.iter().enumerate() {
        let at = format!("scaling[{k}]");
        let exprs: Vec<(&str, &ExprText, &[&str])> = match &s.spec {
            ScalingSpec::SeparableQuartic { .. } => Vec::new(),
            ScalingSpec::PolynomialProduct { psi, outer, .. } => {
                vec![("psi", psi, &["x", "y"]), ("outer", outer, &["t"])]
            }
            ScalingSpec::Expression { expr } => vec![("expr", expr, &["x", "y"])],
        };
        for (key, text, vars) in exprs {
            if let Err(e) = text.compile(vars) {
                issues.push(issue(&join(&at, key), &e.to_string()));
            }
        }
    }
    if let Err(e) = config.free_field.shared.compile(&["x", "y"]) {
        issues.push(issue("free_field.shared", &e.to_string()));
    }
    for (k, c) in config.free_field.cells.iter().enumerate() {
        if let Err(e) = c.expr.compile(&["x", "y"]) {
            issues.push(issue(
                &format!("free_field.cells[{k}].expr"),
                &e.to_string(),
            ));
        }
    }
    let s = &config.solver;
    if !(s.tol > 0.0) {
        issues.push(issue("solver.tol", "must be positive"));
    }
    if s.max_iter == 0 {
        issues.push(issue("solver.max_iter", "must be at least 1"));
    }
    let d = &config.dimension;
    if d.scales < 3 {
        issues.push(issue(
            "dimension.scales",
            "at least 3 scales are needed for a fit",
        ));
    }
    if !(d.epsilon > 0.0 && d.epsilon < 0.5) {
        issues.push(issue("dimension.epsilon", "must lie in (0, 0.5)"));
    }
    if config.sampling.certify_resolution < 2 || config.sampling.extrema_resolution < 2 {
        issues.push(issue("sampling", "resolutions must be at least 2"));
    }
    let Some(grid) = grid else { return };
    let scaled = check_cells(
        &grid,
        "scaling",
        config.scaling.iter().map(|s| s.cell),
        issues,
    );
    let missing: Vec<String> = grid
        .cells()
        .filter(|c| !scaled.contains_key(c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        issues.push(issue(
            "scaling",
            &format!("no scaling field for cell(s) {}", missing.join(", ")),
        ));
    }
    check_cells(
        &grid,
        "orientations",
        config.orientations.iter().map(|o| o.cell),
        issues,
    );
    let blended = check_cells(
        &grid,
        "blend.cells",
        config.blend.cells.iter().map(|b| b.cell),
        issues,
    );
    if config.blend.default == DefaultBlend::None {
        let missing: Vec<String> = grid
            .cells()
            .filter(|c| !blended.contains_key(c))
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            issues.push(issue(
                "blend.cells",
                &format!(
                    "default is none but cell(s) {} have no blend",
                    missing.join(", ")
                ),
            ));
        }
    }
    check_cells(
        &grid,
        "free_field.cells",
        config.free_field.cells.iter().map(|c| c.cell),
        issues,
    );
    if let Err(e) = build_boundary_curves(&grid, &config.boundary) {
        issues.push(issue("boundary", &e.to_string()));
    }
    if let Err(e) = check_resolution(&grid, s.resolution) {
        issues.push(issue("solver.resolution", &e.to_string()));
    }
}

impl GridSource {
    pub fn inline(grid: &DataGrid) -> Self {
        let rows = (0..grid.y_knots().len())
            .map(|j| (0..grid.x_knots().len()).map(|i| grid.z(i, j)).collect())
            .collect();
        Self {
            x: Some(grid.x_knots().to_vec()),
            y: Some(grid.y_knots().to_vec()),
            rows: Some(rows),
            ..Self::default()
        }
    }

    pub fn load(&self, base_dir: Option<&Path>) -> Result<DataGrid> {
        let inline = self.x.is_some() || self.y.is_some() || self.rows.is_some();
        let sources = usize::from(inline)
            + usize::from(self.file.is_some())
            + usize::from(self.fixture.is_some());
        if sources != 1 {
            return Err(Error::InvalidGrid(
                "give exactly one of x/y/rows, file, or fixture".into(),
            ));
        }
        if let Some(name) = &self.fixture {
            return crate::fixtures::grid_fixture(name);
        }
        if let Some(file) = &self.file {
            let path = match base_dir {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file.clone(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::InvalidGrid(format!("cannot read {}: {e}", path.display())))?;
            return parse_grid_text(&text);
        }
        match (&self.x, &self.y, &self.rows) {
            (Some(x), Some(y), Some(rows)) => DataGrid::from_rows(x.clone(), y.clone(), rows),
            _ => Err(Error::InvalidGrid(
                "inline grids need all of x, y and rows".into(),
            )),
        }
    }
}

/// Plain-text grid: the first line lists the x knots, the second the y
/// knots, then one line per y knot with the values along x. Entries are
/// separated by whitespace or commas and may be fractions like `1/3`;
/// `#` starts a comment.
pub fn parse_grid_text(text: &str) -> Result<DataGrid> {
    let mut lines = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                parse_number(t).ok_or_else(|| {
                    Error::InvalidGrid(format!("line {}: cannot read `{t}`", no + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        lines.push(values);
    }
    if lines.len() < 3 {
        return Err(Error::InvalidGrid(
            "expected x knots, y knots and at least one row".into(),
        ));
    }
    let rows = lines.split_off(2);
    let y = lines.pop().unwrap();
    let x = lines.pop().unwrap();
    DataGrid::from_rows(x, y, &rows)
}

fn parse_number(token: &str) -> Option<f64> {
    match token.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => token.parse().ok(),
    }
}

impl JobConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load_grid(&self, base_dir: Option<&Path>) -> Result<DataGrid> {
        self.grid.load(base_dir)
    }

    pub fn scaling_spec(&self, cell: CellIndex) -> Option<&ScalingSpec> {
        self.scaling
            .iter()
            .find(|s| s.cell == cell)
            .map(|s| &s.spec)
    }

    pub fn blend_spec(&self, cell: CellIndex) -> Option<&BlendSpec> {
        self.blend
            .cells
            .iter()
            .find(|b| b.cell == cell)
            .map(|b| &b.spec)
    }

    pub fn curves(&self, grid: &DataGrid) -> Result<BoundaryCurves> {
        build_boundary_curves(grid, &self.boundary)
    }

    pub fn scaling_field(&self, grid: &DataGrid, cell: CellIndex) -> Result<ScalingField> {
        let spec = self.scaling_spec(cell).ok_or_else(|| Error::ScalingField {
            cell,
            message: "no scaling field configured".into(),
        })?;
        ScalingField::from_spec(grid, cell, spec, self.sampling.into())
    }

    pub fn blend(
        &self,
        grid: &DataGrid,
        curves: &BoundaryCurves,
        cell: CellIndex,
    ) -> Result<PatchBlend> {
        match (self.blend_spec(cell), self.blend.default) {
            (Some(spec), _) => build_blend(grid, curves, cell, spec),
            (None, DefaultBlend::Coons) => build_coons_blend(grid, curves, cell),
            (None, DefaultBlend::None) => Err(Error::InvalidGrid(format!(
                "no blend configured for cell {cell}"
            ))),
        }
    }

    pub fn free_fields(&self, grid: &DataGrid) -> Result<FreeFields> {
        let mut fields = FreeFields::shared(FreeField::from_text(grid, &self.free_field.shared)?);
        for c in &self.free_field.cells {
            fields
                .per_cell
                .insert(c.cell, FreeField::from_text(grid, &c.expr)?);
        }
        Ok(fields)
    }

    /// Builds and certifies the full system.
    pub fn build_system(&self, base_dir: Option<&Path>) -> Result<IfsSystem> {
        let grid = self.load_grid(base_dir)?;
        let curves = self.curves(&grid)?;
        let orient: BTreeMap<CellIndex, (Orientation, Orientation)> = self
            .orientations
            .iter()
            .map(|o| (o.cell, (o.x, o.y)))
            .collect();
        let maps = build_domain_maps(&grid, |cell| orient.get(&cell).copied().unwrap_or_default())?;
        let scalings = grid
            .cells()
            .map(|cell| self.scaling_field(&grid, cell))
            .collect::<Result<Vec<_>>>()?;
        let blends = grid
            .cells()
            .map(|cell| self.blend(&grid, &curves, cell))
            .collect::<Result<Vec<_>>>()?;
        let free = self.free_fields(&grid)?;
        assemble_ifs(grid, curves, maps, scalings, blends, free)
    }
}
