//! Job documents.

use std::path::{Path, PathBuf};

use finsler_core::geometry::MetricModel;
use finsler_core::library::{
    euclidean, flat_projective_basis, funk, killing_basis, minkowski_randers, polynomial_randers,
    random_randers, space_form, FunkSpec, SpaceFormSpec,
};
use finsler_core::polynomial::Polynomial;
use finsler_core::projective::PolyVectorField;
use finsler_core::randers::VolumeForm;
use finsler_core::sample::SampleConfig;
use finsler_core::TangentPoint;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Verify,
    Classify,
    DimScan,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean {
        n: usize,
    },
    Klein {
        n: usize,
    },
    SpaceForm {
        n: usize,
        k: f64,
    },
    MinkowskiRanders {
        n: usize,
        b: Vec<f64>,
    },
    Funk {
        n: usize,
        #[serde(default = "plus_plus")]
        signs: [i8; 2],
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    /// `a` is row-major `n x n`, `b` has `n` entries.
    Randers {
        n: usize,
        a: Vec<Polynomial>,
        b: Vec<Polynomial>,
    },
    RandomRanders {
        n: usize,
        seed: u64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn plus_plus() -> [i8; 2] {
    [1, 1]
}

fn default_amplitude() -> f64 {
    0.05
}

impl MetricSpec {
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { n }
            | MetricSpec::Klein { n }
            | MetricSpec::SpaceForm { n, .. }
            | MetricSpec::MinkowskiRanders { n, .. }
            | MetricSpec::Funk { n, .. }
            | MetricSpec::Randers { n, .. }
            | MetricSpec::RandomRanders { n, .. } => *n,
        }
    }

    pub fn is_funk(&self) -> bool {
        matches!(self, MetricSpec::Funk { .. })
    }

    pub fn build(&self) -> Result<MetricModel, CliError> {
        let n = self.dim();
        if n == 0 {
            return Err(CliError::Schema("metric dimension must be positive".into()));
        }
        let model = match self {
            MetricSpec::Euclidean { n } => euclidean(*n),
            MetricSpec::Klein { n } => space_form(SpaceFormSpec { n: *n, k: -1.0 })?,
            MetricSpec::SpaceForm { n, k } => space_form(SpaceFormSpec { n: *n, k: *k })?,
            MetricSpec::MinkowskiRanders { n, b } => minkowski_randers(*n, b.clone())?,
            MetricSpec::Funk { n, signs, a } => {
                let a = a.clone().unwrap_or_else(|| vec![0.0; *n]);
                funk(FunkSpec::new(*n, a).with_signs(signs[0], signs[1]))?
            }
            MetricSpec::Randers { n, a, b } => {
                for p in a.iter().chain(b) {
                    p.validate(*n)?;
                }
                polynomial_randers("randers", *n, a.clone(), b.clone())?
            }
            MetricSpec::RandomRanders { n, seed, amplitude } => {
                random_randers(*n, *seed, *amplitude)?
            }
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    FlatProjective,
    Killing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `V^i = b^i + a[i][j] x^j + c[i][j][k] x^j x^k` with `c` symmetric in
    /// `j, k`; omitted parts are zero.
    Polynomial {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        c: Option<Vec<Vec<Vec<f64>>>>,
    },
    /// `<c, x> x`
    RadialQuadratic {
        #[serde(default)]
        name: Option<String>,
        c: Vec<f64>,
    },
    /// A builtin family; Killing fields are those of the metric's space form
    /// (`k = -1` for Klein and Funk, `k = 0` otherwise).
    Family { name: FamilyName },
}

/// A field with the label used in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub field: PolyVectorField,
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<(), CliError> {
    if got != expected {
        return Err(CliError::Schema(format!(
            "{what} has {got} entries, expected {expected}"
        )));
    }
    Ok(())
}

impl FieldSpec {
    pub fn expand(&self, metric: &MetricSpec, index: usize) -> Result<Vec<NamedField>, CliError> {
        let n = metric.dim();
        let label = |name: &Option<String>| name.clone().unwrap_or_else(|| format!("field{index}"));
        match self {
            FieldSpec::Polynomial { name, b, a, c } => {
                let b = b.clone().unwrap_or_else(|| vec![0.0; n]);
                check_len("field b", b.len(), n)?;
                let mut flat_a = Vec::with_capacity(n * n);
                match a {
                    Some(rows) => {
                        check_len("field a", rows.len(), n)?;
                        for row in rows {
                            check_len("field a row", row.len(), n)?;
                            flat_a.extend(row);
                        }
                    }
                    None => flat_a.resize(n * n, 0.0),
                }
                let mut flat_c = Vec::with_capacity(n * n * n);
                match c {
                    Some(blocks) => {
                        check_len("field c", blocks.len(), n)?;
                        for block in blocks {
                            check_len("field c block", block.len(), n)?;
                            for row in block {
                                check_len("field c row", row.len(), n)?;
                                flat_c.extend(row);
                            }
                        }
                    }
                    None => flat_c.resize(n * n * n, 0.0),
                }
                Ok(vec![NamedField {
                    name: label(name),
                    field: PolyVectorField::new(n, b, flat_a, flat_c)?,
                }])
            }
            FieldSpec::RadialQuadratic { name, c } => {
                check_len("field c", c.len(), n)?;
                Ok(vec![NamedField {
                    name: label(name),
                    field: PolyVectorField::radial_quadratic(n, c, 1.0),
                }])
            }
            FieldSpec::Family { name } => Ok(match name {
                FamilyName::FlatProjective => {
                    let mut out = Vec::new();
                    for i in 0..n {
                        for j in 0..n {
                            out.push(format!("x^{j} d/dx^{i}"));
                        }
                    }
                    for i in 0..n {
                        out.push(format!("d/dx^{i}"));
                    }
                    for i in 0..n {
                        out.push(format!("x^{i} x"));
                    }
                    out.into_iter()
                        .zip(flat_projective_basis(n))
                        .map(|(name, field)| NamedField { name, field })
                        .collect()
                }
                FamilyName::Killing => {
                    let k = match metric {
                        MetricSpec::Klein { .. } | MetricSpec::Funk { .. } => -1.0,
                        MetricSpec::SpaceForm { k, .. } => *k,
                        _ => 0.0,
                    };
                    let mut out = Vec::new();
                    for i in 0..n {
                        for j in i + 1..n {
                            out.push(format!("rotation({i},{j})"));
                        }
                    }
                    for i in 0..n {
                        out.push(format!("translation({i})"));
                    }
                    out.into_iter()
                        .zip(killing_basis(SpaceFormSpec { n, k }))
                        .map(|(name, field)| NamedField { name, field })
                        .collect()
                }
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantity {
    F,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "G")]
    Spray,
    S,
    Xi,
    E,
    H,
    Sigma,
    Ric,
    D,
    W,
    #[serde(rename = "W_tilde")]
    WTilde,
    #[serde(rename = "W_star")]
    WStar,
    Z,
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::F,
        Quantity::G,
        Quantity::Spray,
        Quantity::S,
        Quantity::Xi,
        Quantity::E,
        Quantity::H,
        Quantity::Sigma,
        Quantity::Ric,
        Quantity::D,
        Quantity::W,
        Quantity::WTilde,
        Quantity::WStar,
        Quantity::Z,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::F => "F",
            Quantity::G => "g",
            Quantity::Spray => "G",
            Quantity::S => "S",
            Quantity::Xi => "Xi",
            Quantity::E => "E",
            Quantity::H => "H",
            Quantity::Sigma => "Sigma",
            Quantity::Ric => "Ric",
            Quantity::D => "D",
            Quantity::W => "W",
            Quantity::WTilde => "W_tilde",
            Quantity::WStar => "W_star",
            Quantity::Z => "Z",
        }
    }

    /// Jet order needed to evaluate the quantity.
    pub fn order(self) -> usize {
        match self {
            Quantity::F => 1,
            Quantity::G | Quantity::Spray => 2,
            Quantity::S => 3,
            Quantity::Xi | Quantity::E | Quantity::Sigma => 5,
            Quantity::H | Quantity::Ric | Quantity::D | Quantity::WStar | Quantity::Z => 6,
            Quantity::WTilde => 7,
            Quantity::W => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeKind {
    BusemannHausdorff,
    Coordinate,
}

impl VolumeKind {
    pub fn form(self) -> VolumeForm {
        match self {
            VolumeKind::BusemannHausdorff => VolumeForm::BusemannHausdorff,
            VolumeKind::Coordinate => VolumeForm::Coordinate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub schema_version: u32,
    pub command: Command,
    pub metric: MetricSpec,
    #[serde(default)]
    pub quantities: Option<Vec<Quantity>>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub samples: Option<SampleSpec>,
    /// Explicit points; they replace sampling for `eval`.
    #[serde(default)]
    pub points: Option<Vec<TangentPoint>>,
    #[serde(default)]
    pub volume: Option<VolumeKind>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Command-line values that take precedence over the job document.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
}

impl JobSpec {
    pub fn from_json(text: &str) -> Result<JobSpec, CliError> {
        let job: JobSpec =
            serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        job.validate()?;
        Ok(job)
    }

    pub fn load(path: &Path) -> Result<JobSpec, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        JobSpec::from_json(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(seed) = o.seed {
            self.samples.get_or_insert(SampleSpec {
                count: None,
                seed: None,
                radius: None,
            });
            if let Some(s) = self.samples.as_mut() {
                s.seed = Some(seed);
            }
        }
        if o.tol.is_some() {
            self.tolerance = o.tol;
        }
        if o.order.is_some() {
            self.order = o.order;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let n = self.metric.dim();
        if let Some(points) = &self.points {
            for (i, p) in points.iter().enumerate() {
                if p.x.len() != n || p.y.len() != n {
                    return Err(CliError::Schema(format!(
                        "point {i} does not have dimension {n}"
                    )));
                }
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Schema(format!(
                    "tolerance {tol} must lie in (0, 1)"
                )));
            }
        }
        if let Some(s) = &self.samples {
            if let Some(r) = s.radius {
                if !(r > 0.0 && r < 1.0) {
                    return Err(CliError::Schema(format!(
                        "sample radius {r} must lie in (0, 1)"
                    )));
                }
            }
            if s.count == Some(0) {
                return Err(CliError::Schema("sample count must be positive".into()));
            }
        }
        if self.command == Command::Classify && self.fields.is_empty() {
            return Err(CliError::Schema("classify needs at least one field".into()));
        }
        Ok(())
    }

    pub fn sample_config(&self) -> SampleConfig {
        let d = SampleConfig::default();
        let s = self.samples.unwrap_or(SampleSpec {
            count: None,
            seed: None,
            radius: None,
        });
        SampleConfig {
            count: s.count.unwrap_or(d.count),
            seed: s.seed.unwrap_or(d.seed),
            radius: s.radius.unwrap_or(d.radius),
        }
    }

    pub fn fields(&self) -> Result<Vec<NamedField>, CliError> {
        let mut out = Vec::new();
        for (i, f) in self.fields.iter().enumerate() {
            out.extend(f.expand(&self.metric, i)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<JobSpec, CliError> {
        JobSpec::from_json(text)
    }

    #[test]
    fn minimal_job_takes_defaults() {
        let job = parse(
            r#"{"schema_version": 1, "command": "dim-scan", "metric": {"kind": "funk", "n": 2}}"#,
        )
        .unwrap();
        assert_eq!(job.command, Command::DimScan);
        assert_eq!(
            job.metric,
            MetricSpec::Funk {
                n: 2,
                signs: [1, 1],
                a: None
            }
        );
        assert_eq!(job.sample_config(), SampleConfig::default());
        assert!(job.fields().unwrap().is_empty());
    }

    #[test]
    fn unknown_fields_and_versions_are_schema_errors() {
        let bad = [
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "euclidean", "n": 2}, "extra": 0}"#,
            r#"{"schema_version": 2, "command": "eval", "metric": {"kind": "euclidean", "n": 2}}"#,
            r#"{"schema_version": 1, "command": "plot", "metric": {"kind": "euclidean", "n": 2}}"#,
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "sphere", "n": 2}}"#,
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "euclidean", "n": 2}, "quantities": ["Q"]}"#,
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "euclidean", "n": 2}, "tolerance": 2.0}"#,
            r#"{"schema_version": 1, "command": "classify", "metric": {"kind": "euclidean", "n": 2}}"#,
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "euclidean", "n": 2},
                "points": [{"x": [0.0], "y": [1.0, 0.0]}]}"#,
        ];
        for text in bad {
            assert!(matches!(parse(text), Err(CliError::Schema(_))), "{text}");
        }
    }

    #[test]
    fn quantity_names_round_trip() {
        let names: Vec<Quantity> = serde_json::from_str(
            r#"["F","g","G","S","Xi","E","H","Sigma","Ric","D","W","W_tilde","W_star","Z"]"#,
        )
        .unwrap();
        assert_eq!(names, Quantity::ALL.to_vec());
        for q in Quantity::ALL {
            assert_eq!(
                serde_json::to_string(&q).unwrap(),
                format!("\"{}\"", q.label())
            );
        }
    }

    #[test]
    fn polynomial_fields_expand_to_coefficient_tables() {
        let metric = MetricSpec::Euclidean { n: 2 };
        let spec: FieldSpec = serde_json::from_str(
            r#"{"kind": "polynomial", "b": [1, 2], "a": [[0, -1], [1, 0]], "c": [[[0, 0.5], [0.5, 0]], [[0, 0], [0, 0]]]}"#,
        )
        .unwrap();
        let f = &spec.expand(&metric, 4).unwrap()[0];
        assert_eq!(f.name, "field4");
        // V = b + Ax + c x x at x = (1, 2)
        assert_eq!(f.field.value(&[1.0, 2.0]), vec![1.0 - 2.0 + 2.0, 2.0 + 1.0]);
        let short: FieldSpec =
            serde_json::from_str(r#"{"kind": "polynomial", "a": [[0, 1]]}"#).unwrap();
        assert!(matches!(short.expand(&metric, 0), Err(CliError::Schema(_))));
    }

    #[test]
    fn families_expand_with_labels() {
        let metric = MetricSpec::Klein { n: 3 };
        let flat = FieldSpec::Family {
            name: FamilyName::FlatProjective,
        }
        .expand(&metric, 0)
        .unwrap();
        assert_eq!(flat.len(), 15);
        assert_eq!(flat[1].name, "x^1 d/dx^0");
        let killing = FieldSpec::Family {
            name: FamilyName::Killing,
        }
        .expand(&metric, 0)
        .unwrap();
        assert_eq!(killing.len(), 6);
        assert_eq!(killing[3].name, "translation(0)");
        // k = -1: V = e_0 - x^0 x
        assert_eq!(
            killing[3].field.value(&[0.5, 0.0, 0.0]),
            vec![1.0 - 0.25, 0.0, 0.0]
        );
    }

    #[test]
    fn overrides_take_precedence() {
        let mut job = parse(
            r#"{"schema_version": 1, "command": "eval", "metric": {"kind": "euclidean", "n": 2},
            "samples": {"count": 3, "seed": 1}, "tolerance": 1e-4}"#,
        )
        .unwrap();
        job.apply(Overrides {
            seed: Some(9),
            tol: None,
            order: Some(4),
        });
        let s = job.sample_config();
        assert_eq!((s.count, s.seed), (3, 9));
        assert_eq!(job.tolerance, Some(1e-4));
        assert_eq!(job.order, Some(4));
    }

    #[test]
    fn metric_builders_validate() {
        assert!(MetricSpec::Euclidean { n: 0 }.build().is_err());
        assert!(MetricSpec::SpaceForm { n: 2, k: 1.0 }.build().is_err());
        let bad_poly = MetricSpec::Randers {
            n: 1,
            a: vec![Polynomial::term(1.0, vec![5])],
            b: vec![Polynomial::zero()],
        };
        assert!(matches!(bad_poly.build(), Err(CliError::Engine { .. })));
        let m = MetricSpec::MinkowskiRanders {
            n: 2,
            b: vec![0.2, 0.0],
        }
        .build()
        .unwrap();
        assert_eq!(m.dim(), 2);
    }
}
