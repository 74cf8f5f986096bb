//! Structured configuration and result documents.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bodies::{Ellipsoid, LinearMap, LqBall, Polytope, QBody, RadialTable, StarBody};
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, RuleKind, RuleSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn one() -> f64 {
    1.0
}

/// Named constructors for star bodies K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Cube {
        n: usize,
        #[serde(default = "one")]
        half_width: f64,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Simplex {
        vertices: Vec<Vec<f64>>,
    },
    RegularPolygon {
        k: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        phase: f64,
    },
    /// K = A·B_2^n, A given by rows.
    Ellipsoid {
        matrix: Vec<Vec<f64>>,
    },
    EllipsoidAxes {
        axes: Vec<f64>,
    },
    LqBall {
        n: usize,
        q: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    RadialTable {
        n: usize,
        level: u32,
        values: Vec<f64>,
    },
    LinearImage {
        base: Box<BodySpec>,
        matrix: Vec<Vec<f64>>,
    },
    Scaled {
        base: Box<BodySpec>,
        factor: f64,
    },
}

/// Square matrix from a list of rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::input("matrix must be given as n rows of length n"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl BodySpec {
    pub fn build(&self) -> Result<StarBody> {
        Ok(match self {
            BodySpec::Ball { n, radius } => StarBody::ball(*n, *radius)?,
            BodySpec::Cube { n, half_width } => StarBody::cube(*n, *half_width)?,
            BodySpec::Polytope { vertices } => StarBody::Polytope(Polytope::from_points(vertices)?),
            BodySpec::Simplex { vertices } => StarBody::Polytope(Polytope::simplex(vertices)?),
            BodySpec::RegularPolygon { k, radius, phase } => {
                StarBody::Polytope(Polytope::regular_polygon(*k, *radius, *phase)?)
            }
            BodySpec::Ellipsoid { matrix } => StarBody::Ellipsoid(Ellipsoid::new(matrix_from_rows(matrix)?)?),
            BodySpec::EllipsoidAxes { axes } => StarBody::Ellipsoid(Ellipsoid::axes(axes)?),
            BodySpec::LqBall { n, q, radius } => StarBody::LqBall(LqBall::new(*n, *q, *radius)?),
            BodySpec::RadialTable { n, level, values } => {
                StarBody::Table(RadialTable::from_values(*n, *level, values.clone())?)
            }
            BodySpec::LinearImage { base, matrix } => {
                base.build()?.linear_image(&LinearMap::new(matrix_from_rows(matrix)?)?)?
            }
            BodySpec::Scaled { base, factor } => base.build()?.scaled(*factor)?,
        })
    }

    pub fn scaled(&self, factor: f64) -> BodySpec {
        BodySpec::Scaled { base: Box::new(self.clone()), factor }
    }
}

/// Quantities addressable from a run configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Volume,
    Sp,
    Phi,
    DNp,
    CapBall,
    CapLower,
    CapUpper,
    CapPUpper,
    JStar,
    JOpt,
    HProj,
    HProjRadial,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::Volume,
        Quantity::Sp,
        Quantity::Phi,
        Quantity::DNp,
        Quantity::CapBall,
        Quantity::CapLower,
        Quantity::CapUpper,
        Quantity::CapPUpper,
        Quantity::JStar,
        Quantity::JOpt,
        Quantity::HProj,
        Quantity::HProjRadial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Volume => "volume",
            Quantity::Sp => "sp",
            Quantity::Phi => "phi",
            Quantity::DNp => "d-np",
            Quantity::CapBall => "cap-ball",
            Quantity::CapLower => "cap-lower",
            Quantity::CapUpper => "cap-upper",
            Quantity::CapPUpper => "cap-p-upper",
            Quantity::JStar => "j-star",
            Quantity::JOpt => "j-opt",
            Quantity::HProj => "h-proj",
            Quantity::HProjRadial => "h-proj-radial",
        }
    }

    fn needs_body(self) -> bool {
        !matches!(self, Quantity::DNp | Quantity::CapBall | Quantity::JStar | Quantity::JOpt)
    }

    fn needs_q(self) -> bool {
        !matches!(self, Quantity::Volume | Quantity::Sp | Quantity::CapPUpper | Quantity::JStar | Quantity::JOpt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct JOptSettings {
    pub grid_size: usize,
    pub s_max: f64,
}

impl Default for JOptSettings {
    fn default() -> Self {
        JOptSettings { grid_size: 400, s_max: 1e3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// the exponent p
    P,
    /// Q replaced by the τ-segment at the current p
    Tau,
    /// K replaced by aK
    A,
    /// Q replaced by bQ
    B,
    /// inner and outer rule level
    Level,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

fn default_rule() -> RuleSpec {
    RuleSpec::gauss(4)
}

/// A computation request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<QBody>,
    pub p: f64,
    /// Required when no body is given; must match the body otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Must match Q when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_rule")]
    pub inner_rule: RuleSpec,
    #[serde(default = "default_rule")]
    pub outer_rule: RuleSpec,
    #[serde(default)]
    pub seed: u64,
    pub quantities: Vec<Quantity>,
    /// Matrix directions for h-proj, column-major n×m, normalized on use.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_opt: Option<JOptSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("invalid configuration: {e}")))
    }

    /// Seed applied to stochastic outer rules that do not carry their own.
    pub fn effective_outer(&self) -> RuleSpec {
        let mut rule = self.outer_rule.clone();
        if rule.seed.is_none() {
            rule.seed = Some(self.seed);
        }
        rule
    }

    pub fn effective_inner(&self) -> RuleSpec {
        let mut rule = self.inner_rule.clone();
        if rule.kind != RuleKind::Gauss && rule.seed.is_none() {
            rule.seed = Some(self.seed);
        }
        rule
    }

    /// n from the body, or the explicit field.
    pub fn dim_n(&self) -> Result<usize> {
        let from_body = match &self.body {
            Some(b) => Some(b.build()?.dim()),
            None => None,
        };
        match (from_body, self.n) {
            (Some(a), Some(b)) if a != b => Err(Error::input(format!("n = {b} does not match the body dimension {a}"))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(Error::input("configuration needs a body or an explicit n")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::projection::check_p(self.p)?;
        if self.quantities.is_empty() {
            return Err(Error::input("configuration requests no quantities"));
        }
        if let Some(q) = &self.q {
            q.validate()?;
            if let Some(m) = self.m {
                if m != q.dim() {
                    return Err(Error::input(format!("m = {m} does not match Q's dimension {}", q.dim())));
                }
            }
        }
        if self.inner_rule.level < 1 || self.outer_rule.level < 1 {
            return Err(Error::input("rule levels must be >= 1"));
        }
        if self.m == Some(0) {
            return Err(Error::input("m must be >= 1"));
        }
        self.dim_n()?;
        for quantity in &self.quantities {
            if quantity.needs_body() && self.body.is_none() {
                return Err(Error::input(format!("{} needs a body", quantity.name())));
            }
            if quantity.needs_q() && self.q.is_none() {
                return Err(Error::input(format!("{} needs q", quantity.name())));
            }
            if matches!(quantity, Quantity::HProj | Quantity::HProjRadial) && self.directions.is_empty() {
                return Err(Error::input(format!("{} needs at least one direction", quantity.name())));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::input("sweep needs at least one value"));
            }
            if sweep.axis == SweepAxis::Tau && self.q.as_ref().is_some_and(|q| q.dim() != 1) {
                return Err(Error::input("the tau axis replaces Q by a segment and needs m = 1"));
            }
        }
        Ok(())
    }
}

/// One computed quantity in a result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct QuantityResult {
    pub quantity: Quantity,
    pub value: f64,
    pub err: f64,
    pub method: String,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    /// seconds
    pub wall_time: f64,
}

impl QuantityResult {
    pub fn from_estimate(quantity: Quantity, est: &Estimate, wall_time: f64) -> Self {
        QuantityResult {
            quantity,
            value: est.value,
            err: est.err,
            method: est.method.clone(),
            nodes: est.nodes_used,
            seed: est.seed,
            direction: None,
            wall_time,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub results: Vec<QuantityResult>,
}

/// Versioned output of every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<QuantityResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<crate::verify::PropertyReport>,
}

/// JSON Schemas for the configuration and result documents.
pub fn schemas() -> serde_json::Value {
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "run_config": schemars::schema_for!(RunConfig),
        "result_document": schemars::schema_for!(ResultDocument),
    })
}

impl ResultDocument {
    pub fn new(command: &str, config: Option<RunConfig>) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            results: Vec::new(),
            rows: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("invalid result document: {e}")))
    }

    /// Flat CSV with one line per quantity (and per sweep row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,axis_value,quantity,direction,value,err,method,nodes,wall_time\n");
        let mut line = |axis: &str, axis_value: String, r: &QuantityResult| {
            let direction = r
                .direction
                .as_ref()
                .map(|d| d.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            out.push_str(&format!(
                "{axis},{axis_value},{},{direction},{:e},{:e},\"{}\",{},{:.6}\n",
                r.quantity.name(),
                r.value,
                r.err,
                r.method.replace('"', "'"),
                r.nodes,
                r.wall_time
            ));
        };
        for r in &self.results {
            line("", String::new(), r);
        }
        for row in &self.rows {
            let axis = serde_json::to_value(row.axis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            for r in &row.results {
                line(&axis, format!("{}", row.value), r);
            }
        }
        out
    }
}
