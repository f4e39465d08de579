//! Scenario files: a versioned TOML description of a distribution, a mesh
//! (explicit or a refined graph family), query points and check settings.
//! The grammar is documented in `docs/scenario-format.md`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::currents::{CurrentError, PolyhedralCurrent};
use crate::density::{RadiusSchedule, DEFAULT_DEPTH, DEFAULT_REL_TOL};
use crate::exterior::MultiIndex;
use crate::forms::{DifferentialForm, Distribution, FormError};
use crate::poly::PolyExpr;
use crate::scalar::{rational_from_f64, Rational, Scalar};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported scenario version {0} (expected {SCENARIO_VERSION})")]
    Version(u32),
    #[error("{block} required for checks {{{checks}}}")]
    MissingBlock { block: &'static str, checks: String },
    #[error("grade mismatch: {0}")]
    Grade(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Current(#[from] CurrentError),
}

/// The verification checks a scenario can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Frobenius,
    Density,
    Tangency,
    InvolutiveSet,
    Refinement,
    Stokes,
    MonteCarlo,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Frobenius,
        CheckKind::Density,
        CheckKind::Tangency,
        CheckKind::InvolutiveSet,
        CheckKind::Refinement,
        CheckKind::Stokes,
        CheckKind::MonteCarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Frobenius => "frobenius",
            CheckKind::Density => "density",
            CheckKind::Tangency => "tangency",
            CheckKind::InvolutiveSet => "involutive-set",
            CheckKind::Refinement => "refinement",
            CheckKind::Stokes => "stokes",
            CheckKind::MonteCarlo => "montecarlo",
        }
    }

    pub fn parse(name: &str) -> Result<Self, ScenarioError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| ScenarioError::UnknownCheck(name.to_string()))
    }

    pub fn needs_mesh(self) -> bool {
        self != CheckKind::Frobenius
    }

    pub fn needs_distribution(self) -> bool {
        matches!(
            self,
            CheckKind::Frobenius | CheckKind::Tangency | CheckKind::InvolutiveSet
        )
    }

    pub fn needs_points(self) -> bool {
        !matches!(self, CheckKind::Frobenius | CheckKind::Stokes)
    }
}

/// A number given as a TOML integer, float, or exact rational string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RawNumber {
    fn exact(&self) -> Result<Rational, ScenarioError> {
        match self {
            RawNumber::Int(v) => Ok(Rational::from_i64(*v)),
            RawNumber::Float(v) => rational_from_f64(*v)
                .ok_or_else(|| ScenarioError::Invalid(format!("non-finite number {v}"))),
            RawNumber::Text(s) => PolyExpr::parse(s, 0)
                .map_err(|e| ScenarioError::Invalid(format!("bad number '{s}': {e}")))?
                .as_constant()
                .ok_or_else(|| ScenarioError::Invalid(format!("bad number '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    dx: Vec<usize>,
    coeff: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    name: Option<String>,
    n: usize,
    k: usize,
    #[serde(default)]
    checks: Vec<String>,
    #[serde(default)]
    points: Vec<Vec<RawNumber>>,
    s: Option<f64>,
    h: Option<f64>,
    #[serde(default)]
    seed: u64,
    distribution: Option<RawDistribution>,
    mesh: Option<RawMesh>,
    schedule: Option<RawSchedule>,
    #[serde(default)]
    tolerances: RawTolerances,
    frobenius: Option<RawFrobenius>,
    density: Option<RawDensity>,
    refinement: Option<RawRefinement>,
    stokes: Option<RawStokes>,
    montecarlo: Option<RawMonteCarlo>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    forms: Vec<Vec<RawTerm>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    vertices: Option<Vec<Vec<RawNumber>>>,
    simplices: Option<Vec<RawSimplex>>,
    graph: Option<RawGraph>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimplex {
    v: Vec<usize>,
    m: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    heights: Vec<String>,
    lower: Vec<RawNumber>,
    upper: Vec<RawNumber>,
    refine: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    r0: f64,
    factor: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    tangency: Option<f64>,
    involutivity: Option<f64>,
    density_band: Option<f64>,
    ball: Option<f64>,
    depth: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrobenius {
    lower: Vec<f64>,
    upper: Vec<f64>,
    count: usize,
    expect: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    expect: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRefinement {
    form: Vec<RawTerm>,
    decay: Option<f64>,
    driver_limit: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStokes {
    forms: Vec<Vec<RawTerm>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    samples: Option<usize>,
    radii: Option<usize>,
}

/// Tolerances shared by the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Threshold on the tangency defect defining `Γ_tol`.
    pub tangency: f64,
    /// Threshold on the involutivity defect.
    pub involutivity: f64,
    /// Allowed relative gap between the lower and upper density estimates.
    pub density_band: f64,
    /// Relative ball-mass interval width, as a fraction of `(2r)ᵏ`.
    pub ball: f64,
    /// Ball-mass subdivision depth.
    pub depth: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tangency: 1e-6,
            involutivity: 1e-9,
            density_band: 0.02,
            ball: DEFAULT_REL_TOL,
            depth: DEFAULT_DEPTH,
        }
    }
}

/// Expected Frobenius outcome over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrobeniusExpectation {
    Involutive,
    NonInvolutive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusParams {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub count: usize,
    pub expect: Option<FrobeniusExpectation>,
}

#[derive(Debug, Clone)]
pub struct RefinementParams {
    pub form: DifferentialForm,
    /// Required ratio of final to initial left-hand side.
    pub decay: f64,
    /// Drivers at the finest level must fall below this.
    pub driver_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloParams {
    pub samples: usize,
    /// Number of leading schedule radii to test.
    pub radii: usize,
}

/// One mesh of a (possibly single-member) refinement family.
#[derive(Debug, Clone)]
pub struct MeshLevel {
    pub label: String,
    pub mesh_size: Option<f64>,
    pub current: PolyhedralCurrent,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub checks: Vec<CheckKind>,
    pub distribution: Option<Distribution>,
    pub levels: Vec<MeshLevel>,
    pub points: Vec<Vec<Rational>>,
    pub schedule: RadiusSchedule,
    pub s: f64,
    pub h: f64,
    pub tolerances: Tolerances,
    pub frobenius: Option<FrobeniusParams>,
    pub density_expect: Option<[f64; 2]>,
    pub refinement: Option<RefinementParams>,
    pub stokes_forms: Vec<DifferentialForm>,
    pub montecarlo: MonteCarloParams,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let fallback = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&text, &fallback)
    }

    /// Parses scenario text; `fallback_name` is used when the file has no
    /// `name` key.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::build(raw, fallback_name)
    }

    pub fn points_f64(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.iter().map(Scalar::to_f64).collect())
            .collect()
    }

    /// Restricts the run to the given checks, validating their
    /// requirements against the scenario's blocks.
    pub fn select_checks(&mut self, checks: Vec<CheckKind>) -> Result<(), ScenarioError> {
        self.checks = checks;
        self.validate_requirements(self.levels.is_empty(), self.distribution.is_none())
    }

    fn build(raw: RawScenario, fallback_name: &str) -> Result<Self, ScenarioError> {
        if raw.version != SCENARIO_VERSION {
            return Err(ScenarioError::Version(raw.version));
        }
        let (n, k) = (raw.n, raw.k);
        if n == 0 || k > n {
            return Err(ScenarioError::Invalid(format!(
                "need 1 ≤ n and k ≤ n, got n = {n}, k = {k}"
            )));
        }
        let mut seen = BTreeSet::new();
        let mut checks = Vec::new();
        for name in &raw.checks {
            let c = CheckKind::parse(name)?;
            if seen.insert(c) {
                checks.push(c);
            }
        }

        let distribution = match &raw.distribution {
            None => None,
            Some(d) => {
                if d.forms.len() != n - k {
                    return Err(ScenarioError::Grade(format!(
                        "a {k}-distribution in R^{n} needs {} defining forms, got {}",
                        n - k,
                        d.forms.len()
                    )));
                }
                let forms = d
                    .forms
                    .iter()
                    .map(|f| build_form(n, Some(1), f))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Distribution::new(n, k, forms)?)
            }
        };

        let mut heights = None;
        let levels = match &raw.mesh {
            None => Vec::new(),
            Some(m) => match (&m.vertices, &m.simplices, &m.graph) {
                (Some(vs), Some(ss), None) => vec![explicit_mesh(n, k, vs, ss)?],
                (None, None, Some(g)) => {
                    let (levels, hs) = graph_family(n, k, g)?;
                    heights = Some(hs);
                    levels
                }
                _ => {
                    return Err(ScenarioError::Invalid(
                        "mesh needs either `vertices` and `simplices`, or a `graph` table".into(),
                    ))
                }
            },
        };

        let mut points = Vec::with_capacity(raw.points.len());
        for (i, p) in raw.points.iter().enumerate() {
            let exact = p
                .iter()
                .map(RawNumber::exact)
                .collect::<Result<Vec<_>, _>>()?;
            let lifted = match (&heights, exact.len()) {
                (_, len) if len == n => exact,
                (Some(hs), len) if len == k => {
                    let mut full = exact.clone();
                    for h in hs {
                        full.push(h.eval(&exact).expect("arity checked"));
                    }
                    full
                }
                (_, len) => {
                    return Err(ScenarioError::Invalid(format!(
                        "point {i} has {len} coordinates, expected {n}"
                    )))
                }
            };
            points.push(lifted);
        }

        let schedule = match &raw.schedule {
            None => RadiusSchedule::default(),
            Some(s) => RadiusSchedule::new(s.r0, s.factor.unwrap_or(0.5), s.count.unwrap_or(12))
                .map_err(|e| ScenarioError::Invalid(e.to_string()))?,
        };

        let defaults = Tolerances::default();
        let t = &raw.tolerances;
        let tolerances = Tolerances {
            tangency: t.tangency.unwrap_or(defaults.tangency),
            involutivity: t.involutivity.unwrap_or(defaults.involutivity),
            density_band: t.density_band.unwrap_or(defaults.density_band),
            ball: t.ball.unwrap_or(defaults.ball),
            depth: t.depth.unwrap_or(defaults.depth),
        };
        for (name, v) in [
            ("tangency", tolerances.tangency),
            ("involutivity", tolerances.involutivity),
            ("density_band", tolerances.density_band),
            ("ball", tolerances.ball),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::Invalid(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }

        let frobenius = match &raw.frobenius {
            None => None,
            Some(f) => {
                if f.lower.len() != n || f.upper.len() != n || f.count == 0 {
                    return Err(ScenarioError::Invalid(format!(
                        "frobenius grid needs {n} lower and upper bounds and a positive count"
                    )));
                }
                let expect = match f.expect.as_deref() {
                    None => None,
                    Some("involutive") => Some(FrobeniusExpectation::Involutive),
                    Some("non-involutive") => Some(FrobeniusExpectation::NonInvolutive),
                    Some(other) => {
                        return Err(ScenarioError::Invalid(format!(
                        "frobenius expect must be 'involutive' or 'non-involutive', got '{other}'"
                    )))
                    }
                };
                Some(FrobeniusParams {
                    lower: f.lower.clone(),
                    upper: f.upper.clone(),
                    count: f.count,
                    expect,
                })
            }
        };

        let refinement = match &raw.refinement {
            None => None,
            Some(t) => {
                let form = build_form(n, None, &t.form)?;
                if form.grade() == 0 || form.grade() + 1 > k {
                    return Err(ScenarioError::Grade(format!(
                        "refinement form must have grade between 1 and k − 1 = {}, got {}",
                        k.saturating_sub(1),
                        form.grade()
                    )));
                }
                Some(RefinementParams {
                    form,
                    decay: t.decay.unwrap_or(0.1),
                    driver_limit: t.driver_limit.unwrap_or(0.05),
                })
            }
        };

        let stokes_forms = match &raw.stokes {
            Some(s) => s
                .forms
                .iter()
                .map(|f| {
                    let form = build_form(n, None, f)?;
                    if form.grade() + 1 != k {
                        return Err(ScenarioError::Grade(format!(
                            "stokes forms must have grade k − 1 = {}, got {}",
                            k.saturating_sub(1),
                            form.grade()
                        )));
                    }
                    Ok(form)
                })
                .collect::<Result<Vec<_>, _>>()?,
            None if k >= 1 => default_stokes_forms(n, k),
            None => Vec::new(),
        };

        let montecarlo = MonteCarloParams {
            samples: raw
                .montecarlo
                .as_ref()
                .and_then(|m| m.samples)
                .unwrap_or(200_000),
            radii: raw.montecarlo.as_ref().and_then(|m| m.radii).unwrap_or(3),
        };

        let scenario = Self {
            name: raw
                .name
                .clone()
                .unwrap_or_else(|| fallback_name.to_string()),
            n,
            k,
            seed: raw.seed,
            checks,
            distribution,
            levels,
            points,
            schedule,
            s: raw.s.unwrap_or(k as f64),
            h: raw.h.unwrap_or(1.0),
            tolerances,
            frobenius,
            density_expect: raw.density.as_ref().and_then(|d| d.expect),
            refinement,
            stokes_forms,
            montecarlo,
        };
        scenario
            .validate_requirements(scenario.levels.is_empty(), scenario.distribution.is_none())?;
        Ok(scenario)
    }

    fn validate_requirements(
        &self,
        no_mesh: bool,
        no_distribution: bool,
    ) -> Result<(), ScenarioError> {
        let names = |pred: fn(CheckKind) -> bool| -> Vec<&'static str> {
            self.checks
                .iter()
                .copied()
                .filter(|c| pred(*c))
                .map(CheckKind::name)
                .collect()
        };
        let mesh_checks = names(CheckKind::needs_mesh);
        if no_mesh && !mesh_checks.is_empty() {
            return Err(ScenarioError::MissingBlock {
                block: "mesh",
                checks: mesh_checks.join(", "),
            });
        }
        let dist_checks = names(CheckKind::needs_distribution);
        if no_distribution && !dist_checks.is_empty() {
            return Err(ScenarioError::MissingBlock {
                block: "distribution",
                checks: dist_checks.join(", "),
            });
        }
        if self.checks.contains(&CheckKind::Frobenius) && self.frobenius.is_none() {
            return Err(ScenarioError::MissingBlock {
                block: "frobenius",
                checks: "frobenius".into(),
            });
        }
        if self.checks.contains(&CheckKind::Refinement) && self.refinement.is_none() {
            return Err(ScenarioError::MissingBlock {
                block: "refinement",
                checks: "refinement".into(),
            });
        }
        let point_checks = names(CheckKind::needs_points);
        if self.points.is_empty() && !point_checks.is_empty() {
            return Err(ScenarioError::MissingBlock {
                block: "points",
                checks: point_checks.join(", "),
            });
        }
        Ok(())
    }
}

fn build_form(
    n: usize,
    grade: Option<usize>,
    terms: &[RawTerm],
) -> Result<DifferentialForm, ScenarioError> {
    let grade = match grade {
        Some(g) => g,
        None => terms
            .first()
            .map(|t| t.dx.len())
            .ok_or_else(|| ScenarioError::Invalid("form has no terms".into()))?,
    };
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        if t.dx.len() != grade {
            return Err(ScenarioError::Grade(format!(
                "term dx{:?} has grade {}, expected {grade}",
                t.dx,
                t.dx.len()
            )));
        }
        let index =
            MultiIndex::new(t.dx.clone(), n).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let coeff = PolyExpr::parse(&t.coeff, n)
            .map_err(|e| ScenarioError::Invalid(format!("'{}': {e}", t.coeff)))?;
        parsed.push((index, coeff));
    }
    DifferentialForm::from_terms(n, grade, parsed).map_err(ScenarioError::from)
}

fn explicit_mesh(
    n: usize,
    k: usize,
    vs: &[Vec<RawNumber>],
    ss: &[RawSimplex],
) -> Result<MeshLevel, ScenarioError> {
    let mut vertices = Vec::with_capacity(vs.len());
    for (i, v) in vs.iter().enumerate() {
        if v.len() != n {
            return Err(ScenarioError::Invalid(format!(
                "vertex {i} has {} coordinates, expected {n}",
                v.len()
            )));
        }
        vertices.push(
            v.iter()
                .map(RawNumber::exact)
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let mut cells = Vec::with_capacity(ss.len());
    for (i, s) in ss.iter().enumerate() {
        if s.v.len() != k + 1 {
            return Err(ScenarioError::Grade(format!(
                "scenario k = {k} but simplex {i} has {} vertices (grade {})",
                s.v.len(),
                s.v.len().saturating_sub(1)
            )));
        }
        if let Some(&bad) = s.v.iter().find(|&&j| j >= vertices.len()) {
            return Err(ScenarioError::Invalid(format!(
                "simplex {i} references vertex {bad}, but only {} vertices exist",
                vertices.len()
            )));
        }
        let m = s.m.unwrap_or(1);
        if m == 0 {
            return Err(ScenarioError::Invalid(format!(
                "simplex {i} has multiplicity 0"
            )));
        }
        cells.push((s.v.clone(), m));
    }
    let current = PolyhedralCurrent::from_mesh(n, k, &vertices, &cells)?;
    Ok(MeshLevel {
        label: "mesh".into(),
        mesh_size: None,
        current,
    })
}

/// Graph of `(x_{k+1}, …, x_n) = heights(x_1, …, x_k)` over a box, with a
/// Kuhn triangulation at each refinement.
fn graph_family(
    n: usize,
    k: usize,
    g: &RawGraph,
) -> Result<(Vec<MeshLevel>, Vec<PolyExpr>), ScenarioError> {
    if k == 0 {
        return Err(ScenarioError::Invalid("graph meshes need k ≥ 1".into()));
    }
    if g.heights.len() != n - k {
        return Err(ScenarioError::Invalid(format!(
            "graph needs {} height functions, got {}",
            n - k,
            g.heights.len()
        )));
    }
    if g.lower.len() != k || g.upper.len() != k {
        return Err(ScenarioError::Invalid(format!(
            "graph box needs {k} lower and upper bounds"
        )));
    }
    if g.refine.is_empty() || g.refine.contains(&0) {
        return Err(ScenarioError::Invalid(
            "graph refine must list positive subdivision counts".into(),
        ));
    }
    let heights = g
        .heights
        .iter()
        .map(|h| {
            PolyExpr::parse(h, k).map_err(|e| ScenarioError::Invalid(format!("height '{h}': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lower = g
        .lower
        .iter()
        .map(RawNumber::exact)
        .collect::<Result<Vec<_>, _>>()?;
    let upper = g
        .upper
        .iter()
        .map(RawNumber::exact)
        .collect::<Result<Vec<_>, _>>()?;
    if lower.iter().zip(&upper).any(|(a, b)| a >= b) {
        return Err(ScenarioError::Invalid(
            "graph box needs lower < upper on every axis".into(),
        ));
    }
    let widest = lower
        .iter()
        .zip(&upper)
        .map(|(a, b)| (b - a).to_f64())
        .fold(0.0, f64::max);
    let mut levels = Vec::with_capacity(g.refine.len());
    for &m in &g.refine {
        let current = kuhn_graph(n, k, &heights, &lower, &upper, m)?;
        levels.push(MeshLevel {
            label: format!("N={m}"),
            mesh_size: Some(widest / m as f64),
            current,
        });
    }
    Ok((levels, heights))
}

fn kuhn_graph(
    n: usize,
    k: usize,
    heights: &[PolyExpr],
    lower: &[Rational],
    upper: &[Rational],
    m: usize,
) -> Result<PolyhedralCurrent, ScenarioError> {
    let side = m + 1;
    let total = side.pow(k as u32);
    let steps: Vec<Rational> = lower
        .iter()
        .zip(upper)
        .map(|(a, b)| (b - a) / Rational::from_i64(m as i64))
        .collect();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; k];
        for slot in d.iter_mut() {
            *slot = idx % side;
            idx /= side;
        }
        d
    };
    let mut vertices = Vec::with_capacity(total);
    for idx in 0..total {
        let d = digits(idx);
        let u: Vec<Rational> = (0..k)
            .map(|i| &lower[i] + &steps[i] * Rational::from_i64(d[i] as i64))
            .collect();
        let mut x = u.clone();
        for h in heights {
            x.push(h.eval(&u).expect("arity k"));
        }
        debug_assert_eq!(x.len(), n);
        vertices.push(x);
    }
    let index = |d: &[usize]| d.iter().rev().fold(0, |acc, &v| acc * side + v);
    let perms: Vec<Vec<usize>> = itertools::Itertools::permutations(0..k, k).collect();
    let mut cells = Vec::new();
    for cube in 0..m.pow(k as u32) {
        let mut corner = vec![0; k];
        let mut c = cube;
        for slot in corner.iter_mut() {
            *slot = c % m;
            c /= m;
        }
        for p in &perms {
            let mut d = corner.clone();
            let mut ids = vec![index(&d)];
            for &axis in p {
                d[axis] += 1;
                ids.push(index(&d));
            }
            if permutation_sign(p) < 0 {
                ids.swap(0, 1);
            }
            cells.push((ids, 1));
        }
    }
    Ok(PolyhedralCurrent::from_mesh(n, k, &vertices, &cells)?)
}

fn permutation_sign(p: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `x_i x_j dx_J`-style test forms of grade `k − 1`, one per multi-index,
/// mixing degrees 1 to 3.
fn default_stokes_forms(n: usize, k: usize) -> Vec<DifferentialForm> {
    MultiIndex::all(n, k - 1)
        .enumerate()
        .map(|(t, index)| {
            let a = t % n + 1;
            let b = (t + 1) % n + 1;
            let text = format!("x{a}^2*x{b} - 3*x{b} + 1/2*x{a}*x{b}^2 + 2");
            let coeff = PolyExpr::parse(&text, n).expect("generated polynomial parses");
            DifferentialForm::from_terms(n, k - 1, [(index, coeff)]).expect("valid term")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTACT: &str = r#"
version = 1
name = "contact-plane"
n = 3
k = 2
checks = ["frobenius", "involutive-set"]
points = [[0, 0, 0], ["1/2", 0, 0]]

[distribution]
forms = [[{ dx = [3], coeff = "1" }, { dx = [1], coeff = "-x2" }]]

[mesh]
vertices = [[-1, -1, 0], [1, -1, 0], [1, 1, 0], [-1, 1, 0]]
simplices = [{ v = [0, 1, 2] }, { v = [0, 2, 3], m = 1 }]

[frobenius]
lower = [-1, -1, -1]
upper = [1, 1, 1]
count = 3
"#;

    #[test]
    fn contact_round_trip() {
        let s = Scenario::parse(CONTACT, "x").unwrap();
        assert_eq!((s.name.as_str(), s.n, s.k), ("contact-plane", 3, 2));
        let d = s.distribution.as_ref().unwrap();
        assert_eq!(
            d.defining_forms()[0]
                .coeff(&MultiIndex::single(1))
                .to_string(),
            "-x2"
        );
        assert_eq!(s.levels.len(), 1);
        assert_eq!(s.levels[0].current.simplices().len(), 2);
        assert_eq!(s.points_f64()[1], vec![0.5, 0.0, 0.0]);
        assert_eq!(
            s.checks,
            vec![CheckKind::Frobenius, CheckKind::InvolutiveSet]
        );
    }

    #[test]
    fn missing_mesh_names_the_checks() {
        let text = CONTACT.replace(
            "[\"frobenius\", \"involutive-set\"]",
            "[\"stokes\", \"involutive-set\"]",
        );
        let cut = text.find("[mesh]").unwrap();
        let end = text.find("[frobenius]").unwrap();
        let text = format!("{}{}", &text[..cut], &text[end..]);
        let err = Scenario::parse(&text, "x").unwrap_err();
        assert_eq!(
            err.to_string(),
            "mesh required for checks {stokes, involutive-set}"
        );
    }

    #[test]
    fn grade_mismatch_is_rejected() {
        let text = CONTACT.replace("k = 2", "k = 3").replace(
            "forms = [[{ dx = [3], coeff = \"1\" }, { dx = [1], coeff = \"-x2\" }]]",
            "forms = []",
        );
        assert!(matches!(
            Scenario::parse(&text, "x").unwrap_err(),
            ScenarioError::Grade(_)
        ));
    }

    #[test]
    fn parse_errors_carry_a_location() {
        let err = Scenario::parse("version = 1\nn = 3\nk = \n", "x").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn bad_vertex_index() {
        let text = CONTACT.replace("{ v = [0, 2, 3], m = 1 }", "{ v = [0, 2, 7] }");
        assert!(Scenario::parse(&text, "x")
            .unwrap_err()
            .to_string()
            .contains("vertex 7"));
    }

    #[test]
    fn graph_family_is_coherent_and_lifts_points() {
        let text = r#"
version = 1
n = 3
k = 2
points = [["1/2", "1/2"]]
[mesh.graph]
heights = ["x1*x2"]
lower = [0, 0]
upper = [1, 1]
refine = [1, 3]
"#;
        let s = Scenario::parse(text, "graph").unwrap();
        assert_eq!(s.points_f64()[0], vec![0.5, 0.5, 0.25]);
        for level in &s.levels {
            // coherent orientation: interior edges cancel, leaving 4·N boundary edges
            let m: usize = level.label[2..].parse().unwrap();
            assert_eq!(level.current.boundary().unwrap().simplices().len(), 4 * m);
            // projected area is exactly 1
            let flux =
                crate::currents::flux(&level.current, &MultiIndex::new(vec![1, 2], 3).unwrap())
                    .unwrap();
            assert_eq!(flux, Rational::from_i64(1));
        }
    }
}
