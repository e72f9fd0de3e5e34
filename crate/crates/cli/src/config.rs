//! Experiment configuration: a TOML document, optional `--set` overrides, validation, and hashing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::RunError;

/// `[re, im]`
pub type Pt = [f64; 2];

const ORIGIN: Pt = [0.0, 0.0];

fn origin() -> Pt {
    ORIGIN
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Kernel,
    Verify,
    Adjoint,
    Recover,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Verify => "verify",
            Command::Adjoint => "adjoint",
            Command::Recover => "recover",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Subcommand used by `presets run`; ignored when a subcommand is given explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    pub source: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SpaceSpec>,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<CorrespondenceSpec>,
    pub grid: GridPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    pub tolerance: ToleranceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjoint: Option<AdjointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recover: Option<RecoverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksSpec>,
}

/// Domain, basis and quadrature of one side.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub domain: DomainSpec,
    pub basis: BasisSpec,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disc {
        #[serde(default = "origin")]
        center: Pt,
        radius: f64,
    },
    Annulus {
        #[serde(default = "origin")]
        center: Pt,
        r_inner: f64,
        r_outer: f64,
    },
    Generic {
        /// `[x_min, x_max, y_min, y_max]`
        bbox: [f64; 4],
        inequalities: Vec<InequalitySpec>,
        #[serde(default)]
        holes: Vec<Pt>,
    },
}

/// `Σ c x^i y^j` with `terms = [[i, j, c], ...]`, required to be positive or negative.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySpec {
    pub terms: Vec<[f64; 3]>,
    pub sign: reduced_bergman::geometry::Sign,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    Monomial {
        #[serde(default = "origin")]
        center: Pt,
        degree: u32,
        #[serde(default = "yes")]
        reduced: bool,
    },
    Laurent {
        #[serde(default = "origin")]
        center: Pt,
        n_min: i32,
        n_max: i32,
        #[serde(default = "yes")]
        reduced: bool,
    },
}

impl BasisSpec {
    pub fn reduced(&self) -> bool {
        match *self {
            BasisSpec::Monomial { reduced, .. } | BasisSpec::Laurent { reduced, .. } => reduced,
        }
    }
}

/// Polar rules use `n_radial × n_angular`; generic domains use an `n_grid × n_grid` midpoint grid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_angular: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    #[default]
    Constant,
    /// `|z − c|^{2α}`
    Power {
        alpha: f64,
        #[serde(default = "origin")]
        center: Pt,
    },
    /// `Σ a_k |z − c|^{2k}`
    RadialPoly {
        coeffs: Vec<f64>,
        #[serde(default = "origin")]
        center: Pt,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Power { m: u32 },
    Blaschke { zeros: Vec<Pt> },
    /// Ascending coefficients.
    Polynomial { coeffs: Vec<Pt> },
}

/// `Q(z, w) = Σ c z^i w^j` with `terms = [[i, j, re c, im c], ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceSpec {
    pub terms: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPair {
    pub z: GridSpec,
    /// Defaults to the `z` grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<GridSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `n × n` lattice on the square of half-width `radius`, clipped to the closed disc of that radius.
    Lattice {
        #[serde(default = "origin")]
        center: Pt,
        radius: f64,
        n: usize,
    },
    /// Radii evenly spaced in `[r_min, r_max]`, angles offset by half a step.
    Polar {
        #[serde(default = "origin")]
        center: Pt,
        r_min: f64,
        r_max: f64,
        n_radial: usize,
        n_angular: usize,
    },
    /// Area-uniform random points in the ring `r_min ≤ |z − c| ≤ r_max`, drawn from `seed`.
    Random {
        #[serde(default = "origin")]
        center: Pt,
        #[serde(default)]
        r_min: f64,
        r_max: f64,
        n: usize,
    },
    Points { points: Vec<Pt> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    /// `1 / (π (1 − z w̄)²)` on the unit disc.
    Disc,
    /// `(1/(1−x)² + α/(1−x)) / π` for the weight `|z|^{2α}` on the unit disc.
    DiscPowerWeight { alpha: f64 },
    /// Laurent norm series on a centred annulus, summed over `n_min..=n_max`
    /// (defaults to the basis range); `include_residue` adds the `n = −1` term.
    AnnulusSeries {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_min: Option<i32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max: Option<i32>,
        #[serde(default)]
        include_residue: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Gate: the run passes iff the gated residual is strictly below this.
    pub threshold: f64,
    #[serde(default = "default_drop_tol")]
    pub drop_tol: f64,
}

fn default_drop_tol() -> f64 {
    reduced_bergman::DEFAULT_DROP_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyKind {
    Proper,
    Correspondence,
    Weighted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub kind: VerifyKind,
    #[serde(default = "yes")]
    pub write_samples: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjointKind {
    /// `Γ₁`/`Γ₂` pairings plus the operator bound.
    Correspondence,
    /// `Λ₁`/`Λ₂` pairings with `ν ∘ f` and `ν`.
    Weighted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjointSpec {
    pub kind: AdjointKind,
    #[serde(default = "default_n_elements")]
    pub n_elements: usize,
    /// Relative slack allowed in `⟨Γ₂v, Γ₂v⟩ ≤ pq ⟨v, v⟩`.
    #[serde(default = "default_bound_slack")]
    pub bound_slack: f64,
}

fn default_n_elements() -> usize {
    5
}

fn default_bound_slack() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverSpec {
    #[serde(default = "origin")]
    pub probe: Pt,
    #[serde(default = "default_fallback")]
    pub fallback_probe: Pt,
    #[serde(default = "default_stencil")]
    pub stencil_radius: f64,
}

impl Default for RecoverSpec {
    fn default() -> Self {
        Self { probe: ORIGIN, fallback_probe: default_fallback(), stencil_radius: default_stencil() }
    }
}

fn default_fallback() -> Pt {
    [0.1, 0.0]
}

fn default_stencil() -> f64 {
    1e-4
}

/// Structural kernel checks run by `kernel`; each has its own gate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    #[serde(default = "default_symmetry_tol")]
    pub symmetry_tol: f64,
    #[serde(default = "default_reproduce_tol")]
    pub reproduce_tol: f64,
    /// Number of raw basis elements fed through the reproducing formula.
    #[serde(default = "default_reproduce_elements")]
    pub reproduce_elements: usize,
    #[serde(default = "default_self_reproduce_tol")]
    pub self_reproduce_tol: f64,
    /// Dirichlet pairing `f′(ξ) = ⟨f, M(·, ξ)⟩` for `f = z²`; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sakai_xi: Option<Pt>,
    #[serde(default = "default_sakai_tol")]
    pub sakai_tol: f64,
}

fn default_symmetry_tol() -> f64 {
    1e-12
}

fn default_reproduce_tol() -> f64 {
    1e-6
}

fn default_reproduce_elements() -> usize {
    10
}

fn default_self_reproduce_tol() -> f64 {
    1e-8
}

fn default_sakai_tol() -> f64 {
    1e-5
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, RunError> {
        let mut value: toml::Value = toml::from_str(text).map_err(|e| RunError::Config(format!("parse error: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| RunError::Config(e.message().trim().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Canonical TOML text; the hash and the config echo are taken from this.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 8 hex digits of the SHA-256 of the canonical text.
    pub fn hash8(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
    }

    pub fn target_spec(&self) -> &SpaceSpec {
        self.target.as_ref().unwrap_or(&self.source)
    }

    pub fn w_grid(&self) -> &GridSpec {
        self.grid.w.as_ref().unwrap_or(&self.grid.z)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |field: &str, msg: String| Err(RunError::Config(format!("{field}: {msg}")));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return bad("name", "must be non-empty and use only [A-Za-z0-9-_.]".into());
        }
        validate_space("source", &self.source)?;
        if let Some(t) = &self.target {
            validate_space("target", t)?;
        }
        let t = &self.tolerance;
        if !(t.threshold >= 0.0) || t.threshold.is_infinite() {
            return bad("tolerance.threshold", format!("must be a finite number >= 0, got {}", t.threshold));
        }
        if !(t.drop_tol > 0.0 && t.drop_tol < 1.0) {
            return bad("tolerance.drop_tol", format!("must lie in (0, 1), got {}", t.drop_tol));
        }
        validate_grid("grid.z", &self.grid.z)?;
        if let Some(w) = &self.grid.w {
            validate_grid("grid.w", w)?;
        }
        if let Some(c) = &self.correspondence {
            if c.terms.is_empty() {
                return bad("correspondence.terms", "must not be empty".into());
            }
            for term in &c.terms {
                if term[0] < 0.0 || term[1] < 0.0 || term[0].fract() != 0.0 || term[1].fract() != 0.0 {
                    return bad("correspondence.terms", format!("degrees must be non-negative integers, got {term:?}"));
                }
            }
        }
        let unit_weight = matches!(self.weight, WeightSpec::Constant);
        let corr_check = matches!(&self.verify, Some(v) if v.kind == VerifyKind::Correspondence)
            || matches!(&self.adjoint, Some(a) if a.kind == AdjointKind::Correspondence);
        if corr_check && !unit_weight {
            return bad("weight", "correspondence checks are unweighted; drop the [weight] section".into());
        }
        if let Some(v) = &self.verify {
            match v.kind {
                VerifyKind::Correspondence if self.correspondence.is_none() => {
                    return bad("verify.kind", "`correspondence` needs a [correspondence] section".into());
                }
                VerifyKind::Proper | VerifyKind::Weighted if self.map.is_none() => {
                    return bad("verify.kind", "proper and weighted checks need a [map] section".into());
                }
                VerifyKind::Proper if !matches!(self.weight, WeightSpec::Constant) => {
                    return bad("verify.kind", "`proper` uses unit weights; use `weighted` with a [weight]".into());
                }
                _ => {}
            }
        }
        if let Some(a) = &self.adjoint {
            if a.n_elements == 0 {
                return bad("adjoint.n_elements", "must be >= 1".into());
            }
            if !(a.bound_slack >= 0.0) {
                return bad("adjoint.bound_slack", "must be >= 0".into());
            }
            match a.kind {
                AdjointKind::Correspondence if self.correspondence.is_none() => {
                    return bad("adjoint.kind", "`correspondence` needs a [correspondence] section".into());
                }
                AdjointKind::Weighted if self.map.is_none() => {
                    return bad("adjoint.kind", "`weighted` needs a [map] section".into());
                }
                _ => {}
            }
        }
        if let Some(r) = &self.recover {
            if !(r.stencil_radius > 0.0) {
                return bad("recover.stencil_radius", "must be > 0".into());
            }
        }
        if let Some(c) = &self.checks {
            for (field, v) in [
                ("checks.symmetry_tol", c.symmetry_tol),
                ("checks.reproduce_tol", c.reproduce_tol),
                ("checks.self_reproduce_tol", c.self_reproduce_tol),
                ("checks.sakai_tol", c.sakai_tol),
            ] {
                if !(v > 0.0) {
                    return bad(field, format!("must be > 0, got {v}"));
                }
            }
        }
        match (&self.oracle, &self.source.domain) {
            (Some(OracleSpec::Disc | OracleSpec::DiscPowerWeight { .. }), DomainSpec::Disc { center, radius })
                if *center == ORIGIN && *radius == 1.0 => {}
            (Some(OracleSpec::Disc | OracleSpec::DiscPowerWeight { .. }), _) => {
                return bad("oracle.type", "disc oracles need source.domain = unit disc centred at 0".into());
            }
            (Some(OracleSpec::AnnulusSeries { .. }), DomainSpec::Annulus { center, .. }) if *center == ORIGIN => {}
            (Some(OracleSpec::AnnulusSeries { .. }), _) => {
                return bad("oracle.type", "annulus_series needs source.domain = annulus centred at 0".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Errors unless the section needed by `command` is present.
    pub fn require(&self, command: Command) -> Result<(), RunError> {
        let missing = |s: &str| Err(RunError::Config(format!("{s}: section required by `{}`", command.as_str())));
        match command {
            Command::Kernel => Ok(()),
            Command::Verify if self.verify.is_none() => missing("verify"),
            Command::Adjoint if self.adjoint.is_none() => missing("adjoint"),
            Command::Recover if self.map.is_none() => missing("map"),
            _ => Ok(()),
        }
    }
}

fn validate_space(side: &str, s: &SpaceSpec) -> Result<(), RunError> {
    let bad = |field: &str, msg: String| Err(RunError::Config(format!("{side}.{field}: {msg}")));
    match &s.domain {
        DomainSpec::Disc { radius, .. } if !(*radius > 0.0) => return bad("domain.radius", "must be > 0".into()),
        DomainSpec::Annulus { r_inner, r_outer, .. } if !(*r_inner > 0.0 && r_outer > r_inner) => {
            return bad("domain", format!("need 0 < r_inner < r_outer, got {r_inner}, {r_outer}"));
        }
        DomainSpec::Generic { inequalities, .. } if inequalities.is_empty() => {
            return bad("domain.inequalities", "must not be empty".into());
        }
        _ => {}
    }
    match &s.basis {
        BasisSpec::Laurent { .. } if !matches!(s.domain, DomainSpec::Annulus { .. }) => {
            return bad("basis.type", "a laurent basis is only valid on an annulus domain".into());
        }
        BasisSpec::Laurent { n_min, n_max, .. } if n_min > n_max => {
            return bad("basis", format!("n_min ({n_min}) exceeds n_max ({n_max})"));
        }
        _ => {}
    }
    let q = &s.quadrature;
    match s.domain {
        DomainSpec::Generic { .. } => match q.n_grid {
            Some(n) if n >= 8 => {}
            _ => return bad("quadrature.n_grid", "generic domains need n_grid >= 8".into()),
        },
        _ => match (q.n_radial, q.n_angular) {
            (Some(r), Some(a)) if r >= 1 && a >= 1 => {}
            _ => return bad("quadrature", "discs and annuli need n_radial >= 1 and n_angular >= 1".into()),
        },
    }
    Ok(())
}

fn validate_grid(field: &str, g: &GridSpec) -> Result<(), RunError> {
    let ok = match g {
        GridSpec::Lattice { radius, n, .. } => *radius > 0.0 && *n >= 1,
        GridSpec::Polar { r_min, r_max, n_radial, n_angular, .. } => {
            *r_min >= 0.0 && r_max >= r_min && *n_radial >= 1 && *n_angular >= 1
        }
        GridSpec::Random { r_min, r_max, n, .. } => *r_min >= 0.0 && r_max > r_min && *n >= 1,
        GridSpec::Points { points } => !points.is_empty(),
    };
    if ok {
        Ok(())
    } else {
        Err(RunError::Config(format!("{field}: empty or inconsistent grid {g:?}")))
    }
}

/// Applies `a.b.c=value`; the value is read as a TOML literal, falling back to a bare string.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), RunError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| RunError::Config(format!("--set expects key=value, got `{spec}`")))?;
    let key = key.trim();
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(RunError::Config(format!("--set: bad key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| RunError::Config(format!("--set {key}: `{part}` is not inside a table")))?;
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| RunError::Config(format!("--set {key}: parent is not a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
