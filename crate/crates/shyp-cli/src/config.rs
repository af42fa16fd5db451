use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Schottky {
        #[serde(default = "two")]
        rank: usize,
        #[serde(default = "cosh")]
        cosh: f64,
    },
    Cyclic {
        #[serde(default = "two_f")]
        multiplier: f64,
    },
    Covered {
        #[serde(default = "two_f")]
        multiplier: f64,
        #[serde(default = "three")]
        degree: usize,
    },
    FreeBoundary {
        #[serde(default = "two")]
        rank: usize,
        #[serde(default = "two_f")]
        a: f64,
    },
    Zn {
        #[serde(default = "diagonals")]
        diagonals: Vec<Vec<f64>>,
    },
    Product {
        #[serde(default = "two_f")]
        first: f64,
        #[serde(default = "three_f")]
        second: f64,
        #[serde(default)]
        swap: bool,
    },
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Schottky { rank: 2, cosh: cosh() }
    }
}

fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn two_f() -> f64 {
    2.0
}
fn three_f() -> f64 {
    3.0
}
fn cosh() -> f64 {
    1.6
}
fn diagonals() -> Vec<Vec<f64>> {
    vec![vec![9.0, 1.0, 3.0], vec![9.0, 3.0, 1.0]]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Jitter {
        #[serde(default = "small")]
        magnitude: f64,
        #[serde(default = "seed")]
        seed: u64,
    },
    Bump {
        #[serde(default = "one")]
        center: f64,
        #[serde(default = "half")]
        width: f64,
        #[serde(default = "small")]
        height: f64,
    },
    Translate {
        #[serde(default = "translate")]
        t: f64,
    },
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec::Jitter { magnitude: small(), seed: seed() }
    }
}

fn small() -> f64 {
    1e-7
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn translate() -> f64 {
    1e-4
}
fn seed() -> u64 {
    7
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    /// Λ-net points used by the checks; the full net is used when it is smaller.
    pub points: usize,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { points: 200, seed: seed() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CodesConfig {
    pub depth: usize,
    pub cap: usize,
    /// Net points for which codes are enumerated.
    pub points: usize,
}

impl Default for CodesConfig {
    fn default() -> Self {
        CodesConfig { depth: 20, cap: 200, points: 10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    pub points: usize,
    pub depth: usize,
    pub n_max: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig { points: 20, depth: 12, n_max: 4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Stopping diameter for φ.
    pub tol: f64,
    pub max_depth: usize,
    pub residual: f64,
    /// Points of the K-net on which d_Lip,K is sampled.
    pub k_net: usize,
    pub prefix_depth: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: 1e-9, max_depth: 200, residual: 1e-6, k_net: 40, prefix_depth: 20 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub system: SystemSpec,
    /// Defaults to `a` for free boundaries and 1.5 otherwise.
    pub lambda: Option<f64>,
    pub net: NetConfig,
    pub codes: CodesConfig,
    pub certificate: CertificateConfig,
    pub perturbation: PerturbationSpec,
    pub tolerances: Tolerances,
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            system: SystemSpec::default(),
            lambda: None,
            net: NetConfig::default(),
            codes: CodesConfig::default(),
            certificate: CertificateConfig::default(),
            perturbation: PerturbationSpec::default(),
            tolerances: Tolerances::default(),
            out: "out".into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub cap: Option<usize>,
    pub tol: Option<f64>,
}

fn field(name: &str, message: impl Into<String>) -> CliError {
    CliError::Field { field: name.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Schema { line: e.line(), column: e.column(), message: e.to_string() })
    }

    /// Applies flags, fills every default and validates.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self, CliError> {
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(s) = o.seed {
            self.net.seed = s;
            if let PerturbationSpec::Jitter { seed, .. } = &mut self.perturbation {
                *seed = s;
            }
        }
        if let Some(d) = o.depth {
            self.codes.depth = d;
        }
        if let Some(c) = o.cap {
            self.codes.cap = c;
        }
        if let Some(t) = o.tol {
            self.tolerances.tol = t;
        }
        if self.lambda.is_none() {
            self.lambda = Some(match self.system {
                SystemSpec::FreeBoundary { a, .. } => a,
                _ => 1.5,
            });
        }
        self.validate()?;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(1.5)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        let lambda = self.lambda();
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(field("lambda", format!("must be a finite number > 1, got {lambda}")));
        }
        match &self.system {
            SystemSpec::Schottky { rank, cosh } => {
                if *rank < 1 {
                    return Err(field("system.rank", "must be at least 1"));
                }
                if !(*cosh > 1.0) {
                    return Err(field("system.cosh", "must be > 1"));
                }
            }
            SystemSpec::Cyclic { multiplier } => positive_multiplier("system.multiplier", *multiplier)?,
            SystemSpec::Covered { multiplier, degree } => {
                positive_multiplier("system.multiplier", *multiplier)?;
                if *degree < 2 {
                    return Err(field("system.degree", "must be at least 2"));
                }
            }
            SystemSpec::FreeBoundary { rank, a } => {
                if *rank < 2 {
                    return Err(field("system.rank", "must be at least 2"));
                }
                if !(*a > 1.0 && *a <= 2.0) {
                    return Err(field("system.a", format!("must lie in (1, 2], got {a}")));
                }
            }
            SystemSpec::Zn { diagonals } => {
                let n = diagonals.first().map_or(0, Vec::len);
                if diagonals.is_empty() || n < 2 || diagonals.iter().any(|d| d.len() != n) {
                    return Err(field("system.diagonals", "need one or more rows of equal length ≥ 2"));
                }
            }
            SystemSpec::Product { first, second, .. } => {
                positive_multiplier("system.first", *first)?;
                positive_multiplier("system.second", *second)?;
            }
        }
        if self.net.points < 2 {
            return Err(field("net.points", "must be at least 2"));
        }
        if self.codes.depth == 0 || self.codes.cap == 0 || self.codes.points == 0 {
            return Err(field("codes", "depth, cap and points must be positive"));
        }
        if self.certificate.points == 0 || self.certificate.depth == 0 || self.certificate.n_max == 0 {
            return Err(field("certificate", "points, depth and n_max must be positive"));
        }
        let t = &self.tolerances;
        if !(t.tol > 0.0) || !(t.residual > 0.0) {
            return Err(field("tolerances", "tol and residual must be positive"));
        }
        if t.k_net < 2 || t.prefix_depth == 0 || t.max_depth == 0 {
            return Err(field("tolerances", "k_net must be at least 2; max_depth and prefix_depth positive"));
        }
        match &self.perturbation {
            PerturbationSpec::Jitter { magnitude, .. } if !(*magnitude >= 0.0) => {
                Err(field("perturbation.magnitude", "must be ≥ 0"))
            }
            PerturbationSpec::Bump { width, .. } if !(*width > 0.0) => Err(field("perturbation.width", "must be > 0")),
            _ => Ok(()),
        }
    }
}

fn positive_multiplier(name: &str, m: f64) -> Result<(), CliError> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be > 1, got {m}")))
    }
}
