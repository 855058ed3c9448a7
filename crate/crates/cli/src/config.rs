//! Experiment configurations: one versioned JSON format, typed per kind.

use std::path::{Path, PathBuf};

use kazhdan_core::covers::{
    abelian_tower, abelian_weight_cover_spec, cyclic_cover_spec, cyclic_tower, homology_cover_spec,
    homology_tower, CoverLimits, CoverSpec, FiniteGroup, TowerSpec, DEFAULT_MAX_DEGREE,
};
use kazhdan_core::l2approx::{
    AbelianQuotient, GroupRingMatrix, DEFAULT_MAX_QUOTIENT_ORDER, DEFAULT_VN_NODES,
};
use kazhdan_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Betti,
    Cover,
    LueckMatrix,
    LueckBetti,
    HodgeMeasure,
    LimitMeasure,
    CurveDensity,
    CurveMass,
    Disk,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Betti => "betti",
            Kind::Cover => "cover",
            Kind::LueckMatrix => "lueck-matrix",
            Kind::LueckBetti => "lueck-betti",
            Kind::HodgeMeasure => "hodge-measure",
            Kind::LimitMeasure => "limit-measure",
            Kind::CurveDensity => "curve-density",
            Kind::CurveMass => "curve-mass",
            Kind::Disk => "disk",
        }
    }
}

fn default_max_degree() -> usize {
    DEFAULT_MAX_DEGREE
}

/// A single finite cover of the genus-`g` base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoverDesc {
    /// `Z/n`, one generator sent to 1 and the rest to 0.
    Cyclic { generator: usize, n: u64 },
    /// `⊕ Z/m_i` with one weight vector per generator.
    Weights {
        weights: Vec<Vec<i64>>,
        moduli: Vec<u64>,
    },
    /// `H_1(S; Z/n)`.
    Homology { n: u64 },
    /// Explicit multiplication table; `images` are element indices.
    Table {
        table: Vec<Vec<usize>>,
        identity: usize,
        images: Vec<usize>,
    },
}

impl CoverDesc {
    pub fn spec(&self, g: u32, limits: CoverLimits) -> Result<CoverSpec> {
        let spec = match self {
            CoverDesc::Cyclic { generator, n } => cyclic_cover_spec(g, *generator, *n)?,
            CoverDesc::Weights { weights, moduli } => {
                abelian_weight_cover_spec(g, weights, moduli)?
            }
            CoverDesc::Homology { n } => homology_cover_spec(g, *n, limits)?,
            CoverDesc::Table {
                table,
                identity,
                images,
            } => CoverSpec {
                group: FiniteGroup::from_table(table.clone(), *identity)?,
                images: images.clone(),
            },
        };
        if spec.degree() > limits.max_degree {
            return Err(Error::ResourceCap {
                what: "cover degree".into(),
                requested: spec.degree() as u128,
                cap: limits.max_degree as u128,
            });
        }
        Ok(spec)
    }

    /// `cyclic:GEN:N` or `homology:N`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["cyclic", gen, n] => Ok(CoverDesc::Cyclic {
                generator: parse_num(gen)?,
                n: parse_num(n)?,
            }),
            ["homology", n] => Ok(CoverDesc::Homology { n: parse_num(n)? }),
            _ => Err(invalid(format!(
                "cannot parse cover '{s}' (expected cyclic:GEN:N or homology:N)"
            ))),
        }
    }
}

/// A nested tower of covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TowerDesc {
    Cyclic {
        generator: usize,
        moduli: Vec<u64>,
    },
    Weights {
        weights: Vec<Vec<i64>>,
        moduli: Vec<Vec<u64>>,
    },
    Homology {
        moduli: Vec<u64>,
    },
}

impl TowerDesc {
    pub fn spec(&self, g: u32, limits: CoverLimits) -> Result<TowerSpec> {
        let t = match self {
            TowerDesc::Cyclic { generator, moduli } => cyclic_tower(g, *generator, moduli)?,
            TowerDesc::Weights { weights, moduli } => abelian_tower(g, weights, moduli)?,
            TowerDesc::Homology { moduli } => homology_tower(g, moduli, limits)?,
        };
        if let Some(&d) = t.degrees().iter().max() {
            if d > limits.max_degree {
                return Err(Error::ResourceCap {
                    what: "tower degree".into(),
                    requested: d as u128,
                    cap: limits.max_degree as u128,
                });
            }
        }
        Ok(t)
    }

    /// `cyclic:GEN:M1,M2,…` or `homology:M1,M2,…`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["cyclic", gen, moduli] => Ok(TowerDesc::Cyclic {
                generator: parse_num(gen)?,
                moduli: parse_list(moduli)?,
            }),
            ["homology", moduli] => Ok(TowerDesc::Homology {
                moduli: parse_list(moduli)?,
            }),
            _ => Err(invalid(format!(
                "cannot parse tower '{s}' (expected cyclic:GEN:M1,M2,... or homology:M1,M2,...)"
            ))),
        }
    }
}

pub fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("cannot parse number '{s}'")))
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_num)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BettiParams {
    pub genus: u32,
    #[serde(default)]
    pub cover: Option<CoverDesc>,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverParams {
    pub genus: u32,
    pub cover: CoverDesc,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

fn default_vn_nodes() -> usize {
    DEFAULT_VN_NODES
}

fn default_max_order() -> usize {
    DEFAULT_MAX_QUOTIENT_ORDER
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LueckMatrixParams {
    /// Explicit matrix; exclusive with `seeded`.
    #[serde(default)]
    pub matrix: Option<GroupRingMatrix>,
    /// Seed for a pseudo-random one-variable matrix.
    #[serde(default)]
    pub seeded: Option<u64>,
    /// One modulus vector per level.
    pub moduli: Vec<Vec<u64>>,
    #[serde(default = "default_vn_nodes")]
    pub nodes: usize,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

impl LueckMatrixParams {
    pub fn matrix(&self) -> Result<GroupRingMatrix> {
        match (&self.matrix, self.seeded) {
            (Some(m), None) => Ok(m.clone()),
            (None, Some(s)) => Ok(kazhdan_core::l2approx::seeded_group_ring_matrix(s)),
            _ => Err(invalid(
                "exactly one of 'matrix' and 'seeded' must be given",
            )),
        }
    }

    pub fn quotients(&self) -> Result<Vec<AbelianQuotient>> {
        self.moduli
            .iter()
            .map(|m| AbelianQuotient::new(m))
            .collect()
    }
}

fn default_degree() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LueckBettiParams {
    pub genus: u32,
    pub tower: TowerDesc,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeParams {
    pub genus: u32,
    pub tower: TowerDesc,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitParams {
    pub genus: u32,
    /// One weight vector in `Z^d` per generator.
    pub weights: Vec<Vec<i64>>,
    /// Grid nodes per circle; defaults depend on `d`.
    #[serde(default)]
    pub nodes: Option<usize>,
}

fn default_period_nodes() -> usize {
    64
}

fn default_order() -> usize {
    kazhdan_core::curves::DEFAULT_ORDER
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDensityParams {
    /// Ascending coefficients as `[re, im]` pairs.
    pub coefficients: Vec<[f64; 2]>,
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_period_nodes")]
    pub period_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMassParams {
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_period_nodes")]
    pub period_nodes: usize,
}

fn default_grid() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskParams {
    pub radii: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Params {
    Betti(BettiParams),
    Cover(CoverParams),
    LueckMatrix(LueckMatrixParams),
    LueckBetti(LueckBettiParams),
    HodgeMeasure(HodgeParams),
    LimitMeasure(LimitParams),
    CurveDensity(CurveDensityParams),
    CurveMass(CurveMassParams),
    Disk(DiskParams),
}

impl Params {
    pub fn kind(&self) -> Kind {
        match self {
            Params::Betti(_) => Kind::Betti,
            Params::Cover(_) => Kind::Cover,
            Params::LueckMatrix(_) => Kind::LueckMatrix,
            Params::LueckBetti(_) => Kind::LueckBetti,
            Params::HodgeMeasure(_) => Kind::HodgeMeasure,
            Params::LimitMeasure(_) => Kind::LimitMeasure,
            Params::CurveDensity(_) => Kind::CurveDensity,
            Params::CurveMass(_) => Kind::CurveMass,
            Params::Disk(_) => Kind::Disk,
        }
    }

    fn from_parts(kind: Kind, params: Value) -> Result<Self> {
        fn typed<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| invalid(format!("bad params: {e}")))
        }
        Ok(match kind {
            Kind::Betti => Params::Betti(typed(params)?),
            Kind::Cover => Params::Cover(typed(params)?),
            Kind::LueckMatrix => Params::LueckMatrix(typed(params)?),
            Kind::LueckBetti => Params::LueckBetti(typed(params)?),
            Kind::HodgeMeasure => Params::HodgeMeasure(typed(params)?),
            Kind::LimitMeasure => Params::LimitMeasure(typed(params)?),
            Kind::CurveDensity => Params::CurveDensity(typed(params)?),
            Kind::CurveMass => Params::CurveMass(typed(params)?),
            Kind::Disk => Params::Disk(typed(params)?),
        })
    }

    /// Cheap checks that need no computation. The library validates the
    /// rest before it does any work.
    pub fn validate(&self) -> Result<()> {
        let genus = |g: u32| {
            if g == 0 {
                Err(invalid("genus must be at least 1"))
            } else {
                Ok(())
            }
        };
        match self {
            Params::Betti(p) => genus(p.genus),
            Params::Cover(p) => genus(p.genus),
            Params::LueckMatrix(p) => {
                p.matrix()?;
                if p.moduli.is_empty() {
                    return Err(invalid("moduli must list at least one level"));
                }
                if p.nodes == 0 {
                    return Err(invalid("nodes must be positive"));
                }
                Ok(())
            }
            Params::LueckBetti(p) => genus(p.genus),
            Params::HodgeMeasure(p) => genus(p.genus),
            Params::LimitMeasure(p) => {
                genus(p.genus)?;
                if p.nodes == Some(0) {
                    return Err(invalid("nodes must be positive"));
                }
                Ok(())
            }
            Params::CurveDensity(p) => {
                if p.points.is_empty() {
                    return Err(invalid("at least one point is required"));
                }
                if p.points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("points must be finite"));
                }
                Ok(())
            }
            Params::CurveMass(p) => {
                if p.order < 2 {
                    return Err(invalid("quadrature order must be at least 2"));
                }
                Ok(())
            }
            Params::Disk(p) => {
                if p.radii.is_empty() {
                    return Err(invalid("at least one radius is required"));
                }
                if p.radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
                    return Err(invalid("radii must lie in (0, 1)"));
                }
                if p.grid < 2 {
                    return Err(invalid("grid must be at least 2"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: Params,
    pub seed: u64,
    pub out: PathBuf,
    pub cache: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema: u32,
    kind: Kind,
    params: Value,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    cache: Option<bool>,
}

/// Fields of a config file; `None` where the file leaves the choice to the
/// command line.
pub struct LoadedConfig {
    pub params: Params,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache: Option<bool>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| invalid(format!("bad config: {e}")))?;
    if file.schema != SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            file.schema
        )));
    }
    Ok(LoadedConfig {
        params: Params::from_parts(file.kind, file.params)?,
        seed: file.seed,
        out: file.out,
        cache: file.cache,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

impl ExperimentConfig {
    /// Canonical form: schema, kind, seed and typed parameters with all
    /// defaults filled in. Output location and cache toggle do not affect
    /// results and are left out.
    pub fn canonical(&self) -> String {
        let mut v = serde_json::to_value(&self.params).expect("params serialize");
        let obj = v.as_object_mut().expect("tagged params");
        obj.insert("schema".into(), SCHEMA_VERSION.into());
        obj.insert("seed".into(), self.seed.into());
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn kind(&self) -> Kind {
        self.params.kind()
    }
}
