//! TOML run configuration.
//!
//! Every block has defaults, unknown keys are rejected, and a bad value is
//! reported with its dotted field path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::VectorFieldSpec;
use crate::nonlinearity::{Family, Nonlinearity};
use crate::operator::QuadSpec;
use crate::params::Params;
use crate::profile::{RadialGrid, RadialProfile};
use crate::solver::SolveConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub p: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        ParamsBlock { n: 2, s: 0.5, p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityBlock {
    pub family: String,
    pub m: f64,
    pub q: f64,
    /// Only for `family = "spliced"`.
    pub splice: Option<f64>,
    /// Pins the initializer level instead of the automatic choice.
    pub zeta: Option<f64>,
}

impl Default for NonlinearityBlock {
    fn default() -> Self {
        NonlinearityBlock { family: "two_power".into(), m: 1.0, q: 3.0, splice: None, zeta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Rmax")]
    pub rmax: f64,
    pub ratio: f64,
    pub r_inner_min: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        let g = RadialGrid::default();
        GridBlock { m: g.m, rmax: g.rmax, ratio: g.ratio, r_inner_min: g.r_inner_min }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadBlock {
    pub delta: f64,
    #[serde(rename = "Rcut")]
    pub rcut: f64,
    pub n_inner: usize,
    pub n_outer: usize,
    pub n_angular: usize,
}

impl Default for QuadBlock {
    fn default() -> Self {
        let q = QuadSpec::default();
        QuadBlock { delta: q.delta, rcut: q.rcut, n_inner: q.n_inner, n_outer: q.n_outer, n_angular: q.n_angular }
    }
}

/// Where a command gets its input profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSource {
    /// `amplitude * exp(-(r/width)^2)` on the configured grid.
    Gaussian { amplitude: f64, width: f64 },
    /// A stored `r,u` CSV; relative paths resolve against the config file.
    Csv { path: PathBuf },
    /// The minimizer produced by the `solve` block.
    Solve,
}

impl Default for ProfileSource {
    fn default() -> Self {
        ProfileSource::Gaussian { amplitude: 1.0, width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorBlock {
    pub profile: ProfileSource,
    pub radii: Vec<f64>,
}

impl Default for OperatorBlock {
    fn default() -> Self {
        OperatorBlock { profile: ProfileSource::default(), radii: vec![0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyBlock {
    pub profile: ProfileSource,
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PohozaevBlock {
    pub profile: ProfileSource,
}

impl Default for PohozaevBlock {
    fn default() -> Self {
        PohozaevBlock { profile: ProfileSource::Solve }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbpBlock {
    pub profile: ProfileSource,
    pub field: VectorFieldSpec,
}

impl Default for IbpBlock {
    fn default() -> Self {
        IbpBlock { profile: ProfileSource::default(), field: VectorFieldSpec::IdentityCutoff { lambda: 0.05 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitStudyBlock {
    pub profile: ProfileSource,
    pub lambdas: Vec<f64>,
}

impl Default for LimitStudyBlock {
    fn default() -> Self {
        LimitStudyBlock { profile: ProfileSource::Solve, lambdas: vec![2.0, 1.0, 0.5, 0.25] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsBlock,
    pub nonlinearity: NonlinearityBlock,
    pub grid: GridBlock,
    pub quad: QuadBlock,
    pub solve: SolveConfig,
    pub operator: OperatorBlock,
    pub energy: EnergyBlock,
    pub pohozaev: PohozaevBlock,
    pub ibp: IbpBlock,
    pub limit_study: LimitStudyBlock,
    /// Directory that relative paths resolve against; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn field_error(path: &str, e: Error) -> Error {
    let message = match e {
        Error::Domain(m) => m,
        other => other.to_string(),
    };
    Error::Config { path: path.into(), message }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config { path: "<document>".into(), message: e.to_string() })?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config { path, message: e.into_inner().message().trim().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every block against its module-level type. The nonlinearity
    /// is checked only by the commands that use it.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.radial_grid().nodes().map_err(|e| field_error("grid", e))?;
        self.quad_spec().validate().map_err(|e| field_error("quad", e))?;
        self.solve.validate().map_err(|e| field_error("solve", e))?;
        for (name, src) in [
            ("operator.profile", &self.operator.profile),
            ("energy.profile", &self.energy.profile),
            ("pohozaev.profile", &self.pohozaev.profile),
            ("ibp.profile", &self.ibp.profile),
            ("limit_study.profile", &self.limit_study.profile),
        ] {
            if let ProfileSource::Gaussian { amplitude, width } = src {
                if !amplitude.is_finite() || !(*width > 0.0) {
                    return Err(field_error(name, Error::domain("gaussian needs finite amplitude and positive width")));
                }
            }
        }
        if self.operator.radii.iter().any(|r| !(*r >= 0.0)) {
            return Err(field_error("operator.radii", Error::domain("radii must be non-negative")));
        }
        self.ibp.field.validate().map_err(|e| field_error("ibp.field", e))?;
        let l = &self.limit_study.lambdas;
        if l.is_empty() || l.iter().any(|x| !(*x > 0.0)) || l.windows(2).any(|w| w[1] >= w[0]) {
            return Err(field_error("limit_study.lambdas", Error::domain("must be positive and strictly decreasing")));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params> {
        let b = &self.params;
        Params::validate(b.n, b.s, b.p).map_err(|e| field_error("params", e))
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let params = self.params()?;
        let b = &self.nonlinearity;
        let family = match (b.family.as_str(), b.splice) {
            ("two_power", None) => Family::TwoPower,
            ("spliced", Some(splice)) => Family::Spliced { splice },
            ("two_power", Some(_)) => return Err(field_error("nonlinearity.splice", Error::domain("only valid for family = \"spliced\""))),
            ("spliced", None) => return Err(field_error("nonlinearity.splice", Error::domain("required for family = \"spliced\""))),
            (other, _) => {
                return Err(field_error("nonlinearity.family", Error::domain(format!("unknown family `{other}`, expected two_power or spliced"))))
            }
        };
        let nl = Nonlinearity::with_family(b.m, b.q, &params, family).map_err(|e| field_error("nonlinearity", e))?;
        match b.zeta {
            Some(z) => nl.with_zeta(z).map_err(|e| field_error("nonlinearity.zeta", e)),
            None => Ok(nl),
        }
    }

    pub fn radial_grid(&self) -> RadialGrid {
        let g = &self.grid;
        RadialGrid { m: g.m, rmax: g.rmax, ratio: g.ratio, r_inner_min: g.r_inner_min }
    }

    pub fn quad_spec(&self) -> QuadSpec {
        let q = &self.quad;
        QuadSpec { delta: q.delta, rcut: q.rcut, n_inner: q.n_inner, n_outer: q.n_outer, n_angular: q.n_angular, ..QuadSpec::default() }
    }

    /// Loads or builds a non-solver profile source.
    pub fn fixed_profile(&self, src: &ProfileSource) -> Result<Option<RadialProfile>> {
        match src {
            ProfileSource::Gaussian { amplitude, width } => {
                let nodes = self.radial_grid().nodes()?;
                Ok(Some(RadialProfile::from_fn(nodes, |r| amplitude * (-(r / width).powi(2)).exp())?))
            }
            ProfileSource::Csv { path } => Ok(Some(RadialProfile::load(self.base_dir.join(path))?)),
            ProfileSource::Solve => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_setup() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!((cfg.params().unwrap().constant() - 0.125).abs() < 1e-12);
        assert_eq!(cfg.radial_grid(), RadialGrid::default());
        assert_eq!(cfg.quad_spec(), QuadSpec::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.ibp.field = VectorFieldSpec::IdentityCutoff { lambda: 0.2 };
        cfg.operator.profile = ProfileSource::Csv { path: "u.csv".into() };
        cfg.nonlinearity.zeta = Some(2.0);
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = RunConfig::parse("[grid]\nM = 128\nrmx = 3.0\n").unwrap_err();
        match err {
            Error::Config { path, message } => {
                assert_eq!(path, "grid.rmx");
                assert!(message.contains("rmx"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let err = RunConfig::parse("[ibp.field]\nkind = \"identity_cutoff\"\nlambda = \"big\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "ibp.field"), "{err:?}");
        assert!(matches!(RunConfig::parse("[solve]\nstep0 = \"x\"\n").unwrap_err(), Error::Config { ref path, .. } if path == "solve.step0"));
    }

    #[test]
    fn semantic_errors_name_their_block() {
        let cases = [
            ("[params]\nN = 2\ns = 0.5\np = 5.0\n", "params"),
            ("[nonlinearity]\nfamily = \"cubic\"\n", "nonlinearity.family"),
            ("[nonlinearity]\nfamily = \"spliced\"\n", "nonlinearity.splice"),
            ("[grid]\nRmax = 0.5\n", "grid"),
            ("[quad]\nn_angular = 2\n", "quad"),
            ("[limit_study]\nlambdas = [0.1, 0.2]\n", "limit_study.lambdas"),
            ("[operator]\nradii = [-1.0]\n", "operator.radii"),
        ];
        for (text, want) in cases {
            match RunConfig::parse(text).and_then(|c| c.nonlinearity().map(|_| c)) {
                Err(Error::Config { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_is_a_config_error() {
        let err = RunConfig::parse("[grid\nM = 1").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
