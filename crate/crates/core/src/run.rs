//! Command dispatch and run records.
//!
//! A run writes `report.json` (the payload alone, reproducible bitwise from
//! the echoed config) and `record.json` (payload plus config echo, timestamps
//! and SHA-256 digests of every input and output file).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ProfileSource, RunConfig};
use crate::energy::{energy_report, gagliardo_energy, potential_energy, EnergyReport};
use crate::error::{Error, Result};
use crate::identity::{cutoff_limit_study, divergence_bracket, ibp_check, pohozaev_residual, IdentityReport, LimitStudy, VectorFieldSpec};
use crate::kernel::AngularKernel;
use crate::nonlinearity::Nonlinearity;
use crate::operator::{flp_apply, QuadSpec};
use crate::params::{normalization_constant, Params};
use crate::profile::{RadialGrid, RadialProfile};
use crate::solver::{project_constraint, solve, SolveReport};
use crate::symmetrize::symmetrize_radial;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Operator,
    Energy,
    Solve,
    Pohozaev,
    IbpCheck,
    LimitStudy,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 7] =
        [Command::Operator, Command::Energy, Command::Solve, Command::Pohozaev, Command::IbpCheck, Command::LimitStudy, Command::Selftest];

    pub fn name(self) -> &'static str {
        match self {
            Command::Operator => "operator",
            Command::Energy => "energy",
            Command::Solve => "solve",
            Command::Pohozaev => "pohozaev",
            Command::IbpCheck => "ibp-check",
            Command::LimitStudy => "limit-study",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config { path: "<command>".into(), message: format!("unknown command `{s}`") })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorPoint {
    pub x_radius: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub inner_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PohozaevPayload {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    /// `|P| / ((N - sp) a)`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestPayload {
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Operator { points: Vec<OperatorPoint> },
    Energy(EnergyReport),
    Solve(SolveReport),
    Pohozaev(PohozaevPayload),
    IbpCheck(IdentityReport),
    LimitStudy(LimitStudy),
    Selftest(SelftestPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: Command,
    pub artifact_version: String,
    pub started: String,
    pub finished: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub payload: Payload,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest { path: path.to_path_buf(), sha256: sha256_hex(&bytes) })
}

/// Result of evaluating a command before anything is written.
pub struct Outcome {
    pub payload: Payload,
    /// Profiles to store next to the report, by file name.
    pub profiles: Vec<(String, RadialProfile)>,
    pub inputs: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    params: Params,
    inputs: Vec<PathBuf>,
    profiles: Vec<(String, RadialProfile)>,
}

impl Ctx<'_> {
    fn profile(&mut self, src: &ProfileSource) -> Result<RadialProfile> {
        if let ProfileSource::Csv { path } = src {
            self.inputs.push(self.cfg.base_dir.join(path));
        }
        match self.cfg.fixed_profile(src)? {
            Some(u) => Ok(u),
            None => {
                let (_, u) = solve(&self.cfg.nonlinearity()?, &self.params, &self.cfg.radial_grid(), &self.cfg.solve)?;
                self.profiles.push(("ubar.csv".into(), u.clone()));
                Ok(u)
            }
        }
    }
}

/// Evaluates `command` without touching the output directory.
pub fn evaluate(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let params = cfg.params()?;
    let mut ctx = Ctx { cfg, params, inputs: vec![], profiles: vec![] };
    let quad = cfg.quad_spec();
    let payload = match command {
        Command::Operator => {
            let u = ctx.profile(&cfg.operator.profile)?;
            let points = cfg
                .operator
                .radii
                .iter()
                .map(|&x| {
                    let v = flp_apply(&u, x, &params, &quad)?;
                    Ok(OperatorPoint { x_radius: x, value: v.value, tail_bound: v.tail_bound, inner_tail: v.inner_tail })
                })
                .collect::<Result<_>>()?;
            Payload::Operator { points }
        }
        Command::Energy => {
            let u = ctx.profile(&cfg.energy.profile)?;
            let kernel = AngularKernel::build(&params, u.nodes());
            Payload::Energy(energy_report(&u, &cfg.nonlinearity()?, &kernel, cfg.energy.refine)?)
        }
        Command::Solve => {
            let (report, u) = solve(&cfg.nonlinearity()?, &params, &cfg.radial_grid(), &cfg.solve)?;
            ctx.profiles.push(("ubar.csv".into(), u));
            Payload::Solve(report)
        }
        Command::Pohozaev => {
            let nl = cfg.nonlinearity()?;
            let u = ctx.profile(&cfg.pohozaev.profile)?;
            let kernel = AngularKernel::build(&params, u.nodes());
            let a = gagliardo_energy(&u, &kernel)?;
            let b = potential_energy(&u, &nl, &params).b;
            let residual = pohozaev_residual(&u, &nl, &kernel)?;
            let normalized = if a > 0.0 { residual.abs() / (params.q1() * a) } else { 0.0 };
            Payload::Pohozaev(PohozaevPayload { a, b, residual, normalized })
        }
        Command::IbpCheck => {
            let u = ctx.profile(&cfg.ibp.profile)?;
            Payload::IbpCheck(ibp_check(&u, &cfg.ibp.field, &params, &quad)?)
        }
        Command::LimitStudy => {
            let nl = cfg.nonlinearity()?;
            let u = ctx.profile(&cfg.limit_study.profile)?;
            let kernel = AngularKernel::build(&params, u.nodes());
            Payload::LimitStudy(cutoff_limit_study(&u, &nl, &params, &cfg.limit_study.lambdas, &quad, &kernel)?)
        }
        Command::Selftest => Payload::Selftest(selftest()),
    };
    Ok(Outcome { payload, profiles: ctx.profiles, inputs: ctx.inputs })
}

fn write(path: &Path, bytes: &[u8]) -> Result<FileDigest> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest { path: path.to_path_buf(), sha256: sha256_hex(bytes) })
}

/// Runs `command` and writes its report, profiles and record into `out_dir`.
pub fn run(command: Command, cfg: &RunConfig, out_dir: &Path) -> Result<RunRecord> {
    let started = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let outcome = evaluate(command, cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let inputs = outcome.inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>>>()?;
    let mut outputs = Vec::new();
    let report = serde_json::to_vec_pretty(&outcome.payload).expect("payload serializes");
    outputs.push(write(&out_dir.join("report.json"), &report)?);
    for (name, u) in &outcome.profiles {
        outputs.push(write(&out_dir.join(name), u.to_csv().as_bytes())?);
    }
    let record = RunRecord {
        command,
        artifact_version: ARTIFACT_VERSION.into(),
        started,
        finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        config: cfg.clone(),
        inputs,
        outputs,
        payload: outcome.payload,
    };
    let json = serde_json::to_vec_pretty(&record).expect("record serializes");
    write(&out_dir.join("record.json"), &json)?;
    Ok(record)
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn small_bump() -> RadialProfile {
    let nodes = RadialGrid::with_size(48, 6.0).nodes().expect("fixed grid");
    RadialProfile::from_fn(nodes, |r| (-r * r).exp() * (1.0 - r * r / 36.0).powi(3)).expect("fixed grid")
}

/// Fast exact-value checks across every module.
pub fn selftest() -> SelftestPayload {
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Result<(bool, String)>| {
        checks.push(match r {
            Ok((ok, detail)) => check(name, ok, detail),
            Err(e) => check(name, false, e.to_string()),
        })
    };
    let pr = Params::validate(2, 0.5, 2.0).expect("reference triple");
    let quad = QuadSpec::default();
    let u = small_bump();

    push("constant_reference_value", {
        let c = normalization_constant(&pr);
        Ok(((c - 0.125).abs() < 1e-12, format!("C = {c}")))
    });
    push("invalid_triple_rejected", Ok((matches!(Params::validate(2, 0.5, 4.0), Err(Error::Domain(_))), "sp >= N".into())));
    push("operator_constant_zero", (|| {
        let nodes = RadialGrid::with_size(48, 6.0).nodes()?;
        let c = RadialProfile::new(nodes.clone(), vec![1.0; nodes.len()])?;
        let q = QuadSpec { rcut: 2.0, ..quad };
        let v = flp_apply(&c, 0.5, &pr, &q)?.value;
        Ok((v == 0.0, format!("value = {v}")))
    })());
    push("operator_homogeneity", (|| {
        let p3 = Params::validate(2, 0.5, 3.0)?;
        let v1 = flp_apply(&u, 0.7, &p3, &quad)?.value;
        let v2 = flp_apply(&u.scaled(3.0), 0.7, &p3, &quad)?.value;
        let rel = (v2 - 9.0 * v1).abs() / v2.abs();
        Ok((rel < 1e-10, format!("relative defect {rel:e}")))
    })());
    let kernel = AngularKernel::build(&pr, u.nodes());
    push("energy_zero_and_homogeneity", (|| {
        let a0 = gagliardo_energy(&u.scaled(0.0), &kernel)?;
        let a1 = gagliardo_energy(&u, &kernel)?;
        let a2 = gagliardo_energy(&u.scaled(2.0), &kernel)?;
        let rel = (a2 - 4.0 * a1).abs() / a2;
        Ok((a0 == 0.0 && rel < 1e-12, format!("a(0) = {a0}, relative defect {rel:e}")))
    })());
    push("potential_dilation", (|| {
        let nl = Nonlinearity::two_power(1.0, 3.0, &pr)?;
        let w = u.scaled(4.0);
        let b1 = potential_energy(&w, &nl, &pr).b;
        let b2 = potential_energy(&w.dilate(2.0)?, &nl, &pr).b;
        let rel = (b2 - 4.0 * b1).abs() / b2.abs();
        Ok((rel < 1e-10, format!("relative defect {rel:e}")))
    })());
    push("rearrangement_fixes_decreasing", (|| {
        let v = symmetrize_radial(&u, 2);
        let d = v.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((d < 1e-12, format!("max change {d:e}")))
    })());
    push("projection_hits_constraint", (|| {
        let nl = Nonlinearity::two_power(1.0, 3.0, &pr)?;
        let v = project_constraint(&u.scaled(4.0), &nl, &pr)?;
        let b = potential_energy(&v, &nl, &pr).b;
        Ok(((b - 1.0).abs() < 1e-8, format!("b = {b}")))
    })());
    push("identity_bracket_exact", (|| {
        let b = divergence_bracket(&VectorFieldSpec::Identity, &[0.3, -1.2], &[2.0, 0.7], &pr)?;
        Ok((b == pr.q1(), format!("bracket = {b}")))
    })());
    push("zero_profile_identities", (|| {
        let nl = Nonlinearity::two_power(1.0, 3.0, &pr)?;
        let z = u.scaled(0.0);
        let pz = pohozaev_residual(&z, &nl, &kernel)?;
        let r = ibp_check(&z, &VectorFieldSpec::IdentityCutoff { lambda: 1.0 }, &pr, &quad)?;
        Ok((pz == 0.0 && r.lhs == 0.0 && r.rhs == 0.0, format!("P = {pz}, lhs = {}, rhs = {}", r.lhs, r.rhs)))
    })());
    push("csv_round_trip", (|| {
        let back = RadialProfile::from_csv(&u.to_csv(), "<memory>")?;
        Ok((back == u, "bitwise".into()))
    })());
    let passed = checks.iter().all(|c| c.passed);
    SelftestPayload { passed, checks }
}
