//! Batch pipeline: parse, Pfaffian system, `Gamma`, boundary vectors and
//! numeric verification, with a content-hashed JSON artifact per stage.

mod config;
mod json;
mod verify;

pub use config::{GammaBudget, PipelineConfig, Tolerances, VerifyConfig};
pub use json::{sha256_hex, to_json_string};
pub use verify::{verify, Metric, VerifyBody};

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamparse::{build_h, parse, BuildOptions, HamiltonianAst};
use crate::hje::{
    check_projectivity, condition_set, extract_symplectic, gamma_basis, solve_qbars, ConditionSet, GammaCertificate,
    GammaJson, GammaOptions, Projectivity, QbarSolution, SymplecticData,
};
use crate::orealg::parse_operator;
use crate::pfaffian::{HolonomicFunction, PfaffianJson, PfaffianSystem};
use crate::ring::{parse_rational_function, MonomialOrder, NumPoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Upstream {
    pub stage: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub stage: String,
    pub version: String,
    pub config_sha256: String,
    pub upstream: Option<Upstream>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub header: Header,
    pub body: T,
}

/// A stage result together with where it was stored.
#[derive(Clone, Debug)]
pub struct Stage<T> {
    pub artifact: Artifact<T>,
    pub path: PathBuf,
    pub sha256: String,
    /// True when an up-to-date artifact was found and reused.
    pub reused: bool,
}

impl<T> Stage<T> {
    pub fn body(&self) -> &T {
        &self.artifact.body
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnihilateBody {
    pub hamiltonian: String,
    pub d: usize,
    /// Generators of an annihilating ideal of `h`.
    pub annihilators: Vec<String>,
    pub system: PfaffianJson,
    pub extract: Vec<String>,
    pub base_point: NumPoint,
    pub qbar: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfaffianBody {
    pub system: PfaffianJson,
    pub integrable: bool,
    pub extract: Vec<String>,
    pub base_point: NumPoint,
    pub qbar: Vec<f64>,
    #[serde(rename = "B_x")]
    pub bx: Vec<Vec<String>>,
    #[serde(rename = "B_p")]
    pub bp: Vec<Vec<String>>,
    pub omega: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaBody {
    pub t: usize,
    pub certificate: GammaJson,
    pub coefficients_integrable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveBody {
    pub conditions: ConditionSet,
    /// `None` when the solver found nothing and explicit vectors were configured.
    pub solution: Option<QbarSolution>,
    /// The boundary vectors `qbar_2 .. qbar_n` used downstream.
    pub chosen: Vec<Vec<f64>>,
    /// `solver` or `config`.
    pub chosen_source: String,
    /// `max |qbar_k^T M_g qbar_l|` over the chosen tuple, columns at unit norm.
    pub chosen_residual: f64,
    pub projectivity: Projectivity,
}

/// Runs stages against an output directory.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    /// Recompute the requested stage even when its artifact is up to date.
    pub force: bool,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, out_dir: impl Into<PathBuf>, force: bool) -> Result<Self> {
        config.validate()?;
        let out_dir = out_dir.into();
        fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;
        Ok(Pipeline { config, out_dir, force })
    }

    fn config_sha256(&self) -> Result<String> {
        Ok(sha256_hex(to_json_string(&self.config)?.as_bytes()))
    }

    fn header(&self, stage: &str, upstream: Option<Upstream>) -> Result<Header> {
        Ok(Header {
            stage: stage.into(),
            version: VERSION.into(),
            config_sha256: self.config_sha256()?,
            upstream,
            seed: self.config.seed,
        })
    }

    pub fn artifact_path(&self, stage: &str) -> PathBuf {
        self.out_dir.join(format!("{stage}.json"))
    }

    fn run_stage<T, F>(&self, stage: &str, upstream: Option<Upstream>, force: bool, compute: F) -> Result<Stage<T>>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let header = self.header(stage, upstream)?;
        let path = self.artifact_path(stage);
        if !force {
            if let Ok(bytes) = fs::read(&path) {
                if let Ok(artifact) = serde_json::from_slice::<Artifact<T>>(&bytes) {
                    if artifact.header == header {
                        return Ok(Stage { artifact, path, sha256: sha256_hex(&bytes), reused: true });
                    }
                }
            }
        }
        let artifact = Artifact { header, body: compute()? };
        let text = to_json_string(&artifact)?;
        fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
        Ok(Stage { artifact, path, sha256: sha256_hex(text.as_bytes()), reused: false })
    }

    fn ast(&self) -> Result<HamiltonianAst> {
        parse(&self.config.hamiltonian, &self.config.context())
    }

    pub fn annihilate(&self) -> Result<Stage<AnnihilateBody>> {
        self.annihilate_with(self.force)
    }

    fn annihilate_with(&self, force: bool) -> Result<Stage<AnnihilateBody>> {
        self.run_stage("annihilate", None, force, || {
            let ast = self.ast()?;
            let zbar = self.config.base_point()?;
            let opts = BuildOptions {
                polynomial_form: self.config.polynomial_form,
                order: self.config.order,
                seed: self.config.seed,
                precision: self.config.precision,
            };
            let (f, relations) = build_h(&ast, &zbar, &opts)?;
            let ctx = &f.system.ctx;
            let names = ctx.names();
            Ok(AnnihilateBody {
                hamiltonian: ast.to_string(),
                d: f.dim(),
                annihilators: relations.iter().map(|r| r.fmt_with(ctx, MonomialOrder::Grevlex)).collect(),
                system: f.system.to_json(),
                extract: f.extract.iter().map(|e| e.fmt_with(&names)).collect(),
                base_point: f.base_point.clone(),
                qbar: f.qbar.clone(),
            })
        })
    }

    pub fn pfaffian(&self) -> Result<Stage<PfaffianBody>> {
        self.pfaffian_with(self.force)
    }

    fn pfaffian_with(&self, force: bool) -> Result<Stage<PfaffianBody>> {
        let up = self.annihilate_with(false)?;
        let upstream = Some(Upstream { stage: "annihilate".into(), sha256: up.sha256.clone() });
        self.run_stage("pfaffian", upstream, force, || {
            let a = up.body();
            let system = PfaffianSystem::from_json(&a.system)?;
            // Exact integrability and the annihilators' consistency with the system.
            system.validate()?;
            for op in &a.annihilators {
                parse_operator(op, &system.ctx)?;
            }
            let sym = extract_symplectic(&system)?;
            let names = system.ctx.names();
            Ok(PfaffianBody {
                system: a.system.clone(),
                integrable: true,
                extract: a.extract.clone(),
                base_point: a.base_point.clone(),
                qbar: a.qbar.clone(),
                bx: sym.bx.to_strings(&names),
                bp: sym.bp.to_strings(&names),
                omega: sym.omega.to_strings(&names),
            })
        })
    }

    pub fn gamma(&self) -> Result<Stage<GammaBody>> {
        self.gamma_with(self.force)
    }

    fn gamma_with(&self, force: bool) -> Result<Stage<GammaBody>> {
        let up = self.pfaffian_with(false)?;
        let upstream = Some(Upstream { stage: "pfaffian".into(), sha256: up.sha256.clone() });
        self.run_stage("gamma", upstream, force, || {
            let (system, sym) = load_system(up.body())?;
            let opts = GammaOptions {
                l_max: self.config.gamma.l_max,
                order: self.config.order,
                limits: self.config.gamma.limits,
                seed: self.config.seed,
            };
            let cert = gamma_basis(&system, &sym, &opts)?;
            Ok(GammaBody {
                t: cert.size(),
                coefficients_integrable: cert.integrability_defect().is_none(),
                certificate: cert.to_json(),
            })
        })
    }

    pub fn solve(&self) -> Result<Stage<SolveBody>> {
        self.solve_with(self.force)
    }

    fn solve_with(&self, force: bool) -> Result<Stage<SolveBody>> {
        let pf = self.pfaffian_with(false)?;
        let up = self.gamma_with(false)?;
        let upstream = Some(Upstream { stage: "gamma".into(), sha256: up.sha256.clone() });
        self.run_stage("solve", upstream, force, || {
            let (system, sym) = load_system(pf.body())?;
            let cert = GammaCertificate::from_json(&up.body().certificate)?;
            let h = holonomic(pf.body(), &system)?;
            let cond = condition_set(&cert, &sym, &system, &h, &h.base_point, self.config.precision)?;
            let n = self.config.n;
            let solved = solve_qbars(&cond, n);
            let (solution, chosen, source) = match (&self.config.qbars, solved) {
                (Some(q), s) => (s.ok(), q.clone(), "config"),
                (None, Ok(s)) => {
                    let first = s.tuples[0].clone();
                    (Some(s), first, "solver")
                }
                (None, Err(e)) => return Err(e),
            };
            if chosen.iter().any(|q| q.len() != system.dim) {
                return Err(Error::Dimension(format!("boundary vectors must have length {}", system.dim)));
            }
            let mut all = vec![cond.qbar1.clone()];
            all.extend(chosen.iter().cloned());
            let unit = |v: &Vec<f64>| {
                let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| if nrm > 0.0 { x / nrm } else { 0.0 }).collect::<Vec<f64>>()
            };
            let mut residual = 0.0f64;
            for k in 0..all.len() {
                for l in k + 1..all.len() {
                    residual = residual.max(cond.residual(&unit(&all[k]), &unit(&all[l])));
                }
            }
            let projectivity = check_projectivity(&cond.bp, &all)?;
            Ok(SolveBody {
                conditions: cond,
                solution,
                chosen,
                chosen_source: source.into(),
                chosen_residual: residual,
                projectivity,
            })
        })
    }

    pub fn verify(&self) -> Result<Stage<VerifyBody>> {
        self.verify_with(self.force)
    }

    fn verify_with(&self, force: bool) -> Result<Stage<VerifyBody>> {
        let pf = self.pfaffian_with(false)?;
        let up = self.solve_with(false)?;
        let upstream = Some(Upstream { stage: "solve".into(), sha256: up.sha256.clone() });
        self.run_stage("verify", upstream, force, || {
            let system = PfaffianSystem::from_json(&pf.body().system)?;
            let h = holonomic(pf.body(), &system)?;
            verify(&self.config, &self.ast()?, &h, &up.body().chosen, &self.out_dir)
        })
    }

    /// Every stage in order; each is recomputed when `force` is set.
    pub fn run_all(&self) -> Result<Stage<VerifyBody>> {
        self.annihilate_with(self.force)?;
        self.pfaffian_with(self.force)?;
        self.gamma_with(self.force)?;
        self.solve_with(self.force)?;
        self.verify_with(self.force)
    }
}

fn load_system(p: &PfaffianBody) -> Result<(PfaffianSystem, SymplecticData)> {
    let system = PfaffianSystem::from_json(&p.system)?;
    let sym = extract_symplectic(&system)?;
    Ok((system, sym))
}

fn holonomic(p: &PfaffianBody, system: &PfaffianSystem) -> Result<HolonomicFunction> {
    let extract = p.extract.iter().map(|e| parse_rational_function(e, &system.ctx)).collect::<Result<Vec<_>>>()?;
    HolonomicFunction::new(system.clone(), extract, p.base_point.clone(), p.qbar.clone())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}
