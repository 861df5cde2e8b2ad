use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use strata_core::certify::{certify_path, gen_instance, gen_split, Instance, InstanceKind, InstanceSpec, Membership, OperatorPair};
use strata_core::io::{read_json, read_matrix, write_json};
use strata_core::path::{
    chain_connect, connect_fk, connect_phi, corrected_flip_path, discover_chain, literal_flip_path, phi_indices,
    preferred_side, OperatorPath,
};
use strata_core::strata::{dim_fk, tangent_basis, StratumPoint};
use strata_core::subspace::{rank_of, ToleranceConfig};

/// Default relative rank cutoff, overridden by `STRATA_TOL`.
const DEFAULT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "strata", version, about = "Paths and certificates in rank strata of matrix spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    FkPair,
    PhiPair,
    SubspacePair,
    Gl,
}

impl From<Kind> for InstanceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::FkPair => InstanceKind::FkPair,
            Kind::PhiPair => InstanceKind::PhiPair,
            Kind::SubspacePair => InstanceKind::SubspacePair,
            Kind::Gl => InstanceKind::Gl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fk,
    Phi,
    Chain,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a seeded random instance.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Join the two operators of a pair file, from t2 to t1.
    Connect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        /// Run from t1 to t2 instead.
        #[arg(long)]
        reverse: bool,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample a path and write a certificate. Exit code 0 pass, 1 fail, 2 degenerate.
    Certify {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        membership: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify the two-piece affine flip path on a random splitting of R^dim.
    #[command(name = "audit-thm12")]
    AuditThm12 {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Tangent space basis of the rank stratum at a matrix.
    Tangent {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dimension of the rank-k stratum of n x m matrices.
    Dim {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Rotation path from a matrix to its negative at fixed rank.
    Flip {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// A path file: the path plus the instance it was built from, if known.
#[derive(Serialize, Deserialize)]
struct PathFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instance: Option<InstanceSpec>,
    #[serde(flatten)]
    path: OperatorPath<f64>,
}

fn tolerance(flag: Option<f64>) -> Result<ToleranceConfig<f64>> {
    let rel = match flag {
        Some(t) => t,
        None => match std::env::var("STRATA_TOL") {
            Ok(s) => s.trim().parse().with_context(|| format!("STRATA_TOL={s:?} is not a number"))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    Ok(ToleranceConfig::default().with_rank_tol(rel)?)
}

fn read<V: serde::de::DeserializeOwned>(p: &Path) -> Result<V> {
    read_json(p).with_context(|| format!("reading {}", p.display()))
}

fn write<V: Serialize>(p: &Path, v: &V) -> Result<()> {
    write_json(p, v).with_context(|| format!("writing {}", p.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen { m, n, k, seed, kind, out } => {
            let spec = InstanceSpec::new(m, n, k, seed, kind.into())?;
            let inst: Instance<f64> = gen_instance(&spec)?;
            write(&out, &inst)?;
        }
        Cmd::Connect { input, mode, out, reverse, tol } => {
            let tol = tolerance(tol)?;
            let pair: OperatorPair<f64> = read(&input)?;
            let (t1, t2) = if reverse { (&pair.t2, &pair.t1) } else { (&pair.t1, &pair.t2) };
            let path = match mode {
                Mode::Fk => connect_fk(t1, t2, &tol)?,
                Mode::Phi => {
                    let (m_, n_) = phi_indices(t1, &tol);
                    connect_phi(t1, t2, m_, n_, &tol)?
                }
                Mode::Chain => {
                    let w = discover_chain(t1, t2, &tol)?;
                    chain_connect(t1, t2, &w, &tol)?
                }
            };
            write(&out, &PathFile { instance: pair.instance, path })?;
        }
        Cmd::Certify { path, k, samples, tol, membership, out } => {
            let tol = tolerance(tol)?;
            let file: PathFile = read(&path)?;
            let p = file.path.validate()?;
            let m: Option<Membership<f64>> = membership.as_deref().map(read).transpose()?;
            let cert = certify_path(&p, k, samples, &tol, m.as_ref())?.with_instance(file.instance);
            write(&out, &cert)?;
            return Ok(ExitCode::from(cert.verdict.exit_code() as u8));
        }
        Cmd::AuditThm12 { dim, seed, out, samples } => {
            if dim < 2 {
                bail!("--dim must be at least 2");
            }
            let tol = tolerance(None)?;
            let g = gen_split::<f64>(dim, dim / 2, seed)?;
            let p = literal_flip_path(g.domain(), g.codomain(), &g, &tol)?;
            let m = Membership {
                range_complements: vec![g.codomain().clone()],
                kernel_equals: Some(g.codomain().clone()),
                ..Default::default()
            };
            let cert = certify_path(&p, g.domain().dim(), samples, &tol, Some(&m))?;
            write(&out, &cert)?;
            return Ok(ExitCode::from(cert.verdict.exit_code() as u8));
        }
        Cmd::Tangent { input, out, tol } => {
            let tol = tolerance(tol)?;
            let x = read_matrix::<f64>(&input).with_context(|| format!("reading {}", input.display()))?;
            write(&out, &tangent_basis(&StratumPoint::new(x, &tol)))?;
        }
        Cmd::Dim { m, n, k } => println!("{}", dim_fk(m, n, k)?),
        Cmd::Flip { input, out, tol } => {
            let tol = tolerance(tol)?;
            let t = read_matrix::<f64>(&input).with_context(|| format!("reading {}", input.display()))?;
            let k = rank_of(&t, &tol);
            let side = preferred_side(t.shape(), k).context("full-rank square matrix: no direction outside range or row space")?;
            let path = corrected_flip_path(&t, k, side, &tol)?;
            write(&out, &PathFile { instance: None, path })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
