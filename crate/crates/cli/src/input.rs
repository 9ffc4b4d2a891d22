use std::io::Read;
use std::path::PathBuf;

use clap::Args;

use arank_core::format::parse;
use arank_core::{Error, Law, PrimeField, Tensor, Universe};

use crate::commands::Failure;

/// Exactly one tensor source: a file (`-` for standard input) or a seeded
/// seeded generator.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Tensor file.
    pub file: Option<PathBuf>,
    /// Random tensor `P,N,D,SEED` instead of a file.
    #[arg(long, value_name = "P,N,D,SEED")]
    pub random: Option<String>,
}

impl InputArgs {
    pub fn load(&self) -> Result<Tensor, Failure> {
        if let Some(shape) = &self.random {
            let parts: Vec<&str> = shape.split(',').map(str::trim).collect();
            let nums: Option<Vec<u64>> = parts.iter().map(|s| s.parse().ok()).collect();
            return match nums.as_deref() {
                Some(&[p, n, d, seed]) => {
                    Ok(Tensor::random(PrimeField::new(p)?, n as usize, d as usize, seed)?)
                }
                _ => Err(Error::InvalidArgument(format!(
                    "--random expects P,N,D,SEED, got `{shape}`"
                ))
                .into()),
            };
        }
        let path = self.file.as_ref().expect("clap enforces one source");
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            std::fs::read_to_string(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?
        };
        Ok(parse(&text)?)
    }
}

#[derive(Debug, Args)]
pub struct UniverseArgs {
    /// Every instance of the given shape.
    #[arg(long)]
    pub exhaustive: bool,
    /// Identity tensors of dimension 1..=n.
    #[arg(long, conflicts_with = "exhaustive")]
    pub identity: bool,
    /// Random trials per universe.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
}

impl UniverseArgs {
    /// The universe named by `--p --n --d`, or `None` if no shape was given.
    pub fn explicit(&self) -> Result<Option<Universe>, Failure> {
        match (self.p, self.n, self.d) {
            (None, None, None) => {
                if self.identity {
                    return Err(Error::InvalidArgument("--identity needs --p, --n and --d".into()).into());
                }
                Ok(None)
            }
            (Some(p), Some(n), Some(d)) => {
                PrimeField::new(p)?;
                Ok(Some(if self.exhaustive {
                    Universe::Exhaustive { p, n, d }
                } else if self.identity {
                    Universe::Identity { p, n, d }
                } else {
                    Universe::Random {
                        p,
                        n,
                        d,
                        trials: self.trials,
                        seed: self.seed,
                    }
                }))
            }
            _ => Err(Error::InvalidArgument("give all of --p, --n and --d, or none".into()).into()),
        }
    }

    pub fn for_law(&self, law: Law) -> Result<Vec<Universe>, Failure> {
        Ok(match self.explicit()? {
            Some(u) => vec![u],
            None => law.default_universes(self.exhaustive, self.trials, self.seed),
        })
    }

    pub fn required(&self) -> Result<Universe, Failure> {
        self.explicit()?
            .ok_or_else(|| Error::InvalidArgument("give --p, --n and --d".into()).into())
    }
}
