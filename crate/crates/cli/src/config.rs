//! Resolution of command-line references into algebras, elements and
//! subalgebras, and the error type carrying exit codes.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use srbench::algebra::{probes, random_element, Algebra, AlgebraSpec, Tuple};
use srbench::kk::{Subalgebra, SubalgebraDoc};
use srbench::Error;

use crate::Common;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnboundVariable(_)
            | Error::SortMismatch(_)
            | Error::Budget
            | Error::Invalid(_)
            | Error::Shape(_) => CliError::Config(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn check_common(c: &Common) -> CliResult<()> {
    if c.budget == 0 {
        return Err(config("--budget must be positive"));
    }
    if c.n == 0 {
        return Err(config("--n must be positive"));
    }
    if c.mesh_res < 2 {
        return Err(config("--mesh-res must be at least 2"));
    }
    if !(c.tolerance >= 0.0 && c.tolerance.is_finite()) {
        return Err(config("--tolerance must be a finite non-negative number"));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn parse_list(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| config(format!("bad size list `{s}`"))))
        .collect()
}

/// The algebra document named by `--algebra`.
pub fn algebra_spec(name: &str, mesh_res: usize) -> CliResult<AlgebraSpec> {
    let path = Path::new(name);
    if path.is_file() {
        return read_json(path);
    }
    let spec = match name {
        "interval" => AlgebraSpec::Interval {
            resolution: mesh_res,
            k: 1,
        },
        "disk" => AlgebraSpec::Disk {
            resolution: mesh_res,
            k: 1,
        },
        _ => {
            if let Some(k) = name.strip_prefix('m').and_then(|k| k.parse().ok()) {
                AlgebraSpec::FullMatrix { k }
            } else if let Some(list) = name.strip_prefix("sum:") {
                AlgebraSpec::DirectSum {
                    blocks: parse_list(list)?,
                }
            } else {
                return Err(config(format!("unknown algebra `{name}` (not a file or built-in)")));
            }
        }
    };
    Ok(spec)
}

pub fn algebra(c: &Common) -> CliResult<(AlgebraSpec, Arc<Algebra>)> {
    let spec = algebra_spec(&c.algebra, c.mesh_res)?;
    let alg = spec.build().map_err(|e| config(e.to_string()))?;
    Ok((spec, alg.into_arc()))
}

/// The element named by `--element`, as a tuple of length `n`.
pub fn element(alg: &Arc<Algebra>, n: usize, name: &str, seed: u64) -> CliResult<Tuple> {
    match name {
        "random" => Ok(random_element(alg, n, seed, 1.0)),
        "zero" => Ok(Tuple::zeros(alg.clone(), n, 1)),
        "one" => {
            let one = Tuple::identity(alg.clone(), 1).map_err(|e| config(e.to_string()))?;
            let zero = Tuple::zeros(alg.clone(), 1, 1);
            let parts: Vec<Tuple> = (0..n).map(|i| if i == 0 { one.clone() } else { zero.clone() }).collect();
            Ok(Tuple::stack(&parts)?)
        }
        _ => {
            let i: usize = name
                .strip_prefix("probe:")
                .and_then(|i| i.parse().ok())
                .ok_or_else(|| config(format!("unknown element `{name}`")))?;
            let mut all = probes(alg, n);
            if i >= all.len() {
                return Err(config(format!("probe index {i} out of range (algebra has {})", all.len())));
            }
            Ok(all.swap_remove(i))
        }
    }
}

/// The subalgebra named by `--first` or `--second`.
pub fn subalgebra(name: &str) -> CliResult<Subalgebra> {
    let path = Path::new(name);
    if path.is_file() {
        let doc: SubalgebraDoc = read_json(path)?;
        return Subalgebra::from_doc(&doc).map_err(|e| config(e.to_string()));
    }
    let built = if let Some(d) = name.strip_prefix("full:") {
        Subalgebra::full(parse_list(d)?[0])
    } else if let Some(d) = name.strip_prefix("diag:") {
        Subalgebra::diagonal(parse_list(d)?[0])
    } else if let Some(list) = name.strip_prefix("blocks:") {
        Subalgebra::block_diagonal(&parse_list(list)?)
    } else {
        return Err(config(format!("unknown subalgebra `{name}` (not a file or built-in)")));
    };
    built.map_err(|e| config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        assert_eq!(algebra_spec("m3", 8).unwrap(), AlgebraSpec::FullMatrix { k: 3 });
        assert_eq!(
            algebra_spec("sum:1,2", 8).unwrap(),
            AlgebraSpec::DirectSum { blocks: vec![1, 2] }
        );
        assert_eq!(
            algebra_spec("disk", 8).unwrap(),
            AlgebraSpec::Disk { resolution: 8, k: 1 }
        );
        assert!(algebra_spec("torus", 8).is_err());
        assert_eq!(subalgebra("blocks:1,2").unwrap().dim(), 5);
        assert!(subalgebra("blocks:x").is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::Budget).exit_code(), 2);
        assert_eq!(CliError::from(Error::Precondition("x".into())).exit_code(), 3);
    }
}
