//! The weight mini-language: `charnes`, `uniform:a1,...,an`, `diagonal:@file`,
//! `matrix:@file`.

use std::fs;
use std::path::PathBuf;

use lsvalue::approx::MAX_PLAYERS_DENSE;
use lsvalue::{charnes_weights, DenseMatrix, PlayerSet, WeightScheme};

use crate::gamefile::parse_coalition_map;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Charnes,
    Uniform(Vec<f64>),
    Diagonal(PathBuf),
    Matrix(PathBuf),
}

impl std::str::FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "charnes" {
            return Ok(Self::Charnes);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("unknown weight specification \"{s}\""))?;
        match kind {
            "uniform" => arg
                .split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| format!("\"{a}\" is not a number"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Self::Uniform),
            "diagonal" | "matrix" => {
                let path = arg
                    .strip_prefix('@')
                    .filter(|p| !p.is_empty())
                    .ok_or_else(|| format!("expected {kind}:@FILE"))?;
                Ok(if kind == "diagonal" {
                    Self::Diagonal(path.into())
                } else {
                    Self::Matrix(path.into())
                })
            }
            _ => Err(format!("unknown weight kind \"{kind}\"")),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_len(values: &[f64], n: usize) -> Result<(), CliError> {
    if values.len() != n {
        return Err(CliError::Usage(format!(
            "uniform weights need one entry per coalition size: expected {n}, got {}",
            values.len()
        )));
    }
    Ok(())
}

impl WeightSpec {
    /// Per-size weights, when the weights are size-uniform.
    pub fn by_size(&self, players: PlayerSet) -> Result<Option<Vec<f64>>, CliError> {
        match self {
            Self::Charnes => charnes_weights(players)
                .map(Some)
                .map_err(|e| CliError::Input(format!("charnes weights: {e}"))),
            Self::Uniform(a) => {
                check_len(a, players.n())?;
                Ok(Some(a.clone()))
            }
            _ => Ok(None),
        }
    }

    /// Per-coalition weights in table order, unless the weights form a full matrix.
    pub fn per_coalition(&self, players: PlayerSet) -> Result<Option<Vec<f64>>, CliError> {
        match self {
            Self::Diagonal(path) => parse_coalition_map(&read(path)?, players)
                .map(Some)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
            Self::Matrix(_) => Ok(None),
            _ => Ok(self
                .by_size(players)?
                .map(|a| players.coalitions().map(|s| a[s.size() - 1]).collect())),
        }
    }

    pub fn scheme(&self, players: PlayerSet) -> Result<WeightScheme, CliError> {
        let scheme = match self {
            Self::Charnes | Self::Uniform(_) => {
                WeightScheme::uniform_by_size(players, self.by_size(players)?.expect("size-uniform"))
            }
            Self::Diagonal(_) => WeightScheme::diagonal(players, self.per_coalition(players)?.expect("diagonal")),
            Self::Matrix(path) => {
                if players.n() > MAX_PLAYERS_DENSE {
                    return Err(CliError::Input(format!(
                        "full weight matrices are limited to {MAX_PLAYERS_DENSE} players"
                    )));
                }
                let rows: Vec<Vec<f64>> = serde_json::from_str(&read(path)?)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let nc = players.num_coalitions();
                if rows.len() != nc || rows.iter().any(|r| r.len() != nc) {
                    return Err(CliError::Input(format!(
                        "{}: expected a {nc}x{nc} matrix",
                        path.display()
                    )));
                }
                let m = DenseMatrix::from_rows(&rows).map_err(|e| CliError::Input(e.to_string()))?;
                WeightScheme::full_matrix(players, m)
            }
        };
        scheme.map_err(|e| CliError::Input(format!("weights: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("charnes".parse::<WeightSpec>(), Ok(WeightSpec::Charnes));
        assert_eq!("uniform:0,1,-1".parse::<WeightSpec>(), Ok(WeightSpec::Uniform(vec![0.0, 1.0, -1.0])));
        assert_eq!("diagonal:@w.json".parse::<WeightSpec>(), Ok(WeightSpec::Diagonal("w.json".into())));
        assert_eq!("matrix:@m.json".parse::<WeightSpec>(), Ok(WeightSpec::Matrix("m.json".into())));
        assert!("uniform:1,x".parse::<WeightSpec>().is_err());
        assert!("diagonal:w.json".parse::<WeightSpec>().is_err());
        assert!("equal".parse::<WeightSpec>().is_err());
        assert!("uniform:".parse::<WeightSpec>().is_err());
    }

    #[test]
    fn uniform_length_is_checked() {
        let ps = PlayerSet::new(3).unwrap();
        assert!(WeightSpec::Uniform(vec![1.0, 1.0]).scheme(ps).is_err());
        assert!(WeightSpec::Uniform(vec![1.0, 1.0, 1.0]).scheme(ps).is_ok());
    }
}
