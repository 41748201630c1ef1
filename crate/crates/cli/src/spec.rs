//! Channel spec strings:
//!   gadc:<gamma>:<noise>      generalized amplitude damping channel
//!   identity:<d>              d-dimensional identity channel
//!   replace:<d>:<basis-index> preparation of a basis state (trivial input)
//!   random:<dA>:<dB>:<seed>   seeded pseudo-random channel

use qstrat_comb::{
    basis_preparation_choi, gadc_choi, identity_choi, random_channel_choi, GadcParams,
    StrategyChoi,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Gadc { gamma: f64, noise: f64 },
    Identity { dim: usize },
    Replace { dim: usize, index: usize },
    Random { d_in: usize, d_out: usize, seed: u64 },
}

impl ChannelSpec {
    /// Builds the one-turn strategy Choi operator.
    pub fn build(&self) -> Result<StrategyChoi, CliError> {
        Ok(match self {
            ChannelSpec::Gadc { gamma, noise } => gadc_choi(GadcParams {
                gamma: *gamma,
                noise: *noise,
            })?,
            ChannelSpec::Identity { dim } => identity_choi(*dim)?,
            ChannelSpec::Replace { dim, index } => basis_preparation_choi(*dim, *index)?,
            ChannelSpec::Random { d_in, d_out, seed } => {
                random_channel_choi(*d_in, *d_out, *seed)?
            }
        })
    }

    /// GADC parameters when this spec is a GADC.
    pub fn gadc_params(&self) -> Option<(f64, f64)> {
        match self {
            ChannelSpec::Gadc { gamma, noise } => Some((*gamma, *noise)),
            _ => None,
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> Option<ChannelSpec> {
        match self {
            ChannelSpec::Gadc { noise, .. } => Some(ChannelSpec::Gadc {
                gamma,
                noise: *noise,
            }),
            _ => None,
        }
    }

    pub fn with_noise(&self, noise: f64) -> Option<ChannelSpec> {
        match self {
            ChannelSpec::Gadc { gamma, .. } => Some(ChannelSpec::Gadc {
                gamma: *gamma,
                noise,
            }),
            _ => None,
        }
    }
}

/// Parses a channel spec string; errors carry the byte offset of the
/// offending field.
pub fn parse_channel_spec(s: &str) -> Result<ChannelSpec, CliError> {
    let fields: Vec<&str> = s.split(':').collect();
    // Byte offset of each field for error positions.
    let mut offsets = Vec::with_capacity(fields.len());
    let mut pos = 0usize;
    for f in &fields {
        offsets.push(pos);
        pos += f.len() + 1;
    }
    let err = |idx: usize, message: String| CliError::Parse {
        position: offsets.get(idx).copied().unwrap_or(s.len()),
        message,
    };
    let want_len = |n: usize, shape: &str| -> Result<(), CliError> {
        if fields.len() != n {
            return Err(err(
                fields.len().min(n).saturating_sub(1),
                format!("expected {shape}"),
            ));
        }
        Ok(())
    };
    let parse_f64 = |idx: usize, name: &str| -> Result<f64, CliError> {
        fields[idx]
            .parse::<f64>()
            .map_err(|_| err(idx, format!("{name} must be a number, got '{}'", fields[idx])))
    };
    let parse_usize = |idx: usize, name: &str| -> Result<usize, CliError> {
        fields[idx]
            .parse::<usize>()
            .map_err(|_| err(idx, format!("{name} must be a nonnegative integer, got '{}'", fields[idx])))
    };
    let unit_range = |idx: usize, name: &str, v: f64| -> Result<f64, CliError> {
        if !(0.0..=1.0).contains(&v) {
            return Err(err(idx, format!("{name} must lie in [0,1], got {v}")));
        }
        Ok(v)
    };
    match fields[0] {
        "gadc" => {
            want_len(3, "gadc:<gamma>:<noise>")?;
            let gamma = unit_range(1, "gamma", parse_f64(1, "gamma")?)?;
            let noise = unit_range(2, "noise", parse_f64(2, "noise")?)?;
            Ok(ChannelSpec::Gadc { gamma, noise })
        }
        "identity" => {
            want_len(2, "identity:<d>")?;
            let dim = parse_usize(1, "dimension")?;
            if dim < 1 {
                return Err(err(1, "dimension must be >= 1".into()));
            }
            Ok(ChannelSpec::Identity { dim })
        }
        "replace" => {
            want_len(3, "replace:<d>:<basis-index>")?;
            let dim = parse_usize(1, "dimension")?;
            let index = parse_usize(2, "basis index")?;
            if dim < 1 {
                return Err(err(1, "dimension must be >= 1".into()));
            }
            if index >= dim {
                return Err(err(2, format!("basis index {index} out of range for dimension {dim}")));
            }
            Ok(ChannelSpec::Replace { dim, index })
        }
        "random" => {
            want_len(4, "random:<dA>:<dB>:<seed>")?;
            let d_in = parse_usize(1, "input dimension")?;
            let d_out = parse_usize(2, "output dimension")?;
            if d_in < 1 || d_out < 1 {
                return Err(err(1, "dimensions must be >= 1".into()));
            }
            let seed = fields[3]
                .parse::<u64>()
                .map_err(|_| err(3, format!("seed must be an integer, got '{}'", fields[3])))?;
            Ok(ChannelSpec::Random { d_in, d_out, seed })
        }
        other => Err(err(0, format!("unknown channel kind '{other}'"))),
    }
}
