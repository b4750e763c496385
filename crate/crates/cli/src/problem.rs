//! Problem file schema, version "chanrev/1", and its conversion into
//! library types. Matrices are row-major lists of [re, im] pairs so that
//! fixtures stay diffable.

use std::collections::BTreeMap;

use chanrev::channels::{Channel, DensityOperator};
use chanrev::reversibility::{matrix_entries, CheckOptions};
use chanrev::{c64, CMatrix};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = "chanrev/1";
pub const REFERENCE_STATE: &str = "rho";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    /// Named states; "rho" is the reference and must be present. Every
    /// other entry belongs to the family being tested.
    pub states: BTreeMap<String, MatrixRecord>,
    pub channel: ChannelRecord,
    #[serde(default)]
    pub options: OptionPatch,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub dim: usize,
    /// Row-major [re, im] pairs, dim * dim of them.
    pub data: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelRecord {
    Kraus {
        in_dim: usize,
        out_dim: usize,
        /// Each operator is out_dim x in_dim, row-major.
        kraus: Vec<Vec<[f64; 2]>>,
    },
    Choi {
        in_dim: usize,
        out_dim: usize,
        /// (in_dim * out_dim) square, row-major.
        data: Vec<[f64; 2]>,
    },
    Super {
        in_dim: usize,
        out_dim: usize,
        /// out_dim^2 x in_dim^2, row-major, acting on row-major
        /// vectorizations.
        data: Vec<[f64; 2]>,
    },
}

/// Optional overrides applied on top of the library defaults; absent fields
/// keep the default. Command line flags override the file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionPatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hold_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fail_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_powers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modular_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_copy_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensor_size_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_support: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl OptionPatch {
    pub fn apply(&self, base: &mut CheckOptions) {
        macro_rules! put {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { base.$field = v.clone(); })*
            };
        }
        put!(
            hold_tol, fail_tol, t_grid, s_powers, r_grid, modular_grid, n_copy_cap,
            tensor_size_cap, seed, samples, strict_support, threads
        );
        if self.s0.is_some() {
            base.s0 = self.s0;
        }
    }
}

/// Problem contents after validation.
pub struct LoadedProblem {
    pub channel: Channel,
    pub rho: DensityOperator,
    /// Family members in name order, reference excluded.
    pub family: Vec<(String, DensityOperator)>,
    pub options: CheckOptions,
}

fn entries_to_matrix(
    rows: usize,
    cols: usize,
    data: &[[f64; 2]],
    what: &str,
) -> Result<CMatrix, String> {
    if data.len() != rows * cols {
        return Err(format!(
            "{what}: expected {rows}x{cols} = {} entries, found {}",
            rows * cols,
            data.len()
        ));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (k, e) in data.iter().enumerate() {
        if !e[0].is_finite() || !e[1].is_finite() {
            return Err(format!("{what}: entry {k} is not finite"));
        }
        m[(k / cols, k % cols)] = c64(e[0], e[1]);
    }
    Ok(m)
}

pub fn record_from_matrix(m: &CMatrix) -> MatrixRecord {
    MatrixRecord {
        dim: m.rows(),
        data: matrix_entries(m).into_iter().flatten().collect(),
    }
}

pub fn record_from_channel(ch: &Channel) -> ChannelRecord {
    if let Some(kraus) = ch.kraus() {
        ChannelRecord::Kraus {
            in_dim: ch.in_dim(),
            out_dim: ch.out_dim(),
            kraus: kraus
                .iter()
                .map(|k| matrix_entries(k).into_iter().flatten().collect())
                .collect(),
        }
    } else {
        ChannelRecord::Super {
            in_dim: ch.in_dim(),
            out_dim: ch.out_dim(),
            data: matrix_entries(ch.super_matrix())
                .into_iter()
                .flatten()
                .collect(),
        }
    }
}

impl ProblemFile {
    pub fn build(&self) -> Result<LoadedProblem, String> {
        if self.version != VERSION {
            return Err(format!(
                "unsupported version {:?}, this build reads {VERSION:?}",
                self.version
            ));
        }
        let channel = match &self.channel {
            ChannelRecord::Kraus {
                in_dim,
                out_dim,
                kraus,
            } => {
                if kraus.is_empty() {
                    return Err("channel: empty Kraus family".into());
                }
                let mut ops = Vec::with_capacity(kraus.len());
                for (i, k) in kraus.iter().enumerate() {
                    ops.push(entries_to_matrix(
                        *out_dim,
                        *in_dim,
                        k,
                        &format!("channel: Kraus operator {i}"),
                    )?);
                }
                Channel::from_kraus(ops).map_err(|e| format!("channel: {e}"))?
            }
            ChannelRecord::Choi {
                in_dim,
                out_dim,
                data,
            } => {
                let side = in_dim * out_dim;
                let m = entries_to_matrix(side, side, data, "channel: Choi matrix")?;
                Channel::from_choi(m, *in_dim, *out_dim).map_err(|e| format!("channel: {e}"))?
            }
            ChannelRecord::Super {
                in_dim,
                out_dim,
                data,
            } => {
                let m = entries_to_matrix(
                    out_dim * out_dim,
                    in_dim * in_dim,
                    data,
                    "channel: superoperator",
                )?;
                Channel::from_super(m, *in_dim, *out_dim).map_err(|e| format!("channel: {e}"))?
            }
        };

        let mut rho = None;
        let mut family = Vec::new();
        for (name, rec) in &self.states {
            let m = entries_to_matrix(rec.dim, rec.dim, &rec.data, &format!("state {name:?}"))?;
            let state =
                DensityOperator::new(m).map_err(|e| format!("state {name:?}: {e}"))?;
            if state.dim() != channel.in_dim() {
                return Err(format!(
                    "state {name:?} has dim {}, channel expects {}",
                    state.dim(),
                    channel.in_dim()
                ));
            }
            if name == REFERENCE_STATE {
                rho = Some(state);
            } else {
                family.push((name.clone(), state));
            }
        }
        let rho = rho.ok_or_else(|| format!("states: no {REFERENCE_STATE:?} entry"))?;

        let mut options = CheckOptions::default();
        self.options.apply(&mut options);
        Ok(LoadedProblem {
            channel,
            rho,
            family,
            options,
        })
    }
}
