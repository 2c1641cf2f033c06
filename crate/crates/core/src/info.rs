//! Mutual information, Holevo quantity and discord between the system qubit
//! (qubit 0) and fragments of the environment (qubits 1..=N).
//!
//! Conditioning is always a Z measurement of the system qubit, and discord is
//! the basis-specific difference `I − χ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, partial_trace_matrix, von_neumann_entropy, ComplexMatrix, DensityMatrix,
    EntropyMode,
};

/// Branches with probability at or below this are dropped from conditioning.
pub const BRANCH_CUTOFF: f64 = 1e-12;

/// An ordered subset of environment qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentSpec {
    indices: Vec<usize>,
}

impl FragmentSpec {
    pub fn new(indices: Vec<usize>, n_env: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = vec![false; n_env + 1];
        for &i in &indices {
            if i == 0 || i > n_env {
                return Err(Error::QubitOutOfRange {
                    index: i,
                    n_qubits: n_env + 1,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateQubit(i));
            }
        }
        Ok(Self { indices })
    }

    pub fn whole_environment(n_env: usize) -> Self {
        Self {
            indices: (1..=n_env).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_rho(rho: &DensityMatrix, fragment: &FragmentSpec) -> Result<usize> {
    let n = rho.n_qubits();
    if n < 2 || rho.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    if let Some(&bad) = fragment.indices.iter().find(|&&i| i >= n) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            n_qubits: n,
        });
    }
    Ok(n)
}

/// `I(S:F) = H(ρ_S) + H(ρ_F) − H(ρ_SF)` in bits.
pub fn mutual_information(rho: &DensityMatrix, fragment: &FragmentSpec, mode: EntropyMode) -> Result<f64> {
    let n = check_rho(rho, fragment)?;
    let mut sf = vec![0];
    sf.extend_from_slice(&fragment.indices);
    let h_s = von_neumann_entropy(&partial_trace(rho, &[0], n)?, mode)?;
    let h_f = von_neumann_entropy(&partial_trace(rho, &fragment.indices, n)?, mode)?;
    let h_sf = von_neumann_entropy(&partial_trace(rho, &sf, n)?, mode)?;
    Ok(h_s + h_f - h_sf)
}

/// Fragment states conditioned on the system qubit reading 0 or 1.
#[derive(Debug, Clone)]
pub struct ConditionalStates {
    pub p0: f64,
    pub p1: f64,
    /// `None` when the branch probability is at or below [`BRANCH_CUTOFF`].
    pub rho_given0: Option<DensityMatrix>,
    pub rho_given1: Option<DensityMatrix>,
}

impl ConditionalStates {
    fn branches(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        [(self.p0, self.rho_given0.as_ref()), (self.p1, self.rho_given1.as_ref())]
            .into_iter()
            .filter_map(|(p, r)| r.map(|r| (p, r)))
    }
}

pub fn conditional_env_states(rho: &DensityMatrix, fragment: &FragmentSpec) -> Result<ConditionalStates> {
    let n = check_rho(rho, fragment)?;
    let env_n = n - 1;
    let env_dim = 1usize << env_n;
    let env_keep: Vec<usize> = fragment.indices.iter().map(|i| i - 1).collect();
    let m = rho.matrix();

    let branch = |s: usize| -> Result<(f64, Option<DensityMatrix>)> {
        // (Π_s ⊗ I) ρ (Π_s ⊗ I) restricted to the environment block
        let mut block = ComplexMatrix::zeros(env_dim);
        for i in 0..env_dim {
            for j in 0..env_dim {
                block[(i, j)] = m[(s * env_dim + i, s * env_dim + j)];
            }
        }
        let p = block.trace().re;
        if p <= BRANCH_CUTOFF {
            return Ok((p.max(0.0), None));
        }
        let reduced = partial_trace_matrix(&block, &env_keep, env_n)?;
        let scaled = reduced.scale((1.0 / p).into()).hermitian_part();
        Ok((p, Some(DensityMatrix::from_parts_unchecked(scaled, rho.is_physical()))))
    };
    let (p0, rho_given0) = branch(0)?;
    let (p1, rho_given1) = branch(1)?;
    if rho_given0.is_none() && rho_given1.is_none() {
        return Err(Error::DegenerateConditioning);
    }
    Ok(ConditionalStates {
        p0,
        p1,
        rho_given0,
        rho_given1,
    })
}

/// `χ = H(Σ_s p_s ρ_{F|s}) − Σ_s p_s H(ρ_{F|s})` in bits.
pub fn holevo(rho: &DensityMatrix, fragment: &FragmentSpec, mode: EntropyMode) -> Result<f64> {
    let cond = conditional_env_states(rho, fragment)?;
    let dim = 1usize << fragment.len();
    let mut mixture = ComplexMatrix::zeros(dim);
    let mut average = 0.0;
    for (p, r) in cond.branches() {
        mixture = mixture.add(&r.matrix().scale(p.into()));
        average += p * von_neumann_entropy(r, mode)?;
    }
    let mixture = DensityMatrix::from_parts_unchecked(mixture, rho.is_physical());
    Ok(von_neumann_entropy(&mixture, mode)? - average)
}

/// `D = I − χ`
pub fn discord(rho: &DensityMatrix, fragment: &FragmentSpec, mode: EntropyMode) -> Result<f64> {
    Ok(mutual_information(rho, fragment, mode)? - holevo(rho, fragment, mode)?)
}

/// Where the analyzed state came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Theoretical,
    /// Reconstructed from unmitigated counts.
    Raw,
    Mitigated,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Theoretical => "theoretical",
            Source::Raw => "raw",
            Source::Mitigated => "mitigated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoRow {
    pub fragment_size: usize,
    pub fragment_fraction: f64,
    pub fragment: Vec<usize>,
    pub mi: f64,
    pub holevo: f64,
    pub discord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub source: Source,
    pub mode: EntropyMode,
    /// Short description such as `"4B"`.
    pub config: String,
    pub seed: Option<u64>,
    pub ordering: Vec<usize>,
    pub rows: Vec<InfoRow>,
    pub fidelity: Option<f64>,
    pub purity: Option<f64>,
    pub clipped_mass: Option<f64>,
    /// Set when any row has MI below zero (possible only in raw mode).
    pub has_negative_mi: bool,
}

/// Information quantities on the cumulative prefixes of `ordering`.
pub fn fragment_sweep(rho: &DensityMatrix, ordering: &[usize], mode: EntropyMode) -> Result<Vec<InfoRow>> {
    let n_env = rho.n_qubits().saturating_sub(1);
    let full = FragmentSpec::new(ordering.to_vec(), n_env)?;
    if full.len() != n_env {
        return Err(Error::InvalidConfig(format!(
            "ordering must be a permutation of 1..={n_env}"
        )));
    }
    (1..=n_env)
        .map(|f| {
            let fragment = FragmentSpec::new(ordering[..f].to_vec(), n_env)?;
            let mi = mutual_information(rho, &fragment, mode)?;
            let chi = holevo(rho, &fragment, mode)?;
            Ok(InfoRow {
                fragment_size: f,
                fragment_fraction: f as f64 / n_env as f64,
                fragment: fragment.indices,
                mi,
                holevo: chi,
                discord: mi - chi,
            })
        })
        .collect()
}
