//! U / controlled-U gates, the Darwinism circuit, and exact statevector evolution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// Default upper bound on register width. Tomography cost grows as 3^n, so
/// this is a guard against accidental huge runs rather than a simulator limit.
pub const DEFAULT_QUBIT_CAP: usize = 7;

/// `U(θ, φ, λ)` as a 2×2 matrix.
pub fn u_gate_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = |x: f64| Complex64::from_polar(1.0, x);
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(c, 0.0), -e(lambda) * s],
        vec![e(phi) * s, e(phi + lambda) * c],
    ])
    .expect("2x2")
}

/// Controlled `e^{iγ} U(θ, φ, λ)`; the control is the first tensor factor.
pub fn cu_gate_matrix(theta: f64, phi: f64, lambda: f64, gamma: f64) -> ComplexMatrix {
    let u = u_gate_matrix(theta, phi, lambda);
    let g = Complex64::from_polar(1.0, gamma);
    let mut m = ComplexMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = g * u[(i, j)];
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GateSpec {
    U1Q {
        theta: f64,
        phi: f64,
        lambda: f64,
        target: usize,
    },
    CU2Q {
        theta: f64,
        phi: f64,
        lambda: f64,
        gamma: f64,
        control: usize,
        target: usize,
    },
}

impl GateSpec {
    pub fn u(theta: f64, phi: f64, lambda: f64, target: usize) -> Self {
        GateSpec::U1Q {
            theta,
            phi,
            lambda,
            target,
        }
    }

    pub fn cu(theta: f64, phi: f64, lambda: f64, gamma: f64, control: usize, target: usize) -> Self {
        GateSpec::CU2Q {
            theta,
            phi,
            lambda,
            gamma,
            control,
            target,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match *self {
            GateSpec::U1Q {
                theta, phi, lambda, ..
            } => u_gate_matrix(theta, phi, lambda),
            GateSpec::CU2Q {
                theta,
                phi,
                lambda,
                gamma,
                ..
            } => cu_gate_matrix(theta, phi, lambda, gamma),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateSpec::CU2Q { .. })
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            GateSpec::U1Q { target, .. } if target >= n_qubits => Err(Error::InvalidGate(format!(
                "target {target} out of range for {n_qubits} qubits"
            ))),
            GateSpec::CU2Q { control, target, .. } => {
                if control == target {
                    Err(Error::InvalidGate(format!("control and target are both {target}")))
                } else if control.max(target) >= n_qubits {
                    Err(Error::InvalidGate(format!(
                        "indices ({control}, {target}) out of range for {n_qubits} qubits"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        c.extend(gates)?;
        Ok(c)
    }

    pub fn push(&mut self, gate: GateSpec) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = GateSpec>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

/// Interaction-strength variant of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            other => Err(Error::InvalidConfig(format!("unknown variant \"{other}\""))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
        })
    }
}

/// Coupling angles θ_i for the 2- to 6-qubit experiments.
pub fn interaction_strengths(qubits: usize, variant: Variant) -> Result<Vec<f64>> {
    const WEAK: f64 = 2.0 * PI / 5.0;
    const MID: f64 = 5.0 * PI / 9.0;
    if !(2..=6).contains(&qubits) {
        return Err(Error::InvalidConfig(format!(
            "no interaction strengths for a {qubits}-qubit case (expected 2..=6)"
        )));
    }
    let n_env = qubits - 1;
    Ok(match variant {
        Variant::A => vec![PI; n_env],
        Variant::B => match n_env {
            1 => vec![WEAK],
            n => {
                let mut v = vec![PI; n - 2];
                v.extend([WEAK, MID]);
                v
            }
        },
    })
}

/// One system qubit coupled to `interaction_strengths.len()` environment qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarwinismConfig {
    pub theta_system: f64,
    pub interaction_strengths: Vec<f64>,
}

impl DarwinismConfig {
    pub fn new(theta_system: f64, interaction_strengths: Vec<f64>) -> Result<Self> {
        Self::with_qubit_cap(theta_system, interaction_strengths, DEFAULT_QUBIT_CAP)
    }

    pub fn with_qubit_cap(
        theta_system: f64,
        interaction_strengths: Vec<f64>,
        max_qubits: usize,
    ) -> Result<Self> {
        if interaction_strengths.is_empty() {
            return Err(Error::InvalidConfig("at least one environment qubit is required".into()));
        }
        if interaction_strengths.len() + 1 > max_qubits {
            return Err(Error::InvalidConfig(format!(
                "{} qubits exceeds the cap of {max_qubits}",
                interaction_strengths.len() + 1
            )));
        }
        if !theta_system.is_finite() || interaction_strengths.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("angles must be finite".into()));
        }
        Ok(Self {
            theta_system,
            interaction_strengths,
        })
    }

    /// θ_S = π/2 with the tabulated couplings.
    pub fn standard(qubits: usize, variant: Variant) -> Result<Self> {
        Self::new(PI / 2.0, interaction_strengths(qubits, variant)?)
    }

    pub fn n_env(&self) -> usize {
        self.interaction_strengths.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_env() + 1
    }

    /// System amplitudes `(α, β) = (cos θ_S/2, sin θ_S/2)`.
    pub fn system_amplitudes(&self) -> (f64, f64) {
        let (s, c) = (self.theta_system / 2.0).sin_cos();
        (c, s)
    }
}

/// `U(θ_S,0,0)` on qubit 0, then `cU(θ_i,0,0,0)` from qubit 0 onto each
/// environment qubit in ascending order.
pub fn build_darwinism_circuit(cfg: &DarwinismConfig) -> Circuit {
    let mut gates = vec![GateSpec::u(cfg.theta_system, 0.0, 0.0, 0)];
    gates.extend(
        cfg.interaction_strengths
            .iter()
            .enumerate()
            .map(|(i, &theta)| GateSpec::cu(theta, 0.0, 0.0, 0.0, 0, i + 1)),
    );
    Circuit::with_gates(cfg.n_qubits(), gates).expect("indices are in range by construction")
}

pub fn simulate_statevector(circuit: &Circuit) -> StateVector {
    simulate_from(circuit, StateVector::zero(circuit.n_qubits()))
}

pub fn simulate_from(circuit: &Circuit, initial: StateVector) -> StateVector {
    assert_eq!(initial.n_qubits(), circuit.n_qubits(), "register width mismatch");
    let mut state = initial;
    for gate in circuit.gates() {
        apply_gate(&mut state, gate);
    }
    state
}

pub(crate) fn apply_gate(state: &mut StateVector, gate: &GateSpec) {
    let n = state.n_qubits();
    let m = gate.matrix();
    match *gate {
        GateSpec::U1Q { target, .. } => apply_1q(state.amplitudes_mut(), n, target, &m),
        GateSpec::CU2Q { control, target, .. } => {
            apply_2q(state.amplitudes_mut(), n, control, target, &m)
        }
    }
}

fn apply_1q(amps: &mut [Complex64], n: usize, target: usize, m: &ComplexMatrix) {
    let mask = 1usize << (n - 1 - target);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
        amps[i1] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
    }
}

// `first` is the more significant factor of the 4×4 matrix.
fn apply_2q(amps: &mut [Complex64], n: usize, first: usize, second: usize, m: &ComplexMatrix) {
    let m1 = 1usize << (n - 1 - first);
    let m2 = 1usize << (n - 1 - second);
    for base in 0..amps.len() {
        if base & (m1 | m2) != 0 {
            continue;
        }
        let idx = [base, base | m2, base | m1, base | m1 | m2];
        let old = idx.map(|i| amps[i]);
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = (0..4).map(|c| m[(r, c)] * old[c]).sum();
        }
    }
}

/// Closed-form amplitudes of the Darwinism state.
pub fn theoretical_state(cfg: &DarwinismConfig) -> StateVector {
    let n = cfg.n_qubits();
    let n_env = cfg.n_env();
    let (alpha, beta) = cfg.system_amplitudes();
    let branch: Vec<(f64, f64)> = cfg
        .interaction_strengths
        .iter()
        .map(|t| {
            let (s, c) = (t / 2.0).sin_cos();
            (c, s)
        })
        .collect();
    let env_dim = 1usize << n_env;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[0] = Complex64::new(alpha, 0.0);
    for env in 0..env_dim {
        let amp = branch.iter().enumerate().fold(beta, |acc, (i, &(c, s))| {
            let bit = (env >> (n_env - 1 - i)) & 1;
            acc * if bit == 1 { s } else { c }
        });
        amps[env_dim + env] = Complex64::new(amp, 0.0);
    }
    StateVector::from_raw_parts(n, amps)
}
