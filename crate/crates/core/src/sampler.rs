//! Finite-shot measurement of a statevector in Pauli product bases.
//!
//! Each measurement setting draws from its own ChaCha8 stream whose seed is
//! derived from `(master_seed, stream, index)` with a SplitMix64 finalizer, so
//! results do not depend on the order in which settings are processed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{apply_gate, GateSpec};
use crate::error::{Error, Result};
use crate::linalg::{bitstring_to_index, index_to_bitstring, StateVector};

pub const DEFAULT_SHOTS: u64 = 8192;
pub const DEFAULT_READOUT_FLIP: f64 = 0.02;

/// Stream tags for [`derive_seed`].
pub const STREAM_TOMOGRAPHY: u64 = 0;
pub const STREAM_CALIBRATION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn symbol(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Result<Self> {
        match c {
            'X' => Ok(Basis::X),
            'Y' => Ok(Basis::Y),
            'Z' => Ok(Basis::Z),
            other => Err(Error::Parse(format!("unknown basis '{other}'"))),
        }
    }
}

/// One measurement basis per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting {
    bases: Vec<Basis>,
}

impl MeasurementSetting {
    pub fn new(bases: Vec<Basis>) -> Self {
        Self { bases }
    }

    pub fn all_z(n_qubits: usize) -> Self {
        Self::new(vec![Basis::Z; n_qubits])
    }

    /// Inverse of [`MeasurementSetting::index`].
    pub fn from_index(mut index: usize, n_qubits: usize) -> Self {
        let mut bases = vec![Basis::X; n_qubits];
        for slot in bases.iter_mut().rev() {
            *slot = Basis::ALL[index % 3];
            index /= 3;
        }
        Self { bases }
    }

    /// Position in the lexicographic (X < Y < Z) enumeration, qubit 0 most significant.
    pub fn index(&self) -> usize {
        self.bases.iter().fold(0, |acc, b| acc * 3 + *b as usize)
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn n_qubits(&self) -> usize {
        self.bases.len()
    }

    pub fn label(&self) -> String {
        self.bases.iter().map(|b| b.symbol()).collect()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(Basis::from_symbol)
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

/// All `3^n` settings in lexicographic order.
pub fn enumerate_settings(n_qubits: usize) -> Vec<MeasurementSetting> {
    let total = 3usize.pow(n_qubits as u32);
    (0..total)
        .map(|i| MeasurementSetting::from_index(i, n_qubits))
        .collect()
}

/// Gates rotating each qubit's measurement basis onto Z: `H = U(π/2, 0, π)`
/// for X and `H·S† = U(π/2, 0, π/2)` for Y.
pub fn basis_rotation(setting: &MeasurementSetting) -> Vec<GateSpec> {
    setting
        .bases
        .iter()
        .enumerate()
        .filter_map(|(q, b)| match b {
            Basis::X => Some(GateSpec::u(PI / 2.0, 0.0, PI, q)),
            Basis::Y => Some(GateSpec::u(PI / 2.0, 0.0, PI / 2.0, q)),
            Basis::Z => None,
        })
        .collect()
}

/// Outcome distribution of measuring `psi` in `setting`, indexed by basis state.
pub fn exact_probabilities(psi: &StateVector, setting: &MeasurementSetting) -> Result<Vec<f64>> {
    if psi.n_qubits() != setting.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: psi.n_qubits(),
            actual: setting.n_qubits(),
        });
    }
    let mut rotated = psi.clone();
    for gate in basis_rotation(setting) {
        apply_gate(&mut rotated, &gate);
    }
    Ok(rotated.amplitudes().iter().map(|a| a.norm_sqr()).collect())
}

fn check_distribution(dist: &[f64]) -> Result<usize> {
    if dist.is_empty() || !dist.len().is_power_of_two() {
        return Err(Error::InvalidDistribution(format!(
            "length {} is not a power of two",
            dist.len()
        )));
    }
    if dist.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(dist.len().trailing_zeros() as usize)
}

/// Independent per-qubit readout confusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// p(read 1 | true 0), per qubit.
    pub p1_given0: Vec<f64>,
    /// p(read 0 | true 1), per qubit.
    pub p0_given1: Vec<f64>,
    /// Global depolarizing strength applied once per two-qubit gate before
    /// measurement. Zero in the default model.
    #[serde(default)]
    pub gate_depolarizing: f64,
}

impl NoiseModel {
    pub fn new(p1_given0: Vec<f64>, p0_given1: Vec<f64>) -> Result<Self> {
        if p1_given0.len() != p0_given1.len() {
            return Err(Error::DimensionMismatch {
                expected: p1_given0.len(),
                actual: p0_given1.len(),
            });
        }
        if p1_given0
            .iter()
            .chain(&p0_given1)
            .any(|p| !(0.0..0.5).contains(p))
        {
            return Err(Error::InvalidConfig(
                "readout flip probabilities must lie in [0, 0.5)".into(),
            ));
        }
        Ok(Self {
            p1_given0,
            p0_given1,
            gate_depolarizing: 0.0,
        })
    }

    pub fn symmetric(n_qubits: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n_qubits], vec![p; n_qubits])
    }

    pub fn noiseless(n_qubits: usize) -> Self {
        Self::symmetric(n_qubits, 0.0).expect("zero is in range")
    }

    pub fn with_gate_depolarizing(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig("depolarizing strength must lie in [0, 1]".into()));
        }
        self.gate_depolarizing = p;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.p1_given0.len()
    }

    pub fn is_noiseless(&self) -> bool {
        self.gate_depolarizing == 0.0
            && self.p1_given0.iter().chain(&self.p0_given1).all(|&p| p == 0.0)
    }
}

/// Applies the tensor product of the per-qubit column-stochastic confusion
/// matrices to `dist`.
pub fn apply_readout_noise(dist: &[f64], noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = check_distribution(dist)?;
    if noise.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: noise.n_qubits(),
        });
    }
    let mut out = dist.to_vec();
    for q in 0..n {
        let (e0, e1) = (noise.p1_given0[q], noise.p0_given1[q]);
        let mask = 1usize << (n - 1 - q);
        for i0 in (0..out.len()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (d0, d1) = (out[i0], out[i1]);
            out[i0] = (1.0 - e0) * d0 + e1 * d1;
            out[i1] = e0 * d0 + (1.0 - e1) * d1;
        }
    }
    Ok(out)
}

/// Mixes `dist` with the uniform distribution as if a global depolarizing
/// channel of strength `p` acted once per two-qubit gate.
pub fn apply_depolarizing(dist: &[f64], p: f64, two_qubit_gates: usize) -> Vec<f64> {
    let keep = (1.0 - p).powi(two_qubit_gates as i32);
    let uniform = (1.0 - keep) / dist.len() as f64;
    dist.iter().map(|&d| keep * d + uniform).collect()
}

/// SplitMix64 finalizer over `(master, stream, index)`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ stream) ^ index)
}

/// Measurement counts for one setting. Raw tables hold integers; mitigated
/// tables may hold non-integer quasi-counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    setting: MeasurementSetting,
    shots: u64,
    counts: Vec<f64>,
}

impl CountsTable {
    pub const SUM_TOL: f64 = 1e-6;

    pub fn new(setting: MeasurementSetting, shots: u64, counts: Vec<f64>) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        let expected = 1usize << setting.n_qubits();
        if counts.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: counts.len(),
            });
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite count".into()));
        }
        let total: f64 = counts.iter().sum();
        if (total - shots as f64).abs() > Self::SUM_TOL {
            return Err(Error::ShotMismatch {
                expected: shots as f64,
                actual: total,
            });
        }
        Ok(Self {
            setting,
            shots,
            counts,
        })
    }

    pub fn from_map(setting: MeasurementSetting, shots: u64, map: &BTreeMap<String, f64>) -> Result<Self> {
        let n = setting.n_qubits();
        let mut counts = vec![0.0; 1 << n];
        for (bits, &v) in map {
            if bits.len() != n {
                return Err(Error::Parse(format!("bitstring \"{bits}\" is not {n} bits long")));
            }
            counts[bitstring_to_index(bits)?] += v;
        }
        Self::new(setting, shots, counts)
    }

    pub fn setting(&self) -> &MeasurementSetting {
        &self.setting
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn n_qubits(&self) -> usize {
        self.setting.n_qubits()
    }

    /// Counts indexed by basis state.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn get(&self, bits: &str) -> f64 {
        bitstring_to_index(bits)
            .ok()
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let s = self.shots as f64;
        self.counts.iter().map(|c| c / s).collect()
    }

    /// Non-zero entries keyed by bitstring.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let n = self.n_qubits();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (index_to_bitstring(i, n), c))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CountsTableJson {
    setting: String,
    shots: u64,
    counts: BTreeMap<String, serde_json::Number>,
}

fn count_number(c: f64) -> serde_json::Number {
    if c.fract() == 0.0 && c < 9.0e15 {
        serde_json::Number::from(c as u64)
    } else {
        serde_json::Number::from_f64(c).expect("finite")
    }
}

impl Serialize for CountsTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CountsTableJson {
            setting: self.setting.label(),
            shots: self.shots,
            counts: self
                .to_map()
                .into_iter()
                .map(|(k, v)| (k, count_number(v)))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CountsTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = CountsTableJson::deserialize(deserializer)?;
        let setting: MeasurementSetting = raw.setting.parse().map_err(D::Error::custom)?;
        let map: BTreeMap<String, f64> = raw
            .counts
            .into_iter()
            .map(|(k, v)| (k, v.as_f64().unwrap_or(f64::NAN)))
            .collect();
        CountsTable::from_map(setting, raw.shots, &map).map_err(D::Error::custom)
    }
}

/// Multinomial draw of `shots` outcomes from `dist`, via sequential
/// conditional binomials on a ChaCha8 stream seeded with `seed`.
pub fn sample_counts(
    dist: &[f64],
    shots: u64,
    seed: u64,
    setting: MeasurementSetting,
) -> Result<CountsTable> {
    let n = check_distribution(dist)?;
    if n != setting.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: setting.n_qubits(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0.0; dist.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0f64;
    let last = dist.len() - 1;
    for (i, &p) in dist.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining_shots as f64;
            break;
        }
        let p = p.max(0.0);
        let cond = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if cond == 0.0 {
            0
        } else if cond == 1.0 {
            remaining_shots
        } else {
            Binomial::new(remaining_shots, cond)
                .expect("valid binomial parameters")
                .sample(&mut rng)
        };
        counts[i] = k as f64;
        remaining_shots -= k;
        remaining_mass -= p;
    }
    CountsTable::new(setting, shots, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> StateVector {
        let h = 0.5f64.sqrt();
        StateVector::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let s1: Vec<String> = enumerate_settings(1).iter().map(|s| s.label()).collect();
        assert_eq!(s1, ["X", "Y", "Z"]);
        let s2 = enumerate_settings(2);
        assert_eq!(s2.len(), 9);
        assert_eq!(s2[0].label(), "XX");
        assert_eq!(s2[1].label(), "XY");
        assert_eq!(s2[8].label(), "ZZ");
        assert_eq!(enumerate_settings(6).len(), 729);
        for (i, s) in enumerate_settings(3).iter().enumerate() {
            assert_eq!(s.index(), i);
        }
    }

    #[test]
    fn rotation_examples() {
        assert!(basis_rotation(&MeasurementSetting::all_z(4)).is_empty());

        let h = 0.5f64.sqrt();
        let plus = StateVector::new(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let p = exact_probabilities(&plus, &"X".parse().unwrap()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15);

        let plus_i = StateVector::new(vec![c(h, 0.0), c(0.0, h)]).unwrap();
        let p = exact_probabilities(&plus_i, &"Y".parse().unwrap()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15, "{p:?}");
        let minus_i = StateVector::new(vec![c(h, 0.0), c(0.0, -h)]).unwrap();
        let p = exact_probabilities(&minus_i, &"Y".parse().unwrap()).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn y_rotation_matrix_is_h_sdg() {
        let gates = basis_rotation(&"Y".parse().unwrap());
        let h = 0.5f64.sqrt();
        let expected = crate::linalg::ComplexMatrix::from_rows(&[
            vec![c(h, 0.0), c(0.0, -h)],
            vec![c(h, 0.0), c(0.0, h)],
        ])
        .unwrap();
        assert!(gates[0].matrix().sub(&expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn exact_probability_examples() {
        let p = exact_probabilities(&bell(), &"ZZ".parse().unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        let p = exact_probabilities(&bell(), &"XX".parse().unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        assert!(p[1].abs() < 1e-15 && p[2].abs() < 1e-15);
        let p = exact_probabilities(&StateVector::zero(2), &"ZZ".parse().unwrap()).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(exact_probabilities(&bell(), &"Z".parse().unwrap()).is_err());
    }

    #[test]
    fn readout_noise_examples() {
        let d = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(apply_readout_noise(&d, &NoiseModel::noiseless(2)).unwrap(), d);

        let noise = NoiseModel::new(vec![0.02], vec![0.0]).unwrap();
        let out = apply_readout_noise(&[1.0, 0.0], &noise).unwrap();
        assert!((out[0] - 0.98).abs() < 1e-15 && (out[1] - 0.02).abs() < 1e-15);

        let out = apply_readout_noise(&[1.0, 0.0, 0.0, 0.0], &NoiseModel::symmetric(2, 0.1).unwrap()).unwrap();
        for (o, e) in out.iter().zip([0.81, 0.09, 0.09, 0.01]) {
            assert!((o - e).abs() < 1e-12);
        }
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::symmetric(2, 0.5).is_err());
        assert!(NoiseModel::symmetric(2, -0.1).is_err());
        assert!(NoiseModel::new(vec![0.1], vec![0.1, 0.1]).is_err());
        assert!(NoiseModel::noiseless(3).is_noiseless());
    }

    #[test]
    fn depolarizing_hook() {
        let d = apply_depolarizing(&[1.0, 0.0, 0.0, 0.0], 0.1, 2);
        let keep = 0.81;
        assert!((d[0] - (keep + 0.19 / 4.0)).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(apply_depolarizing(&[0.5, 0.5], 0.3, 0), vec![0.5, 0.5]);
    }

    #[test]
    fn sampling_examples() {
        let s = MeasurementSetting::all_z(2);
        let t = sample_counts(&[1.0, 0.0, 0.0, 0.0], 8192, 3, s.clone()).unwrap();
        assert_eq!(t.get("00"), 8192.0);
        let dist = [0.1, 0.2, 0.3, 0.4];
        let a = sample_counts(&dist, 8192, 99, s.clone()).unwrap();
        let b = sample_counts(&dist, 8192, 99, s.clone()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts().iter().sum::<f64>(), 8192.0);
        let c = sample_counts(&dist, 8192, 100, s).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fair_coin_within_five_sigma() {
        let sigma = (8192.0f64 * 0.25).sqrt();
        let setting = MeasurementSetting::all_z(1);
        let mut failures = 0;
        for seed in 0..1000u64 {
            let t = sample_counts(&[0.5, 0.5], 8192, seed, setting.clone()).unwrap();
            if (t.get("0") - 4096.0).abs() >= 5.0 * sigma {
                failures += 1;
            }
        }
        assert_eq!(failures, 0);
    }

    #[test]
    fn seeds_are_distinct_per_setting() {
        let seeds: std::collections::HashSet<u64> =
            (0..729).map(|i| derive_seed(7, STREAM_TOMOGRAPHY, i)).collect();
        assert_eq!(seeds.len(), 729);
        assert_ne!(derive_seed(7, STREAM_TOMOGRAPHY, 0), derive_seed(7, STREAM_CALIBRATION, 0));
        assert_ne!(derive_seed(7, 0, 1), derive_seed(8, 0, 1));
    }

    #[test]
    fn counts_json_schema() {
        let t = CountsTable::new("XZ".parse().unwrap(), 10, vec![4.0, 0.0, 6.0, 0.0]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"setting":"XZ","shots":10,"counts":{"00":4,"10":6}}"#);
        let back: CountsTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);

        let q = CountsTable::new("Z".parse().unwrap(), 10, vec![9.5, 0.5]).unwrap();
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"{"setting":"Z","shots":10,"counts":{"0":9.5,"1":0.5}}"#);
    }

    #[test]
    fn counts_validation() {
        let s = MeasurementSetting::all_z(1);
        assert!(matches!(
            CountsTable::new(s.clone(), 10, vec![4.0, 5.0]),
            Err(Error::ShotMismatch { .. })
        ));
        assert!(CountsTable::new(s.clone(), 10, vec![4.0, 5.0, 1.0]).is_err());
        assert!(CountsTable::new(s, 0, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn sampling_rejects_bad_distribution() {
        let s = MeasurementSetting::all_z(1);
        assert!(sample_counts(&[0.5, 0.4], 10, 0, s.clone()).is_err());
        assert!(sample_counts(&[0.5, 0.5, 0.0], 10, 0, s.clone()).is_err());
        assert!(sample_counts(&[0.5, 0.5], 0, 0, s).is_err());
    }
}
