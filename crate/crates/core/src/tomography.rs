//! Pauli tomography by linear inversion, physical projection, and tensored
//! readout-error mitigation.
//!
//! A Pauli label assigns one of I, X, Y, Z to every qubit. Its expectation is
//! estimated from any setting that measures the non-identity positions in the
//! matching basis; identity positions are marginalized by dropping their
//! outcome bit from the parity. A label containing `k` identities is covered by
//! `3^k` settings and the estimate is the mean over all of them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, DensityMatrix, Pauli, HERMITIAN_TOL};
use crate::sampler::{Basis, CountsTable, MeasurementSetting};

/// Allowed excursion of raw-count Stokes values beyond ±1.
pub const STOKES_SLACK: f64 = 0.05;

fn basis_pauli(b: Basis) -> Pauli {
    match b {
        Basis::X => Pauli::X,
        Basis::Y => Pauli::Y,
        Basis::Z => Pauli::Z,
    }
}

/// Index of a Pauli label in base 4 (I=0, X=1, Y=2, Z=3), qubit 0 most significant.
pub fn label_index(label: &[Pauli]) -> usize {
    label.iter().fold(0, |acc, p| acc * 4 + *p as usize)
}

pub fn label_from_index(mut index: usize, n_qubits: usize) -> Vec<Pauli> {
    let mut out = vec![Pauli::I; n_qubits];
    for slot in out.iter_mut().rev() {
        *slot = Pauli::ALL[index % 4];
        index /= 4;
    }
    out
}

pub fn label_string(label: &[Pauli]) -> String {
    label.iter().map(|p| p.symbol()).collect()
}

pub fn parse_label(s: &str) -> Result<Vec<Pauli>> {
    s.chars().map(Pauli::from_symbol).collect()
}

/// Dense matrix of a Pauli string. Uses `σ|c⟩ = i^{#Y} (-1)^{|c ∧ z|} |c ⊕ x⟩`.
pub fn pauli_string_matrix(label: &[Pauli]) -> ComplexMatrix {
    let n = label.len();
    let (mut xmask, mut zmask, mut n_y) = (0usize, 0usize, 0u32);
    for (q, p) in label.iter().enumerate() {
        let bit = 1usize << (n - 1 - q);
        match p {
            Pauli::I => {}
            Pauli::X => xmask |= bit,
            Pauli::Y => {
                xmask |= bit;
                zmask |= bit;
                n_y += 1;
            }
            Pauli::Z => zmask |= bit,
        }
    }
    let phase = Complex64::new(0.0, 1.0).powu(n_y);
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let sign = if (col & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[(col ^ xmask, col)] = phase * sign;
    }
    m
}

/// Expectation of the parity of the outcome bits selected by `mask`:
/// `Σ_b (-1)^{|b ∧ mask|} P(b)`. Bits outside the mask are summed over with a
/// plus sign.
pub fn parity_expectation(probs: &[f64], mask: usize) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(b, p)| if (b & mask).count_ones().is_multiple_of(2) { *p } else { -*p })
        .sum()
}

/// All `2^n` parity expectations at once (fast Walsh–Hadamard transform).
fn all_parity_expectations(probs: &[f64]) -> Vec<f64> {
    let mut v = probs.to_vec();
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    v
}

/// Expectation values for all `4^n` Pauli labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesTable {
    n_qubits: usize,
    values: Vec<f64>,
}

impl StokesTable {
    pub fn from_values(n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        let expected = 1usize << (2 * n_qubits);
        if values.len() != expected {
            return Err(Error::IncompleteStokes(format!(
                "{} of {expected} labels present",
                values.len()
            )));
        }
        Ok(Self { n_qubits, values })
    }

    /// Missing labels are an error.
    pub fn from_map(n_qubits: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        let total = 1usize << (2 * n_qubits);
        let mut values = vec![f64::NAN; total];
        for (label, &v) in map {
            let parsed = parse_label(label)?;
            if parsed.len() != n_qubits {
                return Err(Error::Parse(format!("label \"{label}\" is not {n_qubits} long")));
            }
            values[label_index(&parsed)] = v;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::IncompleteStokes(format!(
                "missing label {}",
                label_string(&label_from_index(missing, n_qubits))
            )));
        }
        Ok(Self { n_qubits, values })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        let parsed = parse_label(label).ok()?;
        if parsed.len() != self.n_qubits {
            return None;
        }
        self.values.get(label_index(&parsed)).copied()
    }

    /// Largest `|S|` over the non-identity labels.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().skip(1).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (label_string(&label_from_index(i, self.n_qubits)), v))
            .collect()
    }
}

impl Serialize for StokesTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(serializer)
    }
}

/// Estimates every Pauli expectation from a complete set of `3^n` settings.
pub fn stokes_from_counts(all_counts: &[CountsTable], n_qubits: usize) -> Result<StokesTable> {
    let n_settings = 3usize.pow(n_qubits as u32);
    let mut by_setting: Vec<Option<&CountsTable>> = vec![None; n_settings];
    let shots = all_counts.first().map(|t| t.shots()).unwrap_or(0);
    for table in all_counts {
        if table.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                actual: table.n_qubits(),
            });
        }
        if table.shots() != shots {
            return Err(Error::ShotMismatch {
                expected: shots as f64,
                actual: table.shots() as f64,
            });
        }
        let slot = &mut by_setting[table.setting().index()];
        if slot.is_some() {
            return Err(Error::DuplicateSetting(table.setting().label()));
        }
        *slot = Some(table);
    }
    if let Some(missing) = by_setting.iter().position(Option::is_none) {
        return Err(Error::MissingSetting(
            MeasurementSetting::from_index(missing, n_qubits).label(),
        ));
    }

    let per_setting: Vec<Vec<f64>> = by_setting
        .par_iter()
        .map(|t| all_parity_expectations(&t.expect("checked above").probabilities()))
        .collect();

    let n_labels = 1usize << (2 * n_qubits);
    let mut sums = vec![0.0; n_labels];
    let mut hits = vec![0u32; n_labels];
    for (s, expectations) in per_setting.iter().enumerate() {
        let setting = MeasurementSetting::from_index(s, n_qubits);
        for (mask, &e) in expectations.iter().enumerate() {
            let label: Vec<Pauli> = setting
                .bases()
                .iter()
                .enumerate()
                .map(|(q, &b)| {
                    if mask & (1 << (n_qubits - 1 - q)) != 0 {
                        basis_pauli(b)
                    } else {
                        Pauli::I
                    }
                })
                .collect();
            let li = label_index(&label);
            sums[li] += e;
            hits[li] += 1;
        }
    }
    let mut values: Vec<f64> = sums
        .iter()
        .zip(&hits)
        .map(|(s, &h)| s / f64::from(h))
        .collect();
    values[0] = 1.0;
    StokesTable::from_values(n_qubits, values)
}

/// `ρ = 2^{-n} Σ_label S_label · σ_label`
pub fn reconstruct_linear_inversion(stokes: &StokesTable) -> Result<ComplexMatrix> {
    let n = stokes.n_qubits;
    if stokes.values.len() != 1usize << (2 * n) {
        return Err(Error::IncompleteStokes(format!(
            "{} labels for {n} qubits",
            stokes.values.len()
        )));
    }
    let dim = 1usize << n;
    let norm = 1.0 / dim as f64;
    let mut rho = ComplexMatrix::zeros(dim);
    for (li, &s) in stokes.values.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let label = label_from_index(li, n);
        let (mut xmask, mut zmask, mut n_y) = (0usize, 0usize, 0u32);
        for (q, p) in label.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => xmask |= bit,
                Pauli::Y => {
                    xmask |= bit;
                    zmask |= bit;
                    n_y += 1;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        let phase = Complex64::new(0.0, 1.0).powu(n_y) * (s * norm);
        for col in 0..dim {
            let v = if (col & zmask).count_ones() % 2 == 0 { phase } else { -phase };
            rho[(col ^ xmask, col)] += v;
        }
    }
    Ok(rho)
}

/// Nearest density matrix in Frobenius norm: clip negative eigenvalues and
/// spread the removed mass evenly over the remaining ones, smallest first,
/// repeating while that pushes further eigenvalues below zero.
pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eig(raw)?;
    let mut lambdas = clip_spectrum(&eig.values);
    let total: f64 = lambdas.iter().sum();
    if total > 0.0 {
        lambdas.iter_mut().for_each(|l| *l /= total);
    }
    let projected = crate::linalg::Eigen {
        values: lambdas,
        vectors: eig.vectors,
    }
    .reconstruct_with(|l| l)
    .hermitian_part();
    Ok(DensityMatrix::from_parts_unchecked(projected, true))
}

/// `values` ascending; returns the clipped spectrum in the same order.
fn clip_spectrum(values: &[f64]) -> Vec<f64> {
    let d = values.len();
    let mut out = vec![0.0; d];
    // walk from the smallest eigenvalue; `remaining` = count of candidates left
    let mut deficit = 0.0;
    let mut first_kept = 0;
    for (k, &v) in values.iter().enumerate() {
        let remaining = (d - k) as f64;
        if v + deficit / remaining < 0.0 {
            deficit += v;
            first_kept = k + 1;
        } else {
            break;
        }
    }
    if first_kept == d {
        return out;
    }
    let share = deficit / (d - first_kept) as f64;
    for k in first_kept..d {
        out[k] = values[k] + share;
    }
    out
}

/// Sum of the magnitudes of negative eigenvalues.
pub fn negativity(raw: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(raw)?
        .values
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|l| -l)
        .sum())
}

/// Per-qubit readout confusion matrices `A[q] = [[p(0|0), p(0|1)], [p(1|0), p(1|1)]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    pub confusion: Vec<[[f64; 2]; 2]>,
    /// Qubits whose confusion matrix has a diagonal entry at or below 0.5.
    pub ill_conditioned: Vec<usize>,
}

impl CalibrationData {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            confusion: vec![[[1.0, 0.0], [0.0, 1.0]]; n_qubits],
            ill_conditioned: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.confusion.len()
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.ill_conditioned.is_empty()
    }
}

fn marginal_one_frequency(table: &CountsTable, qubit: usize) -> f64 {
    let n = table.n_qubits();
    let mask = 1usize << (n - 1 - qubit);
    let ones: f64 = table
        .counts()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, c)| c)
        .sum();
    ones / table.shots() as f64
}

/// Estimates per-qubit confusion from an all-|0⟩ and an all-|1⟩ preparation,
/// both measured in Z.
pub fn calibrate_readout(all_zero: &CountsTable, all_one: &CountsTable) -> Result<CalibrationData> {
    let n = all_zero.n_qubits();
    if all_one.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: all_one.n_qubits(),
        });
    }
    for t in [all_zero, all_one] {
        if t.setting() != &MeasurementSetting::all_z(n) {
            return Err(Error::InvalidConfig(format!(
                "calibration must be measured in Z, got {}",
                t.setting()
            )));
        }
    }
    let mut confusion = Vec::with_capacity(n);
    let mut ill_conditioned = Vec::new();
    for q in 0..n {
        let e0 = marginal_one_frequency(all_zero, q);
        let e1 = 1.0 - marginal_one_frequency(all_one, q);
        let det = 1.0 - e0 - e1;
        if det.abs() < 1e-9 {
            return Err(Error::SingularCalibration { qubit: q, det });
        }
        if 1.0 - e0 <= 0.5 || 1.0 - e1 <= 0.5 {
            log::warn!("readout calibration for qubit {q} is ill-conditioned (p(1|0)={e0}, p(0|1)={e1})");
            ill_conditioned.push(q);
        }
        confusion.push([[1.0 - e0, e1], [e0, 1.0 - e1]]);
    }
    Ok(CalibrationData {
        confusion,
        ill_conditioned,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MitigatedCounts {
    pub counts: CountsTable,
    /// Negative quasi-count mass removed before rescaling, as a fraction of shots.
    pub clipped_mass: f64,
}

/// Applies `(⊗ A_q)^{-1}`, clips negative quasi-counts, and rescales to the
/// original shot total.
pub fn mitigate_counts(counts: &CountsTable, calib: &CalibrationData) -> Result<MitigatedCounts> {
    let n = counts.n_qubits();
    if calib.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: calib.n_qubits(),
        });
    }
    let mut v = counts.counts().to_vec();
    for (q, a) in calib.confusion.iter().enumerate() {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() < 1e-9 {
            return Err(Error::SingularCalibration { qubit: q, det });
        }
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let mask = 1usize << (n - 1 - q);
        for i0 in (0..v.len()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (c0, c1) = (v[i0], v[i1]);
            v[i0] = inv[0][0] * c0 + inv[0][1] * c1;
            v[i1] = inv[1][0] * c0 + inv[1][1] * c1;
        }
    }
    let shots = counts.shots() as f64;
    let clipped: f64 = v.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("mitigation removed all counts".into()));
    }
    v.iter_mut().for_each(|x| *x *= shots / total);
    // land the sum exactly on the shot total
    let drift = shots - v.iter().sum::<f64>();
    if let Some(max) = v.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *max += drift;
    }
    Ok(MitigatedCounts {
        counts: CountsTable::new(counts.setting().clone(), counts.shots(), v)?,
        clipped_mass: clipped / shots,
    })
}

/// Raw and projected reconstructions of one source with their quality figures.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub rho_raw: DensityMatrix,
    pub rho_projected: DensityMatrix,
    pub fidelity_vs_theory: f64,
    pub purity_raw: f64,
    pub purity_projected: f64,
    pub mitigated: bool,
    /// Raw purity above 1 signals an unphysical reconstruction.
    pub purity_raw_exceeds_one: bool,
    pub negativity: f64,
    pub max_abs_stokes: f64,
    pub clipped_mass: f64,
}

/// Linear inversion of `counts`, projection, and comparison with `theory`.
pub fn reconstruct(
    counts: &[CountsTable],
    n_qubits: usize,
    theory: &DensityMatrix,
    mitigated: bool,
    clipped_mass: f64,
) -> Result<ReconstructionReport> {
    let stokes = stokes_from_counts(counts, n_qubits)?;
    if !mitigated && stokes.max_abs() > 1.0 + STOKES_SLACK {
        log::warn!("Stokes value {} exceeds ±(1 + {STOKES_SLACK})", stokes.max_abs());
    }
    let raw =reconstruct_linear_inversion(&stokes)?;
    debug_assert!(raw.is_hermitian(HERMITIAN_TOL));
    let negativity = negativity(&raw)?;
    let rho_raw = DensityMatrix::new(raw)?;
    let rho_projected = project_to_physical(rho_raw.matrix())?;
    let purity_raw = crate::linalg::purity(&rho_raw);
    let purity_projected = crate::linalg::purity(&rho_projected);
    let fidelity_vs_theory = crate::linalg::fidelity(theory, &rho_projected)?;
    Ok(ReconstructionReport {
        purity_raw_exceeds_one: purity_raw > 1.0 + 1e-7,
        rho_raw,
        rho_projected,
        fidelity_vs_theory,
        purity_raw,
        purity_projected,
        mitigated,
        negativity,
        max_abs_stokes: stokes.max_abs(),
        clipped_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{tensor_product, StateVector};
    use crate::sampler::{enumerate_settings, exact_probabilities};

    fn tables_from_state(psi: &StateVector, shots: u64) -> Vec<CountsTable> {
        enumerate_settings(psi.n_qubits())
            .into_iter()
            .map(|s| {
                let p = exact_probabilities(psi, &s).unwrap();
                let counts = p.iter().map(|x| x * shots as f64).collect();
                CountsTable::new(s, shots, counts).unwrap()
            })
            .collect()
    }

    fn bell() -> StateVector {
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        StateVector::new(vec![h, z, z, h]).unwrap()
    }

    #[test]
    fn pauli_string_matches_tensor_products() {
        for li in 0..64 {
            let label = label_from_index(li, 3);
            let expected = label[1..]
                .iter()
                .fold(label[0].matrix(), |acc, p| tensor_product(&acc, &p.matrix()));
            assert_eq!(pauli_string_matrix(&label), expected, "{}", label_string(&label));
        }
    }

    #[test]
    fn single_qubit_zero_state() {
        let tables = tables_from_state(&StateVector::zero(1), 100);
        let s = stokes_from_counts(&tables, 1).unwrap();
        assert_eq!(s.get("Z"), Some(1.0));
        assert_eq!(s.get("I"), Some(1.0));
    }

    #[test]
    fn bell_zz_signs() {
        let tables = tables_from_state(&bell(), 1000);
        let s = stokes_from_counts(&tables, 2).unwrap();
        assert!((s.get("ZZ").unwrap() - 1.0).abs() < 1e-12);
        assert!(s.get("IZ").unwrap().abs() < 1e-12);
        assert!(s.get("ZI").unwrap().abs() < 1e-12);
        assert!((s.get("XX").unwrap() - 1.0).abs() < 1e-12);
        assert!((s.get("YY").unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_counts_give_zero() {
        let probs = [0.25; 4];
        assert_eq!(parity_expectation(&probs, 0b11), 0.0);
        assert_eq!(parity_expectation(&probs, 0b01), 0.0);
    }

    #[test]
    fn walsh_hadamard_matches_direct_sum() {
        let probs = [0.1, 0.05, 0.3, 0.15, 0.05, 0.1, 0.2, 0.05];
        let fast = all_parity_expectations(&probs);
        for (mask, f) in fast.iter().enumerate() {
            assert!((f - parity_expectation(&probs, mask)).abs() < 1e-15);
        }
    }

    #[test]
    fn stokes_errors() {
        let mut tables = tables_from_state(&bell(), 1000);
        let last = tables.pop().unwrap();
        assert!(matches!(stokes_from_counts(&tables, 2), Err(Error::MissingSetting(s)) if s == "ZZ"));
        tables.push(last.clone());
        tables.push(last);
        assert!(matches!(stokes_from_counts(&tables, 2), Err(Error::DuplicateSetting(_))));
        let mut tables = tables_from_state(&bell(), 1000);
        tables[3] = CountsTable::new(tables[3].setting().clone(), 10, vec![5.0, 0.0, 0.0, 5.0]).unwrap();
        assert!(matches!(stokes_from_counts(&tables, 2), Err(Error::ShotMismatch { .. })));
    }

    #[test]
    fn reconstruct_examples() {
        let mut map = BTreeMap::new();
        for (l, v) in [("I", 1.0), ("X", 0.0), ("Y", 0.0), ("Z", 1.0)] {
            map.insert(l.to_string(), v);
        }
        let rho = reconstruct_linear_inversion(&StokesTable::from_map(1, &map).unwrap()).unwrap();
        assert_eq!(rho, ComplexMatrix::from_diagonal(&[1.0, 0.0]));

        let mut values = vec![0.0; 16];
        for (l, v) in [("II", 1.0), ("XX", 1.0), ("YY", -1.0), ("ZZ", 1.0)] {
            values[label_index(&parse_label(l).unwrap())] = v;
        }
        let rho = reconstruct_linear_inversion(&StokesTable::from_values(2, values).unwrap()).unwrap();
        let expected = bell().density_matrix();
        assert!(rho.sub(expected.matrix()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn incomplete_stokes_rejected() {
        let mut map = BTreeMap::new();
        map.insert("I".to_string(), 1.0);
        map.insert("Z".to_string(), 1.0);
        assert!(matches!(StokesTable::from_map(1, &map), Err(Error::IncompleteStokes(_))));
        assert!(StokesTable::from_values(2, vec![1.0; 15]).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = project_to_physical(&ComplexMatrix::from_diagonal(&[1.1, -0.1])).unwrap();
        assert!(p.matrix().sub(&ComplexMatrix::from_diagonal(&[1.0, 0.0])).frobenius_norm() < 1e-12);
        assert!(p.is_physical());

        let p = project_to_physical(&ComplexMatrix::from_diagonal(&[0.7, 0.5, -0.2])).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[0.6, 0.4, 0.0]);
        assert!(p.matrix().sub(&expected).frobenius_norm() < 1e-12);

        let bell = bell().density_matrix();
        let p = project_to_physical(bell.matrix()).unwrap();
        assert!(p.matrix().sub(bell.matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn clip_spectrum_cascades() {
        // first pass would leave 0.05 - 0.3/3 < 0, so it is clipped too
        let out = clip_spectrum(&[-0.3, 0.05, 0.4, 0.85]);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 0.0);
        assert!((out[2] - 0.275).abs() < 1e-12 && (out[3] - 0.725).abs() < 1e-12);
    }

    #[test]
    fn calibration_examples() {
        let z = MeasurementSetting::all_z(2);
        let zero = CountsTable::new(z.clone(), 100, vec![100.0, 0.0, 0.0, 0.0]).unwrap();
        let one = CountsTable::new(z.clone(), 100, vec![0.0, 0.0, 0.0, 100.0]).unwrap();
        let cal = calibrate_readout(&zero, &one).unwrap();
        assert_eq!(cal, CalibrationData::identity(2));

        let z1 = MeasurementSetting::all_z(1);
        let zero = CountsTable::new(z1.clone(), 100, vec![50.0, 50.0]).unwrap();
        let one = CountsTable::new(z1.clone(), 100, vec![0.0, 100.0]).unwrap();
        let cal = calibrate_readout(&zero, &one).unwrap();
        assert_eq!(cal.ill_conditioned, vec![0]);

        let one = CountsTable::new(z1, 100, vec![50.0, 50.0]).unwrap();
        assert!(matches!(
            calibrate_readout(&zero, &one),
            Err(Error::SingularCalibration { qubit: 0, .. })
        ));
    }

    #[test]
    fn mitigation_examples() {
        let t = CountsTable::new("XZ".parse().unwrap(), 100, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let m = mitigate_counts(&t, &CalibrationData::identity(2)).unwrap();
        assert_eq!(m.counts, t);
        assert_eq!(m.clipped_mass, 0.0);

        let t = CountsTable::new("Z".parse().unwrap(), 1000, vec![980.0, 20.0]).unwrap();
        let cal = CalibrationData {
            confusion: vec![[[0.98, 0.02], [0.02, 0.98]]],
            ill_conditioned: vec![],
        };
        let m = mitigate_counts(&t, &cal).unwrap();
        assert!((m.counts.get("0") - 1000.0).abs() < 1e-9);
        assert!(m.counts.get("1").abs() < 1e-9);
    }

    #[test]
    fn mitigation_clips_and_rescales() {
        let t = CountsTable::new("Z".parse().unwrap(), 1000, vec![995.0, 5.0]).unwrap();
        let cal = CalibrationData {
            confusion: vec![[[0.98, 0.02], [0.02, 0.98]]],
            ill_conditioned: vec![],
        };
        let m = mitigate_counts(&t, &cal).unwrap();
        assert!(m.clipped_mass > 0.0);
        assert_eq!(m.counts.get("1"), 0.0);
        assert!((m.counts.counts().iter().sum::<f64>() - 1000.0).abs() < 1e-6);
    }
}
