//! Tight-binding exciton network, its donor/acceptor/bath partition and the
//! spectral decomposition of the bath block.
//!
//! Sites are numbered from 1 in reports and file formats; internally the donor
//! is index 0, the acceptor index 1 and the sink the last index.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Site Hamiltonian of `N` pigments plus the sink slot (`N + 1` sites, cm⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonNetwork {
    label: String,
    hamiltonian: DMatrix<f64>,
    pigment_labels: Vec<String>,
}

impl ExcitonNetwork {
    /// Wraps a full `(N+1)×(N+1)` matrix whose last row/column is the sink slot.
    ///
    /// Only shape is checked here; structural constraints are reported by
    /// [`ExcitonNetwork::validate_constraints`].
    pub fn new(label: impl Into<String>, hamiltonian: DMatrix<f64>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::Format(format!(
                "hamiltonian is {}x{}, expected a square matrix",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        let n = hamiltonian.nrows();
        if n < 4 {
            return Err(Error::Format(format!(
                "network has {n} sites; donor, acceptor, at least one bath pigment and the sink need 4"
            )));
        }
        if hamiltonian.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("hamiltonian contains non-finite entries".into()));
        }
        let pigment_labels = (1..n).map(|k| format!("site {k}")).collect();
        Ok(Self { label: label.into(), hamiltonian, pigment_labels })
    }

    /// Builds the network from the `N×N` pigment block; the sink slot is left
    /// empty until [`SinkParameters`] are installed.
    pub fn from_pigments(label: impl Into<String>, pigments: &DMatrix<f64>) -> Result<Self> {
        if !pigments.is_square() {
            return Err(Error::Format(format!(
                "pigment block is {}x{}, expected a square matrix",
                pigments.nrows(),
                pigments.ncols()
            )));
        }
        let n = pigments.nrows() + 1;
        let mut h = DMatrix::zeros(n, n);
        h.view_mut((0, 0), (n - 1, n - 1)).copy_from(pigments);
        Self::new(label, h)
    }

    pub fn with_pigment_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_pigments() {
            return Err(Error::Format(format!("{} pigment labels given for {} pigments", labels.len(), self.n_pigments())));
        }
        self.pigment_labels = labels;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pigment_labels(&self) -> &[String] {
        &self.pigment_labels
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// `N + 1`, sink included.
    pub fn n_sites(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn n_pigments(&self) -> usize {
        self.n_sites() - 1
    }

    pub fn donor_index(&self) -> usize {
        0
    }

    pub fn acceptor_index(&self) -> usize {
        1
    }

    pub fn sink_index(&self) -> usize {
        self.n_sites() - 1
    }

    /// Number of bath eigenstates, sink included (`N - 1`).
    pub fn n_bath(&self) -> usize {
        self.n_sites() - 2
    }

    /// Copy with the sink slot filled in from `sink`.
    pub fn with_sink(&self, sink: &SinkParameters) -> Self {
        let mut out = self.clone();
        let s = self.sink_index();
        let a = self.acceptor_index();
        out.hamiltonian[(s, s)] = sink.sink_energy;
        out.hamiltonian[(a, s)] = sink.acceptor_sink_coupling;
        out.hamiltonian[(s, a)] = sink.acceptor_sink_coupling;
        out
    }

    /// Copy with `delta` added to every site energy, the sink slot included.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for k in 0..self.n_sites() {
            out.hamiltonian[(k, k)] += delta;
        }
        out
    }

    /// Lists every violated structural constraint: symmetry, no direct
    /// donor-acceptor hopping, and a sink coupled to the acceptor only.
    pub fn validate_constraints(&self) -> ValidationReport {
        let h = &self.hamiltonian;
        let n = self.n_sites();
        let scale = h.amax();
        let mut violations = Vec::new();
        for k in 0..n {
            for l in (k + 1)..n {
                let difference = (h[(k, l)] - h[(l, k)]).abs();
                if difference > SYMMETRY_TOLERANCE * scale {
                    violations.push(Violation::Asymmetric { row: k + 1, col: l + 1, difference });
                }
            }
        }
        let (d, a, s) = (self.donor_index(), self.acceptor_index(), self.sink_index());
        if h[(d, a)] != 0.0 || h[(a, d)] != 0.0 {
            violations.push(Violation::DonorAcceptorHopping { value: h[(d, a)].abs().max(h[(a, d)].abs()) });
        }
        for j in 0..n {
            if j == a || j == s {
                continue;
            }
            let value = h[(j, s)].abs().max(h[(s, j)].abs());
            if value != 0.0 {
                violations.push(Violation::SinkHopping { site: j + 1, sink: s + 1, value });
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Asymmetric { row: usize, col: usize, difference: f64 },
    DonorAcceptorHopping { value: f64 },
    SinkHopping { site: usize, sink: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Asymmetric { row, col, difference } => {
                write!(f, "H[{row}][{col}] and H[{col}][{row}] differ by {difference}")
            }
            Violation::DonorAcceptorHopping { value } => write!(f, "donor-acceptor hopping h(1,2) = {value} must be 0"),
            Violation::SinkHopping { site, sink, value } => {
                write!(f, "sink hopping h({site},{sink}) = {value} must be 0 (only the acceptor couples to the sink)")
            }
        }
    }
}

/// Result of [`ExcitonNetwork::validate_constraints`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "constraints satisfied");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// On-disk network description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub label: String,
    pub n_pigments: usize,
    /// Row-major, cm⁻¹. Either `n_pigments` square (pigments only) or
    /// `n_pigments + 1` square (with an empty sink slot).
    pub hamiltonian: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pigment_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// Parses and validates a JSON network document.
pub fn load_network(source: &str) -> Result<ExcitonNetwork> {
    let file: NetworkFile = serde_json::from_str(source).map_err(|e| Error::Format(e.to_string()))?;
    network_from_file(&file)
}

pub fn load_network_file(path: impl AsRef<Path>) -> Result<ExcitonNetwork> {
    let text = std::fs::read_to_string(path.as_ref())?;
    load_network(&text)
}

pub fn network_from_file(file: &NetworkFile) -> Result<ExcitonNetwork> {
    let rows = file.hamiltonian.len();
    if let Some((i, row)) = file.hamiltonian.iter().enumerate().find(|(_, r)| r.len() != rows) {
        return Err(Error::Format(format!("hamiltonian row {} has {} entries but the matrix has {rows} rows", i + 1, row.len())));
    }
    let matrix = DMatrix::from_fn(rows, rows, |i, j| file.hamiltonian[i][j]);
    let net = if rows == file.n_pigments {
        ExcitonNetwork::from_pigments(file.label.clone(), &matrix)?
    } else if rows == file.n_pigments + 1 {
        ExcitonNetwork::new(file.label.clone(), matrix)?
    } else {
        return Err(Error::Format(format!(
            "hamiltonian is {rows}x{rows} but n_pigments = {}; expected {} (pigments) or {} (with sink slot)",
            file.n_pigments,
            file.n_pigments,
            file.n_pigments + 1
        )));
    };
    let net = match &file.pigment_labels {
        Some(labels) => net.with_pigment_labels(labels.clone())?,
        None => net,
    };
    let report = net.validate_constraints();
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    Ok(net)
}

/// Energy, acceptor coupling and decoherence rate of the sink (cm⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkParameters {
    pub sink_energy: f64,
    /// Only the magnitude enters the spectral functions.
    pub acceptor_sink_coupling: f64,
    pub sink_rate: f64,
}

impl SinkParameters {
    pub fn new(sink_energy: f64, acceptor_sink_coupling: f64, sink_rate: f64) -> Result<Self> {
        if !(sink_energy.is_finite() && acceptor_sink_coupling.is_finite() && sink_rate.is_finite()) {
            return Err(Error::Parameter("sink parameters must be finite".into()));
        }
        if sink_rate <= 0.0 {
            return Err(Error::Parameter(format!("sink rate must be positive, got {sink_rate}")));
        }
        Ok(Self { sink_energy, acceptor_sink_coupling: acceptor_sink_coupling.abs(), sink_rate })
    }
}

/// Donor and acceptor energies, the bath block and the two coupling vectors
/// `|g₁⟩`, `|g₂⟩` over bath sites `3..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPartition {
    pub donor_energy: f64,
    pub acceptor_energy: f64,
    pub bath_block: DMatrix<f64>,
    pub coupling_donor: DVector<f64>,
    pub coupling_acceptor: DVector<f64>,
    pub sink_rate: f64,
}

pub fn partition(net: &ExcitonNetwork, sink: &SinkParameters) -> Result<SystemPartition> {
    let full = net.with_sink(sink);
    let report = full.validate_constraints();
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let h = full.hamiltonian();
    let n = full.n_sites();
    let m = n - 2;
    let bath_block = h.view((2, 2), (m, m)).into_owned();
    let coupling_donor = DVector::from_fn(m, |k, _| h[(0, k + 2)]);
    let coupling_acceptor = DVector::from_fn(m, |k, _| h[(1, k + 2)]);
    Ok(SystemPartition {
        donor_energy: h[(0, 0)],
        acceptor_energy: h[(1, 1)],
        bath_block,
        coupling_donor,
        coupling_acceptor,
        sink_rate: sink.sink_rate,
    })
}

/// How pigment decoherence rates are attached to bath eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateOrdering {
    /// First rate to the lowest pigment eigenvalue.
    Ascending,
    /// First rate to the highest pigment eigenvalue.
    #[default]
    Descending,
}

/// Eigen-decomposition of the bath block with per-eigenstate decoherence
/// rates and coupling weights `|⟨α|g_j⟩|²`. Sorted by ascending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub rates: Vec<f64>,
    pub weights_donor: Vec<f64>,
    pub weights_acceptor: Vec<f64>,
    /// Position of the decoupled sink eigenpair.
    pub sink_slot: usize,
}

/// Diagonalizes the bath block.
///
/// `pigment_rates` holds one rate per pigment bath eigenstate (`N - 2`
/// values); the sink eigenpair takes the partition's sink rate.
pub fn diagonalize_bath(part: &SystemPartition, pigment_rates: &[f64], ordering: RateOrdering) -> Result<BathSpectrum> {
    let m = part.bath_block.nrows();
    let p = m - 1;
    if pigment_rates.len() != p {
        return Err(Error::Parameter(format!("{} pigment rates given for {p} bath pigments", pigment_rates.len())));
    }
    if let Some(bad) = pigment_rates.iter().chain(std::iter::once(&part.sink_rate)).find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Parameter(format!("decoherence rates must be positive, got {bad}")));
    }

    // The sink row and column are empty off the diagonal, so the pigment block
    // is diagonalized on its own and the sink eigenpair appended exactly.
    let pigment_block = part.bath_block.view((0, 0), (p, p)).into_owned();
    let eig = SymmetricEigen::new(pigment_block);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let sink_energy = part.bath_block[(p, p)];
    let sink_slot = order.iter().take_while(|&&k| eig.eigenvalues[k] <= sink_energy).count();

    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = DMatrix::zeros(m, m);
    let mut rates = vec![0.0; m];
    let mut pigment_pos = 0;
    for slot in 0..m {
        if slot == sink_slot {
            eigenvalues.push(sink_energy);
            eigenvectors[(p, slot)] = 1.0;
            rates[slot] = part.sink_rate;
            continue;
        }
        let k = order[pigment_pos];
        eigenvalues.push(eig.eigenvalues[k]);
        for r in 0..p {
            eigenvectors[(r, slot)] = eig.eigenvectors[(r, k)];
        }
        rates[slot] = match ordering {
            RateOrdering::Ascending => pigment_rates[pigment_pos],
            RateOrdering::Descending => pigment_rates[p - 1 - pigment_pos],
        };
        pigment_pos += 1;
    }

    let project = |g: &DVector<f64>| -> Vec<f64> { (0..m).map(|a| eigenvectors.column(a).dot(g).powi(2)).collect() };
    let weights_donor = project(&part.coupling_donor);
    let weights_acceptor = project(&part.coupling_acceptor);
    Ok(BathSpectrum { eigenvalues, eigenvectors, rates, weights_donor, weights_acceptor, sink_slot })
}

impl BathSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V · diag(ε) · Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }
}
