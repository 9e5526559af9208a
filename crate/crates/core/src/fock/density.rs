//! Truncated two-mode density matrices and their JSON document form.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

/// Elementwise tolerance for Hermiticity checks on inputs.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues within this distance of zero are treated as zero.
pub const EIGEN_ZERO_TOL: f64 = 1e-10;

/// Number of Fock levels kept per mode; photon numbers run `0..d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ModeDim(usize);

impl ModeDim {
    pub const DEFAULT: ModeDim = ModeDim(3);

    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Argument(format!("mode dimension must be at least 2, got {d}")));
        }
        Ok(ModeDim(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Size of the two-mode Hilbert space, `d²`.
    #[inline]
    pub fn pairs(self) -> usize {
        self.0 * self.0
    }

    /// Number of matrix elements, `d⁴`.
    #[inline]
    pub fn elements(self) -> usize {
        self.pairs() * self.pairs()
    }

    #[inline]
    pub fn check(self, n: usize) -> Result<()> {
        if n >= self.0 {
            Err(Error::Index { index: n, dim: self.0 })
        } else {
            Ok(())
        }
    }

    /// Flat index `((k·d + l)·d + m)·d + n`.
    #[inline]
    pub fn flat(self, k: usize, l: usize, m: usize, n: usize) -> usize {
        ((k * self.0 + l) * self.0 + m) * self.0 + n
    }
}

impl Default for ModeDim {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<usize> for ModeDim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        ModeDim::new(d)
    }
}

impl From<ModeDim> for usize {
    fn from(d: ModeDim) -> usize {
        d.0
    }
}

/// `ρ_klmn = <k,l|ρ|m,n>` on `d` levels per mode.
///
/// Entries are stored row-major as a `d² × d²` matrix with row `k·d + l` and
/// column `m·d + n`, which coincides with the flat index of [`ModeDim::flat`].
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeDensityMatrix {
    dim: ModeDim,
    entries: Vec<Complex64>,
    phase_blocks: bool,
}

impl TwoModeDensityMatrix {
    pub fn zeros(dim: ModeDim) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim.elements()],
            phase_blocks: false,
        }
    }

    pub fn from_entries(dim: ModeDim, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim.elements() {
            return Err(Error::Argument(format!(
                "expected {} entries for d = {}, got {}",
                dim.elements(),
                dim.get(),
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("density matrix has non-finite entries".into()));
        }
        Ok(Self {
            dim,
            entries,
            phase_blocks: false,
        })
    }

    /// `|ψ><ψ|` for a two-mode amplitude vector indexed by `k·d + l`, normalized.
    pub fn from_pure(dim: ModeDim, amplitudes: &[Complex64]) -> Result<Self> {
        let p = dim.pairs();
        if amplitudes.len() != p {
            return Err(Error::Argument(format!("expected {p} amplitudes, got {}", amplitudes.len())));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Argument("amplitude vector has zero or non-finite norm".into()));
        }
        let mut entries = Vec::with_capacity(dim.elements());
        for a in amplitudes {
            for b in amplitudes {
                entries.push(a * b.conj() / norm);
            }
        }
        Self::from_entries(dim, entries)
    }

    /// `|k,l><k,l|`.
    pub fn fock(dim: ModeDim, k: usize, l: usize) -> Result<Self> {
        dim.check(k)?;
        dim.check(l)?;
        let mut rho = Self::zeros(dim);
        rho.entries[dim.flat(k, l, k, l)] = Complex64::new(1.0, 0.0);
        Ok(rho)
    }

    pub fn vacuum(dim: ModeDim) -> Self {
        Self::fock(dim, 0, 0).expect("vacuum is always in range")
    }

    #[inline]
    pub fn dim(&self) -> ModeDim {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// `ρ_klmn`; panics if an index is out of range.
    #[inline]
    pub fn get(&self, k: usize, l: usize, m: usize, n: usize) -> Complex64 {
        let d = self.dim.get();
        assert!(k < d && l < d && m < d && n < d, "index out of range for d = {d}");
        self.entries[self.dim.flat(k, l, m, n)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, m: usize, n: usize, value: Complex64) {
        let d = self.dim.get();
        assert!(k < d && l < d && m < d && n < d, "index out of range for d = {d}");
        let i = self.dim.flat(k, l, m, n);
        self.entries[i] = value;
    }

    /// Whether the global-phase block mask has been applied.
    pub fn has_global_phase_blocks(&self) -> bool {
        self.phase_blocks
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let p = self.dim.pairs();
        DMatrix::from_row_slice(p, p, &self.entries)
    }

    pub fn from_matrix(dim: ModeDim, m: &DMatrix<Complex64>) -> Result<Self> {
        let p = dim.pairs();
        if m.nrows() != p || m.ncols() != p {
            return Err(Error::Argument(format!("expected a {p}x{p} matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        let mut entries = Vec::with_capacity(dim.elements());
        for r in 0..p {
            for c in 0..p {
                entries.push(m[(r, c)]);
            }
        }
        Self::from_entries(dim, entries)
    }

    pub fn trace(&self) -> Complex64 {
        let p = self.dim.pairs();
        (0..p).map(|i| self.entries[i * p + i]).sum()
    }

    /// `max |ρ_klmn - conj(ρ_mnkl)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let p = self.dim.pairs();
        let mut worst = 0.0f64;
        for r in 0..p {
            for c in r..p {
                let diff = self.entries[r * p + c] - self.entries[c * p + r].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn validate_hermitian(&self, tol: f64) -> Result<()> {
        let err = self.hermiticity_error();
        if err > tol {
            return Err(Error::Validation(format!("matrix is not Hermitian (max deviation {err:.3e})")));
        }
        Ok(())
    }

    /// `(ρ + ρ†)/2`.
    pub fn hermitized(&self) -> Self {
        let p = self.dim.pairs();
        let mut out = self.clone();
        for r in 0..p {
            for c in r..p {
                let avg = 0.5 * (self.entries[r * p + c] + self.entries[c * p + r].conj());
                out.entries[r * p + c] = avg;
                out.entries[c * p + r] = avg.conj();
            }
        }
        out
    }

    /// Divides by the real part of the trace.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace().re;
        if !(t.abs() > f64::EPSILON) {
            return Err(Error::Numerical(format!("cannot normalize matrix with trace {t}")));
        }
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|z| *z /= t);
        Ok(out)
    }

    fn eigen(&self) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
        SymmetricEigen::try_new(self.hermitized().to_matrix(), 1e-15, 10_000)
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = self.eigen()?.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Summary of negative eigenvalues below `-EIGEN_ZERO_TOL`.
    pub fn psd_report(&self) -> Result<PsdReport> {
        let ev = self.eigenvalues()?;
        let negatives: Vec<f64> = ev.iter().copied().filter(|&v| v < -EIGEN_ZERO_TOL).collect();
        Ok(PsdReport {
            min_eigenvalue: ev[0],
            negative_count: negatives.len(),
            negative_sum: negatives.iter().sum(),
        })
    }

    /// Clips negative eigenvalues to zero and renormalizes to unit trace.
    pub fn psd_projected(&self) -> Result<Self> {
        let eig = self.eigen()?;
        let p = self.dim.pairs();
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical("matrix has no positive spectrum to project onto".into()));
        }
        let vecs = &eig.eigenvectors;
        let mut out = Self::zeros(self.dim);
        out.phase_blocks = self.phase_blocks;
        for (j, &lam) in vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let w = lam / total;
            for r in 0..p {
                let vr = vecs[(r, j)] * w;
                for c in 0..p {
                    out.entries[r * p + c] += vr * vecs[(c, j)].conj();
                }
            }
        }
        if out.phase_blocks {
            out.mask_global_phase_blocks();
        }
        Ok(out)
    }

    fn mask_global_phase_blocks(&mut self) {
        let d = self.dim.get();
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    for n in 0..d {
                        if k + l != m + n {
                            self.entries[self.dim.flat(k, l, m, n)] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
    }

    /// Zeroes every element with `k + l != m + n` and sets the block flag.
    pub fn with_global_phase_blocks(&self) -> Self {
        let mut out = self.clone();
        out.mask_global_phase_blocks();
        out.phase_blocks = true;
        out
    }

    /// Largest element outside the `k + l = m + n` blocks.
    pub fn off_block_magnitude(&self) -> f64 {
        let d = self.dim.get();
        let mut worst = 0.0f64;
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    for n in 0..d {
                        if k + l != m + n {
                            worst = worst.max(self.entries[self.dim.flat(k, l, m, n)].norm());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `<ψ|ρ|ψ>` for a normalized amplitude vector indexed by `k·d + l`.
    pub fn fidelity_with_pure(&self, amplitudes: &[Complex64]) -> Result<f64> {
        let p = self.dim.pairs();
        if amplitudes.len() != p {
            return Err(Error::Argument(format!("expected {p} amplitudes, got {}", amplitudes.len())));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..p {
            for c in 0..p {
                acc += amplitudes[r].conj() * self.entries[r * p + c] * amplitudes[c];
            }
        }
        Ok(acc.re / norm)
    }

    /// `½ Tr|ρ - σ|`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        let diff: Vec<Complex64> = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        let diff = Self::from_entries(self.dim, diff)?;
        Ok(0.5 * diff.eigenvalues()?.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// `max |ρ_klmn - σ_klmn|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Argument(format!(
                "dimension mismatch: {} vs {}",
                self.dim.get(),
                other.dim.get()
            )));
        }
        Ok(())
    }

    pub fn to_document(&self, meta: Map<String, Value>) -> DensityMatrixDocument {
        DensityMatrixDocument {
            dim: self.dim.get(),
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
            meta,
        }
    }

    pub fn from_document(doc: &DensityMatrixDocument) -> Result<Self> {
        let dim = ModeDim::new(doc.dim)?;
        let entries = doc.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::from_entries(dim, entries)
    }

    pub fn write_json(&self, path: impl AsRef<Path>, meta: Map<String, Value>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_document(meta))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    /// Reads a matrix document, returning the matrix and its `meta` map.
    pub fn read_json(path: impl AsRef<Path>) -> Result<(Self, Map<String, Value>)> {
        let text = fs::read_to_string(path)?;
        let doc: DensityMatrixDocument = serde_json::from_str(&text)?;
        Ok((Self::from_document(&doc)?, doc.meta))
    }
}

/// Shared on-disk matrix format: `entries` is a flat list of `[re, im]`
/// pairs in `((k·d + l)·d + m)·d + n` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixDocument {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

/// Negative-eigenvalue summary for matrices that may leave the PSD cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub negative_count: usize,
    pub negative_sum: f64,
}

impl PsdReport {
    pub fn is_psd(&self) -> bool {
        self.negative_count == 0
    }
}
