//! Exact time evolution of states and Heisenberg-picture operators.
//!
//! Two routes are provided for states: a full spectral decomposition of the
//! (real symmetric) Hamiltonian, which evaluates any time directly, and a
//! Lanczos propagator that steps in increments of at most `dt` using only
//! matrix-free products with `H`. Operators are evolved from the spectral
//! decomposition.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::hilbert::{hermiticity_deviation, StateVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Size cutoffs for the dense and Krylov code paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericalLimits {
    /// Largest chain for which `2^N x 2^N` operators are formed.
    pub dense_operator_qubits: usize,
    /// Largest chain that may be fully diagonalized.
    pub eigen_qubits: usize,
    /// Largest chain for Krylov state propagation.
    pub krylov_qubits: usize,
    /// `Method::Auto` diagonalizes up to this size and uses Krylov above it.
    pub auto_spectral_qubits: usize,
}

impl Default for NumericalLimits {
    fn default() -> Self {
        Self {
            dense_operator_qubits: 13,
            eigen_qubits: 14,
            krylov_qubits: 22,
            auto_spectral_qubits: 10,
        }
    }
}

impl NumericalLimits {
    pub fn check_dense_operator(&self, n_qubits: usize) -> Result<()> {
        check_limit("dense Heisenberg operator", n_qubits, self.dense_operator_qubits)
    }
}

fn check_limit(what: &'static str, n_qubits: usize, limit: usize) -> Result<()> {
    if n_qubits > limit {
        Err(Error::DimensionLimit {
            what,
            n_qubits,
            limit,
        })
    } else {
        Ok(())
    }
}

/// Lanczos propagator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovConfig {
    /// Largest Krylov subspace built for one step.
    pub max_dim: usize,
    /// Allowed error estimate per step.
    pub tolerance: f64,
    /// Longest step, in units of `1/J`.
    pub dt: f64,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            max_dim: 40,
            tolerance: 1e-12,
            dt: 0.1,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "krylov.max_dim must be >= 2, got {}",
                self.max_dim
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "krylov.tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("krylov.dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Which state propagator to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Spectral,
    Krylov,
}

/// Real symmetric operator that can be applied to complex vectors.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl SymmetricOperator for HamiltonianMatrix {
    fn dim(&self) -> usize {
        HamiltonianMatrix::dim(self)
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        HamiltonianMatrix::apply(self, x, y)
    }
}

impl SymmetricOperator for Mat<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| x[j] * self[(i, j)]).sum();
        }
    }
}

/// Columns per batched spectral product; bounds the workspace to a few
/// copies of `dim x 64`.
const BATCH_COLUMNS: usize = 64;

/// `H = V diag(E) V^T` with real orthogonal `V`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl SpectralDecomposition {
    /// Diagonalizes a dense real symmetric matrix.
    pub fn from_dense(h: MatRef<'_, f64>) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: h.ncols(),
            });
        }
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let eigenvalues = (0..s.nrows()).map(|i| s[i]).collect();
        Ok(Self {
            eigenvalues,
            eigenvectors: evd.U().to_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    /// `max |V diag(E) V^T - H|`.
    pub fn reconstruction_residual(&self, h: MatRef<'_, f64>) -> f64 {
        let v = &self.eigenvectors;
        let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        let rebuilt = &scaled * v.transpose();
        (&rebuilt - h).norm_max()
    }

    /// `max |V^T V - 1|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.transpose() * v;
        (&gram - Mat::<f64>::identity(v.ncols(), v.ncols())).norm_max()
    }

    /// `e^{-iHt}` applied to a batch of states stored as columns.
    pub fn evolve_columns(&self, states: MatRef<'_, Complex64>, t: f64) -> Mat<Complex64> {
        self.evolve_columns_at(states, &vec![t; states.ncols()])
    }

    /// `e^{-iH t_j}` applied to column `j`.
    pub fn evolve_columns_at(&self, states: MatRef<'_, Complex64>, times: &[f64]) -> Mat<Complex64> {
        assert_eq!(states.ncols(), times.len());
        let dim = self.dim();
        let k = states.ncols();
        // split into real and imaginary halves so both products stay real
        let split = Mat::<f64>::from_fn(dim, 2 * k, |i, j| {
            let z = states[(i, j % k)];
            if j < k {
                z.re
            } else {
                z.im
            }
        });
        let coeffs = self.eigenvectors.transpose() * &split;
        let rotated = Mat::<f64>::from_fn(dim, 2 * k, |i, j| {
            let col = j % k;
            let (s, c) = (-self.eigenvalues[i] * times[col]).sin_cos();
            let re = coeffs[(i, col)];
            let im = coeffs[(i, col + k)];
            // (re + i im)(c + i s)
            if j < k {
                re * c - im * s
            } else {
                re * s + im * c
            }
        });
        let back = &self.eigenvectors * &rotated;
        Mat::from_fn(dim, k, |i, j| Complex64::new(back[(i, j)], back[(i, j + k)]))
    }

    /// Evolves `states[j]` by `times[j]`, batching columns into matrix products.
    pub fn evolve_each(&self, states: &[StateVector], times: &[f64]) -> Result<Vec<StateVector>> {
        if states.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: times.len(),
            });
        }
        let dim = self.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        let mut out = Vec::with_capacity(states.len());
        for (chunk, ts) in states.chunks(BATCH_COLUMNS).zip(times.chunks(BATCH_COLUMNS)) {
            let cols = Mat::from_fn(dim, chunk.len(), |i, j| chunk[j].amplitudes()[i]);
            let evolved = self.evolve_columns_at(cols.as_ref(), ts);
            for (j, s) in chunk.iter().enumerate() {
                out.push(StateVector::new(s.n_qubits(), evolved.col(j).iter().copied().collect())?);
            }
        }
        Ok(out)
    }

    /// `e^{-iHt}|psi>`.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let a = state.amplitudes();
        let col = Mat::from_fn(a.len(), 1, |i, _| a[i]);
        let out = self.evolve_columns(col.as_ref(), t);
        StateVector::new(state.n_qubits(), (0..a.len()).map(|i| out[(i, 0)]).collect())
    }
}

/// Diagonalizes `H`; refuses chains longer than `limits.eigen_qubits`.
pub fn eigendecompose(h: &HamiltonianMatrix, limits: &NumericalLimits) -> Result<SpectralDecomposition> {
    check_limit("eigendecomposition", h.n_qubits(), limits.eigen_qubits)?;
    let dense = h.to_dense(limits.eigen_qubits)?;
    SpectralDecomposition::from_dense(dense.as_ref())
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-i T tau) e_1` for the symmetric tridiagonal `T = tridiag(beta, alpha, beta)`.
fn tridiagonal_exp_first_column(alpha: &[f64], beta: &[f64], tau: f64) -> Result<Vec<Complex64>> {
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.U();
    let theta = evd.S().column_vector();
    Ok((0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let phase = Complex64::from_polar(1.0, -theta[j] * tau);
                    phase * (s[(i, j)] * s[(0, j)])
                })
                .sum()
        })
        .collect())
}

/// One Lanczos step `psi -> exp(-i H tau) psi`, growing the Krylov space
/// until the error estimate drops below `config.tolerance`.
pub fn krylov_step<H: SymmetricOperator + ?Sized>(
    h: &H,
    psi: &[Complex64],
    tau: f64,
    config: &KrylovConfig,
) -> Result<Vec<Complex64>> {
    let dim = h.dim();
    let beta0 = norm(psi);
    if beta0 == 0.0 || tau == 0.0 {
        return Ok(psi.to_vec());
    }
    let max_dim = config.max_dim.min(dim);
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::with_capacity(max_dim);
    let mut beta: Vec<f64> = Vec::with_capacity(max_dim);
    let mut w = vec![ZERO; dim];
    let mut estimate = f64::INFINITY;

    for j in 0..max_dim {
        h.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization against the whole basis, done twice
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let y = tridiagonal_exp_first_column(&alpha, &beta, tau)?;
        let breakdown = b <= 1e-13 * (a.abs() + beta.last().copied().unwrap_or(0.0) + 1.0);
        estimate = beta0 * b * y[j].norm();
        if breakdown || estimate <= config.tolerance || j + 1 == dim {
            let mut out = vec![ZERO; dim];
            for (q, c) in basis.iter().zip(&y) {
                let c = c * beta0;
                for (o, qi) in out.iter_mut().zip(q) {
                    *o += c * qi;
                }
            }
            return Ok(out);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::KrylovNotConverged {
        max_dim,
        estimate,
        tolerance: config.tolerance,
    })
}

/// `exp(-iHt) psi` in uniform substeps no longer than `config.dt`.
pub fn krylov_evolve<H: SymmetricOperator + ?Sized>(
    h: &H,
    psi: &[Complex64],
    t: f64,
    config: &KrylovConfig,
) -> Result<Vec<Complex64>> {
    config.validate()?;
    if t == 0.0 {
        return Ok(psi.to_vec());
    }
    let steps = ((t.abs() / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut cur = psi.to_vec();
    for _ in 0..steps {
        cur = krylov_step(h, &cur, tau, config)?;
    }
    Ok(cur)
}

/// Matrix-free Lanczos propagator.
#[derive(Clone, Debug)]
pub struct KrylovPropagator {
    hamiltonian: HamiltonianMatrix,
    config: KrylovConfig,
}

impl KrylovPropagator {
    pub fn new(h: &HamiltonianMatrix, config: KrylovConfig, limits: &NumericalLimits) -> Result<Self> {
        check_limit("Krylov propagation", h.n_qubits(), limits.krylov_qubits)?;
        config.validate()?;
        Ok(Self {
            hamiltonian: h.clone(),
            config,
        })
    }

    pub fn config(&self) -> &KrylovConfig {
        &self.config
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.dim() != self.hamiltonian.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.hamiltonian.dim(),
                got: state.dim(),
            });
        }
        let out = krylov_evolve(&self.hamiltonian, state.amplitudes(), t, &self.config)?;
        StateVector::new(state.n_qubits(), out)
    }
}

/// State propagator: spectral or Krylov.
#[derive(Clone, Debug)]
pub enum Propagator {
    Spectral(SpectralDecomposition),
    Krylov(KrylovPropagator),
}

impl Propagator {
    pub fn new(
        h: &HamiltonianMatrix,
        method: Method,
        limits: &NumericalLimits,
        krylov: &KrylovConfig,
    ) -> Result<Self> {
        let method = match method {
            Method::Auto if h.n_qubits() <= limits.auto_spectral_qubits.min(limits.eigen_qubits) => {
                Method::Spectral
            }
            Method::Auto => Method::Krylov,
            m => m,
        };
        match method {
            Method::Spectral => Ok(Propagator::Spectral(eigendecompose(h, limits)?)),
            _ => Ok(Propagator::Krylov(KrylovPropagator::new(h, krylov.clone(), limits)?)),
        }
    }

    pub fn spectral(h: &HamiltonianMatrix, limits: &NumericalLimits) -> Result<Self> {
        Self::new(h, Method::Spectral, limits, &KrylovConfig::default())
    }

    pub fn krylov(h: &HamiltonianMatrix, config: KrylovConfig, limits: &NumericalLimits) -> Result<Self> {
        Self::new(h, Method::Krylov, limits, &config)
    }

    pub fn method(&self) -> Method {
        match self {
            Propagator::Spectral(_) => Method::Spectral,
            Propagator::Krylov(_) => Method::Krylov,
        }
    }

    /// `e^{-iHt}|psi>`; negative `t` evolves backwards.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        match self {
            Propagator::Spectral(s) => s.evolve(state, t),
            Propagator::Krylov(k) => k.evolve(state, t),
        }
    }

    /// States at every entry of a nondecreasing time grid. The Krylov path
    /// steps incrementally between consecutive grid points.
    pub fn evolve_grid(&self, state: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_time_grid(times, false)?;
        match self {
            Propagator::Spectral(s) => s.evolve_each(&vec![state.clone(); times.len()], times),
            Propagator::Krylov(k) => {
                let mut out = Vec::with_capacity(times.len());
                let mut cur = state.clone();
                let mut now = 0.0;
                for &t in times {
                    cur = k.evolve(&cur, t - now)?;
                    now = t;
                    out.push(cur.clone());
                }
                Ok(out)
            }
        }
    }

    /// Evolves `states[j]` by `times[j]`.
    pub fn evolve_each(&self, states: &[StateVector], times: &[f64]) -> Result<Vec<StateVector>> {
        match self {
            Propagator::Spectral(s) => s.evolve_each(states, times),
            Propagator::Krylov(k) => {
                if states.len() != times.len() {
                    return Err(Error::DimensionMismatch {
                        expected: states.len(),
                        got: times.len(),
                    });
                }
                states.iter().zip(times).map(|(s, &t)| k.evolve(s, t)).collect()
            }
        }
    }
}

/// Checks that a time grid is nonempty and increasing.
pub fn check_time_grid(times: &[f64], strict: bool) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Empty("time grid"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("time grid contains non-finite values".into()));
    }
    let bad = times
        .windows(2)
        .any(|w| if strict { w[1] <= w[0] } else { w[1] < w[0] });
    if bad {
        return Err(Error::InvalidConfig(format!(
            "time grid must be {}increasing",
            if strict { "strictly " } else { "" }
        )));
    }
    Ok(())
}

/// Free-function form of [`Propagator::evolve`].
pub fn evolve_state(propagator: &Propagator, state: &StateVector, t: f64) -> Result<StateVector> {
    propagator.evolve(state, t)
}

/// Dense Heisenberg-picture operator `W(t) = e^{iHt} W e^{-iHt}`.
#[derive(Clone, Debug)]
pub struct HeisenbergOperator {
    n_qubits: usize,
    time: f64,
    matrix: Mat<Complex64>,
}

impl HeisenbergOperator {
    pub fn new(n_qubits: usize, time: f64, matrix: Mat<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            n_qubits,
            time,
            matrix,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn matrix(&self) -> MatRef<'_, Complex64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> Mat<Complex64> {
        self.matrix
    }

    /// `max |W^dagger W - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.matrix.nrows();
        let g = self.matrix.adjoint() * &self.matrix;
        (&g - Mat::<Complex64>::identity(d, d)).norm_max()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(self.matrix.as_ref())
    }

    /// `W |psi>`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: state.dim(),
            });
        }
        let a = state.amplitudes();
        let out = (0..a.len())
            .map(|i| (0..a.len()).map(|j| self.matrix[(i, j)] * a[j]).sum())
            .collect();
        StateVector::new(self.n_qubits, out)
    }
}

/// Evolves one seed operator to many times from a shared decomposition.
pub struct HeisenbergEvolver<'a> {
    decomposition: &'a SpectralDecomposition,
    n_qubits: usize,
    basis: Mat<Complex64>,
    seed_in_eigenbasis: Mat<Complex64>,
}

impl<'a> HeisenbergEvolver<'a> {
    pub fn new(
        decomposition: &'a SpectralDecomposition,
        seed: MatRef<'_, Complex64>,
        limits: &NumericalLimits,
    ) -> Result<Self> {
        let dim = decomposition.dim();
        let n_qubits = dim.trailing_zeros() as usize;
        limits.check_dense_operator(n_qubits)?;
        if seed.nrows() != dim || seed.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: seed.nrows().max(seed.ncols()),
            });
        }
        let v = decomposition.eigenvectors();
        let basis = Mat::<Complex64>::from_fn(dim, dim, |i, j| Complex64::new(v[(i, j)], 0.0));
        let seed_in_eigenbasis = basis.transpose() * seed * &basis;
        Ok(Self {
            decomposition,
            n_qubits,
            basis,
            seed_in_eigenbasis,
        })
    }

    /// `W(t) = V e^{iEt} (V^T W V) e^{-iEt} V^T`.
    pub fn at(&self, t: f64) -> HeisenbergOperator {
        let e = self.decomposition.eigenvalues();
        let phases: Vec<Complex64> = e.iter().map(|&ei| Complex64::from_polar(1.0, ei * t)).collect();
        let dim = e.len();
        let rotated = Mat::<Complex64>::from_fn(dim, dim, |i, j| {
            phases[i] * self.seed_in_eigenbasis[(i, j)] * phases[j].conj()
        });
        let matrix = &self.basis * &rotated * self.basis.transpose();
        HeisenbergOperator {
            n_qubits: self.n_qubits,
            time: t,
            matrix,
        }
    }
}

/// `W(t) = e^{iHt} W0 e^{-iHt}` for a single time.
pub fn heisenberg_operator(
    h: &HamiltonianMatrix,
    seed: MatRef<'_, Complex64>,
    t: f64,
    limits: &NumericalLimits,
) -> Result<HeisenbergOperator> {
    limits.check_dense_operator(h.n_qubits())?;
    let decomposition = eigendecompose(h, limits)?;
    Ok(HeisenbergEvolver::new(&decomposition, seed, limits)?.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build, HamiltonianSpec};
    use crate::hilbert::{product_state, LocalPauli, LocalState, PauliKind};

    fn z_matrix() -> Mat<f64> {
        Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => -1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn single_qubit_z_spectrum() {
        let d = SpectralDecomposition::from_dense(z_matrix().as_ref()).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 1.0]);
        let v = d.eigenvectors();
        assert!((v[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((v[(0, 1)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_two_site_spectrum() {
        let spec = HamiltonianSpec::powerlaw(2, 1.0, false).with_fields(0.0, 0.5);
        let d = eigendecompose(&build(&spec).unwrap(), &NumericalLimits::default()).unwrap();
        let e = d.eigenvalues();
        for (a, b) in e.iter().zip([-2.0, 0.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let h = build(&HamiltonianSpec::powerlaw(6, 0.7, true)).unwrap();
        let dense = h.to_dense(14).unwrap();
        let d = SpectralDecomposition::from_dense(dense.as_ref()).unwrap();
        let scale = dense.norm_max().max(1.0);
        assert!(d.reconstruction_residual(dense.as_ref()) < 1e-10 * scale);
        assert!(d.orthogonality_residual() < 1e-10);
    }

    #[test]
    fn eigendecomposition_limit() {
        let h = build(&HamiltonianSpec::local(5)).unwrap();
        let limits = NumericalLimits {
            eigen_qubits: 4,
            ..Default::default()
        };
        assert!(matches!(
            eigendecompose(&h, &limits),
            Err(Error::DimensionLimit { n_qubits: 5, limit: 4, .. })
        ));
    }

    #[test]
    fn single_qubit_precession() {
        let d = SpectralDecomposition::from_dense(z_matrix().as_ref()).unwrap();
        let plus = product_state(LocalState::XPlus, 1).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let out = d.evolve(&plus, t).unwrap();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let want = [Complex64::from_polar(s, -t), Complex64::from_polar(s, t)];
            for (a, b) in out.amplitudes().iter().zip(want) {
                assert!((a - b).norm() < 1e-14);
            }
            // <X> = 2 Re(a0* a1)
            let a = out.amplitudes();
            let x = 2.0 * (a[0].conj() * a[1]).re;
            assert!((x - (2.0 * t).cos()).abs() < 1e-14);

            let k = krylov_evolve(&z_matrix(), plus.amplitudes(), t, &KrylovConfig::default()).unwrap();
            for (a, b) in k.iter().zip(out.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build(&HamiltonianSpec::fast_scrambler(5)).unwrap();
        let psi = product_state(LocalState::YPlus, 5).unwrap();
        for p in [
            Propagator::spectral(&h, &NumericalLimits::default()).unwrap(),
            Propagator::krylov(&h, KrylovConfig::default(), &NumericalLimits::default()).unwrap(),
        ] {
            let out = p.evolve(&psi, 0.0).unwrap();
            assert!(out.distance_sqr(&psi) < 1e-28);
        }
    }

    #[test]
    fn krylov_matches_spectral_local_chain() {
        let h = build(&HamiltonianSpec::local(8)).unwrap();
        let limits = NumericalLimits::default();
        let s = Propagator::spectral(&h, &limits).unwrap();
        let k = Propagator::krylov(&h, KrylovConfig::default(), &limits).unwrap();
        let psi = product_state(LocalState::YPlus, 8).unwrap();
        let a = s.evolve(&psi, 3.0).unwrap();
        let b = k.evolve(&psi, 3.0).unwrap();
        assert!(a.inner(&b).norm() > 1.0 - 1e-8);
        assert!((b.norm_sqr() - 1.0).abs() < 1e-10);
        let back = k.evolve(&b, -3.0).unwrap();
        assert!(back.distance_sqr(&psi) < 1e-16);
    }

    #[test]
    fn krylov_reports_non_convergence() {
        let h = build(&HamiltonianSpec::local(6)).unwrap();
        let cfg = KrylovConfig {
            max_dim: 3,
            tolerance: 1e-14,
            dt: 2.0,
        };
        let psi = product_state(LocalState::YPlus, 6).unwrap();
        let err = krylov_evolve(&h, psi.amplitudes(), 2.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::KrylovNotConverged { max_dim: 3, .. }));
    }

    #[test]
    fn krylov_config_validation() {
        assert!(KrylovConfig { max_dim: 1, ..Default::default() }.validate().is_err());
        assert!(KrylovConfig { tolerance: 0.0, ..Default::default() }.validate().is_err());
        assert!(KrylovConfig { dt: -0.1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn evolve_grid_matches_pointwise() {
        let h = build(&HamiltonianSpec::powerlaw(6, 1.1, true)).unwrap();
        let limits = NumericalLimits::default();
        let s = Propagator::spectral(&h, &limits).unwrap();
        let k = Propagator::krylov(&h, KrylovConfig::default(), &limits).unwrap();
        let psi = product_state(LocalState::YPlus, 6).unwrap();
        let times = [0.0, 0.25, 1.0, 1.05, 2.5];
        let gs = s.evolve_grid(&psi, &times).unwrap();
        let gk = k.evolve_grid(&psi, &times).unwrap();
        for ((a, b), &t) in gs.iter().zip(&gk).zip(&times) {
            assert!(a.distance_sqr(b) < 1e-18, "t = {t}");
        }
        assert!(s.evolve_grid(&psi, &[]).is_err());
        assert!(s.evolve_grid(&psi, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn heisenberg_single_qubit_rotation() {
        let d = SpectralDecomposition::from_dense(z_matrix().as_ref()).unwrap();
        let x = LocalPauli::new(PauliKind::X, 1).to_matrix(1).unwrap();
        let y = LocalPauli::new(PauliKind::Y, 1).to_matrix(1).unwrap();
        let ev = HeisenbergEvolver::new(&d, x.as_ref(), &NumericalLimits::default()).unwrap();
        for t in [0.0, 0.4, 2.2] {
            let w = ev.at(t);
            let want = Mat::<Complex64>::from_fn(2, 2, |i, j| {
                x[(i, j)] * (2.0 * t).cos() - y[(i, j)] * (2.0 * t).sin()
            });
            assert!((w.matrix() - &want).norm_max() < 1e-14);
        }
        assert!((ev.at(0.0).matrix() - &x).norm_max() < 1e-15);
    }

    #[test]
    fn heisenberg_operator_limit() {
        let h = build(&HamiltonianSpec::local(4)).unwrap();
        let y = LocalPauli::new(PauliKind::Y, 1).to_matrix(4).unwrap();
        let limits = NumericalLimits {
            dense_operator_qubits: 3,
            ..Default::default()
        };
        assert!(matches!(
            heisenberg_operator(&h, y.as_ref(), 1.0, &limits),
            Err(Error::DimensionLimit { n_qubits: 4, .. })
        ));
    }
}
