//! Basis bookkeeping for an `N`-qubit chain.
//!
//! Sites are numbered `1..=N`; site `m` is stored in bit `m - 1` of a basis
//! index, so site 1 is the least-significant bit. `Z|0> = +|0>`. Every other
//! module relies on this convention.

use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Single-site Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliKind {
    #[serde(rename = "I", alias = "1")]
    Identity,
    X,
    Y,
    Z,
}

impl PauliKind {
    pub const ALL: [PauliKind; 4] = [
        PauliKind::Identity,
        PauliKind::X,
        PauliKind::Y,
        PauliKind::Z,
    ];

    /// Whether the operator flips the computational basis bit.
    #[inline]
    pub fn flips(self) -> bool {
        matches!(self, PauliKind::X | PauliKind::Y)
    }

    /// Phase picked up by `|bit>`, i.e. `P|bit> = phase * |bit ^ flips>`.
    #[inline]
    pub fn phase(self, bit: bool) -> Complex64 {
        match (self, bit) {
            (PauliKind::Identity | PauliKind::X, _) => ONE,
            (PauliKind::Y, false) => I,
            (PauliKind::Y, true) => -I,
            (PauliKind::Z, false) => ONE,
            (PauliKind::Z, true) => -ONE,
        }
    }

    /// Base-4 digit used when enumerating Pauli strings.
    #[inline]
    pub fn digit(self) -> usize {
        match self {
            PauliKind::Identity => 0,
            PauliKind::X => 1,
            PauliKind::Y => 2,
            PauliKind::Z => 3,
        }
    }

    #[inline]
    pub fn from_digit(d: usize) -> Self {
        PauliKind::ALL[d & 3]
    }

    /// 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            PauliKind::Identity => [[ONE, ZERO], [ZERO, ONE]],
            PauliKind::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliKind::Y => [[ZERO, -I], [I, ZERO]],
            PauliKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliKind::Identity => 'I',
            PauliKind::X => 'X',
            PauliKind::Y => 'Y',
            PauliKind::Z => 'Z',
        }
    }
}

impl fmt::Display for PauliKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for PauliKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(PauliKind::Identity),
            "X" | "x" => Ok(PauliKind::X),
            "Y" | "y" => Ok(PauliKind::Y),
            "Z" | "z" => Ok(PauliKind::Z),
            other => Err(Error::UnknownPauli(other.to_string())),
        }
    }
}

/// A Pauli operator acting on one site of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalPauli {
    pub kind: PauliKind,
    pub site: usize,
}

impl LocalPauli {
    pub fn new(kind: PauliKind, site: usize) -> Self {
        Self { kind, site }
    }

    pub fn check(&self, n_qubits: usize) -> Result<()> {
        check_site(self.site, n_qubits)
    }

    /// Dense `2^N x 2^N` matrix of the operator.
    pub fn to_matrix(&self, n_qubits: usize) -> Result<Mat<Complex64>> {
        self.check(n_qubits)?;
        let dim = 1usize << n_qubits;
        let bit = 1usize << (self.site - 1);
        let flip = if self.kind.flips() { bit } else { 0 };
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ flip, b)] = self.kind.phase(b & bit != 0);
        }
        Ok(m)
    }
}

impl fmt::Display for LocalPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind, self.site)
    }
}

/// One of the six single-qubit Pauli eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalState {
    #[serde(rename = "Z+")]
    ZPlus,
    #[serde(rename = "Z-")]
    ZMinus,
    #[serde(rename = "X+")]
    XPlus,
    #[serde(rename = "X-")]
    XMinus,
    #[serde(rename = "Y+")]
    YPlus,
    #[serde(rename = "Y-")]
    YMinus,
}

impl LocalState {
    /// Amplitudes on `(|0>, |1>)`.
    pub fn amplitudes(self) -> [Complex64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            LocalState::ZPlus => [ONE, ZERO],
            LocalState::ZMinus => [ZERO, ONE],
            LocalState::XPlus => [ONE * s, ONE * s],
            LocalState::XMinus => [ONE * s, -ONE * s],
            LocalState::YPlus => [ONE * s, I * s],
            LocalState::YMinus => [ONE * s, -I * s],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LocalState::ZPlus => "Z+",
            LocalState::ZMinus => "Z-",
            LocalState::XPlus => "X+",
            LocalState::XMinus => "X-",
            LocalState::YPlus => "Y+",
            LocalState::YMinus => "Y-",
        }
    }
}

impl fmt::Display for LocalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LocalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Z+" | "+Z" | "0" => Ok(LocalState::ZPlus),
            "Z-" | "-Z" | "1" => Ok(LocalState::ZMinus),
            "X+" | "+X" | "+" => Ok(LocalState::XPlus),
            "X-" | "-X" | "-" => Ok(LocalState::XMinus),
            "Y+" | "+Y" => Ok(LocalState::YPlus),
            "Y-" | "-Y" => Ok(LocalState::YMinus),
            _ => Err(Error::UnsupportedState(s.to_string())),
        }
    }
}

/// Dense pure state of `n_qubits` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Squared distance `||self - other||^2`.
    pub fn distance_sqr(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    /// `<Z_site>` in this state.
    pub fn expectation_z(&self, site: usize) -> Result<f64> {
        check_site(site, self.n_qubits)?;
        let bit = 1usize << (site - 1);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| if b & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }
}

pub(crate) fn check_site(site: usize, n_qubits: usize) -> Result<()> {
    if site == 0 || site > n_qubits {
        Err(Error::SiteOutOfRange { site, n_qubits })
    } else {
        Ok(())
    }
}

/// Tensor power of a single-qubit Pauli eigenstate.
pub fn product_state(local: LocalState, n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(Error::InvalidRegion("a product state needs at least one qubit".into()));
    }
    let [a0, a1] = local.amplitudes();
    let mut amplitudes = vec![ONE];
    for _ in 0..n_qubits {
        // the new site is the next-most-significant bit
        let mut next = Vec::with_capacity(amplitudes.len() * 2);
        next.extend(amplitudes.iter().map(|a| a * a0));
        next.extend(amplitudes.iter().map(|a| a * a1));
        amplitudes = next;
    }
    StateVector::new(n_qubits, amplitudes)
}

/// Applies a single-site Pauli to raw amplitudes without allocating.
pub(crate) fn apply_pauli_in_place(amplitudes: &mut [Complex64], kind: PauliKind, site: usize) {
    let bit = 1usize << (site - 1);
    match kind {
        PauliKind::Identity => {}
        PauliKind::Z => {
            for (b, a) in amplitudes.iter_mut().enumerate() {
                if b & bit != 0 {
                    *a = -*a;
                }
            }
        }
        PauliKind::X | PauliKind::Y => {
            let p0 = kind.phase(false);
            let p1 = kind.phase(true);
            for b in 0..amplitudes.len() {
                if b & bit == 0 {
                    let lo = amplitudes[b];
                    let hi = amplitudes[b | bit];
                    // P|0> = p0|1>, P|1> = p1|0>
                    amplitudes[b | bit] = p0 * lo;
                    amplitudes[b] = p1 * hi;
                }
            }
        }
    }
}

/// Returns `P_site |state>`.
pub fn apply_local_pauli(state: &StateVector, kind: PauliKind, site: usize) -> Result<StateVector> {
    check_site(site, state.n_qubits)?;
    let mut out = state.clone();
    apply_pauli_in_place(&mut out.amplitudes, kind, site);
    Ok(out)
}

/// Sorted set of 1-based sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    /// Validates that `sites` is strictly increasing within `1..=n_qubits`.
    pub fn new(sites: Vec<usize>, n_qubits: usize) -> Result<Self> {
        let region = Region::try_from(sites)?;
        region.check(n_qubits)?;
        Ok(region)
    }

    /// Sites `1..=len`.
    pub fn prefix(len: usize, n_qubits: usize) -> Result<Self> {
        Region::new((1..=len).collect(), n_qubits)
    }

    /// Sites `first..=last`.
    pub fn span(first: usize, last: usize, n_qubits: usize) -> Result<Self> {
        Region::new((first..=last).collect(), n_qubits)
    }

    /// Left half of the chain, `1..=N/2`.
    pub fn left_half(n_qubits: usize) -> Result<Self> {
        Region::prefix(n_qubits / 2, n_qubits)
    }

    pub fn check(&self, n_qubits: usize) -> Result<()> {
        match self.sites.last() {
            Some(&last) if last > n_qubits => Err(Error::SiteOutOfRange {
                site: last,
                n_qubits,
            }),
            _ => Ok(()),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn complement(&self, n_qubits: usize) -> Region {
        Region {
            sites: (1..=n_qubits).filter(|s| !self.contains(*s)).collect(),
        }
    }
}

impl TryFrom<Vec<usize>> for Region {
    type Error = Error;

    fn try_from(sites: Vec<usize>) -> Result<Self> {
        if sites.first() == Some(&0) {
            return Err(Error::InvalidRegion("sites are 1-based".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRegion(format!(
                "sites must be strictly increasing, got {sites:?}"
            )));
        }
        Ok(Region { sites })
    }
}

impl From<Region> for Vec<usize> {
    fn from(r: Region) -> Self {
        r.sites
    }
}

/// Reduced density matrix of a subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    entries: Mat<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: Mat<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self {
            entries: Mat::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    /// `|psi><psi|`.
    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self {
            entries: Mat::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, Complex64> {
        self.entries.as_ref()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(self.entries.as_ref())
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(self.entries.as_ref())
    }
}

pub(crate) fn hermiticity_deviation(m: MatRef<'_, Complex64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_eigenvalues(m: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Extracts the bits listed in `bits` (in order) from `index` into a dense integer.
#[inline]
fn gather_bits(index: usize, bits: &[usize]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | (((index >> b) & 1) << k))
}

/// Reshapes a state into a `2^|A| x 2^|B|` matrix for the bipartition `A | B`.
pub(crate) fn bipartition(state: &StateVector, region: &Region) -> Mat<Complex64> {
    let n = state.n_qubits();
    let keep_bits: Vec<usize> = region.sites().iter().map(|s| s - 1).collect();
    let rest_bits: Vec<usize> = region.complement(n).sites().iter().map(|s| s - 1).collect();
    let mut m = Mat::<Complex64>::zeros(1 << keep_bits.len(), 1 << rest_bits.len());
    for (b, &amp) in state.amplitudes().iter().enumerate() {
        m[(gather_bits(b, &keep_bits), gather_bits(b, &rest_bits))] = amp;
    }
    m
}

fn check_proper_region(region: &Region, n_qubits: usize) -> Result<()> {
    region.check(n_qubits)?;
    if region.is_empty() {
        return Err(Error::InvalidRegion("region is empty".into()));
    }
    if region.len() == n_qubits {
        return Err(Error::InvalidRegion("region covers the whole chain".into()));
    }
    Ok(())
}

/// `rho_A = Tr_B |psi><psi|` for a proper nonempty region `A`.
pub fn reduced_density_matrix(state: &StateVector, keep: &Region) -> Result<DensityMatrix> {
    check_proper_region(keep, state.n_qubits())?;
    let psi = bipartition(state, keep);
    Ok(DensityMatrix {
        entries: &psi * psi.adjoint(),
    })
}

/// Schmidt weights of the bipartition `A | B`, taken from whichever reduced
/// density matrix is smaller. The global state must be pure.
pub fn schmidt_weights(state: &StateVector, region: &Region) -> Result<Vec<f64>> {
    check_proper_region(region, state.n_qubits())?;
    let psi = bipartition(state, region);
    let rho = if psi.nrows() <= psi.ncols() {
        &psi * psi.adjoint()
    } else {
        psi.adjoint() * &psi
    };
    hermitian_eigenvalues(rho.as_ref())
}

/// Identity-normalized partial trace over sites `prefix_len + 1..=N`:
/// `2^-(N - l) Tr_{l+1..N} op`, a `2^l x 2^l` matrix on the first `l` sites.
pub fn partial_trace_operator(
    op: MatRef<'_, Complex64>,
    n_qubits: usize,
    prefix_len: usize,
) -> Result<Mat<Complex64>> {
    let dim = 1usize << n_qubits;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: op.nrows().max(op.ncols()),
        });
    }
    if prefix_len == 0 || prefix_len > n_qubits {
        return Err(Error::SiteOutOfRange {
            site: prefix_len,
            n_qubits,
        });
    }
    if prefix_len == n_qubits {
        return Ok(op.to_owned());
    }
    let kept = 1usize << prefix_len;
    let traced = 1usize << (n_qubits - prefix_len);
    let norm = 1.0 / traced as f64;
    Ok(Mat::from_fn(kept, kept, |i, j| {
        let mut acc = ZERO;
        for h in 0..traced {
            let off = h * kept;
            acc += op[(i + off, j + off)];
        }
        acc * norm
    }))
}
