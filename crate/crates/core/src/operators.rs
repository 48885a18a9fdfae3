//! Pauli-string expansion of Heisenberg operators: operator density, operator
//! size, Haar reference values and the average squared commutator.
//!
//! The size of a Pauli string is the position of its rightmost non-identity
//! site, so the operator density `p_l` collects the weight of all strings
//! supported on `1..=l` that act nontrivially on site `l`. With the
//! identity-normalized prefix traces `W_l = 2^-(N-l) Tr_{l+1..N} W`,
//!
//! ```text
//! <W_l^dagger W_l> = sum_{l' <= l} p_l'
//! ```
//!
//! which gives every `p_l` from `N` successive one-site traces without
//! enumerating the `4^N` strings.

use std::fmt;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_site, partial_trace_operator, LocalPauli, PauliKind};
use crate::propagation::HeisenbergOperator;

/// Largest chain for which the explicit `4^N` expansion is computed.
pub const MAX_DECOMPOSITION_QUBITS: usize = 7;

/// Tensor product of single-site Paulis; `kinds[m - 1]` acts on site `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    kinds: Vec<PauliKind>,
}

impl PauliString {
    pub fn new(kinds: Vec<PauliKind>) -> Self {
        Self { kinds }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            kinds: vec![PauliKind::Identity; n_qubits],
        }
    }

    /// Single non-identity factor at `site`.
    pub fn local(p: LocalPauli, n_qubits: usize) -> Result<Self> {
        check_site(p.site, n_qubits)?;
        let mut s = Self::identity(n_qubits);
        s.kinds[p.site - 1] = p.kind;
        Ok(s)
    }

    /// String with base-4 digits `index` (site 1 is the lowest digit).
    pub fn from_index(index: usize, n_qubits: usize) -> Self {
        Self {
            kinds: (0..n_qubits)
                .map(|m| PauliKind::from_digit(index >> (2 * m)))
                .collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.kinds
            .iter()
            .enumerate()
            .fold(0, |acc, (m, k)| acc | (k.digit() << (2 * m)))
    }

    pub fn n_qubits(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[PauliKind] {
        &self.kinds
    }

    /// Rightmost non-identity site, 0 for the identity string.
    pub fn size(&self) -> usize {
        self.kinds
            .iter()
            .rposition(|k| *k != PauliKind::Identity)
            .map_or(0, |p| p + 1)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.kinds.iter().filter(|k| **k != PauliKind::Identity).count()
    }

    fn masks(&self) -> StringMasks {
        StringMasks::from_kinds(&self.kinds)
    }

    pub fn to_matrix(&self) -> Mat<Complex64> {
        let dim = 1usize << self.n_qubits();
        let masks = self.masks();
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ masks.flip, b)] = masks.phase(b);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in &self.kinds {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Bit masks describing `S|b> = phase(b) |b ^ flip>`.
#[derive(Clone, Copy)]
struct StringMasks {
    flip: usize,
    sign: usize,
    n_y: u32,
}

impl StringMasks {
    fn from_kinds(kinds: &[PauliKind]) -> Self {
        let mut flip = 0;
        let mut sign = 0;
        let mut n_y = 0;
        for (m, k) in kinds.iter().enumerate() {
            let bit = 1 << m;
            match k {
                PauliKind::Identity => {}
                PauliKind::X => flip |= bit,
                PauliKind::Y => {
                    flip |= bit;
                    sign |= bit;
                    n_y += 1;
                }
                PauliKind::Z => sign |= bit,
            }
        }
        Self { flip, sign, n_y }
    }

    fn from_index(index: usize, n_qubits: usize) -> Self {
        let mut flip = 0;
        let mut sign = 0;
        let mut n_y = 0;
        for m in 0..n_qubits {
            let bit = 1 << m;
            match (index >> (2 * m)) & 3 {
                1 => flip |= bit,
                2 => {
                    flip |= bit;
                    sign |= bit;
                    n_y += 1;
                }
                3 => sign |= bit,
                _ => {}
            }
        }
        Self { flip, sign, n_y }
    }

    /// `i^{n_Y} (-1)^{popcount(b & sign)}`, using `Y = i X Z`.
    #[inline]
    fn phase(&self, b: usize) -> Complex64 {
        let base = match self.n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if (b & self.sign).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }
}

/// Explicit coefficients `c_S = 2^-N Tr(S^dagger W)` for all `4^N` strings.
#[derive(Clone, Debug)]
pub struct OperatorExpansion {
    n_qubits: usize,
    time: f64,
    coefficients: Vec<Complex64>,
}

impl OperatorExpansion {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.coefficients[s.index()]
    }

    /// `(string index, coefficient)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.coefficients.iter().copied().enumerate()
    }

    /// `sum |c_S|^2`.
    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_S c_S S`.
    pub fn reconstruct(&self) -> Mat<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for (idx, c) in self.iter() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let masks = StringMasks::from_index(idx, self.n_qubits);
            for b in 0..dim {
                m[(b ^ masks.flip, b)] += c * masks.phase(b);
            }
        }
        m
    }

    /// `p_l` by direct summation over strings of each size.
    pub fn density_profile(&self) -> OperatorDensityProfile {
        let mut weights = vec![0.0; self.n_qubits + 1];
        for (idx, c) in self.iter() {
            let size = if idx == 0 {
                0
            } else {
                (usize::BITS - idx.leading_zeros()).div_ceil(2) as usize
            };
            weights[size] += c.norm_sqr();
        }
        OperatorDensityProfile {
            time: self.time,
            identity_weight: weights[0],
            weights: weights[1..].to_vec(),
        }
    }

    /// `sum_{S_r != 1} |c_S|^2`, the average squared commutator at site `r`.
    pub fn weight_on_site(&self, site: usize) -> f64 {
        let shift = 2 * (site - 1);
        self.iter()
            .filter(|(idx, _)| (idx >> shift) & 3 != 0)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

/// Full Pauli expansion of a dense operator (`N <= 7`).
pub fn pauli_decompose(op: &HeisenbergOperator) -> Result<OperatorExpansion> {
    let n = op.n_qubits();
    if n > MAX_DECOMPOSITION_QUBITS {
        return Err(Error::DimensionLimit {
            what: "explicit Pauli decomposition",
            n_qubits: n,
            limit: MAX_DECOMPOSITION_QUBITS,
        });
    }
    let m = op.matrix();
    let dim = 1usize << n;
    let norm = 1.0 / dim as f64;
    let coefficients = (0..1usize << (2 * n))
        .map(|idx| {
            let masks = StringMasks::from_index(idx, n);
            // Tr(S^dagger W) = sum_b conj(S_{b^f, b}) W_{b^f, b}
            let tr: Complex64 = (0..dim)
                .map(|b| masks.phase(b).conj() * m[(b ^ masks.flip, b)])
                .sum();
            tr * norm
        })
        .collect();
    Ok(OperatorExpansion {
        n_qubits: n,
        time: op.time(),
        coefficients,
    })
}

/// Operator density `p_l(t)` for `l = 1..N`, with the identity weight
/// `p_0` kept separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDensityProfile {
    pub time: f64,
    /// `p_0 = |c_1|^2`.
    pub identity_weight: f64,
    /// `weights[l - 1] = p_l`.
    pub weights: Vec<f64>,
}

impl OperatorDensityProfile {
    pub fn n_qubits(&self) -> usize {
        self.weights.len()
    }

    /// `p_l`, with `p(0)` the identity weight.
    pub fn p(&self, l: usize) -> f64 {
        if l == 0 {
            self.identity_weight
        } else {
            self.weights[l - 1]
        }
    }

    /// `sum_{l >= 0} p_l`.
    pub fn total(&self) -> f64 {
        self.identity_weight + self.weights.iter().sum::<f64>()
    }
}

/// `2^-l ||A||_F^2` for a `2^l x 2^l` matrix.
fn normalized_weight(m: MatRef<'_, Complex64>) -> f64 {
    let f = m.norm_l2();
    f * f / m.nrows() as f64
}

/// Operator density from successive identity-normalized partial traces.
pub fn operator_density_profile(op: &HeisenbergOperator) -> Result<OperatorDensityProfile> {
    let n = op.n_qubits();
    // cumulative[l] = <W_l^dagger W_l> = sum_{l' <= l} p_l'
    let mut cumulative = vec![0.0; n + 1];
    cumulative[n] = normalized_weight(op.matrix());
    let mut current = op.matrix().to_owned();
    for l in (1..n).rev() {
        current = partial_trace_operator(current.as_ref(), l + 1, l)?;
        cumulative[l] = normalized_weight(current.as_ref());
    }
    // W_0 is the normalized trace times the identity
    let trace: Complex64 = (0..current.nrows()).map(|i| current[(i, i)]).sum();
    cumulative[0] = (trace / current.nrows() as f64).norm_sqr();
    Ok(OperatorDensityProfile {
        time: op.time(),
        identity_weight: cumulative[0],
        weights: (1..=n).map(|l| cumulative[l] - cumulative[l - 1]).collect(),
    })
}

/// `L = sum_l l p_l`.
pub fn operator_size(profile: &OperatorDensityProfile) -> f64 {
    profile
        .weights
        .iter()
        .enumerate()
        .map(|(k, p)| (k + 1) as f64 * p)
        .sum()
}

/// Average operator size of a Haar-random unitary, `N(1 + 1/(4^N - 1)) - 1/3`.
pub fn haar_operator_size(n_qubits: usize) -> f64 {
    let n = n_qubits as f64;
    let strings = 4f64.powi(n_qubits as i32) - 1.0;
    n * (1.0 + 1.0 / strings) - 1.0 / 3.0
}

/// Haar operator density `3 * 4^(l-1) / (4^N - 1)`.
pub fn haar_density(l: usize, n_qubits: usize) -> f64 {
    if l == 0 || l > n_qubits {
        return 0.0;
    }
    3.0 * 4f64.powi(l as i32 - 1) / (4f64.powi(n_qubits as i32) - 1.0)
}

/// Average squared commutator `(1/4) sum_{V in {1,X,Y,Z}} C_r^V = sum_{S_r != 1} |c_S|^2`,
/// evaluated as `<W^dagger W> - <W~^dagger W~>` with `W~ = (1/2) Tr_r W (x) 1_r`.
pub fn average_squared_commutator(op: &HeisenbergOperator, site: usize) -> Result<f64> {
    let n = op.n_qubits();
    check_site(site, n)?;
    let m = op.matrix();
    let dim = m.nrows();
    let bit = 1usize << (site - 1);
    let total = normalized_weight(m);
    let mut traced = 0.0;
    for j in (0..dim).filter(|j| j & bit == 0) {
        for i in (0..dim).filter(|i| i & bit == 0) {
            let t = 0.5 * (m[(i, j)] + m[(i | bit, j | bit)]);
            traced += t.norm_sqr();
        }
    }
    // the reduced operator lives on 2^(N-1) states; padding with 1_r keeps
    // the normalized trace unchanged
    Ok(total - traced / (dim / 2) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn op(n: usize, m: Mat<Complex64>) -> HeisenbergOperator {
        HeisenbergOperator::new(n, 0.0, m).unwrap()
    }

    #[test]
    fn string_indexing_and_size() {
        let s = PauliString::new(vec![PauliKind::Y, PauliKind::Identity, PauliKind::Z, PauliKind::Identity]);
        assert_eq!(s.size(), 3);
        assert_eq!(s.weight(), 2);
        assert_eq!(PauliString::from_index(s.index(), 4), s);
        assert_eq!(PauliString::identity(3).size(), 0);
        assert_eq!(s.to_string(), "YIZI");
    }

    #[test]
    fn string_matrix_is_kronecker_product() {
        let s = PauliString::new(vec![PauliKind::Y, PauliKind::X]);
        let m = s.to_matrix();
        // site 1 is the low bit: S = X (x) Y in the usual big-endian layout
        let x = PauliKind::X.matrix();
        let y = PauliKind::Y.matrix();
        for r in 0..4 {
            for c in 0..4 {
                let want = x[r >> 1][c >> 1] * y[r & 1][c & 1];
                assert!((m[(r, c)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_site_operator_expansions() {
        let y1 = LocalPauli::new(PauliKind::Y, 1);
        let e = pauli_decompose(&op(3, y1.to_matrix(3).unwrap())).unwrap();
        let target = PauliString::local(y1, 3).unwrap();
        for (idx, c) in e.iter() {
            let want = if idx == target.index() { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-15);
        }
        let id = pauli_decompose(&op(2, Mat::identity(4, 4))).unwrap();
        assert!((id.coefficient(&PauliString::identity(2)) - 1.0).norm() < 1e-15);
        assert_abs_diff_eq!(id.total_weight(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decomposition_limit() {
        let big = op(8, Mat::identity(256, 256));
        assert!(matches!(pauli_decompose(&big), Err(Error::DimensionLimit { n_qubits: 8, .. })));
    }

    #[test]
    fn local_seed_profile() {
        let y1 = LocalPauli::new(PauliKind::Y, 1).to_matrix(4).unwrap();
        let p = operator_density_profile(&op(4, y1)).unwrap();
        assert_eq!(p.weights.len(), 4);
        assert_abs_diff_eq!(p.weights[0], 1.0, epsilon = 1e-15);
        assert!(p.weights[1..].iter().all(|w| w.abs() < 1e-15));
        assert!(p.identity_weight < 1e-15);
        assert_abs_diff_eq!(operator_size(&p), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_weight_is_tracked() {
        let p = operator_density_profile(&op(3, Mat::identity(8, 8))).unwrap();
        assert_abs_diff_eq!(p.identity_weight, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.total(), 1.0, epsilon = 1e-15);
        assert!(operator_size(&p).abs() < 1e-14);
    }

    #[test]
    fn sizes_of_simple_profiles() {
        let p = OperatorDensityProfile {
            time: 0.0,
            identity_weight: 0.0,
            weights: vec![0.5, 0.5],
        };
        assert_abs_diff_eq!(operator_size(&p), 1.5, epsilon = 1e-15);
        let haar = OperatorDensityProfile {
            time: 0.0,
            identity_weight: 0.0,
            weights: vec![3.0 / 15.0, 12.0 / 15.0],
        };
        assert_abs_diff_eq!(operator_size(&haar), 1.8, epsilon = 1e-15);
    }

    #[test]
    fn haar_values() {
        assert_abs_diff_eq!(haar_operator_size(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(haar_operator_size(2), 1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(haar_operator_size(16), 15.6667, epsilon = 1e-4);
        for n in 1..10 {
            let total: f64 = (1..=n).map(|l| haar_density(l, n)).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
            let size: f64 = (1..=n).map(|l| l as f64 * haar_density(l, n)).sum();
            assert_abs_diff_eq!(size, haar_operator_size(n), epsilon = 1e-12);
        }
        assert_eq!(haar_density(0, 3), 0.0);
    }

    #[test]
    fn average_commutator_of_local_seed() {
        let y1 = op(4, LocalPauli::new(PauliKind::Y, 1).to_matrix(4).unwrap());
        assert_abs_diff_eq!(average_squared_commutator(&y1, 1).unwrap(), 1.0, epsilon = 1e-15);
        for r in 2..=4 {
            assert!(average_squared_commutator(&y1, r).unwrap().abs() < 1e-15);
        }
        assert!(average_squared_commutator(&y1, 5).is_err());
    }
}
