//! Mixed-field Ising chains with local, powerlaw and all-to-all couplings.
//!
//! All three families share the form
//!
//! ```text
//! H = - sum_{m<n} J_mn Z_m Z_n - h_x sum_m X_m - h_z sum_m Z_m
//! ```
//!
//! with open boundaries, so a Hamiltonian is stored as its diagonal (the
//! `ZZ` and `Z` parts) together with the uniform amplitude `-h_x` on every
//! single-bit-flip matrix element.

use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coupling family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Nearest-neighbour couplings only.
    Local,
    /// `J / (kappa |m - n|^alpha)` between every pair.
    Powerlaw,
    /// Local chain plus a uniform `N^-gamma` all-to-all `ZZ` term.
    FastScrambler,
}

/// Powerlaw exponent. The infinite exponent is the nearest-neighbour limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `1 / d^alpha` for a pair at distance `d >= 1`.
    pub fn decay(self, distance: usize) -> f64 {
        match self {
            Exponent::Infinite => {
                if distance == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Exponent::Finite(a) => (distance as f64).powf(-a),
        }
    }
}

impl From<f64> for Exponent {
    fn from(a: f64) -> Self {
        if a.is_infinite() && a > 0.0 {
            Exponent::Infinite
        } else {
            Exponent::Finite(a)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => f.write_str("inf"),
            Exponent::Finite(a) => write!(f, "{a}"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Infinite => s.serialize_str("inf"),
            Exponent::Finite(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(a) => Ok(Exponent::from(a)),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(Exponent::Infinite),
                other => other.parse::<f64>().map(Exponent::from).map_err(|_| {
                    serde::de::Error::custom(format!("expected a number or \"inf\", got `{t}`"))
                }),
            },
        }
    }
}

fn default_alpha() -> Exponent {
    Exponent::Infinite
}
fn default_gamma() -> f64 {
    0.5
}
fn default_j() -> f64 {
    1.0
}
fn default_hx() -> f64 {
    -1.05
}
fn default_hz() -> f64 {
    0.5
}

/// Parameters of one Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub family: Family,
    pub n_qubits: usize,
    #[serde(default = "default_alpha")]
    pub alpha: Exponent,
    #[serde(default)]
    pub kac_normalized: bool,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_j")]
    pub j: f64,
    #[serde(default = "default_hx")]
    pub h_x: f64,
    #[serde(default = "default_hz")]
    pub h_z: f64,
}

impl HamiltonianSpec {
    fn with_family(family: Family, n_qubits: usize) -> Self {
        Self {
            family,
            n_qubits,
            alpha: Exponent::Infinite,
            kac_normalized: false,
            gamma: default_gamma(),
            j: default_j(),
            h_x: default_hx(),
            h_z: default_hz(),
        }
    }

    /// Nearest-neighbour chain.
    pub fn local(n_qubits: usize) -> Self {
        Self::with_family(Family::Local, n_qubits)
    }

    pub fn powerlaw(n_qubits: usize, alpha: impl Into<Exponent>, kac_normalized: bool) -> Self {
        Self {
            alpha: alpha.into(),
            kac_normalized,
            ..Self::with_family(Family::Powerlaw, n_qubits)
        }
    }

    /// Local chain plus the `N^-1/2` all-to-all term.
    pub fn fast_scrambler(n_qubits: usize) -> Self {
        Self::with_family(Family::FastScrambler, n_qubits)
    }

    pub fn with_fields(mut self, h_x: f64, h_z: f64) -> Self {
        self.h_x = h_x;
        self.h_z = h_z;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_qubits must be at least 2, got {}",
                self.n_qubits
            )));
        }
        if self.n_qubits > 30 {
            return Err(Error::InvalidSpec(format!(
                "n_qubits = {} cannot be indexed by a dense state",
                self.n_qubits
            )));
        }
        if let Exponent::Finite(a) = self.alpha {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(Error::InvalidSpec(format!("alpha must be >= 0 or inf, got {a}")));
            }
        }
        if self.family == Family::Local && !self.alpha.is_infinite() {
            return Err(Error::InvalidSpec(
                "the local family has nearest-neighbour couplings only; leave alpha unset or inf"
                    .into(),
            ));
        }
        if self.gamma.is_nan() {
            return Err(Error::InvalidSpec("gamma is NaN".into()));
        }
        for (name, v) in [("j", self.j), ("h_x", self.h_x), ("h_z", self.h_z)] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Coupling normalization `kappa` used by this spec.
    pub fn kappa(&self) -> f64 {
        if self.family == Family::Powerlaw && self.kac_normalized {
            kac_constant(self.alpha, self.n_qubits)
        } else {
            1.0
        }
    }

    /// Every nonzero `ZZ` coupling `J_mn` (the term is `-J_mn Z_m Z_n`).
    pub fn couplings(&self) -> Vec<Coupling> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        match self.family {
            Family::Local => {
                for m in 1..n {
                    out.push(Coupling::new(m, m + 1, self.j));
                }
            }
            Family::Powerlaw => {
                let kappa = self.kappa();
                for m in 1..=n {
                    for k in m + 1..=n {
                        let v = self.j * self.alpha.decay(k - m) / kappa;
                        if v != 0.0 {
                            out.push(Coupling::new(m, k, v));
                        }
                    }
                }
            }
            Family::FastScrambler => {
                let all = all_to_all_prefactor(self.gamma, n);
                for m in 1..=n {
                    for k in m + 1..=n {
                        let local = if k == m + 1 { self.j } else { 0.0 };
                        let v = local + all;
                        if v != 0.0 {
                            out.push(Coupling::new(m, k, v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Short label used in tables, e.g. `alpha=1.1,kac`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Local => "local".to_string(),
            Family::Powerlaw => format!(
                "alpha={}{}",
                self.alpha,
                if self.kac_normalized { ",kac" } else { "" }
            ),
            Family::FastScrambler => format!("fs,gamma={}", self.gamma),
        }
    }
}

fn all_to_all_prefactor(gamma: f64, n: usize) -> f64 {
    if gamma == f64::INFINITY {
        0.0
    } else {
        (n as f64).powf(-gamma)
    }
}

/// One `ZZ` coupling between sites `m < n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub m: usize,
    pub n: usize,
    pub value: f64,
}

impl Coupling {
    fn new(m: usize, n: usize, value: f64) -> Self {
        Self { m, n, value }
    }
}

/// Kac constant `kappa = 1/(N-1) sum_{m<n} 1/|m-n|^alpha`.
pub fn kac_constant(alpha: impl Into<Exponent>, n_qubits: usize) -> f64 {
    let alpha = alpha.into();
    let n = n_qubits;
    if n < 2 {
        return 1.0;
    }
    // N - d pairs sit at distance d
    let sum: f64 = (1..n).map(|d| (n - d) as f64 * alpha.decay(d)).sum();
    sum / (n - 1) as f64
}

/// Assembled Hamiltonian in the `Z`-product basis.
///
/// The matrix is real symmetric: a diagonal plus `-h_x` on every pair of
/// basis states that differ in exactly one bit.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    spec: HamiltonianSpec,
    diagonal: Vec<f64>,
}

impl HamiltonianMatrix {
    fn assemble(spec: &HamiltonianSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_qubits;
        let dim = 1usize << n;
        let couplings = spec.couplings();
        let mut diagonal = vec![0.0; dim];
        for (b, d) in diagonal.iter_mut().enumerate() {
            let z = |site: usize| if (b >> (site - 1)) & 1 == 0 { 1.0 } else { -1.0 };
            let mut e = 0.0;
            for c in &couplings {
                e -= c.value * z(c.m) * z(c.n);
            }
            for site in 1..=n {
                e -= spec.h_z * z(site);
            }
            *d = e;
        }
        Ok(Self {
            spec: spec.clone(),
            diagonal,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Off-diagonal element between states that differ in one bit.
    pub fn flip_amplitude(&self) -> f64 {
        -self.spec.h_x
    }

    /// `out = H psi` without materializing the matrix.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let flip = self.flip_amplitude();
        let n = self.n_qubits();
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = psi[b] * self.diagonal[b];
            if flip != 0.0 {
                let mut off = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    off += psi[b ^ (1 << k)];
                }
                acc += off * flip;
            }
            *o = acc;
        }
    }

    /// `<psi|H|psi>`.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut h_psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Dense real matrix; refuses chains longer than `max_qubits`.
    pub fn to_dense(&self, max_qubits: usize) -> Result<Mat<f64>> {
        let n = self.n_qubits();
        if n > max_qubits {
            return Err(Error::DimensionLimit {
                what: "dense Hamiltonian",
                n_qubits: n,
                limit: max_qubits,
            });
        }
        let dim = self.dim();
        let flip = self.flip_amplitude();
        let mut m = Mat::<f64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b, b)] = self.diagonal[b];
            if flip != 0.0 {
                for k in 0..n {
                    m[(b ^ (1 << k), b)] = flip;
                }
            }
        }
        Ok(m)
    }
}

/// Powerlaw (or, for the local family, nearest-neighbour) mixed-field Ising chain.
pub fn build_powerlaw_ising(spec: &HamiltonianSpec) -> Result<HamiltonianMatrix> {
    match spec.family {
        Family::Powerlaw | Family::Local => HamiltonianMatrix::assemble(spec),
        Family::FastScrambler => Err(Error::InvalidSpec(
            "build_powerlaw_ising needs the local or powerlaw family".into(),
        )),
    }
}

/// Local chain plus the uniform all-to-all `ZZ` term; nearest neighbours get both.
pub fn build_fast_scrambler(spec: &HamiltonianSpec) -> Result<HamiltonianMatrix> {
    match spec.family {
        Family::FastScrambler => HamiltonianMatrix::assemble(spec),
        _ => Err(Error::InvalidSpec(
            "build_fast_scrambler needs the fast_scrambler family".into(),
        )),
    }
}

/// Builds whichever family `spec` names.
pub fn build(spec: &HamiltonianSpec) -> Result<HamiltonianMatrix> {
    match spec.family {
        Family::FastScrambler => build_fast_scrambler(spec),
        _ => build_powerlaw_ising(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coupling(spec: &HamiltonianSpec, m: usize, n: usize) -> f64 {
        spec.couplings()
            .iter()
            .find(|c| c.m == m && c.n == n)
            .map_or(0.0, |c| c.value)
    }

    #[test]
    fn kac_constants() {
        for n in [2, 5, 17] {
            assert_eq!(kac_constant(Exponent::Infinite, n), 1.0);
            assert_abs_diff_eq!(kac_constant(0.0, n), n as f64 / 2.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(kac_constant(1.0, 3), 1.25, epsilon = 1e-15);
        assert_eq!(kac_constant(f64::INFINITY, 4), 1.0);
    }

    #[test]
    fn two_site_matrix() {
        let spec = HamiltonianSpec::powerlaw(2, 1.0, false);
        let h = build_powerlaw_ising(&spec).unwrap();
        assert_eq!(h.diagonal(), &[-2.0, 1.0, 1.0, 0.0]);
        let m = h.to_dense(14).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            assert_eq!(m[(i, j)], 1.05);
            assert_eq!(m[(j, i)], 1.05);
        }
        assert_eq!(m[(0, 3)], 0.0);
        assert_eq!(m[(1, 2)], 0.0);
    }

    #[test]
    fn zero_transverse_field_is_diagonal() {
        let spec = HamiltonianSpec::powerlaw(4, 1.7, true).with_fields(0.0, 0.5);
        let m = build(&spec).unwrap().to_dense(14).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(m[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn kac_normalized_three_site_couplings() {
        let spec = HamiltonianSpec::powerlaw(3, 1.0, true);
        assert_abs_diff_eq!(coupling(&spec, 1, 2), 1.0 / 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(coupling(&spec, 2, 3), 1.0 / 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(coupling(&spec, 1, 3), 0.5 / 1.25, epsilon = 1e-15);
    }

    #[test]
    fn fast_scrambler_couplings() {
        let two = HamiltonianSpec::fast_scrambler(2);
        assert_abs_diff_eq!(coupling(&two, 1, 2), 1.0 + 0.5f64.sqrt(), epsilon = 1e-15);
        let three = HamiltonianSpec::fast_scrambler(3);
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(coupling(&three, 1, 3), s, epsilon = 1e-15);
        assert_abs_diff_eq!(coupling(&three, 1, 2), 1.0 + s, epsilon = 1e-15);
        assert_abs_diff_eq!(coupling(&three, 2, 3), 1.0 + s, epsilon = 1e-15);
    }

    #[test]
    fn fast_scrambler_without_all_to_all_is_local() {
        for n in [2, 3, 6] {
            let fs = build(&HamiltonianSpec::fast_scrambler(n).with_gamma(f64::INFINITY)).unwrap();
            let local = build(&HamiltonianSpec::local(n)).unwrap();
            let d = fs.to_dense(14).unwrap() - local.to_dense(14).unwrap();
            assert!(d.norm_max() < 1e-14);
        }
    }

    #[test]
    fn wrong_builder_or_bad_spec_is_rejected() {
        assert!(build_fast_scrambler(&HamiltonianSpec::local(4)).is_err());
        assert!(build_powerlaw_ising(&HamiltonianSpec::fast_scrambler(4)).is_err());
        assert!(build(&HamiltonianSpec::local(1)).is_err());
        assert!(build(&HamiltonianSpec::powerlaw(4, -1.0, false)).is_err());
        let mut local = HamiltonianSpec::local(4);
        local.alpha = Exponent::Finite(2.0);
        assert!(matches!(build(&local), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn dense_limit_is_enforced() {
        let h = build(&HamiltonianSpec::local(6)).unwrap();
        assert!(matches!(
            h.to_dense(5),
            Err(Error::DimensionLimit { n_qubits: 6, limit: 5, .. })
        ));
    }

    #[test]
    fn matrix_free_apply_matches_dense() {
        let h = build(&HamiltonianSpec::powerlaw(5, 1.1, true)).unwrap();
        let m = h.to_dense(14).unwrap();
        let psi: Vec<Complex64> = (0..32)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 32];
        h.apply(&psi, &mut out);
        for i in 0..32 {
            let dense: Complex64 = (0..32).map(|j| psi[j] * m[(i, j)]).sum();
            assert!((dense - out[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn exponent_serde() {
        #[derive(Deserialize, Serialize)]
        struct W {
            alpha: Exponent,
        }
        let w: W = serde_json::from_str(r#"{"alpha": "inf"}"#).unwrap();
        assert_eq!(w.alpha, Exponent::Infinite);
        let w: W = serde_json::from_str(r#"{"alpha": 1.5}"#).unwrap();
        assert_eq!(w.alpha, Exponent::Finite(1.5));
        let w: W = serde_json::from_str(r#"{"alpha": "2.5"}"#).unwrap();
        assert_eq!(w.alpha, Exponent::Finite(2.5));
        assert!(serde_json::from_str::<W>(r#"{"alpha": "big"}"#).is_err());
        let back = serde_json::to_string(&W { alpha: Exponent::Infinite }).unwrap();
        assert_eq!(back, r#"{"alpha":"inf"}"#);
    }
}
