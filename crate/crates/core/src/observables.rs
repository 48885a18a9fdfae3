//! State-level scrambling and thermalization diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    apply_local_pauli, check_site, schmidt_weights, DensityMatrix, LocalPauli, PauliKind, Region,
    StateVector,
};
use crate::propagation::{check_time_grid, HeisenbergOperator, Propagator};

/// Eigenvalues below this are treated as exact zeros in entropies.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-14;

/// Subsystem entropy at one time, in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub time: f64,
    pub region: Region,
    pub entropy: f64,
    /// `entropy / page_value` for the same bipartition.
    pub normalized: f64,
}

/// Expectation value used for a squared commutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    PureState,
    InfiniteTemperature,
}

/// `C_r(t)` together with the OTOC `F_r(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorSample {
    pub time: f64,
    pub site: usize,
    pub value: f64,
    pub otoc: Complex64,
    pub ensemble: Ensemble,
}

/// `-sum p ln p` over weights above the floor.
pub fn entropy_of_weights(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&p| p > ENTROPY_EIGENVALUE_FLOOR)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        // eigenvalues a rounding error above 1 would give -0.0..-1e-15
        .max(0.0)
}

/// Von Neumann entropy `-Tr rho ln rho` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let scale = rho.entries().norm_max().max(1.0);
    let deviation = rho.hermiticity_deviation();
    if deviation > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(entropy_of_weights(&rho.eigenvalues()?))
}

/// Entanglement entropy of `region` in a pure state.
pub fn entanglement_entropy(state: &StateVector, region: &Region) -> Result<f64> {
    Ok(entropy_of_weights(&schmidt_weights(state, region)?))
}

/// Average entropy of an `n_a`-qubit subsystem of a Haar-random pure state
/// on `n_a + n_b` qubits: `ln d_A - d_A / (2 d_B)` with `d_A <= d_B`.
pub fn page_value(n_a: usize, n_b: usize) -> f64 {
    let (small, large) = if n_a <= n_b { (n_a, n_b) } else { (n_b, n_a) };
    let d_a = 2f64.powi(small as i32);
    let d_b = 2f64.powi(large as i32);
    d_a.ln() - d_a / (2.0 * d_b)
}

/// Page value for a region of `region_len` sites in an `n_qubits` chain.
pub fn page_value_for(region_len: usize, n_qubits: usize) -> f64 {
    page_value(region_len, n_qubits - region_len)
}

/// `|Phi(t)> = W(t)|psi0> = e^{iHt} W e^{-iHt} |psi0>`.
pub fn operator_state(
    propagator: &Propagator,
    w: LocalPauli,
    psi0: &StateVector,
    t: f64,
) -> Result<StateVector> {
    w.check(psi0.n_qubits())?;
    let forward = propagator.evolve(psi0, t)?;
    let kicked = apply_local_pauli(&forward, w.kind, w.site)?;
    propagator.evolve(&kicked, -t)
}

/// `|Phi(t)>` for every time of a nondecreasing grid.
pub fn operator_states(
    propagator: &Propagator,
    w: LocalPauli,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    w.check(psi0.n_qubits())?;
    heisenberg_states(propagator, w, psi0, times)
}

/// `W(t)|state>` along a grid, stepping the forward branch incrementally.
fn heisenberg_states(
    propagator: &Propagator,
    w: LocalPauli,
    state: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    let kicked = propagator
        .evolve_grid(state, times)?
        .iter()
        .map(|psi_t| apply_local_pauli(psi_t, w.kind, w.site))
        .collect::<Result<Vec<_>>>()?;
    let backward: Vec<f64> = times.iter().map(|t| -t).collect();
    propagator.evolve_each(&kicked, &backward)
}

fn commutator_from_branches(
    w_psi: &StateVector,
    w_v_psi: &StateVector,
    v: LocalPauli,
    time: f64,
) -> Result<CommutatorSample> {
    // C = 1/2 ||W(t) V psi - V W(t) psi||^2 and F = <W(t) psi| V |W(t) V psi>
    let v_w_psi = apply_local_pauli(w_psi, v.kind, v.site)?;
    let v_w_v_psi = apply_local_pauli(w_v_psi, v.kind, v.site)?;
    Ok(CommutatorSample {
        time,
        site: v.site,
        value: 0.5 * w_v_psi.distance_sqr(&v_w_psi),
        otoc: w_psi.inner(&v_w_v_psi),
        ensemble: Ensemble::PureState,
    })
}

/// Squared commutator `1/2 <[W(t), V]^dagger [W(t), V]>` in a pure state,
/// from forward/backward state evolutions only.
pub fn squared_commutator_pure(
    propagator: &Propagator,
    w: LocalPauli,
    v: LocalPauli,
    psi0: &StateVector,
    t: f64,
) -> Result<CommutatorSample> {
    let n = psi0.n_qubits();
    w.check(n)?;
    v.check(n)?;
    let w_psi = operator_state(propagator, w, psi0, t)?;
    let v_psi = apply_local_pauli(psi0, v.kind, v.site)?;
    let w_v_psi = operator_state(propagator, w, &v_psi, t)?;
    commutator_from_branches(&w_psi, &w_v_psi, v, t)
}

/// Returns `lambda` if `state` is an eigenvector of `P` with eigenvalue `lambda`.
fn eigenvalue_of(state: &StateVector, p: LocalPauli) -> Result<Option<Complex64>> {
    let image = apply_local_pauli(state, p.kind, p.site)?;
    let lambda = state.inner(&image) / state.norm_sqr();
    let residual = image.distance_sqr(&state.scaled(lambda));
    Ok((residual < 1e-24 * state.norm_sqr()).then_some(lambda))
}

/// Pure-state squared commutators for every probe site and time, ordered by
/// `(site, time)`. When `V_r|psi0> = lambda |psi0>` the second branch is
/// `lambda W(t)|psi0>` and no extra evolution is needed.
pub fn squared_commutator_pure_grid(
    propagator: &Propagator,
    w: LocalPauli,
    v_kind: PauliKind,
    sites: &[usize],
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<CommutatorSample>> {
    let n = psi0.n_qubits();
    w.check(n)?;
    for &s in sites {
        check_site(s, n)?;
    }
    check_time_grid(times, false)?;
    let w_psi = heisenberg_states(propagator, w, psi0, times)?;
    let mut out = Vec::with_capacity(sites.len() * times.len());
    for &site in sites {
        let v = LocalPauli::new(v_kind, site);
        let w_v_psi = match eigenvalue_of(psi0, v)? {
            Some(lambda) => w_psi.iter().map(|s| s.scaled(lambda)).collect(),
            None => {
                let v_psi = apply_local_pauli(psi0, v.kind, v.site)?;
                heisenberg_states(propagator, w, &v_psi, times)?
            }
        };
        for ((a, b), &t) in w_psi.iter().zip(&w_v_psi).zip(times) {
            out.push(commutator_from_branches(a, b, v, t)?);
        }
    }
    Ok(out)
}

fn local_pauli_element(p: LocalPauli, col: usize) -> (usize, Complex64) {
    // P|col> = phase |row>
    let bit = 1usize << (p.site - 1);
    let row = if p.kind.flips() { col ^ bit } else { col };
    (row, p.kind.phase(col & bit != 0))
}

/// `[W, V]` for a dense `W` and a local Pauli `V`.
fn commutator_with_local(wt: &HeisenbergOperator, v: LocalPauli) -> faer::Mat<Complex64> {
    let m = wt.matrix();
    let dim = m.nrows();
    faer::Mat::from_fn(dim, dim, |i, j| {
        // (W V)_ij = W_{i,k} V_{k,j} with V|j> = phase_j |k>
        let (k, phase_j) = local_pauli_element(v, j);
        let wv = m[(i, k)] * phase_j;
        // (V W)_ij = V_{i,l} W_{l,j} with V|l> = phase_l |i>
        let (l, _) = local_pauli_element(v, i);
        let (_, phase_l) = local_pauli_element(v, l);
        let vw = phase_l * m[(l, j)];
        wv - vw
    })
}

/// Infinite-temperature squared commutator `1/2 2^-N Tr([W,V]^dagger [W,V])`.
pub fn squared_commutator_inf_t(wt: &HeisenbergOperator, v: LocalPauli) -> Result<f64> {
    v.check(wt.n_qubits())?;
    let c = commutator_with_local(wt, v);
    let frob = c.norm_l2();
    Ok(0.5 * frob * frob / wt.matrix().nrows() as f64)
}

/// Infinite-temperature OTOC `2^-N Tr(W V W V)`.
pub fn otoc_inf_t(wt: &HeisenbergOperator, v: LocalPauli) -> Result<Complex64> {
    v.check(wt.n_qubits())?;
    let m = wt.matrix();
    let dim = m.nrows();
    // (W V)_ij = W_{i, k(j)} phase_j
    let wv = |i: usize, j: usize| {
        let (k, phase) = local_pauli_element(v, j);
        m[(i, k)] * phase
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += wv(i, j) * wv(j, i);
        }
    }
    Ok(acc / dim as f64)
}

/// Entropy of `region` in the operator state `W(t)|psi0>`.
pub fn operator_state_entropy(
    propagator: &Propagator,
    w: LocalPauli,
    psi0: &StateVector,
    t: f64,
    region: &Region,
) -> Result<EntropySample> {
    let phi = operator_state(propagator, w, psi0, t)?;
    entropy_sample(&phi, t, region)
}

/// Entropy sample of `region` in `state`.
pub fn entropy_sample(state: &StateVector, time: f64, region: &Region) -> Result<EntropySample> {
    let entropy = entanglement_entropy(state, region)?;
    Ok(EntropySample {
        time,
        region: region.clone(),
        entropy,
        normalized: entropy / page_value_for(region.len(), state.n_qubits()),
    })
}

/// `M_Z = sum_m <Z_m>`.
pub fn total_magnetization_z(state: &StateVector) -> f64 {
    let n = state.n_qubits();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let up = n as i64 - 2 * b.count_ones() as i64;
            a.norm_sqr() * up as f64
        })
        .sum()
}

/// Running time average `(1/(t - t_0)) int_{t_0}^t M dtau` by the trapezoidal
/// rule; the first entry is the first sample.
pub fn time_average(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("series"));
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    check_time_grid(times, true)?;
    let t0 = times[0];
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(values.len());
    out.push(values[0]);
    for k in 1..values.len() {
        integral += 0.5 * (values[k] + values[k - 1]) * (times[k] - times[k - 1]);
        out.push(integral / (times[k] - t0));
    }
    Ok(out)
}

/// Trapezoidal mean of the samples with `lo <= t <= hi`.
pub fn window_average(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let (ts, vs): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .unzip();
    match ts.len() {
        0 => Err(Error::Empty("averaging window")),
        1 => Ok(vs[0]),
        _ => Ok(*time_average(&ts, &vs)?.last().unwrap()),
    }
}

/// `1/2 sum_i |lambda_i(rho - 1/d)|`.
pub fn trace_distance_to_maximally_mixed(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    let shift = 1.0 / d as f64;
    let shifted = faer::Mat::from_fn(d, d, |i, j| {
        let x = rho.entries()[(i, j)];
        if i == j {
            x - shift
        } else {
            x
        }
    });
    let ev = crate::hilbert::hermitian_eigenvalues(shifted.as_ref())?;
    Ok(0.5 * ev.iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build, HamiltonianSpec};
    use crate::hilbert::{product_state, reduced_density_matrix, LocalState};
    use crate::propagation::{HeisenbergEvolver, NumericalLimits, SpectralDecomposition};
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::diagonal(&[1.0, 0.0]);
        assert_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        let mixed = DensityMatrix::diagonal(&[0.5, 0.5]);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed).unwrap(), 2f64.ln(), epsilon = 1e-15);
        let d = DensityMatrix::diagonal(&[0.75, 0.25]);
        let want = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert_abs_diff_eq!(von_neumann_entropy(&d).unwrap(), want, epsilon = 1e-15);
        assert_abs_diff_eq!(want, 0.5623, epsilon = 1e-4);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = faer::Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.3, 0.0),
            (1, 0) => Complex64::new(0.0, 0.0),
            _ => Complex64::new(0.5, 0.0),
        });
        let rho = DensityMatrix::new(m).unwrap();
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn page_values() {
        assert_abs_diff_eq!(page_value(1, 1), 2f64.ln() - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(page_value(1, 20), 2f64.ln() - 2f64.powi(-20), epsilon = 1e-15);
        for n in 1..8 {
            assert_abs_diff_eq!(page_value(n, n), n as f64 * 2f64.ln() - 0.5, epsilon = 1e-12);
        }
        assert_eq!(page_value(3, 5), page_value(5, 3));
    }

    #[test]
    fn magnetization_examples() {
        assert_abs_diff_eq!(
            total_magnetization_z(&product_state(LocalState::YPlus, 5).unwrap()),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            total_magnetization_z(&product_state(LocalState::ZPlus, 7).unwrap()),
            7.0,
            epsilon = 1e-14
        );
        let psi = product_state(LocalState::XPlus, 3).unwrap();
        let direct: f64 = (1..=3).map(|s| psi.expectation_z(s).unwrap()).sum();
        assert_abs_diff_eq!(total_magnetization_z(&psi), direct, epsilon = 1e-14);
    }

    #[test]
    fn running_average() {
        let times = [0.0, 0.5, 1.0, 2.0];
        let avg = time_average(&times, &[3.0; 4]).unwrap();
        assert!(avg.iter().all(|a| (a - 3.0).abs() < 1e-15));
        // linear ramp averages to its midpoint
        let avg = time_average(&times, &times).unwrap();
        assert_abs_diff_eq!(avg[3], 1.0, epsilon = 1e-15);
        assert!(time_average(&[], &[]).is_err());
        assert!(time_average(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert_abs_diff_eq!(window_average(&times, &times, 0.5, 2.0).unwrap(), 1.25, epsilon = 1e-15);
        assert!(window_average(&times, &times, 5.0, 6.0).is_err());
    }

    #[test]
    fn trace_distances() {
        let mixed = DensityMatrix::diagonal(&[0.25; 4]);
        assert_abs_diff_eq!(trace_distance_to_maximally_mixed(&mixed).unwrap(), 0.0, epsilon = 1e-15);
        let pure = DensityMatrix::pure(&product_state(LocalState::XPlus, 2).unwrap());
        assert_abs_diff_eq!(trace_distance_to_maximally_mixed(&pure).unwrap(), 0.75, epsilon = 1e-14);
        let half = DensityMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0]);
        assert_abs_diff_eq!(trace_distance_to_maximally_mixed(&half).unwrap(), 0.5, epsilon = 1e-15);
    }

    fn local_propagator(n: usize) -> Propagator {
        let h = build(&HamiltonianSpec::local(n)).unwrap();
        Propagator::spectral(&h, &NumericalLimits::default()).unwrap()
    }

    #[test]
    fn commutator_at_time_zero() {
        let p = local_propagator(4);
        let psi = product_state(LocalState::YPlus, 4).unwrap();
        let w = LocalPauli::new(PauliKind::Y, 1);
        for r in 2..=4 {
            let c = squared_commutator_pure(&p, w, LocalPauli::new(PauliKind::Y, r), &psi, 0.0).unwrap();
            assert!(c.value.abs() < 1e-12);
        }
        // <Z_1^2> = 1 in any product state
        for s in [LocalState::YPlus, LocalState::ZMinus, LocalState::XPlus] {
            let psi = product_state(s, 4).unwrap();
            let c = squared_commutator_pure(&p, w, LocalPauli::new(PauliKind::X, 1), &psi, 0.0).unwrap();
            assert_abs_diff_eq!(c.value, 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.value, 1.0 - c.otoc.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_matches_pointwise_and_eigenstate_shortcut() {
        let h = build(&HamiltonianSpec::powerlaw(5, 1.1, true)).unwrap();
        let p = Propagator::spectral(&h, &NumericalLimits::default()).unwrap();
        let psi = product_state(LocalState::YPlus, 5).unwrap();
        let w = LocalPauli::new(PauliKind::Y, 1);
        let times = [0.0, 0.7, 1.5];
        for v_kind in [PauliKind::Y, PauliKind::X] {
            let grid = squared_commutator_pure_grid(&p, w, v_kind, &[2, 5], &psi, &times).unwrap();
            assert_eq!(grid.len(), 6);
            for s in &grid {
                let single =
                    squared_commutator_pure(&p, w, LocalPauli::new(v_kind, s.site), &psi, s.time).unwrap();
                assert_abs_diff_eq!(s.value, single.value, epsilon = 1e-12);
                assert!((s.otoc - single.otoc).norm() < 1e-12);
            }
            assert_eq!(grid[0].site, 2);
            assert_eq!(grid[3].site, 5);
        }
    }

    #[test]
    fn infinite_temperature_basics() {
        let d = SpectralDecomposition::from_dense(
            build(&HamiltonianSpec::local(3)).unwrap().to_dense(14).unwrap().as_ref(),
        )
        .unwrap();
        let y1 = LocalPauli::new(PauliKind::Y, 1).to_matrix(3).unwrap();
        let w0 = HeisenbergEvolver::new(&d, y1.as_ref(), &NumericalLimits::default()).unwrap().at(0.0);
        assert!(squared_commutator_inf_t(&w0, LocalPauli::new(PauliKind::X, 3)).unwrap() < 1e-14);
        assert_abs_diff_eq!(
            squared_commutator_inf_t(&w0, LocalPauli::new(PauliKind::X, 1)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let wt = HeisenbergEvolver::new(&d, y1.as_ref(), &NumericalLimits::default()).unwrap().at(1.3);
        for kind in [PauliKind::X, PauliKind::Y, PauliKind::Z] {
            for site in 1..=3 {
                let v = LocalPauli::new(kind, site);
                let c = squared_commutator_inf_t(&wt, v).unwrap();
                let f = otoc_inf_t(&wt, v).unwrap();
                assert_abs_diff_eq!(c, 1.0 - f.re, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn operator_state_entropy_starts_at_zero() {
        let p = local_propagator(6);
        let psi = product_state(LocalState::YPlus, 6).unwrap();
        let w = LocalPauli::new(PauliKind::Y, 1);
        for sites in [vec![1, 2, 3], vec![2, 5], vec![6]] {
            let region = Region::new(sites, 6).unwrap();
            let s = operator_state_entropy(&p, w, &psi, 0.0, &region).unwrap();
            assert!(s.entropy < 1e-10);
        }
        for t in [0.5, 3.0, 11.0] {
            let phi = operator_state(&p, w, &psi, t).unwrap();
            assert_abs_diff_eq!(phi.norm_sqr(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn pure_state_entropy_is_symmetric() {
        let p = local_propagator(6);
        let psi = p.evolve(&product_state(LocalState::YPlus, 6).unwrap(), 2.0).unwrap();
        for sites in [vec![1], vec![1, 2], vec![2, 4, 5]] {
            let a = Region::new(sites, 6).unwrap();
            let b = a.complement(6);
            let sa = entanglement_entropy(&psi, &a).unwrap();
            let sb = entanglement_entropy(&psi, &b).unwrap();
            assert_abs_diff_eq!(sa, sb, epsilon = 1e-9);
            let rho = reduced_density_matrix(&psi, &a).unwrap();
            assert_abs_diff_eq!(von_neumann_entropy(&rho).unwrap(), sa, epsilon = 1e-10);
        }
    }
}
