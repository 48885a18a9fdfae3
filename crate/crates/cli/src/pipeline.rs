//! Measurement pipelines. Every model (and every size, for the finite-size
//! sweep) is an independent job; jobs run on a rayon pool and their tables
//! are concatenated in the declared model order, so output never depends
//! on the worker count.

use rayon::prelude::*;

use scramble::hamiltonian::{build, HamiltonianMatrix, HamiltonianSpec};
use scramble::hilbert::{product_state, reduced_density_matrix};
use scramble::lightcone::{
    default_butterfly_window, default_entanglement_window, extract_contour, fit_butterfly_velocity,
    fit_entanglement_velocity, ScramblingField,
};
use scramble::observables::{
    entanglement_entropy, operator_states, otoc_inf_t, page_value_for, squared_commutator_inf_t,
    squared_commutator_pure_grid, time_average, total_magnetization_z, trace_distance_to_maximally_mixed,
    window_average,
};
use scramble::operators::{haar_operator_size, operator_density_profile, operator_size};
use scramble::propagation::{eigendecompose, HeisenbergEvolver, Propagator};
use scramble::{CommutatorSample, LocalPauli, Region, StateVector};

use crate::config::{EnsembleChoice, ExperimentConfig, ModelConfig, Pipeline};
use crate::error::{Result, RunError};
use crate::output::{slug, Cell, ResultTable};

/// One unit of work: a model at a chain length.
struct Job<'a> {
    model: &'a ModelConfig,
    n: usize,
}

impl Job<'_> {
    fn spec(&self) -> HamiltonianSpec {
        self.model.spec(self.n)
    }

    fn label(&self) -> String {
        self.model.label()
    }
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    times: Vec<f64>,
}

/// Computes every table of a run without touching the file system.
pub fn compute(config: &ExperimentConfig, workers: usize) -> Result<Vec<ResultTable>> {
    config.validate()?;
    check_unique_labels(config)?;
    let runner = Runner {
        config,
        times: config.time.times()?,
    };
    let jobs: Vec<Job> = config
        .all_sizes()
        .into_iter()
        .flat_map(|n| {
            config
                .models
                .iter()
                .map(move |model| Job { model, n })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Resource(format!("cannot start {workers} worker threads: {e}")))?;
    let parts: Vec<Result<Vec<ResultTable>>> =
        pool.install(|| jobs.par_iter().map(|job| runner.job(job)).collect());
    let mut tables: Vec<ResultTable> = Vec::new();
    for part in parts {
        for t in part? {
            match tables.iter_mut().find(|x| x.name == t.name) {
                Some(existing) => existing.rows.extend(t.rows),
                None => tables.push(t),
            }
        }
    }
    Ok(tables)
}

fn check_unique_labels(config: &ExperimentConfig) -> Result<()> {
    let labels: Vec<String> = config.models.iter().map(ModelConfig::label).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(RunError::Schema(format!(
                "models[{i}]: label `{l}` is already used; set `label` to tell the models apart"
            )));
        }
        if labels[..i].iter().any(|o| slug(o) == slug(l)) {
            return Err(RunError::Schema(format!(
                "models[{i}]: label `{l}` maps to the same file name as an earlier model"
            )));
        }
    }
    Ok(())
}

impl Runner<'_> {
    fn job(&self, job: &Job) -> Result<Vec<ResultTable>> {
        match self.config.pipeline {
            Pipeline::Commutator => self.commutator(job),
            Pipeline::Entropy => self.entropy(job).map(|t| vec![t]),
            Pipeline::OperatorState => self.operator_state(job),
            Pipeline::OperatorSize => self.operator_size(job),
            Pipeline::Thermalization => self.thermalization(job),
            Pipeline::Velocities => self.velocities(job),
            Pipeline::Lightcones => self.lightcones(job),
            Pipeline::FiniteSize => self.finite_size(job),
        }
    }

    fn hamiltonian(&self, job: &Job) -> Result<HamiltonianMatrix> {
        Ok(build(&job.spec())?)
    }

    fn propagator(&self, h: &HamiltonianMatrix) -> Result<Propagator> {
        Ok(Propagator::new(
            h,
            self.config.method,
            &self.config.limits,
            &self.config.krylov,
        )?)
    }

    fn initial_state(&self, n: usize) -> Result<StateVector> {
        Ok(product_state(self.config.initial_state, n)?)
    }

    /// `C_r(t)` samples ordered by `(site, time)`.
    fn commutator_samples(&self, job: &Job, sites: &[usize]) -> Result<Vec<CommutatorSample>> {
        let h = self.hamiltonian(job)?;
        let probe = &self.config.probe;
        match probe.ensemble {
            EnsembleChoice::PureState => {
                let prop = self.propagator(&h)?;
                let psi0 = self.initial_state(job.n)?;
                Ok(squared_commutator_pure_grid(
                    &prop,
                    probe.w(),
                    probe.v_kind,
                    sites,
                    &psi0,
                    &self.times,
                )?)
            }
            EnsembleChoice::InfiniteTemperature => {
                let limits = &self.config.limits;
                let d = eigendecompose(&h, limits)?;
                let seed = probe.w().to_matrix(job.n)?;
                let ev = HeisenbergEvolver::new(&d, seed.as_ref(), limits)?;
                let ops: Vec<_> = self.times.par_iter().map(|&t| ev.at(t)).collect();
                let mut out = Vec::with_capacity(sites.len() * ops.len());
                for &site in sites {
                    let v = LocalPauli::new(probe.v_kind, site);
                    for w in &ops {
                        out.push(CommutatorSample {
                            time: w.time(),
                            site,
                            value: squared_commutator_inf_t(w, v)?,
                            otoc: otoc_inf_t(w, v)?,
                            ensemble: scramble::Ensemble::InfiniteTemperature,
                        });
                    }
                }
                Ok(out)
            }
        }
    }

    fn commutator_tables(&self, job: &Job, sites: &[usize]) -> Result<(ResultTable, ScramblingField)> {
        let samples = self.commutator_samples(job, sites)?;
        let label = job.label();
        let mut table = ResultTable::new("commutator", &["model", "site", "t", "C", "F_re", "F_im"]);
        for s in &samples {
            table.push(vec![
                label.as_str().into(),
                s.site.into(),
                s.time.into(),
                s.value.into(),
                s.otoc.re.into(),
                s.otoc.im.into(),
            ]);
        }
        let values = samples
            .chunks(self.times.len())
            .map(|c| c.iter().map(|s| s.value).collect())
            .collect();
        let field = ScramblingField::new(sites.to_vec(), self.times.clone(), values)?;
        Ok((table, field))
    }

    fn contour_table(&self, label: &str, field_name: &str, field: &ScramblingField) -> ResultTable {
        let mut table =
            ResultTable::new("contours", &["model", "field", "theta", "site", "t_theta", "crossings"]);
        for &theta in &self.config.thresholds {
            let c = extract_contour(field, theta);
            for ((site, t), count) in c.sites.iter().zip(&c.crossings).zip(&c.crossing_counts) {
                table.push(vec![
                    label.into(),
                    field_name.into(),
                    theta.into(),
                    (*site).into(),
                    (*t).into(),
                    (*count).into(),
                ]);
            }
        }
        table
    }

    fn commutator(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let sites = self.config.probe.sites(job.n);
        let (table, field) = self.commutator_tables(job, &sites)?;
        let contours = self.contour_table(&job.label(), "C", &field);
        Ok(vec![table, contours])
    }

    fn entropy_series(&self, job: &Job, region: &Region) -> Result<Vec<f64>> {
        let h = self.hamiltonian(job)?;
        let prop = self.propagator(&h)?;
        let psi0 = self.initial_state(job.n)?;
        prop.evolve_grid(&psi0, &self.times)?
            .iter()
            .map(|psi| Ok(entanglement_entropy(psi, region)?))
            .collect()
    }

    fn entropy(&self, job: &Job) -> Result<ResultTable> {
        let region = self.config.region_for(job.n)?;
        let column = if self.config.region.is_none() { "S_halfchain" } else { "S_A" };
        let page = page_value_for(region.len(), job.n);
        let s = self.entropy_series(job, &region)?;
        let mut table = ResultTable::new("entropy", &["t", "model", column, "S_over_page"]);
        let label = job.label();
        for (&t, &s) in self.times.iter().zip(&s) {
            table.push(vec![t.into(), label.as_str().into(), s.into(), (s / page).into()]);
        }
        Ok(table)
    }

    fn operator_state_entropies(&self, job: &Job, regions: &[Region]) -> Result<Vec<Vec<f64>>> {
        let h = self.hamiltonian(job)?;
        let prop = self.propagator(&h)?;
        let psi0 = self.initial_state(job.n)?;
        let phi = operator_states(&prop, self.config.probe.w(), &psi0, &self.times)?;
        regions
            .iter()
            .map(|r| phi.iter().map(|s| Ok(entanglement_entropy(s, r)?)).collect())
            .collect()
    }

    fn operator_state(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let region = self.config.region_for(n)?;
        let b = region.complement(n);
        let (first, last) = (b.sites()[0], *b.sites().last().unwrap());
        let s = self.operator_state_entropies(job, std::slice::from_ref(&region))?.remove(0);
        let samples = self.commutator_samples(job, &[first, last])?;
        let (c_first, c_last) = samples.split_at(self.times.len());
        let page = page_value_for(region.len(), n);
        let mut table = ResultTable::new(
            "operator_state",
            &["t", "model", "S_A", "S_A_over_page", "C_B_first", "C_B_last"],
        );
        let label = job.label();
        for (k, &t) in self.times.iter().enumerate() {
            table.push(vec![
                t.into(),
                label.as_str().into(),
                s[k].into(),
                (s[k] / page).into(),
                c_first[k].value.into(),
                c_last[k].value.into(),
            ]);
        }
        Ok(vec![table])
    }

    /// `(L, p_0, p_1..p_N)` per time from dense Heisenberg evolution.
    fn density_profiles(&self, job: &Job) -> Result<Vec<(f64, f64, Vec<f64>)>> {
        let limits = &self.config.limits;
        limits.check_dense_operator(job.n)?;
        let h = self.hamiltonian(job)?;
        let d = eigendecompose(&h, limits)?;
        let seed = self.config.probe.w().to_matrix(job.n)?;
        let ev = HeisenbergEvolver::new(&d, seed.as_ref(), limits)?;
        self.times
            .par_iter()
            .map(|&t| {
                let p = operator_density_profile(&ev.at(t))?;
                Ok((operator_size(&p), p.identity_weight, p.weights))
            })
            .collect()
    }

    fn operator_size(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let profiles = self.density_profiles(job)?;
        let haar = haar_operator_size(n);
        let label = job.label();
        let mut size = ResultTable::new("opsize", &["t", "model", "L", "L_over_haar"]);
        let mut columns = vec!["t".to_string(), "p_0".to_string()];
        columns.extend((1..=n).map(|l| format!("p_{l}")));
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut density = ResultTable::new(format!("density_{}", slug(&label)), &cols);
        for (&t, (l, p0, weights)) in self.times.iter().zip(&profiles) {
            size.push(vec![t.into(), label.as_str().into(), (*l).into(), (l / haar).into()]);
            let mut row: Vec<Cell> = vec![t.into(), (*p0).into()];
            row.extend(weights.iter().map(|&w| Cell::from(w)));
            density.push(row);
        }
        Ok(vec![size, density])
    }

    fn thermalization(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let region = self.config.region_for(n)?;
        let h = self.hamiltonian(job)?;
        let prop = self.propagator(&h)?;
        let psi0 = self.initial_state(n)?;
        let states = prop.evolve_grid(&psi0, &self.times)?;
        let mz: Vec<f64> = states.iter().map(total_magnetization_z).collect();
        let dist = states
            .iter()
            .map(|s| Ok(trace_distance_to_maximally_mixed(&reduced_density_matrix(s, &region)?)?))
            .collect::<Result<Vec<f64>>>()?;
        let running = if self.times.len() > 1 {
            time_average(&self.times, &mz)?
        } else {
            mz.clone()
        };
        let label = job.label();
        let mut table = ResultTable::new(
            "thermalization",
            &["t", "model", "M_Z", "M_Z_running_mean", "trace_distance"],
        );
        for k in 0..self.times.len() {
            table.push(vec![
                self.times[k].into(),
                label.as_str().into(),
                mz[k].into(),
                running[k].into(),
                dist[k].into(),
            ]);
        }
        let t_end = *self.times.last().unwrap();
        let [lo, hi] = self.config.average_window.unwrap_or([0.5 * t_end, t_end]);
        let mz_avg = window_average(&self.times, &mz, lo, hi)?;
        let mut summary = ResultTable::new(
            "thermalization_summary",
            &[
                "model",
                "window_start",
                "window_end",
                "M_Z_mean",
                "M_Z_mean_over_N",
                "trace_distance_mean",
                "trace_distance_final",
            ],
        );
        summary.push(vec![
            label.as_str().into(),
            lo.into(),
            hi.into(),
            mz_avg.into(),
            (mz_avg / n as f64).into(),
            window_average(&self.times, &dist, lo, hi)?.into(),
            (*dist.last().unwrap()).into(),
        ]);
        Ok(vec![table, summary])
    }

    fn velocities(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let label = job.label();
        let sites: Vec<usize> = (1..=n).collect();
        let (commutator, field) = self.commutator_tables(job, &sites)?;
        let theta = self.config.thresholds[0];
        let window = self
            .config
            .fit
            .butterfly_sites
            .map_or_else(|| default_butterfly_window(n), |[a, b]| (a, b));
        let vb = fit_butterfly_velocity(&extract_contour(&field, theta), window).ok();

        let half = Region::left_half(n)?;
        let s = self.entropy_series(job, &half)?;
        let page = page_value_for(half.len(), n);
        let e_window = match self.config.fit.entanglement_window {
            Some([a, b]) => Some((a, b)),
            None => default_entanglement_window(&self.times, &s, page),
        };
        let ve = e_window.and_then(|w| fit_entanglement_velocity(&self.times, &s, w).ok());

        let mut entropy = ResultTable::new("entropy", &["t", "model", "S_halfchain", "S_over_page"]);
        for (&t, &x) in self.times.iter().zip(&s) {
            entropy.push(vec![t.into(), label.as_str().into(), x.into(), (x / page).into()]);
        }
        let mut table = ResultTable::new(
            "velocities",
            &[
                "model",
                "alpha",
                "theta",
                "v_B",
                "v_B_residual",
                "v_B_points",
                "v_E",
                "v_E_residual",
                "v_E_window_start",
                "v_E_window_end",
            ],
        );
        table.push(vec![
            label.as_str().into(),
            job.spec().alpha.to_string().into(),
            theta.into(),
            vb.as_ref().map(|f| f.velocity).into(),
            vb.as_ref().map(|f| f.residual).into(),
            vb.as_ref().map_or(Cell::Missing, |f| f.points.into()),
            ve.as_ref().map(|f| f.velocity).into(),
            ve.as_ref().map(|f| f.residual).into(),
            e_window.map(|w| w.0).into(),
            e_window.map(|w| w.1).into(),
        ]);
        Ok(vec![table, entropy, commutator])
    }

    fn lightcones(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let label = job.label();
        let sites = self.config.probe.sites(n);
        let (commutator, field) = self.commutator_tables(job, &sites)?;
        let mut contours = self.contour_table(&label, "C", &field);

        let cuts: Vec<usize> = (1..n).collect();
        let regions = cuts
            .iter()
            .map(|&c| Ok(Region::prefix(c, n)?))
            .collect::<Result<Vec<_>>>()?;
        let entropies = self.operator_state_entropies(job, &regions)?;
        let mut table = ResultTable::new("operator_entropy", &["model", "cut", "t", "S_A", "S_A_over_page"]);
        let mut normalized = Vec::with_capacity(cuts.len());
        for (&cut, s) in cuts.iter().zip(&entropies) {
            let page = page_value_for(cut, n);
            let row: Vec<f64> = s.iter().map(|x| x / page).collect();
            for (k, &t) in self.times.iter().enumerate() {
                table.push(vec![
                    label.as_str().into(),
                    cut.into(),
                    t.into(),
                    s[k].into(),
                    row[k].into(),
                ]);
            }
            normalized.push(row);
        }
        let s_field = ScramblingField::new(cuts, self.times.clone(), normalized)?;
        contours
            .rows
            .extend(self.contour_table(&label, "S_A_over_page", &s_field).rows);
        Ok(vec![commutator, table, contours])
    }

    fn finite_size(&self, job: &Job) -> Result<Vec<ResultTable>> {
        let n = job.n;
        let label = job.label();
        let region = self.config.region_for(n)?;
        let s = self.operator_state_entropies(job, std::slice::from_ref(&region))?.remove(0);
        let c = self.commutator_samples(job, &[n])?;
        let page = page_value_for(region.len(), n);
        let mut state = ResultTable::new(
            "finite_size_state",
            &["n_qubits", "t", "model", "S_A", "S_A_over_page", "C_N"],
        );
        for (k, &t) in self.times.iter().enumerate() {
            state.push(vec![
                n.into(),
                t.into(),
                label.as_str().into(),
                s[k].into(),
                (s[k] / page).into(),
                c[k].value.into(),
            ]);
        }
        let haar = haar_operator_size(n);
        let mut size = ResultTable::new("finite_size_opsize", &["n_qubits", "t", "model", "L", "L_over_haar"]);
        for (&t, (l, _, _)) in self.times.iter().zip(&self.density_profiles(job)?) {
            size.push(vec![n.into(), t.into(), label.as_str().into(), (*l).into(), (l / haar).into()]);
        }
        Ok(vec![state, size])
    }
}
