use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use xxz_lindblad::analysis::EXACT_MODE_TOL;
use xxz_lindblad::spectral::{CLUSTER_TOL, KERNEL_TOL};
use xxz_lindblad::{
    build_o2, commutator_norm, decompose_with, degeneracy_count, detect_crossing, distance_trajectory,
    evolve_integrate, evolve_spectral, mode_similarity, overlap_spectrum, random_density_matrix, relaxation_times,
    sector_decompose, trace_distance, verify_exact_mode, LindbladModel64, ModelParams64, MpembaReport,
    SpectralDecomposition64, StateSpec, Trajectory64, C,
};

use crate::config::{Point, RunConfig, Task};
use crate::error::CliError;
use crate::output::OutputDir;

/// Times at which verify-mode compares spectral and integrated evolution.
const CROSS_CHECK_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Clone, Debug, Serialize)]
pub struct TaskTiming {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    pub task: Task,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub versions: Versions,
    pub timings: Vec<TaskTiming>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub xxz_relax: &'static str,
    pub xxz_lindblad: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            xxz_relax: env!("CARGO_PKG_VERSION"),
            xxz_lindblad: xxz_lindblad::VERSION,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct ModeRecord {
    re: f64,
    im: f64,
    sector: (usize, usize),
    generalized: bool,
    relaxation_time: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
struct ClusterRecord {
    re: f64,
    im: f64,
    multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
struct DefectiveRecord {
    sector: (usize, usize),
    re: f64,
    im: f64,
    algebraic: usize,
    geometric: usize,
}

#[derive(Clone, Debug, Serialize)]
struct SweepEntry {
    param: &'static str,
    value: f64,
    dir: String,
    params: ModelParams64,
    slowest_rate: Option<f64>,
    rate_two_modes: usize,
    kernel_dim: usize,
    defective_groups: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    mpemba: Vec<MpembaReport>,
}

/// Lazily computed state of one parameter point.
struct PointRun<'a> {
    point: &'a Point,
    out: OutputDir,
    config: &'a RunConfig,
    quiet: bool,
    model: Option<LindbladModel64>,
    decomposition: Option<SpectralDecomposition64>,
    trajectories: Option<Vec<Trajectory64>>,
    mpemba: Vec<MpembaReport>,
}

impl<'a> PointRun<'a> {
    fn log(&self, msg: &str) {
        if !self.quiet {
            eprintln!("[{}] {msg}", self.out.path().display());
        }
    }

    fn model(&mut self) -> Result<&LindbladModel64, CliError> {
        if self.model.is_none() {
            self.model = Some(LindbladModel64::xxz(self.point.params)?);
        }
        Ok(self.model.as_ref().expect("just set"))
    }

    fn decomposition(&mut self) -> Result<&SpectralDecomposition64, CliError> {
        if self.decomposition.is_none() {
            self.log("decomposing the Liouvillian");
            let blocks = sector_decompose(self.model()?)?;
            self.decomposition = Some(decompose_with(&blocks, self.config.defective)?);
        }
        Ok(self.decomposition.as_ref().expect("just set"))
    }

    fn trajectories(&mut self) -> Result<&[Trajectory64], CliError> {
        if self.trajectories.is_none() {
            let grid = &self.config.time_grid;
            let times = grid.spacing.points(grid.t_max, grid.n_points)?;
            let h = self.model()?.hamiltonian().clone();
            let decomp = self.decomposition()?.clone();
            self.log(&format!("evolving {} initial states", self.point.states.len()));
            let trajs = self
                .point
                .states
                .par_iter()
                .map(|spec| {
                    let rho = spec.prepare(&h)?;
                    distance_trajectory(&decomp, &rho, &times)
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (spec, traj) in self.point.states.iter().zip(&trajs) {
                self.out.write_trajectory(&format!("trajectory_{spec}.csv"), traj)?;
            }
            self.trajectories = Some(trajs);
        }
        Ok(self.trajectories.as_deref().expect("just set"))
    }

    fn spectrum(&mut self) -> Result<(), CliError> {
        let params = self.point.params;
        let policy = self.config.defective;
        let d = self.decomposition()?;
        let taus = relaxation_times(d);
        let modes: Vec<ModeRecord> = d
            .modes()
            .zip(&taus)
            .map(|(m, tau)| ModeRecord {
                re: m.eigenvalue.re,
                im: m.eigenvalue.im,
                sector: (m.sector.m_ket, m.sector.m_bra),
                generalized: m.generalized,
                relaxation_time: tau.finite(),
            })
            .collect();
        let clusters = degeneracy_clusters(&d.eigenvalues());
        let defective = defective_groups(d);
        let doc = json!({
            "params": params,
            "defective_policy": policy,
            "kernel_dim": d.kernel_indices().len(),
            "modes": modes,
            "clusters": clusters,
            "defective_groups": defective,
        });
        self.out.write_json("spectrum.json", &doc)?;
        Ok(())
    }

    fn evolve(&mut self) -> Result<(), CliError> {
        let h = self.model()?.hamiltonian().clone();
        self.trajectories()?;
        let d = self.decomposition.as_ref().expect("computed with trajectories");
        for spec in &self.point.states {
            let rho = spec.prepare(&h)?;
            let overlaps = overlap_spectrum(d, &rho)?;
            let doc = json!({
                "state": spec.to_string(),
                "definition": spec.definition(),
                "spec": spec,
                "params": self.point.params,
                "weight_off_rate_two": overlaps.relative_weight_off(-2.0, EXACT_MODE_TOL),
                "normalization": overlaps.normalization,
                "entries": overlaps.entries,
            });
            self.out.write_json(&format!("overlaps_{spec}.json"), &doc)?;
        }
        Ok(())
    }

    fn mpemba(&mut self) -> Result<(), CliError> {
        let trajs = self.trajectories()?;
        let mut reports = Vec::new();
        for i in 0..trajs.len() {
            for j in i + 1..trajs.len() {
                let (a, b) = if trajs[i].distances[0] >= trajs[j].distances[0] {
                    (&trajs[i], &trajs[j])
                } else {
                    (&trajs[j], &trajs[i])
                };
                reports.push(detect_crossing(a, b)?);
            }
        }
        let doc = json!({
            "params": self.point.params,
            "states": self.point.states.iter().map(StateSpec::to_string).collect::<Vec<_>>(),
            "reports": reports,
        });
        self.out.write_json("mpemba.json", &doc)?;
        self.mpemba = reports;
        Ok(())
    }

    fn verify_mode(&mut self) -> Result<(), CliError> {
        let sites = self.point.params.sites;
        let o2 = build_o2::<f64>(sites)?;
        let seed = self.config.seed;
        let model = self.model()?.clone();
        let residual = verify_exact_mode(&model, &o2)?;
        let commutator = commutator_norm(model.hamiltonian(), &o2)?;
        let d = self.decomposition()?;
        let similarity = mode_similarity(d, &o2)?;
        let count = degeneracy_count(d, C::new(-2.0, 0.0));

        let mut rng = StdRng::seed_from_u64(seed);
        let rho = random_density_matrix::<f64, _>(sites, &mut rng)?;
        let spectral = evolve_spectral(d, &rho, &CROSS_CHECK_TIMES)?;
        let integrated = evolve_integrate(&model, &rho, &CROSS_CHECK_TIMES)?;
        let gap = spectral
            .iter()
            .zip(&integrated)
            .map(|(a, b)| trace_distance(a, b))
            .collect::<Result<Vec<f64>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);

        let doc = json!({
            "params": self.point.params,
            "exact_mode_residual": residual,
            "commutator_norm": commutator,
            "mode_similarity": similarity,
            "rate_two_degeneracy": count,
            "integrator_cross_check": {
                "seed": seed,
                "times": CROSS_CHECK_TIMES,
                "max_trace_distance": gap,
            },
        });
        self.out.write_json("verify.json", &doc)?;
        Ok(())
    }

    fn sweep_entry(&mut self, param: &'static str, value: f64, dir: String) -> Result<SweepEntry, CliError> {
        let params = self.point.params;
        let d = self.decomposition()?;
        let tol = KERNEL_TOL;
        let slowest_rate = d
            .modes()
            .map(|m| m.eigenvalue.re)
            .filter(|&re| re < -tol)
            .fold(None, |acc: Option<f64>, re| Some(acc.map_or(-re, |a| a.min(-re))));
        Ok(SweepEntry {
            param,
            value,
            dir,
            params,
            slowest_rate,
            rate_two_modes: degeneracy_count(d, C::new(-2.0, 0.0)),
            kernel_dim: d.kernel_indices().len(),
            defective_groups: d.sectors().iter().map(|s| s.jordan.len()).sum(),
            mpemba: std::mem::take(&mut self.mpemba),
        })
    }
}

/// Groups eigenvalues lying within the clustering tolerance of a
/// representative.
fn degeneracy_clusters(eigenvalues: &[C<f64>]) -> Vec<ClusterRecord> {
    let mut reps: Vec<(C<f64>, usize)> = Vec::new();
    for &lam in eigenvalues {
        match reps.iter_mut().find(|(r, _)| (*r - lam).norm() <= CLUSTER_TOL) {
            Some((_, n)) => *n += 1,
            None => reps.push((lam, 1)),
        }
    }
    reps.into_iter()
        .filter(|&(_, n)| n > 1)
        .map(|(r, n)| ClusterRecord {
            re: r.re,
            im: r.im,
            multiplicity: n,
        })
        .collect()
}

fn defective_groups(d: &SpectralDecomposition64) -> Vec<DefectiveRecord> {
    d.sectors()
        .iter()
        .flat_map(|s| {
            s.jordan.iter().map(move |g| DefectiveRecord {
                sector: (s.label.m_ket, s.label.m_bra),
                re: g.eigenvalue.re,
                im: g.eigenvalue.im,
                algebraic: g.algebraic_multiplicity(),
                geometric: g.eigenvectors,
            })
        })
        .collect()
}

/// Runs every requested task at one parameter point.
fn run_point(
    config: &RunConfig,
    point: &Point,
    out: OutputDir,
    label: Option<(&'static str, f64, String)>,
    quiet: bool,
) -> Result<(Vec<TaskTiming>, Option<SweepEntry>), CliError> {
    let dir = label.as_ref().map(|l| l.2.clone());
    let mut pr = PointRun {
        point,
        out,
        config,
        quiet,
        model: None,
        decomposition: None,
        trajectories: None,
        mpemba: Vec::new(),
    };
    let mut timings = Vec::new();
    for &task in &config.tasks {
        let t0 = Instant::now();
        match task {
            Task::Spectrum => pr.spectrum()?,
            Task::Evolve => pr.evolve()?,
            Task::Mpemba => pr.mpemba()?,
            Task::VerifyMode => pr.verify_mode()?,
            Task::Sweep => continue,
        }
        timings.push(TaskTiming {
            point: dir.clone(),
            task,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    let mut entry = None;
    if let (true, Some((param, value, dir))) = (config.tasks.contains(&Task::Sweep), label) {
        let t0 = Instant::now();
        entry = Some(pr.sweep_entry(param, value, dir.clone())?);
        timings.push(TaskTiming {
            point: Some(dir),
            task: Task::Sweep,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    Ok((timings, entry))
}

/// Validates `config`, runs every requested task at every parameter point
/// (points in parallel) and writes the manifest last.
pub fn run(config: &RunConfig, quiet: bool) -> Result<Manifest, CliError> {
    config.validate()?;
    let started = Instant::now();
    let root = OutputDir::create(&config.output_dir)?;
    let points = config.points()?;
    let results = points
        .par_iter()
        .enumerate()
        .map(|(k, point)| match &config.sweep_axis {
            Some(a) => {
                let dir = config.point_dir(a.values[k]);
                let out = root.subdir(&dir)?;
                run_point(config, point, out, Some((a.param.name(), a.values[k], dir)), quiet)
            }
            None => run_point(config, point, root.clone(), None, quiet),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut timings = Vec::new();
    let mut sweep = Vec::new();
    for (t, entry) in results {
        timings.extend(t);
        sweep.extend(entry);
    }
    if config.tasks.contains(&Task::Sweep) {
        root.write_json("sweep.json", &json!({ "points": sweep }))?;
    }

    let manifest = Manifest {
        config: config.clone(),
        versions: Versions::default(),
        timings,
        total_seconds: started.elapsed().as_secs_f64(),
    };
    root.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

/// Records a failed run in `<output_dir>/error.json` when the directory can
/// be created.
pub fn record_error(dir: &Path, err: &CliError) -> Option<PathBuf> {
    OutputDir::create(dir).ok()?.write_json("error.json", &err.to_json()).ok()
}
