use rayon::prelude::*;

use super::eigen::{solve_weighted, Method, SolverOptions, Spectrum};
use crate::boundary::{bc_operators, make_bc, transform_bc, BcKind, BulkToBoundaryOp};
use crate::error::{Error, Result};
use crate::gauge::{
    eval_potential, gauge_function, link_phases, transform_links, GaugeFunction, PhysicalParams,
    PotentialSpec, ScalarGauge,
};
use crate::geometry::{build, build_disk, Grid2D, GridKind};
use crate::operator::{assemble, Hamiltonian};
use crate::selfadjoint1d::{interval_spectrum, CayleyOperator, Interval, IntervalBc, UnitaryBC};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Grid(GridKind),
    /// `[0, length]` with `n` cells; the potential is read as `A_x(x, 0)`.
    Interval { length: f64, n: usize },
}

/// Uniform boundary condition. `alpha` is used by Robin and chiral
/// conditions, `beta` by chiral ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcSpec {
    pub kind: BcKind,
    pub alpha: f64,
    pub beta: f64,
}

impl BcSpec {
    pub fn dirichlet() -> Self {
        Self { kind: BcKind::Dirichlet, alpha: 0.0, beta: 0.0 }
    }

    pub fn neumann() -> Self {
        Self { kind: BcKind::Neumann, alpha: 0.0, beta: 0.0 }
    }

    pub fn robin(alpha: f64) -> Self {
        Self { kind: BcKind::Robin, alpha, beta: 0.0 }
    }

    pub fn chiral(alpha: f64, beta: f64) -> Self {
        Self { kind: BcKind::Chiral, alpha, beta }
    }
}

/// One eigenvalue problem: domain, gauge, boundary condition and solver
/// settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub domain: Domain,
    pub potential: PotentialSpec,
    pub bc: BcSpec,
    pub params: PhysicalParams,
    pub k: usize,
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
}

impl Problem {
    pub fn new(domain: Domain, potential: PotentialSpec, bc: BcSpec) -> Self {
        Self {
            domain,
            potential,
            bc,
            params: PhysicalParams::default(),
            k: 1,
            method: Method::Iterative,
            tol: 1e-9,
            seed: SolverOptions::new(1, Method::Iterative, 1e-9).seed,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_potential(mut self, potential: PotentialSpec) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_bc(mut self, bc: BcSpec) -> Self {
        self.bc = bc;
        self
    }

    /// Leading resolution: `nx`, `nr` or the interval cell count.
    pub fn resolution(&self) -> usize {
        match self.domain {
            Domain::Grid(GridKind::Rectangle { nx, .. }) => nx,
            Domain::Grid(GridKind::Disk { nr, .. }) | Domain::Grid(GridKind::Annulus { nr, .. }) => nr,
            Domain::Interval { n, .. } => n,
        }
    }

    /// Same problem with the leading resolution set to `n` and the other
    /// counts scaled to keep their ratio.
    pub fn with_resolution(&self, n: usize) -> Self {
        let scale = |m: usize, base: usize| ((m * n) as f64 / base as f64).round() as usize;
        let domain = match self.domain {
            Domain::Grid(GridKind::Rectangle { a, b, nx, ny }) => {
                Domain::Grid(GridKind::Rectangle { a, b, nx: n, ny: scale(ny, nx) })
            }
            Domain::Grid(GridKind::Disk { radius, nr, ntheta }) => {
                Domain::Grid(GridKind::Disk { radius, nr: n, ntheta: scale(ntheta, nr) })
            }
            Domain::Grid(GridKind::Annulus { r_in, r_out, nr, ntheta }) => {
                Domain::Grid(GridKind::Annulus { r_in, r_out, nr: n, ntheta: scale(ntheta, nr) })
            }
            Domain::Interval { length, .. } => Domain::Interval { length, n },
        };
        Self { domain, ..self.clone() }
    }

    pub fn grid(&self) -> Result<Grid2D> {
        match self.domain {
            Domain::Grid(kind) => build(kind),
            Domain::Interval { .. } => Err(Error::Param("interval problems have no planar grid".into())),
        }
    }

    /// Boundary operator of this problem on `grid`.
    pub fn boundary_operator(&self, grid: &Grid2D) -> Result<BulkToBoundaryOp> {
        let alpha = self.bc.alpha;
        let f = move |_: f64| alpha;
        let (a, b): (Option<&dyn Fn(f64) -> f64>, Option<f64>) = match self.bc.kind {
            BcKind::Dirichlet | BcKind::Neumann => (None, None),
            BcKind::Robin => (Some(&f), None),
            BcKind::Chiral => (Some(&f), Some(self.bc.beta)),
        };
        let bc = make_bc(grid.chart(), self.bc.kind, a, b)?;
        bc_operators(&bc, grid.chart(), &self.potential, self.params)
    }

    pub fn hamiltonian_on(&self, grid: &Grid2D) -> Result<Hamiltonian> {
        let links = link_phases(grid, &self.potential, self.params)?;
        let op = self.boundary_operator(grid)?;
        assemble(grid, &links, &op, self.params)
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        self.hamiltonian_on(&self.grid()?)
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            seed: self.seed,
            ..SolverOptions::new(self.k, self.method, self.tol)
        }
    }

    fn interval_bc(&self) -> Result<IntervalBc> {
        Ok(match self.bc.kind {
            BcKind::Dirichlet => IntervalBc::Unitary(UnitaryBC::dirichlet()),
            BcKind::Neumann => IntervalBc::Unitary(UnitaryBC::neumann()),
            BcKind::Robin => IntervalBc::Cayley(CayleyOperator::robin(self.bc.alpha)),
            BcKind::Chiral => {
                return Err(Error::Boundary("chiral conditions need a closed boundary curve".into()))
            }
        })
    }

    pub fn solve(&self) -> Result<Spectrum> {
        match self.domain {
            Domain::Grid(_) => {
                let h = self.hamiltonian()?;
                solve_weighted(h.weighted(), h.weights(), &self.options())
            }
            Domain::Interval { length, n } => {
                let interval = Interval::new(length, n)?;
                let spec = self.potential.clone();
                let a = move |x: f64| eval_potential(&spec, [x, 0.0]).map(|v| v[0]).unwrap_or(f64::NAN);
                let bc = self.interval_bc()?;
                let op = crate::selfadjoint1d::assemble_interval(&bc, &a, interval, self.params)?;
                solve_weighted(&op.weighted, &op.weights, &self.options())
            }
        }
    }
}

/// Result of `landau_check`.
#[derive(Clone, Debug, PartialEq)]
pub struct LandauReport {
    pub b: f64,
    pub magnetic_length: f64,
    /// `hbar e B / 2m`.
    pub landau_energy: f64,
    pub lowest: f64,
    /// `(lowest - landau_energy) / landau_energy`; absolute deviation when
    /// `B = 0`.
    pub deviation: f64,
    /// Eigenvalues within `window` of the lowest one.
    pub degeneracy: usize,
    pub window: f64,
    pub spectrum: Spectrum,
}

/// Lowest Dirichlet eigenvalues on a disk in a uniform field `b`
/// (symmetric gauge) against the lowest Landau level.
///
/// Requires `sqrt(hbar / e B) <= radius / 8` unless `b = 0`. The degeneracy
/// window is a tenth of `hbar omega_c`.
pub fn landau_check(
    b: f64,
    radius: f64,
    nr: usize,
    ntheta: usize,
    k: usize,
    params: PhysicalParams,
) -> Result<LandauReport> {
    let lb = if b == 0.0 { f64::INFINITY } else { (params.hbar / (params.e * b).abs()).sqrt() };
    if b != 0.0 && lb > radius / 8.0 {
        return Err(Error::Param(format!(
            "magnetic length {lb} exceeds radius / 8 = {}; boundary effects dominate",
            radius / 8.0
        )));
    }
    let grid = build_disk(radius, nr, ntheta)?;
    let problem = Problem {
        k,
        params,
        ..Problem::new(Domain::Grid(grid.kind()), PotentialSpec::Symmetric { b }, BcSpec::dirichlet())
    };
    let h = problem.hamiltonian_on(&grid)?;
    let spectrum = solve_weighted(h.weighted(), h.weights(), &problem.options())?;
    let omega = (params.e * b).abs() / params.m;
    let landau_energy = 0.5 * params.hbar * omega;
    let lowest = spectrum.values[0];
    let deviation = if b == 0.0 { lowest } else { (lowest - landau_energy) / landau_energy };
    let window = if b == 0.0 { 1e-6 * lowest.abs().max(1.0) } else { 0.1 * params.hbar * omega };
    let degeneracy = spectrum.values.iter().filter(|v| (*v - lowest).abs() <= window).count();
    Ok(LandauReport {
        b,
        magnetic_length: lb,
        landau_energy,
        lowest,
        deviation,
        degeneracy,
        window,
        spectrum,
    })
}

/// Comparison of a problem with its image under a gauge transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeCrossCheck {
    /// `max |K~_ij - d_i K_ij conj(d_j)|` with `d = U_chi` on the unknowns.
    pub entrywise_defect: f64,
    pub max_spectral_difference: f64,
    pub max_cycle_defect: f64,
    pub original: Spectrum,
    pub transformed: Spectrum,
}

fn cross_check(
    problem: &Problem,
    grid: &Grid2D,
    chi: &GaugeFunction,
    links2: Option<crate::gauge::LinkField>,
) -> Result<GaugeCrossCheck> {
    let links = link_phases(grid, &problem.potential, problem.params)?;
    let op = problem.boundary_operator(grid)?;
    let h = assemble(grid, &links, &op, problem.params)?;
    let links2 = match links2 {
        Some(l) => l,
        None => transform_links(grid, &links, chi)?,
    };
    let op2 = transform_bc(&op, chi, grid.chart())?;
    let h2 = assemble(grid, &links2, &op2, problem.params)?;
    let d: Vec<_> = h.dof_nodes().iter().map(|&n| chi.phases()[n]).collect();
    let dc: Vec<_> = d.iter().map(|z| z.conj()).collect();
    let image = h.weighted().scale(&d, &dc);
    let entrywise_defect = image.max_abs_diff(h2.weighted());
    let opts = problem.options();
    let (s1, s2) = rayon::join(
        || solve_weighted(h.weighted(), h.weights(), &opts),
        || solve_weighted(h2.weighted(), h2.weights(), &opts),
    );
    let (original, transformed) = (s1?, s2?);
    Ok(GaugeCrossCheck {
        entrywise_defect,
        max_spectral_difference: original.max_difference(&transformed),
        max_cycle_defect: chi.max_cycle_defect(),
        original,
        transformed,
    })
}

/// Solves `problem` and its counterpart in the gauge `a2`: links are the
/// Peierls phases of `a2` and the boundary operator is transformed by the
/// gauge function connecting the two potentials.
pub fn gauge_cross_check(problem: &Problem, a2: &PotentialSpec) -> Result<GaugeCrossCheck> {
    let grid = problem.grid()?;
    let chi = gauge_function(&problem.potential, a2, &grid, 0, problem.params)?;
    let links2 = link_phases(&grid, a2, problem.params)?;
    cross_check(problem, &grid, &chi, Some(links2))
}

/// Same comparison for a closed-form scalar gauge, with the transformed
/// links obtained from the lattice transformation rule.
pub fn scalar_gauge_check(problem: &Problem, g: &ScalarGauge) -> Result<GaugeCrossCheck> {
    let grid = problem.grid()?;
    let chi = GaugeFunction::from_scalar(&grid, g, problem.params)?;
    cross_check(problem, &grid, &chi, None)
}

/// One spectrum per parameter value plus sweep-specific diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub parameter: String,
    pub values: Vec<f64>,
    pub spectra: Vec<Spectrum>,
    pub diagnostics: SweepDiagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepDiagnostics {
    None,
    Flux {
        /// Per level, the largest `|lambda_n(phi + flux quantum) - lambda_n(phi)|`.
        periodicity_error: Vec<f64>,
    },
    Robin {
        /// `lambda_1` nonincreasing in `alpha` up to 1e-10.
        nonincreasing: bool,
        /// Whether some `alpha = 0` assembly equals the Neumann one bit for bit.
        neumann_identical: Option<bool>,
        /// `|lambda_1(alpha_min) - lambda_1^D| / lambda_1^D`.
        dirichlet_relative_gap: f64,
        dirichlet_lowest: f64,
    },
}

fn check_increasing(values: &[f64]) -> Result<()> {
    if values.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Param("sweep values must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Spectra on an annulus with an extra flux line `phi` added to the base
/// potential, each compared against `phi + 2 pi hbar / e`.
pub fn flux_sweep(problem: &Problem, fluxes: &[f64]) -> Result<SweepResult> {
    let grid = problem.grid()?;
    if !grid.is_annulus() {
        return Err(Error::Geometry("flux sweeps need an annulus".into()));
    }
    check_increasing(fluxes)?;
    let quantum = problem.params.flux_quantum();
    let at = |phi: f64| -> Result<Spectrum> {
        let p = problem.clone().with_potential(PotentialSpec::sum([
            problem.potential.clone(),
            PotentialSpec::AharonovBohm { phi },
        ]));
        let h = p.hamiltonian_on(&grid)?;
        solve_weighted(h.weighted(), h.weights(), &p.options())
    };
    let pairs = fluxes
        .par_iter()
        .map(|&phi| Ok((at(phi)?, at(phi + quantum)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut periodicity_error = vec![0.0f64; problem.k];
    for (s, t) in &pairs {
        for (n, e) in periodicity_error.iter_mut().enumerate() {
            *e = e.max((s.values[n] - t.values[n]).abs());
        }
    }
    Ok(SweepResult {
        parameter: "phi".into(),
        values: fluxes.to_vec(),
        spectra: pairs.into_iter().map(|p| p.0).collect(),
        diagnostics: SweepDiagnostics::Flux { periodicity_error },
    })
}

/// Robin spectra across `alphas`, with monotonicity, the Neumann identity
/// at `alpha = 0` and the Dirichlet limit at the most negative `alpha`.
pub fn robin_sweep(problem: &Problem, alphas: &[f64]) -> Result<SweepResult> {
    check_increasing(alphas)?;
    let spectra = alphas
        .par_iter()
        .map(|&a| problem.clone().with_bc(BcSpec::robin(a)).solve())
        .collect::<Result<Vec<_>>>()?;
    let nonincreasing = spectra.windows(2).all(|w| w[1].values[0] <= w[0].values[0] + 1e-10);
    let neumann_identical = match (alphas.contains(&0.0), problem.domain) {
        (true, Domain::Grid(_)) => {
            let grid = problem.grid()?;
            let r = problem.clone().with_bc(BcSpec::robin(0.0)).hamiltonian_on(&grid)?;
            let n = problem.clone().with_bc(BcSpec::neumann()).hamiltonian_on(&grid)?;
            Some(r.weighted() == n.weighted() && r.weights() == n.weights())
        }
        (true, Domain::Interval { length, n }) => {
            let interval = Interval::new(length, n)?;
            let zero = |_: f64| 0.0;
            let r = crate::selfadjoint1d::assemble_interval(
                &IntervalBc::Cayley(CayleyOperator::robin(0.0)),
                &zero,
                interval,
                problem.params,
            )?;
            let n = crate::selfadjoint1d::assemble_interval(
                &IntervalBc::Unitary(UnitaryBC::neumann()),
                &zero,
                interval,
                problem.params,
            )?;
            Some(r.weighted.max_abs_diff(&n.weighted) == 0.0 && r.weights == n.weights)
        }
        _ => None,
    };
    let dirichlet_lowest = problem.clone().with_bc(BcSpec::dirichlet()).with_k(1).solve()?.values[0];
    let dirichlet_relative_gap = spectra
        .first()
        .map(|s| (s.values[0] - dirichlet_lowest).abs() / dirichlet_lowest.abs())
        .unwrap_or(f64::NAN);
    Ok(SweepResult {
        parameter: "alpha".into(),
        values: alphas.to_vec(),
        spectra,
        diagnostics: SweepDiagnostics::Robin {
            nonincreasing,
            neumann_identical,
            dirichlet_relative_gap,
            dirichlet_lowest,
        },
    })
}

/// Relative change below which a level counts as exact on every grid.
const EXACT_LEVEL: f64 = 1e-9;

/// Observed orders of the lowest eigenvalues under refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub resolutions: Vec<usize>,
    /// `eigenvalues[r][n]`: level `n` at resolution `r`.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Absolute errors against the reference, when one was supplied.
    pub errors: Option<Vec<Vec<f64>>>,
    /// `orders[n]`: one slope per consecutive pair (reference) or triple
    /// (Richardson); NaN for a level that is exact on every grid.
    pub orders: Vec<Vec<f64>>,
    /// Set when some level's error sequence fails to decrease.
    pub non_monotone: bool,
}

/// Convergence orders over resolutions in geometric progression, against
/// `reference` eigenvalues when given and by Richardson differences
/// otherwise.
pub fn convergence_study(
    problem: &Problem,
    resolutions: &[usize],
    reference: Option<&[f64]>,
) -> Result<ConvergenceTable> {
    if resolutions.len() < 3 {
        return Err(Error::Param("a convergence study needs at least three resolutions".into()));
    }
    let ratio = resolutions[1] as f64 / resolutions[0] as f64;
    let geometric = ratio > 1.0
        && resolutions
            .windows(2)
            .all(|w| ((w[1] as f64 / w[0] as f64) - ratio).abs() <= 1e-12 * ratio);
    if !geometric {
        return Err(Error::Param("resolutions must increase in geometric progression".into()));
    }
    if let Some(r) = reference {
        if r.len() < problem.k {
            return Err(Error::Dimension { expected: problem.k, got: r.len() });
        }
    }
    let eigenvalues = resolutions
        .par_iter()
        .map(|&n| problem.with_resolution(n).solve().map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    let levels = problem.k;
    let lr = ratio.ln();
    let (errors, orders, non_monotone) = match reference {
        Some(r) => {
            let errors: Vec<Vec<f64>> = eigenvalues
                .iter()
                .map(|v| (0..levels).map(|n| (v[n] - r[n]).abs()).collect())
                .collect();
            let orders = (0..levels)
                .map(|n| errors.windows(2).map(|w| (w[0][n] / w[1][n]).ln() / lr).collect())
                .collect();
            let bad = (0..levels).any(|n| errors.windows(2).any(|w| !(w[1][n] < w[0][n])));
            (Some(errors), orders, bad)
        }
        None => {
            let diffs: Vec<Vec<f64>> = eigenvalues
                .windows(2)
                .map(|w| (0..levels).map(|n| (w[1][n] - w[0][n]).abs()).collect())
                .collect();
            let orders = (0..levels)
                .map(|n| diffs.windows(2).map(|w| (w[0][n] / w[1][n]).ln() / lr).collect())
                .collect();
            let bad = (0..levels).any(|n| diffs.windows(2).any(|w| !(w[1][n] < w[0][n])));
            (None, orders, bad)
        }
    };
    // levels the lattice reproduces exactly at every resolution (the Neumann
    // constant) carry no order; report NaN instead of a slope of noise
    let mut orders: Vec<Vec<f64>> = orders;
    let mut non_monotone = non_monotone;
    let mut exact_any = false;
    for n in 0..levels {
        let scale = eigenvalues.iter().map(|v| v[n].abs()).fold(1.0, f64::max);
        let still = eigenvalues.windows(2).all(|w| (w[1][n] - w[0][n]).abs() <= EXACT_LEVEL * scale);
        let exact = match &errors {
            Some(e) => e.iter().all(|row| row[n] <= EXACT_LEVEL * scale),
            None => still,
        };
        if exact {
            orders[n].iter_mut().for_each(|o| *o = f64::NAN);
            exact_any = true;
        }
    }
    if exact_any {
        non_monotone = (0..levels).filter(|&n| !orders[n].iter().all(|o| o.is_nan())).any(|n| {
            let seq: Vec<f64> = match &errors {
                Some(e) => e.iter().map(|row| row[n]).collect(),
                None => eigenvalues.windows(2).map(|w| (w[1][n] - w[0][n]).abs()).collect(),
            };
            seq.windows(2).any(|w| !(w[1] < w[0]))
        });
    }
    Ok(ConvergenceTable {
        resolutions: resolutions.to_vec(),
        eigenvalues,
        errors,
        orders,
        non_monotone,
    })
}

/// Interval spectra for the scalar family `U = e^{i theta} I`.
pub fn theta_family(thetas: &[f64], interval: Interval, k: usize, params: PhysicalParams) -> Result<SweepResult> {
    check_increasing(thetas)?;
    let zero = |_: f64| 0.0;
    let spectra = thetas
        .par_iter()
        .map(|&t| interval_spectrum(&IntervalBc::Unitary(UnitaryBC::scalar(t)), &zero, interval, k, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter: "theta".into(),
        values: thetas.to_vec(),
        spectra,
        diagnostics: SweepDiagnostics::None,
    })
}
