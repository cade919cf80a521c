//! Experiment drivers: each composes library operations into checks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Experiment, ScenarioConfig};
use super::report::Check;
use crate::audit::{
    bump_field, dirac_frustum_check, exterior_bump_center, frustum_energy_check, nonseparability_demo,
    scalar_twins, spinor_twins, twin_history, twin_run_divergence, DiracSolver, DivergenceReport, EnergyReport,
    LeapfrogSolver, Norm,
};
use crate::error::{Error, Result};
use crate::fit::{convergence_order, linear_fit};
use crate::gaussian::{
    interval_sites, mutual_information, reduced_state_distance, vacuum_state, CouplingMatrix, Evolution,
};
use crate::lattice::{poly_bump, Boundary, Field, GridSpec, Region};
use crate::localization::{
    fock_regional_state, nw_locality_probe, nw_overlap, random_fock_state, write_two_point_scan, QuadratureSpec,
    TwoPointKind, TwoPointQuery,
};
use crate::spectral::{leakage_fraction, second_order_leakage};
use crate::wave::{continuity_residual, lorenz_residual, maxwell_rest_start, MovingCharge, NoSource};

/// Collects checks and written files for one run.
pub(super) struct Outputs<'a> {
    pub dir: &'a Path,
    pub csv: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl Outputs<'_> {
    fn csv(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::new(name, value, "<=", bound, value <= bound));
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::new(name, value, ">=", bound, value >= bound));
    }

    fn above(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::new(name, value, ">", bound, value > bound));
    }
}

fn grid_of(cfg: &ScenarioConfig) -> Result<GridSpec> {
    let n = cfg.int("grid.extent");
    let length = if cfg.has("grid.length") { cfg.float("grid.length") } else { n as f64 };
    let dim = if cfg.has("grid.dim") { cfg.int("grid.dim") } else { 1 };
    let boundary = if cfg.has("grid.boundary") && cfg.text("grid.boundary") == "absorbing_pad" {
        Boundary::AbsorbingPad
    } else {
        Boundary::Periodic
    };
    GridSpec::new(dim, n, length / n as f64, boundary)
}

fn ball_of(cfg: &ScenarioConfig) -> Region {
    Region::ball(cfg.floats("region.center"), cfg.float("region.radius"))
}

fn horizon(cfg: &ScenarioConfig) -> usize {
    match cfg.int("solver.steps") {
        0 => usize::MAX,
        n => n,
    }
}

pub(super) fn execute(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    match cfg.experiment {
        Experiment::KgLocality => kg_locality(cfg, out),
        Experiment::EmLocality => em_locality(cfg, out),
        Experiment::DiracLocality => dirac_locality(cfg, out),
        Experiment::SqrtKgLeakage => sqrt_kg_leakage(cfg, out),
        Experiment::GaussianLocality => gaussian_locality(cfg, out),
        Experiment::EntropyScan => entropy_scan(cfg, out),
        Experiment::TwoPointScan => two_point_scan(cfg, out),
        Experiment::NwProbe => nw_probe(cfg, out),
        Experiment::FockRegional => fock_regional(cfg, out),
        Experiment::Nonseparability => nonseparability(cfg, out),
    }
}

fn write_twin_csv(out: &mut Outputs, seeds: &[u64], runs: &[(DivergenceReport, EnergyReport)]) -> Result<()> {
    out.csv("divergence.csv", |w| {
        writeln!(w, "seed,t,inside_contracting,outside_expanding")?;
        for (seed, (d, _)) in seeds.iter().zip(runs) {
            for i in 0..d.times.len() {
                writeln!(
                    w,
                    "{seed},{:e},{:e},{:e}",
                    d.times[i], d.max_inside_contracting[i], d.max_outside_expanding[i]
                )?;
            }
        }
        Ok(())
    })?;
    out.csv("frustum.csv", |w| {
        writeln!(w, "seed,t,e_base,e_top,slack")?;
        for (seed, (_, e)) in seeds.iter().zip(runs) {
            for i in 0..e.times.len() {
                writeln!(w, "{seed},{:e},{:e},{:e},{:e}", e.times[i], e.e_base, e.e_top[i], e.slack[i])?;
            }
        }
        Ok(())
    })
}

fn twin_checks(cfg: &ScenarioConfig, out: &mut Outputs, runs: &[(DivergenceReport, EnergyReport)]) {
    let inside = runs.iter().map(|(d, _)| d.peak_inside()).fold(0.0, f64::max);
    let slack = runs.iter().map(|(_, e)| e.max_slack()).fold(f64::NEG_INFINITY, f64::max);
    out.at_most("inside-cone sup difference", inside, cfg.float("checks.inside_max"));
    out.at_most("frustum energy slack", slack, cfg.float("checks.frustum_slack_max"));
}

fn kg_locality(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let grid = grid_of(cfg)?;
    let base = ball_of(cfg);
    let seeds = cfg.seeds();
    let (mass, cfl, hw, guard) =
        (cfg.float("solver.mass"), cfg.float("solver.cfl"), cfg.float("solver.half_width"), cfg.int("solver.guard"));
    let solver = LeapfrogSolver { source: NoSource };
    let runs: Vec<(DivergenceReport, EnergyReport)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = scalar_twins(&grid, &base, hw, mass, cfl, &mut rng)?;
            let div = twin_run_divergence(&solver, &a, &b, &base, horizon(cfg), guard, Norm::Sup)?;
            let hist = twin_history(&solver, &a, &b, &base, horizon(cfg))?;
            Ok((div, frustum_energy_check(&hist, &base)?))
        })
        .collect::<Result<_>>()?;
    twin_checks(cfg, out, &runs);
    write_twin_csv(out, &seeds, &runs)
}

fn dirac_locality(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let grid = grid_of(cfg)?;
    let base = ball_of(cfg);
    let seeds = cfg.seeds();
    let (mass, hw, guard) = (cfg.float("solver.mass"), cfg.float("solver.half_width"), cfg.int("solver.guard"));
    let solver = DiracSolver { dt: cfg.float("solver.cfl") * grid.spacing() / (grid.dim() as f64).sqrt() };
    let runs: Vec<(DivergenceReport, EnergyReport)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = spinor_twins(&grid, &base, hw, mass, &mut rng)?;
            let div = twin_run_divergence(&solver, &a, &b, &base, horizon(cfg), guard, Norm::Sup)?;
            let hist = twin_history(&solver, &a, &b, &base, horizon(cfg))?;
            Ok((div, dirac_frustum_check(&hist, &base)?))
        })
        .collect::<Result<_>>()?;
    twin_checks(cfg, out, &runs);
    write_twin_csv(out, &seeds, &runs)
}

fn em_locality(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let grid = grid_of(cfg)?;
    let base = ball_of(cfg);
    let (cfl, hw, guard) = (cfg.float("solver.cfl"), cfg.float("solver.half_width"), cfg.int("solver.guard"));
    let center = cfg.floats("region.center")[0];
    let make = || MovingCharge::dipole(center, cfg.float("solver.velocity"), hw, cfg.float("solver.charge"));
    let a = maxwell_rest_start(grid, &make(), cfl)?;
    // B adds an A_y bump outside the base ball
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spot = exterior_bump_center(&grid, &base, hw, &mut rng)?;
    let bump = bump_field(&grid, spot, hw, 1.0);
    let mut b = a.clone();
    for (x, d) in b.u_mut().component_mut(2).iter_mut().zip(bump.values()) {
        *x += d;
    }
    let solver = LeapfrogSolver { source: make() };
    let div = twin_run_divergence(&solver, &a, &b, &base, horizon(cfg), guard, Norm::Sup)?;

    let h2 = grid.spacing().powi(2);
    let steps = div.times.len().saturating_sub(1);
    let (mut lorenz, mut continuity) = (0.0f64, 0.0f64);
    let mut s = a.clone();
    for n in 0..=steps {
        if n > 0 {
            s = s.step_leapfrog(&solver.source)?;
        }
        lorenz = lorenz.max(lorenz_residual(&s)?.max_abs());
        continuity = continuity.max(continuity_residual(&solver.source, &grid, s.time(), s.dt()).max_abs());
    }
    out.at_most("inside-cone sup difference", div.peak_inside(), cfg.float("checks.inside_max"));
    out.at_most("Lorenz residual / dx^2", lorenz / h2, cfg.float("checks.lorenz_constant"));
    out.at_most("continuity residual / dx^2", continuity / h2, cfg.float("checks.continuity_constant"));
    out.csv("divergence.csv", |w| div.write_csv(w))
}

fn sqrt_kg_leakage(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let length = cfg.float("grid.length");
    let (mass, t, hw, cfl) =
        (cfg.float("solver.mass"), cfg.float("solver.time"), cfg.float("solver.half_width"), cfg.float("solver.cfl"));
    let levels = cfg.ints("solver.levels");
    let rows: Vec<(usize, f64, f64, f64)> = levels
        .par_iter()
        .map(|&n| {
            let grid = GridSpec::periodic_1d(n, length / n as f64)?;
            let c = 0.5 * length;
            let real = Field::scalar_from_fn(grid, |x| poly_bump(x[0] - c, hw, 6));
            let cplx = Field::scalar_from_fn(grid, |x| Complex64::new(poly_bump(x[0] - c, hw, 6), 0.0));
            let leak = leakage_fraction(&cplx, mass, t)?;
            let control = second_order_leakage(&real, mass, t, cfl)?;
            Ok((n, grid.spacing(), leak, control))
        })
        .collect::<Result<_>>()?;
    let (_, _, leak_f, control_f) = rows[rows.len() - 1];
    let leak_c = rows[rows.len() - 2].2;
    let hs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let controls: Vec<f64> = rows.iter().map(|r| r.3).collect();
    out.above("first-order leakage at finest level", leak_f, cfg.float("checks.leak_min"));
    out.at_most("relative leakage change between finest levels", ((leak_f - leak_c) / leak_f).abs(), cfg.float("checks.stability_max"));
    out.at_least("control leakage order", convergence_order(&hs, &controls), cfg.float("checks.control_order_min"));
    out.at_least("leakage / control at finest level", leak_f / control_f.max(f64::MIN_POSITIVE), cfg.float("checks.contrast_min"));
    out.csv("leakage.csv", |w| {
        writeln!(w, "n,h,leakage,control")?;
        for (n, h, l, c) in &rows {
            writeln!(w, "{n},{h:e},{l:e},{c:e}")?;
        }
        Ok(())
    })
}

fn gaussian_locality(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let n = cfg.int("grid.extent");
    let grid = GridSpec::periodic_1d(n, 1.0)?;
    let k = CouplingMatrix::chain(grid, cfg.float("solver.mass"))?;
    let vac = vacuum_state(&k)?;
    let (c, r) = (cfg.floats("region.center")[0], cfg.float("region.radius"));
    let (dt, margin, amp) = (cfg.float("solver.dt"), cfg.int("solver.margin"), cfg.float("solver.displacement"));
    let site = |d: usize| ((c + r).round() as usize + d) % n;

    let nu = vac.symplectic_eigenvalues()?;
    out.at_most("vacuum symplectic eigenvalue deviation from 1/2", nu.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max), cfg.float("checks.vacuum_nu_max"));

    let mut a = vac.clone();
    let mut b = vac.displace(site(margin), amp, 0.0)?;
    let mut cone = Vec::with_capacity(margin);
    for step in 1..=margin {
        a = a.evolve(&k, dt, Evolution::SymplecticSteps { dt })?;
        b = b.evolve(&k, dt, Evolution::SymplecticSteps { dt })?;
        let slice = Region::interval(c, r - step as f64 * dt);
        cone.push(reduced_state_distance(&a.reduce(&slice)?, &b.reduce(&slice)?)?);
    }
    out.at_most("reduced-state distance inside the lattice cone", cone.iter().copied().fold(0.0, f64::max), 0.0);

    let t = cfg.float("solver.time");
    let slice = Region::interval(c, r - t);
    let va = vac.evolve(&k, t, Evolution::ExactSpectral)?.reduce(&slice)?;
    let margins = cfg.ints("solver.margins");
    let tail: Vec<f64> = margins
        .par_iter()
        .map(|&d| {
            let vb = vac.displace(site(d), amp, 0.0)?.evolve(&k, t, Evolution::ExactSpectral)?.reduce(&slice)?;
            reduced_state_distance(&va, &vb)
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = margins.iter().map(|&d| d as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    out.above("beyond-cone tail decay rate", -slope, 0.0);
    out.at_least("beyond-cone tail fit R^2", r2, cfg.float("checks.tail_r2_min"));
    out.csv("lightcone.csv", |w| {
        writeln!(w, "step,t,distance")?;
        for (i, d) in cone.iter().enumerate() {
            writeln!(w, "{},{:e},{d:e}", i + 1, (i + 1) as f64 * dt)?;
        }
        Ok(())
    })?;
    out.csv("tail.csv", |w| {
        writeln!(w, "margin,distance")?;
        for (d, v) in margins.iter().zip(&tail) {
            writeln!(w, "{d},{v:e}")?;
        }
        Ok(())
    })
}

fn entropy_scan(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let n = cfg.int("grid.extent");
    let grid = GridSpec::periodic_1d(n, 1.0)?;
    let vac = vacuum_state(&CouplingMatrix::chain(grid, cfg.float("solver.mass"))?)?;
    let entropy = |start: usize, len: usize| -> Result<f64> { Ok(vac.reduce(&interval_sites(n, start, len)?)?.entropy()?.entropy) };
    let lengths = cfg.ints("solver.lengths");
    if lengths.iter().any(|&l| l == 0 || l >= n) {
        return Err(Error::config(format!("interval lengths must lie in 1..{n}")));
    }
    let s: Vec<f64> = lengths.par_iter().map(|&l| entropy(0, l)).collect::<Result<_>>()?;
    let xs: Vec<f64> = lengths.iter().map(|&l| (l as f64).ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &s);
    out.at_least("entropy slope vs ln l (lower)", slope, cfg.float("checks.slope_min"));
    out.at_most("entropy slope vs ln l (upper)", slope, cfg.float("checks.slope_max"));

    let seeds = cfg.seeds();
    let sym: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = rng.random_range(0..n);
            let len = rng.random_range(1..n);
            Ok((entropy(start, len)? - entropy((start + len) % n, n - len)?).abs())
        })
        .collect::<Result<_>>()?;
    out.at_most("|S(A) - S(complement)|", sym.iter().copied().fold(0.0, f64::max), cfg.float("checks.symmetry_max"));
    let l0 = lengths[0].min(n / 2);
    let mi = mutual_information(&vac, &interval_sites(n, 0, l0)?, &interval_sites(n, l0, l0)?)?;
    out.above("mutual information of adjacent intervals", mi, 0.0);
    out.csv("entropy.csv", |w| {
        writeln!(w, "length,entropy")?;
        for (l, v) in lengths.iter().zip(&s) {
            writeln!(w, "{l},{v:e}")?;
        }
        Ok(())
    })
}

fn two_point_scan(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let mass = cfg.float("solver.mass");
    let q = QuadratureSpec { cutoff: cfg.float("solver.cutoff"), nodes: cfg.int("solver.nodes"), sigma: cfg.float("solver.sigma") };
    q.validate(mass)?;
    let (rs, ts) = (cfg.floats("solver.r"), cfg.floats("solver.t"));
    if rs.iter().any(|&r| r <= 0.0) {
        return Err(Error::config("radial separations must be > 0"));
    }
    let mut queries = Vec::new();
    for &r in &rs {
        queries.push(TwoPointQuery { r, t: 0.0, mass, kind: TwoPointKind::Wightman, quadrature: q });
        for &t in ts.iter().filter(|t| t.abs() < r) {
            for kind in [TwoPointKind::PauliJordan, TwoPointKind::NwOverlap] {
                queries.push(TwoPointQuery { r, t, mass, kind, quadrature: q });
            }
        }
    }
    let mut buf = Vec::new();
    let values = write_two_point_scan(&queries, &mut buf)?;
    let pick = |kind| queries.iter().zip(&values).filter(move |(q, _)| q.kind == kind).map(|(_, v)| v.re.hypot(v.im));
    let pj: Vec<f64> = pick(TwoPointKind::PauliJordan).collect();
    let nw: Vec<f64> = pick(TwoPointKind::NwOverlap).collect();
    if pj.is_empty() {
        return Err(Error::config("no spacelike (r > |t|) points in the scan"));
    }
    out.at_most("max |commutator| at spacelike points", pj.iter().copied().fold(0.0, f64::max), cfg.float("checks.commutator_max"));
    let contrast = pj.iter().zip(&nw).map(|(p, n)| n / p.max(1e-300)).fold(f64::INFINITY, f64::min);
    out.at_least("min |NW overlap| / |commutator| at spacelike points", contrast, cfg.float("checks.contrast_min"));

    let t_f = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fr = cfg.floats("solver.falloff_r");
    let logs: Vec<f64> = fr.iter().map(|&r| Ok(nw_overlap(t_f, r, mass, &q)?.norm().ln())).collect::<Result<_>>()?;
    let rate = -linear_fit(&fr, &logs).0;
    out.at_most("NW falloff rate relative deviation from m", (rate / mass - 1.0).abs(), cfg.float("checks.falloff_rel_tol"));
    if out.csv {
        std::fs::write(out.dir.join("two_point.csv"), &buf)?;
        out.artifacts.push("two_point.csv".into());
    }
    Ok(())
}

fn nw_probe(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let grid = grid_of(cfg)?;
    if grid.dim() != 1 {
        return Err(Error::config("the probe runs on 1-d grids"));
    }
    let region = ball_of(cfg);
    let (c, r) = (cfg.floats("region.center")[0], cfg.float("region.radius"));
    let (mass, t, hw) = (cfg.float("solver.mass"), cfg.float("solver.time"), cfg.float("solver.half_width"));
    let ds = cfg.floats("solver.distances");
    let probes: Vec<_> = ds
        .par_iter()
        .map(|&d| {
            let x0 = c + r + d + hw;
            let psi = Field::scalar_from_fn(grid, |x| Complex64::new(poly_bump(x[0] - x0, hw, 6), 0.0));
            nw_locality_probe(&psi, &region, t, mass)
        })
        .collect::<Result<_>>()?;
    let pens: Vec<f64> = probes.iter().map(|p| p.penetration).collect();
    out.at_least("min penetration", pens.iter().copied().fold(f64::INFINITY, f64::min), cfg.float("checks.penetration_min"));
    let logs: Vec<f64> = pens.iter().map(|p| p.max(f64::MIN_POSITIVE).ln()).collect();
    let rate = -linear_fit(&ds, &logs).0;
    out.at_most("penetration decay rate relative deviation from m", (rate / mass - 1.0).abs(), cfg.float("checks.falloff_rel_tol"));
    out.csv("nw_probe.csv", |w| {
        writeln!(w, "distance,penetration,probability")?;
        for (d, p) in ds.iter().zip(&probes) {
            writeln!(w, "{d},{:e},{:e}", p.penetration, p.probability)?;
        }
        Ok(())
    })
}

fn fock_regional(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let grid = grid_of(cfg)?;
    if grid.dim() != 1 {
        return Err(Error::config("Fock states live on 1-d grids"));
    }
    let region = interval_sites(grid.extent(), cfg.int("region.start"), cfg.int("region.len"))?;
    let n_max = cfg.int("solver.n_max");
    let seeds = cfg.seeds();
    let rows: Vec<(f64, f64, f64, f64)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = random_fock_state(grid, n_max, &mut rng)?;
            let rho = fock_regional_state(&state, &region)?;
            Ok((rho.trace(), rho.min_eigenvalue(), rho.hermiticity_defect(), rho.entropy()))
        })
        .collect::<Result<_>>()?;
    let trace_err = rows.iter().map(|r| (r.0 - 1.0).abs()).fold(0.0, f64::max);
    let min_eig = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let herm = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    out.at_most("|trace - 1|", trace_err, cfg.float("checks.trace_tol"));
    out.at_least("min eigenvalue", min_eig, -cfg.float("checks.eigen_floor"));
    out.at_most("hermiticity defect", herm, cfg.float("checks.hermitian_tol"));
    out.csv("fock_regional.csv", |w| {
        writeln!(w, "seed,trace,min_eigenvalue,hermiticity_defect,entropy")?;
        for (s, r) in seeds.iter().zip(&rows) {
            writeln!(w, "{s},{:e},{:e},{:e},{:e}", r.0, r.1, r.2, r.3)?;
        }
        Ok(())
    })
}

fn nonseparability(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let r = nonseparability_demo();
    let (tol, fid) = (cfg.float("checks.reduced_tol"), cfg.float("checks.fidelity_tol"));
    out.at_most("singlet/triplet reduced states vs identity/2", r.singlet_reduced_vs_mixed.max(r.singlet_triplet_reduced_gap), tol);
    out.at_most("reduced-state change under the local flip", r.flip_reduced_change, tol);
    out.at_most("fidelity of flipped singlet with singlet", r.flip_fidelity, fid);
    Ok(())
}
