//! Invariant suites shared by the command line and the test harness.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    growth_bound_check, h1_control_check, lemma28_sweep, weight_inequality_check, Lemma28Draw, WeightCheck,
};
use crate::error::Result;
use crate::evolve::{cross_validate, run, Formulation, Integrator, IntegratorConfig, RunStatus, System};
use crate::field::Reality;
use crate::gauge::{coulomb_fix, GaugeFunction};
use crate::grid::Grid;
use crate::identities::{check_identity_18, check_identity_19};
use crate::random::{random_field, random_vector, SpectrumProfile};
use crate::spectral::{curl, curl_2d, curl_norm, div, grad_norm, helmholtz};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub hard: bool,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            hard: true,
            passed: value <= limit,
        }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            hard: true,
            passed: value >= limit,
        }
    }

    /// Reported only.
    pub fn report(name: impl Into<String>, value: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: f64::NAN,
            hard: false,
            passed: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: Vec<Check>, details: serde_json::Value) -> Self {
        SuiteReport {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            details,
        }
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Helmholtz splitting and Coulomb fixing on seeded random real vector fields.
pub fn helmholtz_suite(grid: Grid, seeds: Range<u64>, tol: f64) -> Result<SuiteReport> {
    let profile = SpectrumProfile::quarter_nyquist(&grid);
    let (mut recompose, mut orth, mut div_df, mut curl_cf, mut coulomb, mut idem) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_vector(&grid, &mut rng, &profile, 1.0);
        let scale = a.l2_norm();
        let (df, cf) = helmholtz(&a)?;
        recompose.push(df.add(&cf).sub(&a).l2_norm() / scale);
        orth.push(df.inner(&cf).norm() / (scale * scale));
        div_df.push(div(&df).l2_norm() / grad_norm(&a));
        let c = if grid.dim() == 3 {
            curl(&cf)?.l2_norm()
        } else {
            curl_2d(&cf)?.l2_norm()
        };
        curl_cf.push(c / grad_norm(&a));
        let (fixed, _) = coulomb_fix(&a)?;
        coulomb.push(div(&fixed).l2_norm() / grad_norm(&a));
        let (again, _) = coulomb_fix(&fixed)?;
        idem.push(again.sub(&fixed).l2_norm() / scale);
    }
    let checks = vec![
        Check::at_most("recomposition", max_of(recompose), tol),
        Check::at_most("orthogonality", max_of(orth), tol),
        Check::at_most("div_df", max_of(div_df), tol),
        Check::at_most("curl_cf", max_of(curl_cf), tol),
        Check::at_most("coulomb_div", max_of(coulomb), tol),
        Check::at_most("coulomb_idempotent", max_of(idem), tol),
    ];
    Ok(SuiteReport::new(
        "helmholtz",
        checks,
        serde_json::json!({"dim": grid.dim(), "n": grid.n()}),
    ))
}

/// `||grad A_df|| = ||curl A_df||` for zero-mean divergence-free fields.
pub fn norm_equality_suite(grid: Grid, seeds: Range<u64>, tol: f64) -> Result<SuiteReport> {
    let profile = SpectrumProfile::quarter_nyquist(&grid);
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (df, _) = helmholtz(&random_vector(&grid, &mut rng, &profile, 1.0))?;
        let g = grad_norm(&df);
        let c = curl_norm(&df);
        worst = worst.max((g - c).abs() / g);
    }
    Ok(SuiteReport::new(
        "norm_equality",
        vec![Check::at_most("grad_vs_curl", worst, tol)],
        serde_json::json!({"dim": grid.dim(), "n": grid.n()}),
    ))
}

/// Null-form identities over seeds and resolutions. The fitted `alpha` must
/// agree across all draws, and the residual after fitting must be small.
pub fn identity_suite(grids: &[Grid], seeds: Range<u64>, profile: &SpectrumProfile, tol: f64) -> Result<SuiteReport> {
    let mut a18 = Vec::new();
    let mut a19 = Vec::new();
    let mut r18: f64 = 0.0;
    let mut r19: f64 = 0.0;
    for g in grids {
        for seed in seeds.clone() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a_df, _) = helmholtz(&random_vector(g, &mut rng, profile, 1.0))?;
            let mut a_df = a_df;
            for c in a_df.components_mut() {
                c.coeffs_mut()[0] = Default::default();
            }
            let phi = random_field(g, &mut rng, profile, Reality::Complex, 1.0);
            let r = check_identity_18(&a_df, &phi)?;
            a18.push(r.alpha);
            r18 = r18.max(r.residual);
            if g.dim() == 3 {
                let r = check_identity_19(&phi)?;
                a19.push(r.alpha);
                r19 = r19.max(r.residual);
            }
        }
    }
    let spread = |v: &[f64]| {
        if v.is_empty() {
            return 0.0;
        }
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let mut checks = vec![
        Check::at_most("alpha18_spread", spread(&a18), tol),
        Check::at_most("residual18", r18, tol),
    ];
    if !a19.is_empty() {
        checks.push(Check::at_most("alpha19_spread", spread(&a19), tol));
        checks.push(Check::at_most("residual19", r19, tol));
    }
    Ok(SuiteReport::new(
        "identities",
        checks,
        serde_json::json!({
            "alpha18": a18.first(),
            "alpha19": a19.first(),
            "resolutions": grids.iter().map(|g| g.n()).collect::<Vec<_>>(),
        }),
    ))
}

/// Seeded time-independent gauge functions of small amplitude. The factor
/// `exp(i chi)` is resolved only while its harmonics `J_m(|chi|)` decay
/// within the grid.
pub fn gauge_functions(grid: &Grid, seeds: Range<u64>, amplitude: f64) -> Vec<GaugeFunction> {
    let profile = SpectrumProfile::new(0.05 * grid.nyquist_wavenumber());
    seeds
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chi = random_field(grid, &mut rng, &profile, Reality::Real, amplitude);
            GaugeFunction::new(chi).expect("real gauge function")
        })
        .collect()
}

/// `L^2` distances between `evolve(transform(chi, s))` and
/// `transform(chi, evolve(s))`.
pub fn gauge_covariance(initial: &System, chis: &[GaugeFunction], cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let steps = cfg.steps()?;
    let evolve = |s: &System| -> Result<System> {
        let mut it = Integrator::new(s, cfg.formulation, cfg.scheme, cfg.dt)?;
        for _ in 0..steps {
            it.step();
        }
        Ok(it.system())
    };
    let base = evolve(initial)?;
    chis.iter()
        .map(|chi| {
            let a = evolve(&initial.gauge_transform(chi)?)?;
            let b = base.gauge_transform(chi)?;
            a.distance(&b)
        })
        .collect()
}

pub fn gauge_suite(initial: &System, cfg: &IntegratorConfig, tol: f64) -> Result<SuiteReport> {
    let grid = *initial.grid();
    let h = helmholtz_suite(grid, 0..5, 1e-12)?;
    let mut checks = h.checks;
    let chis = gauge_functions(&grid, 100..105, 0.1);
    let mut c = cfg.clone();
    c.formulation = Formulation::Decomposed;
    let d = gauge_covariance(initial, &chis, &c)?;
    checks.push(Check::at_most("covariance", max_of(d.iter().copied()), tol));
    Ok(SuiteReport::new(
        "gauge",
        checks,
        serde_json::json!({"covariance_defects": d}),
    ))
}

pub fn bounds_suite(initial: &System, cfg: &IntegratorConfig) -> Result<SuiteReport> {
    let record = run(initial, cfg)?;
    let growth = growth_bound_check(&record);
    let worst = growth.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let mut checks = vec![Check::at_least(
        "growth_bound_min_slack",
        worst,
        -crate::analysis::GROWTH_TOL,
    )];
    let (_, chi) = coulomb_fix(initial.potential())?;
    let fixed = initial.gauge_transform(&chi)?;
    let h1 = h1_control_check(&fixed)?;
    for e in &h1.entries {
        if e.hard {
            checks.push(Check {
                name: e.name.clone(),
                value: e.slack,
                limit: 0.0,
                hard: true,
                passed: e.passed,
            });
        } else if let Some(c) = e.empirical_c {
            checks.push(Check::report(format!("{} empirical_C", e.name), c));
        }
    }
    let grid = *initial.grid();
    let sweep = lemma28_sweep(
        grid,
        0..20,
        &SpectrumProfile::new(0.1 * grid.nyquist_wavenumber()),
        Lemma28Draw {
            psi: 1.0,
            theta: 4.0,
            noise: 0.05,
        },
    )?;
    checks.push(Check::report("lemma28_max_C", sweep.max_c));
    Ok(SuiteReport::new(
        "bounds",
        checks,
        serde_json::json!({
            "status": record.status,
            "rows": record.rows.len(),
            "h1_control": h1.entries,
        }),
    ))
}

pub fn weights_suite(grid: &Grid, n_t: usize) -> SuiteReport {
    let pairs = [(1.0, 0.5), (1.0, -0.5), (0.0, 1.0), (0.5, -1.0), (-0.5, 0.25)];
    let results: Vec<(f64, f64, WeightCheck)> = pairs
        .iter()
        .map(|&(s, b)| (s, b, weight_inequality_check(s, b, grid, n_t)))
        .collect();
    let checks = results
        .iter()
        .map(|(s, b, r)| {
            let mut c = Check::at_most(format!("weights s={s} b={b}"), if r.passed { 0.0 } else { 1.0 }, 0.0);
            c.passed = r.passed;
            c
        })
        .collect();
    SuiteReport::new(
        "weights",
        checks,
        serde_json::json!(results
            .iter()
            .map(|(s, b, r)| serde_json::json!({"s": s, "b": b, "nodes": r.nodes, "worst": r.worst}))
            .collect::<Vec<_>>()),
    )
}

/// Observable defects between formulations at `dt` and `dt / 2`; either
/// both sit below `floor` or the defect falls at order at least `min_order`.
pub fn crossval_suite(initial: &System, cfg: &IntegratorConfig, floor: f64, min_order: f64) -> Result<SuiteReport> {
    let a = cross_validate(initial, cfg)?;
    let mut half = cfg.clone();
    half.dt = cfg.dt / 2.0;
    half.snapshot_every = cfg.snapshot_every * 2;
    let b = cross_validate(initial, &half)?;
    let (d1, d2) = (a.defect.max(), b.defect.max());
    let order = (d1 / d2).log2();
    let mut checks = vec![
        Check::report("defect_dt", d1),
        Check::report("defect_dt_half", d2),
        Check::report("order", order),
    ];
    let ok = d1.max(d2) <= floor || order >= min_order;
    checks.push(Check {
        name: "equivalence".into(),
        value: if d1.max(d2) <= floor { d1.max(d2) } else { order },
        limit: if d1.max(d2) <= floor { floor } else { min_order },
        hard: true,
        passed: ok,
    });
    let status_ok = a.raw.status == RunStatus::Completed;
    Ok(SuiteReport::new(
        "crossval",
        checks,
        serde_json::json!({"defect_dt": a.defect, "defect_dt_half": b.defect, "completed": status_ok}),
    ))
}
