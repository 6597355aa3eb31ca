//! One function per subcommand. Each validates its whole configuration
//! first (returning [`UsageError`]) and only then computes. Failures during
//! computation end up in the report with status `error`.

use num_complex::Complex64;
use serde_json::{json, Value};

use qab_core::ab::{
    curl_diagnostics, fit_fringe, holonomy_pair, interference_pattern, loop_holonomy, lorentz_radial_force, wrap_phase,
    ABSetup, HolonomyPair,
};
use qab_core::field::ScalarField;
use qab_core::io::{format_f64, FieldCsv};
use qab_core::phase::{
    coefficient_constraints, master_residual, reduced_residual, right_form_residual, split_residuals, PotentialPair,
    ResidualContext,
};
use qab_core::sim::{
    check_stability, decouple_commuting, eigen_split_residual, evolve, probability_density, random_commuting_model,
    random_model, Boundary, Evolution, HamiltonianSpec, Lattice, LinkHamiltonian, QuaternionEigenpair, WaveState,
};
use qab_core::Quaternion;

use crate::config::{EvolveConfig, FieldsConfig, HolonomyConfig, PatternConfig, SplitConfig, VerifyConfig};
use crate::report::{Check, Outcome, UsageError};

fn finish(mut out: Outcome, run: qab_core::Result<()>) -> Outcome {
    if let Err(e) = run {
        out.error = Some(e.to_string());
    }
    out
}

pub fn verify(cfg: VerifyConfig, scale: f64) -> Result<Outcome, UsageError> {
    let grid = cfg.grid.build()?;
    let family = cfg.family.build(&grid)?;
    let pot = family.potentials.with_alpha_offset(cfg.alpha_offset);
    let phi = cfg.phi.sample(&grid);
    // surfaces grid mismatches and similar preconditions before any output
    ResidualContext::new(&family.phase, &pot, cfg.derivatives)?;

    let mut out = Outcome::new("verify", &cfg);
    let tol = &cfg.tolerances;
    let run = (|| {
        let src = cfg.derivatives;
        let master = master_residual(&family.phase, &pot, &phi, src)?;
        let (split_c, split_j) = split_residuals(&family.phase, &pot, &phi, src)?;
        let coeff = coefficient_constraints(&family.phase, &pot, &family.lambda)?;
        let (form, reduced) = reduced_residual(&family.phase, &family.lambda, &phi)?;
        let (right_c, right_j) = right_form_residual(&family.phase, &pot, &phi, src)?;

        out.checks.push(Check::at_most("master", master.max, tol.master * scale));
        out.checks.push(Check::at_most("split_complex", split_c.max, tol.split * scale));
        out.checks.push(Check::at_most("split_j", split_j.max, tol.split * scale));
        for (name, r) in ["phi_complex", "phi_j", "gradient_complex", "gradient_j"].iter().zip(&coeff) {
            out.checks.push(Check::at_most(&format!("coefficient_{name}"), r.max, tol.coefficient * scale));
        }
        out.checks.push(Check::at_most(form.label(), reduced.max, tol.reduced * scale));
        if let Some(t) = tol.right_form {
            out.checks.push(Check::at_most("right_form_complex", right_c.max, t * scale));
            out.checks.push(Check::at_most("right_form_j", right_j.max, t * scale));
        }
        out.results = json!({
            "master": master,
            "split": [split_c, split_j],
            "coefficient": coeff,
            "reduced": reduced,
            "right_form": [right_c, right_j],
        });
        Ok(())
    })();
    Ok(finish(out, run))
}

fn evolve_csv_state(ev: &Evolution) -> String {
    FieldCsv::new(&ev.state.psi.grid)
        .scalar("psi", &ev.state.psi)
        .scalar("density", &probability_density(&ev.state.psi))
        .finish()
}

pub fn evolve_cmd(cfg: EvolveConfig, scale: f64) -> Result<Outcome, UsageError> {
    let sim = &cfg.simulation;
    sim.validate()?;
    cfg.packet.validate()?;
    let lattice = match sim.boundary {
        Boundary::Dirichlet => Lattice::dirichlet_box(cfg.lattice.nodes, cfg.lattice.length)?,
        Boundary::Periodic => Lattice::periodic_square(cfg.lattice.nodes, cfg.lattice.length)?,
    };
    let grid = lattice.grid.clone();
    let (k, pot) = match &cfg.family {
        Some(f) => {
            let fam = f.build(&grid)?;
            (fam.k_field(), fam.potentials)
        }
        None => (ScalarField::sample(&grid, |_| Quaternion::ONE), PotentialPair::zero(&grid)),
    };
    let h = LinkHamiltonian::new(&lattice, &HamiltonianSpec::with_connection(&lattice, pot.clone()), sim.hbar, sim.mass)?;
    check_stability(&h, sim.dt)?;
    let initial = WaveState::factorized(&k, &cfg.packet.sample(&grid));

    let mut out = Outcome::new("evolve", &cfg);
    let run = (|| {
        let ev = evolve(&lattice, &h, &pot, &initial, sim)?;
        let s = &ev.series;
        out.checks.push(Check::at_most("probability_drift", s.probability_drift(), sim.norm_drift_tolerance * scale));
        out.checks.push(Check::at_most(
            "continuity_interior_max",
            s.continuity_interior_max(),
            sim.continuity_tolerance * scale,
        ));
        out.results = json!({
            "steps": sim.steps,
            "final_time": ev.state.t,
            "dt_times_frequency_bound": sim.dt * h.frequency_bound(),
            "probability_drift": s.probability_drift(),
            "energy_drift": s.energy_drift(),
            "continuity_interior_max": s.continuity_interior_max(),
        });
        out.files.push(("observables.csv".into(), s.to_csv()));
        out.files.push(("final_state.csv".into(), evolve_csv_state(&ev)));
        Ok(())
    })();
    Ok(finish(out, run))
}

/// Fringe fit on unit intensities: fails when the screen does not span
/// enough path difference for the fit to be determined.
fn check_fit_span(setup: &ABSetup, k: f64) -> Result<(), UsageError> {
    let mut phases = Vec::new();
    for y in setup.screen_coordinates() {
        let [a, b] = setup.path_pair(y)?;
        phases.push(k * (b.length() - a.length()));
    }
    let flat = vec![1.0; phases.len()];
    fit_fringe(&phases, &flat)?;
    Ok(())
}

pub fn ab_pattern(cfg: PatternConfig, scale: f64) -> Result<Outcome, UsageError> {
    cfg.setup.validate()?;
    if !(cfg.wavenumber > 0.0 && cfg.wavenumber.is_finite()) {
        return Err(UsageError(format!("wavenumber must be positive, got {}", cfg.wavenumber)));
    }
    check_fit_span(&cfg.setup, cfg.wavenumber)?;

    let mut out = Outcome::new("ab-pattern", &cfg);
    let tol = &cfg.tolerances;
    let run = (|| {
        let r = interference_pattern(&cfg.setup, cfg.wavenumber)?;
        out.checks.push(Check::at_most("complex_shift_error", r.complex_shift_error(), tol.shift * scale));
        if cfg.setup.complex_limit {
            let q = wrap_phase(r.quaternion_fit.shift - r.expected_shift).abs();
            out.checks.push(Check::at_most("quaternion_shift_error", q, tol.shift * scale));
            out.checks.push(Check::at_most("witness_max", r.witness_max, tol.witness * scale));
        }
        out.results = r.summary();
        out.files.push(("pattern.csv".into(), r.to_csv()));
        Ok(())
    })();
    Ok(finish(out, run))
}

fn pair_json(y: f64, h: &HolonomyPair) -> Value {
    json!({
        "y": y,
        "upper": h.k1,
        "lower": h.k2,
        "relative": h.relative(),
        "witness": h.witness(),
        "witness_change": h.witness_change,
        "refinement": h.refinement,
        "change": h.change,
    })
}

pub fn holonomy(cfg: HolonomyConfig, scale: f64) -> Result<Outcome, UsageError> {
    let setup = &cfg.setup;
    setup.validate()?;
    let radius = cfg.loop_radius.unwrap_or(setup.reference.radius);
    if !(radius > setup.solenoid.radius()) {
        return Err(UsageError(format!("loop radius {radius} must exceed the solenoid radius")));
    }
    if cfg.loop_segments < 3 {
        return Err(UsageError("loop_segments must be at least 3".into()));
    }
    for &y in &cfg.screen_y {
        setup.check_screen_point(y)?;
    }

    let mut out = Outcome::new("holonomy", &cfg);
    let tol = &cfg.tolerances;
    let run = (|| {
        let expected = Complex64::from_polar(1.0, setup.solenoid.ab_phase());
        let mut pairs = Vec::new();
        for &y in &cfg.screen_y {
            let h = holonomy_pair(setup, y)?;
            if setup.complex_limit {
                out.checks.push(Check::at_most(&format!("witness[y={}]", format_f64(y)), h.witness(), tol.witness * scale));
                let rel = (h.relative() - Quaternion::from_complex(expected)).norm();
                out.checks.push(Check::at_most(&format!("relative_phase[y={}]", format_f64(y)), rel, tol.loop_phase * scale));
            } else {
                // the witness must be settled at the accepted refinement
                out.checks.push(Check::at_most(
                    &format!("witness_change[y={}]", format_f64(y)),
                    h.witness_change,
                    setup.holonomy.tolerance * scale,
                ));
            }
            pairs.push(pair_json(y, &h));
        }
        let lh = loop_holonomy(setup, radius, cfg.loop_segments)?;
        let deviation = (lh.k1 - Quaternion::from_complex(expected)).norm();
        if setup.complex_limit {
            out.checks.push(Check::at_most("loop_deviation", deviation, tol.loop_phase * scale));
        }
        out.results = json!({
            "ab_phase": setup.solenoid.ab_phase(),
            "pairs": pairs,
            "loop": {
                "radius": radius,
                "segments": cfg.loop_segments,
                "holonomy": lh.k1,
                "refinement": lh.refinement,
                "deviation_from_ab_phase": deviation,
            },
        });
        Ok(())
    })();
    Ok(finish(out, run))
}

/// A shifted copy of an eigenpair, so the split residuals are nonzero and
/// the norm identity is exercised away from zero.
fn shifted(pair: &QuaternionEigenpair, by: f64) -> QuaternionEigenpair {
    QuaternionEigenpair { epsilon: pair.epsilon + by, ..pair.clone() }
}

pub fn split_check(cfg: SplitConfig, scale: f64) -> Result<Outcome, UsageError> {
    if cfg.dim == 0 || cfg.dim > 64 {
        return Err(UsageError(format!("dim must be in 1..=64, got {}", cfg.dim)));
    }
    if cfg.samples == 0 {
        return Err(UsageError("samples must be at least 1".into()));
    }
    let mut out = Outcome::new("split-check", &cfg);
    let tol = &cfg.tolerances;
    let run = (|| {
        let (mut eigen, mut gap, mut decouple) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..cfg.samples {
            let seed = cfg.seed.wrapping_add(i as u64);
            let model = random_model(cfg.dim, seed)?;
            for pair in model.eigenpairs()? {
                eigen = eigen.max(eigen_split_residual(&model, &pair).quaternion);
                let r = eigen_split_residual(&model, &shifted(&pair, 0.5));
                gap = gap.max(r.identity_gap / (r.quaternion * r.quaternion));
            }
            if cfg.dim.is_multiple_of(2) {
                let model = random_commuting_model(cfg.dim, seed)?;
                for pair in model.eigenpairs()? {
                    let d = decouple_commuting(&model, &pair)?;
                    decouple = decouple.max(d.phi_residual.max(d.chi_residual));
                }
            }
        }
        out.checks.push(Check::at_most("identity_relative_gap", gap, tol.identity * scale));
        out.checks.push(Check::at_most("eigen_residual", eigen, tol.eigen * scale));
        if cfg.dim.is_multiple_of(2) {
            out.checks.push(Check::at_most("decoupled_residual", decouple, tol.decouple * scale));
        }
        out.results = json!({
            "dim": cfg.dim,
            "samples": cfg.samples,
            "identity_relative_gap": gap,
            "eigen_residual": eigen,
            "decoupled_residual": if cfg.dim.is_multiple_of(2) { json!(decouple) } else { Value::Null },
        });
        Ok(())
    })();
    Ok(finish(out, run))
}

pub fn fields(cfg: FieldsConfig, _scale: f64) -> Result<Outcome, UsageError> {
    cfg.setup.validate()?;
    let grid = cfg.setup.mask_grid(cfg.grid.build()?);
    if grid.active().next().is_none() {
        return Err(UsageError("every grid node lies inside the solenoid".into()));
    }
    let mut out = Outcome::new("fields", &cfg);
    let run = (|| {
        let d = curl_diagnostics(&cfg.setup, &grid)?;
        let force = lorentz_radial_force(&cfg.setup, &grid, cfg.force.velocity, cfg.force.extraction)?;
        let f = &d.fields;
        let mut csv = FieldCsv::new(&grid);
        let missing = || qab_core::Error::Domain("curl diagnostics returned no sampled fields".into());
        csv = csv
            .vector("alpha", f.alpha.as_ref().ok_or_else(missing)?)
            .vector("grad_gamma", f.grad_gamma.as_ref().ok_or_else(missing)?)
            .vector("grad_omega", f.grad_omega.as_ref().ok_or_else(missing)?)
            .vector("beta", f.beta.as_ref().ok_or_else(missing)?)
            .scalar("curl_beta_numeric", f.beta_curl_numeric.as_ref().ok_or_else(missing)?)
            .scalar("curl_beta_analytic", f.beta_curl_analytic.as_ref().ok_or_else(missing)?)
            .scalar("curl_beta_path_term", f.beta_curl_defect.as_ref().ok_or_else(missing)?)
            .scalar("radial_force", &force.field);
        let closure = qab_core::ab::loop_closure(&cfg.setup, cfg.setup.reference.radius, 512)?;
        out.results = json!({
            "curl": d,
            "loop_closure": closure,
            "force": force,
        });
        out.files.push(("fields.csv".into(), csv.finish()));
        Ok(())
    })();
    Ok(finish(out, run))
}
