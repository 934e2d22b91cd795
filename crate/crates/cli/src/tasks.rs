//! One function per task. Every artifact is built in memory first so a
//! failing run writes nothing.

use std::fmt::Write;

use hyst2d_core::foliation::validate::validate;
use hyst2d_core::identify::{extract_phi, measure_transition_surface, recover_curves, recover_weight};
use hyst2d_core::variation::{check_bounds, minimality_probe, VariationReport};
use hyst2d_core::{Family, InitialState, KSignals, RelayGrid};

use crate::config::{Loaded, Task};
use crate::svg::line_plot;
use crate::CliError;

pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Failed validation checks; non-zero makes the run exit 1.
    pub failed_checks: usize,
    pub summary: String,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> hyst2d_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn artifact(name: &'static str, bytes: impl Into<Vec<u8>>) -> Artifact {
    Artifact { name, bytes: bytes.into() }
}

pub fn run(cfg: &Loaded, task: Task, seed: u64) -> Result<Outcome, CliError> {
    match task {
        Task::Simulate => simulate(cfg),
        Task::AnalyzeVariation => analyze_variation(cfg, seed),
        Task::IdentifyWeight => identify_weight(cfg),
        Task::IdentifyCurves => identify_curves(cfg),
        Task::ValidateFoliation => validate_foliation(cfg, seed),
    }
}

fn simulate(cfg: &Loaded) -> Result<Outcome, CliError> {
    let f = cfg.foliation()?;
    let w = cfg.weight()?;
    let (h, i0) = cfg.grid()?;
    let u = cfg.signal()?;
    let mut grid = RelayGrid::build(&f, &w, h, i0)?;
    let k = KSignals::new(&f, &u)?;
    let (out, _) = grid.apply_reduced(&k)?;

    let loop_points: Vec<(f64, f64)> = out.samples.iter().map(|&(t, v)| (k.k(Family::Zero, t), v)).collect();
    let mut report = String::new();
    let _ = writeln!(report, "task = simulate");
    let _ = writeln!(report, "cells = {}", out.cells);
    let _ = writeln!(report, "h = {}", out.h);
    let _ = writeln!(report, "total_area = {}", grid.total_area());
    let _ = writeln!(report, "samples = {}", u.len());
    let _ = writeln!(report, "events = {}", out.events);
    let _ = writeln!(report, "rows = {}", out.samples.len());
    let _ = writeln!(report, "initial_output = {}", out.initial_value());
    let _ = writeln!(report, "final_output = {}", out.final_value());
    Ok(Outcome {
        summary: format!("{} cells, {} events, final output {}", out.cells, out.events, out.final_value()),
        artifacts: vec![
            artifact("trace.csv", csv_bytes(|b| out.write_csv(b))?),
            artifact("grid_state.csv", csv_bytes(|b| grid.write_csv(b))?),
            artifact("report.txt", report),
            artifact("output_vs_time.svg", line_plot("Output against time", "t", "H", &out.samples)),
            artifact("output_vs_k0.svg", line_plot("Hysteresis loop", "K0", "H", &loop_points)),
        ],
        failed_checks: 0,
    })
}

fn analyze_variation(cfg: &Loaded, seed: u64) -> Result<Outcome, CliError> {
    let f = cfg.foliation()?;
    let u = cfg.signal()?;
    let (p, xi, trials) = cfg.relay()?;
    let rep = check_bounds(&f, p, &u, xi)?;
    let min = minimality_probe(&f, p, &u, xi, trials, seed)?;
    let mut text = format!("task = analyze-variation\nc0 = {}\nc1 = {}\nxi = {}\n", p.c0, p.c1, u8::from(xi));
    text.push_str(&rep.render());
    let _ = writeln!(text, "minimality_seed = {seed}");
    let _ = writeln!(text, "minimality_trials = {}", min.trials);
    let _ = writeln!(text, "minimality_min_candidate = {}", min.min_candidate_variation);
    let _ = writeln!(text, "minimality_passed = {}", min.passed());
    Ok(Outcome {
        summary: format!(
            "v_relay {} (bounds {} / {}), minimality {}",
            rep.v_relay,
            rep.bound_31,
            rep.bound_32,
            if min.passed() { "holds" } else { "beaten" }
        ),
        artifacts: vec![
            artifact("variation_report.txt", text),
            artifact("variation.csv", format!("{}\n{}\n", VariationReport::csv_header(), rep.csv_row())),
        ],
        failed_checks: 0,
    })
}

fn identify_weight(cfg: &Loaded) -> Result<Outcome, CliError> {
    let f = cfg.foliation()?;
    let w = cfg.weight()?;
    let (h, _) = cfg.grid()?;
    let (curve, h_s) = cfg.transversal()?;
    let k = curve.bind(&f)?;
    let model = RelayGrid::build(&f, &w, h, InitialState::AllZero)?;
    let surface = measure_transition_surface(&model, &k, h_s)?;
    let phi = extract_phi(&surface)?;
    let rec = recover_weight(&phi, &k, &model)?;
    let dev = rec.max_error(|a, b| w.eval(a, b));
    let covered = rec.cells.iter().filter(|c| c.1.is_some()).count();
    let report = format!(
        "task = identify-weight\nnodes = {}\nh_s = {}\ncells = {}\ncells_recovered = {covered}\nmax_deviation = {dev}\n",
        surface.lattice.n,
        h_s,
        rec.cells.len()
    );
    Ok(Outcome {
        summary: format!("max deviation from the configured weight: {dev}"),
        artifacts: vec![
            artifact("psi.csv", csv_bytes(|b| surface.write_csv(b))?),
            artifact("phi.csv", csv_bytes(|b| phi.write_csv(b))?),
            artifact("W.csv", csv_bytes(|b| rec.write_nodes_csv(b))?),
            artifact("w_cells.csv", csv_bytes(|b| rec.write_cells_csv(b))?),
            artifact("report.txt", report),
        ],
        failed_checks: 0,
    })
}

fn identify_curves(cfg: &Loaded) -> Result<Outcome, CliError> {
    let f = cfg.foliation()?;
    let w = cfg.weight()?;
    let (h, _) = cfg.grid()?;
    let (curves, l0, l1, rc) = cfg.curves()?;
    let model = RelayGrid::build(&f, &w, h, InitialState::AllZero)?;
    let r = recover_curves(&model, &curves, &w, &l0, &l1, &rc)?;
    let mut report = String::from("task = identify-curves\n");
    for cloud in r.gamma0.iter().chain(&r.gamma1) {
        let _ = writeln!(
            report,
            "gamma{} level = {} points = {} spread = {}",
            cloud.family.index(),
            cloud.level,
            cloud.points.len(),
            cloud.spread()
        );
    }
    for s in &r.skipped {
        let _ = writeln!(report, "skipped gamma{} level = {} xi = {}: {}", s.family.index(), s.level, s.xi, s.error);
    }
    Ok(Outcome {
        summary: format!(
            "{} points recovered, {} skipped",
            r.gamma0.iter().chain(&r.gamma1).map(|c| c.points.len()).sum::<usize>(),
            r.skipped.len()
        ),
        artifacts: vec![
            artifact("gamma0.csv", csv_bytes(|b| r.write_csv(Family::Zero, b))?),
            artifact("gamma1.csv", csv_bytes(|b| r.write_csv(Family::One, b))?),
            artifact("report.txt", report),
        ],
        failed_checks: 0,
    })
}

fn validate_foliation(cfg: &Loaded, seed: u64) -> Result<Outcome, CliError> {
    let f = cfg.foliation()?;
    let transversal = cfg.validation_transversal();
    let rep = validate(&f, seed, transversal.as_deref());
    let failed = rep.checks.iter().filter(|c| !c.passed).count();
    Ok(Outcome {
        summary: format!("{} checks, {failed} failed", rep.checks.len()),
        artifacts: vec![artifact("validation_report.txt", rep.render())],
        failed_checks: failed,
    })
}
