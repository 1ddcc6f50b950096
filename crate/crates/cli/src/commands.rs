use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use octobundle::flow::{div_torsion, naive_div_torsion};
use octobundle::forms::project_3form;
use octobundle::lattice::{read_binary, write_binary, write_field};
use octobundle::{
    bianchi_residual, decompose_torsion, phi0, run_flow, run_identities, scalar_curvature_residual, two_path_torsion,
    FieldSpec, FlowConfig, FlowOutcome, Grid, OctField, Octonion, StructureConstants, Tensor2, ThreeForm, TorsionField,
    TraceRow, VerifyConfig,
};
use serde::Deserialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_MAX_STEPS: i32 = 3;
pub const EXIT_STIFF: i32 = 4;

fn write_json(dir: &Option<PathBuf>, name: &str, value: &Value) -> Result<()> {
    if let Some(dir) = dir {
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn matrix(m: &Tensor2) -> Vec<Vec<f64>> {
    (0..7).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn verify(cfg: &VerifyConfig, out: &Option<PathBuf>) -> Result<i32> {
    let results = run_identities(cfg)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    for r in &results {
        println!("{:<5} {:<12} {:<32} {:.3e} (tol {:.0e})", if r.passed { "ok" } else { "FAIL" }, r.group, r.name, r.residual, r.tol);
    }
    let report = json!({
        "seed": cfg.seed,
        "trials": cfg.trials,
        "corrupt_phi": cfg.corrupt_phi,
        "passed": failed.is_empty(),
        "failed": failed,
        "identities": results,
    });
    write_json(out, "verify_report.json", &report)?;
    if failed.is_empty() {
        println!("all {} identities passed", results.len());
        Ok(EXIT_OK)
    } else {
        println!("{} identities failed: {}", failed.len(), failed.join(", "));
        Ok(EXIT_FAILED)
    }
}

/// Loads a field spec and applies grid overrides.
pub fn load_spec(path: &Path, n: Option<usize>, axes: Option<Vec<usize>>) -> Result<FieldSpec> {
    let mut spec = FieldSpec::load(path).with_context(|| format!("reading field spec {}", path.display()))?;
    if let Some(n) = n {
        spec.n = n;
    }
    if let Some(axes) = axes {
        spec.active_axes = axes;
    }
    Ok(spec)
}

fn torsion_summary(spec: &FieldSpec) -> Result<(Value, f64, OctField, TorsionField)> {
    let (_, rescaled) = spec.modes()?;
    let v = spec.build()?;
    let grid = v.grid.clone();
    let two = two_path_torsion(&v, &TorsionField::zero(&grid))?;
    let t = &two.gauge.torsion;
    let norms = |tf: &TorsionField| {
        let [a, b, c, d] = tf.component_norms();
        json!({ "tau1_L2": a, "tau7_L2": b, "tau14_L2": c, "tau27_L2": d })
    };
    let bianchi = bianchi_residual(t).into_iter().fold(0.0, f64::max);
    let scal = scalar_curvature_residual(t).into_iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let summary = json!({
        "n": grid.n(),
        "active_axes": grid.active_axes().iter().map(|a| a + 1).collect::<Vec<_>>(),
        "rescaled_modes": rescaled,
        "two_path_max_discrepancy": two.gap,
        "formula_gap": two.gauge.formula_gap,
        "fit_residual": two.direct.residual,
        "component_norms": norms(t),
        "direct_component_norms": norms(&two.direct.torsion),
        "bianchi_max": bianchi,
        "scalar_curvature_max": scal,
    });
    Ok((summary, two.gap, v, two.gauge.torsion))
}

pub fn torsion(spec: &FieldSpec, refine: bool, write_fields: bool, out: &Option<PathBuf>) -> Result<i32> {
    let (mut summary, gap, v, t) = torsion_summary(spec)?;
    println!("n = {}: two-path max discrepancy {:.6e}", spec.n, gap);
    if refine {
        let fine = FieldSpec { n: 2 * spec.n, ..spec.clone() };
        let (fine_summary, fine_gap, _, _) = torsion_summary(&fine)?;
        let ratio = gap / fine_gap;
        println!("n = {}: two-path max discrepancy {:.6e}", fine.n, fine_gap);
        println!("refinement ratio {ratio:.4}");
        summary["refinement"] = json!({ "n": fine.n, "report": fine_summary, "ratio": ratio });
    }
    write_json(out, "torsion_report.json", &summary)?;
    if write_fields {
        let Some(dir) = out else { bail!("--write-fields needs --out") };
        write_field(&dir.join("gauge.bin"), &v)?;
        write_binary(&dir.join("torsion.bin"), &t.grid, 49, "torsion", &t.to_flat())?;
    }
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeInput {
    tensor: Option<Vec<Vec<f64>>>,
    /// One-based (a, b, c, value) entries.
    three_form: Option<Vec<(usize, usize, usize, f64)>>,
}

pub fn decompose(input: &Path, out: &Option<PathBuf>) -> Result<i32> {
    let is_binary = input.extension().is_some_and(|e| e == "bin");
    let report = if is_binary {
        let (header, values) = read_binary(input)?;
        if header.components_per_site != 49 {
            bail!("{} holds {} components per site, expected a torsion field", input.display(), header.components_per_site);
        }
        let grid = Grid::from_one_based(header.n, &header.active_axes)?;
        let t: Vec<Tensor2> = values.chunks(49).map(Tensor2::from_row_slice).collect();
        let tf = TorsionField::new(&grid, octobundle::Frame::standard(), t);
        let [a, b, c, d] = tf.component_norms();
        json!({ "kind": "torsion_field", "n": header.n, "active_axes": header.active_axes,
                "tau1_L2": a, "tau7_L2": b, "tau14_L2": c, "tau27_L2": d,
                "reassembly_error": tf.reassembly_error() })
    } else {
        let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let parsed: DecomposeInput = serde_json::from_str(&text).context("parsing decompose input")?;
        match (parsed.tensor, parsed.three_form) {
            (Some(rows), None) => {
                if rows.len() != 7 || rows.iter().any(|r| r.len() != 7) {
                    bail!("tensor must be 7x7");
                }
                let t = Tensor2::from_fn(|i, j| rows[i][j]);
                let c = decompose_torsion(&t, &phi0());
                let back = c.reassemble(&phi0());
                json!({ "kind": "tensor", "tau1": c.tau1, "tau7": c.tau7.as_slice(), "tau14": matrix(&c.tau14),
                        "tau27": matrix(&c.tau27), "reassembly_error": (back - t).amax() })
            }
            (None, Some(triples)) => {
                let chi = ThreeForm::from_triples(&triples)?;
                let sc = StructureConstants::standard();
                let parts = project_3form(&chi, &sc);
                let back = parts.reassemble(&sc);
                json!({ "kind": "three_form", "pi1": parts.pi1, "pi7": parts.pi7.as_slice(), "pi27": matrix(&parts.pi27),
                        "reassembly_error": back.max_abs_diff(&chi) })
            }
            _ => bail!("decompose input needs exactly one of \"tensor\" or \"three_form\""),
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(out, "decompose_report.json", &report)?;
    Ok(EXIT_OK)
}

pub fn flow(spec: Option<&FieldSpec>, grid: Option<Grid>, cfg: &FlowConfig, out: &Option<PathBuf>) -> Result<i32> {
    let (grid, t) = match spec {
        Some(spec) => {
            let w = spec.build()?;
            let t = octobundle::torsion_of_gauge(&w, &TorsionField::zero(&w.grid))?.torsion;
            (w.grid.clone(), t)
        }
        None => {
            let Some(grid) = grid else { bail!("flow needs --field or --n/--axes") };
            let t = TorsionField::zero(&grid);
            (grid, t)
        }
    };
    let v0 = OctField::constant(&grid, Octonion::one());
    let run = run_flow(&v0, &t, cfg)?;
    let state = &run.state;
    let div = div_torsion(&state.v, &t)?;
    let naive = naive_div_torsion(&state.v, &t)?.max_norm();
    let grad_inf = state.grad.max_norm();
    let two = two_path_torsion(&state.v, &t)?;
    let code = match run.outcome {
        FlowOutcome::Converged => EXIT_OK,
        FlowOutcome::MaxSteps => EXIT_MAX_STEPS,
        FlowOutcome::Stiff => EXIT_STIFF,
    };
    println!(
        "{:?} after {} steps: energy {:.6e}, div_T_inf {:.3e}",
        run.outcome, state.step, state.energy, state.div_t_norm
    );
    let summary = json!({
        "outcome": run.outcome,
        "exit_code": code,
        "n": grid.n(),
        "active_axes": grid.active_axes().iter().map(|a| a + 1).collect::<Vec<_>>(),
        "dt0": cfg.dt0,
        "max_steps": cfg.max_steps,
        "tol": cfg.tol,
        "steps": state.step,
        "t": state.time,
        "energy": state.energy,
        "grad_norm": state.grad_norm,
        "grad_inf": grad_inf,
        "div_T_inf": state.div_t_norm,
        "div_T_max_gap_to_grad": div.data.iter().zip(&state.grad.data).map(|(d, g)| (d.norm() - g.norm()).abs()).fold(0.0, f64::max),
        "central_difference_div_T_inf": naive,
        "two_path_max_discrepancy": two.gap,
    });
    write_json(out, "flow_summary.json", &summary)?;
    if let Some(dir) = out {
        let path = dir.join("trace.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(TraceRow::header())?;
        for row in &run.trace {
            w.serialize((row.step, row.t, row.energy, row.grad_norm, row.div_t_inf, row.tau1_l2, row.tau7_l2, row.tau14_l2, row.tau27_l2))?;
        }
        w.flush()?;
        write_field(&dir.join("final_v.bin"), &state.v)?;
    }
    Ok(code)
}
