//! Gradient flow of the torsion energy E(V) = ½∫|DV|² over unit octonion
//! fields, driving the gauge-transformed torsion towards Div T^(V) = 0.

use rayon::prelude::*;
use serde::Serialize;

use crate::connection::{codiff, cov_d, pointwise_norm2, torsion_of_gauge, TorsionField};
use crate::dirac::dirac;
use crate::error::{Error, Result};
use crate::exterior::DIM;
use crate::lattice::{diff_slots, OctField, OctForm};
use crate::Octonion;

/// ½∫Σ_i |D_iV|².
pub fn energy(v: &OctField, t: &TorsionField) -> Result<f64> {
    let dv = cov_d(v, t)?;
    Ok(0.5 * v.grid.integrate(&pointwise_norm2(&dv)))
}

/// G = D*DV − |DV|²V.
pub fn euler_gradient(v: &OctField, t: &TorsionField) -> Result<OctField> {
    let dv = cov_d(v, t)?;
    let lap = codiff(&dv, t)?.to_field()?;
    let n2 = pointwise_norm2(&dv);
    lap.zip_map(v, |s, l, x| *l - *x * n2[s])
}

/// Lattice divergence of the gauge-transformed torsion,
/// Div T̃ = [Σ_a D_a(T̃_a V)] V⁻¹ − |T̃|² with T̃_a = −(D_aV)V⁻¹ kept as a full
/// octonion. With this definition G = (Div T̃)V holds site by site.
pub fn div_torsion(v: &OctField, t: &TorsionField) -> Result<OctField> {
    v.check_unit(crate::connection::UNIT_TOL)?;
    let g = &v.grid;
    let dv = cov_d(v, t)?;
    let fr = &t.frame;
    let mut tv = OctForm::zeros(g, 1);
    let mut tilde2 = vec![0.0; g.total_sites()];
    for s in 0..g.total_sites() {
        let vinv = v.data[s].conj();
        for a in 0..DIM {
            let tt = -fr.mul(s, &dv.data[s * DIM + a], &vinv);
            tilde2[s] += tt.norm2();
            tv.data[s * DIM + a] = fr.mul(s, &tt, &v.data[s]);
        }
    }
    let sum = codiff(&tv, t)?.to_field()?;
    Ok(sum.map(|s, x| -fr.mul(s, x, &v.data[s].conj()) - Octonion::real(tilde2[s])))
}

/// Σ_a ∂_a T^(V)_a by central differences of the imaginary torsion rows.
pub fn naive_div_torsion(v: &OctField, t: &TorsionField) -> Result<OctField> {
    let tt = torsion_of_gauge(v, t)?.torsion;
    let g = &v.grid;
    let mut out = OctField::constant(g, Octonion::zero());
    for &a in g.active_axes() {
        let rows: Vec<Octonion> = (0..g.total_sites()).map(|s| tt.row(s, a)).collect();
        for (o, d) in out.data.iter_mut().zip(diff_slots(g, &rows, 1, a)) {
            *o += d;
        }
    }
    Ok(out)
}

fn l2(f: &OctField) -> f64 {
    f.inner(f).sqrt()
}

/// A point along the flow.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub v: OctField,
    pub time: f64,
    pub energy: f64,
    pub grad: OctField,
    /// Lattice L² norm of G.
    pub grad_norm: f64,
    /// Lattice L∞ norm of Div T̃.
    pub div_t_norm: f64,
    pub step: usize,
}

impl FlowState {
    pub fn new(v: OctField, t: &TorsionField, time: f64, step: usize) -> Result<Self> {
        v.check_unit(crate::connection::UNIT_TOL)?;
        let energy = energy(&v, t)?;
        let grad = euler_gradient(&v, t)?;
        let div_t_norm = div_torsion(&v, t)?.max_norm();
        Ok(Self { grad_norm: l2(&grad), v, time, energy, grad, div_t_norm, step })
    }
}

#[derive(Clone, Debug)]
pub enum StepOutcome {
    Accepted { state: FlowState, dt: f64 },
    /// No step size above the floor decreased the energy.
    Stiff { dt: f64 },
}

/// One explicit Euler step V ← (V − dt·G)/|V − dt·G|, halving dt until the
/// energy does not increase.
pub fn flow_step(state: &FlowState, t: &TorsionField, dt: f64, dt_min: f64) -> Result<StepOutcome> {
    if !(dt > 0.0) {
        return Err(Error::TimeStep(dt));
    }
    let mut dt = dt;
    while dt >= dt_min {
        let v = state.v.zip_map(&state.grad, |_, x, gx| {
            let y = *x - *gx * dt;
            y / y.norm()
        })?;
        let e = energy(&v, t)?;
        if e <= state.energy {
            let next = FlowState::new(v, t, state.time + dt, state.step + 1)?;
            return Ok(StepOutcome::Accepted { state: next, dt });
        }
        dt *= 0.5;
    }
    Ok(StepOutcome::Stiff { dt })
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub dt0: f64,
    pub max_steps: usize,
    /// Stop once the L∞ norm of Div T̃ drops below this.
    pub tol: f64,
}

impl FlowConfig {
    pub fn dt_min(&self) -> f64 {
        1e-12 * self.dt0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowOutcome {
    Converged,
    MaxSteps,
    Stiff,
}

/// One CSV row of the flow trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub grad_norm: f64,
    #[serde(rename = "div_T_inf")]
    pub div_t_inf: f64,
    pub tau1_l2: f64,
    pub tau7_l2: f64,
    pub tau14_l2: f64,
    pub tau27_l2: f64,
}

impl TraceRow {
    pub fn header() -> [&'static str; 9] {
        ["step", "t", "energy", "grad_norm", "div_T_inf", "tau1_L2", "tau7_L2", "tau14_L2", "tau27_L2"]
    }

    fn record(state: &FlowState, t: &TorsionField) -> Result<Self> {
        let [tau1_l2, tau7_l2, tau14_l2, tau27_l2] = torsion_of_gauge(&state.v, t)?.torsion.component_norms();
        Ok(Self {
            step: state.step,
            t: state.time,
            energy: state.energy,
            grad_norm: state.grad_norm,
            div_t_inf: state.div_t_norm,
            tau1_l2,
            tau7_l2,
            tau14_l2,
            tau27_l2,
        })
    }
}

#[derive(Clone, Debug)]
pub struct FlowRun {
    pub state: FlowState,
    pub trace: Vec<TraceRow>,
    pub outcome: FlowOutcome,
}

/// Runs the flow from `v0` until Div T̃ is below tolerance, the step budget
/// runs out, or the step size collapses.
pub fn run_flow(v0: &OctField, t: &TorsionField, cfg: &FlowConfig) -> Result<FlowRun> {
    if !(cfg.dt0 > 0.0) {
        return Err(Error::TimeStep(cfg.dt0));
    }
    let mut state = FlowState::new(v0.clone(), t, 0.0, 0)?;
    let mut trace = vec![TraceRow::record(&state, t)?];
    let mut dt = cfg.dt0;
    let outcome = loop {
        if state.div_t_norm < cfg.tol {
            break FlowOutcome::Converged;
        }
        if state.step >= cfg.max_steps {
            break FlowOutcome::MaxSteps;
        }
        match flow_step(&state, t, dt, cfg.dt_min())? {
            StepOutcome::Accepted { state: next, dt: used } => {
                log::debug!("step {} dt {:.3e} energy {:.6e} div {:.3e}", next.step, used, next.energy, next.div_t_norm);
                state = next;
                trace.push(TraceRow::record(&state, t)?);
                dt = (2.0 * used).min(cfg.dt0);
            }
            StepOutcome::Stiff { dt } => {
                log::warn!("step size fell to {dt:.3e} at step {}", state.step);
                break FlowOutcome::Stiff;
            }
        }
    };
    Ok(FlowRun { state, trace, outcome })
}

/// How far V is from a unit eigensection D̸V = λV with constant λ.
#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub lambda: f64,
    /// max |D̸V − λV|.
    pub residual: f64,
    /// max |G|.
    pub grad_inf: f64,
}

pub fn eigen_diagnostic(v: &OctField, t: &TorsionField) -> Result<EigenReport> {
    let dv = dirac(v, t)?;
    let lam: Vec<f64> = dv.data.par_iter().zip(&v.data).map(|(d, x)| d.dot(x)).collect();
    let lambda = v.grid.integrate(&lam) / crate::lattice::TORUS_VOLUME;
    let residual = dv.data.iter().zip(&v.data).fold(0.0, |m: f64, (d, x)| m.max((*d - *x * lambda).max_abs()));
    let grad_inf = euler_gradient(v, t)?.max_norm();
    Ok(EigenReport { lambda, residual, grad_inf })
}
