//! Octonion bundle formulation of G2-structures on a flat periodic 7-torus.
//!
//! The algebra layer ([`octonion`], [`forms`]) is exact linear algebra on R^8
//! and R^7. The differential layer ([`lattice`], [`connection`], [`dirac`],
//! [`flow`]) discretizes fields on a periodic grid with central differences.

pub mod connection;
pub mod dirac;
pub mod error;
pub mod exterior;
pub mod flow;
pub mod forms;
pub mod lattice;
pub mod octonion;
pub mod verify;

#[cfg(test)]
pub(crate) mod oracle;

pub use connection::{
    adjoint_defect, bianchi_residual, codiff, cov_d, ext_d, full_torsion, scalar_curvature_residual, torsion_of_gauge,
    two_path_torsion, Frame, PhiField, TorsionField,
};
pub use dirac::{dirac, dirac_explicit, energy_identity_gap, lichnerowicz_residual, torsion_17_from_dirac, DeltaBasis};
pub use error::{Error, Result};
pub use flow::{
    div_torsion, energy, euler_gradient, flow_step, run_flow, FlowConfig, FlowOutcome, FlowRun, FlowState, StepOutcome, TraceRow,
};
pub use forms::{
    decompose_torsion, hodge_star3, hodge_star4, metric_from_phi, phi0, project_2form, project_3form, sigma,
    FourForm, ThreeForm, TorsionComponents,
};
pub use lattice::{ddx, make_unit_field, FieldSpec, Grid, Mode, OctField, OctForm};
pub use octonion::{Octonion, StructureConstants};
pub use verify::{run_identities, IdentityResult, VerifyConfig};

pub type Vec7 = nalgebra::SVector<f64, 7>;
pub type Tensor2 = nalgebra::SMatrix<f64, 7, 7>;
