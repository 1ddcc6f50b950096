//! Seeded registry of the pointwise algebraic identities. Each identity is
//! evaluated on `trials` random samples and reported by its largest residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirac::DeltaBasis;
use crate::error::Result;
use crate::forms::{metric_from_phi, phi0, pullback, sigma, verify_contraction_identities, ThreeForm};
use crate::{Octonion, StructureConstants, Tensor2, Vec7};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    /// Tolerance for the sampled identities.
    pub tol: f64,
    /// Tolerance for the Clifford relation, the exact tables and the G₂ example.
    pub tight_tol: f64,
    /// Flip the sign of the e123 term of φ₀ before building the algebra.
    pub corrupt_phi: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, trials: 1000, tol: 1e-10, tight_tol: 1e-12, corrupt_phi: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    pub group: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// The form used by the self-test: φ₀ with the sign of e123 flipped.
pub fn corrupted_phi() -> ThreeForm {
    let mut phi = phi0();
    phi.set([0, 1, 2], -phi.get([0, 1, 2]));
    phi
}

struct Sample {
    a: Octonion,
    b: Octonion,
    c: Octonion,
    x: Octonion,
    /// Nonzero, norm in [0.5, 2].
    v: Octonion,
    u: Octonion,
    w: Octonion,
    k: u32,
}

fn rand_oct(r: &mut ChaCha8Rng) -> Octonion {
    Octonion::new(r.gen_range(-1.0..=1.0), Vec7::from_fn(|_, _| r.gen_range(-1.0..=1.0)))
}

fn rand_unit(r: &mut ChaCha8Rng) -> Octonion {
    loop {
        let a = rand_oct(r);
        if a.norm() > 1e-3 {
            return a / a.norm();
        }
    }
}

impl Sample {
    fn draw(r: &mut ChaCha8Rng) -> Self {
        let (a, b, c, x) = (rand_oct(r), rand_oct(r), rand_oct(r), rand_oct(r));
        let v = rand_unit(r) * r.gen_range(0.5..=2.0);
        Self { a, b, c, x, v, u: rand_unit(r), w: rand_unit(r), k: r.gen_range(1..=4) }
    }
}

/// A^k by repeated left multiplication.
fn power(sc: &StructureConstants, a: &Octonion, k: u32) -> Octonion {
    (1..k).fold(*a, |acc, _| sc.mul(a, &acc))
}

struct Tracker {
    out: Vec<IdentityResult>,
}

impl Tracker {
    fn record(&mut self, name: &'static str, group: &'static str, tol: f64, residual: f64) {
        match self.out.iter_mut().find(|r| r.name == name) {
            Some(r) => r.residual = r.residual.max(residual),
            None => self.out.push(IdentityResult { name, group, residual, tol, passed: false }),
        }
    }
}

fn gap(a: Octonion, b: Octonion) -> f64 {
    let d = a - b;
    if d.is_finite() {
        d.max_abs()
    } else {
        f64::INFINITY
    }
}

fn sampled(sc: &StructureConstants, phi: &ThreeForm, s: &Sample, tol: f64, tight: f64, tr: &mut Tracker) -> Result<()> {
    let m = |x: &Octonion, y: &Octonion| sc.mul(x, y);
    let assoc = |x: &Octonion, y: &Octonion, z: &Octonion| sc.associator(x, y, z);
    let (a, b, c, v) = (&s.a, &s.b, &s.c, &s.v);
    let ad = |x: &Octonion| m(&m(v, x), &sc.inverse(v).unwrap());

    tr.record("composition", "algebra", tol, (m(a, b).norm() - a.norm() * b.norm()).abs());

    let abc = assoc(a, b, c);
    let ak = power(sc, a, s.k);
    let akbar = ak.conj();
    tr.record("assoc_conjugate", "algebra", tol, gap(abc, -assoc(&a.conj(), b, c)));
    tr.record("assoc_power_alternative", "algebra", tol, assoc(&ak, a, c).max_abs());
    tr.record("assoc_left_conjugate", "algebra", tol, gap(m(a, &abc), m(&abc, &a.conj())));
    tr.record("assoc_power_middle_left", "algebra", tol, gap(assoc(a, &m(&ak, b), c), m(&akbar, &abc)));
    tr.record("assoc_power_middle_right", "algebra", tol, gap(assoc(a, &m(b, &ak), c), m(&abc, &akbar)));
    let ak1 = power(sc, a, s.k + 1);
    let rec = m(&assoc(&ak, b, c), &a.conj()) + m(&abc, &ak);
    tr.record("assoc_power_recursion", "algebra", tol, gap(assoc(&ak1, b, c), rec));

    let vinv = sc.inverse(v)?;
    let vbar = v.conj();
    let abv = assoc(a, b, &vinv);
    tr.record(
        "conjugated_product",
        "algebra",
        tol,
        gap(m(&m(v, a), &m(b, &vinv)), ad(&m(a, b)) + m(&abv, &(*v + vbar))),
    );
    tr.record("split_product", "algebra", tol, gap(m(&m(a, &vinv), &m(v, b)), m(a, b) + m(&abv, v)));

    let v3 = power(sc, v, 3);
    let v3inv = sc.inverse(&v3)?;
    let adab = m(&ad(a), &ad(b));
    tr.record(
        "adjoint_product",
        "algebra",
        tol,
        gap(adab, ad(&m(a, b)) + m(&abv, &(*v + vbar + v3 / sc.norm2(v)))),
    );
    let back = m(&m(&vinv, &adab), v);
    tr.record("adjoint_product_inverse", "algebra", tol, gap(back, m(a, b) + m(&assoc(a, b, &v3inv), &v3)));
    tr.record("adjoint_product_factored", "algebra", tol, gap(back, m(&m(a, &v3inv), &m(&v3, b))));
    tr.record("adjoint_matrix", "algebra", tol, gap(sc.ad(v, a)?, ad(a)));
    tr.record("adjoint_determinant", "algebra", tol, (sc.ad_matrix(v)?.determinant() - 1.0).abs());

    let (ia, ib) = (Octonion::imag(a.im), Octonion::imag(b.im));
    let cliff = m(&ia, &m(&ib, &s.x)) + m(&ib, &m(&ia, &s.x)) + s.x * (2.0 * sc.inner(&ia.im, &ib.im));
    tr.record("clifford", "algebra", tight, cliff.max_abs());

    tr.record("deformed_product_factored", "algebra", tol, gap(sc.circ_v(a, b, v)?, sc.circ_v_factored(a, b, v)?));
    tr.record(
        "deformed_associator",
        "algebra",
        tol,
        gap(sc.associator_v(a, b, c, v)?, sc.associator_v_closed(a, b, c, v)?),
    );

    let (u, w) = (&s.u, &s.w);
    let sw = sigma(w, phi)?;
    tr.record("sigma_composition", "sigma", tol, sigma(u, &sw)?.max_abs_diff(&sigma(&m(u, w), phi)?));
    let w3 = power(sc, w, 3);
    let pulled = pullback(phi, &sc.ad_matrix(&sc.inverse(w)?)?);
    tr.record("sigma_cube_pullback", "sigma", tol, sigma(&w3, phi)?.max_abs_diff(&pulled));
    let pm = metric_from_phi(&sw);
    let metric_gap = if pm.positive { (pm.metric - Tensor2::identity()).amax() } else { f64::INFINITY };
    tr.record("sigma_metric", "sigma", tol, metric_gap);
    let circ = sc.circ_v(&Octonion::imag(a.im), &Octonion::imag(b.im), w)?;
    tr.record("sigma_product", "sigma", tol, (sw.cross(&a.im, &b.im) - circ.im).amax());
    Ok(())
}

fn structural(sc: &StructureConstants, phi: &ThreeForm, tight: f64, tr: &mut Tracker, r: &mut ChaCha8Rng) -> Result<()> {
    let rep = verify_contraction_identities(sc);
    tr.record("phi_phi_contraction", "structural", tight, rep.phi_phi);
    tr.record("phi_psi_contraction", "structural", tight, rep.phi_psi);
    tr.record("double_cross", "structural", tight, rep.double_cross);
    let basis = DeltaBasis::new();
    tr.record("delta_pair_table", "structural", tight, basis.pair_residual(sc));
    tr.record("delta_triple_table", "structural", tight, basis.triple_table_residual(sc));

    // V = (1/2, (√3/2)v): V³ = −1, and Ad_V is an automorphism
    let dir = rand_unit(r).im.normalize();
    let v = Octonion::new(0.5, dir * (3f64.sqrt() / 2.0));
    let v3 = power(sc, &v, 3);
    tr.record("example_cube", "sigma", tight, gap(v3, Octonion::real(-1.0)));
    tr.record("example_sigma", "sigma", tight, sigma(&v3, phi)?.max_abs_diff(phi));
    let ad = sc.ad_matrix(&v)?;
    let closed = Tensor2::identity() * -0.5 - phi.contract_vec(&dir) * (3f64.sqrt() / 2.0) + dir * dir.transpose() * 1.5;
    tr.record("example_adjoint", "sigma", tight, (ad - closed).amax());
    tr.record("example_adjoint_preserves_phi", "sigma", tight, pullback(phi, &ad).max_abs_diff(phi));
    Ok(())
}

/// Runs every registered identity.
pub fn run_identities(cfg: &VerifyConfig) -> Result<Vec<IdentityResult>> {
    let phi = if cfg.corrupt_phi { corrupted_phi() } else { phi0() };
    let sc = StructureConstants::with_metric(phi, Tensor2::identity())?;
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tr = Tracker { out: Vec::new() };
    structural(&sc, &phi, cfg.tight_tol, &mut tr, &mut r)?;
    for _ in 0..cfg.trials.max(1) {
        let s = Sample::draw(&mut r);
        sampled(&sc, &phi, &s, cfg.tol, cfg.tight_tol, &mut tr)?;
    }
    for res in &mut tr.out {
        res.passed = res.residual.is_finite() && res.residual < res.tol;
    }
    Ok(tr.out)
}
