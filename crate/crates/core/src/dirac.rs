//! The octonionic Dirac operator D̸A = δ^i ∘ D_i A on the flat torus.

use rayon::prelude::*;

use crate::connection::{codiff, cov_d, pointwise_norm2, TorsionField};
use crate::error::{Error, Result};
use crate::exterior::DIM;
use crate::lattice::{diff_slots, OctField};
use crate::{Octonion, StructureConstants, Vec7};

/// The imaginary units δ_i = (0, e_i) in an orthonormal frame.
#[derive(Clone, Debug)]
pub struct DeltaBasis {
    pub delta: [Octonion; DIM],
}

impl Default for DeltaBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl DeltaBasis {
    pub fn new() -> Self {
        Self { delta: std::array::from_fn(Octonion::unit) }
    }

    /// Largest deviation of δ_i(δ_jδ_k) from
    /// (−φ_ijk, ψ_·ijk − δ_i g_jk + δ_j g_ik − δ_k g_ij) over all 343 triples.
    pub fn triple_table_residual(&self, sc: &StructureConstants) -> f64 {
        let g = &sc.metric;
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let d = &self.delta;
                    let got = sc.mul(&d[i], &sc.mul(&d[j], &d[k]));
                    let im = Vec7::from_fn(|m, _| {
                        sc.psi.get([m, i, j, k]) - (m == i) as u8 as f64 * g[(j, k)] + (m == j) as u8 as f64 * g[(i, k)]
                            - (m == k) as u8 as f64 * g[(i, j)]
                    });
                    let want = Octonion::new(-sc.phi.get([i, j, k]), im);
                    worst = worst.max((got - want).max_abs());
                }
            }
        }
        worst
    }

    /// Largest deviation of δ_iδ_j from (−g_ij, φ_ij·).
    pub fn pair_residual(&self, sc: &StructureConstants) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                let got = sc.mul(&self.delta[i], &self.delta[j]);
                let want = Octonion::new(-sc.metric[(i, j)], Vec7::from_fn(|m, _| sc.phi.get([i, j, m])));
                worst = worst.max((got - want).max_abs());
            }
        }
        worst
    }
}

/// D̸A = Σ_i δ_i ∘ D_iA with ∘ the product of the torsion's structure.
pub fn dirac(a: &OctField, t: &TorsionField) -> Result<OctField> {
    let da = cov_d(a, t)?;
    let basis = DeltaBasis::new();
    let data = (0..a.grid.total_sites())
        .into_par_iter()
        .map(|s| {
            let mut acc = Octonion::zero();
            for (i, d) in basis.delta.iter().enumerate() {
                acc += t.frame.mul(s, d, &da.data[s * DIM + i]);
            }
            acc
        })
        .collect();
    Ok(OctField { grid: a.grid.clone(), data })
}

/// D̸A written out for A = (a₀, α):
///
/// real part −div α + a₀ Tr T − ⟨α, T⌟φ⟩,
/// imaginary part grad a₀ + curl α − a₀ T⌟φ + T(α) + αT − α Tr T − ψ(·, e_i, α, T_i),
///
/// where T(α)_m = T_mk α_k and (αT)_m = α_i T_im.
pub fn dirac_explicit(a: &OctField, t: &TorsionField) -> Result<OctField> {
    if a.grid != t.grid {
        return Err(Error::GridMismatch);
    }
    let g = &a.grid;
    let grads: Vec<Vec<Octonion>> = (0..DIM).map(|i| diff_slots(g, &a.data, 1, i)).collect();
    let data = (0..g.total_sites())
        .into_par_iter()
        .map(|s| {
            let phi = t.frame.at(s);
            let psi = phi.dual();
            let ts = &t.t[s];
            let (a0, alpha) = (a.data[s].re, a.data[s].im);
            let div: f64 = (0..DIM).map(|i| grads[i][s].im[i]).sum();
            let grad = Vec7::from_fn(|i, _| grads[i][s].re);
            let t_phi = phi.contract_tensor(ts);
            let trace = ts.trace();
            let mut im = grad + ts * alpha + ts.transpose() * alpha - alpha * trace - t_phi * a0;
            for m in 0..DIM {
                for i in 0..DIM {
                    for k in 0..DIM {
                        let p = phi.get([m, i, k]);
                        if p != 0.0 {
                            im[m] += p * grads[i][s].im[k];
                        }
                        let mut x = 0.0;
                        for j in 0..DIM {
                            x += psi.get([m, i, j, k]) * alpha[j];
                        }
                        im[m] -= x * ts[(i, k)];
                    }
                }
            }
            Octonion::new(-div + a0 * trace - alpha.dot(&t_phi), im)
        })
        .collect();
    Ok(OctField { grid: g.clone(), data })
}

/// Lattice L² norm of D̸D̸V − d_D*d_D V.
pub fn lichnerowicz_residual(v: &OctField, t: &TorsionField) -> Result<f64> {
    let twice = dirac(&dirac(v, t)?, t)?;
    let rough = codiff(&cov_d(v, t)?, t)?.to_field()?;
    let diff = twice.zip_map(&rough, |_, x, y| *x - *y)?;
    Ok(diff.inner(&diff).sqrt())
}

/// ∫|D̸V|² − ∫|DV|².
pub fn energy_identity_gap(v: &OctField, t: &TorsionField) -> Result<f64> {
    let dv = dirac(v, t)?;
    let cv = cov_d(v, t)?;
    let f: Vec<f64> = dv.data.iter().zip(pointwise_norm2(&cv)).map(|(x, n)| x.norm2() - n).collect();
    Ok(v.grid.integrate(&f))
}

/// τ₁ and τ₇ of T^(V) read off from (D̸V)V⁻¹ = (7τ₁, −6τ₇). The τ₁₄ and τ₂₇
/// parts do not appear in D̸V.
pub fn torsion_17_from_dirac(v: &OctField, t: &TorsionField) -> Result<(Vec<f64>, Vec<Vec7>)> {
    v.check_unit(crate::connection::UNIT_TOL)?;
    let dv = dirac(v, t)?;
    let q: Vec<Octonion> = (0..v.grid.total_sites()).map(|s| t.frame.mul(s, &dv.data[s], &v.data[s].conj())).collect();
    Ok((q.iter().map(|x| x.re / 7.0).collect(), q.iter().map(|x| -x.im / 6.0).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::torsion_of_gauge;
    use crate::lattice::Grid;
    use crate::oracle::{gauge_jet, gauge_reference, rand_field, rand_oct, rand_vec, rng, smooth_field, smooth_unit};

    fn grid(n: usize) -> Grid {
        Grid::new(n, &[1, 4]).unwrap()
    }

    fn max_gap(a: &OctField, b: &OctField) -> f64 {
        a.data.iter().zip(&b.data).fold(0.0, |m, (x, y)| m.max((*x - *y).max_abs()))
    }

    #[test]
    fn delta_tables() {
        let sc = StructureConstants::standard();
        let b = DeltaBasis::new();
        assert!(b.pair_residual(&sc) < 1e-15);
        assert!(b.triple_table_residual(&sc) < 1e-15);
    }

    #[test]
    fn clifford_relation() {
        let sc = StructureConstants::standard();
        let mut r = rng(40);
        for _ in 0..300 {
            let (a, b) = (Octonion::imag(rand_vec(&mut r)), Octonion::imag(rand_vec(&mut r)));
            let x = rand_oct(&mut r);
            let lhs = sc.mul(&a, &sc.mul(&b, &x)) + sc.mul(&b, &sc.mul(&a, &x));
            assert!((lhs + x * (2.0 * a.dot(&b))).max_abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_form_matches() {
        let g = grid(8);
        let t = gauge_reference(&g, 0.6, 41);
        let a = rand_field(&g, 42);
        assert!(max_gap(&dirac(&a, &t).unwrap(), &dirac_explicit(&a, &t).unwrap()) < 1e-10);
        let z = TorsionField::zero(&g);
        assert!(max_gap(&dirac(&a, &z).unwrap(), &dirac_explicit(&a, &z).unwrap()) < 1e-12);
        let c = OctField::constant(&g, rand_oct(&mut rng(43)));
        assert_eq!(dirac(&c, &z).unwrap().max_abs(), 0.0);
        assert_eq!(dirac_explicit(&c, &z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dirac_of_one() {
        let g = grid(8);
        let t = gauge_reference(&g, 0.6, 44);
        let d1 = dirac(&OctField::constant(&g, Octonion::one()), &t).unwrap();
        for s in 0..g.total_sites() {
            let want = Octonion::new(t.t[s].trace(), -t.frame.at(s).contract_tensor(&t.t[s]));
            assert!((d1.data[s] - want).max_abs() < 1e-12);
            let c = &t.components[s];
            assert!((d1.data[s] - Octonion::new(7.0 * c.tau1, -6.0 * c.tau7)).max_abs() < 1e-12);
        }
        let (t1, t7) = torsion_17_from_dirac(&OctField::constant(&g, Octonion::one()), &t).unwrap();
        for s in 0..g.total_sites() {
            assert!((t1[s] - t.components[s].tau1).abs() < 1e-12);
            assert!((t7[s] - t.components[s].tau7).amax() < 1e-12);
        }
    }

    #[test]
    fn pointwise_dirac_covariance() {
        let sc = StructureConstants::standard();
        let b = DeltaBasis::new();
        let mut r = rng(45);
        for _ in 0..100 {
            let (v, pairs) = gauge_jet(&sc, &mut r);
            let mut lhs = Octonion::zero();
            let mut rhs = Octonion::zero();
            for (i, (tilde, plain)) in pairs.iter().enumerate() {
                lhs += sc.circ_v(&b.delta[i], tilde, &v).unwrap();
                // (δ_i D_iA)V⁻¹ from (D_iA)V⁻¹
                let da = sc.mul(plain, &v);
                rhs += sc.mul(&sc.mul(&b.delta[i], &da), &v.conj());
            }
            assert!((lhs - rhs).max_abs() < 1e-10);
        }
    }

    fn torsion17_gap(n: usize) -> f64 {
        let g = grid(n);
        let t = gauge_reference(&g, 0.4, 46);
        let v = smooth_unit(&g, 0.6, 47);
        let tt = torsion_of_gauge(&v, &t).unwrap().torsion;
        let (t1, t7) = torsion_17_from_dirac(&v, &t).unwrap();
        (0..g.total_sites())
            .map(|s| (t1[s] - tt.components[s].tau1).abs().max((t7[s] - tt.components[s].tau7).amax()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn dirac_reads_gauge_torsion() {
        let ratio = torsion17_gap(32) / torsion17_gap(64);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        let g = grid(8);
        let (t1, t7) = torsion_17_from_dirac(&OctField::constant(&g, Octonion::one()), &TorsionField::zero(&g)).unwrap();
        assert!(t1.iter().all(|x| *x == 0.0) && t7.iter().all(|x| x.amax() == 0.0));
    }

    fn weitzenbock(n: usize) -> (f64, f64) {
        let g = grid(n);
        let t = gauge_reference(&g, 0.5, 48);
        let a = smooth_field(&g, 49);
        (lichnerowicz_residual(&a, &t).unwrap(), energy_identity_gap(&a, &t).unwrap())
    }

    #[test]
    fn weitzenbock_identities_are_second_order() {
        let (l1, e1) = weitzenbock(32);
        let (l2, e2) = weitzenbock(64);
        assert!((3.5..4.5).contains(&(l1 / l2)), "{}", l1 / l2);
        assert!((3.5..4.5).contains(&(e1 / e2)), "{}", e1 / e2);
        let g = grid(8);
        let c = OctField::constant(&g, rand_oct(&mut rng(51)));
        assert_eq!(lichnerowicz_residual(&c, &TorsionField::zero(&g)).unwrap(), 0.0);
    }

    #[test]
    fn energy_identity_is_exact_for_unit_fields() {
        for n in [16, 32] {
            let g = grid(n);
            let t = gauge_reference(&g, 0.5, 52);
            let v = smooth_unit(&g, 0.5, 53);
            let scale = cov_d(&v, &t).unwrap().inner(&cov_d(&v, &t).unwrap()).unwrap();
            assert!(energy_identity_gap(&v, &t).unwrap().abs() < 1e-13 * scale);
        }
    }
}
