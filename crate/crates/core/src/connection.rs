//! Torsion of lattice G2-structures and the octonion covariant derivative
//! D_X A = ∂_X A − A T_X with its exterior derivative and codifferential.
//!
//! A [`TorsionField`] carries the per-site 3-form ([`Frame`]) whose torsion it
//! is; all octonion products in D use that structure.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{binom7, indices, rank, subsets, wedge_sign, DIM};
use crate::forms::{decompose_torsion, metric_from_phi, phi0, sigma_with_dual, ThreeForm, TorsionComponents};
use crate::lattice::{ddx_scalar, diff_slots, Grid, OctField, OctForm};
use crate::octonion::mul_with;
use crate::{Octonion, Tensor2, Vec7};

/// Curvature of the base. The torus is flat; every identity below that would
/// pick up a Riemann-tensor term adds this instead.
pub const RIEMANN: f64 = 0.0;

/// Unit-norm tolerance for gauge fields.
pub const UNIT_TOL: f64 = 1e-10;

/// The 3-form defining the octonion product at each site.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    Uniform(ThreeForm),
    PerSite(Vec<ThreeForm>),
}

impl Frame {
    pub fn standard() -> Self {
        Frame::Uniform(phi0())
    }

    pub fn at(&self, site: usize) -> &ThreeForm {
        match self {
            Frame::Uniform(p) => p,
            Frame::PerSite(v) => &v[site],
        }
    }

    #[inline]
    pub fn mul(&self, site: usize, a: &Octonion, b: &Octonion) -> Octonion {
        mul_with(self.at(site), a, b)
    }

    /// σ_V applied site by site.
    pub fn deform(&self, v: &OctField) -> Result<Frame> {
        let forms = (0..v.grid.total_sites())
            .into_par_iter()
            .map(|s| {
                let phi = self.at(s);
                sigma_with_dual(&v.data[s], phi, &phi.dual())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Frame::PerSite(forms))
    }
}

/// Per-site full torsion tensor T_a^b (row a is the form index) together
/// with the structure it belongs to.
#[derive(Clone, Debug)]
pub struct TorsionField {
    pub grid: Grid,
    pub frame: Frame,
    pub t: Vec<Tensor2>,
    pub components: Vec<TorsionComponents>,
}

impl TorsionField {
    pub fn new(grid: &Grid, frame: Frame, t: Vec<Tensor2>) -> Self {
        assert_eq!(t.len(), grid.total_sites());
        let components = t.par_iter().enumerate().map(|(s, ts)| decompose_torsion(ts, frame.at(s))).collect();
        Self { grid: grid.clone(), frame, t, components }
    }

    /// The torsion-free standard structure.
    pub fn zero(grid: &Grid) -> Self {
        Self::new(grid, Frame::standard(), vec![Tensor2::zeros(); grid.total_sites()])
    }

    /// T_i = (0, T_i^·) as an imaginary octonion.
    #[inline]
    pub fn row(&self, site: usize, i: usize) -> Octonion {
        Octonion::imag(self.t[site].row(i).transpose())
    }

    /// T as an imaginary octonion-valued 1-form.
    pub fn as_form(&self) -> OctForm {
        let mut f = OctForm::zeros(&self.grid, 1);
        for s in 0..self.grid.total_sites() {
            for i in 0..DIM {
                f.data[s * DIM + i] = self.row(s, i);
            }
        }
        f
    }

    pub fn max_abs(&self) -> f64 {
        self.t.iter().fold(0.0, |m, t| m.max(t.amax()))
    }

    /// Largest per-site error of reassembling T from its components.
    pub fn reassembly_error(&self) -> f64 {
        (0..self.t.len())
            .map(|s| (self.components[s].reassemble(self.frame.at(s)) - self.t[s]).amax())
            .fold(0.0, f64::max)
    }

    /// L² norms of τ₁, τ₇, τ₁₄, τ₂₇ (full tensor norms per site).
    pub fn component_norms(&self) -> [f64; 4] {
        let mut sq = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for c in &self.components {
            sq[0].push(c.tau1 * c.tau1);
            sq[1].push(c.tau7.norm_squared());
            sq[2].push(c.tau14.norm_squared());
            sq[3].push(c.tau27.norm_squared());
        }
        sq.map(|v| self.grid.integrate(&v).sqrt())
    }

    /// Values per site: the 49 entries of T, row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        self.t.iter().flat_map(|t| t.transpose().as_slice().to_vec()).collect()
    }
}

/// A 3-form at every site.
#[derive(Clone, Debug)]
pub struct PhiField {
    pub grid: Grid,
    pub forms: Vec<ThreeForm>,
}

impl PhiField {
    /// φ(x) = σ_{V(x)}(base).
    pub fn from_gauge(v: &OctField, base: &ThreeForm) -> Result<Self> {
        let psi = base.dual();
        let forms = v.data.par_iter().map(|a| sigma_with_dual(a, base, &psi)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: v.grid.clone(), forms })
    }

    pub fn from_frame(grid: &Grid, frame: &Frame) -> Self {
        let forms = (0..grid.total_sites()).map(|s| *frame.at(s)).collect();
        Self { grid: grid.clone(), forms }
    }

    fn diff(&self, axis: usize) -> Vec<ThreeForm> {
        let g = &self.grid;
        if !g.is_active(axis) {
            return vec![ThreeForm::zero(); self.forms.len()];
        }
        let inv = 1.0 / (2.0 * g.spacing());
        (0..g.total_sites())
            .map(|s| {
                let f = &self.forms[g.neighbour(s, axis, 1)];
                let b = &self.forms[g.neighbour(s, axis, -1)];
                (*f - *b) * inv
            })
            .collect()
    }
}

/// Torsion extracted from ∇φ together with the fit residual.
#[derive(Clone, Debug)]
pub struct FullTorsion {
    pub torsion: TorsionField,
    /// max |∇_a φ_bcd − 2 T_a^e ψ_ebcd| over sites and indices.
    pub residual: f64,
}

/// T_a^m = (1/48) ∇_a φ_bcd ψ^mbcd with ∇ the central difference.
pub fn full_torsion(field: &PhiField) -> Result<FullTorsion> {
    let g = &field.grid;
    for (site, phi) in field.forms.iter().enumerate() {
        let pm = metric_from_phi(phi);
        if !pm.positive || (pm.metric - Tensor2::identity()).amax() > 1e-8 {
            return Err(Error::NonPositiveForm { site });
        }
    }
    let grads: Vec<Vec<ThreeForm>> = (0..DIM).map(|a| field.diff(a)).collect();
    let per_site: Vec<(Tensor2, f64)> = (0..g.total_sites())
        .into_par_iter()
        .map(|s| {
            let psi = field.forms[s].dual();
            let slices: Vec<ThreeForm> = (0..DIM).map(|m| psi.contract_vec(&Vec7::from_fn(|i, _| (i == m) as u8 as f64))).collect();
            let mut t = Tensor2::zeros();
            for a in 0..DIM {
                for m in 0..DIM {
                    t[(a, m)] = grads[a][s].dot(&slices[m]) / 8.0;
                }
            }
            let mut res: f64 = 0.0;
            for a in 0..DIM {
                let mut fit = ThreeForm::zero();
                for e in 0..DIM {
                    fit = fit + slices[e] * (2.0 * t[(a, e)]);
                }
                res = res.max(fit.max_abs_diff(&grads[a][s]));
            }
            (t, res)
        })
        .collect();
    let residual = per_site.iter().map(|p| p.1).fold(0.0, f64::max);
    let t = per_site.into_iter().map(|p| p.0).collect();
    let frame = Frame::PerSite(field.forms.clone());
    Ok(FullTorsion { torsion: TorsionField::new(g, frame, t), residual })
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

/// D_i A = ∂_i A − A T_i for every axis, as an octonion 1-form.
pub fn cov_d(a: &OctField, t: &TorsionField) -> Result<OctForm> {
    ext_d(&OctForm::from_field(a), t)
}

/// Exterior covariant derivative of an octonion p-form:
/// (d_D Q)_B = Σ_k (−1)^k (∂_{b_k} Q_{B∖b_k} − Q_{B∖b_k} T_{b_k}).
pub fn ext_d(q: &OctForm, t: &TorsionField) -> Result<OctForm> {
    same_grid(&q.grid, &t.grid)?;
    let p = q.degree;
    if p >= DIM {
        return Err(Error::Degree(p));
    }
    let g = &q.grid;
    let k_in = binom7(p);
    let k_out = binom7(p + 1);
    let derivs: Vec<Option<Vec<Octonion>>> =
        (0..DIM).map(|a| g.is_active(a).then(|| diff_slots(g, &q.data, k_in, a))).collect();
    let data = (0..g.total_sites())
        .into_par_iter()
        .flat_map_iter(|s| {
            let derivs = &derivs;
            subsets(p + 1).iter().map(move |&mb| {
                let mut acc = Octonion::zero();
                for (k, b) in indices(mb).enumerate() {
                    let rest = mb & !(1 << b);
                    let j = s * k_in + rank(rest);
                    let mut term = -t.frame.mul(s, &q.data[j], &t.row(s, b));
                    if let Some(d) = &derivs[b] {
                        term += d[j];
                    }
                    if k % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                acc
            })
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(data.len(), g.total_sites() * k_out);
    Ok(OctForm { grid: g.clone(), degree: p + 1, data })
}

/// Codifferential (d_D* P)_C = −Σ_b (∂_b P_{bC} − P_{bC} T_b), the exact
/// discrete adjoint of [`ext_d`].
pub fn codiff(pf: &OctForm, t: &TorsionField) -> Result<OctForm> {
    same_grid(&pf.grid, &t.grid)?;
    let p = pf.degree;
    if p == 0 {
        return Err(Error::Degree(0));
    }
    let g = &pf.grid;
    let k_in = binom7(p);
    let derivs: Vec<Option<Vec<Octonion>>> =
        (0..DIM).map(|a| g.is_active(a).then(|| diff_slots(g, &pf.data, k_in, a))).collect();
    let data = (0..g.total_sites())
        .into_par_iter()
        .flat_map_iter(|s| {
            let derivs = &derivs;
            subsets(p - 1).iter().map(move |&mc| {
                let mut acc = Octonion::zero();
                for b in 0..DIM {
                    let bit = 1u8 << b;
                    if mc & bit != 0 {
                        continue;
                    }
                    let sign = wedge_sign(bit, mc);
                    let j = s * k_in + rank(mc | bit);
                    let mut term = -t.frame.mul(s, &pf.data[j], &t.row(s, b));
                    if let Some(d) = &derivs[b] {
                        term += d[j];
                    }
                    acc -= term * sign;
                }
                acc
            })
        })
        .collect::<Vec<_>>();
    Ok(OctForm { grid: g.clone(), degree: p - 1, data })
}

/// D*D A, the non-negative rough Laplacian.
pub fn dstar_d(a: &OctField, t: &TorsionField) -> Result<OctField> {
    codiff(&cov_d(a, t)?, t)?.to_field()
}

/// D²A = D_i D_i A = −D*D A on the flat torus.
pub fn d_squared(a: &OctField, t: &TorsionField) -> Result<OctField> {
    Ok(dstar_d(a, t)?.map(|_, x| -*x))
}

/// ⟨d_D* P, Q⟩ − ⟨P, d_D Q⟩ for a (p+1)-form P and a p-form Q, integrated
/// site by site so the two large pairings never cancel against each other.
pub fn adjoint_defect(p: &OctForm, q: &OctForm, t: &TorsionField) -> Result<f64> {
    if p.degree != q.degree + 1 {
        return Err(Error::Degree(p.degree));
    }
    let dsp = codiff(p, t)?;
    let dq = ext_d(q, t)?;
    let (kq, kp) = (q.slots(), p.slots());
    let f: Vec<f64> = (0..q.grid.total_sites())
        .map(|s| {
            let lhs: f64 = (0..kq).map(|i| dsp.data[s * kq + i].dot(&q.data[s * kq + i])).sum();
            let rhs: f64 = (0..kp).map(|i| p.data[s * kp + i].dot(&dq.data[s * kp + i])).sum();
            lhs - rhs
        })
        .collect();
    Ok(q.grid.integrate(&f))
}

/// ∫|DA|² / ∫|A|², a Rayleigh quotient of D*D.
pub fn rayleigh_quotient(a: &OctField, t: &TorsionField) -> Result<f64> {
    let da = cov_d(a, t)?;
    Ok(da.inner(&da)? / a.inner(a))
}

/// Torsion of σ_V applied to the reference structure, with the gap between
/// the two formulas used to compute it.
#[derive(Clone, Debug)]
pub struct GaugeTorsion {
    pub torsion: TorsionField,
    /// max |Im(−(DV)V⁻¹) − Im(Ad_V T + V ∂V⁻¹)| over sites and axes.
    pub formula_gap: f64,
    /// Re(−(D_aV)V⁻¹) per site, zero in the continuum and O(h²) on the grid.
    pub radial: Vec<Vec7>,
}

/// T^(V) = Im(−(DV)V⁻¹), cross-checked against Im(Ad_V T + V ∂(V⁻¹)).
pub fn torsion_of_gauge(v: &OctField, t: &TorsionField) -> Result<GaugeTorsion> {
    same_grid(&v.grid, &t.grid)?;
    v.check_unit(UNIT_TOL)?;
    let g = &v.grid;
    let dv = cov_d(v, t)?;
    let vinv = v.map(|_, a| a.conj() / a.norm2());
    let dvinv: Vec<Option<OctField>> = (0..DIM).map(|a| g.is_active(a).then(|| crate::lattice::ddx(&vinv, a))).collect();
    let per_site: Vec<(Tensor2, f64, Vec7)> = (0..g.total_sites())
        .into_par_iter()
        .map(|s| {
            let fr = &t.frame;
            let (vs, vi) = (v.data[s], vinv.data[s]);
            let mut out = Tensor2::zeros();
            let mut radial = Vec7::zeros();
            let mut gap: f64 = 0.0;
            for i in 0..DIM {
                let first = -fr.mul(s, &dv.data[s * DIM + i], &vi);
                let ad = fr.mul(s, &vs, &fr.mul(s, &t.row(s, i), &vi));
                let mut second = ad;
                if let Some(d) = &dvinv[i] {
                    second += fr.mul(s, &vs, &d.data[s]);
                }
                gap = gap.max((first.im - second.im).amax());
                out.set_row(i, &first.im.transpose());
                radial[i] = first.re;
            }
            (out, gap, radial)
        })
        .collect();
    let formula_gap = per_site.iter().map(|p| p.1).fold(0.0, f64::max);
    let radial = per_site.iter().map(|p| p.2).collect();
    let frame = t.frame.deform(v)?;
    let torsion = TorsionField::new(g, frame, per_site.into_iter().map(|p| p.0).collect());
    Ok(GaugeTorsion { torsion, formula_gap, radial })
}

/// T^(V) computed from the gauge field and again from ∇(σ_V φ).
#[derive(Clone, Debug)]
pub struct TwoPathTorsion {
    pub gauge: GaugeTorsion,
    pub direct: FullTorsion,
    /// max |T_gauge − T_direct| over sites and entries.
    pub gap: f64,
}

pub fn two_path_torsion(v: &OctField, t: &TorsionField) -> Result<TwoPathTorsion> {
    let gauge = torsion_of_gauge(v, t)?;
    let direct = full_torsion(&PhiField::from_frame(&v.grid, &gauge.torsion.frame))?;
    let gap = gauge.torsion.t.iter().zip(&direct.torsion.t).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    Ok(TwoPathTorsion { gauge, direct, gap })
}

fn diff_tensor(g: &Grid, t: &[Tensor2], axis: usize) -> Vec<Tensor2> {
    if !g.is_active(axis) {
        return vec![Tensor2::zeros(); t.len()];
    }
    let inv = 1.0 / (2.0 * g.spacing());
    (0..g.total_sites())
        .map(|s| (t[g.neighbour(s, axis, 1)] - t[g.neighbour(s, axis, -1)]) * inv)
        .collect()
}

/// Per-site max over (a,b,c) of |∂_a T_bc − ∂_b T_ac + 2 T_am T_bn φ_mnc|.
pub fn bianchi_residual(t: &TorsionField) -> Vec<f64> {
    let g = &t.grid;
    let dt: Vec<Vec<Tensor2>> = (0..DIM).map(|a| diff_tensor(g, &t.t, a)).collect();
    (0..g.total_sites())
        .into_par_iter()
        .map(|s| {
            let phi = t.frame.at(s);
            let ts = &t.t[s];
            let mut worst: f64 = 0.0;
            for a in 0..DIM {
                for b in a + 1..DIM {
                    let ra = ts.row(a).transpose();
                    let rb = ts.row(b).transpose();
                    let quad = phi.cross(&ra, &rb) * 2.0;
                    for c in 0..DIM {
                        let lhs = dt[a][s][(b, c)] - dt[b][s][(a, c)] + quad[c] - RIEMANN;
                        worst = worst.max(lhs.abs());
                    }
                }
            }
            worst
        })
        .collect()
}

/// Per-site 42τ₁² + 30|τ₇|² − |τ₁₄|² − |τ₂₇|² + 6 div τ₇ − R/4 with R = 0.
pub fn scalar_curvature_residual(t: &TorsionField) -> Vec<f64> {
    let g = &t.grid;
    let mut div = vec![0.0; g.total_sites()];
    for a in g.active_axes() {
        let comp: Vec<f64> = t.components.iter().map(|c| c.tau7[*a]).collect();
        for (d, x) in div.iter_mut().zip(ddx_scalar(g, &comp, *a)) {
            *d += x;
        }
    }
    t.components
        .iter()
        .zip(&div)
        .map(|(c, d)| {
            42.0 * c.tau1 * c.tau1 + 30.0 * c.tau7.norm_squared() - c.tau14.norm_squared() - c.tau27.norm_squared()
                + 6.0 * d
                - RIEMANN / 4.0
        })
        .collect()
}

/// Pointwise inner product of two octonion fields.
pub fn pointwise_dot(a: &OctField, b: &OctField) -> Vec<f64> {
    a.data.iter().zip(&b.data).map(|(x, y)| x.dot(y)).collect()
}

/// Per-site sum of squared slot norms, e.g. Σ_i |D_i A|².
pub fn pointwise_norm2(f: &OctForm) -> Vec<f64> {
    (0..f.grid.total_sites()).map(|s| f.site(s).iter().map(|x| x.norm2()).sum()).collect()
}
