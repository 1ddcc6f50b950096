//! 3-forms and 4-forms on R^7: the standard G2 form, Hodge duality, the
//! metric of a 3-form, the sigma deformation and type decompositions.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{self, complement, rank, sort_sign, subsets, wedge, wedge_sign, DIM};
use crate::octonion::{Octonion, StructureConstants};
use crate::{Tensor2, Vec7};

pub type Dense3 = [[[f64; DIM]; DIM]; DIM];

macro_rules! form_type {
    ($name:ident, $deg:expr) => {
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name {
            pub comp: [f64; 35],
        }

        impl $name {
            pub const DEGREE: usize = $deg;

            pub fn zero() -> Self {
                Self { comp: [0.0; 35] }
            }

            /// Component with arbitrary (0-based) index order.
            pub fn get(&self, idx: [usize; $deg]) -> f64 {
                let (s, m) = sort_sign(&idx);
                if s == 0.0 {
                    0.0
                } else {
                    s * self.comp[rank(m)]
                }
            }

            /// Sets the component so that `get(idx) == value`.
            pub fn set(&mut self, idx: [usize; $deg], value: f64) {
                let (s, m) = sort_sign(&idx);
                assert!(s != 0.0, "repeated index in {:?}", idx);
                self.comp[rank(m)] = s * value;
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.comp.iter().zip(&other.comp).map(|(a, b)| a * b).sum()
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.comp
                    .iter()
                    .zip(&other.comp)
                    .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
            }

            /// Nonzero components as 1-based `(indices, value)` pairs.
            pub fn to_triples(&self) -> Vec<(Vec<usize>, f64)> {
                subsets($deg)
                    .iter()
                    .zip(&self.comp)
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(&m, &v)| (exterior::indices(m).map(|i| i + 1).collect(), v))
                    .collect()
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(mut self, rhs: Self) -> Self {
                for (a, b) in self.comp.iter_mut().zip(&rhs.comp) {
                    *a += b;
                }
                self
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(mut self, rhs: Self) -> Self {
                for (a, b) in self.comp.iter_mut().zip(&rhs.comp) {
                    *a -= b;
                }
                self
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                self * -1.0
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(mut self, rhs: f64) -> Self {
                for a in self.comp.iter_mut() {
                    *a *= rhs;
                }
                self
            }
        }
    };
}

form_type!(ThreeForm, 3);
form_type!(FourForm, 4);

/// The standard G2 3-form
/// e123 + e145 + e167 + e246 - e257 - e347 - e356 (1-based labels).
pub fn phi0() -> ThreeForm {
    let mut phi = ThreeForm::zero();
    for (a, b, c, v) in [
        (1, 2, 3, 1.0),
        (1, 4, 5, 1.0),
        (1, 6, 7, 1.0),
        (2, 4, 6, 1.0),
        (2, 5, 7, -1.0),
        (3, 4, 7, -1.0),
        (3, 5, 6, -1.0),
    ] {
        phi.set([a - 1, b - 1, c - 1], v);
    }
    phi
}

impl ThreeForm {
    /// Builds a form from 1-based `(a, b, c, value)` entries; later entries add on.
    pub fn from_triples(triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut phi = ThreeForm::zero();
        for &(a, b, c, v) in triples {
            if !(1..=7).contains(&a) || !(1..=7).contains(&b) || !(1..=7).contains(&c) {
                return Err(Error::InvalidSpec(format!("index out of range in ({a},{b},{c})")));
            }
            let (s, m) = sort_sign(&[a - 1, b - 1, c - 1]);
            if s == 0.0 {
                return Err(Error::InvalidSpec(format!("repeated index in ({a},{b},{c})")));
            }
            phi.comp[rank(m)] += s * v;
        }
        Ok(phi)
    }

    pub fn to_dense(&self) -> Dense3 {
        let mut d = [[[0.0; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    d[a][b][c] = self.get([a, b, c]);
                }
            }
        }
        d
    }

    /// Euclidean cross product (a × b)^i = φ_ijk a^j b^k.
    pub fn cross(&self, a: &Vec7, b: &Vec7) -> Vec7 {
        let mut out = Vec7::zeros();
        for (&m, &v) in subsets(3).iter().zip(&self.comp) {
            if v == 0.0 {
                continue;
            }
            let mut it = exterior::indices(m);
            let (i, j, k) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            out[i] += v * (a[j] * b[k] - a[k] * b[j]);
            out[j] += v * (a[k] * b[i] - a[i] * b[k]);
            out[k] += v * (a[i] * b[j] - a[j] * b[i]);
        }
        out
    }

    /// Hodge dual for the Euclidean metric and orientation e^1..e^7.
    pub fn dual(&self) -> FourForm {
        let mut psi = FourForm::zero();
        for (j, &mj) in subsets(4).iter().enumerate() {
            let mc = complement(mj);
            psi.comp[j] = wedge_sign(mj, mc) * self.comp[rank(mc)];
        }
        psi
    }

    /// Contraction v ⌟ φ as an antisymmetric matrix, (v⌟φ)_ab = v^c φ_cab.
    pub fn contract_vec(&self, v: &Vec7) -> Tensor2 {
        let mut k = Tensor2::zeros();
        for (&m, &val) in subsets(3).iter().zip(&self.comp) {
            if val == 0.0 {
                continue;
            }
            let mut it = exterior::indices(m);
            let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            // the three cyclic placements of the contracted slot
            k[(b, c)] += v[a] * val;
            k[(c, b)] -= v[a] * val;
            k[(c, a)] += v[b] * val;
            k[(a, c)] -= v[b] * val;
            k[(a, b)] += v[c] * val;
            k[(b, a)] -= v[c] * val;
        }
        k
    }

    /// Contraction (T⌟φ)_c = T_ab φ_abc of a 2-tensor.
    pub fn contract_tensor(&self, t: &Tensor2) -> Vec7 {
        let mut out = Vec7::zeros();
        for (&m, &val) in subsets(3).iter().zip(&self.comp) {
            if val == 0.0 {
                continue;
            }
            let mut it = exterior::indices(m);
            let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            out[c] += val * (t[(a, b)] - t[(b, a)]);
            out[a] += val * (t[(b, c)] - t[(c, b)]);
            out[b] += val * (t[(c, a)] - t[(a, c)]);
        }
        out
    }
}

impl FourForm {
    /// Contraction (v⌟ψ)_bcd = v^a ψ_abcd.
    pub fn contract_vec(&self, v: &Vec7) -> ThreeForm {
        let out = exterior::interior(v.as_slice(), 4, &self.comp);
        let mut t = ThreeForm::zero();
        t.comp.copy_from_slice(&out);
        t
    }

    /// Hodge dual for the Euclidean metric and orientation e^1..e^7.
    pub fn dual(&self) -> ThreeForm {
        let mut phi = ThreeForm::zero();
        for (i, &mi) in subsets(3).iter().enumerate() {
            let mc = complement(mi);
            phi.comp[i] = wedge_sign(mi, mc) * self.comp[rank(mc)];
        }
        phi
    }
}

fn inverse_and_root_det(g: &Tensor2) -> Result<(Tensor2, f64)> {
    let chol = Cholesky::new(*g).ok_or(Error::NotPositiveDefinite)?;
    let det = chol.determinant();
    Ok((chol.inverse(), det.sqrt()))
}

fn raise_all<const K: usize>(comp: &[f64; 35], ginv: &Tensor2) -> [f64; 35] {
    // full contravariant components on sorted index sets
    let mut out = [0.0; 35];
    for (o, &mo) in subsets(K).iter().enumerate() {
        let upper: Vec<usize> = exterior::indices(mo).collect();
        let mut acc = 0.0;
        for (i, &mi) in subsets(K).iter().enumerate() {
            if comp[i] == 0.0 {
                continue;
            }
            let lower: Vec<usize> = exterior::indices(mi).collect();
            // sum over orderings of the lower set is a determinant of ginv entries
            let mut m = nalgebra::DMatrix::<f64>::zeros(K, K);
            for (r, &u) in upper.iter().enumerate() {
                for (c, &l) in lower.iter().enumerate() {
                    m[(r, c)] = ginv[(u, l)];
                }
            }
            acc += comp[i] * m.determinant();
        }
        out[o] = acc;
    }
    out
}

/// Hodge star of a 3-form under a positive-definite metric:
/// ψ_abcd = (1/3!) √det g ε_abcd^efg φ_efg.
pub fn hodge_star3(phi: &ThreeForm, g: &Tensor2) -> Result<FourForm> {
    let (ginv, root) = inverse_and_root_det(g)?;
    let up = ThreeForm { comp: raise_all::<3>(&phi.comp, &ginv) };
    Ok(up.dual() * root)
}

/// Hodge star of a 4-form under a positive-definite metric.
pub fn hodge_star4(psi: &FourForm, g: &Tensor2) -> Result<ThreeForm> {
    let (ginv, root) = inverse_and_root_det(g)?;
    let up = FourForm { comp: raise_all::<4>(&psi.comp, &ginv) };
    Ok(up.dual() * root)
}

/// Metric data extracted from a 3-form.
#[derive(Clone, Debug)]
pub struct PhiMetric {
    /// Normalized metric when `positive`, otherwise the raw bilinear form B.
    pub metric: Tensor2,
    /// Volume factor √det g relative to e^1..e^7 (zero when not positive).
    pub volume: f64,
    pub positive: bool,
}

/// The symmetric form B(u,v) = (1/6)(u⌟φ)∧(v⌟φ)∧φ as a coefficient of e^1..e^7.
pub fn bilinear_b(phi: &ThreeForm) -> Tensor2 {
    let basis: Vec<Vec<f64>> = (0..DIM)
        .map(|i| {
            let mut e = [0.0; DIM];
            e[i] = 1.0;
            exterior::interior(&e, 3, &phi.comp)
        })
        .collect();
    let mut b = Tensor2::zeros();
    for i in 0..DIM {
        for j in i..DIM {
            let w = wedge(2, &basis[i], 2, &basis[j]);
            let top = wedge(4, &w, 3, &phi.comp);
            b[(i, j)] = top[0] / 6.0;
            b[(j, i)] = b[(i, j)];
        }
    }
    b
}

/// Metric of a 3-form with the normalization g = B / det(B)^(1/9), so that
/// the standard form yields the identity.
pub fn metric_from_phi(phi: &ThreeForm) -> PhiMetric {
    let b = bilinear_b(phi);
    match Cholesky::new(b) {
        Some(chol) => {
            let det = chol.determinant();
            let scale = det.powf(1.0 / 9.0);
            PhiMetric { metric: b / scale, volume: scale, positive: true }
        }
        None => PhiMetric { metric: b, volume: 0.0, positive: false },
    }
}

/// 1-form ∧ 2-form with the 2-form given as an antisymmetric matrix.
fn wedge_vec_matrix(v: &Vec7, w: &Tensor2) -> ThreeForm {
    let mut out = ThreeForm::zero();
    for (o, &m) in subsets(3).iter().enumerate() {
        let mut it = exterior::indices(m);
        let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        out.comp[o] = v[a] * w[(b, c)] - v[b] * w[(a, c)] + v[c] * w[(a, b)];
    }
    out
}

/// σ_A(φ) = |A|^-2 ((a² − |α|²)φ − 2a α⌟ψ + 2α∧(α⌟φ)) with ψ the Euclidean dual.
pub fn sigma(a: &Octonion, phi: &ThreeForm) -> Result<ThreeForm> {
    sigma_with_dual(a, phi, &phi.dual())
}

/// [`sigma`] with a precomputed dual 4-form.
pub fn sigma_with_dual(a: &Octonion, phi: &ThreeForm, psi: &FourForm) -> Result<ThreeForm> {
    let n2 = a.norm2();
    if n2 == 0.0 {
        return Err(Error::ZeroOctonion);
    }
    let alpha = &a.im;
    let lin = *phi * (a.re * a.re - alpha.norm_squared());
    let mixed = psi.contract_vec(alpha) * (-2.0 * a.re);
    let quad = wedge_vec_matrix(alpha, &phi.contract_vec(alpha)) * 2.0;
    Ok((lin + mixed + quad) * (1.0 / n2))
}

/// (M*φ)_ijk = φ_xyz M_xi M_yj M_zk.
pub fn pullback(phi: &ThreeForm, m: &Tensor2) -> ThreeForm {
    let d = phi.to_dense();
    let mut out = ThreeForm::zero();
    for (o, &mask) in subsets(3).iter().enumerate() {
        let i: Vec<usize> = exterior::indices(mask).collect();
        let mut acc = 0.0;
        for x in 0..DIM {
            for y in 0..DIM {
                for z in 0..DIM {
                    if d[x][y][z] != 0.0 {
                        acc += d[x][y][z] * m[(x, i[0])] * m[(y, i[1])] * m[(z, i[2])];
                    }
                }
            }
        }
        out.comp[o] = acc;
    }
    out
}

/// Splits an antisymmetric ω into v⌟φ + ω₁₄ with ω₁₄⌟φ = 0.
pub fn project_2form(omega: &Tensor2, phi: &ThreeForm) -> (Vec7, Tensor2) {
    let v = phi.contract_tensor(omega) / 6.0;
    let rest = omega - phi.contract_vec(&v);
    (v, rest)
}

/// The map h ↦ h_[a^d φ_bc]d taking symmetric 2-tensors to 3-forms.
pub fn i_phi(h: &Tensor2, phi: &ThreeForm) -> ThreeForm {
    let d = phi.to_dense();
    let mut out = ThreeForm::zero();
    for (o, &m) in subsets(3).iter().enumerate() {
        let mut it = exterior::indices(m);
        let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        let mut acc = 0.0;
        for e in 0..DIM {
            acc += h[(a, e)] * d[b][c][e] + h[(b, e)] * d[c][a][e] + h[(c, e)] * d[a][b][e];
        }
        out.comp[o] = acc / 3.0;
    }
    out
}

/// Type decomposition χ = π₁φ + π₇⌟ψ + i_φ(π₂₇).
#[derive(Clone, Debug)]
pub struct ThreeFormParts {
    pub pi1: f64,
    pub pi7: Vec7,
    pub pi27: Tensor2,
}

pub fn project_3form(chi: &ThreeForm, sc: &StructureConstants) -> ThreeFormParts {
    let phi = &sc.phi;
    let psi = &sc.psi;
    let pi1 = chi.dot(phi) / phi.dot(phi);
    let mut pi7 = Vec7::zeros();
    for (d, p) in pi7.iter_mut().enumerate() {
        let mut e = Vec7::zeros();
        e[d] = 1.0;
        *p = psi.contract_vec(&e).dot(chi) / 4.0;
    }
    let rest = *chi - *phi * pi1 - psi.contract_vec(&pi7);
    let dp = phi.to_dense();
    let dr = rest.to_dense();
    let mut h = Tensor2::zeros();
    for a in 0..DIM {
        for b in 0..DIM {
            let mut acc = 0.0;
            for m in 0..DIM {
                for n in 0..DIM {
                    acc += dp[a][m][n] * dr[b][m][n];
                }
            }
            h[(a, b)] = 0.75 * acc;
        }
    }
    let h = (h + h.transpose()) * 0.5;
    let tr = h.trace() / 7.0;
    let pi27 = h - Tensor2::identity() * tr;
    ThreeFormParts { pi1, pi7, pi27 }
}

impl ThreeFormParts {
    pub fn reassemble(&self, sc: &StructureConstants) -> ThreeForm {
        sc.phi * self.pi1 + sc.psi.contract_vec(&self.pi7) + i_phi(&self.pi27, &sc.phi)
    }
}

/// Torsion split T = τ₁ g + τ₇⌟φ + τ₁₄ + τ₂₇.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionComponents {
    pub tau1: f64,
    pub tau7: Vec7,
    pub tau14: Tensor2,
    pub tau27: Tensor2,
}

impl TorsionComponents {
    pub fn zero() -> Self {
        Self { tau1: 0.0, tau7: Vec7::zeros(), tau14: Tensor2::zeros(), tau27: Tensor2::zeros() }
    }

    pub fn reassemble(&self, phi: &ThreeForm) -> Tensor2 {
        Tensor2::identity() * self.tau1 + phi.contract_vec(&self.tau7) + self.tau14 + self.tau27
    }
}

pub fn decompose_torsion(t: &Tensor2, phi: &ThreeForm) -> TorsionComponents {
    let tau1 = t.trace() / 7.0;
    let tau7 = phi.contract_tensor(t) / 6.0;
    let skew = (t - t.transpose()) * 0.5;
    let sym = (t + t.transpose()) * 0.5;
    TorsionComponents {
        tau1,
        tau7,
        tau14: skew - phi.contract_vec(&tau7),
        tau27: sym - Tensor2::identity() * tau1,
    }
}

/// Worst residuals of the basic φ/ψ contraction identities.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub phi_phi: f64,
    pub phi_psi: f64,
    pub double_cross: f64,
}

impl ContractionReport {
    pub fn max(&self) -> f64 {
        self.phi_phi.max(self.phi_psi).max(self.double_cross)
    }
}

/// Residuals of
/// φ_abc φ_mnc = g_am g_bn − g_an g_bm + ψ_abmn,
/// φ_abc ψ_mnpc = −3(g_a[m φ_np]b − g_b[m φ_np]a),
/// α×(β×γ) = ⟨α,γ⟩β − ⟨α,β⟩γ + ψ(·,α,β,γ),
/// for the Euclidean metric.
pub fn verify_contraction_identities(sc: &StructureConstants) -> ContractionReport {
    let p = sc.phi.to_dense();
    let q = |a, b, c, d| sc.psi.get([a, b, c, d]);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

    let mut phi_phi: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for m in 0..DIM {
                for n in 0..DIM {
                    let lhs: f64 = (0..DIM).map(|c| p[a][b][c] * p[m][n][c]).sum();
                    let rhs = delta(a, m) * delta(b, n) - delta(a, n) * delta(b, m) + q(a, b, m, n);
                    phi_phi = phi_phi.max((lhs - rhs).abs());
                }
            }
        }
    }

    let mut phi_psi: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for m in 0..DIM {
                for n in 0..DIM {
                    for r in 0..DIM {
                        let lhs: f64 = (0..DIM).map(|c| p[a][b][c] * q(m, n, r, c)).sum();
                        // g_x[m φ_np]y, already antisymmetric in the last pair
                        let skew = |x: usize, y: usize| {
                            (delta(x, m) * p[n][r][y] + delta(x, n) * p[r][m][y] + delta(x, r) * p[m][n][y])
                                / 3.0
                        };
                        let (skew_a, skew_b) = (skew(a, b), skew(b, a));
                        let rhs = -3.0 * (skew_a - skew_b);
                        phi_psi = phi_psi.max((lhs - rhs).abs());
                    }
                }
            }
        }
    }

    let mut double_cross: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut next = || rng.gen_range(-1.0..=1.0);
    for _ in 0..50 {
        let al = Vec7::from_fn(|_, _| next());
        let be = Vec7::from_fn(|_, _| next());
        let ga = Vec7::from_fn(|_, _| next());
        let lhs = sc.phi.cross(&al, &sc.phi.cross(&be, &ga));
        let mut rhs = be * al.dot(&ga) - ga * al.dot(&be);
        for (i, r) in rhs.iter_mut().enumerate() {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        *r += q(i, j, k, l) * al[j] * be[k] * ga[l];
                    }
                }
            }
        }
        double_cross = double_cross.max((lhs - rhs).amax());
    }

    ContractionReport { phi_phi, phi_psi, double_cross }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense4, dual_brute, rand_oct, rand_unit, rand_vec, rng};

    fn sc() -> StructureConstants {
        StructureConstants::standard()
    }

    #[test]
    fn phi0_components() {
        let p = phi0();
        assert_eq!(p.get([0, 1, 2]), 1.0);
        assert_eq!(p.get([1, 4, 6]), -1.0);
        assert_eq!(p.get([0, 1, 3]), 0.0);
        assert_eq!(p.get([2, 1, 0]), -1.0);
        assert_eq!(p.comp.iter().filter(|v| **v != 0.0).count(), 7);
    }

    #[test]
    fn triples_roundtrip() {
        let p = phi0();
        let t: Vec<(usize, usize, usize, f64)> = p
            .to_triples()
            .into_iter()
            .map(|(i, v)| (i[0], i[1], i[2], v))
            .collect();
        assert_eq!(ThreeForm::from_triples(&t).unwrap(), p);
        assert!(ThreeForm::from_triples(&[(1, 1, 2, 1.0)]).is_err());
        assert!(ThreeForm::from_triples(&[(0, 1, 2, 1.0)]).is_err());
    }

    #[test]
    fn hodge_matches_levi_civita_sum() {
        let p = phi0();
        let psi = hodge_star3(&p, &Tensor2::identity()).unwrap();
        let brute = dual_brute(&p);
        for a in 0..7 {
            for b in 0..7 {
                for c in 0..7 {
                    for d in 0..7 {
                        assert!((psi.get([a, b, c, d]) - dense4(&brute, a, b, c, d)).abs() < 1e-14);
                    }
                }
            }
        }
        assert_eq!(psi.get([3, 4, 5, 6]), 1.0);
    }

    #[test]
    fn hodge_of_random_form_matches_brute() {
        let mut r = rng(11);
        let mut chi = ThreeForm::zero();
        for c in chi.comp.iter_mut() {
            *c = rand_vec(&mut r)[0];
        }
        let psi = chi.dual();
        let brute = dual_brute(&chi);
        for (j, &m) in subsets(4).iter().enumerate() {
            let i: Vec<usize> = exterior::indices(m).collect();
            assert!((psi.comp[j] - dense4(&brute, i[0], i[1], i[2], i[3])).abs() < 1e-14);
        }
    }

    #[test]
    fn double_star_and_linearity() {
        let g = Tensor2::identity();
        let p = phi0();
        let psi = hodge_star3(&p, &g).unwrap();
        assert_eq!(hodge_star4(&psi, &g).unwrap(), p);
        let psi2 = hodge_star3(&(p * 2.0), &g).unwrap();
        assert!(psi2.max_abs_diff(&(psi * 2.0)) < 1e-15);
    }

    #[test]
    fn hodge_scales_with_conformal_metric() {
        // g = λ² I gives √det g = λ⁷ and three raised indices λ⁻⁶
        let lam: f64 = 1.7;
        let g = Tensor2::identity() * (lam * lam);
        let psi = hodge_star3(&phi0(), &g).unwrap();
        assert!(psi.max_abs_diff(&(phi0().dual() * lam)) < 1e-12);
        let back = hodge_star4(&psi, &g).unwrap();
        assert!(back.max_abs_diff(&phi0()) < 1e-12);
    }

    #[test]
    fn hodge_rejects_indefinite_metric() {
        let mut g = Tensor2::identity();
        g[(2, 2)] = -1.0;
        assert!(matches!(hodge_star3(&phi0(), &g), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn metric_of_standard_form() {
        let pm = metric_from_phi(&phi0());
        assert!(pm.positive);
        assert!((pm.metric - Tensor2::identity()).amax() < 1e-14);
        assert!((pm.volume - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negated_form_is_not_positive() {
        let b = bilinear_b(&phi0());
        let bneg = bilinear_b(&-phi0());
        assert!((b + bneg).amax() < 1e-15);
        assert!(!metric_from_phi(&-phi0()).positive);
    }

    #[test]
    fn scaled_form_scales_metric() {
        // B is cubic in φ: B(8φ₀) = 512 I, det^(1/9) = 128, so g = 4 I
        let pm = metric_from_phi(&(phi0() * 8.0));
        assert!(pm.positive);
        assert!((pm.metric - Tensor2::identity() * 4.0).amax() < 1e-12);
    }

    #[test]
    fn sigma_fixed_points() {
        let p = phi0();
        assert!(sigma(&Octonion::one(), &p).unwrap().max_abs_diff(&p) < 1e-15);
        assert!(sigma(&Octonion::real(-1.0), &p).unwrap().max_abs_diff(&p) < 1e-15);
        let v = Octonion::new(0.5, Vec7::from_fn(|i, _| if i == 0 { 3f64.sqrt() / 2.0 } else { 0.0 }));
        let v3 = v.pow_int(3).unwrap();
        assert!(sigma(&v3, &p).unwrap().max_abs_diff(&p) < 1e-12);
        assert!(sigma(&Octonion::zero(), &p).is_err());
    }

    #[test]
    fn sigma_is_scale_invariant_and_isometric() {
        let mut r = rng(3);
        for _ in 0..20 {
            let a = rand_oct(&mut r);
            let s1 = sigma(&a, &phi0()).unwrap();
            let s2 = sigma(&(a * -2.5), &phi0()).unwrap();
            assert!(s1.max_abs_diff(&s2) < 1e-13);
            let pm = metric_from_phi(&s1);
            assert!(pm.positive);
            assert!((pm.metric - Tensor2::identity()).amax() < 1e-12);
        }
    }

    #[test]
    fn sigma_composes() {
        let sc = sc();
        let mut r = rng(4);
        for _ in 0..50 {
            let u = rand_unit(&mut r);
            let v = rand_unit(&mut r);
            let lhs = sigma(&u, &sigma(&v, &phi0()).unwrap()).unwrap();
            let rhs = sigma(&sc.mul(&u, &v), &phi0()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            let back = sigma(&v.inverse().unwrap(), &sigma(&v, &phi0()).unwrap()).unwrap();
            assert!(back.max_abs_diff(&phi0()) < 1e-12);
        }
    }

    #[test]
    fn sigma_cube_is_adjoint_pullback() {
        let sc = sc();
        let mut r = rng(5);
        for _ in 0..50 {
            let v = rand_unit(&mut r);
            let lhs = sigma(&v.pow_int(3).unwrap(), &phi0()).unwrap();
            let m = sc.ad_matrix(&v.inverse().unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&pullback(&phi0(), &m)) < 1e-12);
        }
    }

    #[test]
    fn sigma_product_is_deformed_product() {
        let sc = sc();
        let mut r = rng(6);
        for _ in 0..50 {
            let v = rand_unit(&mut r);
            let s = sigma(&v, &phi0()).unwrap();
            let a = rand_vec(&mut r);
            let b = rand_vec(&mut r);
            let circ = sc.circ_v(&Octonion::imag(a), &Octonion::imag(b), &v).unwrap();
            assert!((s.cross(&a, &b) - circ.im).amax() < 1e-12);
            assert!((circ.re + a.dot(&b)).abs() < 1e-12);
            // v ⌟ σ_V(φ) = v ⌟ φ
            assert!((s.contract_vec(&v.im) - phi0().contract_vec(&v.im)).amax() < 1e-12);
        }
    }

    #[test]
    fn two_form_split() {
        let p = phi0();
        let v = Vec7::from_fn(|i, _| i as f64 - 3.0);
        let (pi7, pi14) = project_2form(&p.contract_vec(&v), &p);
        assert!((pi7 - v).amax() < 1e-14);
        assert!(pi14.amax() < 1e-14);

        let mut r = rng(8);
        let m = Tensor2::from_fn(|_, _| rand_vec(&mut r)[0]);
        let omega = m - m.transpose();
        let (pi7, pi14) = project_2form(&omega, &p);
        assert!((p.contract_vec(&pi7) + pi14 - omega).amax() < 1e-12);
        assert!(p.contract_tensor(&pi14).amax() < 1e-12);
        assert!(p.contract_vec(&pi7).component_mul(&pi14).sum().abs() < 1e-12);
        let (again, _) = project_2form(&pi14, &p);
        assert!(again.amax() < 1e-12);
    }

    #[test]
    fn three_form_split() {
        let sc = sc();
        let parts = project_3form(&sc.phi, &sc);
        assert!((parts.pi1 - 1.0).abs() < 1e-14);
        assert!(parts.pi7.amax() < 1e-14 && parts.pi27.amax() < 1e-14);

        let v = Vec7::from_fn(|i, _| 0.5 - i as f64 * 0.1);
        let parts = project_3form(&sc.psi.contract_vec(&v), &sc);
        assert!(parts.pi1.abs() < 1e-14);
        assert!((parts.pi7 - v).amax() < 1e-14);
        assert!(parts.pi27.amax() < 1e-14);

        let mut r = rng(9);
        let mut chi = ThreeForm::zero();
        for c in chi.comp.iter_mut() {
            *c = rand_vec(&mut r)[0];
        }
        let parts = project_3form(&chi, &sc);
        assert!(parts.reassemble(&sc).max_abs_diff(&chi) < 1e-12);
        assert!(parts.pi27.trace().abs() < 1e-12);
        assert!((parts.pi27 - parts.pi27.transpose()).amax() < 1e-14);
        let p1 = sc.phi * parts.pi1;
        let p7 = sc.psi.contract_vec(&parts.pi7);
        let p27 = i_phi(&parts.pi27, &sc.phi);
        assert!(p1.dot(&p7).abs() < 1e-12 && p1.dot(&p27).abs() < 1e-12 && p7.dot(&p27).abs() < 1e-12);
    }

    #[test]
    fn i_phi_roundtrip() {
        let sc = sc();
        let mut r = rng(10);
        let m = Tensor2::from_fn(|_, _| rand_vec(&mut r)[0]);
        let h = m + m.transpose();
        let h = h - Tensor2::identity() * (h.trace() / 7.0);
        let parts = project_3form(&i_phi(&h, &sc.phi), &sc);
        assert!((parts.pi27 - h).amax() < 1e-12);
        assert!(parts.pi1.abs() < 1e-12 && parts.pi7.amax() < 1e-12);
    }

    #[test]
    fn torsion_split() {
        let p = phi0();
        let tc = decompose_torsion(&Tensor2::identity(), &p);
        assert!((tc.tau1 - 1.0).abs() < 1e-15 && tc.tau7.amax() == 0.0 && tc.tau27.amax() < 1e-15);

        let v = Vec7::from_fn(|i, _| (i as f64).sin());
        let tc = decompose_torsion(&p.contract_vec(&v), &p);
        assert!((tc.tau7 - v).amax() < 1e-14);
        assert!(tc.tau1.abs() < 1e-15 && tc.tau14.amax() < 1e-14 && tc.tau27.amax() < 1e-15);

        let mut r = rng(12);
        let t = Tensor2::from_fn(|_, _| rand_vec(&mut r)[0]);
        let tc = decompose_torsion(&t, &p);
        assert!((tc.reassemble(&p) - t).amax() < 1e-12);
        assert!(p.contract_tensor(&tc.tau14).amax() < 1e-12);
        assert!(tc.tau27.trace().abs() < 1e-12);
        let pieces = [
            Tensor2::identity() * tc.tau1,
            p.contract_vec(&tc.tau7),
            tc.tau14,
            tc.tau27,
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(pieces[i].component_mul(&pieces[j]).sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contraction_identities_hold_for_standard_form() {
        let rep = verify_contraction_identities(&sc());
        assert!(rep.max() < 1e-12, "{rep:?}");
    }

    #[test]
    fn contraction_identities_hold_for_deformed_form() {
        let mut r = rng(13);
        let v = rand_unit(&mut r);
        let s = sigma(&v, &phi0()).unwrap();
        let sc = StructureConstants::with_metric(s, Tensor2::identity()).unwrap();
        assert!(verify_contraction_identities(&sc).max() < 1e-10);
    }

    #[test]
    fn contraction_identities_detect_bad_form() {
        let mut bad = phi0();
        bad.set([0, 1, 2], -1.0);
        let sc = StructureConstants::with_metric(bad, Tensor2::identity()).unwrap();
        let rep = verify_contraction_identities(&sc);
        assert!(rep.phi_phi > 0.5, "{rep:?}");
    }
}
