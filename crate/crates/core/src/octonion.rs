//! Octonions R ⊕ R^7 with the product defined by a 3-form.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::exterior::{self, subsets, DIM};
use crate::forms::{hodge_star3, metric_from_phi, phi0, FourForm, ThreeForm};
use crate::{Tensor2, Vec7};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Octonion {
    pub re: f64,
    pub im: Vec7,
}

impl Octonion {
    pub fn new(re: f64, im: Vec7) -> Self {
        Self { re, im }
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn real(re: f64) -> Self {
        Self { re, im: Vec7::zeros() }
    }

    pub fn imag(im: Vec7) -> Self {
        Self { re: 0.0, im }
    }

    /// The imaginary unit (0, e_i), 0-based.
    pub fn unit(i: usize) -> Self {
        let mut im = Vec7::zeros();
        im[i] = 1.0;
        Self::imag(im)
    }

    pub fn from_array(c: [f64; 8]) -> Self {
        Self { re: c[0], im: Vec7::from_column_slice(&c[1..]) }
    }

    pub fn to_array(&self) -> [f64; 8] {
        let mut c = [0.0; 8];
        c[0] = self.re;
        c[1..].copy_from_slice(self.im.as_slice());
        c
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    /// Euclidean 8-dimensional inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        self.re * other.re + self.im.dot(&other.im)
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn inverse(&self) -> Result<Self> {
        let n2 = self.norm2();
        if n2 == 0.0 {
            return Err(Error::ZeroOctonion);
        }
        Ok(self.conj() / n2)
    }

    pub fn max_abs(&self) -> f64 {
        self.im.amax().max(self.re.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.iter().all(|x| x.is_finite())
    }

    /// exp of an imaginary octonion: cos|α| + α sin|α|/|α|.
    pub fn exp_im(alpha: &Vec7) -> Self {
        let n = alpha.norm();
        let sinc = if n < 1e-4 {
            let n2 = n * n;
            1.0 - n2 / 6.0 + n2 * n2 / 120.0
        } else {
            n.sin() / n
        };
        Self { re: n.cos(), im: alpha * sinc }
    }

    /// Integer power via |B|^k (cos kθ + β̂ sin kθ / sin θ).
    ///
    /// When β = 0 the angle is 0 or π and the imaginary part vanishes.
    pub fn pow_int(&self, k: i32) -> Result<Self> {
        match k {
            0 => return Ok(Self::one()),
            1 => return Ok(*self),
            _ => {}
        }
        let r = self.norm();
        if r == 0.0 {
            return if k > 0 { Ok(Self::zero()) } else { Err(Error::ZeroPower) };
        }
        let bn = self.im.norm();
        let theta = bn.atan2(self.re);
        let s = bn / r;
        let kf = k as f64;
        let ratio = if s > 1e-8 {
            (kf * theta).sin() / s
        } else {
            // sin kθ / sin θ → k cos(θ)^(k-1) at θ ∈ {0, π}
            let c: f64 = if self.re >= 0.0 { 1.0 } else { -1.0 };
            kf * c.powi(k - 1)
        };
        let rk = r.powi(k);
        Ok(Self { re: rk * (kf * theta).cos(), im: self.im * (rk * ratio / r) })
    }
}

impl Add for Octonion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Octonion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Octonion {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul<f64> for Octonion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }
}

impl Mul<Octonion> for f64 {
    type Output = Octonion;
    fn mul(self, o: Octonion) -> Octonion {
        o * self
    }
}

impl Div<f64> for Octonion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self { re: self.re / s, im: self.im / s }
    }
}

impl AddAssign for Octonion {
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl SubAssign for Octonion {
    fn sub_assign(&mut self, o: Self) {
        self.re -= o.re;
        self.im -= o.im;
    }
}

/// A 3-form with its dual and metric, precomputed for fast products.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    pub phi: ThreeForm,
    pub psi: FourForm,
    pub metric: Tensor2,
    metric_inv: Tensor2,
    euclidean: bool,
    // nonzero φ_abc over all index orders
    terms: Vec<(usize, usize, usize, f64)>,
}

impl Default for StructureConstants {
    fn default() -> Self {
        Self::standard()
    }
}

impl StructureConstants {
    /// The standard form with the Euclidean metric.
    pub fn standard() -> Self {
        Self::with_metric(phi0(), Tensor2::identity()).expect("identity metric is positive")
    }

    /// Uses the given metric as is; ψ is the Hodge dual under it.
    pub fn with_metric(phi: ThreeForm, metric: Tensor2) -> Result<Self> {
        let psi = hodge_star3(&phi, &metric)?;
        let metric_inv = metric.try_inverse().ok_or(Error::NotPositiveDefinite)?;
        let euclidean = metric == Tensor2::identity();
        let mut terms = Vec::new();
        for (&m, &v) in subsets(3).iter().zip(&phi.comp) {
            if v == 0.0 {
                continue;
            }
            let mut it = exterior::indices(m);
            let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            for (x, y, z, s) in [(a, b, c, v), (b, c, a, v), (c, a, b, v), (b, a, c, -v), (a, c, b, -v), (c, b, a, -v)] {
                terms.push((x, y, z, s));
            }
        }
        Ok(Self { phi, psi, metric, metric_inv, euclidean, terms })
    }

    /// Uses the metric determined by the form itself.
    pub fn from_phi(phi: ThreeForm) -> Result<Self> {
        let pm = metric_from_phi(&phi);
        if !pm.positive {
            return Err(Error::NotPositiveDefinite);
        }
        Self::with_metric(phi, pm.metric)
    }

    pub fn inner(&self, a: &Vec7, b: &Vec7) -> f64 {
        if self.euclidean {
            a.dot(b)
        } else {
            a.dot(&(self.metric * b))
        }
    }

    /// (α × β)^a = φ^a_bc α^b β^c.
    pub fn cross(&self, a: &Vec7, b: &Vec7) -> Vec7 {
        let mut out = Vec7::zeros();
        for &(x, y, z, v) in &self.terms {
            out[x] += v * a[y] * b[z];
        }
        if self.euclidean {
            out
        } else {
            self.metric_inv * out
        }
    }

    pub fn norm2(&self, a: &Octonion) -> f64 {
        a.re * a.re + self.inner(&a.im, &a.im)
    }

    pub fn inverse(&self, a: &Octonion) -> Result<Octonion> {
        let n2 = self.norm2(a);
        if n2 == 0.0 {
            return Err(Error::ZeroOctonion);
        }
        Ok(a.conj() / n2)
    }

    /// (a, α)(b, β) = (ab − ⟨α,β⟩, aβ + bα + α×β).
    pub fn mul(&self, a: &Octonion, b: &Octonion) -> Octonion {
        Octonion {
            re: a.re * b.re - self.inner(&a.im, &b.im),
            im: b.im * a.re + a.im * b.re + self.cross(&a.im, &b.im),
        }
    }

    pub fn commutator(&self, a: &Octonion, b: &Octonion) -> Octonion {
        self.mul(a, b) - self.mul(b, a)
    }

    /// [A,B,C] = A(BC) − (AB)C.
    pub fn associator(&self, a: &Octonion, b: &Octonion, c: &Octonion) -> Octonion {
        self.mul(a, &self.mul(b, c)) - self.mul(&self.mul(a, b), c)
    }

    /// Restriction of A ↦ VAV⁻¹ to the imaginary part:
    /// |V|^-2 ((v0² − |v|²)δ − 2 v0 (v⌟φ) + 2 v v^T).
    pub fn ad_matrix(&self, v: &Octonion) -> Result<Tensor2> {
        let n2 = self.norm2(v);
        if n2 == 0.0 {
            return Err(Error::ZeroOctonion);
        }
        let w = &v.im;
        let w_low = if self.euclidean { *w } else { self.metric * w };
        let k = if self.euclidean {
            self.phi.contract_vec(w)
        } else {
            self.metric_inv * self.phi.contract_vec(w)
        };
        let m = Tensor2::identity() * (v.re * v.re - self.inner(w, w)) - k * (2.0 * v.re)
            + (w * w_low.transpose()) * 2.0;
        Ok(m / n2)
    }

    pub fn ad(&self, v: &Octonion, a: &Octonion) -> Result<Octonion> {
        Ok(Octonion { re: a.re, im: self.ad_matrix(v)? * a.im })
    }

    /// Deformed product A ∘_V B = AB + [A,B,V]V⁻¹.
    pub fn circ_v(&self, a: &Octonion, b: &Octonion, v: &Octonion) -> Result<Octonion> {
        let vinv = self.inverse(v)?;
        Ok(self.mul(a, b) + self.mul(&self.associator(a, b, v), &vinv))
    }

    /// The same product written as (AV)(V⁻¹B).
    pub fn circ_v_factored(&self, a: &Octonion, b: &Octonion, v: &Octonion) -> Result<Octonion> {
        let vinv = self.inverse(v)?;
        Ok(self.mul(&self.mul(a, v), &self.mul(&vinv, b)))
    }

    /// Associator of ∘_V from its definition A∘(B∘C) − (A∘B)∘C.
    pub fn associator_v(&self, a: &Octonion, b: &Octonion, c: &Octonion, v: &Octonion) -> Result<Octonion> {
        let bc = self.circ_v(b, c, v)?;
        let ab = self.circ_v(a, b, v)?;
        Ok(self.circ_v(a, &bc, v)? - self.circ_v(&ab, c, v)?)
    }

    /// Closed form [A,B,CV]V⁻¹ − [A,B,V](V⁻¹C).
    pub fn associator_v_closed(&self, a: &Octonion, b: &Octonion, c: &Octonion, v: &Octonion) -> Result<Octonion> {
        let vinv = self.inverse(v)?;
        let first = self.mul(&self.associator(a, b, &self.mul(c, v)), &vinv);
        let second = self.mul(&self.associator(a, b, v), &self.mul(&vinv, c));
        Ok(first - second)
    }

    /// ψ(·, α, β, γ) with the free slot raised.
    pub fn psi_vec(&self, a: &Vec7, b: &Vec7, c: &Vec7) -> Vec7 {
        let mut out = Vec7::zeros();
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        *o += self.psi.get([i, j, k, l]) * a[j] * b[k] * c[l];
                    }
                }
            }
        }
        if self.euclidean {
            out
        } else {
            self.metric_inv * out
        }
    }
}

/// Product for a Euclidean 3-form given directly, used on lattices where the
/// structure varies from site to site.
pub fn mul_with(phi: &ThreeForm, a: &Octonion, b: &Octonion) -> Octonion {
    Octonion {
        re: a.re * b.re - a.im.dot(&b.im),
        im: b.im * a.re + a.im * b.re + phi.cross(&a.im, &b.im),
    }
}
