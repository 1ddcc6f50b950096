//! Independent reference computations used only by tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connection::{torsion_of_gauge, TorsionField};
use crate::forms::ThreeForm;
use crate::lattice::{make_unit_field, Grid, Mode, OctField};
use crate::{Octonion, StructureConstants, Vec7};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(r: &mut ChaCha8Rng) -> Vec7 {
    Vec7::from_fn(|_, _| r.gen_range(-1.0..=1.0))
}

pub fn rand_oct(r: &mut ChaCha8Rng) -> Octonion {
    Octonion::new(r.gen_range(-1.0..=1.0), rand_vec(r))
}

pub fn rand_unit(r: &mut ChaCha8Rng) -> Octonion {
    let a = rand_oct(r);
    a / a.norm()
}

/// ε of a 7-tuple by brute-force inversion counting.
pub fn levi_civita(idx: [usize; 7]) -> f64 {
    for i in 0..7 {
        for j in i + 1..7 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut inv = 0;
    for i in 0..7 {
        for j in i + 1..7 {
            if idx[i] > idx[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ψ_abcd = (1/3!) Σ_efg ε_abcdefg φ_efg for the Euclidean metric, as a dense table.
pub fn dual_brute(phi: &ThreeForm) -> Vec<f64> {
    let d = phi.to_dense();
    let mut out = vec![0.0; 7 * 7 * 7 * 7];
    for a in 0..7 {
        for b in 0..7 {
            for c in 0..7 {
                for e4 in 0..7 {
                    let mut acc = 0.0;
                    for e in 0..7 {
                        for f in 0..7 {
                            for g in 0..7 {
                                acc += levi_civita([a, b, c, e4, e, f, g]) * d[e][f][g];
                            }
                        }
                    }
                    out[((a * 7 + b) * 7 + c) * 7 + e4] = acc / 6.0;
                }
            }
        }
    }
    out
}

pub fn dense4(t: &[f64], a: usize, b: usize, c: usize, d: usize) -> f64 {
    t[((a * 7 + b) * 7 + c) * 7 + d]
}
pub fn rand_field(g: &Grid, seed: u64) -> OctField {
    let mut r = rng(seed);
    OctField { grid: g.clone(), data: (0..g.total_sites()).map(|_| rand_oct(&mut r)).collect() }
}

/// A smooth gauge field with one sinusoid along each active axis.
pub fn smooth_unit(g: &Grid, amp: f64, seed: u64) -> OctField {
    let mut r = rng(seed);
    let modes: Vec<Mode> = g
        .active_axes()
        .iter()
        .enumerate()
        .map(|(k, &axis)| Mode { axis, freq: (k + 1) as f64, amp, dir: rand_vec(&mut r).normalize() })
        .collect();
    make_unit_field(g, &modes).unwrap()
}

/// A smooth, not necessarily unit, field.
pub fn smooth_field(g: &Grid, seed: u64) -> OctField {
    let mut r = rng(seed);
    let a = rand_oct(&mut r);
    let b = rand_oct(&mut r);
    let c = rand_oct(&mut r);
    let axes = g.active_axes().to_vec();
    OctField::from_fn(g, move |x| {
        let u = axes.first().map_or(0.0, |&i| x[i]);
        let w = axes.last().map_or(0.0, |&i| x[i]);
        a + b * u.sin() + c * (u + 2.0 * w).cos()
    })
}

/// Reference structure σ_W(φ₀) with its gauge torsion.
pub fn gauge_reference(g: &Grid, amp: f64, seed: u64) -> TorsionField {
    let w = smooth_unit(g, amp, seed);
    torsion_of_gauge(&w, &TorsionField::zero(g)).unwrap().torsion
}

/// Random first-order data at a point: for each direction the pair
/// (D̃_i(AV⁻¹), (D_iA)V⁻¹), where D̃ uses T̃ = −(DV)V⁻¹ and ∘_V, and
/// ∇ of a product follows ∇(XY) = (∇X)Y + X∇Y − [T,X,Y].
pub fn gauge_jet(sc: &StructureConstants, r: &mut ChaCha8Rng) -> (Octonion, Vec<(Octonion, Octonion)>) {
    let v = rand_unit(r);
    let a = rand_oct(r);
    let vinv = v.conj();
    let avinv = sc.mul(&a, &vinv);
    let pairs = (0..7)
        .map(|_| {
            let t = Octonion::imag(rand_vec(r));
            let da = rand_oct(r);
            let raw = rand_oct(r);
            let dv = raw - v * raw.dot(&v);
            let t_tilde = -sc.mul(&(dv - sc.mul(&v, &t)), &vinv);
            let d_avinv = sc.mul(&da, &vinv) + sc.mul(&a, &dv.conj()) - sc.associator(&t, &a, &vinv);
            let lhs = d_avinv - sc.circ_v(&avinv, &t_tilde, &v).unwrap();
            (lhs, sc.mul(&(da - sc.mul(&a, &t)), &vinv))
        })
        .collect();
    (v, pairs)
}
