//! Periodic flat 7-torus with a configurable set of active axes.
//!
//! Fields are constant along inactive axes, so only n^|active| sites are
//! stored. Derivatives are second-order central differences.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binom7, rank, sort_sign, DIM};
use crate::{Octonion, Vec7};

/// (2π)^7, the volume of the torus.
pub const TORUS_VOLUME: f64 = 386_597.533_155_429_3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    active: Vec<usize>,
    strides: [usize; DIM],
    sites: usize,
}

impl Grid {
    /// `active` holds 0-based axis labels.
    pub fn new(n: usize, active: &[usize]) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and at least 4")));
        }
        let mut axes = active.to_vec();
        axes.sort_unstable();
        axes.dedup();
        if axes.len() != active.len() {
            return Err(Error::InvalidGrid("repeated active axis".into()));
        }
        if axes.iter().any(|&a| a >= DIM) {
            return Err(Error::InvalidGrid("axis label out of range".into()));
        }
        let sites = n
            .checked_pow(axes.len() as u32)
            .filter(|&s| s <= 1 << 28)
            .ok_or_else(|| Error::InvalidGrid("too many sites".into()))?;
        let mut strides = [0; DIM];
        let mut s = 1;
        for &a in &axes {
            strides[a] = s;
            s *= n;
        }
        Ok(Self { n, active: axes, strides, sites })
    }

    /// Same as [`Grid::new`] with axes labelled 1..=7.
    pub fn from_one_based(n: usize, active: &[usize]) -> Result<Self> {
        if active.iter().any(|&a| a == 0 || a > DIM) {
            return Err(Error::InvalidGrid("axis labels run from 1 to 7".into()));
        }
        let zero: Vec<usize> = active.iter().map(|a| a - 1).collect();
        Self::new(n, &zero)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn active_axes(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.active.contains(&axis)
    }

    pub fn total_sites(&self) -> usize {
        self.sites
    }

    /// Coordinates of a site; zero along inactive axes.
    pub fn coords(&self, site: usize) -> [f64; DIM] {
        let mut x = [0.0; DIM];
        for &a in &self.active {
            x[a] = ((site / self.strides[a]) % self.n) as f64 * self.spacing();
        }
        x
    }

    /// Neighbour of `site` one step forward (`+1`) or back (`-1`) along an active axis.
    pub fn neighbour(&self, site: usize, axis: usize, step: isize) -> usize {
        let s = self.strides[axis];
        let c = (site / s) % self.n;
        let c2 = (c as isize + step).rem_euclid(self.n as isize) as usize;
        site + c2 * s - c * s
    }

    /// Integral of a scalar field, normalized so that the integral of 1 is (2π)^7.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.sites);
        compensated_sum(f.iter().copied()) / self.sites as f64 * TORUS_VOLUME
    }
}

/// Neumaier summation.
pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

/// A section of the octonion bundle sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OctField {
    pub grid: Grid,
    pub data: Vec<Octonion>,
}

impl OctField {
    pub fn constant(grid: &Grid, value: Octonion) -> Self {
        Self { grid: grid.clone(), data: vec![value; grid.total_sites()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64; DIM]) -> Octonion + Sync) -> Self {
        let data = (0..grid.total_sites()).into_par_iter().map(|s| f(&grid.coords(s))).collect();
        Self { grid: grid.clone(), data }
    }

    pub fn map(&self, f: impl Fn(usize, &Octonion) -> Octonion + Sync) -> Self {
        let data = self.data.par_iter().enumerate().map(|(s, a)| f(s, a)).collect();
        Self { grid: self.grid.clone(), data }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(usize, &Octonion, &Octonion) -> Octonion + Sync) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .par_iter()
            .zip(&other.data)
            .enumerate()
            .map(|(s, (a, b))| f(s, a, b))
            .collect();
        Ok(Self { grid: self.grid.clone(), data })
    }

    /// Errors on the first site whose norm deviates from 1 by more than `tol`.
    pub fn check_unit(&self, tol: f64) -> Result<()> {
        match self.data.iter().position(|a| (a.norm2() - 1.0).abs() > tol) {
            Some(site) => Err(Error::NonUnit { site, norm2: self.data[site].norm2() }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.norm()))
    }

    /// L² pairing ∫⟨A,B⟩.
    pub fn inner(&self, other: &Self) -> f64 {
        let f: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| a.dot(b)).collect();
        self.grid.integrate(&f)
    }

    /// 8 values per site, site-major.
    pub fn to_flat(&self) -> Vec<f64> {
        self.data.iter().flat_map(|a| a.to_array()).collect()
    }
}

/// Octonion-valued p-form field with binom(7,p) sorted-index slots per site.
#[derive(Clone, Debug, PartialEq)]
pub struct OctForm {
    pub grid: Grid,
    pub degree: usize,
    pub data: Vec<Octonion>,
}

impl OctForm {
    pub fn zeros(grid: &Grid, degree: usize) -> Self {
        Self { grid: grid.clone(), degree, data: vec![Octonion::zero(); grid.total_sites() * binom7(degree)] }
    }

    pub fn slots(&self) -> usize {
        binom7(self.degree)
    }

    pub fn from_field(f: &OctField) -> Self {
        Self { grid: f.grid.clone(), degree: 0, data: f.data.clone() }
    }

    pub fn to_field(&self) -> Result<OctField> {
        if self.degree != 0 {
            return Err(Error::Degree(self.degree));
        }
        Ok(OctField { grid: self.grid.clone(), data: self.data.clone() })
    }

    /// Slot values of one site.
    pub fn site(&self, site: usize) -> &[Octonion] {
        let k = self.slots();
        &self.data[site * k..(site + 1) * k]
    }

    /// Component with arbitrary index order; antisymmetric, zero on repeats.
    pub fn get(&self, site: usize, idx: &[usize]) -> Octonion {
        debug_assert_eq!(idx.len(), self.degree);
        let (s, m) = sort_sign(idx);
        if s == 0.0 {
            return Octonion::zero();
        }
        self.data[site * self.slots() + rank(m)] * s
    }

    /// L² pairing with one term per increasing index tuple.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid || self.degree != other.degree {
            return Err(Error::GridMismatch);
        }
        let k = self.slots();
        let f: Vec<f64> = (0..self.grid.total_sites())
            .map(|s| (0..k).map(|i| self.data[s * k + i].dot(&other.data[s * k + i])).sum())
            .collect();
        Ok(self.grid.integrate(&f))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }
}

/// Central difference of interleaved per-site data with `slots` values per site.
pub(crate) fn diff_slots(grid: &Grid, data: &[Octonion], slots: usize, axis: usize) -> Vec<Octonion> {
    if !grid.is_active(axis) {
        return vec![Octonion::zero(); data.len()];
    }
    let inv = 1.0 / (2.0 * grid.spacing());
    (0..grid.total_sites())
        .into_par_iter()
        .flat_map_iter(|s| {
            let fwd = grid.neighbour(s, axis, 1);
            let back = grid.neighbour(s, axis, -1);
            (0..slots).map(move |i| (data[fwd * slots + i] - data[back * slots + i]) * inv)
        })
        .collect()
}

/// Central difference of a scalar field.
pub fn ddx_scalar(grid: &Grid, f: &[f64], axis: usize) -> Vec<f64> {
    if !grid.is_active(axis) {
        return vec![0.0; f.len()];
    }
    let inv = 1.0 / (2.0 * grid.spacing());
    (0..grid.total_sites())
        .map(|s| (f[grid.neighbour(s, axis, 1)] - f[grid.neighbour(s, axis, -1)]) * inv)
        .collect()
}

/// ∂f/∂x^axis by central differences; zero along inactive axes.
pub fn ddx(f: &OctField, axis: usize) -> OctField {
    OctField { grid: f.grid.clone(), data: diff_slots(&f.grid, &f.data, 1, axis) }
}

/// One sinusoidal term of a gauge field profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    /// 0-based axis.
    pub axis: usize,
    pub freq: f64,
    pub amp: f64,
    pub dir: Vec7,
}

/// V(x) = exp(Σ amp · sin(freq · x_axis) · dir); unit at every site.
pub fn make_unit_field(grid: &Grid, modes: &[Mode]) -> Result<OctField> {
    for m in modes {
        if !grid.is_active(m.axis) {
            return Err(Error::InvalidSpec(format!("mode on inactive axis {}", m.axis + 1)));
        }
        if (m.freq - m.freq.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("frequency {} is not an integer", m.freq)));
        }
    }
    Ok(OctField::from_fn(grid, |x| {
        let mut v = Vec7::zeros();
        for m in modes {
            v += m.dir * (m.amp * (m.freq * x[m.axis]).sin());
        }
        Octonion::exp_im(&v)
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModeSpec {
    /// 1-based axis.
    pub axis: usize,
    pub freq: f64,
    pub amp: f64,
    pub dir: Vec<f64>,
}

/// JSON description of a grid and a gauge field on it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSpec {
    pub n: usize,
    /// 1-based axis labels.
    pub active_axes: Vec<usize>,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
}

impl FieldSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::from_one_based(self.n, &self.active_axes)
    }

    /// Converts to 0-based modes with unit directions. The second value lists
    /// the (0-based) positions of modes whose direction had to be rescaled.
    pub fn modes(&self) -> Result<(Vec<Mode>, Vec<usize>)> {
        let mut out = Vec::with_capacity(self.modes.len());
        let mut rescaled = Vec::new();
        for (i, m) in self.modes.iter().enumerate() {
            if m.dir.len() != DIM {
                return Err(Error::InvalidSpec(format!("mode {i}: dir needs 7 entries")));
            }
            if m.axis == 0 || m.axis > DIM {
                return Err(Error::InvalidSpec(format!("mode {i}: axis {} out of range", m.axis)));
            }
            let dir = Vec7::from_column_slice(&m.dir);
            let len = dir.norm();
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidSpec(format!("mode {i}: zero direction")));
            }
            if (len - 1.0).abs() > 1e-12 {
                log::warn!("mode {i}: direction has length {len}, normalizing");
                rescaled.push(i);
            }
            out.push(Mode { axis: m.axis - 1, freq: m.freq, amp: m.amp, dir: dir / len });
        }
        Ok((out, rescaled))
    }

    pub fn build(&self) -> Result<OctField> {
        let grid = self.grid()?;
        let (modes, _) = self.modes()?;
        make_unit_field(&grid, &modes)
    }
}

/// Sidecar describing a binary field dump.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub n: usize,
    pub active_axes: Vec<usize>,
    pub total_sites: usize,
    pub components_per_site: usize,
    pub dtype: String,
    pub layout: String,
    pub kind: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes little-endian f64 values, site-major, plus `<path>.json`.
pub fn write_binary(path: &Path, grid: &Grid, components: usize, kind: &str, values: &[f64]) -> Result<()> {
    if values.len() != grid.total_sites() * components {
        return Err(Error::InvalidSpec("value count does not match grid".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let header = FieldHeader {
        n: grid.n(),
        active_axes: grid.active_axes().iter().map(|a| a + 1).collect(),
        total_sites: grid.total_sites(),
        components_per_site: components,
        dtype: "f64-le".into(),
        layout: "site-major".into(),
        kind: kind.into(),
    };
    std::fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

/// Reads a dump written by [`write_binary`].
pub fn read_binary(path: &Path) -> Result<(FieldHeader, Vec<f64>)> {
    let header: FieldHeader = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != header.total_sites * header.components_per_site * 8 {
        return Err(Error::InvalidSpec("binary size does not match sidecar".into()));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((header, values))
}

pub fn write_field(path: &Path, f: &OctField) -> Result<()> {
    write_binary(path, &f.grid, 8, "octonion", &f.to_flat())
}

pub fn read_field(path: &Path) -> Result<OctField> {
    let (h, values) = read_binary(path)?;
    if h.components_per_site != 8 {
        return Err(Error::InvalidSpec("not an octonion field".into()));
    }
    let grid = Grid::from_one_based(h.n, &h.active_axes)?;
    let data = values.chunks_exact(8).map(|c| Octonion::from_array(c.try_into().unwrap())).collect();
    Ok(OctField { grid, data })
}
