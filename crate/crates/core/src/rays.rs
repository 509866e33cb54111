//! Critical rays of `e^{P(z)}` and the sector partition of the circle.
//!
//! Along `z = r e^{iθ}` the size of `e^{P}` is governed by
//! `δ(P,θ) = Re(a_n e^{inθ})`. Its `2n` zeros split the circle into sectors of
//! width `π/n` with alternating sign.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::ComplexPoly;

/// Angles closer than this to a critical angle are classified as critical.
pub const ANGLE_TOL: f64 = 1e-12;

fn leading(p: &ComplexPoly) -> Result<(usize, num_complex::Complex64)> {
    match (p.degree().finite(), p.leading_coeff()) {
        (Some(n), Some(a)) if n >= 1 => Ok((n, a)),
        _ => Err(Error::ConstantPolynomial),
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn delta(p: &ComplexPoly, theta: f64) -> Result<f64> {
    let (n, a) = leading(p)?;
    Ok((a * num_complex::Complex64::from_polar(1.0, n as f64 * theta)).re)
}

/// The `2n` zeros of `δ(P,·)` in `[0, 2π)`, ascending.
pub fn critical_rays(p: &ComplexPoly) -> Result<Vec<f64>> {
    let (n, a) = leading(p)?;
    let nf = n as f64;
    let base = (PI / 2.0 - a.arg()) / nf;
    let mut angles: Vec<f64> = (0..2 * n)
        .map(|k| normalize_angle(base + k as f64 * PI / nf))
        .collect();
    angles.sort_by(|x, y| x.total_cmp(y));
    Ok(angles)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    EPlusInterior,
    EMinusInterior,
    Critical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sector {
    /// Half-open `[lo, hi)`; `hi` may exceed `2π` for the wrapping sector.
    pub lo: f64,
    pub hi: f64,
    pub sign: i8,
}

impl Sector {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = normalize_angle(theta);
        (t >= self.lo && t < self.hi) || (t + TAU >= self.lo && t + TAU < self.hi)
    }

    /// `count` angles spread over the interior, each at least `margin` from
    /// both edges (spread uniformly over the remaining arc).
    pub fn interior_rays(&self, count: usize, margin: f64) -> Vec<f64> {
        let lo = self.lo + margin;
        let hi = self.hi - margin;
        (0..count)
            .map(|i| {
                let t = if count == 1 {
                    0.5
                } else {
                    i as f64 / (count - 1) as f64
                };
                normalize_angle(lo + t * (hi - lo))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorPartition {
    pub n: usize,
    pub critical_angles: Vec<f64>,
    pub sectors: Vec<Sector>,
}

pub fn partition(p: &ComplexPoly) -> Result<SectorPartition> {
    let angles = critical_rays(p)?;
    let n = angles.len() / 2;
    let sectors = (0..angles.len())
        .map(|k| {
            let lo = angles[k];
            let hi = if k + 1 < angles.len() {
                angles[k + 1]
            } else {
                angles[0] + TAU
            };
            let d = delta(p, 0.5 * (lo + hi)).expect("degree checked");
            Sector {
                lo,
                hi,
                sign: if d > 0.0 { 1 } else { -1 },
            }
        })
        .collect();
    Ok(SectorPartition {
        n,
        critical_angles: angles,
        sectors,
    })
}

impl SectorPartition {
    pub fn membership(&self, theta: f64) -> Membership {
        if self
            .critical_angles
            .iter()
            .any(|&c| angle_distance(c, theta) <= ANGLE_TOL)
        {
            return Membership::Critical;
        }
        match self.sector_of(theta).map(|s| s.sign) {
            Some(1) => Membership::EPlusInterior,
            _ => Membership::EMinusInterior,
        }
    }

    pub fn sector_of(&self, theta: f64) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.contains(theta))
    }

    /// Sampled interior rays of every sector, each kept `π/(8n)` away from
    /// the critical angles.
    pub fn interior_rays(&self, per_sector: usize) -> Vec<(usize, f64)> {
        let margin = PI / (8.0 * self.n as f64);
        self.sectors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                s.interior_rays(per_sector, margin)
                    .into_iter()
                    .map(move |t| (i, t))
            })
            .collect()
    }
}

pub fn membership(part: &SectorPartition, theta: f64) -> Membership {
    part.membership(theta)
}
