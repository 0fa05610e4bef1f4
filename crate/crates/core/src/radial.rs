//! Exact leaves over the exterior of a ball: shifted catenoids.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catenoid::{check_dimension, limit_height, neck_for_slope, profile_integral, profile_slope};
use crate::error::{Error, Result};

/// Default number of samples and outer extent (as a multiple of the radius).
pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_EXTENT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub r: f64,
    pub u: f64,
    pub slope: f64,
}

/// `u(r) = v(r) - v(R)` for the catenoid of slope `s` at `r = R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radius: f64,
    pub s: f64,
    /// Neck of the catenoid, or `None` for the zero leaf.
    pub lambda: Option<f64>,
    pub n: usize,
    pub samples: Vec<RadialSample>,
    pub c: f64,
}

/// Exact leaf value at `r` for slope `s` on the ball of radius `radius`.
pub fn radial_value(radius: f64, s: f64, n: usize, r: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    if r < radius {
        return Err(Error::InvalidArgument(format!("r = {r} lies inside the ball of radius {radius}")));
    }
    let lambda = neck_for_slope(radius, s.abs(), n)?;
    let v = lambda * profile_integral(radius / lambda, r / lambda, n)?;
    Ok(v.copysign(s))
}

/// Exact leaf sampled on the default geometric grid.
pub fn radial_solution(radius: f64, s: f64, n: usize) -> Result<RadialProfile> {
    radial_solution_sampled(radius, s, n, DEFAULT_SAMPLES, DEFAULT_EXTENT * radius)
}

/// Exact leaf sampled at `count` geometrically spaced radii in `[radius, r_max]`.
pub fn radial_solution_sampled(radius: f64, s: f64, n: usize, count: usize, r_max: f64) -> Result<RadialProfile> {
    check_dimension(n)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument("slope must be finite".into()));
    }
    if count < 2 || !(r_max > radius) {
        return Err(Error::InvalidArgument("need at least two samples and r_max > radius".into()));
    }
    let ratio = r_max / radius;
    let radii: Vec<f64> = (0..count)
        .map(|i| if i + 1 == count { r_max } else { radius * ratio.powf(i as f64 / (count - 1) as f64) })
        .collect();
    if s == 0.0 {
        let samples = radii.iter().map(|&r| RadialSample { r, u: 0.0, slope: 0.0 }).collect();
        return Ok(RadialProfile { radius, s, lambda: None, n, samples, c: 0.0 });
    }
    let lambda = neck_for_slope(radius, s.abs(), n)?;
    let mut samples = Vec::with_capacity(count);
    let mut u = 0.0;
    let mut prev = radius;
    for (i, &r) in radii.iter().enumerate() {
        // Accumulate piecewise so each quadrature sees one smooth panel.
        if i > 0 {
            u += lambda * profile_integral(prev / lambda, r / lambda, n)?;
        }
        prev = r;
        let slope = if i == 0 { s.abs() } else { profile_slope(lambda, r, n) };
        samples.push(RadialSample { r, u, slope });
    }
    let c = limit_height(lambda, radius, n)?;
    if s < 0.0 {
        for p in &mut samples {
            p.u = -p.u;
            p.slope = -p.slope;
        }
    }
    Ok(RadialProfile { radius, s, lambda: Some(lambda), n, samples, c: c.copysign(s) })
}

/// Maximal outer value on the annulus `R <= r <= K` with boundary slope `s`.
pub fn radial_tk(radius: f64, k: f64, s: f64, n: usize) -> Result<f64> {
    check_dimension(n)?;
    if !(k > radius) {
        return Err(Error::InvalidArgument(format!("outer radius {k} must exceed the inner radius {radius}")));
    }
    radial_value(radius, s, n, k)
}

impl RadialProfile {
    /// Flux `r^(n-1) u' / sqrt(1 + u'^2)` at each sample.
    pub fn fluxes(&self) -> Vec<f64> {
        let m = (self.n - 1) as i32;
        self.samples
            .iter()
            .map(|p| p.r.powi(m) * p.slope / (1.0 + p.slope * p.slope).sqrt())
            .collect()
    }

    /// CSV with header `r,u,slope`; `slope` is the signed derivative `u'(r)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,u,slope")?;
        for p in &self.samples {
            writeln!(w, "{:e},{:e},{:e}", p.r, p.u, p.slope)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_leaf() {
        let p = radial_solution(1.0, 0.0, 3).unwrap();
        assert!(p.samples.iter().all(|s| s.u == 0.0));
        assert_eq!(p.c, 0.0);
        assert_eq!(radial_tk(1.0, 8.0, 0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn samples_are_geometric_and_start_on_sphere() {
        let p = radial_solution(2.0, 1.0, 3).unwrap();
        assert_eq!(p.samples.len(), DEFAULT_SAMPLES);
        assert_eq!(p.samples[0].r, 2.0);
        assert_eq!(p.samples[0].u, 0.0);
        assert_eq!(p.samples.last().unwrap().r, 32.0);
    }

    #[test]
    fn rejects_reversed_annulus() {
        assert!(radial_tk(1.0, 1.0, 1.0, 3).is_err());
    }
}
