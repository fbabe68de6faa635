use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::math::{cos, safe_sqrt, sin_cos, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    Midpoint,
    /// Gauss-Legendre in `cos theta`.
    GaussLegendre,
}

/// Product rule on the sphere: `n_theta` nodes in `cos theta` per panel
/// times `n_phi` uniform azimuths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub rule: QuadratureRule,
}

impl QuadratureGrid {
    pub fn gauss_legendre(n_theta: usize, n_phi: usize) -> Self {
        QuadratureGrid { n_theta, n_phi, rule: QuadratureRule::GaussLegendre }
    }

    pub fn midpoint(n_theta: usize, n_phi: usize) -> Self {
        QuadratureGrid { n_theta, n_phi, rule: QuadratureRule::Midpoint }
    }

    /// Nodes and weights in `z = cos theta` on `[a, b]`.
    pub fn z_nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let n = self.n_theta.max(1);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        match self.rule {
            QuadratureRule::Midpoint => {
                let h = (b - a) / n as f64;
                (0..n).map(|i| (a + (i as f64 + 0.5) * h, h)).collect()
            }
            QuadratureRule::GaussLegendre => {
                gauss_legendre(n).into_iter().map(|(x, w)| (mid + half * x, half * w)).collect()
            }
        }
    }

    /// Direction nodes and solid-angle weights covering the band
    /// `z in [a, b]`, split into panels at `breaks`.
    pub fn band_nodes(&self, a: f64, b: f64, breaks: &[f64]) -> Vec<(Vec3, f64)> {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let n_phi = self.n_phi.max(1);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut out = Vec::new();
        for panel in cuts.windows(2) {
            for (z, wz) in self.z_nodes(panel[0], panel[1]) {
                let r = safe_sqrt(1.0 - z * z);
                for j in 0..n_phi {
                    let (s, c) = sin_cos((j as f64 + 0.5) * dphi);
                    out.push((Vec3::new(r * c, r * s, z), wz * dphi));
                }
            }
        }
        out
    }

    pub fn sphere_nodes(&self) -> Vec<(Vec3, f64)> {
        self.band_nodes(-1.0, 1.0, &[0.0])
    }

    pub fn hemisphere_nodes(&self) -> Vec<(Vec3, f64)> {
        self.band_nodes(0.0, 1.0, &[])
    }

    pub fn integrate_sphere(&self, mut f: impl FnMut(Vec3) -> f64) -> f64 {
        self.sphere_nodes().into_iter().map(|(v, w)| w * f(v)).sum()
    }

    pub fn integrate_hemisphere(&self, mut f: impl FnMut(Vec3) -> f64) -> f64 {
        self.hemisphere_nodes().into_iter().map(|(v, w)| w * f(v)).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

// P_n(x) and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
