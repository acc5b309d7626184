use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolutionPair;
use crate::torus::{ball_integral, Point};

/// A site needs `w₁(peak) > median(w₁) + margin`.
pub const DEFAULT_BLOWUP_MARGIN: f64 = 4.0;
/// Local maxima closer than this are merged into the higher one.
pub const MERGE_DISTANCE: f64 = 0.1;
/// `local_mass` radii must stay below this.
pub const MAX_LOCAL_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupSite {
    pub point: Point,
    /// `w₁ = u₁ - 2 ln ε` at the peak node.
    pub w1_peak: f64,
    /// `w₁` peak minus the median of `w₁` over the torus.
    pub prominence: f64,
}

/// Local maxima of `w₁ = u₁ - 2 ln ε` that rise more than `margin` above
/// the median of `w₁`, merged within [`MERGE_DISTANCE`], highest first.
pub fn detect_blowup_points(sol: &SolutionPair, margin: f64) -> Vec<BlowupSite> {
    let grid = *sol.grid();
    let lift = 2.0 * sol.params.eps.ln();
    let w1 = sol.u1().shift(-lift);
    let mut sorted = w1.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 0 {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let mut candidates = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = w1.at(i as usize, j as usize);
            if v <= median + margin {
                continue;
            }
            let is_max = (-1..=1isize).all(|dj| {
                (-1..=1isize).all(|di| {
                    if di == 0 && dj == 0 {
                        return true;
                    }
                    let ii = (i + di).rem_euclid(nx) as usize;
                    let jj = (j + dj).rem_euclid(ny) as usize;
                    v > w1.at(ii, jj)
                })
            });
            if is_max {
                candidates.push(BlowupSite {
                    point: grid.node(i as usize, j as usize),
                    w1_peak: v,
                    prominence: v - median,
                });
            }
        }
    }
    candidates.sort_by(|a, b| b.w1_peak.total_cmp(&a.w1_peak));
    let mut sites: Vec<BlowupSite> = Vec::new();
    for c in candidates {
        if sites
            .iter()
            .all(|s| grid.distance(s.point, c.point) >= MERGE_DISTANCE)
        {
            sites.push(c);
        }
    }
    sites
}

/// `(1/ε²)∫_{B_d(q)} e^{u₁}(1 - e^{u₁})`.
pub fn local_mass(sol: &SolutionPair, q: Point, d: f64) -> Result<f64> {
    if !(d > 0.0 && d < MAX_LOCAL_RADIUS) {
        return Err(Error::InvalidArgument(format!(
            "local mass radius must lie in (0, {MAX_LOCAL_RADIUS}), got {d}"
        )));
    }
    let k = 1.0 / (sol.params.eps * sol.params.eps);
    let density = sol.u1().map(|u| {
        let a = u.exp();
        k * a * (1.0 - a)
    });
    ball_integral(&density, q, d)
}
