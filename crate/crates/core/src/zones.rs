//! Confidence zones for `θ` obtained by inverting the Watson or Wald test
//! over a spherical grid, with their connected components.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{knn_adjacency, sphere_grid, UnitVector};
use crate::sampling::{Summarized, Summary};
use crate::specfn::chi2_quantile;
use crate::stats::{spherical_mean, wald_statistic, watson_statistic, TestKind, DEGENERACY_TOL};

/// Below this many grid points `cmd_zone` warns that the zone is coarse.
pub const COARSE_RESOLUTION: usize = 1000;

/// Components whose point counts on the two sides of `θ̂'θ = 0` differ by
/// at most this fraction of their size count as balanced (and are kept by
/// [`preferred_component`]).
pub const BALANCE_TOL: f64 = 0.05;

/// Neighbours per grid point in the component graph.
pub fn grid_neighbours(p: usize) -> usize {
    if p == 2 {
        2
    } else {
        6
    }
}

#[derive(Debug, Clone)]
pub struct ConfidenceZone {
    grid: Vec<UnitVector>,
    member: Vec<bool>,
    /// `None` where the statistic is undefined (such points are members).
    statistics: Vec<Option<f64>>,
    level: f64,
    test: TestKind,
    critical_value: f64,
    theta_hat: UnitVector,
    summary: Summary,
    components: Vec<Vec<usize>>,
    preferred: Vec<usize>,
}

fn zone_statistic(test: TestKind, s: &Summary, theta: &UnitVector) -> Result<Option<f64>> {
    let value = match test {
        TestKind::Watson => watson_statistic(s, theta),
        TestKind::Wald => wald_statistic(s, theta),
        other => {
            return Err(Error::domain(format!(
                "zones invert the watson or wald test, not {other}"
            )))
        }
    };
    match value {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateDenominator { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Grid points `θ` with `statistic(θ) <= χ²_{p-1, level}`.
pub fn invert_test<S: Summarized + ?Sized>(
    sample: &S,
    test: TestKind,
    level: f64,
    resolution: usize,
) -> Result<ConfidenceZone> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    let summary = sample.summary().into_owned();
    let p = summary.dim();
    let theta_hat = spherical_mean(&summary)?;
    let grid = sphere_grid(p, resolution)?.into_points();
    let critical_value = chi2_quantile(level, p as u32 - 1)?;
    let statistics = grid
        .par_iter()
        .map(|theta| zone_statistic(test, &summary, theta))
        .collect::<Result<Vec<_>>>()?;
    let member = statistics
        .iter()
        .map(|s| s.map_or(true, |v| v <= critical_value))
        .collect();
    let mut zone = ConfidenceZone {
        grid,
        member,
        statistics,
        level,
        test,
        critical_value,
        theta_hat,
        summary,
        components: Vec::new(),
        preferred: Vec::new(),
    };
    zone.components = connected_components(&zone);
    zone.preferred = preferred_component(&zone, &zone.theta_hat.clone());
    Ok(zone)
}

impl ConfidenceZone {
    pub fn grid(&self) -> &[UnitVector] {
        &self.grid
    }

    pub fn member(&self) -> &[bool] {
        &self.member
    }

    pub fn statistics(&self) -> &[Option<f64>] {
        &self.statistics
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn test(&self) -> TestKind {
        self.test
    }

    pub fn critical_value(&self) -> f64 {
        self.critical_value
    }

    pub fn theta_hat(&self) -> &UnitVector {
        &self.theta_hat
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn preferred(&self) -> &[usize] {
        &self.preferred
    }

    pub fn member_count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    /// Applies the membership rule at an arbitrary `θ`.
    pub fn contains(&self, theta: &UnitVector) -> Result<bool> {
        Ok(zone_statistic(self.test, &self.summary, theta)?
            .map_or(true, |v| v <= self.critical_value))
    }

    /// Zone with the same sample and test at another level, on a grid of the
    /// same resolution.
    pub fn at_level(&self, level: f64) -> Result<ConfidenceZone> {
        invert_test(&self.summary, self.test, level, self.grid.len())
    }

    /// `theta_x,theta_y[,theta_z],member,component_id,preferred`;
    /// `component_id` is -1 off the zone.
    pub fn to_csv(&self) -> String {
        let p = self.theta_hat.dim();
        let axes = ["theta_x", "theta_y", "theta_z"];
        let mut out = axes[..p.min(3)].join(",");
        out.push_str(",member,component_id,preferred\n");
        let mut comp_id = vec![-1i64; self.grid.len()];
        for (c, comp) in self.components.iter().enumerate() {
            for &i in comp {
                comp_id[i] = c as i64;
            }
        }
        let mut preferred = vec![false; self.grid.len()];
        for &i in &self.preferred {
            preferred[i] = true;
        }
        for (i, pt) in self.grid.iter().enumerate() {
            for v in pt.iter() {
                let _ = write!(out, "{v:.8},");
            }
            let _ = writeln!(
                out,
                "{},{},{}",
                u8::from(self.member[i]),
                comp_id[i],
                u8::from(preferred[i])
            );
        }
        out
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Components of the member points under the grid's k-nearest-neighbour
/// graph, each sorted, ordered by their smallest index.
pub fn connected_components(zone: &ConfidenceZone) -> Vec<Vec<usize>> {
    let n = zone.grid.len();
    if zone.member_count() == 0 {
        return Vec::new();
    }
    let adj = knn_adjacency(&zone.grid, grid_neighbours(zone.theta_hat.dim()));
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        if !zone.member[i] {
            continue;
        }
        for &j in &adj[i] {
            if zone.member[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut index_of_root = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if !zone.member[i] {
            continue;
        }
        let root = find(&mut parent, i);
        if index_of_root[root] == usize::MAX {
            index_of_root[root] = comps.len();
            comps.push(Vec::new());
        }
        comps[index_of_root[root]].push(i);
    }
    comps
}

/// Union of the components on the side of `θ̂`: a component is kept when
/// it has at least as many points with `θ'θ̂ > 0` as with `θ'θ̂ < 0`, up to
/// [`BALANCE_TOL`] of its size.
pub fn preferred_component(zone: &ConfidenceZone, theta_hat: &UnitVector) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for comp in &zone.components {
        let (mut pos, mut neg) = (0usize, 0usize);
        for &i in comp {
            let c = theta_hat.dot(&zone.grid[i]);
            if c > DEGENERACY_TOL {
                pos += 1;
            } else if c < -DEGENERACY_TOL {
                neg += 1;
            }
        }
        if pos as f64 + BALANCE_TOL * comp.len() as f64 >= neg as f64 {
            out.extend_from_slice(comp);
        }
    }
    out.sort_unstable();
    out
}

/// Member count over grid size.
pub fn zone_area_fraction(zone: &ConfidenceZone) -> f64 {
    zone.member_count() as f64 / zone.grid.len() as f64
}
