//! Structured quadrilateral meshes of the (r, z) half plane.
//!
//! Cylinder scenarios use a rectilinear grid whose lines pass through every
//! wall face and every evaluation-region edge, so each element lies in a
//! single material. The grid is uniform at the requested size around the
//! shells and grows geometrically towards the far boundary.
//!
//! The spherical-shell mesh is polar, with the innermost ring collapsed onto
//! the origin.

use serde::{Deserialize, Serialize};

use crate::model::{MagneticScenario, Rect};

use super::MagneticError;

/// Upper bound on element count before meshing is refused.
pub const MAX_ELEMENTS: usize = 400_000;

/// Minimum number of elements through any wall.
pub const MIN_CELLS_PER_WALL: usize = 2;

/// Growth ratio of the graded far-field cells.
pub const GROWTH_RATIO: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredGrid {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QuadMesh {
    /// (r, z) coordinates.
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
    pub element_mu: Vec<f64>,
    /// Nodes carrying the applied-field potential.
    pub dirichlet: Vec<bool>,
    /// Set for rectilinear meshes; node (i, j) of the grid is
    /// `nodes[j * r.len() + i]`.
    pub grid: Option<StructuredGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub element_count: usize,
    pub node_count: usize,
    pub max_element_size_m: f64,
    pub min_element_size_m: f64,
}

impl QuadMesh {
    pub fn stats(&self) -> MeshStats {
        let mut max_h: f64 = 0.0;
        let mut min_h = f64::INFINITY;
        for el in &self.elements {
            for k in 0..4 {
                let a = self.nodes[el[k]];
                let b = self.nodes[el[(k + 1) % 4]];
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                if len > 0.0 {
                    max_h = max_h.max(len);
                    min_h = min_h.min(len);
                }
            }
        }
        MeshStats {
            element_count: self.elements.len(),
            node_count: self.nodes.len(),
            max_element_size_m: max_h,
            min_element_size_m: min_h,
        }
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let el = &self.elements[e];
        let mut c = [0.0; 2];
        for &n in el {
            c[0] += 0.25 * self.nodes[n][0];
            c[1] += 0.25 * self.nodes[n][1];
        }
        c
    }
}

/// Uniform cells of at most `h` across `[a, b]`, at least `min_cells`.
fn uniform_cells(a: f64, b: f64, h: f64, min_cells: usize) -> Vec<f64> {
    let n = (((b - a) / h).ceil() as usize).max(min_cells).max(1);
    (1..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Cells growing from `h0` by `ratio` across `[a, b]`; the first cell
/// touches `a`. Sizes are rescaled to end exactly on `b`.
fn graded_cells(a: f64, b: f64, h0: f64, ratio: f64) -> Vec<f64> {
    let len = b - a;
    if len <= 0.0 {
        return Vec::new();
    }
    let mut sizes = Vec::new();
    let mut total = 0.0;
    let mut h = h0;
    while total < len {
        sizes.push(h);
        total += h;
        h *= ratio;
    }
    if sizes.len() > 1 && total - len > 0.5 * sizes[sizes.len() - 1] {
        let last = sizes.pop().unwrap();
        total -= last;
    }
    let scale = len / total;
    let mut out = Vec::with_capacity(sizes.len());
    let mut x = a;
    for s in sizes {
        x += s * scale;
        out.push(x);
    }
    *out.last_mut().unwrap() = b;
    out
}

fn sorted_breaks(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&last| x - last > tol) {
            out.push(x);
        }
    }
    out
}

/// Builds grid lines through `breaks` with uniform spacing inside
/// `[fine_lo, fine_hi]` and graded spacing outside it. `walls` lists
/// intervals that must get at least [`MIN_CELLS_PER_WALL`] cells.
fn axis_lines(
    lo: f64,
    hi: f64,
    fine_lo: f64,
    fine_hi: f64,
    breaks: &[f64],
    walls: &[(f64, f64)],
    h: f64,
) -> Vec<f64> {
    let tol = 1e-9 * (hi - lo).abs().max(1e-12);
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x >= fine_lo && x <= fine_hi)
        .collect();
    pts.push(fine_lo);
    pts.push(fine_hi);
    let pts = sorted_breaks(pts, tol);

    let mut lines = vec![fine_lo];
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let in_wall = walls
            .iter()
            .any(|&(w0, w1)| a >= w0 - tol && b <= w1 + tol);
        let min_cells = if in_wall { MIN_CELLS_PER_WALL } else { 1 };
        lines.extend(uniform_cells(a, b, h, min_cells));
    }
    // Far field above.
    let last = lines[lines.len() - 1] - lines[lines.len() - 2];
    lines.extend(graded_cells(fine_hi, hi, last.min(h), GROWTH_RATIO));
    // Far field below, mirrored.
    if fine_lo > lo {
        let first = lines[1] - lines[0];
        let below: Vec<f64> = graded_cells(0.0, fine_lo - lo, first.min(h), GROWTH_RATIO)
            .into_iter()
            .map(|d| fine_lo - d)
            .collect();
        let mut all: Vec<f64> = below.into_iter().rev().collect();
        all[0] = lo;
        all.extend(lines);
        return all;
    }
    lines
}

/// Rectilinear mesh for a cylinder scenario at its `mesh_size_m`.
pub fn cylinder_mesh(scenario: &MagneticScenario) -> Result<QuadMesh, MagneticError> {
    cylinder_mesh_with_size(scenario, scenario.mesh_size_m)
}

pub fn cylinder_mesh_with_size(scenario: &MagneticScenario, h: f64) -> Result<QuadMesh, MagneticError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MagneticError::MeshFailure(format!("element size {h} must be positive")));
    }
    let domain = scenario.domain;
    let mut r_breaks = vec![0.0];
    let mut z_breaks = vec![];
    let mut r_walls = vec![];
    let mut z_walls = vec![];
    for shell in &scenario.shells {
        let c = &shell.cylinder;
        r_breaks.extend([c.inner_radius(), c.outer_radius()]);
        r_walls.push((c.inner_radius(), c.outer_radius()));
        let (z0, z1, t) = (shell.bottom_z_m, shell.top_z(), c.wall_thickness_m);
        z_breaks.extend([z0, z0 + t, z1]);
        z_walls.push((z0, z0 + t));
        if c.has_lid {
            z_breaks.push(z1 - t);
            z_walls.push((z1 - t, z1));
        }
    }
    if let Some(region) = scenario.evaluation_region() {
        r_breaks.push(region.r_max);
        z_breaks.extend([region.z_min, region.z_max]);
    }

    let (r_fine, z_lo, z_hi) = if scenario.shells.is_empty() {
        let span = (domain.z_max_m - domain.z_min_m).min(domain.radius_m);
        let mid = 0.5 * (domain.z_max_m + domain.z_min_m);
        (0.25 * span, mid - 0.25 * span, mid + 0.25 * span)
    } else {
        let r_max = scenario
            .shells
            .iter()
            .map(|s| s.cylinder.outer_radius())
            .fold(0.0, f64::max);
        let z0 = scenario.shells.iter().map(|s| s.bottom_z_m).fold(f64::INFINITY, f64::min);
        let z1 = scenario.shells.iter().map(|s| s.top_z()).fold(f64::NEG_INFINITY, f64::max);
        // Fringing at the rims extends about one radius.
        let buffer = r_max;
        (r_max + 0.5 * buffer, z0 - buffer, z1 + buffer)
    };
    let r_fine = r_fine.min(domain.radius_m);
    let z_lo = z_lo.max(domain.z_min_m);
    let z_hi = z_hi.min(domain.z_max_m);

    let fine_cells = (r_fine / h) * ((z_hi - z_lo) / h);
    if !fine_cells.is_finite() || fine_cells > MAX_ELEMENTS as f64 {
        return Err(MagneticError::MeshFailure(format!(
            "element size {h} m needs more than {MAX_ELEMENTS} elements"
        )));
    }

    let r = axis_lines(0.0, domain.radius_m, 0.0, r_fine, &r_breaks, &r_walls, h);
    let z = axis_lines(domain.z_min_m, domain.z_max_m, z_lo, z_hi, &z_breaks, &z_walls, h);
    let (nr, nz) = (r.len(), z.len());
    if (nr - 1) * (nz - 1) > MAX_ELEMENTS {
        return Err(MagneticError::MeshFailure(format!(
            "element size {h} m needs {} elements (limit {MAX_ELEMENTS})",
            (nr - 1) * (nz - 1)
        )));
    }

    let mut nodes = Vec::with_capacity(nr * nz);
    let mut dirichlet = Vec::with_capacity(nr * nz);
    for (j, &zj) in z.iter().enumerate() {
        for (i, &ri) in r.iter().enumerate() {
            nodes.push([ri, zj]);
            dirichlet.push(i == nr - 1 || j == 0 || j == nz - 1);
        }
    }
    let parts: Vec<(Rect, f64)> = scenario
        .shells
        .iter()
        .flat_map(|s| s.solid_parts().into_iter().map(move |p| (p, s.relative_permeability)))
        .collect();
    let mut elements = Vec::with_capacity((nr - 1) * (nz - 1));
    let mut element_mu = Vec::with_capacity((nr - 1) * (nz - 1));
    for j in 0..nz - 1 {
        for i in 0..nr - 1 {
            let n0 = j * nr + i;
            elements.push([n0, n0 + 1, n0 + 1 + nr, n0 + nr]);
            let (rc, zc) = (0.5 * (r[i] + r[i + 1]), 0.5 * (z[j] + z[j + 1]));
            let mu = parts
                .iter()
                .find(|(p, _)| p.contains(rc, zc))
                .map_or(1.0, |&(_, mu)| mu);
            element_mu.push(mu);
        }
    }
    Ok(QuadMesh {
        nodes,
        elements,
        element_mu,
        dirichlet,
        grid: Some(StructuredGrid { r, z }),
    })
}

/// Polar mesh around a spherical shell `inner_radius..outer_radius` centred
/// at the origin, with the Dirichlet boundary on a sphere of
/// `domain_radius`. `h` is the target element size inside the shell region.
pub fn spherical_shell_mesh(
    inner_radius: f64,
    outer_radius: f64,
    mu_r: f64,
    domain_radius: f64,
    h: f64,
) -> Result<QuadMesh, MagneticError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MagneticError::MeshFailure(format!("element size {h} must be positive")));
    }
    let fine_hi = (outer_radius * 1.5).min(domain_radius);
    let walls = [(inner_radius, outer_radius)];
    let rho = axis_lines(
        0.0,
        domain_radius,
        0.0,
        fine_hi,
        &[0.0, inner_radius, outer_radius],
        &walls,
        h,
    );
    // Angular resolution follows the arc length at the shell.
    let n_theta = ((std::f64::consts::PI * outer_radius / h).ceil() as usize).max(16);
    if rho.len() * n_theta > MAX_ELEMENTS {
        return Err(MagneticError::MeshFailure(format!(
            "element size {h} m needs more than {MAX_ELEMENTS} elements"
        )));
    }
    let theta: Vec<f64> = (0..=n_theta)
        .map(|k| std::f64::consts::PI * k as f64 / n_theta as f64)
        .collect();
    let nt = theta.len();
    // Node 0 is the origin; ring k >= 1 occupies 1 + (k-1)*nt .. 1 + k*nt.
    let mut nodes = vec![[0.0, 0.0]];
    let mut dirichlet = vec![false];
    for (k, &p) in rho.iter().enumerate().skip(1) {
        for &t in &theta {
            nodes.push([p * t.sin().max(0.0), p * t.cos()]);
            dirichlet.push(k == rho.len() - 1);
        }
    }
    let id = |k: usize, j: usize| if k == 0 { 0 } else { 1 + (k - 1) * nt + j };
    let mut elements = Vec::new();
    let mut element_mu = Vec::new();
    for k in 0..rho.len() - 1 {
        for j in 0..nt - 1 {
            // Counter-clockwise in (r, z): theta grows from +z toward -z.
            elements.push([id(k, j), id(k, j + 1), id(k + 1, j + 1), id(k + 1, j)]);
            let mid = 0.5 * (rho[k] + rho[k + 1]);
            element_mu.push(if mid > inner_radius && mid < outer_radius { mu_r } else { 1.0 });
        }
    }
    Ok(QuadMesh {
        nodes,
        elements,
        element_mu,
        dirichlet,
        grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_cells_end_on_target_and_grow() {
        let cells = graded_cells(1.0, 3.0, 0.01, 1.2);
        assert_eq!(*cells.last().unwrap(), 3.0);
        let mut prev = 1.0;
        let mut prev_size = 0.0;
        for &c in &cells {
            let size = c - prev;
            assert!(size > prev_size);
            prev_size = size;
            prev = c;
        }
    }

    #[test]
    fn lines_hit_all_breaks_and_walls_are_split() {
        let lines = axis_lines(0.0, 1.0, 0.0, 0.05, &[0.0, 0.032, 0.033], &[(0.032, 0.033)], 0.002);
        for b in [0.032, 0.033] {
            assert!(lines.iter().any(|&x| (x - b).abs() < 1e-12));
        }
        let inside = lines.iter().filter(|&&x| x > 0.032 + 1e-12 && x < 0.033 - 1e-12).count();
        assert_eq!(inside, MIN_CELLS_PER_WALL - 1);
        assert_eq!(*lines.last().unwrap(), 1.0);
        assert!(lines.windows(2).all(|w| w[1] > w[0]));
    }
}
