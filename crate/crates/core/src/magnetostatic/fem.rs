//! Bilinear finite elements for `div(mu grad phi) = 0` in axisymmetric
//! coordinates, with `H = -grad phi` and `B = mu0 mu_r H`.

use crate::constants::MU_0;

use super::band::SymBand;
use super::mesh::QuadMesh;
use super::MagneticError;

/// Relative residual the linear solve must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 8;

const GAUSS: [(f64, f64); 4] = {
    let g = 0.577_350_269_189_625_8;
    [(-g, -g), (g, -g), (g, g), (-g, g)]
};
const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Shape-function gradients and integration weight at one point.
struct PointEval {
    r: f64,
    z: f64,
    /// |det J| * r
    weight: f64,
    grad: [[f64; 2]; 4],
}

fn eval_point(coords: &[[f64; 2]; 4], xi: f64, eta: f64) -> Option<PointEval> {
    let mut n = [0.0; 4];
    let mut dxi = [0.0; 4];
    let mut deta = [0.0; 4];
    for (a, &(xa, ea)) in CORNERS.iter().enumerate() {
        n[a] = 0.25 * (1.0 + xi * xa) * (1.0 + eta * ea);
        dxi[a] = 0.25 * xa * (1.0 + eta * ea);
        deta[a] = 0.25 * ea * (1.0 + xi * xa);
    }
    let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
    let (mut r, mut z) = (0.0, 0.0);
    for a in 0..4 {
        j11 += dxi[a] * coords[a][0];
        j12 += dxi[a] * coords[a][1];
        j21 += deta[a] * coords[a][0];
        j22 += deta[a] * coords[a][1];
        r += n[a] * coords[a][0];
        z += n[a] * coords[a][1];
    }
    let det = j11 * j22 - j12 * j21;
    if det.abs() < 1e-300 {
        return None;
    }
    let mut grad = [[0.0; 2]; 4];
    for a in 0..4 {
        grad[a][0] = (j22 * dxi[a] - j12 * deta[a]) / det;
        grad[a][1] = (-j21 * dxi[a] + j11 * deta[a]) / det;
    }
    Some(PointEval {
        r,
        z,
        weight: det.abs() * r,
        grad,
    })
}

fn element_coords(mesh: &QuadMesh, e: usize) -> [[f64; 2]; 4] {
    let el = &mesh.elements[e];
    [mesh.nodes[el[0]], mesh.nodes[el[1]], mesh.nodes[el[2]], mesh.nodes[el[3]]]
}

/// Flux density at one Gauss point with its axisymmetric volume weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub r: f64,
    pub z: f64,
    pub weight: f64,
    pub b_r: f64,
    pub b_z: f64,
}

#[derive(Debug, Clone)]
pub struct PotentialSolution {
    pub potential: Vec<f64>,
    pub relative_residual: f64,
    pub refinement_steps: usize,
    pub bandwidth: usize,
    pub free_dofs: usize,
}

/// Potential of the uniform axial field `H0` with zero at `z_ref`.
pub fn applied_potential(h0: f64, z: f64, z_ref: f64) -> f64 {
    -h0 * (z - z_ref)
}

/// Solves for the nodal scalar potential with Dirichlet data
/// `-H0 (z - z_ref)` on the flagged nodes.
pub fn solve_potential(mesh: &QuadMesh, h0: f64, z_ref: f64) -> Result<PotentialSolution, MagneticError> {
    let n = mesh.nodes.len();
    let mut free_index = vec![usize::MAX; n];
    let mut free = 0;
    for (i, &d) in mesh.dirichlet.iter().enumerate() {
        if !d {
            free_index[i] = free;
            free += 1;
        }
    }
    let mut potential: Vec<f64> = mesh
        .nodes
        .iter()
        .zip(&mesh.dirichlet)
        .map(|(p, &d)| if d { applied_potential(h0, p[1], z_ref) } else { 0.0 })
        .collect();
    if free == 0 {
        return Ok(PotentialSolution {
            potential,
            relative_residual: 0.0,
            refinement_steps: 0,
            bandwidth: 0,
            free_dofs: 0,
        });
    }

    let mut bandwidth = 0;
    for el in &mesh.elements {
        let ids: Vec<usize> = el.iter().map(|&k| free_index[k]).filter(|&k| k != usize::MAX).collect();
        if let (Some(lo), Some(hi)) = (ids.iter().min(), ids.iter().max()) {
            bandwidth = bandwidth.max(hi - lo);
        }
    }

    let mut matrix = SymBand::zeros(free, bandwidth);
    let mut rhs = vec![0.0; free];
    for e in 0..mesh.elements.len() {
        let coords = element_coords(mesh, e);
        let mu = mesh.element_mu[e];
        let mut ke = [[0.0; 4]; 4];
        for &(xi, eta) in &GAUSS {
            let p = eval_point(&coords, xi, eta)
                .ok_or_else(|| MagneticError::MeshFailure(format!("element {e} is degenerate")))?;
            for a in 0..4 {
                for b in 0..4 {
                    ke[a][b] += mu * p.weight * (p.grad[a][0] * p.grad[b][0] + p.grad[a][1] * p.grad[b][1]);
                }
            }
        }
        let el = &mesh.elements[e];
        for a in 0..4 {
            let ia = free_index[el[a]];
            if ia == usize::MAX {
                continue;
            }
            for b in 0..4 {
                let ib = free_index[el[b]];
                if ib == usize::MAX {
                    rhs[ia] -= ke[a][b] * potential[el[b]];
                } else if ib <= ia {
                    matrix.add(ia, ib, ke[a][b]);
                }
            }
        }
    }
    // Pairs are split by global index, so collapsed elements (two local
    // nodes on one dof) still contribute their full local sum.

    let b_norm = norm(&rhs);
    let factor = matrix
        .clone()
        .cholesky()
        .map_err(|e| MagneticError::SolverDivergence(format!("non-positive pivot {} at row {}", e.pivot, e.row)))?;
    let mut x = factor.solve(&rhs);
    let mut steps = 0;
    let mut rel = relative_residual(&matrix, &x, &rhs, b_norm);
    while rel > 1e-3 * RESIDUAL_TOLERANCE && steps < MAX_REFINEMENT_STEPS {
        let ax = matrix.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = factor.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
        let next = relative_residual(&matrix, &candidate, &rhs, b_norm);
        steps += 1;
        if next >= rel {
            break;
        }
        x = candidate;
        rel = next;
    }
    if !(rel < RESIDUAL_TOLERANCE) {
        return Err(MagneticError::SolverDivergence(format!(
            "relative residual {rel:e} above {RESIDUAL_TOLERANCE:e}"
        )));
    }
    for (i, slot) in free_index.iter().enumerate() {
        if *slot != usize::MAX {
            potential[i] = x[*slot];
        }
    }
    Ok(PotentialSolution {
        potential,
        relative_residual: rel,
        refinement_steps: steps,
        bandwidth,
        free_dofs: free,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &SymBand, x: &[f64], b: &[f64], b_norm: f64) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        r
    } else {
        r / b_norm
    }
}

/// Flux density samples at the 2x2 Gauss points of every element, grouped
/// four per element.
pub fn gauss_samples(mesh: &QuadMesh, potential: &[f64]) -> Vec<FieldSample> {
    let mut out = Vec::with_capacity(4 * mesh.elements.len());
    for e in 0..mesh.elements.len() {
        let coords = element_coords(mesh, e);
        let el = &mesh.elements[e];
        let mu = mesh.element_mu[e];
        for &(xi, eta) in &GAUSS {
            let p = eval_point(&coords, xi, eta).expect("mesh was checked during assembly");
            let (b_r, b_z) = flux(&p, el, potential, mu);
            out.push(FieldSample {
                r: p.r,
                z: p.z,
                weight: p.weight,
                b_r,
                b_z,
            });
        }
    }
    out
}

fn flux(p: &PointEval, el: &[usize; 4], potential: &[f64], mu: f64) -> (f64, f64) {
    let (mut gr, mut gz) = (0.0, 0.0);
    for a in 0..4 {
        gr += p.grad[a][0] * potential[el[a]];
        gz += p.grad[a][1] * potential[el[a]];
    }
    (-MU_0 * mu * gr, -MU_0 * mu * gz)
}

/// Nodal flux density: mean of the centroid values of the adjacent
/// elements. On the axis the even extension in r cancels `B_r`.
pub fn nodal_flux(mesh: &QuadMesh, potential: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.nodes.len();
    let mut br = vec![0.0; n];
    let mut bz = vec![0.0; n];
    let mut count = vec![0usize; n];
    for e in 0..mesh.elements.len() {
        let coords = element_coords(mesh, e);
        let el = &mesh.elements[e];
        let p = eval_point(&coords, 0.0, 0.0).expect("mesh was checked during assembly");
        let (b_r, b_z) = flux(&p, el, potential, mesh.element_mu[e]);
        let mut seen = [usize::MAX; 4];
        for (k, &node) in el.iter().enumerate() {
            if seen[..k].contains(&node) {
                continue;
            }
            seen[k] = node;
            br[node] += b_r;
            bz[node] += b_z;
            count[node] += 1;
        }
    }
    for i in 0..n {
        if count[i] > 0 {
            br[i] /= count[i] as f64;
            bz[i] /= count[i] as f64;
        }
        if mesh.nodes[i][0] == 0.0 {
            br[i] = 0.0;
        }
    }
    (br, bz)
}
