//! Uniform cell-centered mesh on `[0, 1]` with even-reflection ghost cells.
//!
//! Faces are indexed `0..=n`, face `j` sitting at `x = j·dx` between cells
//! `j−1` and `j`. Boundary faces carry zero flux.

use crate::error::{Error, Result};

/// Ghost cells per side.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    n: usize,
    dx: f64,
}

impl Mesh {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::Argument(format!("mesh needs at least 8 cells, got {n}")));
        }
        Ok(Self { n, dx: 1.0 / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.center(j)).collect()
    }

    pub fn face(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// Samples `f` at cell centers.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            mesh: *self,
            values: self.centers().into_iter().map(f).collect(),
        }
    }
}

/// Cell-centered values on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Mesh,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n() {
            return Err(Error::Argument(format!(
                "field has {} values on a mesh of {} cells",
                values.len(),
                mesh.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("field values must be finite".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Mesh, c: f64) -> Self {
        Self {
            mesh,
            values: vec![c; mesh.n()],
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Midpoint-rule integral `Σ f_j dx`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.mesh.dx
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ghost_extend(&self) -> Vec<f64> {
        ghost_extend(&self.values)
    }

    pub fn d1_face(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len() + 1];
        d1_face(&self.values, self.mesh.dx, &mut out);
        out
    }

    pub fn d3_face(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len() + 1];
        d3_face(&self.values, self.mesh.dx, &mut out);
        out
    }

    pub fn laplacian_cell(&self) -> Field {
        let mut out = vec![0.0; self.values.len()];
        laplacian_cell(&self.values, self.mesh.dx, &mut out);
        Field {
            mesh: self.mesh,
            values: out,
        }
    }
}

/// `[f_1, f_0, f_0, …, f_{n−1}, f_{n−1}, f_{n−2}]`: two mirrored ghosts per side.
pub fn ghost_extend(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut g = Vec::with_capacity(n + 2 * GHOSTS);
    g.push(f[1]);
    g.push(f[0]);
    g.extend_from_slice(f);
    g.push(f[n - 1]);
    g.push(f[n - 2]);
    g
}

/// `(f_j − f_{j−1})/dx` on interior faces, zero on the boundary faces.
pub fn d1_face(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n + 1);
    out[0] = 0.0;
    out[n] = 0.0;
    for j in 1..n {
        out[j] = (f[j] - f[j - 1]) / dx;
    }
}

/// `(f_{j+1} − 3f_j + 3f_{j−1} − f_{j−2})/dx³` with reflected ghosts; the
/// boundary faces vanish identically under the reflection.
pub fn d3_face(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n + 1);
    let at = |i: isize| -> f64 {
        if i < 0 {
            f[(-i - 1) as usize]
        } else if i >= n as isize {
            f[2 * n - 1 - i as usize]
        } else {
            f[i as usize]
        }
    };
    let dx3 = dx * dx * dx;
    out[0] = 0.0;
    out[n] = 0.0;
    for j in 1..n {
        let j = j as isize;
        // Grouped as differences so constants give exactly zero.
        out[j as usize] = ((at(j + 1) - at(j - 2)) - 3.0 * (at(j) - at(j - 1))) / dx3;
    }
}

/// `(f_{j−1} − 2f_j + f_{j+1})/dx²` with reflected ghosts.
pub fn laplacian_cell(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert_eq!(out.len(), n);
    let dx2 = dx * dx;
    for j in 0..n {
        let left = if j == 0 { f[0] } else { f[j - 1] };
        let right = if j + 1 == n { f[n - 1] } else { f[j + 1] };
        out[j] = (left - 2.0 * f[j] + right) / dx2;
    }
}

/// `(F_{j+1} − F_j)/dx`: cell divergence of a face array.
pub fn divergence(faces: &[f64], dx: f64, out: &mut [f64]) {
    debug_assert_eq!(faces.len(), out.len() + 1);
    for (j, o) in out.iter_mut().enumerate() {
        *o = (faces[j + 1] - faces[j]) / dx;
    }
}
