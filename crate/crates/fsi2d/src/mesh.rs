//! Structured reference meshes for the channel and the thick wall.
//!
//! Both domains are rectangles meshed with tensor-product quadrilaterals:
//! the fluid occupies `(0,L) x (0,R)`, the thick wall `(0,L) x (R,R+H)`.
//! Velocity and displacement use the 9-node biquadratic grid, pressure the
//! 4-node bilinear grid. The two meshes share the identical partition of
//! `(0,L)` along the interface, so all traces are quadratic and conforming
//! with the thin-wall grid.

use crate::error::{Error, Result};

/// Geometry and resolution of the two reference domains.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Channel length L.
    pub length: f64,
    /// Reference radius R (height of the fluid rectangle).
    pub radius: f64,
    /// Thick-wall thickness H.
    pub thickness: f64,
    /// Element count along the channel (shared by fluid, solid and thin wall).
    pub nz: usize,
    /// Radial element count of the fluid mesh.
    pub nr_fluid: usize,
    /// Radial element count of the solid mesh.
    pub nr_solid: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            length: 1.0,
            radius: 1.0,
            thickness: 1.0,
            nz: 8,
            nr_fluid: 8,
            nr_solid: 2,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.length > 0.0) {
            errs.push(format!("geometry.length must be > 0, got {}", self.length));
        }
        if !(self.radius > 0.0) {
            errs.push(format!("geometry.radius must be > 0, got {}", self.radius));
        }
        if !(self.thickness > 0.0) {
            errs.push(format!(
                "geometry.thickness must be > 0, got {}",
                self.thickness
            ));
        }
        if self.nz < 2 {
            errs.push(format!("geometry.nz must be >= 2, got {}", self.nz));
        }
        if self.nr_fluid < 2 {
            errs.push(format!(
                "geometry.nr_fluid must be >= 2, got {}",
                self.nr_fluid
            ));
        }
        if self.nr_solid < 1 {
            errs.push(format!(
                "geometry.nr_solid must be >= 1, got {}",
                self.nr_solid
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Number of nodes on the quadratic interface grid, `2*nz + 1`.
    pub fn n_interface_nodes(&self) -> usize {
        2 * self.nz + 1
    }
}

/// Boundary membership bitmask. A corner node carries every tag of the
/// boundaries it lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tags(pub u8);

impl Tags {
    /// Fluid-structure interface (fluid top edge / solid bottom edge).
    pub const INTERFACE: Tags = Tags(1);
    /// Symmetry axis of the channel (fluid bottom edge).
    pub const AXIS: Tags = Tags(2);
    /// Fluid inlet, z = 0.
    pub const INLET: Tags = Tags(4);
    /// Fluid outlet, z = L.
    pub const OUTLET: Tags = Tags(8);
    /// Exposed top edge of the thick wall.
    pub const EXTERNAL: Tags = Tags(16);
    /// Clamped lateral end of the thick wall at z = 0.
    pub const SOLID_END_IN: Tags = Tags(32);
    /// Clamped lateral end of the thick wall at z = L.
    pub const SOLID_END_OUT: Tags = Tags(64);

    #[inline]
    pub fn contains(&self, other: Tags) -> bool {
        self.0 & other.0 == other.0
    }

    #[inline]
    pub fn insert(&mut self, other: Tags) {
        self.0 |= other.0;
    }
}

/// A structured tensor-product quadrilateral mesh with biquadratic and
/// bilinear node families.
///
/// Degree-of-freedom conventions used everywhere downstream:
/// - vector fields on the biquadratic grid: dof `2*node + c`, `c = 0` for the
///   z-component and `c = 1` for the r-component;
/// - scalar pressure on the bilinear grid: dof = node index.
#[derive(Debug, Clone)]
pub struct FemMesh {
    /// Element counts (z, r).
    pub nz: usize,
    pub nr: usize,
    /// Lower-left corner of the rectangle.
    pub origin: (f64, f64),
    /// Element edge lengths.
    pub hz: f64,
    pub hr: f64,
    /// Biquadratic grid: `(2nz+1) * (2nr+1)` node coordinates, z fastest.
    pub q2_nodes: Vec<(f64, f64)>,
    /// 9-node connectivity per element, tensor-product local ordering.
    pub q2_elems: Vec<[usize; 9]>,
    /// Bilinear grid: `(nz+1) * (nr+1)` node coordinates.
    pub q1_nodes: Vec<(f64, f64)>,
    /// 4-node connectivity per element.
    pub q1_elems: Vec<[usize; 4]>,
    pub q2_tags: Vec<Tags>,
    pub q1_tags: Vec<Tags>,
}

impl FemMesh {
    fn build(
        origin: (f64, f64),
        lz: f64,
        lr: f64,
        nz: usize,
        nr: usize,
        tag_of: impl Fn(usize, usize, usize, usize) -> Tags,
    ) -> FemMesh {
        let hz = lz / nz as f64;
        let hr = lr / nr as f64;
        let (w2, h2) = (2 * nz + 1, 2 * nr + 1);
        let mut q2_nodes = Vec::with_capacity(w2 * h2);
        let mut q2_tags = Vec::with_capacity(w2 * h2);
        for j in 0..h2 {
            for i in 0..w2 {
                q2_nodes.push((
                    origin.0 + 0.5 * hz * i as f64,
                    origin.1 + 0.5 * hr * j as f64,
                ));
                q2_tags.push(tag_of(i, w2 - 1, j, h2 - 1));
            }
        }
        let mut q2_elems = Vec::with_capacity(nz * nr);
        for ej in 0..nr {
            for ei in 0..nz {
                let mut conn = [0usize; 9];
                for b in 0..3 {
                    for a in 0..3 {
                        conn[3 * b + a] = (2 * ej + b) * w2 + (2 * ei + a);
                    }
                }
                q2_elems.push(conn);
            }
        }
        let (w1, h1) = (nz + 1, nr + 1);
        let mut q1_nodes = Vec::with_capacity(w1 * h1);
        let mut q1_tags = Vec::with_capacity(w1 * h1);
        for j in 0..h1 {
            for i in 0..w1 {
                q1_nodes.push((origin.0 + hz * i as f64, origin.1 + hr * j as f64));
                q1_tags.push(tag_of(i, w1 - 1, j, h1 - 1));
            }
        }
        let mut q1_elems = Vec::with_capacity(nz * nr);
        for ej in 0..nr {
            for ei in 0..nz {
                q1_elems.push([
                    ej * w1 + ei,
                    ej * w1 + ei + 1,
                    (ej + 1) * w1 + ei,
                    (ej + 1) * w1 + ei + 1,
                ]);
            }
        }
        FemMesh {
            nz,
            nr,
            origin,
            hz,
            hr,
            q2_nodes,
            q2_elems,
            q1_nodes,
            q1_elems,
            q2_tags,
            q1_tags,
        }
    }

    pub fn n_q2_nodes(&self) -> usize {
        self.q2_nodes.len()
    }

    pub fn n_q1_nodes(&self) -> usize {
        self.q1_nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.q2_elems.len()
    }

    /// Biquadratic node index at grid position `(i, j)`, z index fastest.
    pub fn q2_index(&self, i: usize, j: usize) -> usize {
        j * (2 * self.nz + 1) + i
    }

    pub fn elem_area(&self) -> f64 {
        self.hz * self.hr
    }

    /// Total mesh area (number of elements times element area).
    pub fn total_area(&self) -> f64 {
        self.n_elems() as f64 * self.elem_area()
    }
}

/// Builds the fluid reference mesh of `(0,L) x (0,R)`.
pub fn build_fluid_mesh(cfg: &GeometryConfig) -> Result<FemMesh> {
    cfg.validate()?;
    Ok(FemMesh::build(
        (0.0, 0.0),
        cfg.length,
        cfg.radius,
        cfg.nz,
        cfg.nr_fluid,
        |i, imax, j, jmax| {
            let mut t = Tags::default();
            if j == jmax {
                t.insert(Tags::INTERFACE);
            }
            if j == 0 {
                t.insert(Tags::AXIS);
            }
            if i == 0 {
                t.insert(Tags::INLET);
            }
            if i == imax {
                t.insert(Tags::OUTLET);
            }
            t
        },
    ))
}

/// Builds the solid reference mesh of `(0,L) x (R,R+H)`.
pub fn build_solid_mesh(cfg: &GeometryConfig) -> Result<FemMesh> {
    cfg.validate()?;
    Ok(FemMesh::build(
        (0.0, cfg.radius),
        cfg.length,
        cfg.thickness,
        cfg.nz,
        cfg.nr_solid,
        |i, imax, j, jmax| {
            let mut t = Tags::default();
            if j == 0 {
                t.insert(Tags::INTERFACE);
            }
            if j == jmax {
                t.insert(Tags::EXTERNAL);
            }
            if i == 0 {
                t.insert(Tags::SOLID_END_IN);
            }
            if i == imax {
                t.insert(Tags::SOLID_END_OUT);
            }
            t
        },
    ))
}

/// Identification of the three coincident trace grids along the interface:
/// the fluid radial-velocity trace, the thin-wall grid, and the radial
/// component of the thick-wall bottom trace. One entry per interface node,
/// left to right, including quadratic midside nodes.
#[derive(Debug, Clone)]
pub struct InterfaceMaps {
    /// Fluid u_r dof at interface node k.
    pub fluid_radial_dof: Vec<usize>,
    /// Thin-wall dof (node index on the 1D interface grid).
    pub thin_dof: Vec<usize>,
    /// Solid d_r dof at the matching bottom-trace node.
    pub solid_radial_dof: Vec<usize>,
    /// Solid d_z dofs pinned to zero along the whole bottom trace.
    pub pinned_solid_z: Vec<usize>,
    /// True at the two clamped end nodes (z = 0 and z = L).
    pub dirichlet: Vec<bool>,
    /// Interface node coordinates along z.
    pub z: Vec<f64>,
}

impl InterfaceMaps {
    pub fn n_nodes(&self) -> usize {
        self.thin_dof.len()
    }
}

/// Matches the fluid trace, thin-wall and solid trace grids node by node.
/// The partitions must agree to 1e-12 in absolute coordinates.
pub fn build_interface_maps(fluid: &FemMesh, solid: &FemMesh) -> Result<InterfaceMaps> {
    let n = 2 * fluid.nz + 1;
    if 2 * solid.nz + 1 != n {
        return Err(Error::Mesh(format!(
            "interface partitions differ: fluid has {} nodes, solid {}",
            n,
            2 * solid.nz + 1
        )));
    }
    let mut maps = InterfaceMaps {
        fluid_radial_dof: Vec::with_capacity(n),
        thin_dof: Vec::with_capacity(n),
        solid_radial_dof: Vec::with_capacity(n),
        pinned_solid_z: Vec::with_capacity(n),
        dirichlet: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
    };
    let jf = 2 * fluid.nr; // fluid top row
    for k in 0..n {
        let fnode = fluid.q2_index(k, jf);
        let snode = solid.q2_index(k, 0);
        let (zf, rf) = fluid.q2_nodes[fnode];
        let (zs, rs) = solid.q2_nodes[snode];
        if (zf - zs).abs() > 1e-12 || (rf - rs).abs() > 1e-12 {
            return Err(Error::Mesh(format!(
                "interface node {k} mismatch: fluid ({zf}, {rf}) vs solid ({zs}, {rs})"
            )));
        }
        maps.fluid_radial_dof.push(2 * fnode + 1);
        maps.thin_dof.push(k);
        maps.solid_radial_dof.push(2 * snode + 1);
        maps.pinned_solid_z.push(2 * snode);
        maps.dirichlet.push(k == 0 || k == n - 1);
        maps.z.push(zf);
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nz: usize, nr_fluid: usize, nr_solid: usize) -> GeometryConfig {
        GeometryConfig {
            nz,
            nr_fluid,
            nr_solid,
            ..GeometryConfig::default()
        }
    }

    #[test]
    fn fluid_mesh_counts() {
        let m = build_fluid_mesh(&cfg(2, 2, 1)).unwrap();
        assert_eq!(m.n_elems(), 4);
        assert_eq!(m.n_q2_nodes(), 25);
        assert_eq!(m.n_q1_nodes(), 9);
    }

    #[test]
    fn below_minimum_counts_rejected() {
        assert!(build_fluid_mesh(&cfg(1, 2, 1)).is_err());
        assert!(build_fluid_mesh(&cfg(2, 1, 1)).is_err());
        assert!(build_solid_mesh(&cfg(2, 2, 0)).is_err());
    }

    #[test]
    fn interface_trace_node_count() {
        let m = build_fluid_mesh(&cfg(8, 8, 1)).unwrap();
        let count = m
            .q2_tags
            .iter()
            .filter(|t| t.contains(Tags::INTERFACE))
            .count();
        assert_eq!(count, 17);
    }

    #[test]
    fn solid_mesh_spans_radius_to_radius_plus_thickness() {
        let m = build_solid_mesh(&cfg(2, 2, 1)).unwrap();
        assert_eq!(m.n_elems(), 2);
        let rs: Vec<f64> = m.q2_nodes.iter().map(|n| n.1).collect();
        let rmin = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((rmin - 1.0).abs() < 1e-15 && (rmax - 2.0).abs() < 1e-15);
    }

    #[test]
    fn areas_sum_to_rectangle() {
        let c = cfg(5, 3, 2);
        let f = build_fluid_mesh(&c).unwrap();
        let s = build_solid_mesh(&c).unwrap();
        assert!((f.total_area() - c.length * c.radius).abs() < 1e-12 * c.length * c.radius);
        assert!((s.total_area() - c.length * c.thickness).abs() < 1e-12);
    }

    #[test]
    fn interface_maps_are_a_bijection_with_clamped_ends() {
        let c = cfg(2, 2, 1);
        let f = build_fluid_mesh(&c).unwrap();
        let s = build_solid_mesh(&c).unwrap();
        let maps = build_interface_maps(&f, &s).unwrap();
        assert_eq!(maps.n_nodes(), 5);
        assert_eq!(maps.dirichlet.iter().filter(|d| **d).count(), 2);
        // round trip fluid trace -> thin -> solid trace -> back is the identity
        for k in 0..maps.n_nodes() {
            assert_eq!(maps.thin_dof[k], k);
            let fd = maps.fluid_radial_dof[k];
            let sd = maps.solid_radial_dof[k];
            assert_eq!(maps.fluid_radial_dof.iter().position(|&d| d == fd), Some(k));
            assert_eq!(maps.solid_radial_dof.iter().position(|&d| d == sd), Some(k));
        }
        // every bottom d_z dof is pinned
        assert_eq!(maps.pinned_solid_z.len(), 5);
        for (k, &dz) in maps.pinned_solid_z.iter().enumerate() {
            let node = s.q2_index(k, 0);
            assert_eq!(dz, 2 * node);
        }
    }

    #[test]
    fn perturbed_interface_coordinates_rejected() {
        let c = cfg(2, 2, 1);
        let f = build_fluid_mesh(&c).unwrap();
        let mut s = build_solid_mesh(&c).unwrap();
        let node = s.q2_index(1, 0);
        s.q2_nodes[node].0 += 1e-6;
        assert!(build_interface_maps(&f, &s).is_err());
    }
}
