//! Field snapshot files (CSV and legacy-ASCII VTK) and the run archive.
//!
//! Fluid data is written twice: on the reference grid and with physical
//! coordinates obtained from the interface displacement (the z column is
//! shared, the radial one stretches). Given identical state the files are
//! bit-identical across runs.

use crate::driver::{RunResult, Simulation, Snapshot};
use crate::energy::StageTag;
use crate::error::Result;
use crate::io::config::{OutputOptions, SnapshotFormat};
use crate::io::ledger::write_ledger_csv;
use crate::mesh::FemMesh;
use std::fmt::Write as _;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Bilinear pressure sampled at the biquadratic grid nodes.
pub fn pressure_on_q2_grid(mesh: &FemMesh, p: &[f64]) -> Vec<f64> {
    let w2 = 2 * mesh.nz + 1;
    let h2 = 2 * mesh.nr + 1;
    let w1 = mesh.nz + 1;
    let mut out = Vec::with_capacity(w2 * h2);
    for j in 0..h2 {
        for i in 0..w2 {
            let ei = (i / 2).min(mesh.nz - 1);
            let ej = (j / 2).min(mesh.nr - 1);
            let xi = i as f64 - 2.0 * ei as f64 - 1.0;
            let mu = j as f64 - 2.0 * ej as f64 - 1.0;
            let vals = crate::fem::shape::q1(xi, mu);
            let conn = [
                ej * w1 + ei,
                ej * w1 + ei + 1,
                (ej + 1) * w1 + ei,
                (ej + 1) * w1 + ei + 1,
            ];
            out.push((0..4).map(|k| vals[k] * p[conn[k]]).sum());
        }
    }
    out
}

fn physical_radius(mesh: &FemMesh, eta: &[f64], radius: f64, i: usize, r_ref: f64) -> f64 {
    let _ = mesh;
    (1.0 + eta[i] / radius) * r_ref
}

struct SnapshotFiles {
    names: Vec<String>,
}

fn write_csv_files(
    snap: &Snapshot,
    sim: &Simulation,
    dir: &Path,
    base: &str,
) -> Result<SnapshotFiles> {
    let fm = &sim.fluid_mesh;
    let sm = &sim.solid_mesh;
    let radius = sim.config.geometry.radius;
    let p_at_q2 = pressure_on_q2_grid(fm, &snap.p);
    let w2 = 2 * fm.nz + 1;

    let mut names = Vec::new();
    let mut fluid_ref = String::from("z,r,u_z,u_r,p\n");
    let mut fluid_phys = String::from("z,r,u_z,u_r,p\n");
    for (node, &(z, r)) in fm.q2_nodes.iter().enumerate() {
        let row_tail = format!(
            "{},{},{}\n",
            fmt(snap.u[2 * node]),
            fmt(snap.u[2 * node + 1]),
            fmt(p_at_q2[node])
        );
        let _ = write!(fluid_ref, "{},{},{}", fmt(z), fmt(r), row_tail);
        let i = node % w2;
        let rp = physical_radius(fm, &snap.eta, radius, i, r);
        let _ = write!(fluid_phys, "{},{},{}", fmt(z), fmt(rp), row_tail);
    }
    for (name, text) in [
        (format!("{base}_fluid_ref.csv"), fluid_ref),
        (format!("{base}_fluid_phys.csv"), fluid_phys),
    ] {
        std::fs::write(dir.join(&name), text)?;
        names.push(name);
    }

    let mut solid = String::from("z,r,d_z,d_r,V_z,V_r\n");
    for (node, &(z, r)) in sm.q2_nodes.iter().enumerate() {
        let _ = writeln!(
            solid,
            "{},{},{},{},{},{}",
            fmt(z),
            fmt(r),
            fmt(snap.d[2 * node]),
            fmt(snap.d[2 * node + 1]),
            fmt(snap.vel[2 * node]),
            fmt(snap.vel[2 * node + 1])
        );
    }
    let name = format!("{base}_solid.csv");
    std::fs::write(dir.join(&name), solid)?;
    names.push(name);

    let mut iface = String::from("z,eta,v,v_star\n");
    for (k, &z) in sim.maps.z.iter().enumerate() {
        let _ = writeln!(
            iface,
            "{},{},{},{}",
            fmt(z),
            fmt(snap.eta[k]),
            fmt(snap.v[k]),
            fmt(snap.v_star[k])
        );
    }
    let name = format!("{base}_interface.csv");
    std::fs::write(dir.join(&name), iface)?;
    names.push(name);

    Ok(SnapshotFiles { names })
}

fn vtk_structured_header(title: &str, nx: usize, ny: usize) -> String {
    format!(
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET STRUCTURED_GRID\nDIMENSIONS {nx} {ny} 1\nPOINTS {} double\n",
        nx * ny
    )
}

fn write_vtk_files(
    snap: &Snapshot,
    sim: &Simulation,
    dir: &Path,
    base: &str,
) -> Result<SnapshotFiles> {
    let fm = &sim.fluid_mesh;
    let sm = &sim.solid_mesh;
    let radius = sim.config.geometry.radius;
    let w2 = 2 * fm.nz + 1;
    let h2 = 2 * fm.nr + 1;
    let p_at_q2 = pressure_on_q2_grid(fm, &snap.p);

    let mut names = Vec::new();
    let mut vtk = vtk_structured_header("fluid velocity and pressure", w2, h2);
    for (node, &(z, r)) in fm.q2_nodes.iter().enumerate() {
        let i = node % w2;
        let rp = physical_radius(fm, &snap.eta, radius, i, r);
        let _ = writeln!(vtk, "{} {} 0.0", fmt(z), fmt(rp));
    }
    let _ = write!(vtk, "POINT_DATA {}\nVECTORS velocity double\n", w2 * h2);
    for node in 0..fm.n_q2_nodes() {
        let _ = writeln!(vtk, "{} {} 0.0", fmt(snap.u[2 * node]), fmt(snap.u[2 * node + 1]));
    }
    let _ = write!(vtk, "SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for node in 0..fm.n_q2_nodes() {
        let _ = writeln!(vtk, "{}", fmt(p_at_q2[node]));
    }
    let name = format!("{base}_fluid.vtk");
    std::fs::write(dir.join(&name), vtk)?;
    names.push(name);

    let (sw2, sh2) = (2 * sm.nz + 1, 2 * sm.nr + 1);
    let mut vtk = vtk_structured_header("wall displacement and velocity", sw2, sh2);
    for &(z, r) in sm.q2_nodes.iter() {
        let _ = writeln!(vtk, "{} {} 0.0", fmt(z), fmt(r));
    }
    let _ = write!(vtk, "POINT_DATA {}\nVECTORS displacement double\n", sw2 * sh2);
    for node in 0..sm.n_q2_nodes() {
        let _ = writeln!(vtk, "{} {} 0.0", fmt(snap.d[2 * node]), fmt(snap.d[2 * node + 1]));
    }
    let _ = write!(vtk, "VECTORS wall_velocity double\n");
    for node in 0..sm.n_q2_nodes() {
        let _ = writeln!(
            vtk,
            "{} {} 0.0",
            fmt(snap.vel[2 * node]),
            fmt(snap.vel[2 * node + 1])
        );
    }
    let name = format!("{base}_solid.vtk");
    std::fs::write(dir.join(&name), vtk)?;
    names.push(name);

    let n = sim.maps.n_nodes();
    let mut vtk = vtk_structured_header("interface displacement and velocities", n, 1);
    for (k, &z) in sim.maps.z.iter().enumerate() {
        let _ = writeln!(vtk, "{} {} 0.0", fmt(z), fmt(radius + snap.eta[k]));
    }
    let _ = write!(vtk, "POINT_DATA {n}\nSCALARS eta double 1\nLOOKUP_TABLE default\n");
    for k in 0..n {
        let _ = writeln!(vtk, "{}", fmt(snap.eta[k]));
    }
    let _ = write!(vtk, "SCALARS v double 1\nLOOKUP_TABLE default\n");
    for k in 0..n {
        let _ = writeln!(vtk, "{}", fmt(snap.v[k]));
    }
    let _ = write!(vtk, "SCALARS v_star double 1\nLOOKUP_TABLE default\n");
    for k in 0..n {
        let _ = writeln!(vtk, "{}", fmt(snap.v_star[k]));
    }
    let name = format!("{base}_interface.vtk");
    std::fs::write(dir.join(&name), vtk)?;
    names.push(name);

    Ok(SnapshotFiles { names })
}

/// Writes one snapshot in the requested format(s); returns the file names.
pub fn write_field_snapshot(
    snap: &Snapshot,
    sim: &Simulation,
    dir: &Path,
    base: &str,
    format: SnapshotFormat,
) -> Result<Vec<String>> {
    let mut names = Vec::new();
    if matches!(format, SnapshotFormat::Csv | SnapshotFormat::Both) {
        names.extend(write_csv_files(snap, sim, dir, base)?.names);
    }
    if matches!(format, SnapshotFormat::VtkLegacyAscii | SnapshotFormat::Both) {
        names.extend(write_vtk_files(snap, sim, dir, base)?.names);
    }
    Ok(names)
}

/// Writes the whole run: ledger, per-snapshot field files and the manifest
/// tying them to the configuration hash.
pub fn write_archive(
    result: &RunResult,
    sim: &Simulation,
    dir: &Path,
    options: &OutputOptions,
    config_hash: &str,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_ledger_csv(&result.ledger, &dir.join("ledger.csv"))?;
    let mut manifest = String::from("step,stage,time,files,config_hash\n");
    for snap in &result.snapshots {
        let stage = if snap.step == 0 {
            "initial"
        } else {
            StageTag::Fluid.as_str()
        };
        let files = if options.write_fields {
            let base = format!("snap_{:06}", snap.step);
            write_field_snapshot(snap, sim, dir, &base, options.format)?
        } else {
            Vec::new()
        };
        let _ = writeln!(
            manifest,
            "{},{},{},{},{}",
            snap.step,
            stage,
            fmt(snap.time),
            files.join(";"),
            config_hash
        );
    }
    std::fs::write(dir.join("manifest.csv"), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{RunConfig, Simulation};
    use crate::mesh::GeometryConfig;

    fn tiny_sim() -> Simulation {
        Simulation::new(RunConfig {
            geometry: GeometryConfig {
                nz: 2,
                nr_fluid: 2,
                nr_solid: 1,
                ..GeometryConfig::default()
            },
            t_final: 0.02,
            n_steps: 2,
            ..RunConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_state_files_have_correct_coordinates_and_zero_fields() {
        let sim = tiny_sim();
        let res = sim.run().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let names = write_field_snapshot(
            &res.snapshots[0],
            &sim,
            dir.path(),
            "snap",
            SnapshotFormat::Both,
        )
        .unwrap();
        assert_eq!(names.len(), 7);
        let ref_text = std::fs::read_to_string(dir.path().join("snap_fluid_ref.csv")).unwrap();
        let phys_text = std::fs::read_to_string(dir.path().join("snap_fluid_phys.csv")).unwrap();
        // eta = 0: physical and reference coordinates coincide
        assert_eq!(ref_text, phys_text);
        for line in ref_text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            for c in &cols[2..] {
                assert_eq!(c.parse::<f64>().unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn physical_radius_stretches_with_eta() {
        let sim = tiny_sim();
        let res = sim.run().unwrap();
        let mut snap = res.snapshots[0].clone();
        for (k, e) in snap.eta.iter_mut().enumerate() {
            *e = 0.1 * k as f64; // arbitrary stretch per column
        }
        let dir = tempfile::tempdir().unwrap();
        write_field_snapshot(&snap, &sim, dir.path(), "snap", SnapshotFormat::Csv).unwrap();
        let phys = std::fs::read_to_string(dir.path().join("snap_fluid_phys.csv")).unwrap();
        let w2 = 2 * sim.fluid_mesh.nz + 1;
        for (row, line) in phys.lines().skip(1).enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            let r: f64 = cols[1].parse().unwrap();
            let node = row;
            let (_, r_ref) = sim.fluid_mesh.q2_nodes[node];
            let i = node % w2;
            assert!((r - (1.0 + snap.eta[i]) * r_ref).abs() < 1e-15);
        }
    }

    #[test]
    fn archive_manifest_carries_the_config_hash() {
        let sim = tiny_sim();
        let res = sim.run().unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_archive(&res, &sim, dir.path(), &OutputOptions::default(), "deadbeef").unwrap();
        let manifest = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert!(manifest.starts_with("step,stage,time,files,config_hash\n"));
        assert!(manifest.lines().skip(1).all(|l| l.ends_with("deadbeef")));
        assert!(dir.path().join("ledger.csv").exists());
        assert!(dir.path().join("snap_000000_interface.csv").exists());
    }
}
