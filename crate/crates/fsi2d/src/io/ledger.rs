//! Ledger serialization: one CSV row per half-step, 17 significant digits,
//! LF line endings, lossless round trip.

use crate::energy::{EnergyLedger, EnergyRow, StageTag};
use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

pub const LEDGER_HEADER: &str = "step,stage,time,E_kin,E_el,D,structure_residual,fluid_slack,boundary_work,min_radius,max_radius,v_vstar_gap";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the ledger with the exact column order and formatting contract.
pub fn write_ledger_csv(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(64 * (ledger.rows().len() + 1));
    out.push_str(LEDGER_HEADER);
    out.push('\n');
    for r in ledger.rows() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.step,
            r.stage.as_str(),
            fmt(r.time),
            fmt(r.e_kin),
            fmt(r.e_el),
            fmt(r.dissipation),
            fmt(r.structure_residual),
            fmt(r.fluid_slack),
            fmt(r.boundary_work),
            fmt(r.min_radius),
            fmt(r.max_radius),
            fmt(r.v_vstar_gap),
        ));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Parses a ledger file back; exact inverse of [`write_ledger_csv`].
pub fn read_ledger_csv(path: &Path) -> Result<EnergyLedger> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == LEDGER_HEADER => {}
        other => {
            return Err(Error::config(format!(
                "ledger header mismatch in {}: {other:?}",
                path.display()
            )))
        }
    }
    let mut ledger = EnergyLedger::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 {
            return Err(Error::config(format!(
                "ledger row {} has {} columns, expected 12",
                i + 2,
                cols.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::config(format!("bad number {s:?} in ledger row {}", i + 2)))
        };
        ledger.push(EnergyRow {
            step: cols[0]
                .parse()
                .map_err(|_| Error::config(format!("bad step {:?}", cols[0])))?,
            stage: StageTag::parse(cols[1])?,
            time: num(cols[2])?,
            e_kin: num(cols[3])?,
            e_el: num(cols[4])?,
            dissipation: num(cols[5])?,
            structure_residual: num(cols[6])?,
            fluid_slack: num(cols[7])?,
            boundary_work: num(cols[8])?,
            min_radius: num(cols[9])?,
            max_radius: num(cols[10])?,
            v_vstar_gap: num(cols[11])?,
        });
    }
    Ok(ledger)
}
