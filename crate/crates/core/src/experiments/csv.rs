use std::io::Write;

use super::SweepRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 18] = [
    "protocol",
    "kind",
    "p",
    "mu",
    "alpha",
    "pX",
    "pY",
    "pZ",
    "rConventional",
    "rAdaptive",
    "deltaR",
    "thetaOpt",
    "chiOpt",
    "phiOpt",
    "capacity",
    "capacityFixed",
    "capacitySingleUse",
    "classicalLimit",
];

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.11e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    }
}

fn field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let rec = [
            r.protocol.name().to_string(),
            r.kind.name().to_string(),
            field(r.p),
            field(r.mu),
            field(r.alpha),
            field(r.p_x),
            field(r.p_y),
            field(r.p_z),
            field(r.r_conventional),
            field(r.r_adaptive),
            field(r.delta_r),
            field(r.theta_opt),
            field(r.chi_opt),
            field(r.phi_opt),
            field(r.capacity),
            field(r.capacity_fixed),
            field(r.capacity_single_use),
            field(r.classical_limit),
        ];
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
