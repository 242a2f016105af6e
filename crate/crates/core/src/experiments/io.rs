//! MMPS snapshots, diagnostics CSV and stored trajectory directories.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimates::{DiagnosticsRecord, StepRates};
use crate::evolution::Trajectory;
use crate::fields::{
    BoundaryMode, GridSpec, ScalarField, ScalarPlacement, State, VectorField, VectorPlacement,
};

use super::config::RunConfig;

const MAGIC: &str = "MMPS";
const VERSION: &str = "1";

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// C-style `%a` rendering of a finite float, e.g. `0x1.8p+1` for 3.
pub fn format_hex_float(x: f64) -> String {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 {
        (0, -1022)
    } else {
        (1, exp - 1023)
    };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    let frac = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    format!("{sign}0x{lead}{frac}p{e:+}")
}

/// Inverse of [`format_hex_float`] for normalized and subnormal forms.
pub fn parse_hex_float(s: &str) -> Option<f64> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let (mantissa, exp) = rest.split_once('p')?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.len() > 13 || !frac.bytes().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let bits = match lead {
        "0" if frac_bits == 0 => 0,
        "0" if exp == -1022 => frac_bits,
        "1" if (-1022..=1023).contains(&exp) => (((exp + 1023) as u64) << 52) | frac_bits,
        _ => return None,
    };
    let v = f64::from_bits(bits);
    Some(if neg { -v } else { v })
}

fn push_f64s(out: &mut Vec<u8>, v: &[f64]) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Encode a state in the MMPS format.
pub fn encode_snapshot(s: &State) -> Result<Vec<u8>> {
    s.validate_layout()?;
    let g = s.grid();
    let header = format!(
        "{MAGIC} {VERSION} {} {} {} {}\n",
        g.nx(),
        g.ny(),
        g.mode().as_str(),
        format_hex_float(s.t)
    );
    let mut payload = Vec::new();
    for part in [&s.u.x, &s.u.y, &s.w.data, &s.b.x, &s.b.y, &s.p.data] {
        push_f64s(&mut payload, part);
    }
    let mut out = header.into_bytes();
    out.extend_from_slice(&payload);
    out.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    Ok(out)
}

/// Decode an MMPS byte stream.
pub fn decode_snapshot(bytes: &[u8]) -> Result<State> {
    if !bytes.starts_with(MAGIC.as_bytes()) {
        return Err(Error::SnapshotMagic);
    }
    let nl = bytes
        .iter()
        .position(|&c| c == b'\n')
        .ok_or_else(|| Error::SnapshotHeader("missing header newline".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::SnapshotHeader("header is not UTF-8".into()))?;
    let tok: Vec<&str> = header.split(' ').collect();
    if tok.len() != 6 || tok[0] != MAGIC {
        return Err(Error::SnapshotMagic);
    }
    if tok[1] != VERSION {
        return Err(Error::SnapshotHeader(format!(
            "unsupported version `{}`",
            tok[1]
        )));
    }
    let parse_n = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::SnapshotHeader(format!("bad size `{t}`")))
    };
    let (nx, ny) = (parse_n(tok[2])?, parse_n(tok[3])?);
    if nx != ny {
        return Err(Error::SnapshotHeader(format!("non-square grid {nx}x{ny}")));
    }
    let mode = BoundaryMode::parse(tok[4])
        .ok_or_else(|| Error::SnapshotHeader(format!("bad mode `{}`", tok[4])))?;
    let t = parse_hex_float(tok[5])
        .ok_or_else(|| Error::SnapshotHeader(format!("bad time `{}`", tok[5])))?;
    let grid = GridSpec::new(nx, mode)?;

    let (ud, vd) = VectorField::dims_for(&grid, VectorPlacement::Mac);
    let (cc, cr) = ScalarField::dims_for(&grid, ScalarPlacement::CellCenter);
    let lens = [
        ud.0 * ud.1,
        vd.0 * vd.1,
        cc * cr,
        ud.0 * ud.1,
        vd.0 * vd.1,
        cc * cr,
    ];
    let payload_len = 8 * lens.iter().sum::<usize>();
    let body = &bytes[nl + 1..];
    if body.len() < payload_len + 8 {
        return Err(Error::SnapshotTruncated {
            expected: payload_len + 8,
            found: body.len(),
        });
    }
    if body.len() > payload_len + 8 {
        return Err(Error::SnapshotHeader(format!(
            "{} trailing bytes after checksum",
            body.len() - payload_len - 8
        )));
    }
    let payload = &body[..payload_len];
    let stored = u64::from_le_bytes(body[payload_len..].try_into().expect("8 bytes"));
    let computed = fnv1a64(payload);
    if stored != computed {
        return Err(Error::SnapshotChecksum { stored, computed });
    }
    let mut chunks = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut parts = lens
        .iter()
        .map(|&n| chunks.by_ref().take(n).collect::<Vec<f64>>());
    let mut next = || parts.next().expect("six parts");
    let u = VectorField::from_data(grid, VectorPlacement::Mac, next(), next())?;
    let w = ScalarField::from_data(grid, ScalarPlacement::CellCenter, next())?;
    let b = VectorField::from_data(grid, VectorPlacement::Mac, next(), next())?;
    let p = ScalarField::from_data(grid, ScalarPlacement::CellCenter, next())?;
    let s = State { t, u, w, b, p };
    s.validate_layout()?;
    Ok(s)
}

pub fn write_snapshot(path: &Path, s: &State) -> Result<()> {
    fs::write(path, encode_snapshot(s)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    decode_snapshot(&fs::read(path)?)
}

fn csv_text<const N: usize>(columns: &[&str; N], rows: impl Iterator<Item = [f64; N]>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn csv_rows(text: &str, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.split(',').ne(columns.iter().copied()) {
        return Err(Error::Trajectory(format!(
            "unexpected CSV header `{header}`"
        )));
    }
    lines
        .enumerate()
        .map(|(k, l)| {
            l.split(',')
                .map(|c| {
                    c.parse::<f64>().map_err(|_| {
                        Error::Trajectory(format!("bad CSV value `{c}` on row {}", k + 2))
                    })
                })
                .collect()
        })
        .collect()
}

/// Diagnostics CSV: the record columns in declaration order, shortest
/// round-trip decimals.
pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    csv_text(
        &DiagnosticsRecord::COLUMNS,
        records.iter().map(|r| r.values()),
    )
}

pub fn rates_csv(rates: &[StepRates]) -> String {
    csv_text(&StepRates::COLUMNS, rates.iter().map(|r| r.values()))
}

pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    csv_rows(text, &DiagnosticsRecord::COLUMNS)?
        .iter()
        .map(|r| DiagnosticsRecord::from_values(r))
        .collect()
}

pub fn parse_rates_csv(text: &str) -> Result<Vec<StepRates>> {
    csv_rows(text, &StepRates::COLUMNS)?
        .iter()
        .map(|r| StepRates::from_values(r))
        .collect()
}

/// Generic table with a header row, for driver reports.
pub fn table_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub const CONFIG_FILE: &str = "run.cfg";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

fn snapshot_name(step: usize) -> String {
    format!("step_{step:07}.mmps")
}

/// Store a trajectory under `dir`: the config, both CSVs and one snapshot per
/// stored state.
pub fn save_trajectory(dir: &Path, cfg: &RunConfig, traj: &Trajectory) -> Result<()> {
    let snaps = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snaps)?;
    fs::write(dir.join(CONFIG_FILE), cfg.to_text())?;
    fs::write(dir.join(DIAGNOSTICS_FILE), diagnostics_csv(&traj.records))?;
    fs::write(dir.join(RATES_FILE), rates_csv(&traj.rates))?;
    for (step, s) in &traj.snapshots {
        write_snapshot(&snaps.join(snapshot_name(*step)), s)?;
    }
    Ok(())
}

/// Reload a directory written by [`save_trajectory`].
pub fn load_trajectory(dir: &Path) -> Result<(RunConfig, Trajectory)> {
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let records = parse_diagnostics_csv(&fs::read_to_string(dir.join(DIAGNOSTICS_FILE))?)?;
    let rates = parse_rates_csv(&fs::read_to_string(dir.join(RATES_FILE))?)?;
    let mut names: Vec<(usize, std::path::PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir.join(SNAPSHOT_DIR))? {
        let path = entry?.path();
        let step = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("step_")?.strip_suffix(".mmps")?.parse().ok());
        if let Some(step) = step {
            names.push((step, path));
        }
    }
    names.sort();
    let snapshots = names
        .into_iter()
        .map(|(step, p)| Ok((step, read_snapshot(&p)?)))
        .collect::<Result<Vec<_>>>()?;
    let grid = cfg.grid();
    if snapshots.iter().any(|(_, s)| *s.grid() != grid) {
        return Err(Error::Trajectory(
            "snapshot grid differs from the stored config".into(),
        ));
    }
    let traj = Trajectory {
        grid,
        params: cfg.params,
        config: cfg.step_config(),
        options: cfg.run_options(),
        snapshots,
        records,
        rates,
    };
    traj.check_uniform()?;
    Ok((cfg, traj))
}
