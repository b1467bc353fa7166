//! Deterministic text output: fixed-precision CSV tables and the parsers
//! that read them back. Floats are printed with 17 significant digits, so a
//! parsed table reproduces the in-memory values bit for bit and re-emitting
//! it reproduces the file byte for byte.

use std::fmt::Write as _;

// ==================== Float formatting ====================

/// Format a float in scientific notation with 17 significant digits,
/// enough to round-trip any finite `f64` exactly through decimal text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Strip characters that would break one-line CSV fields: commas become
/// semicolons and any line break becomes a space.
pub fn sanitize_field(message: &str) -> String {
    message
        .replace(',', ";")
        .replace(['\n', '\r'], " ")
        .trim()
        .to_string()
}

// ==================== Capacity curves ====================

/// Column header of every capacity table (single point or sweep).
pub const CURVE_HEADER: &str = "f_s,capacity,nu,nyquist_capacity,error";

/// One evaluated sampling rate. `capacity` and `nyquist_capacity` are in the
/// units requested by the job; `nu` is the water level in power-density
/// units. A failed rate carries NaN values and a diagnostic in `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// Sampling rate in Hz.
    pub f_s: f64,
    /// Capacity at this rate.
    pub capacity: f64,
    /// Water level of the power allocation.
    pub nu: f64,
    /// Capacity of the same channel under Nyquist-rate sampling.
    pub nyquist_capacity: f64,
    /// Diagnostic for a rate that could not be evaluated.
    pub error: Option<String>,
}

/// A capacity-versus-rate table plus the run-level metadata that does not
/// vary across rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    /// Short descriptor of the sampler the curve was computed for.
    pub sampler: String,
    /// Units the capacity columns are expressed in ("nats" or "bits").
    pub units: String,
    /// Total bandwidth actively used by the channel (the minimal aggregate
    /// sampling rate that can preserve it).
    pub landau_rate: f64,
    /// Rows sorted by ascending sampling rate.
    pub rows: Vec<CurveRow>,
}

impl CapacityCurve {
    /// Render the curve as CSV with the pinned header and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CURVE_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(row.f_s),
                fmt_f64(row.capacity),
                fmt_f64(row.nu),
                fmt_f64(row.nyquist_capacity),
                row.error.as_deref().unwrap_or(""),
            );
        }
        out
    }
}

/// Parse a capacity CSV produced by [`CapacityCurve::to_csv`] back into rows.
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CURVE_HEADER => {}
        other => {
            return Err(format!(
                "expected header `{CURVE_HEADER}`, found `{}`",
                other.unwrap_or("")
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format!(
                "row {}: expected 5 fields, found {}",
                i + 1,
                fields.len()
            ));
        }
        rows.push(CurveRow {
            f_s: parse_float(fields[0], i + 1, "f_s")?,
            capacity: parse_float(fields[1], i + 1, "capacity")?,
            nu: parse_float(fields[2], i + 1, "nu")?,
            nyquist_capacity: parse_float(fields[3], i + 1, "nyquist_capacity")?,
            error: if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].to_string())
            },
        });
    }
    Ok(rows)
}

// ==================== Convergence reports ====================

/// Column header of the finite-window cross-check table.
pub const ORACLE_HEADER: &str = "n,finite_capacity,closed_form,rel_error";

/// One finite-window model size in a convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    /// Number of sampling blocks in the finite window.
    pub n: usize,
    /// Per-time capacity of the finite-window model.
    pub finite_capacity: f64,
    /// Closed-form spectral capacity it should converge to.
    pub closed_form: f64,
    /// `|finite_capacity - closed_form| / |closed_form|`.
    pub rel_error: f64,
}

/// Render a convergence report as CSV with the pinned header.
pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::new();
    out.push_str(ORACLE_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.n,
            fmt_f64(row.finite_capacity),
            fmt_f64(row.closed_form),
            fmt_f64(row.rel_error),
        );
    }
    out
}

/// Parse a convergence CSV produced by [`oracle_csv`] back into rows.
pub fn parse_oracle_csv(text: &str) -> Result<Vec<OracleRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == ORACLE_HEADER => {}
        other => {
            return Err(format!(
                "expected header `{ORACLE_HEADER}`, found `{}`",
                other.unwrap_or("")
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!(
                "row {}: expected 4 fields, found {}",
                i + 1,
                fields.len()
            ));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|e| format!("row {}: field n: {e}", i + 1))?;
        rows.push(OracleRow {
            n,
            finite_capacity: parse_float(fields[1], i + 1, "finite_capacity")?,
            closed_form: parse_float(fields[2], i + 1, "closed_form")?,
            rel_error: parse_float(fields[3], i + 1, "rel_error")?,
        });
    }
    Ok(rows)
}

// ==================== Reconstruction reports ====================

/// Column header of the linear-reconstruction error table.
pub const MSE_HEADER: &str = "f_s,mse";

/// Render a one-row reconstruction report (rate and time-averaged MSE).
pub fn mse_csv(f_s: f64, mse: f64) -> String {
    format!("{MSE_HEADER}\n{},{}\n", fmt_f64(f_s), fmt_f64(mse))
}

fn parse_float(field: &str, row: usize, name: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .map_err(|e| format!("row {row}: field {name}: {e}"))
}
