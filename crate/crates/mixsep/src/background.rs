//! Distribution specs of the form `family:p1,p2` or `table:path.csv`.

use std::path::Path;

use mixsep_core::{KnownCdf, TableMode};

use crate::error::CliError;
use crate::io::read_cdf_table;

pub const FAMILIES: &str = "uniform[:lo,hi], normal[:mean,sd], t:df, beta:a,b, exponential[:location,scale], \
                            shift-normal:lo,hi, poisson:rate, binomial:trials,prob, table:path.csv, table-step:path.csv";

fn params(family: &str, raw: Option<&str>, defaults: &[f64]) -> Result<Vec<f64>, CliError> {
    let Some(raw) = raw.filter(|r| !r.trim().is_empty()) else {
        if defaults.is_empty() {
            return Err(CliError::input(format!("{family} needs parameters ({FAMILIES})")));
        }
        return Ok(defaults.to_vec());
    };
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("{family}: bad parameter {p:?}")))
        })
        .collect()
}

fn expect<const N: usize>(family: &str, v: Vec<f64>) -> Result<[f64; N], CliError> {
    let len = v.len();
    v.try_into()
        .map_err(|_| CliError::input(format!("{family} takes {N} parameter(s), got {len}")))
}

/// Parses a distribution spec; table paths are resolved relative to the
/// working directory.
pub fn parse_distribution(spec: &str) -> Result<KnownCdf, CliError> {
    let (family, raw) = match spec.split_once(':') {
        Some((f, r)) => (f.trim(), Some(r)),
        None => (spec.trim(), None),
    };
    let family_lc = family.to_ascii_lowercase();
    let d = match family_lc.as_str() {
        "uniform" => {
            let [lo, hi] = expect(family, params(family, raw, &[0.0, 1.0])?)?;
            KnownCdf::uniform(lo, hi)?
        }
        "normal" => {
            let [m, s] = expect(family, params(family, raw, &[0.0, 1.0])?)?;
            KnownCdf::normal(m, s)?
        }
        "t" => {
            let [df] = expect(family, params(family, raw, &[])?)?;
            KnownCdf::student_t(df)?
        }
        "beta" => {
            let [a, b] = expect(family, params(family, raw, &[])?)?;
            KnownCdf::beta(a, b)?
        }
        "exponential" => {
            let [loc, scale] = expect(family, params(family, raw, &[0.0, 1.0])?)?;
            KnownCdf::exponential(loc, scale)?
        }
        "shift-normal" => {
            let [lo, hi] = expect(family, params(family, raw, &[])?)?;
            KnownCdf::symmetric_shift_normal(lo, hi)?
        }
        "poisson" => {
            let [rate] = expect(family, params(family, raw, &[])?)?;
            KnownCdf::poisson(rate)?
        }
        "binomial" => {
            let [n, p] = expect(family, params(family, raw, &[])?)?;
            if n < 0.0 || n.fract() != 0.0 {
                return Err(CliError::input(format!("binomial: trials must be a non-negative integer, got {n}")));
            }
            KnownCdf::binomial(n as u64, p)?
        }
        "table" | "table-step" => {
            let path = raw.filter(|r| !r.is_empty()).ok_or_else(|| CliError::input("table needs a path"))?;
            let (xs, fs) = read_cdf_table(Path::new(path))?;
            let mode = if family_lc == "table" {
                TableMode::Linear
            } else {
                TableMode::Step
            };
            KnownCdf::tabulated(xs, fs, mode)?
        }
        _ => {
            return Err(CliError::input(format!("unknown distribution {family:?}; expected one of {FAMILIES}")));
        }
    };
    Ok(d)
}
