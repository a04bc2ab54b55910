//! Demand histograms from a CSV of matrix dimensions.
//!
//! The file needs a header with `rows` and `cols` columns; other columns are ignored.

use std::path::Path;

use uavplan_core::scenario::{demand_hist, DemandHistogram};

use crate::error::CliError;

pub fn demand_hist_from_reader<R: std::io::Read>(reader: R, source: &str) -> Result<DemandHistogram, CliError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers().map_err(|e| CliError::input(format!("{source}: {e}")))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(format!("{source}: missing column `{name}`")))
    };
    let (ri, ci) = (column("rows")?, column("cols")?);
    let mut dims = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| CliError::input(format!("{source}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<u32, CliError> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<u32>()
                .map_err(|_| CliError::input(format!("{source} line {line}: `{raw}` is not a dimension")))
        };
        let (r, c) = (field(ri)?, field(ci)?);
        if r != c {
            return Err(CliError::input(format!("{source} line {line}: non-square matrix {r}x{c}")));
        }
        dims.push((r, c));
    }
    demand_hist(&dims).map_err(|e| CliError::input(format!("{source}: {e}")))
}

pub fn demand_hist_from_csv(path: &Path) -> Result<DemandHistogram, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::input(format!("cannot read demand csv {}: {e}", path.display())))?;
    demand_hist_from_reader(file, &path.display().to_string())
}
