//! Published reference values shipped as CSV data files.

use serde::Deserialize;

use crate::config::{parse_weighting, SmootherKind, SolverKind};
use crate::error::HarnessError;

const TABLE1: &str = include_str!("../data/table1.csv");
const TABLE2: &str = include_str!("../data/table2.csv");
const TABLE3: &str = include_str!("../data/table3.csv");

/// Orders of the reference columns.
pub const ORDERS: [usize; 4] = [4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub row: usize,
    pub solver: SolverKind,
    pub smoother: SmootherKind,
    pub weighting: Option<dgpmg::schwarz::WeightingKind>,
    pub beta: f64,
    /// `r_bar` for `P = 4, 8, 16, 32`.
    pub r_bar: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table2Row {
    pub p: usize,
    pub nel: usize,
    #[serde(deserialize_with = "smoother")]
    pub smoother: SmootherKind,
    pub r_bar: f64,
    pub n10: usize,
    pub omega_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table3Row {
    pub p: usize,
    pub ar: usize,
    #[serde(deserialize_with = "smoother")]
    pub smoother: SmootherKind,
    pub r_bar: f64,
    pub n10: usize,
}

#[derive(Debug, Deserialize)]
struct RawTable1 {
    row: usize,
    method: String,
    smoother: String,
    weighting: String,
    beta: f64,
    p4: f64,
    p8: f64,
    p16: f64,
    p32: f64,
}

fn smoother<'de, D: serde::Deserializer<'de>>(d: D) -> Result<SmootherKind, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn data_error(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("embedded reference data: {e}"))
}

pub fn table1() -> Result<Vec<Table1Row>, HarnessError> {
    reader(TABLE1)
        .deserialize::<RawTable1>()
        .map(|raw| {
            let raw = raw.map_err(data_error)?;
            let weighting = if raw.weighting.is_empty() {
                None
            } else {
                Some(parse_weighting(&raw.weighting).map_err(data_error)?)
            };
            Ok(Table1Row {
                row: raw.row,
                solver: raw.method.parse().map_err(data_error)?,
                smoother: raw.smoother.parse().map_err(data_error)?,
                weighting,
                beta: raw.beta,
                r_bar: [raw.p4, raw.p8, raw.p16, raw.p32],
            })
        })
        .collect()
}

pub fn table2() -> Result<Vec<Table2Row>, HarnessError> {
    reader(TABLE2)
        .deserialize()
        .map(|r| r.map_err(data_error))
        .collect()
}

pub fn table3() -> Result<Vec<Table3Row>, HarnessError> {
    reader(TABLE3)
        .deserialize()
        .map(|r| r.map_err(data_error))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        let t1 = table1().unwrap();
        assert_eq!(t1.len(), 28);
        assert_eq!(t1.iter().map(|r| r.row).collect::<Vec<_>>(), (1..=28).collect::<Vec<_>>());
        assert_eq!(t1[0].r_bar, [0.63, 0.36, 0.22, 0.15]);
        assert_eq!(t1[10].smoother, SmootherKind::EaL);
        assert_eq!(t1[26].solver, SolverKind::Mgcg);
        assert_eq!(table2().unwrap().len(), 4 * 6 * 4);
        assert_eq!(table3().unwrap().len(), 4 * 6 * 4);
    }

    #[test]
    fn spot_values() {
        let t2 = table2().unwrap();
        let r = t2
            .iter()
            .find(|r| r.p == 16 && r.nel == 16 && r.smoother == SmootherKind::EaL)
            .unwrap();
        assert_eq!((r.r_bar, r.n10, r.omega_bar), (2.20, 5, 7.7));
        let t3 = table3().unwrap();
        let r = t3
            .iter()
            .find(|r| r.p == 4 && r.ar == 16 && r.smoother == SmootherKind::EaL)
            .unwrap();
        assert_eq!((r.r_bar, r.n10), (0.04, 236));
    }
}
