//! Sweep rows and their CSV form.
//!
//! Floating-point fields are written with 17 significant digits, which
//! reproduces every double exactly, so reading a table and writing it again
//! gives the same bytes. Missing values are empty fields.

use serde::{Deserialize, Serialize};

pub const HEADER: [&str; 18] = [
    "algebra", "spin", "n", "m", "re_z", "im_z", "t", "re_val", "im_val", "abs2", "source", "est_error",
    "dim_used", "aux_kind", "aux_re", "aux_im", "status", "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algebra: String,
    pub spin: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub re_z: f64,
    pub im_z: f64,
    pub t: f64,
    pub re_val: Option<f64>,
    pub im_val: Option<f64>,
    pub abs2: Option<f64>,
    /// `closed` or `oracle`.
    pub source: String,
    pub est_error: Option<f64>,
    pub dim_used: Option<usize>,
    /// `zeta`, `eta`, `pole`, or empty for the Heisenberg-Weyl family.
    pub aux_kind: String,
    pub aux_re: Option<f64>,
    pub aux_im: Option<f64>,
    /// `ok`, `error` or `no_convergence`.
    pub status: String,
    pub error: String,
}

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

fn opt_int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.algebra.clone(),
            opt_sci(self.spin),
            self.n.to_string(),
            self.m.to_string(),
            sci(self.re_z),
            sci(self.im_z),
            sci(self.t),
            opt_sci(self.re_val),
            opt_sci(self.im_val),
            opt_sci(self.abs2),
            self.source.clone(),
            opt_sci(self.est_error),
            opt_int(self.dim_used),
            self.aux_kind.clone(),
            opt_sci(self.aux_re),
            opt_sci(self.aux_im),
            self.status.clone(),
            self.error.clone(),
        ]
    }

    pub fn from_record(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != HEADER.len() {
            return Err(format!("expected {} fields, found {}", HEADER.len(), rec.len()));
        }
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| format!("{}: bad number {:?}", HEADER[i], field(i)));
        let opt_num = |i: usize| if field(i).is_empty() { Ok(None) } else { num(i).map(Some) };
        let int = |i: usize| field(i).parse::<usize>().map_err(|_| format!("{}: bad integer {:?}", HEADER[i], field(i)));
        Ok(SweepRow {
            algebra: field(0).to_string(),
            spin: opt_num(1)?,
            n: int(2)?,
            m: int(3)?,
            re_z: num(4)?,
            im_z: num(5)?,
            t: num(6)?,
            re_val: opt_num(7)?,
            im_val: opt_num(8)?,
            abs2: opt_num(9)?,
            source: field(10).to_string(),
            est_error: opt_num(11)?,
            dim_used: if field(12).is_empty() { None } else { Some(int(12)?) },
            aux_kind: field(13).to_string(),
            aux_re: opt_num(14)?,
            aux_im: opt_num(15)?,
            status: field(16).to_string(),
            error: field(17).to_string(),
        })
    }
}

pub fn write_csv(rows: &[SweepRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.to_record())?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn read_csv(bytes: &[u8]) -> Result<Vec<SweepRow>, String> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(format!("unexpected header {header:?}"));
    }
    r.records()
        .map(|rec| rec.map_err(|e| e.to_string()).and_then(|rec| SweepRow::from_record(&rec)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            algebra: "su2".into(),
            spin: Some(1.5),
            n: 1,
            m: 2,
            re_z: 0.1,
            im_z: -1.0 / 3.0,
            t: 0.0,
            re_val: Some(std::f64::consts::PI),
            im_val: Some(-0.0),
            abs2: Some(1e-300),
            source: "closed".into(),
            est_error: None,
            dim_used: None,
            aux_kind: "pole".into(),
            aux_re: None,
            aux_im: None,
            status: "ok".into(),
            error: "a, \"quoted\" message".into(),
        }
    }

    #[test]
    fn record_round_trip_is_exact() {
        let bytes = write_csv(&[row(), row()]).unwrap();
        let back = read_csv(&bytes).unwrap();
        assert_eq!(back[0], row());
        assert_eq!(write_csv(&back).unwrap(), bytes);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
        assert_eq!(sci(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
