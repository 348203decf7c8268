use super::MetricsReport;
use std::io::Write;

pub const CSV_HEADER: [&str; 12] = ["sample_id", "VES", "MAE", "RUR", "BC", "FU", "APR", "STR", "ISR", "AVU", "CCR", "flags"];

/// One evaluated sample. Missing values are written as empty cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvRow {
    pub sample_id: String,
    pub ves: Option<f64>,
    pub mae: Option<f64>,
    pub metrics: Option<MetricsReport>,
    pub flags: Vec<String>,
}

impl CsvRow {
    /// VES and MAE as 4-decimal fractions, code metrics as percentages with
    /// 2 decimals, flags joined with `;`.
    pub fn cells(&self) -> Vec<String> {
        let opt4 = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        let mut out = vec![self.sample_id.clone(), opt4(self.ves), opt4(self.mae)];
        let m = self.metrics.as_ref();
        let pct = |f: Option<super::Fraction>| f.map(|f| format!("{:.2}", f.value * 100.0)).unwrap_or_default();
        out.push(pct(m.map(|m| m.rur)));
        out.push(pct(m.map(|m| m.bc)));
        out.push(pct(m.map(|m| m.fu)));
        out.push(pct(m.map(|m| m.apr)));
        out.push(pct(m.map(|m| m.str)));
        out.push(pct(m.map(|m| m.isr)));
        out.push(pct(m.map(|m| m.avu)));
        out.push(pct(m.map(|m| m.ccr)));
        let flags: Vec<&str> = m.into_iter().flat_map(|m| m.flags.iter()).chain(&self.flags).map(String::as_str).collect();
        out.push(flags.join(";"));
        out
    }
}

pub fn write_csv_header<W: Write>(w: &mut csv::Writer<W>) -> Result<(), csv::Error> {
    w.write_record(CSV_HEADER)
}

pub fn write_csv<W: Write>(w: W, rows: &[CsvRow]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    write_csv_header(&mut wtr)?;
    for r in rows {
        wtr.write_record(r.cells())?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let m = super::super::evaluate("<html><body class=\"flex\"><div class=\"w-1/2\"></div></body></html>").unwrap();
        let row = CsvRow { sample_id: "s1".into(), ves: None, mae: Some(0.12345), metrics: Some(m), flags: vec!["no-ves".into()] };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "sample_id,VES,MAE,RUR,BC,FU,APR,STR,ISR,AVU,CCR,flags");
        assert_eq!(lines.next().unwrap(), "s1,,0.1235,100.00,0.00,100.00,0.00,0.00,0.00,0.00,0.00,APR:empty-denominator;CCR:empty-denominator;no-ves");
    }
}
