//! Deterministic CSV emission for sweep results.

/// One evaluated (sequence, config, layer set) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub sequence: String,
    pub config: String,
    pub layer_set: String,
    pub rate_kbps: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub rd_cost: f64,
}

pub const REPORT_HEADER: &str = "sequence,config,layer_set,rate_kbps,psnr_db,ssim,rd_cost";

/// CSV with a fixed column order, fixed float precision, UTF-8 and LF line
/// endings; byte-identical across runs for identical inputs.
pub fn emit_report(rows: &[ReportRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.5},{:.4}\n",
            r.sequence, r.config, r.layer_set, r.rate_kbps, r.psnr_db, r.ssim, r.rd_cost
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            sequence: "seq00".into(),
            config: "qp22".into(),
            layer_set: "base+8".into(),
            rate_kbps: 12.3456,
            psnr_db: 34.5678,
            ssim: 0.987654,
            rd_cost: 18.4321,
        }
    }

    #[test]
    fn empty_report_is_just_the_header() {
        assert_eq!(emit_report(&[]), format!("{REPORT_HEADER}\n"));
    }

    #[test]
    fn one_row_gives_two_lines() {
        let out = emit_report(&[row()]);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], REPORT_HEADER);
        assert_eq!(lines[1], "seq00,qp22,base+8,12.346,34.568,0.98765,18.4321");
        assert!(!out.contains('\r'));
    }

    #[test]
    fn emission_is_deterministic() {
        let rows = vec![row(), row()];
        assert_eq!(emit_report(&rows), emit_report(&rows));
    }
}
