use crate::analysis::CoverageMatrix;
use crate::taxonomy::PrimaryFactor;

/// One row per view plus a final `MERGED` row; factor columns in H,O,T,P,I,E
/// order with R/P/N cells.
pub fn coverage_csv(matrix: &CoverageMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["view_id".to_string(), "title".into(), "category".into()];
    header.extend(PrimaryFactor::ALL.iter().map(|f| f.name().to_string()));
    w.write_record(&header).expect("in-memory write");
    for row in &matrix.rows {
        let mut rec = vec![
            row.view_id.clone(),
            row.title.clone(),
            format!("{:?}", row.category),
        ];
        rec.extend(row.levels.iter().map(|(_, l)| l.code().to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    let mut merged = vec!["MERGED".to_string(), String::new(), String::new()];
    merged.extend(matrix.merged.iter().map(|(_, l)| l.code().to_string()));
    w.write_record(&merged).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("csv output is UTF-8")
}
