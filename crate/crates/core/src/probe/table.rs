use super::{check_size, parse_json, ColumnInfer, Columns, DataKind, DatasetMeta, ProbeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Probes a CSV document with a header row, or a JSON array of flat
/// objects.
pub fn probe_table(bytes: &[u8], format: TableFormat) -> Result<DatasetMeta, ProbeError> {
    match format {
        TableFormat::Csv => probe_csv(bytes),
        TableFormat::Json => probe_json_table(bytes),
    }
}

fn probe_csv(bytes: &[u8]) -> Result<DatasetMeta, ProbeError> {
    check_size(bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| ProbeError::Csv(e.to_string()))?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if let Some(dup) = names
        .iter()
        .enumerate()
        .find(|(i, n)| names[..*i].contains(n))
        .map(|(_, n)| n)
    {
        return Err(ProbeError::Invalid(format!("duplicate column `{dup}`")));
    }
    let mut cols = vec![ColumnInfer::default(); names.len()];
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| ProbeError::Csv(e.to_string()))?;
        for (col, cell) in cols.iter_mut().zip(record.iter()) {
            col.push_text(cell);
        }
        rows += 1;
    }
    let mut meta = DatasetMeta::new(DataKind::Table);
    meta.variables = cols
        .into_iter()
        .zip(&names)
        .map(|(c, n)| c.finish(n))
        .collect();
    meta.row_count = Some(rows);
    Ok(meta)
}

fn probe_json_table(bytes: &[u8]) -> Result<DatasetMeta, ProbeError> {
    let json = parse_json(bytes)?;
    let rows = json
        .as_array()
        .ok_or_else(|| ProbeError::Invalid("expected a JSON array of records".into()))?;
    let mut cols = Columns::default();
    for row in rows {
        let record = row
            .as_object()
            .ok_or_else(|| ProbeError::Invalid("every table record must be an object".into()))?;
        cols.push_record(record);
    }
    let mut meta = DatasetMeta::new(DataKind::Table);
    meta.variables = cols.finish("");
    meta.row_count = Some(rows.len());
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::DataType;

    #[test]
    fn csv_types_and_ranges() {
        let csv =
            "a,b,c,d,e\n1,x,true,2024-01-01,\n-2.5,y,false,2024-01-02,\n3e1,x,TRUE,2024-01-03,\n";
        let meta = probe_table(csv.as_bytes(), TableFormat::Csv).unwrap();
        let types: Vec<_> = meta.variables.iter().map(|v| v.data_type).collect();
        assert_eq!(
            types,
            [
                DataType::Number,
                DataType::String,
                DataType::Boolean,
                DataType::Date,
                DataType::String
            ]
        );
        assert_eq!(meta.variables[0].range, Some([-2.5, 30.0]));
        assert_eq!(
            meta.variables[1].categories,
            Some(vec!["x".into(), "y".into()])
        );
        assert_eq!(meta.variables[4].range, None);
        assert_eq!(meta.row_count, Some(3));
    }

    #[test]
    fn mixed_column_is_string() {
        let meta = probe_table(b"v\n1\n2\nx\n", TableFormat::Csv).unwrap();
        assert_eq!(meta.variables[0].data_type, DataType::String);
        assert_eq!(meta.variables[0].range, None);
    }

    #[test]
    fn empty_cells_are_excluded_from_range() {
        let meta = probe_table(b"v\n1\n\n5\n", TableFormat::Csv).unwrap();
        assert_eq!(meta.variables[0].range, Some([1.0, 5.0]));
        assert_eq!(meta.variables[0].stats.unwrap().count, 2);
    }

    #[test]
    fn ragged_rows_and_empty_input_are_errors() {
        assert!(matches!(
            probe_table(b"a,b\n1,2\n3\n", TableFormat::Csv),
            Err(ProbeError::Csv(_))
        ));
        assert!(matches!(
            probe_table(b"", TableFormat::Csv),
            Err(ProbeError::Empty)
        ));
    }

    #[test]
    fn json_records_union_keys() {
        let json = br#"[{"a": 1, "b": "p"}, {"a": 2.5, "c": null}, {"b": "q", "a": null}]"#;
        let meta = probe_table(json, TableFormat::Json).unwrap();
        let names: Vec<_> = meta.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(meta.variables[0].range, Some([1.0, 2.5]));
        assert_eq!(meta.variables[1].data_type, DataType::String);
    }
}
