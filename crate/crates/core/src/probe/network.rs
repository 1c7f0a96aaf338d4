use super::{parse_json, Columns, DataKind, DatasetMeta, ProbeError};

/// Probes a node-link JSON document `{ "nodes": [...], "links": [...] }`.
/// Node fields are reported as `node.<name>` and link fields as
/// `link.<name>`.
pub fn probe_network(bytes: &[u8]) -> Result<DatasetMeta, ProbeError> {
    let json = parse_json(bytes)?;
    let root = json
        .as_object()
        .ok_or_else(|| ProbeError::Invalid("expected an object with nodes and links".into()))?;
    let mut meta = DatasetMeta::new(DataKind::Network);
    for (key, prefix) in [("nodes", "node."), ("links", "link.")] {
        let items = root
            .get(key)
            .and_then(|v| v.as_array())
            .ok_or_else(|| ProbeError::Invalid(format!("missing `{key}` array")))?;
        let mut cols = Columns::default();
        for item in items {
            let record = item.as_object().ok_or_else(|| {
                ProbeError::Invalid(format!("every entry of `{key}` must be an object"))
            })?;
            cols.push_record(record);
        }
        meta.variables.extend(cols.finish(prefix));
    }
    Ok(meta)
}
