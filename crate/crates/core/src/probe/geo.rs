use super::{parse_json, Columns, DataKind, DatasetMeta, ProbeError};

/// Probes a GeoJSON FeatureCollection. Variables are the union of feature
/// property keys.
pub fn probe_geo(bytes: &[u8]) -> Result<DatasetMeta, ProbeError> {
    let json = parse_json(bytes)?;
    let root = json
        .as_object()
        .filter(|o| o.get("type").and_then(|t| t.as_str()) == Some("FeatureCollection"))
        .ok_or_else(|| ProbeError::Invalid("root must be a GeoJSON FeatureCollection".into()))?;
    let features = root
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| ProbeError::Invalid("FeatureCollection without `features` array".into()))?;
    let mut cols = Columns::default();
    for feature in features {
        match feature.get("properties") {
            Some(serde_json::Value::Object(props)) => cols.push_record(props),
            Some(serde_json::Value::Null) | None => {}
            Some(_) => {
                return Err(ProbeError::Invalid(
                    "feature properties must be an object".into(),
                ))
            }
        }
    }
    let mut meta = DatasetMeta::new(DataKind::GeoJSON);
    meta.variables = cols.finish("");
    meta.feature_count = Some(features.len());
    meta.crs = root
        .get("crs")
        .and_then(|c| c.pointer("/properties/name"))
        .and_then(|n| n.as_str())
        .map(str::to_string);
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature(props: &str) -> String {
        format!(r#"{{"type":"Feature","geometry":null,"properties":{props}}}"#)
    }

    #[test]
    fn feature_count_and_properties() {
        let doc = format!(
            r#"{{"type":"FeatureCollection","features":[{},{},{}]}}"#,
            feature(r#"{"ISO_A3":"FRA"}"#),
            feature(r#"{"ISO_A3":"DEU"}"#),
            feature(r#"{"ISO_A3":"ITA"}"#)
        );
        let meta = probe_geo(doc.as_bytes()).unwrap();
        assert_eq!(meta.feature_count, Some(3));
        assert_eq!(meta.variables.len(), 1);
        assert_eq!(meta.variables[0].name, "ISO_A3");
    }

    #[test]
    fn crs_name_is_read() {
        let doc = r#"{"type":"FeatureCollection","crs":{"type":"name","properties":{"name":"EPSG:4326"}},"features":[]}"#;
        assert_eq!(
            probe_geo(doc.as_bytes()).unwrap().crs.as_deref(),
            Some("EPSG:4326")
        );
    }

    #[test]
    fn non_collection_root_is_rejected() {
        assert!(probe_geo(br#"{"type":"Feature"}"#).is_err());
    }
}
