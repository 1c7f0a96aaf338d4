use visdsl_core::probe::{DataKind, DataType, DatasetMeta, VariableDesc};
use visdsl_core::verify::{check_links_and_selections, check_mark_encoding, codes, verify, Metas};
use visdsl_core::{parse, parse_brace, Object, Program, Value};

fn image(vars: &[&str]) -> DatasetMeta {
    let mut m = DatasetMeta::new(DataKind::ImageData);
    m.dimensions = Some([4, 4, 4]);
    m.variables = vars
        .iter()
        .map(|v| VariableDesc {
            components: Some(1),
            ..VariableDesc::numeric(*v, 0.0, 1.0)
        })
        .collect();
    m
}

fn table(cols: &[(&str, DataType)]) -> DatasetMeta {
    let mut m = DatasetMeta::new(DataKind::Table);
    m.variables = cols
        .iter()
        .map(|(n, t)| VariableDesc::new(*n, *t))
        .collect();
    m
}

fn teaser_metas() -> Metas {
    let mut metas = Metas::new();
    metas.insert(
        "vol".into(),
        image(&["critq", "pp", "ux", "uy", "uz", "vorticity"]),
    );
    let num = DataType::Number;
    metas.insert(
        "sample".into(),
        table(&[
            ("ux", num),
            ("uy", num),
            ("uz", num),
            ("vorticity", num),
            ("pp", num),
            ("critq", num),
        ]),
    );
    metas
}

fn codes_of(src: &str, metas: &Metas) -> Vec<&'static str> {
    let program = parse(src).unwrap();
    match verify(&program, metas) {
        Ok(_) => vec![],
        Err(d) => d.into_iter().map(|d| d.code).collect(),
    }
}

fn teaser() -> Program {
    parse_brace(include_str!("../fixtures/teaser.brace.rvn")).unwrap()
}

#[test]
fn teaser_layer_ids_follow_declaration_order() {
    let spec = verify(&teaser(), &teaser_metas()).unwrap();
    let ids: Vec<_> = spec
        .views
        .iter()
        .flat_map(|v| v.layers.iter().map(|l| l.id.as_str()))
        .collect();
    assert_eq!(
        ids,
        [
            "volume_streamline:volume#0",
            "volume_streamline:streamline#1",
            "histogram:histogram#0"
        ]
    );
}

#[test]
fn undeclared_source_is_reported() {
    let src =
        r#"vis { data { vol: img("a.vti"); } view "v" { layer { from: ghost; mark: volume; } } }"#;
    let mut metas = Metas::new();
    metas.insert("vol".into(), image(&["s"]));
    let program = parse(src).unwrap();
    let diags = verify(&program, &metas).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, codes::UNKNOWN_SOURCE);
    assert!(diags[0].message.contains("ghost"));
}

#[test]
fn volume_and_histogram_cannot_share_a_view() {
    let src = r#"vis { data { vol: img("a.vti"); t: tbl("t.csv"); }
        view "v" { layer { from: vol; mark: volume; } layer { from: t; mark: histogram; encode: { x: "a" }; } } }"#;
    let mut metas = Metas::new();
    metas.insert("vol".into(), image(&["s"]));
    metas.insert("t".into(), table(&[("a", DataType::Number)]));
    assert_eq!(codes_of(src, &metas), [codes::MIXED_BACKEND]);
}

#[test]
fn encoding_checks_against_metadata() {
    let meta = image(&["ux", "uy", "uz"]);
    let mut enc = Object::new();
    enc.insert("vx", Value::str("ux"));
    enc.insert("vy", Value::str("uy"));
    enc.insert("vz", Value::str("uz"));
    assert!(check_mark_encoding("streamline", &enc, &meta).is_empty());
    assert!(check_mark_encoding("volume", &Object::new(), &image(&["s"])).is_empty());

    let t = table(&[("a", DataType::Number), ("b", DataType::String)]);
    let mut only_x = Object::new();
    only_x.insert("x", Value::str("a"));
    let d = check_mark_encoding("points", &only_x, &t);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].code, codes::MISSING_REQUIRED_CHANNEL);
    assert!(d[0].message.contains("`y`"));

    let mut on_string = Object::new();
    on_string.insert("x", Value::str("b"));
    let d = check_mark_encoding("histogram", &on_string, &t);
    assert_eq!(d[0].code, codes::INCOMPATIBLE_FIELD_TYPE);

    let d = check_mark_encoding("volume", &Object::new(), &t);
    assert_eq!(d[0].code, codes::MARK_DATA_MISMATCH);

    let mut ghost = Object::new();
    ghost.insert("x", Value::str("zz"));
    let d = check_mark_encoding("histogram", &ghost, &t);
    assert_eq!(d[0].code, codes::UNKNOWN_FIELD);
    assert!(d[0].message.contains("zz"));

    let mut vec3 = image(&["v"]);
    vec3.variables[0].components = Some(3);
    let mut enc = Object::new();
    for c in ["vx", "vy", "vz"] {
        enc.insert(c, Value::str("v"));
    }
    assert!(check_mark_encoding("streamline", &enc, &vec3)
        .iter()
        .all(|d| d.code == codes::INCOMPATIBLE_FIELD_TYPE));
}

#[test]
fn head_links_verify() {
    let program = parse(include_str!("../fixtures/head_linked.rvn")).unwrap();
    let mut metas = Metas::new();
    metas.insert("vol".into(), image(&["intensity"]));
    let spec = verify(&program, &metas).unwrap();
    assert_eq!(spec.views[0].links.len(), 2);
    assert_eq!(spec.unique_links().len(), 2);
    assert!(check_links_and_selections(&program, &spec.views).is_empty());
}

#[test]
fn link_kind_exclusivity_and_backends() {
    let base = |link: &str| {
        format!(
            r#"vis {{ data {{ vol: img("a.vti"); t: tbl("t.csv"); }}
            selections {{ select(name: "s"); }}
            view "a" {{ {link} layer {{ from: vol; mark: slice; }} }}
            view "b" {{ layer {{ from: t; mark: points; encode: {{ x: "x", y: "y" }}; }} }}
            view "c" {{ layer {{ from: vol; mark: volume; }} }} }}"#
        )
    };
    let mut metas = Metas::new();
    metas.insert("vol".into(), image(&["s"]));
    metas.insert(
        "t".into(),
        table(&[("x", DataType::Number), ("y", DataType::Number)]),
    );
    let cases = [
        (
            r#"link(tf: "t", slice: "s", axes: ["XY"], views: ["a", "c"]);"#,
            codes::MULTIPLE_KINDS,
        ),
        (r#"link(views: ["a", "c"]);"#, codes::MISSING_LINK_KIND),
        (
            r#"link(selection: "s", views: ["a", "b"]);"#,
            codes::CROSS_BACKEND_LINK,
        ),
        (
            r#"link(tf: "t", views: ["a", "b"]);"#,
            codes::CROSS_BACKEND_LINK,
        ),
        (
            r#"link(selection: "s", views: ["a", "c"]);"#,
            codes::LINK_BACKEND_MISMATCH,
        ),
        (
            r#"link(slice: "s", views: ["a"]);"#,
            codes::SLICE_LINK_MISSING_AXES,
        ),
        (
            r#"link(slice: "s", axes: ["XY"], views: ["a", "c"]);"#,
            codes::SLICE_LINK_WITHOUT_SLICE,
        ),
        (r#"link(tf: "t", views: ["a", "zz"]);"#, codes::UNKNOWN_VIEW),
        (
            r#"link(tf: "t", axes: ["XY"], views: ["a", "c"]);"#,
            codes::AXES_WITHOUT_SLICE,
        ),
        (r#"link(tf: "t");"#, codes::MISSING_LINK_VIEWS),
        (
            r#"link(tf: "t", views: ["a", "c"], color: "red");"#,
            codes::UNKNOWN_LINK_ARG,
        ),
        (r#"link(tf: "t", views: ["a", "c"]);"#, ""),
    ];
    for (link, want) in cases {
        let got = codes_of(&base(link), &metas);
        if want.is_empty() {
            assert!(got.is_empty(), "{link}: {got:?}");
        } else {
            assert_eq!(got, [want], "{link}");
        }
    }
}

#[test]
fn interaction_checks() {
    let src = |sel: &str, mark: &str| {
        format!(
            r#"vis {{ data {{ t: tbl("t.csv"); }} selections {{ select(name: "{sel}"); }}
            view "a" {{ layer {{ from: t; mark: {mark}; encode: {{ x: "x", y: "y" }}; }}
              interactions {{ on("brush") {{ bind("brushSel"); }} }} }} }}"#
        )
    };
    let mut metas = Metas::new();
    metas.insert(
        "t".into(),
        table(&[("x", DataType::Number), ("y", DataType::Number)]),
    );
    assert!(codes_of(&src("brushSel", "points"), &metas).is_empty());
    assert_eq!(
        codes_of(&src("other", "points"), &metas),
        [codes::UNDECLARED_SELECTION]
    );
    assert_eq!(
        codes_of(&src("brushSel", "bar"), &metas),
        [codes::BRUSH_NOT_SUPPORTED]
    );
}

#[test]
fn view_count_bounds() {
    let views = |n: usize| {
        let mut s = String::from(r#"vis { data { vol: img("a.vti"); } "#);
        for i in 0..n {
            s.push_str(&format!(
                r#"view "v{i}" {{ layer {{ from: vol; mark: volume; }} }} "#
            ));
        }
        s.push('}');
        s
    };
    let mut metas = Metas::new();
    metas.insert("vol".into(), image(&["s"]));
    assert!(codes_of(&views(9), &metas).is_empty());
    assert_eq!(codes_of(&views(10), &metas), [codes::VIEW_COUNT]);
    assert_eq!(codes_of(&views(0), &metas), [codes::VIEW_COUNT]);
    assert_eq!(
        codes_of("vis { }", &metas),
        [codes::NO_DATA, codes::VIEW_COUNT]
    );
}

#[test]
fn diagnostics_accumulate_in_stable_order() {
    let src = r#"vis { data { t: tbl("t.csv"); }
        view "a" { layer { from: ghost; mark: volume; } layer { from: t; mark: nope; } layer { mark: bar; } }
        view "a" { layer { from: t; mark: histogram; style: { bins: 0, colour: "red" }; } } }"#;
    let mut metas = Metas::new();
    metas.insert("t".into(), table(&[("x", DataType::Number)]));
    let got = codes_of(src, &metas);
    assert_eq!(
        got,
        [
            codes::UNKNOWN_SOURCE,
            codes::UNKNOWN_MARK,
            codes::MISSING_FROM,
            codes::DUPLICATE_VIEW,
            codes::MISSING_REQUIRED_CHANNEL,
            codes::INVALID_STYLE_VALUE,
            codes::UNKNOWN_STYLE_KEY,
        ]
    );
    assert_eq!(got, codes_of(src, &metas));
}

#[test]
fn procedural_sources_synthesize_metadata() {
    let ok = r#"vis { data { f: func(dims: [8, 8, 8], range: [-1, 1], equations: { d: "sin(x)" }); }
        view "v" { layer { from: f; mark: isosurface; encode: { field: "d" }; } } }"#;
    let spec = verify(&parse(ok).unwrap(), &Metas::new()).unwrap();
    let meta = &spec.data[0].meta;
    assert_eq!(meta.dimensions, Some([8, 8, 8]));
    assert_eq!(meta.variables[0].range, Some([-1.0, 1.0]));

    let missing = r#"vis { data { f: func(dims: [8, 8, 8]); } view "v" { layer { from: f; mark: volume; } } }"#;
    assert_eq!(
        codes_of(missing, &Metas::new()),
        [codes::MISSING_FUNC_ARG, codes::MISSING_FUNC_ARG]
    );
}

#[test]
fn bubble_becomes_points() {
    let src = r#"vis { data { t: tbl("t.csv"); }
        view "v" { layer { from: t; mark: bubble; encode: { x: "x", y: "y", size: "x" }; } } }"#;
    let mut metas = Metas::new();
    metas.insert(
        "t".into(),
        table(&[("x", DataType::Number), ("y", DataType::Number)]),
    );
    let spec = verify(&parse(src).unwrap(), &metas).unwrap();
    let layer = &spec.views[0].layers[0];
    assert_eq!(layer.mark, "points");
    assert_eq!(layer.id, "v:points#0");
    assert!(layer.encode.contains_key("size"));
}

#[test]
fn choropleth_needs_geojson_geo() {
    let mut metas = Metas::new();
    metas.insert(
        "t".into(),
        table(&[("state", DataType::String), ("pop", DataType::Number)]),
    );
    let mut g = DatasetMeta::new(DataKind::GeoJSON);
    g.variables = vec![VariableDesc::new("name", DataType::String)];
    metas.insert("g".into(), g);
    let layer = |geo: &str| {
        format!(
            r#"vis {{ data {{ t: tbl("t.csv"); g: geo("g.geojson"); }}
            view "m" {{ layer {{ from: t; {geo} mark: choropleth; encode: {{ region: "state", value: "pop" }}; }} }} }}"#
        )
    };
    assert!(codes_of(&layer("geo: g;"), &metas).is_empty());
    assert_eq!(codes_of(&layer(""), &metas), [codes::MISSING_GEO]);
    assert_eq!(
        codes_of(&layer("geo: t;"), &metas),
        [codes::GEO_NOT_GEOJSON]
    );
}
