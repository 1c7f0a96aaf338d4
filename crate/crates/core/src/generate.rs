//! Seeded generator of valid programs together with the metadata they
//! verify against. Used by tests and benchmarks.

use crate::ast::{
    BindAction, Ctor, DataDecl, InteractionDecl, LayerDecl, LinkDecl, Program, SelectionDecl,
    ViewDecl,
};
use crate::palette::palette_names;
use crate::probe::{DataKind, DataType, DatasetMeta, VariableDesc};
use crate::value::{Object, Value};
use crate::verify::capability::{
    can_layer, BackendClass, BrushRole, Channel, FieldClass, MarkSpec, StyleType, AXES, MARKS,
};
use crate::verify::{Metas, MAX_VIEWS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Generated {
    pub program: Program,
    pub metas: Metas,
}

/// Name, constructor and metadata of every source the generator may use.
fn pool() -> Vec<(&'static str, Ctor, DatasetMeta)> {
    let mut table = DatasetMeta::new(DataKind::Table);
    table.variables = vec![
        VariableDesc::numeric("mass", 0.0, 12.5),
        VariableDesc::numeric("speed", -3.0, 3.0),
        VariableDesc::numeric("temp", 250.0, 320.0),
        VariableDesc::numeric("count", 0.0, 90.0),
        VariableDesc {
            categories: Some(vec!["a".into(), "b".into(), "c".into()]),
            ..VariableDesc::new("group", DataType::String)
        },
        VariableDesc::new("when", DataType::Date),
    ];
    table.row_count = Some(40);

    let mut image = DatasetMeta::new(DataKind::ImageData);
    image.variables = vec![
        VariableDesc::numeric("density", 0.0, 1.0),
        VariableDesc::numeric("u", -1.0, 1.0),
        VariableDesc::numeric("v", -1.0, 1.0),
        VariableDesc::numeric("w", -0.5, 0.5),
        VariableDesc {
            components: Some(3),
            ..VariableDesc::numeric("velocity", -1.0, 1.0)
        },
    ];
    image.dimensions = Some([16, 16, 16]);

    let mut network = DatasetMeta::new(DataKind::Network);
    network.variables = vec![
        VariableDesc::new("node.id", DataType::String),
        VariableDesc::new("link.source", DataType::String),
        VariableDesc::new("link.target", DataType::String),
        VariableDesc::numeric("link.weight", 1.0, 9.0),
    ];

    let mut geo = DatasetMeta::new(DataKind::GeoJSON);
    geo.variables = vec![
        VariableDesc::new("name", DataType::String),
        VariableDesc::numeric("population", 1e3, 1e7),
    ];
    geo.feature_count = Some(12);

    vec![
        ("stats", Ctor::Tbl, table),
        ("field", Ctor::Img, image),
        ("graph", Ctor::Net, network),
        ("regions", Ctor::Geo, geo),
        ("wave", Ctor::Func, DatasetMeta::new(DataKind::Procedural)),
    ]
}

fn func_args() -> Object {
    let mut equations = Object::new();
    equations.insert("f", "sin(x) * cos(y) * z");
    equations.insert("g", "x * x + y * y - z");
    let mut args = Object::new();
    args.insert("equations", equations);
    args.insert(
        "dims",
        Value::Array(vec![12.0.into(), 12.0.into(), 12.0.into()]),
    );
    args.insert("range", Value::Array(vec![(-1.0).into(), 1.0.into()]));
    args
}

/// Variables of a procedural source, mirroring what verification derives.
fn func_fields() -> Vec<VariableDesc> {
    vec![
        VariableDesc::numeric("f", -1.0, 1.0),
        VariableDesc::numeric("g", -1.0, 1.0),
    ]
}

fn fields_for<'a>(channel: &Channel, vars: &'a [VariableDesc]) -> Vec<&'a str> {
    vars.iter()
        .filter(|v| match channel.class {
            FieldClass::Any => true,
            FieldClass::Quantitative => matches!(v.data_type, DataType::Number | DataType::Date),
            FieldClass::Scalar => v.data_type == DataType::Number && v.components.unwrap_or(1) == 1,
        })
        .map(|v| v.name.as_str())
        .collect()
}

fn random_number(rng: &mut ChaCha8Rng, min: f64, max: f64, integer: bool) -> f64 {
    let lo = if min <= f64::MIN { -5.0 } else { min.max(0.0) };
    let hi = if max >= f64::MAX { lo + 20.0 } else { max };
    if integer {
        rng.gen_range(lo.ceil() as i64..=hi.min(lo + 50.0).floor() as i64) as f64
    } else {
        // Quarter steps keep printed numbers short and exact.
        let steps = ((hi - lo) * 4.0).min(200.0).floor() as i64;
        let x = lo + rng.gen_range(0..=steps) as f64 / 4.0;
        if x <= min {
            (min + 0.25).min(hi)
        } else {
            x
        }
    }
}

fn stops(rng: &mut ChaCha8Rng, keys: &[&str]) -> Value {
    let n = rng.gen_range(1..4);
    let mut s = 0.0;
    Value::Array(
        (0..n)
            .map(|_| {
                let mut o = Object::new();
                for k in keys {
                    o.insert(*k, rng.gen_range(0..=4) as f64 / 4.0);
                }
                s += rng.gen_range(0..=8) as f64 / 4.0;
                o.insert("s", s);
                Value::Object(o)
            })
            .collect(),
    )
}

fn style_value(rng: &mut ChaCha8Rng, ty: StyleType) -> Value {
    const COLORS: &[&str] = &["#1f77b4", "#ff7f0e", "steelblue", "#abc", "crimson"];
    match ty {
        StyleType::Number { min, max, integer } => random_number(rng, min, max, integer).into(),
        StyleType::Color => (*COLORS.choose(rng).unwrap()).into(),
        StyleType::Bool => rng.gen_bool(0.5).into(),
        StyleType::Palette => (*palette_names().choose(rng).unwrap()).into(),
        StyleType::Choice(options) => (*options.choose(rng).unwrap()).into(),
        StyleType::Axes => {
            let n = rng.gen_range(1..=AXES.len());
            let picked: Vec<&str> = AXES.choose_multiple(rng, n).copied().collect();
            if n == 1 && rng.gen_bool(0.5) {
                picked[0].into()
            } else {
                Value::str_array(picked)
            }
        }
        StyleType::Quaternion => Value::Array(vec![0.0.into(), 0.0.into(), 0.0.into(), 1.0.into()]),
        StyleType::Bounds => Value::Array(
            [0.0, 1.0, 0.0, 0.5, 0.25, 1.0]
                .into_iter()
                .map(Value::from)
                .collect(),
        ),
        StyleType::ColorStops => stops(rng, &["r", "g", "b"]),
        StyleType::OpacityStops => stops(rng, &["a"]),
    }
}

struct Source {
    name: &'static str,
    kind: DataKind,
    vars: Vec<VariableDesc>,
}

fn layer(rng: &mut ChaCha8Rng, mark: &MarkSpec, from: &Source, geo: Option<&str>) -> LayerDecl {
    let mut encode = Object::new();
    for channel in mark.required {
        fill_channel(rng, channel, &from.vars, &mut encode);
    }
    for channel in mark.optional {
        if rng.gen_bool(0.4) {
            fill_channel(rng, channel, &from.vars, &mut encode);
        }
    }
    let mut style = Object::new();
    for key in mark.style {
        if rng.gen_bool(0.3) {
            style.insert(key.name, style_value(rng, key.ty));
        }
    }
    LayerDecl {
        from: Some(from.name.to_string()),
        geo: geo.map(str::to_string),
        mark: Some(mark.name.to_string()),
        encode: (!encode.is_empty() || rng.gen_bool(0.2)).then_some(encode),
        style: (!style.is_empty() || rng.gen_bool(0.1)).then_some(style),
        where_clause: None,
    }
}

fn fill_channel(
    rng: &mut ChaCha8Rng,
    channel: &Channel,
    vars: &[VariableDesc],
    encode: &mut Object,
) {
    let options = fields_for(channel, vars);
    if options.is_empty() {
        return;
    }
    let value = if channel.list {
        let n = rng.gen_range(1..=options.len().min(3));
        Value::str_array(options.choose_multiple(rng, n).copied())
    } else {
        (*options.choose(rng).unwrap()).into()
    };
    encode.insert(channel.name, value);
}

/// Marks that can draw some source in the pool.
fn drawable(sources: &[Source]) -> Vec<&'static MarkSpec> {
    MARKS
        .iter()
        .filter(|m| sources.iter().any(|s| usable(m, s)))
        .collect()
}

/// Whether every required channel can be filled from the source.
fn usable(mark: &MarkSpec, source: &Source) -> bool {
    mark.data.contains(&source.kind)
        && mark
            .required
            .iter()
            .all(|c| !fields_for(c, &source.vars).is_empty())
        && (mark.channel("field").is_none()
            || !fields_for(mark.channel("field").unwrap(), &source.vars).is_empty())
}

/// A valid program and matching metadata for the given seed.
pub fn generate(seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = pool();
    let sources: Vec<Source> = pool
        .iter()
        .map(|(name, ctor, meta)| Source {
            name,
            kind: meta.kind,
            vars: if *ctor == Ctor::Func {
                func_fields()
            } else {
                meta.variables.clone()
            },
        })
        .collect();
    let marks = drawable(&sources);

    let n_views = rng.gen_range(1..=MAX_VIEWS.min(5));
    let mut views = Vec::new();
    let mut used: Vec<&str> = Vec::new();
    for i in 0..n_views {
        let mut view = ViewDecl::new(format!("view_{i}"));
        let primary = *marks.choose(&mut rng).unwrap();
        let mut layer_marks = vec![primary];
        if rng.gen_bool(0.3) {
            let partners: Vec<&&MarkSpec> = marks
                .iter()
                .filter(|m| {
                    can_layer(primary.name, m.name)
                        && !(primary.name == "choropleth" && m.name == "choropleth")
                })
                .collect();
            if let Some(p) = partners.choose(&mut rng) {
                layer_marks.push(p);
            }
        }
        for mark in layer_marks {
            let candidates: Vec<&Source> = sources.iter().filter(|s| usable(mark, s)).collect();
            let from = *candidates.choose(&mut rng).unwrap();
            let geo =
                (mark.name == "choropleth" && from.kind == DataKind::Table).then_some("regions");
            view.layers.push(layer(&mut rng, mark, from, geo));
            for name in std::iter::once(from.name).chain(geo) {
                if !used.contains(&name) {
                    used.push(name);
                }
            }
        }
        views.push(view);
    }

    let mut selections = Vec::new();
    add_coordination(&mut rng, &mut views, &mut selections);

    let mut data = Vec::new();
    let mut metas = Metas::new();
    for (name, ctor, meta) in pool.into_iter().filter(|(n, ..)| used.contains(n)) {
        let args = match ctor {
            Ctor::Func => func_args(),
            Ctor::Img => {
                let mut a = Object::new();
                a.insert("format", "vti");
                a
            }
            _ => Object::new(),
        };
        data.push(DataDecl {
            name: name.to_string(),
            ctor,
            path: ctor
                .takes_path()
                .then(|| format!("{name}.{}", extension(ctor))),
            args,
        });
        if ctor != Ctor::Func {
            metas.insert(name.to_string(), meta);
        }
    }
    // Stable but shuffled declaration order.
    data.shuffle(&mut rng);

    Generated {
        program: Program {
            data,
            views,
            selections,
        },
        metas,
    }
}

fn extension(ctor: Ctor) -> &'static str {
    match ctor {
        Ctor::Img => "vti",
        Ctor::Tbl => "csv",
        Ctor::Net => "json",
        Ctor::Geo => "geojson",
        Ctor::Func => "",
    }
}

fn backend(view: &ViewDecl) -> BackendClass {
    let mark = view.layers[0]
        .mark
        .as_deref()
        .and_then(crate::verify::mark_spec);
    mark.map_or(BackendClass::Chart, |m| m.backend)
}

fn has(view: &ViewDecl, pred: impl Fn(&MarkSpec) -> bool) -> bool {
    view.layers
        .iter()
        .filter_map(|l| l.mark.as_deref().and_then(crate::verify::mark_spec))
        .any(pred)
}

fn ids(views: &[&ViewDecl]) -> Value {
    Value::str_array(views.iter().map(|v| v.id.clone()))
}

fn link(pairs: Vec<(&str, Value)>) -> LinkDecl {
    LinkDecl {
        args: pairs.into_iter().collect(),
    }
}

/// Adds selection, slice and transfer-function links where the views allow.
fn add_coordination(
    rng: &mut ChaCha8Rng,
    views: &mut [ViewDecl],
    selections: &mut Vec<SelectionDecl>,
) {
    let chart: Vec<usize> = (0..views.len())
        .filter(|&i| backend(&views[i]) == BackendClass::Chart)
        .collect();
    let emitter = chart
        .iter()
        .copied()
        .find(|&i| has(&views[i], |m| m.brush == BrushRole::EmitFollow));
    if let (Some(e), true) = (emitter, chart.len() >= 2 && rng.gen_bool(0.6)) {
        let point = rng.gen_bool(0.2);
        let mut sel = SelectionDecl::named("brush_sel");
        sel.args
            .insert("type", if point { "point" } else { "interval" });
        if rng.gen_bool(0.5) {
            sel.args.insert("bind_view", views[e].id.clone());
        }
        selections.push(sel);
        if !point {
            views[e].interactions.push(InteractionDecl {
                event: "brush".into(),
                binds: vec![BindAction {
                    selection: "brush_sel".into(),
                    args: Object::new(),
                }],
            });
        }
        let members: Vec<&ViewDecl> = chart.iter().map(|&i| &views[i]).collect();
        let mut pairs = vec![
            ("selection", Value::str("brush_sel")),
            ("views", ids(&members)),
        ];
        if rng.gen_bool(0.3) {
            pairs.push((
                "mode",
                (*["filter", "highlight", "color"].choose(rng).unwrap()).into(),
            ));
        }
        views[e].links.push(link(pairs));
    }

    let sliced: Vec<usize> = (0..views.len())
        .filter(|&i| has(&views[i], |m| m.name == "slice"))
        .collect();
    if sliced.len() >= 2 && rng.gen_bool(0.6) {
        let members: Vec<&ViewDecl> = sliced.iter().map(|&i| &views[i]).collect();
        let decl = link(vec![
            ("slice", Value::str("slices")),
            ("axes", Value::str_array(["XY"])),
            ("views", ids(&members)),
        ]);
        views[sliced[0]].links.push(decl);
    }
    let tf: Vec<usize> = (0..views.len())
        .filter(|&i| {
            backend(&views[i]) == BackendClass::Spatial
                && has(&views[i], |m| matches!(m.name, "volume" | "slice"))
        })
        .collect();
    if tf.len() >= 2 && rng.gen_bool(0.6) {
        let members: Vec<&ViewDecl> = tf.iter().map(|&i| &views[i]).collect();
        let decl = link(vec![
            ("tf", Value::str("shared_tf")),
            ("views", ids(&members)),
        ]);
        views[tf[0]].links.push(decl);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify;

    #[test]
    fn same_seed_same_program() {
        assert_eq!(generate(42).program, generate(42).program);
        assert_ne!(generate(1).program, generate(2).program);
    }

    #[test]
    fn generated_programs_verify() {
        for seed in 0..300 {
            let g = generate(seed);
            if let Err(diags) = verify(&g.program, &g.metas) {
                panic!(
                    "seed {seed}: {diags:#?}\n{}",
                    crate::print_brace(&g.program)
                );
            }
        }
    }
}
