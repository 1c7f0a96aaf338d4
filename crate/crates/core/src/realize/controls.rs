//! Interactive control specs derived from a realized view.

use super::ir::{
    Camera, CategoryColor, Control, ControlKind, RealizedLayer, RealizedView, Slider, ViewControls,
};
use super::round4;
use crate::palette;
use crate::value::{Object, Value};
use crate::verify::capability::SANKEY_LINK_COLOR;
use indexmap::IndexMap;

/// Slider bounds for the volume ray step.
pub const SAMPLE_DISTANCE_SLIDER: (f64, f64, f64) = (0.1, 2.0, 0.01);
/// Bin-count slider bounds for histograms.
pub const BINS_SLIDER: (f64, f64) = (5.0, 100.0);

fn control(name: &str, kind: ControlKind, key: Option<&str>, default: Value) -> Control {
    Control {
        name: name.to_string(),
        kind,
        style_key: key.map(str::to_string),
        default,
        min: None,
        max: None,
        step: None,
        options: None,
        deferred: false,
        apply_on_confirm: false,
    }
}

fn style_num(layer: &RealizedLayer, key: &str) -> f64 {
    layer.style.get(key).and_then(Value::as_f64).unwrap_or(0.0)
}

/// Slider editing a style slot; bounds widen to include the current value.
fn slider(layer: &RealizedLayer, name: &str, key: &str, min: f64, max: f64, step: f64) -> Control {
    let v = style_num(layer, key);
    Control {
        min: Some(min.min(v)),
        max: Some(max.max(v)),
        step: Some(step),
        ..control(name, ControlKind::Slider, Some(key), Value::Number(v))
    }
}

fn free_slider(name: &str, default: f64, min: f64, max: f64, step: f64) -> Control {
    Control {
        min: Some(min),
        max: Some(max),
        step: Some(step),
        ..control(name, ControlKind::Slider, None, Value::Number(default))
    }
}

fn styled(layer: &RealizedLayer, name: &str, kind: ControlKind, key: &str) -> Control {
    control(
        name,
        kind,
        Some(key),
        layer.style.get(key).cloned().unwrap_or(Value::Null),
    )
}

fn dropdown(layer: &RealizedLayer, name: &str, key: &str, options: Vec<String>) -> Control {
    Control {
        options: Some(options),
        ..styled(layer, name, ControlKind::Dropdown, key)
    }
}

fn palette_dropdown(layer: &RealizedLayer, name: &str, key: &str) -> Control {
    dropdown(
        layer,
        name,
        key,
        palette::palette_names()
            .into_iter()
            .map(String::from)
            .collect(),
    )
}

fn deferred(mut c: Control) -> Control {
    c.deferred = true;
    c
}

fn on_confirm(mut c: Control) -> Control {
    c.apply_on_confirm = true;
    c
}

fn categories_value(cats: &[CategoryColor]) -> Value {
    Value::Array(
        cats.iter()
            .map(|c| {
                let mut o = Object::new();
                o.push("value", Value::str(c.value.clone()));
                o.push("color", Value::str(c.color.clone()));
                Value::Object(o)
            })
            .collect(),
    )
}

fn categories(layer: &RealizedLayer) -> Control {
    let cats = layer.categories.as_deref().unwrap_or(&[]);
    control(
        "categories",
        ControlKind::Categories,
        None,
        categories_value(cats),
    )
}

/// Axis normal index for an axis-aligned slice plane.
fn normal_axis(axis: &str) -> Option<usize> {
    match axis {
        "XY" => Some(2),
        "XZ" => Some(1),
        "YZ" => Some(0),
        _ => None,
    }
}

fn layer_controls(layer: &RealizedLayer) -> Vec<Control> {
    let dims = layer.dimensions.unwrap_or([1, 1, 1]);
    let range = layer.range.unwrap_or([0.0, 1.0]);
    let has_categories = layer.categories.as_ref().is_some_and(|c| !c.is_empty());
    let fill_or_categories = |layer: &RealizedLayer| {
        if has_categories {
            categories(layer)
        } else {
            styled(layer, "fillColor", ControlKind::Color, "fill_color")
        }
    };
    match layer.mark.as_str() {
        "volume" => vec![
            styled(layer, "ctf", ControlKind::TfEditor, "ctf"),
            styled(layer, "otf", ControlKind::TfEditor, "otf"),
            palette_dropdown(layer, "palette", "palette"),
        ],
        "isosurface" => {
            let step = match round4((range[1] - range[0]) / 100.0) {
                s if s > 0.0 => s,
                _ => 0.01,
            };
            vec![
                slider(layer, "isoValue", "iso_value", range[0], range[1], step),
                styled(layer, "color", ControlKind::Color, "color"),
                slider(layer, "opacity", "opacity", 0.0, 1.0, 0.01),
                deferred(Control {
                    options: Some(
                        ["matte", "glossy", "metallic", "custom"]
                            .map(String::from)
                            .to_vec(),
                    ),
                    ..control("material", ControlKind::Dropdown, None, Value::str("matte"))
                }),
                deferred(free_slider("specular", 0.0, 0.0, 1.0, 0.01)),
                deferred(free_slider("diffuse", 1.0, 0.0, 1.0, 0.01)),
                deferred(free_slider("ambient", 0.0, 0.0, 1.0, 0.01)),
            ]
        }
        "slice" => {
            let axes: Vec<String> = layer
                .style
                .get("axes")
                .and_then(Value::as_str_list)
                .map(|l| l.into_iter().map(String::from).collect())
                .or_else(|| {
                    layer
                        .style
                        .get("axes")
                        .and_then(Value::as_str)
                        .map(|a| vec![a.to_string()])
                })
                .unwrap_or_default();
            let mut out = Vec::new();
            for axis in axes.iter() {
                if let Some(n) = normal_axis(axis) {
                    let hi = dims[n].saturating_sub(1) as f64;
                    out.push(free_slider(
                        &format!("sliceIndex{axis}"),
                        (hi / 2.0).floor(),
                        0.0,
                        hi,
                        1.0,
                    ));
                    out.push(deferred(control(
                        &format!("visible{axis}"),
                        ControlKind::Toggle,
                        None,
                        Value::Bool(true),
                    )));
                }
            }
            out.push(deferred(Control {
                min: Some(range[0]),
                max: Some(range[1]),
                ..control(
                    "colorRange",
                    ControlKind::RangeSlider,
                    None,
                    Value::Array(vec![Value::Number(range[0]), Value::Number(range[1])]),
                )
            }));
            out.push(styled(layer, "ctf", ControlKind::TfEditor, "ctf"));
            out.push(palette_dropdown(layer, "palette", "palette"));
            if axes.iter().any(|a| a == "oblique") {
                let reach = dims.iter().copied().max().unwrap_or(1) as f64 / 2.0;
                out.push(deferred(styled(
                    layer,
                    "rotation",
                    ControlKind::Gizmo,
                    "quaternion",
                )));
                out.push(deferred(slider(
                    layer, "offset", "offset", -reach, reach, 0.5,
                )));
            }
            out
        }
        "streamline" => {
            let mut out: Vec<Control> = ["X", "Y", "Z"]
                .iter()
                .zip(dims)
                .map(|(axis, d)| {
                    on_confirm(deferred(Control {
                        min: Some(0.0),
                        max: Some(d as f64),
                        ..control(
                            &format!("seedBox{axis}"),
                            ControlKind::RangeSlider,
                            None,
                            Value::Array(vec![Value::Number(0.0), Value::Number(d as f64)]),
                        )
                    }))
                })
                .collect();
            out.push(slider(layer, "count", "seed_count", 1.0, 1000.0, 1.0));
            out.push(on_confirm(slider(
                layer,
                "integrationStep",
                "integration_step",
                0.01,
                2.0,
                0.01,
            )));
            out.push(slider(layer, "maxSteps", "max_steps", 10.0, 5000.0, 10.0));
            out.push(styled(layer, "color", ControlKind::Color, "color"));
            out.push(slider(layer, "tubeRadius", "tube_radius", 0.0, 2.0, 0.01));
            out.push(deferred(control(
                "recalculate",
                ControlKind::Button,
                None,
                Value::Null,
            )));
            out
        }
        "lic" => vec![
            slider(layer, "numberOfSteps", "number_of_steps", 1.0, 200.0, 1.0),
            slider(layer, "stepSize", "step_size", 0.1, 5.0, 0.1),
            styled(layer, "enhancedLic", ControlKind::Toggle, "enhanced_lic"),
            slider(layer, "licIntensity", "lic_intensity", 0.0, 1.0, 0.05),
        ],
        "points" => {
            let mut out = vec![styled(layer, "fillColor", ControlKind::Color, "fill_color")];
            if has_categories {
                out.push(categories(layer));
            }
            out
        }
        "hexbin" | "choropleth" => vec![palette_dropdown(layer, "palette", "color_scheme")],
        "heatmap" => vec![
            palette_dropdown(layer, "palette", "color_scheme"),
            control("flipX", ControlKind::Toggle, None, Value::Bool(false)),
            control("flipY", ControlKind::Toggle, None, Value::Bool(false)),
        ],
        "histogram" => vec![
            slider(layer, "bins", "bins", BINS_SLIDER.0, BINS_SLIDER.1, 1.0),
            styled(layer, "fillColor", ControlKind::Color, "fill_color"),
        ],
        "kde" => vec![styled(
            layer,
            "strokeColor",
            ControlKind::Color,
            "stroke_color",
        )],
        "boxplot" | "violin" | "ridgeline" | "bar" => vec![fill_or_categories(layer)],
        "line" => {
            let mut out = vec![styled(
                layer,
                "strokeColor",
                ControlKind::Color,
                "stroke_color",
            )];
            if has_categories {
                out.push(categories(layer));
            }
            out
        }
        "band" => vec![styled(layer, "fillColor", ControlKind::Color, "fill_color")],
        "pie" | "chord" => vec![categories(layer)],
        "sankey" => vec![dropdown(
            layer,
            "linkColor",
            "link_color",
            SANKEY_LINK_COLOR.iter().map(|s| s.to_string()).collect(),
        )],
        "force_graph" => {
            let mut out = vec![
                slider(layer, "nodeRadius", "node_radius", 1.0, 20.0, 0.5),
                slider(layer, "linkDistance", "link_distance", 5.0, 300.0, 1.0),
                slider(layer, "linkStrength", "link_strength", 0.0, 1.0, 0.01),
                slider(layer, "chargeStrength", "charge_strength", -500.0, 0.0, 1.0),
                deferred(control(
                    "pathSource",
                    ControlKind::FieldPicker,
                    None,
                    Value::Null,
                )),
                deferred(control(
                    "pathTarget",
                    ControlKind::FieldPicker,
                    None,
                    Value::Null,
                )),
            ];
            if has_categories {
                out.push(categories(layer));
            }
            out
        }
        "parallel_coordinates" => {
            if has_categories {
                vec![categories(layer)]
            } else {
                vec![palette_dropdown(layer, "palette", "color_scheme")]
            }
        }
        _ => Vec::new(),
    }
}

/// View-wide and per-layer controls.
pub fn build_controls(view: &RealizedView) -> ViewControls {
    let mut out = ViewControls {
        navigation: match view.camera {
            Some(Camera::Trackball) => ["rotate", "zoom", "pan"].map(String::from).to_vec(),
            Some(Camera::Image2d) => ["pan", "zoom", "scroll"].map(String::from).to_vec(),
            None => Vec::new(),
        },
        layers: IndexMap::new(),
        ..Default::default()
    };
    if let Some(volume) = view.layers.iter().find(|l| l.mark == "volume") {
        let (min, max, step) = SAMPLE_DISTANCE_SLIDER;
        let default = style_num(volume, "sample_distance");
        out.sample_distance = Some(Slider {
            min: min.min(default),
            max: max.max(default),
            default,
            step,
        });
        out.palette = volume
            .style
            .get("palette")
            .and_then(Value::as_str)
            .map(String::from);
        out.ctf_stops = volume.style.get("ctf").cloned();
        out.otf_stops = volume.style.get("otf").cloned();
    } else {
        out.palette = view
            .layers
            .iter()
            .find_map(|l| {
                l.style
                    .get("palette")
                    .or_else(|| l.style.get("color_scheme"))
            })
            .and_then(Value::as_str)
            .map(String::from);
    }
    for layer in &view.layers {
        out.layers.insert(layer.id.clone(), layer_controls(layer));
    }
    out
}
