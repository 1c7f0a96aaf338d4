//! Link compilation: declared links, brush publications and implicit
//! point selections become runtime coordination bindings.

use super::ir::{BindingKind, LinkBinding, RealizedView};
use crate::ast::LinkKind;
use crate::verify::{ProgramSpec, SelectionType};

fn layers_of(views: &[RealizedView], ids: &[String], pred: impl Fn(&str) -> bool) -> Vec<String> {
    ids.iter()
        .filter_map(|id| views.iter().find(|v| &v.view_id == id))
        .flat_map(|v| {
            v.layers
                .iter()
                .filter(|l| pred(&l.mark))
                .map(|l| l.id.clone())
        })
        .collect()
}

/// Views that publish into a selection, in view order.
fn emitters_of(spec: &ProgramSpec, selection: &str) -> Vec<String> {
    let bind_view = spec
        .selections
        .iter()
        .find(|s| s.name == selection)
        .and_then(|s| s.bind_view.as_deref());
    spec.views
        .iter()
        .filter(|v| v.brushes.iter().any(|b| b == selection) || bind_view == Some(v.id.as_str()))
        .map(|v| v.id.clone())
        .collect()
}

pub fn compile_links(spec: &ProgramSpec, views: &[RealizedView]) -> Vec<LinkBinding> {
    let mut out = Vec::new();
    for link in spec.unique_links() {
        let binding = match link.kind {
            LinkKind::Selection => {
                let selection = spec.selections.iter().find(|s| s.name == link.channel);
                let kind = match (link.mode.as_deref(), selection.map(|s| s.kind)) {
                    (Some("filter"), _) => BindingKind::BrushFilter,
                    (Some("highlight"), _) => BindingKind::PointHighlight,
                    (Some("color"), _) => BindingKind::SharedColor,
                    (_, Some(SelectionType::Point)) => BindingKind::PointHighlight,
                    _ => BindingKind::BrushFilter,
                };
                let mut emitters: Vec<String> = emitters_of(spec, &link.channel)
                    .into_iter()
                    .filter(|e| link.views.contains(e))
                    .collect();
                if emitters.is_empty() && link.target.is_some() {
                    emitters.push(link.declared_in.clone());
                }
                LinkBinding {
                    kind,
                    channel: link.channel.clone(),
                    views: link.views.clone(),
                    layers: layers_of(views, &link.views, |_| true),
                    emitters,
                    axes: Vec::new(),
                    auto: false,
                }
            }
            LinkKind::Tf => LinkBinding {
                kind: BindingKind::SharedTf,
                channel: link.channel.clone(),
                views: link.views.clone(),
                layers: layers_of(views, &link.views, |m| m == "volume" || m == "slice"),
                emitters: Vec::new(),
                axes: Vec::new(),
                auto: false,
            },
            LinkKind::Slice => LinkBinding {
                kind: BindingKind::SliceIndex,
                channel: link.channel.clone(),
                views: link.views.clone(),
                layers: layers_of(views, &link.views, |m| m == "slice"),
                emitters: Vec::new(),
                axes: link.axes.clone(),
                auto: false,
            },
        };
        out.push(binding);
    }

    // Brushes published to a selection that no link consumes still filter
    // their own view.
    for selection in &spec.selections {
        let linked = out.iter().any(|b| {
            b.channel == selection.name
                && b.kind != BindingKind::SharedTf
                && b.kind != BindingKind::SliceIndex
        });
        let emitters = emitters_of(spec, &selection.name);
        if linked || emitters.is_empty() {
            continue;
        }
        out.push(LinkBinding {
            kind: BindingKind::BrushFilter,
            channel: selection.name.clone(),
            layers: layers_of(views, &emitters, |_| true),
            views: emitters.clone(),
            emitters,
            axes: Vec::new(),
            auto: false,
        });
    }

    // Click selection on graph nodes and heatmap cells is always available.
    for view in views {
        for layer in view
            .layers
            .iter()
            .filter(|l| l.mark == "force_graph" || l.mark == "heatmap")
        {
            let covered = out
                .iter()
                .any(|b| b.kind == BindingKind::PointHighlight && b.layers.contains(&layer.id));
            if covered {
                continue;
            }
            out.push(LinkBinding {
                kind: BindingKind::PointHighlight,
                channel: format!("{}/point", layer.id),
                views: vec![view.view_id.clone()],
                layers: vec![layer.id.clone()],
                emitters: vec![view.view_id.clone()],
                axes: Vec::new(),
                auto: true,
            });
        }
    }
    out
}
