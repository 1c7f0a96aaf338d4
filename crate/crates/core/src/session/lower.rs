//! Deterministic translation of a session schema into a program.

use super::schema::{SessionSchema, SliceLinkEntry};
use crate::ast::{
    BindAction, Ctor, DataDecl, InteractionDecl, LayerDecl, LinkDecl, Program, SelectionDecl,
    ViewDecl,
};
use crate::value::{Object, Value};
use crate::verify::capability::{canonical_mark, BrushRole};
use crate::verify::Metas;
use std::collections::{BTreeMap, BTreeSet};

/// Schema source name (a file name) to the identifier used in the program.
pub type AliasMap = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub program: Program,
    pub aliases: AliasMap,
}

impl Lowered {
    /// Schema-derived metadata re-keyed by program identifier.
    pub fn metas(&self, schema: &SessionSchema) -> Metas {
        schema
            .metas()
            .into_iter()
            .filter_map(|(name, meta)| Some((self.aliases.get(&name)?.clone(), meta)))
            .collect()
    }
}

/// Identifier for a file name: extension dropped, anything outside
/// `[A-Za-z0-9_]` replaced with `_`.
pub fn sanitize(name: &str) -> String {
    let stem = match name.rfind('.') {
        Some(i) if i > 0 => &name[..i],
        _ => name,
    };
    let mut out: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    if matches!(out.as_str(), "true" | "false" | "null") {
        out.push('_');
    }
    out
}

fn aliases(schema: &SessionSchema) -> AliasMap {
    let mut taken = BTreeSet::new();
    let mut out = AliasMap::new();
    for name in schema.data.keys() {
        let base = sanitize(name);
        let mut alias = base.clone();
        let mut n = 2;
        while !taken.insert(alias.clone()) {
            alias = format!("{base}_{n}");
            n += 1;
        }
        out.insert(name.clone(), alias);
    }
    out
}

fn link(pairs: Vec<(&str, Value)>) -> LinkDecl {
    LinkDecl {
        args: pairs.into_iter().collect(),
    }
}

fn push_unique(view: &mut ViewDecl, decl: LinkDecl) {
    if !view.links.contains(&decl) {
        view.links.push(decl);
    }
}

fn has_brush_mark(view: &ViewDecl) -> bool {
    view.layers.iter().any(|l| {
        l.mark
            .as_deref()
            .and_then(canonical_mark)
            .is_some_and(|m| m.brush == BrushRole::EmitFollow)
    })
}

fn add_brush(view: &mut ViewDecl, selection: &str) {
    let exists = view
        .interactions
        .iter()
        .any(|i| i.event == "brush" && i.binds.iter().any(|b| b.selection == selection));
    if !exists {
        view.interactions.push(InteractionDecl {
            event: "brush".into(),
            binds: vec![BindAction {
                selection: selection.into(),
                args: Object::new(),
            }],
        });
    }
}

fn slice_links(entry: &SliceLinkEntry) -> Vec<LinkDecl> {
    let views = Value::str_array(entry.linked_view_ids.iter().cloned());
    let mut out = vec![link(vec![
        ("slice", Value::str(entry.slice_link_id.clone())),
        ("axes", Value::str_array(entry.axes_list())),
        ("views", views.clone()),
    ])];
    if let Some(tf) = &entry.tf_link_id {
        out.push(link(vec![("tf", Value::str(tf.clone())), ("views", views)]));
    }
    out
}

/// Lowers without checking the schema first. Data declarations follow the
/// order in which layers first reference them; unreferenced sources come
/// last in schema order.
pub fn lower(schema: &SessionSchema) -> Lowered {
    let aliases = aliases(schema);
    let alias = |name: &str| aliases.get(name).cloned().unwrap_or_else(|| sanitize(name));

    let mut order: Vec<&String> = Vec::new();
    for layer in schema.views.iter().flat_map(|v| &v.layers) {
        for name in [&layer.from, &layer.geo] {
            if let Some((key, _)) = schema.data.get_key_value(name) {
                if !order.contains(&key) {
                    order.push(key);
                }
            }
        }
    }
    for key in schema.data.keys() {
        if !order.contains(&key) {
            order.push(key);
        }
    }
    let data = order
        .into_iter()
        .filter_map(|name| {
            let entry = &schema.data[name];
            let ctor = Ctor::from_name(&entry.kind)?;
            Some(DataDecl {
                name: alias(name),
                ctor,
                path: ctor.takes_path().then(|| entry.path.clone()),
                args: entry.args.clone(),
            })
        })
        .collect();

    let mut views: Vec<ViewDecl> = schema
        .views
        .iter()
        .map(|v| {
            let mut view = ViewDecl::new(v.view_id.clone());
            view.layers = v
                .layers
                .iter()
                .map(|l| LayerDecl {
                    from: (!l.from.is_empty()).then(|| alias(&l.from)),
                    geo: (!l.geo.is_empty()).then(|| alias(&l.geo)),
                    mark: (!l.mark.is_empty()).then(|| l.mark.clone()),
                    encode: (!l.encode.is_empty()).then(|| l.encode.clone()),
                    style: (!l.style.is_empty()).then(|| l.style.clone()),
                    where_clause: None,
                })
                .collect();
            for (event, value) in v.interactions.iter() {
                let names: Vec<String> = match value {
                    Value::Str(s) => vec![s.clone()],
                    other => other
                        .as_str_list()
                        .map(|l| l.into_iter().map(String::from).collect())
                        .unwrap_or_default(),
                };
                view.interactions.push(InteractionDecl {
                    event: event.clone(),
                    binds: names
                        .into_iter()
                        .map(|selection| BindAction {
                            selection,
                            args: Object::new(),
                        })
                        .collect(),
                });
            }
            view
        })
        .collect();

    let mut selections: Vec<SelectionDecl> = schema
        .selections
        .iter()
        .map(|s| {
            let mut args = Object::new();
            if let Some(name) = &s.name {
                args.push("name", Value::str(name.clone()));
            }
            if let Some(kind) = &s.kind {
                args.push("type", Value::str(kind.clone()));
            }
            if let Some(view) = &s.bind_view {
                args.push("bind_view", Value::str(view.clone()));
            }
            if let Some(channels) = &s.bind_channels {
                args.push("bind_channels", Value::str_array(channels.iter().cloned()));
            }
            SelectionDecl { args }
        })
        .collect();

    let linking = &schema.linking;
    let linked: Vec<String> = linking.linked_view_ids.clone().unwrap_or_default();
    if let Some(name) = linking
        .selection_name
        .as_deref()
        .filter(|_| !linked.is_empty())
    {
        let declared = schema
            .selections
            .iter()
            .find(|s| s.name.as_deref() == Some(name));
        if declared.is_none() {
            let mut sel = SelectionDecl::named(name);
            sel.args.push("type", Value::str("interval"));
            selections.push(sel);
        }
        let interval = declared
            .and_then(|s| s.kind.as_deref())
            .unwrap_or("interval")
            == "interval";
        let bind_view = declared.and_then(|s| s.bind_view.clone());
        let home = bind_view
            .clone()
            .filter(|b| linked.contains(b))
            .unwrap_or_else(|| linked[0].clone());
        if let Some(view) = views.iter_mut().find(|v| v.id == home) {
            push_unique(
                view,
                link(vec![
                    ("selection", Value::str(name)),
                    ("views", Value::str_array(linked.iter().cloned())),
                ]),
            );
        }
        if interval {
            let emitter = match bind_view {
                Some(b) => views.iter_mut().find(|v| v.id == b && has_brush_mark(v)),
                None => views
                    .iter_mut()
                    .find(|v| linked.contains(&v.id) && has_brush_mark(v)),
            };
            if let Some(view) = emitter {
                add_brush(view, name);
            }
        }
    }
    if let Some(name) = linking.selection_name.as_deref() {
        for (i, entry) in schema.views.iter().enumerate() {
            for target in &entry.links_out {
                if linked.contains(&entry.view_id) && linked.contains(target) {
                    continue;
                }
                push_unique(
                    &mut views[i],
                    link(vec![
                        ("selection", Value::str(name)),
                        ("target", Value::str(target.clone())),
                    ]),
                );
            }
        }
    }

    for entry in &schema.slice_linking {
        for decl in slice_links(entry) {
            for view in views
                .iter_mut()
                .filter(|v| entry.linked_view_ids.contains(&v.id))
            {
                push_unique(view, decl.clone());
            }
        }
    }
    for entry in &schema.tf_linking {
        let decl = link(vec![
            ("tf", Value::str(entry.tf_link_id.clone())),
            (
                "views",
                Value::str_array(entry.linked_view_ids.iter().cloned()),
            ),
        ]);
        for view in views
            .iter_mut()
            .filter(|v| entry.linked_view_ids.contains(&v.id))
        {
            push_unique(view, decl.clone());
        }
    }

    Lowered {
        program: Program {
            data,
            views,
            selections,
        },
        aliases,
    }
}
