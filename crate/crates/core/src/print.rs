//! Canonical printers for both surface syntaxes.
//!
//! Output uses 2-space indentation and one statement per line. Blocks are
//! printed in a fixed order: data, selections, views; inside a view,
//! links, layers, interactions.

use crate::ast::{DataDecl, InteractionDecl, LayerDecl, Program, ViewDecl};
use crate::value::{Object, Value};
use std::fmt::Write;

pub fn print_brace(program: &Program) -> String {
    let mut out = String::from("vis {\n");
    if !program.data.is_empty() {
        out.push_str("  data {\n");
        for decl in &program.data {
            let _ = writeln!(out, "    {}: {};", decl.name, ctor_call(decl, ": "));
        }
        out.push_str("  }\n");
    }
    if !program.selections.is_empty() {
        out.push_str("  selections {\n");
        for sel in &program.selections {
            let _ = writeln!(out, "    select({});", args(&sel.args, ": "));
        }
        out.push_str("  }\n");
    }
    for view in &program.views {
        brace_view(&mut out, view);
    }
    out.push_str("}\n");
    out
}

fn brace_view(out: &mut String, view: &ViewDecl) {
    let _ = writeln!(out, "  view {} {{", string(&view.id));
    for link in &view.links {
        let _ = writeln!(out, "    link({});", args(&link.args, ": "));
    }
    for layer in &view.layers {
        out.push_str("    layer {\n");
        brace_layer(out, layer);
        out.push_str("    }\n");
    }
    if !view.interactions.is_empty() {
        out.push_str("    interactions {\n");
        for InteractionDecl { event, binds } in &view.interactions {
            let _ = writeln!(out, "      on({}) {{", string(event));
            for bind in binds {
                let _ = writeln!(
                    out,
                    "        bind({});",
                    bind_args(&bind.selection, &bind.args, ": ")
                );
            }
            out.push_str("      }\n");
        }
        out.push_str("    }\n");
    }
    out.push_str("  }\n");
}

fn brace_layer(out: &mut String, layer: &LayerDecl) {
    let pad = "      ";
    if let Some(from) = &layer.from {
        let _ = writeln!(out, "{pad}from: {from};");
    }
    if let Some(geo) = &layer.geo {
        let _ = writeln!(out, "{pad}geo: {geo};");
    }
    if let Some(mark) = &layer.mark {
        let _ = writeln!(out, "{pad}mark: {mark};");
    }
    if let Some(encode) = &layer.encode {
        let _ = writeln!(out, "{pad}encode: {};", object(encode, ": "));
    }
    if let Some(style) = &layer.style {
        let _ = writeln!(out, "{pad}style: {};", object(style, ": "));
    }
    if let Some(text) = &layer.where_clause {
        if text.is_empty() {
            let _ = writeln!(out, "{pad}where: ;");
        } else {
            let _ = writeln!(out, "{pad}where: {text};");
        }
    }
}

pub fn print_indent(program: &Program) -> String {
    let mut out = String::from("vis:\n");
    if !program.data.is_empty() {
        out.push_str("  data:\n");
        for decl in &program.data {
            let _ = writeln!(out, "    {} = {}", decl.name, ctor_call(decl, "="));
        }
    }
    if !program.selections.is_empty() {
        out.push_str("  selections:\n");
        for sel in &program.selections {
            let _ = writeln!(out, "    select({})", args(&sel.args, "="));
        }
    }
    for view in &program.views {
        let _ = writeln!(out, "  view {}:", string(&view.id));
        for link in &view.links {
            let _ = writeln!(out, "    link({})", args(&link.args, "="));
        }
        for layer in &view.layers {
            out.push_str("    layer:\n");
            indent_layer(&mut out, layer);
        }
        if !view.interactions.is_empty() {
            out.push_str("    interactions:\n");
            for InteractionDecl { event, binds } in &view.interactions {
                let _ = writeln!(out, "      on({}):", string(event));
                for bind in binds {
                    let _ = writeln!(
                        out,
                        "        bind({})",
                        bind_args(&bind.selection, &bind.args, "=")
                    );
                }
            }
        }
    }
    out
}

fn indent_layer(out: &mut String, layer: &LayerDecl) {
    let pad = "      ";
    if let Some(from) = &layer.from {
        let _ = writeln!(out, "{pad}from = {from}");
    }
    if let Some(geo) = &layer.geo {
        let _ = writeln!(out, "{pad}geo = {geo}");
    }
    if let Some(mark) = &layer.mark {
        let _ = writeln!(out, "{pad}mark = {mark}");
    }
    for (key, obj) in [("encode", &layer.encode), ("style", &layer.style)] {
        let Some(obj) = obj else { continue };
        if obj.is_empty() {
            let _ = writeln!(out, "{pad}{key} = {{}}");
        } else {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, v) in obj.iter() {
                let _ = writeln!(out, "{pad}  {k} = {}", value(v, "="));
            }
        }
    }
    if let Some(text) = &layer.where_clause {
        if text.is_empty() {
            let _ = writeln!(out, "{pad}where =");
        } else {
            let _ = writeln!(out, "{pad}where = {text}");
        }
    }
}

fn ctor_call(decl: &DataDecl, sep: &str) -> String {
    match &decl.path {
        Some(path) => format!("{}({})", decl.ctor, bind_args(path, &decl.args, sep)),
        None => format!("{}({})", decl.ctor, args(&decl.args, sep)),
    }
}

fn bind_args(first: &str, rest: &Object, sep: &str) -> String {
    if rest.is_empty() {
        string(first)
    } else {
        format!("{}, {}", string(first), args(rest, sep))
    }
}

fn args(obj: &Object, sep: &str) -> String {
    obj.iter()
        .map(|(k, v)| format!("{k}{sep}{}", value(v, sep)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn object(obj: &Object, sep: &str) -> String {
    if obj.is_empty() {
        "{}".to_string()
    } else if sep == "=" {
        format!("{{{}}}", args(obj, sep))
    } else {
        format!("{{ {} }}", args(obj, sep))
    }
}

/// Prints a value. `sep` is the name/value separator used inside objects.
pub fn value(v: &Value, sep: &str) -> String {
    match v {
        Value::Str(s) => string(s),
        Value::Number(n) => number(*n),
        Value::Bool(b) => b.to_string(),
        Value::Null => "null".to_string(),
        Value::Object(o) => object(o, sep),
        Value::Array(items) => format!(
            "[{}]",
            items
                .iter()
                .map(|i| value(i, sep))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

/// Shortest decimal that reads back to the same f64, never with an
/// exponent, so it always matches the NUMBER token class.
pub fn number(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    format!("{n}")
}

pub fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_print_without_exponent() {
        assert_eq!(number(1e21), "1000000000000000000000");
        assert_eq!(number(1.5e-7), "0.00000015");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(0.7), "0.7");
        assert_eq!(number(30.0), "30");
    }

    #[test]
    fn strings_escape_quotes_and_controls() {
        assert_eq!(string("a\"b\\c\nd"), r#""a\"b\\c\nd""#);
    }

    #[test]
    fn empty_objects() {
        let mut layer = LayerDecl::new("a", "volume");
        layer.encode = Some(Object::new());
        let mut out = String::new();
        brace_layer(&mut out, &layer);
        assert!(out.contains("encode: {};"));
        let mut out = String::new();
        indent_layer(&mut out, &layer);
        assert!(out.contains("encode = {}"));
    }
}
