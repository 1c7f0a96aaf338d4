//! Abstract syntax tree shared by the brace and indentation parsers.
//!
//! The tree carries no source locations and no comments, so derived
//! equality is exactly the structural equality the two surface syntaxes
//! are compared under.

use crate::value::{Object, Value};
use std::fmt;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    /// Data declarations in author order. Names are unique in valid programs.
    pub data: Vec<DataDecl>,
    pub views: Vec<ViewDecl>,
    pub selections: Vec<SelectionDecl>,
}

impl Program {
    pub fn source(&self, name: &str) -> Option<&DataDecl> {
        self.data.iter().find(|d| d.name == name)
    }

    pub fn view(&self, id: &str) -> Option<&ViewDecl> {
        self.views.iter().find(|v| v.id == id)
    }
}

/// Typed data constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctor {
    Img,
    Tbl,
    Net,
    Geo,
    Func,
}

impl Ctor {
    pub const ALL: [Ctor; 5] = [Ctor::Img, Ctor::Tbl, Ctor::Net, Ctor::Geo, Ctor::Func];

    pub fn name(self) -> &'static str {
        match self {
            Ctor::Img => "img",
            Ctor::Tbl => "tbl",
            Ctor::Net => "net",
            Ctor::Geo => "geo",
            Ctor::Func => "func",
        }
    }

    pub fn from_name(name: &str) -> Option<Ctor> {
        Ctor::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn takes_path(self) -> bool {
        self != Ctor::Func
    }
}

impl fmt::Display for Ctor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataDecl {
    pub name: String,
    pub ctor: Ctor,
    /// Present for every constructor except `func`.
    pub path: Option<String>,
    pub args: Object,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewDecl {
    pub id: String,
    pub layers: Vec<LayerDecl>,
    pub links: Vec<LinkDecl>,
    pub interactions: Vec<InteractionDecl>,
}

impl ViewDecl {
    pub fn new(id: impl Into<String>) -> Self {
        ViewDecl {
            id: id.into(),
            layers: Vec::new(),
            links: Vec::new(),
            interactions: Vec::new(),
        }
    }
}

/// One layer. `from` and `mark` are optional here because the grammar
/// accepts layers without them; the verifier reports their absence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayerDecl {
    pub from: Option<String>,
    pub geo: Option<String>,
    pub mark: Option<String>,
    pub encode: Option<Object>,
    pub style: Option<Object>,
    /// Raw `where` text; accepted but never evaluated.
    pub where_clause: Option<String>,
}

impl LayerDecl {
    pub fn new(from: impl Into<String>, mark: impl Into<String>) -> Self {
        LayerDecl {
            from: Some(from.into()),
            mark: Some(mark.into()),
            ..Default::default()
        }
    }

    pub fn with_encode(mut self, encode: Object) -> Self {
        self.encode = Some(encode);
        self
    }

    pub fn with_style(mut self, style: Object) -> Self {
        self.style = Some(style);
        self
    }
}

/// The three link kinds a `link(...)` call can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Selection,
    Tf,
    Slice,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::Selection, LinkKind::Tf, LinkKind::Slice];

    pub fn key(self) -> &'static str {
        match self {
            LinkKind::Selection => "selection",
            LinkKind::Tf => "tf",
            LinkKind::Slice => "slice",
        }
    }
}

/// A `link(...)` call. Arguments are kept as written so the verifier can
/// report malformed links (no kind, several kinds, missing axes) instead of
/// the parser silently normalizing them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkDecl {
    pub args: Object,
}

impl LinkDecl {
    pub fn kinds(&self) -> Vec<LinkKind> {
        LinkKind::ALL
            .into_iter()
            .filter(|k| self.args.contains_key(k.key()))
            .collect()
    }

    /// The single kind, when exactly one is present.
    pub fn kind(&self) -> Option<LinkKind> {
        match self.kinds().as_slice() {
            [k] => Some(*k),
            _ => None,
        }
    }

    pub fn payload(&self) -> Option<&str> {
        self.kind()
            .and_then(|k| self.args.get(k.key()))
            .and_then(Value::as_str)
    }

    pub fn views(&self) -> Vec<&str> {
        self.args
            .get("views")
            .and_then(Value::as_str_list)
            .unwrap_or_default()
    }

    pub fn target(&self) -> Option<&str> {
        self.args.get("target").and_then(Value::as_str)
    }

    pub fn axes(&self) -> Option<Vec<&str>> {
        self.args.get("axes").and_then(Value::as_str_list)
    }
}

/// `select(name: ...)` inside the `selections` block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionDecl {
    pub args: Object,
}

impl SelectionDecl {
    pub fn named(name: impl Into<String>) -> Self {
        let mut args = Object::new();
        args.insert("name", Value::Str(name.into()));
        SelectionDecl { args }
    }

    pub fn name(&self) -> Option<&str> {
        self.args.get("name").and_then(Value::as_str)
    }
}

/// `on("event") { bind(...); ... }`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDecl {
    pub event: String,
    pub binds: Vec<BindAction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindAction {
    pub selection: String,
    /// Optional trailing arguments; empty when none were written.
    pub args: Object,
}

/// Deep structural equality, ignoring source locations and comments.
/// Key order inside `encode`/`style` objects is significant.
pub fn ast_equal(a: &Program, b: &Program) -> bool {
    a == b
}
