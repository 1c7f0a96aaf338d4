//! Compiler core for the VisDSL visualization language: parsing in two
//! surface syntaxes, dataset probing, verification, realization into a
//! render IR and bundle emission.

pub mod ast;
pub mod emit;
pub mod generate;
pub mod palette;
pub mod pipeline;
pub mod print;
pub mod probe;
pub mod realize;
pub mod session;
pub mod syntax;
pub mod synth;
pub mod value;
pub mod verify;
pub mod vmpc;

pub use ast::{ast_equal, Program};
pub use emit::{emit_html, emit_ir_json, parse_ir_json};
pub use print::{print_brace, print_indent};
pub use realize::{realize, RealizeOptions, RenderIr};
pub use syntax::{detect_syntax, parse, parse_brace, parse_indent, ParseError, Syntax};
pub use value::{Object, Value};
pub use verify::{verify, Diagnostic, Metas, ProgramSpec};
