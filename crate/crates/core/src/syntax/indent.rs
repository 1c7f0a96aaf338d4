use super::brace::{check_unset, data_ctor};
use super::cursor::{Cursor, PResult};
use super::lexer::{layout, scan, TokenKind};
use super::ParseError;
use crate::ast::{
    BindAction, InteractionDecl, LayerDecl, LinkDecl, Program, SelectionDecl, ViewDecl,
};
use crate::value::Object;

/// Parses the indentation syntax. Stops at the first error.
pub fn parse_indent(text: &str) -> Result<Program, ParseError> {
    let mut c = Cursor::new(text, layout(scan(text)?)?, true);
    c.expect_keyword("vis")?;
    c.expect_punct(':')?;
    c.expect_kind(TokenKind::Newline)?;
    c.expect_kind(TokenKind::Indent)?;
    let mut program = Program::default();
    loop {
        match c.keyword() {
            Some("data") => {
                c.advance();
                if open_block(&mut c)? {
                    while !at_dedent(&c) {
                        let name = c.expect_ident()?;
                        c.expect_assign()?;
                        program.data.push(data_ctor(&mut c, name)?);
                        end_line(&mut c)?;
                    }
                    c.advance();
                }
            }
            Some("view") => program.views.push(view(&mut c)?),
            Some("selections") => {
                c.advance();
                if open_block(&mut c)? {
                    while !at_dedent(&c) {
                        c.expect_keyword("select")?;
                        let args = c.call_args(false)?;
                        end_line(&mut c)?;
                        program.selections.push(SelectionDecl { args });
                    }
                    c.advance();
                }
            }
            _ if at_dedent(&c) => {
                c.advance();
                break;
            }
            _ => return Err(c.error("`data`, `view` or `selections`")),
        }
    }
    c.expect_eof()?;
    Ok(program)
}

fn at_dedent(c: &Cursor) -> bool {
    c.at_kind(&TokenKind::Dedent)
}

fn end_line(c: &mut Cursor) -> PResult<()> {
    c.expect_kind(TokenKind::Newline)
}

/// `':' NEWLINE` followed by an optional `INDENT`. Returns whether a
/// non-empty block was opened; the caller consumes the closing `DEDENT`.
fn open_block(c: &mut Cursor) -> PResult<bool> {
    c.expect_punct(':')?;
    end_line(c)?;
    if c.at_kind(&TokenKind::Indent) {
        c.advance();
        Ok(true)
    } else {
        Ok(false)
    }
}

fn view(c: &mut Cursor) -> PResult<ViewDecl> {
    c.advance();
    let mut view = ViewDecl::new(c.expect_string()?);
    if !open_block(c)? {
        return Ok(view);
    }
    loop {
        match c.keyword() {
            Some("layer") => {
                c.advance();
                view.layers.push(layer(c)?);
            }
            Some("link") => {
                c.advance();
                let args = c.call_args(false)?;
                end_line(c)?;
                view.links.push(LinkDecl { args });
            }
            Some("interactions") => {
                c.advance();
                interactions(c, &mut view)?;
            }
            _ if at_dedent(c) => {
                c.advance();
                return Ok(view);
            }
            _ => return Err(c.error("`layer`, `link` or `interactions`")),
        }
    }
}

fn layer(c: &mut Cursor) -> PResult<LayerDecl> {
    let mut layer = LayerDecl::default();
    if !open_block(c)? {
        return Ok(layer);
    }
    loop {
        if at_dedent(c) {
            c.advance();
            return Ok(layer);
        }
        let key = match c.keyword() {
            Some(k @ ("from" | "geo" | "mark" | "encode" | "style" | "where")) => k.to_string(),
            _ => return Err(c.error("layer property")),
        };
        check_unset(c, &layer, &key)?;
        c.advance();
        match key.as_str() {
            "encode" | "style" => {
                let obj = object_property(c)?;
                if key == "encode" {
                    layer.encode = Some(obj);
                } else {
                    layer.style = Some(obj);
                }
                continue;
            }
            "where" => {
                c.expect_assign()?;
                layer.where_clause = Some(c.raw_until(|k| *k == TokenKind::Newline)?);
            }
            _ => {
                c.expect_assign()?;
                let ident = c.expect_ident()?;
                match key.as_str() {
                    "from" => layer.from = Some(ident),
                    "geo" => layer.geo = Some(ident),
                    _ => layer.mark = Some(ident),
                }
            }
        }
        end_line(c)?;
    }
}

/// Inline `= { ... }` / `: { ... }`, or a `:` block of `key = value` lines.
/// Consumes the terminating newline or dedent.
fn object_property(c: &mut Cursor) -> PResult<Object> {
    let is_block = c.at_punct(':') && c.peek_at(1).kind == TokenKind::Newline;
    if !is_block {
        c.expect_assign()?;
        let obj = c.object()?;
        end_line(c)?;
        return Ok(obj);
    }
    let mut obj = Object::new();
    if open_block(c)? {
        while !at_dedent(c) {
            let (k, v) = c.named_arg()?;
            obj.push(k, v);
            end_line(c)?;
        }
        c.advance();
    }
    Ok(obj)
}

fn interactions(c: &mut Cursor, view: &mut ViewDecl) -> PResult<()> {
    if !open_block(c)? {
        return Ok(());
    }
    while !at_dedent(c) {
        c.expect_keyword("on")?;
        c.expect_punct('(')?;
        let event = c.expect_string()?;
        c.expect_punct(')')?;
        let mut binds = Vec::new();
        if open_block(c)? {
            while !at_dedent(c) {
                c.expect_keyword("bind")?;
                let (selection, args) = c.string_call()?;
                end_line(c)?;
                binds.push(BindAction { selection, args });
            }
            c.advance();
        }
        view.interactions.push(InteractionDecl { event, binds });
    }
    c.advance();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    #[test]
    fn vis_without_body_is_an_error() {
        assert!(parse_indent("vis:").is_err());
        assert!(parse_indent("vis:\n").is_err());
    }

    #[test]
    fn block_and_inline_encode_agree() {
        let block =
            "vis:\n  view \"v\":\n    layer:\n      encode:\n        x = \"a\"\n        y: \"b\"\n";
        let inline = "vis:\n  view \"v\":\n    layer:\n      encode = {x: \"a\", y = \"b\"}\n";
        assert_eq!(parse_indent(block).unwrap(), parse_indent(inline).unwrap());
    }

    #[test]
    fn multi_line_call_arguments() {
        let src = "vis:\n  view \"a\":\n    link(slice=\"s\", axes=[\"XY\"],\n         views=[\"a\", \"b\"])\n    layer:\n      mark = slice\n";
        let p = parse_indent(src).unwrap();
        let link = &p.views[0].links[0];
        assert_eq!(link.views(), vec!["a", "b"]);
        assert_eq!(link.args.get("axes"), Some(&Value::str_array(["XY"])));
    }

    #[test]
    fn inconsistent_dedent_is_reported() {
        let src = "vis:\n  view \"v\":\n    layer:\n      mark = volume\n   layer:\n";
        let err = parse_indent(src).unwrap_err();
        assert_eq!(err.message, "inconsistent dedent");
    }

    #[test]
    fn any_consistent_width_opens_a_block() {
        let two = "vis:\n  data:\n    a = tbl(\"a.csv\")\n";
        let four = "vis:\n    data:\n        a = tbl(\"a.csv\")\n";
        assert_eq!(parse_indent(two).unwrap(), parse_indent(four).unwrap());
    }

    #[test]
    fn empty_blocks_are_allowed_below_vis() {
        let p = parse_indent(
            "vis:\n  view \"v\":\n    layer:\n    interactions:\n      on(\"brush\"):\n",
        )
        .unwrap();
        assert_eq!(p.views[0].layers, vec![LayerDecl::default()]);
        assert!(p.views[0].interactions[0].binds.is_empty());
    }

    #[test]
    fn where_runs_to_end_of_line() {
        let p = parse_indent(
            "vis:\n  view \"v\":\n    layer:\n      where = a > 1 // c\n      mark = points\n",
        )
        .unwrap();
        let layer = &p.views[0].layers[0];
        assert_eq!(layer.where_clause.as_deref(), Some("a > 1"));
        assert_eq!(layer.mark.as_deref(), Some("points"));
    }
}
