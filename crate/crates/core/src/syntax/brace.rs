use super::cursor::{Cursor, PResult};
use super::lexer::{scan, TokenKind};
use super::ParseError;
use crate::ast::{
    BindAction, Ctor, DataDecl, InteractionDecl, LayerDecl, LinkDecl, Program, SelectionDecl,
    ViewDecl,
};

/// Parses the brace syntax. Stops at the first error.
pub fn parse_brace(text: &str) -> Result<Program, ParseError> {
    let mut c = Cursor::new(text, scan(text)?, false);
    c.expect_keyword("vis")?;
    c.expect_punct('{')?;
    let mut program = Program::default();
    loop {
        match c.keyword() {
            Some("data") => data_block(&mut c, &mut program)?,
            Some("view") => program.views.push(view(&mut c)?),
            Some("selections") => selections(&mut c, &mut program)?,
            _ if c.at_punct('}') => {
                c.advance();
                break;
            }
            _ => return Err(c.error("`data`, `view`, `selections` or `}`")),
        }
    }
    c.expect_eof()?;
    Ok(program)
}

fn data_block(c: &mut Cursor, program: &mut Program) -> PResult<()> {
    c.advance();
    c.expect_punct('{')?;
    while !c.at_punct('}') {
        program.data.push(data_decl(c)?);
        c.expect_punct(';')?;
    }
    c.advance();
    Ok(())
}

pub(super) fn data_ctor(c: &mut Cursor, name: String) -> PResult<DataDecl> {
    let ctor = match c.keyword().and_then(Ctor::from_name) {
        Some(ctor) => ctor,
        None => return Err(c.error("data constructor (img, tbl, net, geo, func)")),
    };
    c.advance();
    if ctor.takes_path() {
        let (path, args) = c.string_call()?;
        Ok(DataDecl {
            name,
            ctor,
            path: Some(path),
            args,
        })
    } else {
        let args = c.call_args(true)?;
        Ok(DataDecl {
            name,
            ctor,
            path: None,
            args,
        })
    }
}

fn data_decl(c: &mut Cursor) -> PResult<DataDecl> {
    let name = c.expect_ident()?;
    c.expect_punct(':')?;
    data_ctor(c, name)
}

fn view(c: &mut Cursor) -> PResult<ViewDecl> {
    c.advance();
    let mut view = ViewDecl::new(c.expect_string()?);
    c.expect_punct('{')?;
    loop {
        match c.keyword() {
            Some("layer") => {
                c.advance();
                view.layers.push(layer(c)?);
            }
            Some("link") => {
                c.advance();
                let args = c.call_args(false)?;
                c.expect_punct(';')?;
                view.links.push(LinkDecl { args });
            }
            Some("interactions") => {
                c.advance();
                interactions(c, &mut view)?;
            }
            _ if c.at_punct('}') => {
                c.advance();
                return Ok(view);
            }
            _ => return Err(c.error("`layer`, `link`, `interactions` or `}`")),
        }
    }
}

fn layer(c: &mut Cursor) -> PResult<LayerDecl> {
    c.expect_punct('{')?;
    let mut layer = LayerDecl::default();
    loop {
        if c.at_punct('}') {
            c.advance();
            return Ok(layer);
        }
        let key = match c.keyword() {
            Some(k @ ("from" | "geo" | "mark" | "encode" | "style" | "where")) => k.to_string(),
            _ => return Err(c.error("layer property or `}`")),
        };
        check_unset(c, &layer, &key)?;
        c.advance();
        c.expect_punct(':')?;
        match key.as_str() {
            "from" => layer.from = Some(c.expect_ident()?),
            "geo" => layer.geo = Some(c.expect_ident()?),
            "mark" => layer.mark = Some(c.expect_ident()?),
            "encode" => layer.encode = Some(c.object()?),
            "style" => layer.style = Some(c.object()?),
            _ => layer.where_clause = Some(c.raw_until(|k| *k == TokenKind::Punct(';'))?),
        }
        c.expect_punct(';')?;
    }
}

pub(super) fn check_unset(c: &Cursor, layer: &LayerDecl, key: &str) -> PResult<()> {
    let set = match key {
        "from" => layer.from.is_some(),
        "geo" => layer.geo.is_some(),
        "mark" => layer.mark.is_some(),
        "encode" => layer.encode.is_some(),
        "style" => layer.style.is_some(),
        _ => layer.where_clause.is_some(),
    };
    if set {
        Err(c.error_msg(
            "each layer property at most once",
            format!("duplicate `{key}` in layer"),
        ))
    } else {
        Ok(())
    }
}

fn interactions(c: &mut Cursor, view: &mut ViewDecl) -> PResult<()> {
    c.expect_punct('{')?;
    while c.at_keyword("on") {
        c.advance();
        c.expect_punct('(')?;
        let event = c.expect_string()?;
        c.expect_punct(')')?;
        c.expect_punct('{')?;
        let mut binds = Vec::new();
        while c.at_keyword("bind") {
            c.advance();
            let (selection, args) = c.string_call()?;
            c.expect_punct(';')?;
            binds.push(BindAction { selection, args });
        }
        c.expect_punct('}')?;
        view.interactions.push(InteractionDecl { event, binds });
    }
    if !c.at_punct('}') {
        return Err(c.error("`on` or `}`"));
    }
    c.advance();
    Ok(())
}

fn selections(c: &mut Cursor, program: &mut Program) -> PResult<()> {
    c.advance();
    c.expect_punct('{')?;
    while c.at_keyword("select") {
        c.advance();
        let args = c.call_args(false)?;
        c.expect_punct(';')?;
        program.selections.push(SelectionDecl { args });
    }
    if !c.at_punct('}') {
        return Err(c.error("`select` or `}`"));
    }
    c.advance();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    #[test]
    fn empty_program_is_grammatical() {
        let p = parse_brace("vis { }").unwrap();
        assert!(p.data.is_empty() && p.views.is_empty());
    }

    #[test]
    fn unbalanced_brace_fails_at_eof() {
        let err = parse_brace("vis { view \"a\" { layer { from: x; }").unwrap_err();
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn geo_is_a_contextual_keyword() {
        let p = parse_brace(
            "vis { data { geo: geo(\"w.geojson\"); t: tbl(\"t.csv\"); } \
             view \"m\" { layer { from: t; geo: geo; mark: choropleth; } } }",
        )
        .unwrap();
        assert_eq!(p.data[0].name, "geo");
        assert_eq!(p.views[0].layers[0].geo.as_deref(), Some("geo"));
    }

    #[test]
    fn func_takes_no_path() {
        let p = parse_brace("vis { data { f: func(dims: [4, 4, 4]); g: func(); } }").unwrap();
        assert_eq!(p.data[0].path, None);
        assert_eq!(
            p.data[0].args.get("dims"),
            Some(&Value::Array(vec![4.0.into(), 4.0.into(), 4.0.into()]))
        );
        assert!(p.data[1].args.is_empty());
        assert!(parse_brace("vis { data { f: func(\"x\"); } }").is_err());
    }

    #[test]
    fn missing_semicolon_is_rejected() {
        assert!(parse_brace("vis { data { a: tbl(\"a.csv\") } }").is_err());
        assert!(parse_brace("vis { view \"v\" { layer { from: a } } }").is_err());
    }

    #[test]
    fn duplicate_layer_property_is_rejected() {
        let err =
            parse_brace("vis { view \"v\" { layer { mark: points; mark: bar; } } }").unwrap_err();
        assert_eq!(err.message, "duplicate `mark` in layer");
    }

    #[test]
    fn where_clause_is_kept_raw() {
        let p = parse_brace("vis { view \"v\" { layer { where: f(a, b) > 3; } } }").unwrap();
        assert_eq!(
            p.views[0].layers[0].where_clause.as_deref(),
            Some("f(a, b) > 3")
        );
        let p = parse_brace("vis { view \"v\" { layer { where: ; } } }").unwrap();
        assert_eq!(p.views[0].layers[0].where_clause.as_deref(), Some(""));
    }

    #[test]
    fn interactions_and_selections() {
        let p = parse_brace(
            "vis { selections { select(name: \"s\"); } view \"v\" { \
             interactions { on(\"brush\") { bind(\"s\"); bind(\"s\", x: 1); } } } }",
        )
        .unwrap();
        assert_eq!(p.selections[0].name(), Some("s"));
        let binds = &p.views[0].interactions[0].binds;
        assert_eq!(binds.len(), 2);
        assert!(binds[0].args.is_empty());
        assert_eq!(binds[1].args.get("x"), Some(&Value::Number(1.0)));
    }

    #[test]
    fn equals_is_not_accepted_in_brace_syntax() {
        assert!(parse_brace("vis { data { a: tbl(\"a.csv\", format = \"csv\"); } }").is_err());
    }
}
