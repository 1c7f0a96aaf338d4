use proptest::prelude::*;
use std::collections::BTreeMap;
use visdsl_core::emit::{extract_ir, DataPayload, HtmlOptions};
use visdsl_core::generate::generate;
use visdsl_core::pipeline::compile_ir;
use visdsl_core::{
    emit_html, emit_ir_json, parse_ir_json, print_indent, realize, verify, RealizeOptions,
};

fn url_payloads(program: &visdsl_core::Program) -> BTreeMap<String, DataPayload> {
    program
        .data
        .iter()
        .filter_map(|d| Some((d.name.clone(), DataPayload::Url(d.path.clone()?))))
        .collect()
}

proptest! {
    #[test]
    fn generated_programs_compile_and_bundle(seed in any::<u64>()) {
        let g = generate(seed);
        let spec = verify(&g.program, &g.metas).unwrap();
        let ir = realize(&spec, &RealizeOptions::default());
        prop_assert_eq!(ir.views.len(), g.program.views.len());

        let json = emit_ir_json(&ir);
        prop_assert_eq!(&parse_ir_json(&json).unwrap(), &ir);
        prop_assert_eq!(emit_ir_json(&realize(&spec, &RealizeOptions::default())), json);

        let options = HtmlOptions { embed_data: false, ..HtmlOptions::default() };
        let bundle = emit_html(&ir, &url_payloads(&g.program), &options).unwrap();
        prop_assert_eq!(extract_ir(&bundle.html).unwrap(), ir);
    }

    #[test]
    fn compiling_from_text_matches_the_tree(seed in any::<u64>()) {
        let g = generate(seed);
        let from_text = compile_ir(&print_indent(&g.program), &g.metas, &RealizeOptions::default()).unwrap();
        let direct = realize(&verify(&g.program, &g.metas).unwrap(), &RealizeOptions::default());
        prop_assert_eq!(from_text, direct);
    }
}
