//! Benchmark inputs: generated programs and the volume-plus-histogram
//! teaser with probed metadata.

use std::collections::BTreeMap;
use visdsl_core::emit::DataPayload;
use visdsl_core::generate::generate;
use visdsl_core::probe::{probe_table, probe_vti, TableFormat};
use visdsl_core::synth::TaylorGreen;
use visdsl_core::{print_brace, print_indent, Metas, Program};

pub const TEASER: &str = include_str!("../../core/fixtures/teaser.indent.rvn");

pub struct Workload {
    pub text: String,
    pub metas: Metas,
    pub payloads: BTreeMap<String, DataPayload>,
}

/// `count` generated programs, alternating between the two syntaxes.
pub fn generated(count: u64) -> Vec<Workload> {
    (0..count)
        .map(|seed| {
            let g = generate(seed);
            let text = if seed % 2 == 0 {
                print_brace(&g.program)
            } else {
                print_indent(&g.program)
            };
            let payloads = url_payloads(&g.program);
            Workload {
                text,
                metas: g.metas,
                payloads,
            }
        })
        .collect()
}

/// Teaser program over a synthetic volume with `n` points per axis.
pub fn teaser(n: usize) -> Workload {
    let tg = TaylorGreen::new(n);
    let vti = tg.vti();
    let csv = tg.csv(97).into_bytes();
    let mut metas = Metas::new();
    metas.insert(
        "vol".into(),
        probe_vti(&vti).expect("synthetic volume probes"),
    );
    metas.insert(
        "sample".into(),
        probe_table(&csv, TableFormat::Csv).expect("synthetic table probes"),
    );
    let payloads = BTreeMap::from([
        ("vol".to_string(), DataPayload::Bytes(vti)),
        ("sample".to_string(), DataPayload::Bytes(csv)),
    ]);
    Workload {
        text: TEASER.to_string(),
        metas,
        payloads,
    }
}

fn url_payloads(program: &Program) -> BTreeMap<String, DataPayload> {
    program
        .data
        .iter()
        .filter_map(|d| Some((d.name.clone(), DataPayload::Url(d.path.clone()?))))
        .collect()
}
