use deskbench::corruption::{all_defaults_document, parse_config, CorruptionKind};
use serde_json::Value;

const GOLDEN: &str = include_str!("golden/defaults.json");

fn empty_blocks() -> String {
    CorruptionKind::ALL.iter().map(|k| format!("[{}]\n", k.table())).collect()
}

#[test]
fn empty_blocks_reproduce_every_default() {
    let golden: serde_json::Map<String, Value> = serde_json::from_str(GOLDEN).unwrap();
    let specs = parse_config(&empty_blocks()).unwrap();
    assert_eq!(specs.len(), golden.len());
    for spec in &specs {
        let want = golden[spec.kind.table()].as_object().unwrap();
        let got = serde_json::to_value(&spec.params).unwrap();
        let got = got["params"].as_object().unwrap();
        assert_eq!(got.len(), want.len(), "{}: field count", spec.kind);
        for (field, value) in want {
            assert_eq!(got.get(field), Some(value), "{}.{field}", spec.kind.table());
        }
    }
}

#[test]
fn defaults_document_round_trips() {
    let a = parse_config(&all_defaults_document()).unwrap();
    let b = parse_config(&empty_blocks()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn schedule_follows_step_field() {
    let specs = parse_config("[accidental_touch]\nstep = 6\n[verification]\n").unwrap();
    assert_eq!(specs[0].schedule, 6);
    assert_eq!(specs[1].schedule, -1);
}
