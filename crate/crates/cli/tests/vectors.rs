use std::collections::BTreeSet;
use std::path::PathBuf;

use colmod_core::editor::render_read;
use colmod_core::linguistic::check_view;
use colmod_core::sim::vectors::{conformance_vectors, replay, to_json, Vector};

fn checked_in() -> (String, Vec<Vector>) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../vectors/conformance.json");
    let text = std::fs::read_to_string(&path).expect("vector file present");
    let parsed = serde_json::from_str(&text).expect("vector file parses");
    (text, parsed)
}

#[test]
fn file_matches_the_generator() {
    let (text, _) = checked_in();
    assert!(
        text == to_json(&conformance_vectors()),
        "vectors/conformance.json is stale; regenerate with `colmod-sim vectors --out`"
    );
}

#[test]
fn every_vector_replays_to_its_expectation() {
    let (_, vectors) = checked_in();
    assert!(vectors.len() >= 50, "{}", vectors.len());
    for v in &vectors {
        let view = replay(&v.frames).unwrap_or_else(|e| panic!("{}: {e}", v.name));
        assert_eq!(view, v.expected, "{}", v.name);
        assert_eq!(render_read(&view), v.read, "{}", v.name);
        let mut kinds: Vec<String> = check_view(&view)
            .iter()
            .map(|x| format!("{:?}", x.kind))
            .collect();
        kinds.sort();
        assert_eq!(kinds, v.violations, "{}", v.name);
    }
}

#[test]
fn frames_follow_the_grammar() {
    let (_, vectors) = checked_in();
    let mut verbs = BTreeSet::new();
    for v in &vectors {
        for f in &v.frames {
            let fields: Vec<&str> = f.split('\t').collect();
            match fields[0] {
                "SBEG" | "SEND" => assert_eq!(fields.len(), 1, "{f:?}"),
                "U" => {
                    assert_eq!(fields.len(), 5, "{f:?}");
                    assert!(uuid::Uuid::parse_str(fields[1]).is_ok(), "{f:?}");
                    assert!(fields[2].parse::<u64>().is_ok(), "{f:?}");
                    assert!(uuid::Uuid::parse_str(fields[3]).is_ok(), "{f:?}");
                    verbs.insert(fields[4].split(' ').next().unwrap().to_owned());
                }
                other => panic!("unexpected frame {other:?}"),
            }
            assert!(!f.contains('\n'));
        }
    }
    assert_eq!(
        verbs,
        BTreeSet::from(["CREATE", "DELETE", "LINK", "UPDATE"].map(String::from))
    );
}
