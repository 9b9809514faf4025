//! `.ghzp.json` protocol documents.
//!
//! ```json
//! {
//!   "format": "ghz-protocol",
//!   "version": 1,
//!   "n": 2,
//!   "k": 2,
//!   "search_fidelity": 0.9,
//!   "predicted_fidelity": 0.926,
//!   "success_probabilities": [0.875],
//!   "provenance": { "algorithm": "base" },
//!   "root": {
//!     "type": "measure", "mask": 2, "pauli": "+ZZ",
//!     "main": { "type": "leaf", "parties": [0, 1] },
//!     "ancilla": { "type": "leaf", "parties": [0, 1] }
//!   }
//! }
//! ```
//!
//! Leaf parties and the Pauli string are redundant with the tree and are
//! checked on load.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{finalize_parties, Node, NodeKind, Protocol, Provenance};
use crate::error::{Error, Result};
use crate::stabilizer::StabilizerIndex;

pub const FORMAT_VERSION: u64 = 1;
const FORMAT_NAME: &str = "ghz-protocol";

/// Renders `p` as a pretty-printed UTF-8 JSON document.
pub fn serialize(p: &Protocol) -> Vec<u8> {
    let parties = finalize_parties(&p.root);
    let mut leaves = parties.iter();
    let root = node_to_json(&p.root, &mut leaves);
    let doc = json!({
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": p.n(),
        "k": p.k(),
        "search_fidelity": p.search_fidelity,
        "predicted_fidelity": p.predicted_fidelity,
        "success_probabilities": p.success_probabilities,
        "provenance": p.provenance,
        "root": root,
    });
    let mut out = serde_json::to_vec_pretty(&doc).expect("protocol documents are valid JSON");
    out.push(b'\n');
    out
}

fn node_to_json<'a>(node: &Node, leaves: &mut impl Iterator<Item = &'a (usize, usize)>) -> Value {
    match node.kind() {
        NodeKind::Leaf => {
            let (u, v) = leaves.next().expect("one party pair per leaf");
            json!({ "type": "leaf", "parties": [u, v] })
        }
        NodeKind::Fuse { left, right, i, j } => {
            let left = node_to_json(left, leaves);
            let right = node_to_json(right, leaves);
            json!({ "type": "fuse", "i": i, "j": j, "left": left, "right": right })
        }
        NodeKind::Measure {
            main,
            ancilla,
            stabilizer,
        } => {
            let main = node_to_json(main, leaves);
            let ancilla = node_to_json(ancilla, leaves);
            json!({
                "type": "measure",
                "mask": stabilizer.mask(),
                "pauli": stabilizer.to_pauli().to_string(),
                "main": main,
                "ancilla": ancilla,
            })
        }
    }
}

fn parse_err(path: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| parse_err(path, format!("missing field \"{name}\"")))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(path, "expected an object"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| parse_err(path, format!("expected a non-negative integer, found {v}")))
}

fn opt_f64(obj: &Map<String, Value>, path: &str, name: &str) -> Result<Option<f64>> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| parse_err(&format!("{path}.{name}"), "expected a number")),
    }
}

/// Parses and validates a protocol document.
pub fn deserialize(bytes: &[u8]) -> Result<Protocol> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let doc: Value = serde::Deserialize::deserialize(&mut de).map_err(|e| {
        parse_err(
            &format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    de.end()
        .map_err(|e| parse_err(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;

    let top = as_object(&doc, "$")?;
    if let Some(fmt) = top.get("format") {
        if fmt.as_str() != Some(FORMAT_NAME) {
            return Err(parse_err("$.format", format!("expected \"{FORMAT_NAME}\", found {fmt}")));
        }
    }
    let version = field(top, "$", "version")?
        .as_u64()
        .ok_or_else(|| parse_err("$.version", "expected an integer"))?;
    if version != FORMAT_VERSION {
        return Err(parse_err("$.version", format!("unsupported version {version}")));
    }
    let n = as_usize(field(top, "$", "n")?, "$.n")?;
    let k = as_usize(field(top, "$", "k")?, "$.k")?;

    let mut leaf_parties = Vec::new();
    let root = parse_node(field(top, "$", "root")?, "$.root", &mut leaf_parties)?;
    if (root.n(), root.k()) != (n, k) {
        return Err(Error::Validation(format!(
            "header declares (n, k) = ({n}, {k}) but the tree spans ({}, {})",
            root.n(),
            root.k()
        )));
    }
    let expected = finalize_parties(&root);
    for (idx, (got, want)) in leaf_parties.iter().zip(&expected).enumerate() {
        if let Some(got) = got {
            if got != want {
                return Err(Error::Validation(format!(
                    "leaf {idx} lists parties {got:?}, wiring implies {want:?}"
                )));
            }
        }
    }

    let search_fidelity = opt_f64(top, "$", "search_fidelity")?;
    let predicted_fidelity = opt_f64(top, "$", "predicted_fidelity")?;
    let success_probabilities = match top.get("success_probabilities") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                v.as_f64().ok_or_else(|| {
                    parse_err(&format!("$.success_probabilities[{idx}]"), "expected a number")
                })
            })
            .collect::<Result<_>>()?,
        Some(_) => return Err(parse_err("$.success_probabilities", "expected an array")),
    };
    if !success_probabilities.is_empty() && success_probabilities.len() != root.measure_count() {
        return Err(Error::Validation(format!(
            "{} success probabilities for {} measurement nodes",
            success_probabilities.len(),
            root.measure_count()
        )));
    }
    let provenance = match top.get("provenance") {
        None | Some(Value::Null) => Provenance::default(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| parse_err("$.provenance", e.to_string()))?,
    };

    Ok(Protocol {
        root,
        search_fidelity,
        predicted_fidelity,
        success_probabilities,
        provenance,
    })
}

fn parse_node(
    v: &Value,
    path: &str,
    leaves: &mut Vec<Option<(usize, usize)>>,
) -> Result<Arc<Node>> {
    let obj = as_object(v, path)?;
    let ty = field(obj, path, "type")?;
    let ty_path = format!("{path}.type");
    let ty = ty
        .as_str()
        .ok_or_else(|| parse_err(&ty_path, "expected a string"))?;
    match ty {
        "leaf" => {
            let parties = match obj.get("parties") {
                None => None,
                Some(Value::Array(p)) if p.len() == 2 => {
                    let pp = format!("{path}.parties");
                    Some((as_usize(&p[0], &pp)?, as_usize(&p[1], &pp)?))
                }
                Some(_) => return Err(parse_err(&format!("{path}.parties"), "expected two party indices")),
            };
            leaves.push(parties);
            Ok(Node::leaf())
        }
        "fuse" => {
            let i = as_usize(field(obj, path, "i")?, &format!("{path}.i"))?;
            let j = as_usize(field(obj, path, "j")?, &format!("{path}.j"))?;
            let left = parse_node(field(obj, path, "left")?, &format!("{path}.left"), leaves)?;
            let right = parse_node(field(obj, path, "right")?, &format!("{path}.right"), leaves)?;
            Node::fuse(left, i, right, j).map_err(|e| at(path, e))
        }
        "measure" => {
            let mask_path = format!("{path}.mask");
            let mask = field(obj, path, "mask")?
                .as_u64()
                .and_then(|m| u32::try_from(m).ok())
                .ok_or_else(|| parse_err(&mask_path, "expected a non-negative integer"))?;
            let main = parse_node(field(obj, path, "main")?, &format!("{path}.main"), leaves)?;
            let ancilla = parse_node(field(obj, path, "ancilla")?, &format!("{path}.ancilla"), leaves)?;
            let stabilizer = StabilizerIndex::new(main.n(), mask).map_err(|e| at(&mask_path, e))?;
            if let Some(p) = obj.get("pauli") {
                let written = p
                    .as_str()
                    .ok_or_else(|| parse_err(&format!("{path}.pauli"), "expected a string"))?;
                let derived = stabilizer.to_pauli().to_string();
                if written != derived {
                    return Err(Error::Validation(format!(
                        "{path}.pauli is {written:?} but mask {mask} gives {derived:?}"
                    )));
                }
            }
            Node::measure(main, ancilla, mask).map_err(|e| at(path, e))
        }
        other => Err(parse_err(&ty_path, format!("unknown node type \"{other}\""))),
    }
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{path}: {m}")),
        other => Error::Validation(format!("{path}: {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::evaluate;

    fn sample() -> Protocol {
        let bell = Node::leaf();
        let ghz = Node::fuse(bell.clone(), 1, bell.clone(), 0).unwrap();
        let root = Node::measure(ghz, bell, 0b110).unwrap();
        Protocol::new(
            root,
            Provenance {
                algorithm: "manual".into(),
                seed: Some(7),
                ..Default::default()
            },
        )
        .with_evaluation(0.9)
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let p = sample();
        let bytes = serialize(&p);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back, p);
        let a = evaluate(&p.root, 0.85).unwrap();
        let b = evaluate(&back.root, 0.85).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn unknown_node_type_names_the_field() {
        let doc = r#"{"version":1,"n":2,"k":1,"root":{"type":"swap"}}"#;
        match deserialize(doc.as_bytes()) {
            Err(Error::Parse { path, message }) => {
                assert_eq!(path, "$.root.type");
                assert!(message.contains("swap"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mask_out_of_range_is_rejected() {
        let doc = r#"{"version":1,"n":2,"k":2,"root":{"type":"measure","mask":4,
            "main":{"type":"leaf"},"ancilla":{"type":"leaf"}}}"#;
        assert!(matches!(deserialize(doc.as_bytes()), Err(Error::Validation(m)) if m.contains("mask")));
    }

    #[test]
    fn inconsistent_pauli_is_rejected() {
        let doc = r#"{"version":1,"n":2,"k":2,"root":{"type":"measure","mask":2,"pauli":"+XX",
            "main":{"type":"leaf"},"ancilla":{"type":"leaf"}}}"#;
        assert!(matches!(deserialize(doc.as_bytes()), Err(Error::Validation(_))));
    }

    #[test]
    fn syntax_errors_carry_location() {
        match deserialize(b"{\"version\": 1,\n \"n\": }") {
            Err(Error::Parse { path, .. }) => assert!(path.starts_with("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_and_wrong_parties() {
        let doc = r#"{"version":1,"n":3,"k":1,"root":{"type":"leaf"}}"#;
        assert!(matches!(deserialize(doc.as_bytes()), Err(Error::Validation(_))));
        let doc = r#"{"version":1,"n":2,"k":1,"root":{"type":"leaf","parties":[1,0]}}"#;
        assert!(matches!(deserialize(doc.as_bytes()), Err(Error::Validation(_))));
        let doc = r#"{"version":2,"n":2,"k":1,"root":{"type":"leaf"}}"#;
        assert!(matches!(deserialize(doc.as_bytes()), Err(Error::Parse { .. })));
    }
}
