//! Wire protocol v1: one JSON record per line over stdin/stdout.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, MapAccess, SeqAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fcl::Attributes;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentView {
    pub id: String,
    #[serde(default)]
    pub attrs: Attributes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignRequest {
    pub method: String,
    pub step: usize,
    pub components: Vec<ComponentView>,
    #[serde(default)]
    pub beyond_control: BTreeMap<String, Attributes>,
    pub group_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmFailure {
    pub message: String,
    #[serde(default)]
    pub traceback: String,
}

/// Answer to one request. Assignments keep their order and any repeated
/// component ids, so that double assignments reach the generic checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignResponse {
    Assignments(Vec<(String, String)>),
    Error(AmFailure),
}

struct Pairs<'a>(&'a [(String, String)]);

impl Serialize for Pairs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct OwnedPairs(Vec<(String, String)>);

impl<'de> Deserialize<'de> for OwnedPairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OwnedPairs;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from component id to group id, or a list of [id, group] pairs")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OwnedPairs, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OwnedPairs(out))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<OwnedPairs, A::Error> {
                let mut out = Vec::new();
                while let Some(pair) = seq.next_element::<(String, String)>()? {
                    out.push(pair);
                }
                Ok(OwnedPairs(out))
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for AssignResponse {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1))?;
        match self {
            AssignResponse::Assignments(pairs) => map.serialize_entry("assignments", &Pairs(pairs))?,
            AssignResponse::Error(e) => map.serialize_entry("error", e)?,
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for AssignResponse {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            assignments: Option<OwnedPairs>,
            error: Option<AmFailure>,
        }
        let raw = Raw::deserialize(d)?;
        match (raw.assignments, raw.error) {
            (Some(p), None) => Ok(AssignResponse::Assignments(p.0)),
            (None, Some(e)) => Ok(AssignResponse::Error(e)),
            _ => Err(de::Error::custom("expected exactly one of `assignments` or `error`")),
        }
    }
}

/// First line written by an out-of-process AM.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Handshake {
    pub ready: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub am: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<AmFailure>,
}

pub fn encode<T: Serialize>(record: &T) -> String {
    serde_json::to_string(record).expect("protocol records serialize")
}

pub fn decode_response(line: &str) -> Result<AssignResponse, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn decode_request(line: &str) -> Result<AssignRequest, serde_json::Error> {
    serde_json::from_str(line)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_keys_survive() {
        let r = decode_response(r#"{"assignments": {"v1": "farm", "v1": "cave"}}"#).unwrap();
        assert_eq!(
            r,
            AssignResponse::Assignments(vec![("v1".into(), "farm".into()), ("v1".into(), "cave".into())])
        );
        assert_eq!(encode(&r), r#"{"assignments":{"v1":"farm","v1":"cave"}}"#);
    }

    #[test]
    fn pair_lists_are_accepted() {
        let r = decode_response(r#"{"assignments": [["v2", "attack"]]}"#).unwrap();
        assert_eq!(r, AssignResponse::Assignments(vec![("v2".into(), "attack".into())]));
    }

    #[test]
    fn both_or_neither_is_malformed() {
        assert!(decode_response(r#"{}"#).is_err());
        assert!(decode_response(r#"{"assignments": {}, "error": {"message": "x"}}"#).is_err());
        assert!(decode_response(r#"{"assignments": {}, "extra": 1}"#).is_err());
    }
}
