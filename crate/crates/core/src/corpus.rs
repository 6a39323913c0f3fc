//! Bundled example machines, each annotated with a check configuration in a
//! `// scope:` comment line.

use std::collections::BTreeMap;

pub const SOURCES: &[(&str, &str)] = &[
    ("mutex", include_str!("../corpus/mutex.ebm")),
    ("counter", include_str!("../corpus/counter.ebm")),
    ("traffic", include_str!("../corpus/traffic.ebm")),
    ("tokenring", include_str!("../corpus/tokenring.ebm")),
    ("library", include_str!("../corpus/library.ebm")),
    ("nested", include_str!("../corpus/nested.ebm")),
    ("idle", include_str!("../corpus/idle.ebm")),
    ("bank", include_str!("../corpus/bank.ebm")),
    ("sharing", include_str!("../corpus/sharing.ebm")),
    ("elevator", include_str!("../corpus/elevator.ebm")),
];

/// Check configuration read from a `// scope: Set=K ... depth=D states=S`
/// line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotation {
    pub scopes: BTreeMap<String, u32>,
    pub depth: Option<u32>,
    pub states: Option<u32>,
}

pub fn annotation(src: &str) -> Annotation {
    let mut a = Annotation::default();
    for line in src.lines() {
        let Some(rest) = line.trim().strip_prefix("// scope:") else {
            continue;
        };
        for item in rest.split_whitespace() {
            let Some((k, v)) = item.split_once('=') else {
                continue;
            };
            let Ok(v) = v.parse() else { continue };
            match k {
                "depth" => a.depth = Some(v),
                "states" => a.states = Some(v),
                _ => {
                    a.scopes.insert(k.to_string(), v);
                }
            }
        }
    }
    a
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutex_annotation() {
        let a = annotation(source("mutex").unwrap());
        assert_eq!(a.scopes["Process"], 2);
        assert_eq!(a.depth, Some(6));
        assert_eq!(a.states, Some(6));
    }
}
