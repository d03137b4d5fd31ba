use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Reads an optional JSON manifest. Sections are keyed by subcommand name.
pub fn load(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else {
        return Ok(Value::Null);
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if !v.is_object() {
        bail!("{}: top level must be an object", path.display());
    }
    Ok(v)
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Defaults, then the file section, then flags.
pub fn resolve<T>(file: &Value, section: &str, flags: Map<String, Value>) -> Result<T>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut v = serde_json::to_value(T::default())?;
    if let Some(s) = file.get(section) {
        merge(&mut v, s);
    }
    merge(&mut v, &Value::Object(flags));
    serde_json::from_value(v).with_context(|| format!("invalid {section} configuration"))
}

/// SHA-256 of the resolved configuration's JSON form.
pub fn hash<T: Serialize>(cfg: &T) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Flag map builder that skips absent options.
#[derive(Default)]
pub struct Flags(Map<String, Value>);

impl Flags {
    pub fn set<V: Serialize>(mut self, key: &str, v: Option<V>) -> Self {
        if let Some(v) = v {
            self.0.insert(
                key.to_string(),
                serde_json::to_value(v).expect("flag serializes"),
            );
        }
        self
    }

    pub fn nested(mut self, path: &[&str], v: Value) -> Self {
        let node = path.iter().rev().fold(v, |acc, k| {
            let mut m = Map::new();
            m.insert(k.to_string(), acc);
            Value::Object(m)
        });
        let mut base = Value::Object(std::mem::take(&mut self.0));
        merge(&mut base, &node);
        if let Value::Object(m) = base {
            self.0 = m;
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Cfg {
        a: u32,
        b: f64,
        inner: Inner,
    }

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Inner {
        x: u32,
        y: u32,
    }

    impl Default for Cfg {
        fn default() -> Self {
            Cfg {
                a: 1,
                b: 0.5,
                inner: Inner::default(),
            }
        }
    }

    impl Default for Inner {
        fn default() -> Self {
            Inner { x: 1, y: 2 }
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = json!({"run": {"a": 5, "b": 2.0, "inner": {"y": 9}}});
        let flags = Flags::default()
            .set("a", Some(7))
            .set::<f64>("b", None)
            .nested(&["inner", "x"], json!(3));
        let c: Cfg = resolve(&file, "run", flags.into_map()).unwrap();
        assert_eq!(
            c,
            Cfg {
                a: 7,
                b: 2.0,
                inner: Inner { x: 3, y: 9 }
            }
        );
        let d: Cfg = resolve(&Value::Null, "run", Map::new()).unwrap();
        assert_eq!(d, Cfg::default());
        assert_eq!(hash(&d), hash(&Cfg::default()));
        assert_ne!(hash(&c), hash(&d));
    }
}
