use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use tgw_core::groupoid::Check;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub theory: String,
    pub parameters: BTreeMap<String, Value>,
    pub items: Value,
    pub certificates: Vec<Check>,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, theory: &str) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            theory: theory.to_owned(),
            parameters: BTreeMap::new(),
            items: Value::Null,
            certificates: Vec::new(),
            timing: Timing { elapsed_ms: 0 },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_owned(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn items(&mut self, value: impl Serialize) -> &mut Self {
        self.items = serde_json::to_value(value).expect("serializable");
        self
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, witness: Option<String>) -> &mut Self {
        self.certificates.push(Check::new(name, pass, witness));
        self
    }

    pub fn extend_checks(&mut self, checks: impl IntoIterator<Item = Check>) -> &mut Self {
        self.certificates.extend(checks);
        self
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.certificates.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
