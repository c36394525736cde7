use serde::Serialize;

/// One named invariant with its measured error and threshold.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when measured ≤ tolerance.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, pass: measured <= tolerance, note: None }
    }

    /// Passes when measured ≥ floor.
    pub fn at_least(name: &str, measured: f64, floor: f64) -> Self {
        Self { name: name.into(), measured, tolerance: floor, pass: measured >= floor, note: None }
    }

    pub fn skipped(name: &str, why: &str) -> Self {
        Self { name: name.into(), measured: f64::NAN, tolerance: f64::NAN, pass: true, note: Some(why.into()) }
    }

    pub fn failed(name: &str, why: String) -> Self {
        Self { name: name.into(), measured: f64::NAN, tolerance: f64::NAN, pass: false, note: Some(why) }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn line(&self) -> String {
        let status = match (&self.note, self.pass, self.measured.is_nan()) {
            (Some(_), true, true) => "SKIP",
            (_, true, _) => "PASS",
            (_, false, _) => "FAIL",
        };
        let mut s = format!("{status} {:<36} measured={:<12.4e} tolerance={:.1e}", self.name, self.measured, self.tolerance);
        if let Some(n) = &self.note {
            s.push_str(&format!("  [{n}]"));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Report {
    pub command: String,
    pub entries: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    /// Preferred human-readable output, when the command has one.
    #[serde(skip)]
    pub text: Option<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), pass: true, ..Self::default() }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.entries.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        for c in cs {
            self.push(c);
        }
    }
}
