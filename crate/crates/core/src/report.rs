//! The one result shape every field/profile check emits.
//!
//! A check boils down to a single scalar verdict: the worst value of some
//! quantity over a region, compared against a tolerance under a recorded
//! pass rule. Everything else in the report — stats, provenance, notes — is
//! context for reading that verdict later without rerunning the check.

use serde::Serialize;

use crate::grid::{Field2, Profile1};

/// How `worst_residual` relates to `tolerance`.
///
/// * `LowerBound` — one-sided inequality residuals: pass iff
///   `worst_residual >= -tolerance`.
/// * `UpperBound` — identities and deviation checks: pass iff
///   `worst_residual <= tolerance`.
/// * `Exceeds` — nonexistence witnesses, where the quantity must be
///   decisively nonzero: pass iff `worst_residual > tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PassRule {
    LowerBound,
    UpperBound,
    Exceeds,
}

/// Where a worst value was attained: a plane point or a profile abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Plane(f64, f64),
    Line(f64),
}

impl Serialize for Location {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match *self {
            Location::Plane(x, y) => [x, y].serialize(ser),
            Location::Line(x) => [x].serialize(ser),
        }
    }
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Location::Plane(x, y) => write!(f, "({x}, {y})"),
            Location::Line(x) => write!(f, "x = {x}"),
        }
    }
}

/// Summary statistics of the checked quantity over its region.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// What the check ran on, for reading reports without the inputs at hand.
/// The equation/candidate ids are registry-level labels; code that only has
/// the raw handles leaves them unset and the caller fills them in.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfunction: Option<String>,
}

impl Provenance {
    pub fn of_field(f: &Field2) -> Self {
        let g = f.grid();
        let (x0, y0) = g.origin();
        Provenance {
            grid: Some(format!(
                "{}x{} nodes, h = ({}, {}), origin ({}, {}), margin {}",
                g.nx(),
                g.ny(),
                g.hx(),
                g.hy(),
                x0,
                y0,
                f.margin()
            )),
            ..Provenance::default()
        }
    }

    pub fn of_profile(p: &Profile1) -> Self {
        let span = match (p.xs.first(), p.xs.last()) {
            (Some(a), Some(b)) => format!("[{a}, {b}]"),
            _ => "[]".into(),
        };
        Provenance {
            profile: Some(format!("{} samples, h = {}, x in {}", p.len(), p.h, span)),
            ..Provenance::default()
        }
    }
}

/// Verdict of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub pass: bool,
    pub rule: PassRule,
    pub worst_residual: f64,
    pub worst_location: Location,
    pub tolerance: f64,
    pub stats: Stats,
    pub provenance: Provenance,
    /// Free-form context: which proxy stood in for an unbounded-domain
    /// hypothesis, values of secondary quantities, vacuous-hypothesis flags.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(
        id: &str,
        rule: PassRule,
        worst_residual: f64,
        worst_location: Location,
        tolerance: f64,
        stats: Stats,
        provenance: Provenance,
    ) -> Self {
        let pass = match rule {
            PassRule::LowerBound => worst_residual >= -tolerance,
            PassRule::UpperBound => worst_residual <= tolerance,
            PassRule::Exceeds => worst_residual > tolerance,
        };
        CheckReport {
            id: id.to_owned(),
            pass,
            rule,
            worst_residual,
            worst_location,
            tolerance,
            stats,
            provenance,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, text: String) -> Self {
        self.notes.push(text);
        self
    }
}

/// Running extremes and mean of a scanned quantity, with first-in-scan-order
/// tie-breaking so verdicts do not depend on how a region is traversed twice.
#[derive(Debug, Clone)]
pub(crate) struct Scan {
    pub min: f64,
    pub min_at: Location,
    pub max: f64,
    pub max_at: Location,
    sum: f64,
    count: usize,
}

impl Scan {
    pub fn new() -> Self {
        Scan {
            min: f64::INFINITY,
            min_at: Location::Line(f64::NAN),
            max: f64::NEG_INFINITY,
            max_at: Location::Line(f64::NAN),
            sum: 0.0,
            count: 0,
        }
    }

    pub fn add(&mut self, v: f64, at: Location) {
        if v < self.min {
            self.min = v;
            self.min_at = at;
        }
        if v > self.max {
            self.max = v;
            self.max_at = at;
        }
        self.sum += v;
        self.count += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn stats(&self) -> Stats {
        Stats {
            min: self.min,
            max: self.max,
            mean: self.sum / self.count as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_stats() -> Stats {
        Stats {
            min: -1.0,
            max: 1.0,
            mean: 0.0,
        }
    }

    #[test]
    fn pass_rules_compare_against_the_tolerance_as_documented() {
        let mk = |rule, worst| {
            CheckReport::new(
                "t",
                rule,
                worst,
                Location::Line(0.0),
                1e-6,
                dummy_stats(),
                Provenance::default(),
            )
            .pass
        };
        assert!(mk(PassRule::LowerBound, -1e-6));
        assert!(!mk(PassRule::LowerBound, -1.1e-6));
        assert!(mk(PassRule::LowerBound, 5.0));
        assert!(mk(PassRule::UpperBound, 1e-6));
        assert!(!mk(PassRule::UpperBound, 1.1e-6));
        assert!(mk(PassRule::UpperBound, -5.0));
        assert!(mk(PassRule::Exceeds, 2e-6));
        assert!(!mk(PassRule::Exceeds, 1e-6));
    }

    #[test]
    fn locations_serialize_as_coordinate_arrays() {
        let plane = serde_json::to_string(&Location::Plane(0.5, -1.0)).unwrap();
        assert_eq!(plane, "[0.5,-1.0]");
        let line = serde_json::to_string(&Location::Line(2.0)).unwrap();
        assert_eq!(line, "[2.0]");
    }

    #[test]
    fn scan_tracks_extremes_mean_and_first_attained_locations() {
        let mut s = Scan::new();
        for (k, v) in [3.0, -1.0, 4.0, -1.0, 4.0].iter().enumerate() {
            s.add(*v, Location::Line(k as f64));
        }
        assert_eq!(s.min, -1.0);
        assert_eq!(s.min_at, Location::Line(1.0));
        assert_eq!(s.max, 4.0);
        assert_eq!(s.max_at, Location::Line(2.0));
        let st = s.stats();
        assert!((st.mean - 9.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn empty_notes_are_omitted_from_json() {
        let rep = CheckReport::new(
            "x",
            PassRule::UpperBound,
            0.0,
            Location::Plane(0.0, 0.0),
            1.0,
            dummy_stats(),
            Provenance::default(),
        );
        let json = serde_json::to_string(&rep).unwrap();
        assert!(!json.contains("notes"));
        assert!(!json.contains("grid"));
        let with_note = rep.note("context".into());
        assert!(serde_json::to_string(&with_note)
            .unwrap()
            .contains("\"notes\":[\"context\"]"));
    }
}
