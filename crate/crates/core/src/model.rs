//! Chance-constrained LP data model:
//!
//! ```text
//! min cᵀx  s.t.  A x <= h,  lb <= x <= ub,
//!               inf_{P in ball} P{ B x + D ξ <= d } >= 1 - γ
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcLinearProgram {
    #[serde(rename = "c")]
    pub cost: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "h")]
    pub h: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d_mat: Vec<Vec<f64>>,
    #[serde(rename = "d")]
    pub d: Vec<f64>,
    pub gamma: f64,
    #[serde(rename = "lb", default, skip_serializing_if = "Option::is_none", with = "lower_bounds")]
    pub variable_lower: Option<Vec<f64>>,
    #[serde(rename = "ub", default, skip_serializing_if = "Option::is_none", with = "upper_bounds")]
    pub variable_upper: Option<Vec<f64>>,
}

/// One violated invariant, naming the field and the offending indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl CcLinearProgram {
    pub fn n(&self) -> usize {
        self.cost.len()
    }

    /// Dimension of the random vector.
    pub fn m(&self) -> usize {
        self.d_mat.first().map_or(0, Vec::len)
    }

    pub fn n_oc(&self) -> usize {
        self.a.len()
    }

    pub fn n_cc(&self) -> usize {
        self.b.len()
    }

    /// Collect every invariant violation. Never panics on malformed numbers.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut diag = |field: &str, message: String| out.push(Diagnostic { field: field.into(), message });
        let n = self.n();
        let m = self.m();
        if n == 0 {
            diag("c", "no decision variables".into());
        }
        if self.a.is_empty() {
            diag("A", "no ordinary constraint rows".into());
        }
        if self.b.is_empty() {
            diag("B", "no chance constraint rows".into());
        }
        if m == 0 {
            diag("D", "random vector has zero dimension".into());
        }
        if self.a.len() != self.h.len() {
            diag("A/h", format!("A has {} rows, h has {}", self.a.len(), self.h.len()));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n {
                diag("A", format!("row {i} has {} columns, expected {n}", row.len()));
            }
        }
        if self.b.len() != self.d.len() {
            diag("B/d", format!("B has {} rows, d has {}", self.b.len(), self.d.len()));
        }
        if self.d_mat.len() != self.b.len() {
            diag("B/D", format!("B has {} rows, D has {}", self.b.len(), self.d_mat.len()));
        }
        for (i, row) in self.b.iter().enumerate() {
            if row.len() != n {
                diag("B", format!("row {i} has {} columns, expected {n}", row.len()));
            }
        }
        for (i, row) in self.d_mat.iter().enumerate() {
            if row.len() != m {
                diag("D", format!("row {i} has {} columns, expected {m}", row.len()));
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            diag("gamma", format!("gamma out of (0,1): {}", self.gamma));
        }
        let finite = |field: &str, v: &[f64], diag: &mut dyn FnMut(&str, String)| {
            for (i, x) in v.iter().enumerate() {
                if !x.is_finite() {
                    diag(field, format!("entry {i} is not finite ({x})"));
                }
            }
        };
        finite("c", &self.cost, &mut diag);
        finite("h", &self.h, &mut diag);
        finite("d", &self.d, &mut diag);
        for (i, row) in self.a.iter().enumerate() {
            finite(&format!("A[{i}]"), row, &mut diag);
        }
        for (i, row) in self.b.iter().enumerate() {
            finite(&format!("B[{i}]"), row, &mut diag);
        }
        for (i, row) in self.d_mat.iter().enumerate() {
            finite(&format!("D[{i}]"), row, &mut diag);
        }
        for (name, v) in [("lb", &self.variable_lower), ("ub", &self.variable_upper)] {
            if let Some(v) = v {
                if v.len() != n {
                    diag(name, format!("length {} differs from n = {n}", v.len()));
                }
                for (i, x) in v.iter().enumerate() {
                    if x.is_nan() {
                        diag(name, format!("entry {i} is NaN"));
                    }
                }
            }
        }
        if let (Some(l), Some(u)) = (&self.variable_lower, &self.variable_upper) {
            for (i, (a, b)) in l.iter().zip(u).enumerate() {
                if a > b {
                    diag("lb/ub", format!("lb[{i}] = {a} exceeds ub[{i}] = {b}"));
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
        }
    }

    /// Ordinary rows with finite variable bounds appended as `x_j <= ub_j`
    /// and `-x_j <= -lb_j`.
    pub fn folded_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.n();
        let mut a = self.a.clone();
        let mut h = self.h.clone();
        if let Some(ub) = &self.variable_upper {
            for (j, &u) in ub.iter().enumerate().filter(|(_, u)| u.is_finite()) {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                a.push(row);
                h.push(u);
            }
        }
        if let Some(lb) = &self.variable_lower {
            for (j, &l) in lb.iter().enumerate().filter(|(_, l)| l.is_finite()) {
                let mut row = vec![0.0; n];
                row[j] = -1.0;
                a.push(row);
                h.push(-l);
            }
        }
        (a, h)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        model.check()?;
        Ok(model)
    }
}

/// An observed decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Observation {
    pub fn new(x0: Vec<f64>) -> Self {
        Self { x0, timestamp: None }
    }

    pub fn check_against(&self, model: &CcLinearProgram) -> Result<()> {
        if self.x0.len() != model.n() {
            return Err(Error::Dimension(format!(
                "observation has {} entries, model has {} variables",
                self.x0.len(),
                model.n()
            )));
        }
        Ok(())
    }
}

// JSON has no infinities: missing bounds are written as null.
macro_rules! bound_serde {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serialize, Serializer};

            pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
                v.as_ref()
                    .map(|v| v.iter().map(|x| x.is_finite().then_some(*x)).collect::<Vec<_>>())
                    .serialize(s)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
                let raw: Option<Vec<Option<f64>>> = Option::deserialize(d)?;
                Ok(raw.map(|v| v.into_iter().map(|x| x.unwrap_or($inf)).collect()))
            }
        }
    };
}

bound_serde!(lower_bounds, f64::NEG_INFINITY);
bound_serde!(upper_bounds, f64::INFINITY);

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_var() -> CcLinearProgram {
        CcLinearProgram {
            cost: vec![1.0, 1.0],
            a: vec![vec![-1.0, -1.0]],
            h: vec![-1.0],
            b: vec![vec![1.0, 0.0]],
            d_mat: vec![vec![1.0]],
            d: vec![2.0],
            gamma: 0.1,
            variable_lower: Some(vec![0.0, 0.0]),
            variable_upper: None,
        }
    }

    #[test]
    fn well_formed_model_has_no_diagnostics() {
        assert!(two_var().validate().is_empty());
    }

    #[test]
    fn row_count_mismatch_names_b_and_d() {
        let mut m = two_var();
        m.d.push(1.0);
        let diags = m.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].field, "B/d");
    }

    #[test]
    fn gamma_range() {
        let mut m = two_var();
        m.gamma = 1.2;
        let diags = m.validate();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("gamma out of (0,1)"));
    }

    #[test]
    fn non_finite_entries_are_diagnosed_not_fatal() {
        let mut m = two_var();
        m.a[0][1] = f64::NAN;
        m.d[0] = f64::INFINITY;
        m.variable_lower = Some(vec![f64::NAN, 0.0]);
        let diags = m.validate();
        assert!(diags.iter().any(|d| d.field == "A[0]"));
        assert!(diags.iter().any(|d| d.field == "d"));
        assert!(diags.iter().any(|d| d.field == "lb"));
    }

    #[test]
    fn crossed_bounds() {
        let mut m = two_var();
        m.variable_upper = Some(vec![-1.0, 5.0]);
        assert_eq!(m.validate()[0].field, "lb/ub");
    }

    #[test]
    fn folding_appends_finite_bounds_only() {
        let mut m = two_var();
        m.variable_upper = Some(vec![3.0, f64::INFINITY]);
        let (a, h) = m.folded_rows();
        assert_eq!(a.len(), 1 + 1 + 2);
        assert_eq!(a[1], vec![1.0, 0.0]);
        assert_eq!(h[1], 3.0);
        assert_eq!(a[2], vec![-1.0, 0.0]);
        assert_eq!(h[3], 0.0);
    }

    #[test]
    fn json_roundtrip_with_open_bounds() {
        let mut m = two_var();
        m.variable_upper = Some(vec![f64::INFINITY, 4.0]);
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"ub\":[null,4.0]"));
        assert!(text.contains("\"A\":"));
        let back: CcLinearProgram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
