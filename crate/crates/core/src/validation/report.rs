use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The comparison could not be resolved (e.g. SE cap reached).
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPoint {
    /// Coordinates named by the report's `axes`.
    pub coords: Vec<f64>,
    pub reference: f64,
    pub value: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    /// |value − reference|/SE for stochastic comparisons; 0 for a zero-SE
    /// point within tolerance.
    pub z: Option<f64>,
    pub within: bool,
}

impl ComparisonPoint {
    pub fn new(coords: Vec<f64>, reference: f64, value: f64, tolerance: f64) -> Self {
        let discrepancy = (value - reference).abs();
        ComparisonPoint { coords, reference, value, discrepancy, tolerance, z: None, within: discrepancy <= tolerance }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.z = Some(if se > 0.0 {
            self.discrepancy / se
        } else if self.within {
            0.0
        } else {
            f64::INFINITY
        });
        self
    }

    /// Re-targets the point as a one-sided check value ≤ reference + slack.
    pub fn with_tolerance_above(mut self, reference: f64, slack: f64) -> Self {
        self.reference = reference;
        self.discrepancy = (self.value - reference).max(0.0);
        self.tolerance = slack;
        self.within = self.discrepancy <= slack;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub label: String,
    pub axes: Vec<String>,
    pub points: Vec<ComparisonPoint>,
    pub max_discrepancy: f64,
    pub max_z: Option<f64>,
    pub tolerance_note: String,
    pub status: Status,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    /// Status is Pass exactly when every point is within tolerance.
    pub fn assemble(
        label: impl Into<String>,
        axes: &[&str],
        points: Vec<ComparisonPoint>,
        tolerance_note: impl Into<String>,
    ) -> Self {
        let max_discrepancy = points.iter().map(|p| p.discrepancy).fold(0.0, f64::max);
        let zs: Vec<f64> = points.iter().filter_map(|p| p.z).collect();
        let max_z = if zs.is_empty() { None } else { Some(zs.iter().copied().fold(0.0, f64::max)) };
        let status = if points.iter().all(|p| p.within) { Status::Pass } else { Status::Fail };
        ComparisonReport {
            label: label.into(),
            axes: axes.iter().map(|s| s.to_string()).collect(),
            points,
            max_discrepancy,
            max_z,
            tolerance_note: tolerance_note.into(),
            status,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn csv(&self) -> String {
        let mut s = String::new();
        for a in &self.axes {
            s.push_str(a);
            s.push(',');
        }
        s.push_str("reference,value,discrepancy,tolerance,z,within\n");
        for p in &self.points {
            for c in &p.coords {
                let _ = write!(s, "{c:.16e},");
            }
            let z = p.z.map_or(String::new(), |z| format!("{z:.16e}"));
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                p.reference, p.value, p.discrepancy, p.tolerance, z, p.within
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.label, self.status.as_str());
        let _ = writeln!(s, "  points: {}", self.points.len());
        let _ = writeln!(s, "  max discrepancy: {:.6e}", self.max_discrepancy);
        if let Some(z) = self.max_z {
            let _ = writeln!(s, "  max z: {z:.3}");
        }
        let _ = writeln!(s, "  tolerance: {}", self.tolerance_note);
        for n in &self.notes {
            let _ = writeln!(s, "  {n}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_points() {
        let ok = ComparisonPoint::new(vec![1.0], 1.0, 1.05, 0.1);
        let bad = ComparisonPoint::new(vec![2.0], 1.0, 1.5, 0.1).with_se(0.25);
        let r = ComparisonReport::assemble("x", &["t"], vec![ok.clone()], "abs 0.1");
        assert!(r.passed());
        let r = ComparisonReport::assemble("x", &["t"], vec![ok, bad], "abs 0.1");
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.max_z, Some(2.0));
        assert!((r.max_discrepancy - 0.5).abs() < 1e-15);
        let csv = r.csv();
        assert!(csv.starts_with("t,reference,value,discrepancy,tolerance,z,within\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn csv_round_trips_values() {
        let v = 0.1 + 0.2;
        let r = ComparisonReport::assemble("x", &["t"], vec![ComparisonPoint::new(vec![v], v, v, 0.0)], "");
        let line = r.csv().lines().nth(1).unwrap().to_string();
        let back: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, v);
    }
}
