use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Sampled solution `(x, ẋ)` with per-sample diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Names of the position coordinates.
    pub coords: Vec<String>,
    pub t: Vec<f64>,
    /// Positions followed by velocities.
    pub states: Vec<Vec<f64>>,
    /// `|h| + |ḣ|` (sums of absolute values), when the constraint is known.
    pub residual: Option<Vec<f64>>,
    /// Energy of an attached Lagrangian structure.
    pub energy: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.states[k][..self.dim()]
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        &self.states[k][self.dim()..]
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map_or(&[], |s| s.as_slice())
    }

    /// Time strictly increasing and every state finite.
    pub fn is_valid(&self) -> bool {
        self.t.windows(2).all(|w| w[1] > w[0])
            && self.states.iter().flatten().all(|v| v.is_finite())
            && self.states.len() == self.t.len()
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.residual.as_ref().map(|r| r.iter().copied().fold(0.0, f64::max))
    }

    /// `max |E(t) − E(0)| / max(|E(0)|, 1)`.
    pub fn energy_drift(&self) -> Option<f64> {
        let e = self.energy.as_ref()?;
        let e0 = *e.first()?;
        Some(e.iter().map(|v| (v - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0))
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.coords.iter().cloned());
        h.extend(self.coords.iter().map(|c| format!("d{c}")));
        if self.residual.is_some() {
            h.push("h_residual".into());
        }
        if self.energy.is_some() {
            h.push("energy".into());
        }
        h
    }

    /// CSV with a header row; numbers carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for k in 0..self.len() {
            let mut row = vec![self.t[k]];
            row.extend(&self.states[k]);
            if let Some(r) = &self.residual {
                row.push(r[k]);
            }
            if let Some(e) = &self.energy {
                row.push(e[k]);
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
