use std::fmt;
use std::str::FromStr;

/// An evenly spaced set of values written `start:stop:step`, both ends
/// included when `stop` falls on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Grid { start, stop, step }
    }

    /// Grid points, computed as `start + i * step` so that long grids do not
    /// accumulate rounding, then rounded to 12 decimals to strip binary noise
    /// such as 0.30000000000000004.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let mut nums = [0.0f64; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| format!("{part:?} is not a number"))?;
        }
        let [start, stop, step] = nums;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(format!("range {s:?} must be finite"));
        }
        if step <= 0.0 {
            return Err(format!("step must be positive in {s:?}"));
        }
        if stop < start {
            return Err(format!("range {s:?} ends before it starts"));
        }
        // guards against absurd grids such as 0:1e6:1e-9
        if (stop - start) / step > 1e6 {
            return Err(format!("range {s:?} has more than a million points"));
        }
        Ok(Grid { start, stop, step })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}
