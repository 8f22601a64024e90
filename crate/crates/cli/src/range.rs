use std::str::FromStr;

/// `lo:hi:n`, `n` points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
                }
            })
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Range {
        Range {
            lo: self.lo * factor,
            hi: self.hi * factor,
            n: self.n,
        }
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{t:?} is not a finite number"))
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n = n
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{n:?} is not a point count"))?;
        if n < 2 {
            return Err(format!("a range needs at least 2 points (got {n})"));
        }
        if hi <= lo {
            return Err(format!("range must have hi > lo (got {lo}:{hi})"));
        }
        Ok(Range { lo, hi, n })
    }
}
