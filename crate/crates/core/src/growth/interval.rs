use std::io::{Read, Write};

/// Disjoint, ordered half-open intervals `[a, b)` in log-radius.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Sorts, drops empty pieces and merges anything overlapping or touching.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| a < b);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        IntervalSet { intervals: out }
    }

    /// Cells `[edges[i], edges[i+1])` for every marked `i`.
    pub fn from_cells(edges: &[f64], marked: &[bool]) -> Self {
        let raw = marked
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (edges[i], edges[i + 1]))
            .collect();
        IntervalSet::new(raw)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        IntervalSet::new(raw)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t < b)
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Length of the part inside `(0, upper)`.
    pub fn measure_below(&self, upper: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| (b.min(upper) - a.max(0.0)).max(0.0))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t_a", "t_b"])?;
        for (a, b) in &self.intervals {
            out.write_record([crate::modulus::fmt_sig17(*a), crate::modulus::fmt_sig17(*b)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> csv::Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut raw = Vec::new();
        for rec in rd.deserialize() {
            let (a, b): (f64, f64) = rec?;
            raw.push((a, b));
        }
        Ok(IntervalSet::new(raw))
    }
}

/// Finite-window proxy for the upper logarithmic density.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub windows: Vec<f64>,
    pub per_window: Vec<f64>,
    /// Index of the first window in the tail the maximum is taken over.
    pub tail_start: usize,
}

/// `|s ∩ (0, T)| / T` for each window; the estimate is the maximum over the
/// last `ceil(len/2)` windows. Windows with `T <= 0` score zero.
pub fn upper_log_density(s: &IntervalSet, windows: &[f64]) -> DensityEstimate {
    let per_window: Vec<f64> = windows
        .iter()
        .map(|&t| {
            if t > 0.0 {
                (s.measure_below(t) / t).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let tail_start = windows.len() / 2;
    let value = per_window[tail_start..].iter().copied().fold(0.0, f64::max);
    DensityEstimate {
        value,
        windows: windows.to_vec(),
        per_window,
        tail_start,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merges_touching_and_overlapping() {
        let s = IntervalSet::new(vec![(3.0, 4.0), (0.0, 1.0), (1.0, 2.0), (3.5, 5.0), (6.0, 6.0)]);
        assert_eq!(s.intervals(), &[(0.0, 2.0), (3.0, 5.0)]);
        assert_eq!(s.measure(), 4.0);
        assert_eq!(s.measure_below(3.5), 2.5);
        assert!(s.contains(0.0) && !s.contains(2.0));
    }

    #[test]
    fn density_examples() {
        let windows: Vec<f64> = (1..=20).map(|i| i as f64 * 10.0).collect();
        for &t in &windows {
            let half = IntervalSet::new(vec![(0.0, t / 2.0)]);
            let d = upper_log_density(&half, &[t]);
            assert_eq!(d.value, 0.5);
        }
        let d = upper_log_density(&IntervalSet::empty(), &windows);
        assert_eq!(d.value, 0.0);
        assert_eq!(d.tail_start, 10);
        // radii in (1, sqrt R]
        let r = 1e6f64;
        let s = IntervalSet::new(vec![(0.0, r.ln() / 2.0)]);
        assert!((upper_log_density(&s, &[r.ln()]).value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let s = IntervalSet::new(vec![(0.25, 1.0 / 3.0), (2.0, 7.5)]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t_a,t_b\n"));
        assert_eq!(IntervalSet::read_csv(&buf[..]).unwrap(), s);
    }

    fn pieces() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-5.0..50.0f64, 0.0..10.0f64), 0..12)
            .prop_map(|v| v.into_iter().map(|(a, l)| (a, a + l)).collect())
    }

    proptest! {
        #[test]
        fn normalized_sets_are_disjoint_and_ordered(raw in pieces()) {
            let s = IntervalSet::new(raw);
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for &(a, b) in s.intervals() {
                prop_assert!(a < b);
            }
        }

        #[test]
        fn density_in_unit_range_and_monotone(a in pieces(), b in pieces(),
                                              ws in prop::collection::vec(0.1..80.0f64, 1..10)) {
            let mut ws = ws;
            ws.sort_by(f64::total_cmp);
            let small = IntervalSet::new(a);
            let big = small.union(&IntervalSet::new(b));
            let ds = upper_log_density(&small, &ws);
            let db = upper_log_density(&big, &ws);
            prop_assert!((0.0..=1.0).contains(&ds.value));
            for (x, y) in ds.per_window.iter().zip(&db.per_window) {
                prop_assert!((0.0..=1.0).contains(x));
                prop_assert!(x <= y);
            }
        }
    }
}
