//! Direct-inversion tomography of the initial Bloch vector.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::qubit::BlochState;

/// Counts of the two outcomes along each of the three measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountTriplet {
    n_a: [u64; 3],
    n_d: [u64; 3],
}

impl CountTriplet {
    pub fn new(n_a: [u64; 3], n_d: [u64; 3]) -> Result<Self> {
        for j in 0..3 {
            if n_a[j] + n_d[j] == 0 {
                return Err(Error::InvalidArgument(format!("axis {} has no counts", j + 1)));
            }
        }
        Ok(Self { n_a, n_d })
    }

    pub fn n_a(&self) -> [u64; 3] {
        self.n_a
    }

    pub fn n_d(&self) -> [u64; 3] {
        self.n_d
    }

    /// Per-axis totals `N^(j) = N_a^(j) + N_d^(j)`.
    pub fn totals(&self) -> [u64; 3] {
        std::array::from_fn(|j| self.n_a[j] + self.n_d[j])
    }

    /// Swaps the two outcomes on every axis.
    pub fn swapped(&self) -> Self {
        Self {
            n_a: self.n_d,
            n_d: self.n_a,
        }
    }

    /// Parses three lines `j N_a N_d`, one per axis in any order.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n_a = [None; 3];
        let mut n_d = [0u64; 3];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(i + 1, "expected `j N_a N_d`"));
            }
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(i + 1, format!("malformed count '{s}'")))
            };
            let j = num(fields[0])?;
            if !(1..=3).contains(&j) {
                return Err(Error::parse(i + 1, format!("axis {j} not in 1..=3")));
            }
            let j = j as usize - 1;
            if n_a[j].is_some() {
                return Err(Error::parse(i + 1, format!("axis {} given twice", j + 1)));
            }
            n_a[j] = Some(num(fields[1])?);
            n_d[j] = num(fields[2])?;
        }
        let mut a = [0u64; 3];
        for j in 0..3 {
            a[j] = n_a[j].ok_or_else(|| Error::parse(0, format!("axis {} missing", j + 1)))?;
        }
        Self::new(a, n_d)
    }

    pub fn to_text(&self) -> String {
        (0..3)
            .map(|j| format!("{} {} {}\n", j + 1, self.n_a[j], self.n_d[j]))
            .collect()
    }
}

/// Estimated Bloch vector. `valid` is false when the estimate lies outside
/// the unit ball; no projection is applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reconstruction {
    pub state: BlochState,
    pub valid: bool,
}

impl Reconstruction {
    fn from_vector(r: [f64; 3]) -> Self {
        let state = BlochState::raw(r);
        Self {
            valid: state.is_physical(),
            state,
        }
    }
}

/// `r^j = (N_a^(j) - N_d^(j)) / N^(j)`.
pub fn direct_inversion(c: &CountTriplet) -> Reconstruction {
    let n = c.totals();
    Reconstruction::from_vector(std::array::from_fn(|j| {
        (c.n_a[j] as f64 - c.n_d[j] as f64) / n[j] as f64
    }))
}

/// Inversion from exact outcome probabilities `p_a^(j)`: `r^j = 2 p_a - 1`.
pub fn inversion_from_probabilities(p_a: [f64; 3]) -> Result<Reconstruction> {
    if p_a.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument(format!("probabilities {p_a:?} outside [0, 1]")));
    }
    Ok(Reconstruction::from_vector(p_a.map(|p| p - (1.0 - p))))
}

/// Outcome probabilities `(1 + r^j) / 2` of the first outcome per axis.
pub fn outcome_probabilities(r: &BlochState) -> [f64; 3] {
    r.r.map(|x| 0.5 * (1.0 + x))
}

/// Draws `shots` binomial samples per axis from the state `r`.
pub fn sample_counts<R: Rng + ?Sized>(r: &BlochState, shots: u64, rng: &mut R) -> Result<CountTriplet> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    if !r.is_physical() {
        return Err(Error::OutOfDomain {
            norm: r.norm(),
            limit: 1.0,
        });
    }
    let mut n_a = [0u64; 3];
    let mut n_d = [0u64; 3];
    for (j, p) in outcome_probabilities(r).into_iter().enumerate() {
        let dist = Binomial::new(shots, p.clamp(0.0, 1.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        n_a[j] = dist.sample(rng);
        n_d[j] = shots - n_a[j];
    }
    CountTriplet::new(n_a, n_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_counts_give_origin() {
        let c = CountTriplet::new([7, 50, 3], [7, 50, 3]).unwrap();
        let r = direct_inversion(&c);
        assert_eq!(r.state.r, [0.0; 3]);
        assert!(r.valid);
    }

    #[test]
    fn one_sided_counts_are_flagged() {
        let c = CountTriplet::new([100; 3], [0; 3]).unwrap();
        let r = direct_inversion(&c);
        assert_eq!(r.state.r, [1.0; 3]);
        assert!(!r.valid);
    }

    #[test]
    fn mixed_counts() {
        let c = CountTriplet::new([60, 50, 90], [40, 50, 10]).unwrap();
        let r = direct_inversion(&c);
        assert!((r.state.r[0] - 0.2).abs() < 1e-15);
        assert_eq!(r.state.r[1], 0.0);
        assert!((r.state.r[2] - 0.8).abs() < 1e-15);
        assert!(r.valid);
    }

    #[test]
    fn zero_total_is_an_error() {
        assert!(CountTriplet::new([1, 0, 1], [1, 0, 1]).is_err());
    }

    #[test]
    fn swapping_outcomes_negates_the_estimate() {
        let c = CountTriplet::new([13, 2, 40], [5, 9, 1]).unwrap();
        let a = direct_inversion(&c).state.r;
        let b = direct_inversion(&c.swapped()).state.r;
        for j in 0..3 {
            assert_eq!(a[j], -b[j]);
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let c = CountTriplet::parse_text("# counts\n3 90 10\n1 60 40\n2 50 50\n").unwrap();
        assert_eq!(c.n_a(), [60, 50, 90]);
        assert_eq!(CountTriplet::parse_text(&c.to_text()).unwrap(), c);
        assert!(CountTriplet::parse_text("1 1 1\n2 1 1\n").is_err());
        assert!(CountTriplet::parse_text("1 1 1\n2 1 1\n4 1 1\n").is_err());
        assert!(CountTriplet::parse_text("1 1 1\n1 1 1\n3 1 1\n").is_err());
        assert!(CountTriplet::parse_text("1 1 x\n2 1 1\n3 1 1\n").is_err());
    }

    #[test]
    fn probabilities_round_trip() {
        let r = BlochState::new([0.3, -0.5, 0.7]).unwrap();
        let back = inversion_from_probabilities(outcome_probabilities(&r)).unwrap();
        for j in 0..3 {
            assert!((back.state.r[j] - r.r[j]).abs() < 1e-15);
        }
        assert!(inversion_from_probabilities([0.5, 1.2, 0.5]).is_err());
    }
}
