//! Evaluation helpers: run records, performance profiles and means.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BlockId, EdgeWeight};

/// One partitioner run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub instance: String,
    pub k: BlockId,
    pub seed: u64,
    pub cut: EdgeWeight,
    /// Wall time in seconds.
    pub time: f64,
    pub feasible: bool,
    pub imbalance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub tau: f64,
    /// Fraction of instances per algorithm, sorted by algorithm name.
    pub fractions: Vec<(String, f64)>,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("no run records")]
    Empty,
    #[error("ratio {0} is not a number >= 1")]
    InvalidTau(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Relative slack for `q <= tau * best`, absorbing rounding in `tau * best`.
const RATIO_TOLERANCE: f64 = 1e-12;

/// Performance profile over the cut.
///
/// An instance is a pair (instance name, k). The quality of an algorithm on an
/// instance is its mean cut over seeds. An algorithm with an infeasible run on
/// an instance, or no run at all, never counts as within any ratio there; the
/// per-instance best is taken over the remaining algorithms.
pub fn performance_profile(records: &[RunRecord], taus: &[f64]) -> Result<Vec<ProfilePoint>, ProfileError> {
    if records.is_empty() {
        return Err(ProfileError::Empty);
    }
    if let Some(&t) = taus.iter().find(|&&t| !(t >= 1.0)) {
        return Err(ProfileError::InvalidTau(t));
    }
    let algorithms: BTreeSet<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
    // (instance, k) -> algorithm -> (cut sum, runs, all feasible)
    let mut runs: BTreeMap<(&str, BlockId), BTreeMap<&str, (f64, usize, bool)>> = BTreeMap::new();
    for r in records {
        let entry = runs
            .entry((r.instance.as_str(), r.k))
            .or_default()
            .entry(r.algorithm.as_str())
            .or_insert((0.0, 0, true));
        entry.0 += r.cut as f64;
        entry.1 += 1;
        entry.2 &= r.feasible;
    }
    let quality: Vec<BTreeMap<&str, f64>> = runs
        .values()
        .map(|per_algorithm| {
            per_algorithm
                .iter()
                .filter(|(_, &(_, _, feasible))| feasible)
                .map(|(&a, &(sum, count, _))| (a, sum / count as f64))
                .collect()
        })
        .collect();
    let instances = quality.len() as f64;

    Ok(taus
        .iter()
        .map(|&tau| {
            let fractions = algorithms
                .iter()
                .map(|&a| {
                    let within = quality
                        .iter()
                        .filter(|q| {
                            let Some(&mine) = q.get(a) else {
                                return false;
                            };
                            let best = q.values().copied().fold(f64::INFINITY, f64::min);
                            mine <= tau * best * (1.0 + RATIO_TOLERANCE)
                        })
                        .count();
                    (a.to_string(), within as f64 / instances)
                })
                .collect();
            ProfilePoint { tau, fractions }
        })
        .collect())
}

/// Writes a profile as CSV with columns `tau,algorithm,fraction`.
pub fn write_profile_csv(points: &[ProfilePoint], writer: impl Write) -> Result<(), ProfileError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["tau", "algorithm", "fraction"])?;
    for point in points {
        for (algorithm, fraction) in &point.fractions {
            out.write_record([point.tau.to_string(), algorithm.clone(), fraction.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads run records from CSV with a header naming the [`RunRecord`] fields.
pub fn read_records(reader: impl Read) -> Result<Vec<RunRecord>, ProfileError> {
    let mut input = csv::Reader::from_reader(reader);
    let records = input.deserialize().collect::<Result<Vec<RunRecord>, _>>()?;
    Ok(records)
}

pub fn write_records(records: &[RunRecord], writer: impl Write) -> Result<(), ProfileError> {
    let mut out = csv::Writer::from_writer(writer);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn arithmetic_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Geometric mean of positive values, computed in log space.
pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

/// Harmonic mean of positive values.
pub fn harmonic_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    Some(values.len() as f64 / values.iter().map(|v| 1.0 / v).sum::<f64>())
}

/// Median (mean of the two middle values for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(algorithm: &str, instance: &str, seed: u64, cut: EdgeWeight, feasible: bool) -> RunRecord {
        RunRecord {
            algorithm: algorithm.into(),
            instance: instance.into(),
            k: 2,
            seed,
            cut,
            time: 1.0,
            feasible,
            imbalance: 1.0,
        }
    }

    fn fraction(point: &ProfilePoint, algorithm: &str) -> f64 {
        point.fractions.iter().find(|(a, _)| a == algorithm).unwrap().1
    }

    #[test]
    fn two_algorithms_two_instances() {
        let records = vec![
            record("A", "x", 0, 10, true),
            record("A", "y", 0, 20, true),
            record("B", "x", 0, 12, true),
            record("B", "y", 0, 18, true),
        ];
        let profile = performance_profile(&records, &[1.0, 1.2]).unwrap();
        assert_eq!(fraction(&profile[0], "A"), 0.5);
        assert_eq!(fraction(&profile[0], "B"), 0.5);
        assert_eq!(fraction(&profile[1], "A"), 1.0);
        assert_eq!(fraction(&profile[1], "B"), 1.0);
    }

    #[test]
    fn single_algorithm() {
        let records = vec![record("A", "x", 0, 10, true), record("A", "y", 0, 3, true)];
        for point in performance_profile(&records, &[1.0, 1.5, 3.0]).unwrap() {
            assert_eq!(fraction(&point, "A"), 1.0);
        }
    }

    #[test]
    fn infeasible_instance_never_counts() {
        let records = vec![
            record("A", "x", 0, 5, false),
            record("A", "y", 0, 10, true),
            record("B", "x", 0, 50, true),
            record("B", "y", 0, 10, true),
        ];
        for point in performance_profile(&records, &[1.0, 2.0, 100.0]).unwrap() {
            assert_eq!(fraction(&point, "A"), 0.5);
            assert_eq!(fraction(&point, "B"), 1.0);
        }
    }

    #[test]
    fn mean_over_seeds() {
        let records = vec![
            record("A", "x", 0, 10, true),
            record("A", "x", 1, 20, true),
            record("B", "x", 0, 16, true),
        ];
        let profile = performance_profile(&records, &[1.0]).unwrap();
        assert_eq!(fraction(&profile[0], "A"), 1.0);
        assert_eq!(fraction(&profile[0], "B"), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(performance_profile(&[], &[1.0]), Err(ProfileError::Empty)));
        let records = vec![record("A", "x", 0, 10, true)];
        assert!(matches!(performance_profile(&records, &[0.5]), Err(ProfileError::InvalidTau(_))));
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![record("A", "x", 0, 10, true), record("B", "x", 3, 12, false)];
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        assert_eq!(read_records(&buf[..]).unwrap(), records);
        let profile = performance_profile(&records, &[1.0]).unwrap();
        let mut out = Vec::new();
        write_profile_csv(&profile, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "tau,algorithm,fraction\n1,A,1\n1,B,0\n");
    }

    #[test]
    fn means() {
        assert_eq!(arithmetic_mean(&[1.0, 2.0, 3.0]), Some(2.0));
        assert!((geometric_mean(&[1.0, 4.0, 16.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!((harmonic_mean(&[1.0, 4.0, 4.0]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(geometric_mean(&[1.0, 0.0]), None);
        assert_eq!(harmonic_mean(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
