//! Bernoulli arm models and ingestion of per-arm mean files.

use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// How arms `3..=K` get their means in [`sample_arm_means`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillRule {
    /// i.i.d. uniform on `[0, p2]`, then sorted descending.
    #[default]
    Uniform,
    /// Every remaining arm equals `p2` (the hardest competition).
    Equal,
}

/// `K >= 2` Bernoulli arms with means sorted descending and a strictly unique
/// best arm: `p1 > p2 >= ... >= pK >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    means: Vec<f64>,
}

impl ArmModel {
    /// Builds a model from raw means (any order); sorts them descending and
    /// validates the range and the unique best arm.
    pub fn new(mut means: Vec<f64>) -> Result<ArmModel> {
        if means.len() < 2 {
            return Err(Error::Parameter(format!(
                "arm count must be >= 2, got {}",
                means.len()
            )));
        }
        if means.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Parameter("arm means must lie in [0,1]".into()));
        }
        means.sort_by(|a, b| b.partial_cmp(a).expect("means are finite"));
        if means[0] <= means[1] {
            return Err(Error::Parameter(format!(
                "best arm must be strictly unique, got p1={} p2={}",
                means[0], means[1]
            )));
        }
        Ok(ArmModel { means })
    }

    /// Arm count `K`.
    pub fn k(&self) -> u32 {
        self.means.len() as u32
    }

    /// Means sorted descending; index 0 is the best arm.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Mean of the 1-based arm `k`.
    pub fn mean(&self, k: u32) -> f64 {
        self.means[(k - 1) as usize]
    }

    /// Pulls the 1-based arm `k`: reward 1 with probability `p_k`. Consumes
    /// exactly one draw from `rng`.
    pub fn pull(&self, k: u32, rng: &mut impl Rng) -> Result<bool> {
        if k < 1 || k > self.k() {
            return Err(Error::Parameter(format!(
                "arm {k} outside 1..={}",
                self.k()
            )));
        }
        Ok(rng.gen::<f64>() < self.means[(k - 1) as usize])
    }

    /// Keeps the best arm and `k - 1` arms drawn from the rest (used to build
    /// a K-arm instance from a larger means file). Without replacement by
    /// default; with replacement a mean may repeat.
    pub fn subsample(&self, k: u32, with_replacement: bool, seed: u64) -> Result<ArmModel> {
        if k < 2 {
            return Err(Error::Parameter("subsample needs k >= 2".into()));
        }
        let rest = &self.means[1..];
        let need = (k - 1) as usize;
        if !with_replacement && need > rest.len() {
            return Err(Error::Parameter(format!(
                "cannot draw {need} distinct arms from {} without replacement",
                rest.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = Vec::with_capacity(need);
        if with_replacement {
            for _ in 0..need {
                picked.push(rest[rng.gen_range(0..rest.len())]);
            }
        } else {
            let mut pool: Vec<f64> = rest.to_vec();
            for _ in 0..need {
                let idx = rng.gen_range(0..pool.len());
                picked.push(pool.swap_remove(idx));
            }
        }
        let mut means = vec![self.means[0]];
        means.extend(picked);
        ArmModel::new(means)
    }
}

/// Builds a synthetic model: `means[0] = p1`, `means[1] = p2`, the rest per
/// `fill`. Deterministic given `seed`.
pub fn sample_arm_means(k: u32, p1: f64, p2: f64, fill: FillRule, seed: u64) -> Result<ArmModel> {
    if k < 2 {
        return Err(Error::Parameter(format!("arm count must be >= 2, got {k}")));
    }
    if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
        return Err(Error::Parameter("arm means must lie in [0,1]".into()));
    }
    if p2 >= p1 {
        return Err(Error::Parameter(format!(
            "need p2 < p1, got p1={p1} p2={p2}"
        )));
    }
    let mut means = Vec::with_capacity(k as usize);
    means.push(p1);
    means.push(p2);
    match fill {
        FillRule::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tail: Vec<f64> = (2..k).map(|_| rng.gen::<f64>() * p2).collect();
            tail.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            means.extend(tail);
        }
        FillRule::Equal => means.extend(std::iter::repeat_n(p2, (k - 2) as usize)),
    }
    ArmModel::new(means)
}

/// Loads a comma-separated means file with header `arm_id,mean_rating` and
/// normalizes each rating by `normalizer` (5 for 5-star scales).
pub fn load_arm_means(path: &Path, normalizer: f64) -> Result<ArmModel> {
    if !normalizer.is_finite() || normalizer <= 0.0 {
        return Err(Error::Parameter(format!(
            "normalizer must be positive, got {normalizer}"
        )));
    }
    let display = path.display().to_string();
    let ingest = |line: usize, msg: String| Error::Ingestion {
        path: display.clone(),
        line,
        msg,
    };
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| ingest(1, "empty file".into()))??;
    if header.trim() != "arm_id,mean_rating" {
        return Err(ingest(
            1,
            format!("expected header \"arm_id,mean_rating\", got {header:?}"),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    let mut means = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id_str, rating_str) = line
            .split_once(',')
            .ok_or_else(|| ingest(lineno, format!("expected \"arm_id,mean_rating\", got {line:?}")))?;
        let arm_id: u64 = id_str
            .trim()
            .parse()
            .map_err(|_| ingest(lineno, format!("invalid arm_id {id_str:?}")))?;
        if arm_id == 0 {
            return Err(ingest(lineno, "arm_id must be positive".into()));
        }
        if !seen.insert(arm_id) {
            return Err(ingest(lineno, format!("duplicate arm_id {arm_id}")));
        }
        let rating: f64 = rating_str
            .trim()
            .parse()
            .map_err(|_| ingest(lineno, format!("invalid mean_rating {rating_str:?}")))?;
        if !rating.is_finite() || rating < 0.0 || rating > normalizer {
            return Err(ingest(
                lineno,
                format!("mean_rating {rating} outside [0, {normalizer}]"),
            ));
        }
        means.push(rating / normalizer);
    }
    if means.len() < 2 {
        return Err(ingest(1, format!("K must be >= 2, got {}", means.len())));
    }
    let mut sorted = means.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    if sorted[0] <= sorted[1] {
        return Err(ingest(
            1,
            format!(
                "non-unique maximum: top two normalized means are both {}",
                sorted[0]
            ),
        ));
    }
    ArmModel::new(sorted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn pull_degenerate_means() {
        let model = ArmModel::new(vec![1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(model.pull(1, &mut rng).unwrap());
            assert!(!model.pull(2, &mut rng).unwrap());
        }
    }

    #[test]
    fn pull_out_of_range_is_an_error() {
        let model = ArmModel::new(vec![0.9, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(model.pull(0, &mut rng).is_err());
        assert!(model.pull(3, &mut rng).is_err());
    }

    #[test]
    fn pull_empirical_mean() {
        // Hoeffding: 1e5 draws give half-width ~0.0096 at confidence 1-2e-40.
        let model = ArmModel::new(vec![0.8, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hits = (0..100_000)
            .filter(|_| model.pull(1, &mut rng).unwrap())
            .count();
        let mean = hits as f64 / 100_000.0;
        assert!((mean - 0.8).abs() < 0.01, "mean={mean}");
    }

    #[test]
    fn pull_is_deterministic_per_stream() {
        let model = ArmModel::new(vec![0.5, 0.2]).unwrap();
        let a: Vec<bool> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..64).map(|_| model.pull(1, &mut rng).unwrap()).collect()
        };
        let b: Vec<bool> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..64).map(|_| model.pull(1, &mut rng).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn sample_means_grid_cases() {
        let m = sample_arm_means(2, 0.8, 0.6, FillRule::Uniform, 0).unwrap();
        assert_eq!(m.means(), &[0.8, 0.6]);
        let m = sample_arm_means(3, 1.0, 0.0, FillRule::Uniform, 0).unwrap();
        assert_eq!(m.means(), &[1.0, 0.0, 0.0]);
        assert!(sample_arm_means(2, 0.6, 0.6, FillRule::Uniform, 0).is_err());
        assert!(sample_arm_means(1, 0.8, 0.6, FillRule::Uniform, 0).is_err());
    }

    #[test]
    fn sample_means_fill_is_ordered_and_in_range() {
        let m = sample_arm_means(100, 0.8, 0.6, FillRule::Uniform, 1).unwrap();
        assert_eq!(m.k(), 100);
        assert_eq!(m.mean(1), 0.8);
        assert_eq!(m.mean(2), 0.6);
        for k in 2..=100u32 {
            assert!(m.mean(k) <= 0.6 && m.mean(k) >= 0.0);
            if k > 2 {
                assert!(m.mean(k) <= m.mean(k - 1));
            }
        }
        let again = sample_arm_means(100, 0.8, 0.6, FillRule::Uniform, 1).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn equal_fill_pins_everything_at_p2() {
        let m = sample_arm_means(5, 0.9, 0.4, FillRule::Equal, 0).unwrap();
        assert_eq!(m.means(), &[0.9, 0.4, 0.4, 0.4, 0.4]);
    }

    fn write_csv(contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("arms.csv");
        std::fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn load_means_normalizes_and_sorts() {
        let (_d, path) = write_csv("arm_id,mean_rating\n2,3.5\n1,4.5\n3,3.0\n");
        let m = load_arm_means(&path, 5.0).unwrap();
        assert_eq!(m.means(), &[0.9, 0.7, 0.6]);
    }

    #[test]
    fn load_means_rejects_bad_inputs() {
        let cases = [
            ("arm_id,mean_rating\n1,5.0\n", "K must be >= 2"),
            ("arm_id,mean_rating\n1,4.0\n2,4.0\n", "non-unique maximum"),
            ("arm_id,mean_rating\n1,4.0\n1,3.0\n", "duplicate"),
            ("arm_id,mean_rating\n1,4.0\n2,5.5\n", "outside"),
            ("arm_id,mean_rating\n1,4.0\nnot-a-row\n", "expected"),
            ("wrong,header\n1,4.0\n", "header"),
        ];
        for (contents, needle) in cases {
            let (_d, path) = write_csv(contents);
            let err = load_arm_means(&path, 5.0).unwrap_err().to_string();
            assert!(err.contains(needle), "{err:?} should mention {needle:?}");
        }
    }

    #[test]
    fn load_means_reports_row_numbers() {
        let (_d, path) = write_csv("arm_id,mean_rating\n1,4.0\n2,9.9\n");
        let err = load_arm_means(&path, 5.0).unwrap_err().to_string();
        assert!(err.contains(":3:"), "row number missing in {err:?}");
    }

    #[test]
    fn subsample_keeps_best_arm() {
        let m = ArmModel::new(vec![0.9, 0.7, 0.6, 0.5, 0.4, 0.3]).unwrap();
        let s = m.subsample(3, false, 9).unwrap();
        assert_eq!(s.k(), 3);
        assert_eq!(s.mean(1), 0.9);
        assert!(s.mean(2) < 0.9);
        assert!(m.subsample(7, false, 9).is_err());
        assert!(m.subsample(7, true, 9).is_ok());
    }
}
