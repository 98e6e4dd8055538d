//! Check records: one row per verified inequality instance, with a stable
//! hash, a signed margin, and the evaluation method that produced it.

use serde::{Deserialize, Serialize};

/// Smallest slack granted to any inequality backed by floating point.
pub const MIN_SLACK: f64 = 1e-10;

/// Outcome of checking one statement on one instance. The margin is signed
/// so that nonnegative means the inequality holds; `pass` folds in the
/// slack appropriate to the method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub statement_id: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub method: String,
    pub seed: u64,
}

impl CheckResult {
    /// Inequality check with explicit slack: passes when margin >= -slack.
    #[allow(clippy::too_many_arguments)]
    pub fn with_slack(
        statement_id: &str,
        instance: &str,
        lhs: f64,
        rhs: f64,
        margin: f64,
        slack: f64,
        method: &str,
        seed: u64,
    ) -> Self {
        CheckResult {
            statement_id: statement_id.to_string(),
            instance: instance.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= -slack,
            method: method.to_string(),
            seed,
        }
    }

    /// Exact-arithmetic check: zero slack, margin taken at face value.
    pub fn exact(
        statement_id: &str,
        instance: &str,
        lhs: f64,
        rhs: f64,
        margin: f64,
        pass: bool,
    ) -> Self {
        CheckResult {
            statement_id: statement_id.to_string(),
            instance: instance.to_string(),
            lhs,
            rhs,
            margin,
            pass,
            method: "exact".to_string(),
            seed: 0,
        }
    }

    /// FNV-1a hash of the fields that identify the instance.
    pub fn instance_hash(&self) -> u64 {
        let key = format!(
            "{}|{}|{}|{}",
            self.statement_id, self.instance, self.method, self.seed
        );
        fnv1a64(key.as_bytes())
    }
}

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Slack for a quadrature-backed margin: ten times the propagated error
/// estimate, floored at the global minimum.
pub fn quad_slack(error_estimate: f64) -> f64 {
    (10.0 * error_estimate).max(MIN_SLACK)
}

/// Summary of a result list: total, failures, and worst margin.
pub fn summarize(results: &[CheckResult]) -> (usize, usize, f64) {
    let failures = results.iter().filter(|r| !r.pass).count();
    let worst = results
        .iter()
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    (results.len(), failures, worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_matches_reference_vectors() {
        // Classic FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn slack_floors_at_minimum() {
        assert_eq!(quad_slack(0.0), MIN_SLACK);
        assert_eq!(quad_slack(1e-3), 1e-2);
    }

    #[test]
    fn pass_respects_slack() {
        let r = CheckResult::with_slack(
            "demo",
            "x",
            1.0,
            1.0 + 1e-12,
            -1e-12,
            1e-10,
            "quadrature",
            0,
        );
        assert!(r.pass);
        let r = CheckResult::with_slack(
            "demo",
            "x",
            1.0,
            2.0,
            -1.0,
            1e-10,
            "quadrature",
            0,
        );
        assert!(!r.pass);
    }

    #[test]
    fn hash_depends_on_instance() {
        let a = CheckResult::exact("s", "i1", 0.0, 0.0, 0.0, true);
        let b = CheckResult::exact("s", "i2", 0.0, 0.0, 0.0, true);
        assert_ne!(a.instance_hash(), b.instance_hash());
    }
}
