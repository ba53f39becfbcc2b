//! Discrete probability primitives.
//!
//! Alphabets are dense integer ranges `0..size`. Every constructor validates
//! its input and rejects rather than renormalizes: a row that does not sum to
//! one within [`PMF_TOLERANCE`] is a configuration bug.

use crate::error::{Error, Result};

/// Allowed deviation of a pmf sum from one.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Entrywise tolerance under which two observation rows count as identical.
pub const ROW_IDENTITY_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_pmf(row: &[f64], what: &str) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some((k, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what}[{k}] = {v} is not a nonnegative finite number"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn check_rows(rows: &[Vec<f64>], width: usize, what: &str) -> Result<()> {
    for (k, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::DimensionMismatch(format!(
                "{what} row {k} has {} entries, expected {width}",
                row.len()
            )));
        }
        check_pmf(row, &format!("{what} row {k}"))?;
    }
    Ok(())
}

/// Joint law `p(x, s)` of the source and the context.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSourcePmf {
    x_size: usize,
    s_size: usize,
    // x-major: index x * s_size + s
    probs: Vec<f64>,
}

impl JointSourcePmf {
    /// Builds the law from a table indexed `[x][s]`.
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let x_size = table.len();
        if x_size < 2 {
            return Err(Error::DimensionMismatch(format!(
                "source alphabet needs at least 2 letters, got {x_size}"
            )));
        }
        let s_size = table[0].len();
        if s_size < 1 {
            return Err(Error::DimensionMismatch("context alphabet is empty".into()));
        }
        if let Some((x, row)) = table.iter().enumerate().find(|(_, r)| r.len() != s_size) {
            return Err(Error::DimensionMismatch(format!(
                "source row x={x} has {} entries, expected {s_size}",
                row.len()
            )));
        }
        let probs: Vec<f64> = table.into_iter().flatten().collect();
        check_pmf(&probs, "source pmf")?;
        let pmf = Self { x_size, s_size, probs };
        for x in 0..x_size {
            if pmf.marginal_x(x) <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "source letter x={x} has zero probability"
                )));
            }
        }
        for s in 0..s_size {
            if pmf.marginal_s(s) <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "context letter s={s} has zero probability"
                )));
            }
        }
        Ok(pmf)
    }

    /// Product law `p(x) p(s)`.
    pub fn independent(px: &[f64], ps: &[f64]) -> Result<Self> {
        check_pmf(px, "source marginal")?;
        check_pmf(ps, "context marginal")?;
        Self::new(px.iter().map(|a| ps.iter().map(|b| a * b).collect()).collect())
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn prob(&self, x: usize, s: usize) -> f64 {
        self.probs[x * self.s_size + s]
    }

    pub fn marginal_x(&self, x: usize) -> f64 {
        (0..self.s_size).map(|s| self.prob(x, s)).sum()
    }

    pub fn marginal_s(&self, s: usize) -> f64 {
        (0..self.x_size).map(|x| self.prob(x, s)).sum()
    }

    /// `p(x | s)`.
    pub fn conditional_x(&self, x: usize, s: usize) -> f64 {
        self.prob(x, s) / self.marginal_s(s)
    }

    /// Iterates `(x, s, p(x, s))` in x-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k / self.s_size, k % self.s_size, p))
    }
}

/// The common sensor law `p(y | x, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationChannel {
    x_size: usize,
    s_size: usize,
    y_size: usize,
    rows: Vec<Vec<f64>>,
}

impl ObservationChannel {
    /// Builds the channel from a table indexed `[x][s][y]`.
    pub fn new(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let x_size = table.len();
        if x_size == 0 {
            return Err(Error::DimensionMismatch("observation table is empty".into()));
        }
        let s_size = table[0].len();
        if let Some((x, r)) = table.iter().enumerate().find(|(_, r)| r.len() != s_size) {
            return Err(Error::DimensionMismatch(format!(
                "observation table x={x} has {} context rows, expected {s_size}",
                r.len()
            )));
        }
        let rows: Vec<Vec<f64>> = table.into_iter().flatten().collect();
        Self::from_rows(x_size, s_size, rows)
    }

    /// Builds the channel from rows ordered x-major, `rows[x * s_size + s]`.
    pub fn from_rows(x_size: usize, s_size: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != x_size * s_size || s_size == 0 {
            return Err(Error::DimensionMismatch(format!(
                "observation channel needs {} rows, got {}",
                x_size * s_size,
                rows.len()
            )));
        }
        let y_size = rows[0].len();
        if y_size < 2 {
            return Err(Error::DimensionMismatch(format!(
                "observation alphabet needs at least 2 letters, got {y_size}"
            )));
        }
        check_rows(&rows, y_size, "observation")?;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let same = rows[a]
                    .iter()
                    .zip(&rows[b])
                    .all(|(p, q)| (p - q).abs() <= ROW_IDENTITY_TOLERANCE);
                if same {
                    return Err(Error::IndistinguishableRows {
                        x1: a / s_size,
                        s1: a % s_size,
                        x2: b / s_size,
                        s2: b % s_size,
                    });
                }
            }
        }
        Ok(Self { x_size, s_size, y_size, rows })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// `p(. | x, s)`.
    pub fn row(&self, x: usize, s: usize) -> &[f64] {
        &self.rows[x * self.s_size + s]
    }

    fn check_source(&self, src: &JointSourcePmf) -> Result<()> {
        if src.x_size() != self.x_size || src.s_size() != self.s_size {
            return Err(Error::DimensionMismatch(format!(
                "source is {}x{} but observation channel expects {}x{}",
                src.x_size(),
                src.s_size(),
                self.x_size,
                self.s_size
            )));
        }
        Ok(())
    }
}

/// A quantizer `p(u | y)` used by every sensor of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct TestChannel {
    u_size: usize,
    rows: Vec<Vec<f64>>,
}

impl TestChannel {
    /// Builds the channel from rows indexed `[y][u]`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DimensionMismatch("test channel has no rows".into()));
        }
        let u_size = rows[0].len();
        if u_size == 0 {
            return Err(Error::DimensionMismatch("test channel output alphabet is empty".into()));
        }
        check_rows(&rows, u_size, "test channel")?;
        Ok(Self { u_size, rows })
    }

    /// `u = y`.
    pub fn identity(size: usize) -> Self {
        let rows = (0..size)
            .map(|y| (0..size).map(|u| if u == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { u_size: size, rows }
    }

    /// Every `y` maps to `u = 0`.
    pub fn constant(y_size: usize, u_size: usize) -> Self {
        let mut row = vec![0.0; u_size.max(1)];
        row[0] = 1.0;
        Self { u_size: row.len(), rows: vec![row; y_size] }
    }

    /// Deterministic quantizer `u = map[y]`.
    pub fn deterministic(map: &[usize], u_size: usize) -> Result<Self> {
        let rows = map
            .iter()
            .enumerate()
            .map(|(y, &u)| {
                if u >= u_size {
                    return Err(Error::DimensionMismatch(format!(
                        "quantizer maps y={y} to u={u}, outside 0..{u_size}"
                    )));
                }
                let mut row = vec![0.0; u_size];
                row[u] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn y_size(&self) -> usize {
        self.rows.len()
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    /// `p(. | y)`.
    pub fn row(&self, y: usize) -> &[f64] {
        &self.rows[y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Relabels outputs: the returned channel emits `perm[u]` where `self` emits `u`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.u_size];
        if perm.len() != self.u_size
            || perm.iter().any(|&v| v >= self.u_size || std::mem::replace(&mut seen[v], true))
        {
            return Err(Error::DimensionMismatch(format!(
                "{perm:?} is not a permutation of 0..{}",
                self.u_size
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; self.u_size];
                for (u, &p) in row.iter().enumerate() {
                    out[perm[u]] = p;
                }
                out
            })
            .collect();
        Ok(Self { u_size: self.u_size, rows })
    }
}

/// The law `p_{x,s}(u) = sum_y p(y | x, s) p(u | y)` seen by the fusion center.
#[derive(Debug, Clone, PartialEq)]
pub struct CodewordChannel {
    x_size: usize,
    s_size: usize,
    u_size: usize,
    rows: Vec<Vec<f64>>,
}

impl CodewordChannel {
    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn row(&self, x: usize, s: usize) -> &[f64] {
        &self.rows[x * self.s_size + s]
    }
}

fn check_test(obs: &ObservationChannel, test: &TestChannel) -> Result<()> {
    if obs.y_size() != test.y_size() {
        return Err(Error::DimensionMismatch(format!(
            "observation alphabet has {} letters but test channel has {} rows",
            obs.y_size(),
            test.y_size()
        )));
    }
    Ok(())
}

/// Composes the observation channel with a test channel.
pub fn induced_codeword_channel(
    obs: &ObservationChannel,
    test: &TestChannel,
) -> Result<CodewordChannel> {
    check_test(obs, test)?;
    let rows = obs
        .rows
        .iter()
        .map(|py| {
            let mut pu = vec![0.0; test.u_size()];
            for (y, &p) in py.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (acc, &q) in pu.iter_mut().zip(test.row(y)) {
                    *acc += p * q;
                }
            }
            pu
        })
        .collect();
    Ok(CodewordChannel {
        x_size: obs.x_size(),
        s_size: obs.s_size(),
        u_size: test.u_size(),
        rows,
    })
}

/// `I(U; Y | X, S)` in nats for a single group's test channel.
pub fn conditional_mutual_information(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
    test: &TestChannel,
) -> Result<f64> {
    obs.check_source(src)?;
    let codeword = induced_codeword_channel(obs, test)?;
    let mut total = 0.0;
    for (x, s, pxs) in src.iter() {
        if pxs == 0.0 {
            continue;
        }
        let pu = codeword.row(x, s);
        let mut inner = 0.0;
        for (y, &py) in obs.row(x, s).iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            let kl: f64 = test
                .row(y)
                .iter()
                .zip(pu)
                .filter(|(q, _)| **q > 0.0)
                .map(|(q, p)| q * (q / p).ln())
                .sum();
            inner += py * kl;
        }
        total += pxs * inner;
    }
    Ok(total.max(0.0))
}

/// `H(Y | X, S)` in nats.
pub fn conditional_entropy_y_given_xs(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
) -> Result<f64> {
    obs.check_source(src)?;
    let h = src
        .iter()
        .map(|(x, s, pxs)| {
            let hy: f64 = obs
                .row(x, s)
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * p.ln())
                .sum();
            pxs * hy
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(eps: f64) -> ObservationChannel {
        ObservationChannel::new(vec![vec![vec![1.0 - eps, eps]], vec![vec![eps, 1.0 - eps]]])
            .unwrap()
    }

    #[test]
    fn rejects_unnormalized_and_negative_rows() {
        assert!(matches!(
            TestChannel::new(vec![vec![0.5, 0.4]]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            TestChannel::new(vec![vec![1.2, -0.2]]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            JointSourcePmf::new(vec![vec![0.5, 0.5], vec![0.0, 0.0]]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            JointSourcePmf::new(vec![vec![0.5, 0.0], vec![0.5, 0.0]]),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn rejects_identical_observation_rows() {
        let err = ObservationChannel::new(vec![
            vec![vec![0.5, 0.5], vec![0.2, 0.8]],
            vec![vec![0.2, 0.8], vec![0.9, 0.1]],
        ])
        .unwrap_err();
        assert_eq!(err, Error::IndistinguishableRows { x1: 0, s1: 1, x2: 1, s2: 0 });
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let obs = bsc(0.1);
        let test = TestChannel::identity(3);
        assert!(matches!(
            induced_codeword_channel(&obs, &test),
            Err(Error::DimensionMismatch(_))
        ));
        let src = JointSourcePmf::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!(matches!(
            conditional_entropy_y_given_xs(&src, &obs),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn identity_quantizer_reproduces_observation_rows() {
        let obs = bsc(0.1);
        let cw = induced_codeword_channel(&obs, &TestChannel::identity(2)).unwrap();
        assert_eq!(cw.row(0, 0), obs.row(0, 0));
        assert_eq!(cw.row(1, 0), obs.row(1, 0));
    }

    #[test]
    fn constant_quantizer_gives_point_masses() {
        let obs = bsc(0.3);
        let cw = induced_codeword_channel(&obs, &TestChannel::constant(2, 3)).unwrap();
        for x in 0..2 {
            assert_eq!(cw.row(x, 0), &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn hand_computed_composition() {
        let obs = ObservationChannel::new(vec![vec![vec![0.8, 0.2]], vec![vec![0.4, 0.6]]]).unwrap();
        let test = TestChannel::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let cw = induced_codeword_channel(&obs, &test).unwrap();
        assert!((cw.row(0, 0)[0] - 0.78).abs() < 1e-15);
        assert!((cw.row(0, 0)[1] - 0.22).abs() < 1e-15);
    }

    #[test]
    fn entropy_special_cases() {
        let src = JointSourcePmf::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let det = ObservationChannel::new(vec![
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
            vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
        ])
        .unwrap();
        assert_eq!(conditional_entropy_y_given_xs(&src, &det).unwrap(), 0.0);

        // distinct rows, each uniform over four letters
        let mut lo = vec![0.25; 4];
        lo.extend([0.0; 4]);
        let hi: Vec<f64> = lo.iter().rev().copied().collect();
        let uniform = ObservationChannel::new(vec![vec![lo], vec![hi]]).unwrap();
        let src1 = JointSourcePmf::new(vec![vec![0.4], vec![0.6]]).unwrap();
        let h = conditional_entropy_y_given_xs(&src1, &uniform).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_quantizer_has_zero_rate() {
        let src = JointSourcePmf::new(vec![vec![0.3], vec![0.7]]).unwrap();
        let obs = bsc(0.2);
        let mi =
            conditional_mutual_information(&src, &obs, &TestChannel::constant(2, 2)).unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn identity_quantizer_rate_is_conditional_entropy() {
        let src = JointSourcePmf::new(vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let obs = ObservationChannel::new(vec![
            vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8]],
            vec![vec![0.3, 0.3, 0.4], vec![0.05, 0.9, 0.05]],
        ])
        .unwrap();
        let mi = conditional_mutual_information(&src, &obs, &TestChannel::identity(3)).unwrap();
        let h = conditional_entropy_y_given_xs(&src, &obs).unwrap();
        assert!((mi - h).abs() < 1e-12, "{mi} vs {h}");
    }

    #[test]
    fn relabel_rejects_non_permutations() {
        let t = TestChannel::identity(3);
        assert!(t.relabel(&[0, 0, 1]).is_err());
        assert!(t.relabel(&[0, 1]).is_err());
        assert_eq!(t.relabel(&[2, 0, 1]).unwrap().row(0), &[0.0, 0.0, 1.0]);
    }
}
