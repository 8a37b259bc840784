//! Domain types shared by every other module: the group structure, samples
//! and their classification, strategy profiles and the linear payoff.
//!
//! Positions are 1-based throughout (`1..=b`), matching the way the game is
//! usually written down. Per-position sizes are common knowledge; a player
//! only lacks knowledge of which position its own group occupies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Group structure, sample window and return on the common fund.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct GameConfig {
    sizes: Vec<usize>,
    m: usize,
    r: f64,
    players: usize,
}

/// Plain serialized shape of a [`GameConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigRepr {
    pub sizes: Vec<usize>,
    pub m: usize,
    pub r: f64,
}

impl TryFrom<ConfigRepr> for GameConfig {
    type Error = GameError;

    fn try_from(raw: ConfigRepr) -> Result<Self> {
        GameConfig::new(raw.sizes, raw.m, raw.r)
    }
}

impl From<GameConfig> for ConfigRepr {
    fn from(cfg: GameConfig) -> Self {
        ConfigRepr {
            sizes: cfg.sizes,
            m: cfg.m,
            r: cfg.r,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> GameError {
    GameError::InvalidConfig {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl GameConfig {
    pub fn new(sizes: Vec<usize>, m: usize, r: f64) -> Result<Self> {
        let b = sizes.len();
        if b < 2 {
            return Err(invalid("b", format!("need at least 2 groups, got {b}")));
        }
        if let Some(t) = sizes.iter().position(|&n| n == 0) {
            return Err(invalid("sizes", format!("group {} is empty", t + 1)));
        }
        if m == 0 || m >= b {
            return Err(invalid("m", format!("need 1 <= m < b = {b}, got {m}")));
        }
        let players: usize = sizes.iter().sum();
        if !r.is_finite() || r < 0.0 || r > players as f64 {
            return Err(invalid("r", format!("need 0 <= r <= N = {players}, got {r}")));
        }
        Ok(GameConfig {
            sizes,
            m,
            r,
            players,
        })
    }

    /// `b` groups of `n` players each.
    pub fn symmetric(b: usize, n: usize, m: usize, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "group size must be positive"));
        }
        Self::new(vec![n; b], m, r)
    }

    /// Same structure with a different return.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.sizes.clone(), self.m, r)
    }

    pub fn b(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of players, `N`.
    pub fn players(&self) -> usize {
        self.players
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Size of the group at 1-based `position`.
    pub fn size(&self, position: usize) -> usize {
        self.sizes[position - 1]
    }

    pub fn is_symmetric(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] == w[1])
    }

    /// Common group size when all groups are equal.
    pub fn group_size(&self) -> Option<usize> {
        self.is_symmetric().then(|| self.sizes[0])
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn min_size(&self) -> usize {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    /// Marginal per capita return `r/N`.
    pub fn mpcr(&self) -> f64 {
        self.r / self.players as f64
    }

    pub fn payoff_params(&self) -> PayoffParams {
        PayoffParams {
            mpcr: self.mpcr(),
            players: self.players,
        }
    }

    /// Number of predecessor groups a player at `position` samples.
    pub fn window_len(&self, position: usize) -> usize {
        self.m.min(position - 1)
    }

    pub fn check_position(&self, position: usize) -> Result<()> {
        if position == 0 || position > self.b() {
            return Err(GameError::InvalidPosition {
                position,
                b: self.b(),
            });
        }
        Ok(())
    }

    /// Positions whose players receive a sample of `sampled` groups.
    pub fn positions_with_window(&self, sampled: usize) -> std::ops::RangeInclusive<usize> {
        if sampled < self.m {
            (sampled + 1)..=(sampled + 1)
        } else {
            (self.m + 1)..=self.b()
        }
    }

    /// Every information set a player can be in, in position order.
    pub fn info_sets(&self) -> Vec<InfoSet> {
        let mut out = vec![InfoSet::ROOT];
        for sampled in 1..=self.m {
            out.push(InfoSet::new(sampled, SampleClass::Clean));
            out.push(InfoSet::new(sampled, SampleClass::Dirty));
        }
        out
    }

    /// Parse the flat `key = value` format. Recognized keys are `b`,
    /// `sizes` (comma list) or `n` (symmetric), `m` and `r`. Blank lines
    /// and `#` comments are ignored.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut b = None;
        let mut n = None;
        let mut sizes: Option<Vec<usize>> = None;
        let mut m = None;
        let mut r = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| invalid("line", format!("{}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "b" => b = Some(parse_usize("b", value)?),
                "n" => n = Some(parse_usize("n", value)?),
                "m" => m = Some(parse_usize("m", value)?),
                "r" => {
                    r = Some(
                        value
                            .parse::<f64>()
                            .map_err(|e| invalid("r", format!("`{value}`: {e}")))?,
                    )
                }
                "sizes" => {
                    let parsed = value
                        .split(',')
                        .map(|s| parse_usize("sizes", s.trim()))
                        .collect::<Result<Vec<_>>>()?;
                    sizes = Some(parsed);
                }
                other => return Err(invalid(other, "unknown key")),
            }
        }
        let m = m.ok_or_else(|| invalid("m", "missing"))?;
        let r = r.ok_or_else(|| invalid("r", "missing"))?;
        let sizes = match (sizes, n) {
            (Some(_), Some(_)) => return Err(invalid("n", "give either `sizes` or `n`, not both")),
            (Some(s), None) => {
                if let Some(b) = b {
                    if b != s.len() {
                        return Err(invalid(
                            "b",
                            format!("b = {b} but `sizes` lists {} groups", s.len()),
                        ));
                    }
                }
                s
            }
            (None, Some(n)) => {
                let b = b.ok_or_else(|| invalid("b", "missing (required with `n`)"))?;
                if n == 0 {
                    return Err(invalid("n", "group size must be positive"));
                }
                vec![n; b]
            }
            (None, None) => return Err(invalid("sizes", "missing (give `sizes` or `n`)")),
        };
        GameConfig::new(sizes, m, r)
    }

    /// Inverse of [`GameConfig::from_kv_str`].
    pub fn to_kv_string(&self) -> String {
        let sizes = self
            .sizes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "b = {}\nsizes = {}\nm = {}\nr = {}\n",
            self.b(),
            sizes,
            self.m,
            self.r
        )
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|e| invalid(key, format!("`{value}`: {e}")))
}

/// What a player sees: `sampled` predecessor groups and the number of
/// contributors among them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    pub groups_sampled: usize,
    pub contributions_seen: usize,
}

impl Sample {
    pub fn new(groups_sampled: usize, contributions_seen: usize) -> Self {
        Sample {
            groups_sampled,
            contributions_seen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SampleClass {
    /// The empty sample `(0, 0)` of the first group.
    Root,
    /// Every player in the window contributed.
    Clean,
    /// At least one contribution is missing from the window.
    Dirty,
}

impl fmt::Display for SampleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SampleClass::Root => "root",
            SampleClass::Clean => "clean",
            SampleClass::Dirty => "dirty",
        };
        f.write_str(s)
    }
}

/// A sample length together with its class. Players at positions up to `m`
/// learn their exact position from the sample length; everyone further back
/// shares the full-window information sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InfoSet {
    pub sampled: usize,
    pub class: SampleClass,
}

impl InfoSet {
    pub const ROOT: InfoSet = InfoSet {
        sampled: 0,
        class: SampleClass::Root,
    };

    pub fn new(sampled: usize, class: SampleClass) -> Self {
        InfoSet { sampled, class }
    }

    /// The clean or dirty information set with a full window.
    pub fn full_window(cfg: &GameConfig, class: SampleClass) -> Self {
        InfoSet::new(cfg.m(), class)
    }
}

impl fmt::Display for InfoSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.class, self.sampled)
    }
}

/// Classify the sample received by a player at `position`.
pub fn classify_sample(cfg: &GameConfig, position: usize, sample: Sample) -> Result<SampleClass> {
    cfg.check_position(position)?;
    let expected = cfg.window_len(position);
    let bad = |reason: String| GameError::InconsistentSample {
        position,
        sampled: sample.groups_sampled,
        seen: sample.contributions_seen,
        reason,
    };
    if sample.groups_sampled != expected {
        return Err(bad(format!("expected {expected} sampled groups")));
    }
    if expected == 0 {
        if sample.contributions_seen != 0 {
            return Err(bad("the first group sees nothing".into()));
        }
        return Ok(SampleClass::Root);
    }
    let capacity: usize = (position - expected..position).map(|k| cfg.size(k)).sum();
    if sample.contributions_seen > capacity {
        return Err(bad(format!("at most {capacity} contributors fit in the window")));
    }
    Ok(if sample.contributions_seen == capacity {
        SampleClass::Clean
    } else {
        SampleClass::Dirty
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

/// Contribution probabilities per sample class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub p_root: f64,
    pub p_clean: f64,
    pub p_dirty: f64,
}

impl StrategyProfile {
    pub fn new(p_root: f64, p_clean: f64, p_dirty: f64) -> Result<Self> {
        for (what, p) in [("p_root", p_root), ("p_clean", p_clean), ("p_dirty", p_dirty)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GameError::OutOfRange {
                    what,
                    value: p,
                    range: "[0, 1]",
                });
            }
        }
        Ok(StrategyProfile {
            p_root,
            p_clean,
            p_dirty,
        })
    }

    /// Contribute unless a defection is observed.
    pub fn grim() -> Self {
        StrategyProfile {
            p_root: 1.0,
            p_clean: 1.0,
            p_dirty: 0.0,
        }
    }

    /// Contribute on root/clean samples, forgive a dirty one with probability `gamma`.
    pub fn forgiving(gamma: f64) -> Result<Self> {
        Self::new(1.0, 1.0, gamma)
    }

    pub fn prob(&self, class: SampleClass) -> f64 {
        match class {
            SampleClass::Root => self.p_root,
            SampleClass::Clean => self.p_clean,
            SampleClass::Dirty => self.p_dirty,
        }
    }

    pub fn is_mixed(&self, class: SampleClass) -> bool {
        let p = self.prob(class);
        p > 0.0 && p < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffParams {
    pub mpcr: f64,
    pub players: usize,
}

/// Linear public-goods payoff given how many *other* players contribute.
pub fn payoff(params: PayoffParams, action: Action, others_contributing: usize) -> Result<f64> {
    if others_contributing >= params.players {
        return Err(GameError::OutOfRange {
            what: "others_contributing",
            value: others_contributing as f64,
            range: "[0, N-1]",
        });
    }
    let g = others_contributing as f64;
    Ok(match action {
        Action::C => params.mpcr * (g + 1.0) - 1.0,
        Action::D => params.mpcr * g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b: usize, n: usize, m: usize) -> GameConfig {
        GameConfig::symmetric(b, n, m, 1.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = cfg(4, 2, 1);
        assert_eq!(classify_sample(&c, 3, Sample::new(1, 2)).unwrap(), SampleClass::Clean);
        assert_eq!(classify_sample(&c, 3, Sample::new(1, 1)).unwrap(), SampleClass::Dirty);
        assert_eq!(classify_sample(&c, 1, Sample::new(0, 0)).unwrap(), SampleClass::Root);
    }

    #[test]
    fn classify_rejects_inconsistent_samples() {
        let c = cfg(4, 2, 2);
        assert!(classify_sample(&c, 3, Sample::new(1, 2)).is_err());
        assert!(classify_sample(&c, 3, Sample::new(2, 5)).is_err());
        assert!(classify_sample(&c, 1, Sample::new(0, 1)).is_err());
        assert!(classify_sample(&c, 5, Sample::new(2, 4)).is_err());
        // position 2 with m = 2 only sees one group
        assert_eq!(classify_sample(&c, 2, Sample::new(1, 2)).unwrap(), SampleClass::Clean);
    }

    #[test]
    fn classify_uses_predecessor_sizes() {
        let c = GameConfig::new(vec![1, 2, 3, 1], 2, 1.0).unwrap();
        assert_eq!(classify_sample(&c, 2, Sample::new(1, 1)).unwrap(), SampleClass::Clean);
        assert_eq!(classify_sample(&c, 4, Sample::new(2, 5)).unwrap(), SampleClass::Clean);
        assert_eq!(classify_sample(&c, 4, Sample::new(2, 4)).unwrap(), SampleClass::Dirty);
    }

    #[test]
    fn payoff_examples() {
        let p = GameConfig::symmetric(6, 1, 1, 6.0).unwrap().payoff_params();
        assert_eq!(payoff(p, Action::C, 5).unwrap(), 5.0);
        let p = GameConfig::symmetric(4, 1, 1, 2.0).unwrap().payoff_params();
        assert_eq!(payoff(p, Action::D, 0).unwrap(), 0.0);
        assert_eq!(payoff(p, Action::C, 0).unwrap(), -0.5);
        assert!(payoff(p, Action::C, 4).is_err());
    }

    #[test]
    fn config_validation_names_the_key() {
        let key = |e: GameError| match e {
            GameError::InvalidConfig { key, .. } => key,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(key(GameConfig::new(vec![2], 1, 1.0).unwrap_err()), "b");
        assert_eq!(key(GameConfig::new(vec![2, 0], 1, 1.0).unwrap_err()), "sizes");
        assert_eq!(key(GameConfig::new(vec![2, 2], 2, 1.0).unwrap_err()), "m");
        assert_eq!(key(GameConfig::new(vec![2, 2], 1, 5.0).unwrap_err()), "r");
        assert_eq!(key(GameConfig::from_kv_str("b=3\nn=2\nm=1").unwrap_err()), "r");
        assert_eq!(key(GameConfig::from_kv_str("b=3\nn=2\nm=1\nr=1\nq=2").unwrap_err()), "q");
        assert_eq!(key(GameConfig::from_kv_str("b=4\nsizes=1,2\nm=1\nr=1").unwrap_err()), "b");
    }

    #[test]
    fn kv_parsing() {
        let c = GameConfig::from_kv_str("# example\nb = 3\nn = 2\nm = 1\nr = 2.5\n").unwrap();
        assert_eq!(c, GameConfig::symmetric(3, 2, 1, 2.5).unwrap());
        let c = GameConfig::from_kv_str("sizes = 1, 2, 2\nm = 2\nr = 4").unwrap();
        assert_eq!(c.sizes(), &[1, 2, 2]);
        assert_eq!(c.players(), 5);
        assert!(!c.is_symmetric());
        assert_eq!(GameConfig::from_kv_str(&c.to_kv_string()).unwrap(), c);
    }

    #[test]
    fn info_sets_and_positions() {
        let c = cfg(5, 2, 2);
        assert_eq!(c.info_sets().len(), 5);
        assert_eq!(c.positions_with_window(0), 1..=1);
        assert_eq!(c.positions_with_window(1), 2..=2);
        assert_eq!(c.positions_with_window(2), 3..=5);
    }

    proptest::proptest! {
        #[test]
        fn free_riding_gap(b in 2usize..8, n in 1usize..5, frac in 0.0f64..1.0, g in 0usize..64) {
            let players = b * n;
            let c = GameConfig::symmetric(b, n, 1, frac * players as f64).unwrap();
            let g = g % players;
            let p = c.payoff_params();
            let gap = payoff(p, Action::D, g).unwrap() - payoff(p, Action::C, g).unwrap();
            proptest::prop_assert!((gap - (1.0 - c.mpcr())).abs() < 1e-12);
        }

        #[test]
        fn classification_is_total(sizes in proptest::collection::vec(1usize..4, 2..6), m_raw in 0usize..8, t_raw in 0usize..8, seen in 0usize..20) {
            let b = sizes.len();
            let m = 1 + m_raw % (b - 1);
            let c = GameConfig::new(sizes, m, 0.0).unwrap();
            let t = 1 + t_raw % b;
            let w = c.window_len(t);
            let cap: usize = (t - w..t).map(|k| c.size(k)).sum();
            let res = classify_sample(&c, t, Sample::new(w, seen));
            if seen <= cap {
                let class = res.unwrap();
                let expect = if t == 1 { SampleClass::Root } else if seen == cap { SampleClass::Clean } else { SampleClass::Dirty };
                proptest::prop_assert_eq!(class, expect);
            } else {
                proptest::prop_assert!(res.is_err());
            }
        }
    }
}
