use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ReportSnapshot;

/// How many of the newest snapshots take part in analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowSize {
    /// The latest `n` snapshots, `n >= 2`.
    Latest(usize),
    Unbounded,
}

impl WindowSize {
    pub fn latest(n: usize) -> Option<Self> {
        (n >= 2).then_some(WindowSize::Latest(n))
    }

    pub fn limit(self) -> Option<usize> {
        match self {
            WindowSize::Latest(n) => Some(n),
            WindowSize::Unbounded => None,
        }
    }
}

impl fmt::Display for WindowSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSize::Latest(n) => write!(f, "{n}"),
            WindowSize::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl FromStr for WindowSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unbounded") || s.eq_ignore_ascii_case("all") {
            return Ok(WindowSize::Unbounded);
        }
        let n: usize = s
            .parse()
            .map_err(|_| format!("window must be a number >= 2 or 'unbounded', got {s:?}"))?;
        WindowSize::latest(n).ok_or_else(|| format!("window must be at least 2, got {n}"))
    }
}

impl Serialize for WindowSize {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            WindowSize::Latest(n) => serializer.serialize_u64(*n as u64),
            WindowSize::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for WindowSize {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::N(n) => WindowSize::latest(n as usize)
                .ok_or_else(|| serde::de::Error::custom("window must be at least 2")),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which snapshots (by ordinal and timestamp) an analysis covered.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowDescriptor {
    pub ordinals: Vec<usize>,
    pub timestamps: Vec<i64>,
}

impl WindowDescriptor {
    pub fn from_snapshots(snapshots: &[ReportSnapshot]) -> Self {
        WindowDescriptor {
            ordinals: snapshots.iter().map(|s| s.ordinal).collect(),
            timestamps: snapshots.iter().map(|s| s.timestamp).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ordinals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinals.is_empty()
    }

    /// Ordinals of the second-newest and newest snapshot.
    pub fn latest_two(&self) -> Option<(usize, usize)> {
        match self.ordinals.as_slice() {
            [.., prev, last] => Some((*prev, *last)),
            _ => None,
        }
    }

    pub fn from_ts(&self) -> Option<i64> {
        self.timestamps.first().copied()
    }

    pub fn to_ts(&self) -> Option<i64> {
        self.timestamps.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parsing() {
        assert_eq!("10".parse::<WindowSize>(), Ok(WindowSize::Latest(10)));
        assert_eq!("Unbounded".parse::<WindowSize>(), Ok(WindowSize::Unbounded));
        assert!("1".parse::<WindowSize>().is_err());
        assert!("ten".parse::<WindowSize>().is_err());
    }

    #[test]
    fn window_serde() {
        let json = serde_json::to_string(&[WindowSize::Latest(5), WindowSize::Unbounded]).unwrap();
        assert_eq!(json, r#"[5,"unbounded"]"#);
        let back: Vec<WindowSize> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![WindowSize::Latest(5), WindowSize::Unbounded]);
        assert!(serde_json::from_str::<WindowSize>("1").is_err());
    }
}
