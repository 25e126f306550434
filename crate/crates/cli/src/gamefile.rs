//! The JSON game file: `{"n": 3, "values": {"1": 0, "1,2": 1, ...}}`.

use std::collections::HashSet;
use std::fmt;

use lsvalue::{Coalition, Game, PlayerSet, MAX_PLAYERS};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameFileError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("n must be between 1 and {MAX_PLAYERS}, got {0}")]
    PlayerCount(u64),
    #[error("duplicate key \"{0}\"")]
    DuplicateKey(String),
    #[error("malformed key \"{key}\": {reason}")]
    MalformedKey { key: String, reason: String },
    #[error("the empty coalition (key \"{0}\") must not be listed")]
    EmptyCoalition(String),
    #[error("missing coalition {0}")]
    MissingCoalition(String),
    #[error("value for coalition {key} is not finite")]
    NotFinite { key: String },
}

/// Key/value pairs in file order, rejecting repeated keys.
#[derive(Debug)]
struct Entries(Vec<(String, f64)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Entries;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from coalition key to number")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                while let Some((key, value)) = map.next_entry::<String, f64>()? {
                    if !seen.insert(key.clone()) {
                        return Err(de::Error::custom(format_args!("duplicate key \"{key}\"")));
                    }
                    out.push((key, value));
                }
                Ok(Entries(out))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGameFile {
    n: u64,
    values: Entries,
}

/// Parses a coalition key such as `"1,3"` for `players`.
pub fn parse_key(key: &str, players: PlayerSet) -> Result<Coalition, GameFileError> {
    if key.is_empty() || key == "0" {
        return Err(GameFileError::EmptyCoalition(key.to_string()));
    }
    let malformed = |reason: String| GameFileError::MalformedKey {
        key: key.to_string(),
        reason,
    };
    let mut members = Vec::new();
    for part in key.split(',') {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(format!("\"{part}\" is not a player index")));
        }
        let i: usize = part
            .parse()
            .map_err(|_| malformed(format!("\"{part}\" is not a player index")))?;
        if i == 0 || i > players.n() {
            return Err(malformed(format!("player {i} is outside 1..{}", players.n())));
        }
        if members.last().is_some_and(|&last| last >= i) {
            return Err(malformed("indices must be strictly increasing".into()));
        }
        members.push(i);
    }
    Ok(Coalition::from_members(&members, players).expect("validated members"))
}

/// Validates `n` and collects a complete coalition table from `entries`.
pub(crate) fn table_from_entries(
    n: u64,
    entries: Vec<(String, f64)>,
) -> Result<(PlayerSet, Vec<Option<f64>>), GameFileError> {
    if n == 0 || n > MAX_PLAYERS as u64 {
        return Err(GameFileError::PlayerCount(n));
    }
    let players = PlayerSet::new(n as usize).expect("n checked");
    let mut table = vec![None; players.num_coalitions()];
    for (key, value) in entries {
        let s = parse_key(&key, players)?;
        if !value.is_finite() {
            return Err(GameFileError::NotFinite { key });
        }
        // Distinct spellings cannot map to one coalition once keys are canonical.
        table[s.index()] = Some(value);
    }
    Ok((players, table))
}

fn syntax(e: serde_json::Error) -> GameFileError {
    let msg = e.to_string();
    match msg.strip_prefix("duplicate key \"") {
        Some(rest) => GameFileError::DuplicateKey(rest.split('"').next().unwrap_or_default().to_string()),
        None => GameFileError::Syntax(msg),
    }
}

/// Parses a game file. The result does not depend on key order.
pub fn parse_game(text: &str) -> Result<Game, GameFileError> {
    let raw: RawGameFile = serde_json::from_str(text).map_err(syntax)?;
    let (players, table) = table_from_entries(raw.n, raw.values.0)?;
    let mut values = Vec::with_capacity(table.len());
    for (idx, entry) in table.into_iter().enumerate() {
        match entry {
            Some(x) => values.push(x),
            None => return Err(GameFileError::MissingCoalition(Coalition::from_index(idx).key())),
        }
    }
    Ok(Game::new(players, values).expect("complete table"))
}

/// Parses a per-coalition weight file (same key rules, all coalitions required).
pub fn parse_coalition_map(text: &str, players: PlayerSet) -> Result<Vec<f64>, GameFileError> {
    let entries: Entries = serde_json::from_str(text).map_err(syntax)?;
    let (_, table) = table_from_entries(players.n() as u64, entries.0)?;
    table
        .into_iter()
        .enumerate()
        .map(|(idx, e)| e.ok_or_else(|| GameFileError::MissingCoalition(Coalition::from_index(idx).key())))
        .collect()
}

struct Values<'a, F>(&'a Game, F);

impl<F: Fn(f64) -> f64> Serialize for Values<'_, F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let players = self.0.players();
        let mut map = serializer.serialize_map(Some(players.num_coalitions()))?;
        for s in players.coalitions() {
            map.serialize_entry(&s.key(), &(self.1)(self.0.value(s)))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
#[serde(bound = "")]
struct GameFileOut<'a, F: Fn(f64) -> f64> {
    n: usize,
    values: Values<'a, F>,
}

/// Writes a game file with keys in bitmask order and exact values.
pub fn serialize_game(v: &Game) -> String {
    serialize_game_with(v, |x| x)
}

/// Like [`serialize_game`], mapping each value through `f` first.
pub fn serialize_game_with(v: &Game, f: impl Fn(f64) -> f64) -> String {
    let out = GameFileOut {
        n: v.players().n(),
        values: Values(v, f),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("maps with string keys serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimity_file() {
        let g = parse_game(r#"{"n":2,"values":{"1":0,"2":0,"1,2":1}}"#).unwrap();
        assert_eq!(g.table(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn single_player() {
        let g = parse_game(r#"{"n":1,"values":{"1":5}}"#).unwrap();
        assert_eq!(g.grand_value(), 5.0);
    }

    #[test]
    fn key_order_is_irrelevant() {
        let a = parse_game(r#"{"n":2,"values":{"1":1,"2":2,"1,2":3}}"#).unwrap();
        let b = parse_game(r#"{"values":{"1,2":3,"2":2,"1":1},"n":2}"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let err = |t: &str| parse_game(t).unwrap_err();
        assert_eq!(err(r#"{"n":2,"values":{"1":0,"1,2":1}}"#).to_string(), "missing coalition 2");
        assert_eq!(
            err(r#"{"n":2,"values":{"1":0,"2":0,"1,2":1,"2":3}}"#),
            GameFileError::DuplicateKey("2".into())
        );
        assert!(matches!(err(r#"{"n":2,"values":{"1":0,"2":0,"2,1":1}}"#), GameFileError::MalformedKey { .. }));
        assert!(matches!(err(r#"{"n":2,"values":{"0":0,"1":0,"0,1":1}}"#), GameFileError::EmptyCoalition(_)));
        assert!(matches!(err(r#"{"n":2,"values":{"1":0,"2":0,"1,3":1}}"#), GameFileError::MalformedKey { .. }));
        assert!(matches!(err(r#"{"n":2,"values":{"1":0,"2":0,"1, 2":1}}"#), GameFileError::MalformedKey { .. }));
        assert!(matches!(err(r#"{"n":2,"values":{"":0,"1":0,"2":0,"1,2":1}}"#), GameFileError::EmptyCoalition(_)));
        assert_eq!(err(r#"{"n":21,"values":{}}"#), GameFileError::PlayerCount(21));
        assert_eq!(err(r#"{"n":0,"values":{}}"#), GameFileError::PlayerCount(0));
        assert!(matches!(err(r#"{"n":1,"values":{"1":1},"x":2}"#), GameFileError::Syntax(_)));
        assert!(matches!(err("not json"), GameFileError::Syntax(_)));
    }

    #[test]
    fn first_missing_key_in_bitmask_order() {
        let e = parse_game(r#"{"n":3,"values":{"1":0,"2":0,"3":0,"1,2,3":1}}"#).unwrap_err();
        assert_eq!(e.to_string(), "missing coalition 1,2");
    }

    #[test]
    fn round_trip() {
        let text = r#"{"n":3,"values":{"1":0.1,"2":-2,"1,2":1e-7,"3":3,"1,3":0,"2,3":0.3333333333333333,"1,2,3":7}}"#;
        let g = parse_game(text).unwrap();
        let out = serialize_game(&g);
        assert_eq!(parse_game(&out).unwrap(), g);
        assert_eq!(serialize_game(&parse_game(&out).unwrap()), out);
    }

    #[test]
    fn coalition_maps() {
        let ps = PlayerSet::new(2).unwrap();
        assert_eq!(parse_coalition_map(r#"{"1,2":3,"1":1,"2":2}"#, ps).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_coalition_map(r#"{"1":1}"#, ps).is_err());
    }
}
