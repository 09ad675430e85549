//! JSON files: game containers, partitions and profiles.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::congestion::{build_congestion_game, compile, CongestionSpec, RoutingSpec};
use crate::contribution::{build_contribution_game, ContributionSpec};
use crate::equilibria::{Adjacency, ConceptKind, DeviationConcept};
use crate::error::{validation, Error, Result};
use crate::game::{Game, Orientation, Profile};
use crate::grouping::{build_grouping_game, GroupingSpec};
use crate::partition::Partition;

/// Family-specific payload, tagged by `"family"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyPayload {
    Grouping(GroupingSpec),
    Contribution(ContributionSpec),
    Congestion(CongestionSpec),
    Routing(RoutingSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameFile {
    pub orientation: Orientation,
    pub players: usize,
    pub strategy_counts: Vec<usize>,
    pub family: FamilyPayload,
}

/// A game built from its file, plus the pair relation used for pairwise checks.
pub struct LoadedGame {
    pub game: Game,
    pub adjacency: Adjacency,
    pub file: GameFile,
}

impl LoadedGame {
    /// A deviation concept of `kind`, using this game's pair relation.
    pub fn concept(&self, kind: ConceptKind) -> DeviationConcept {
        match kind {
            ConceptKind::Pairwise => DeviationConcept::pairwise(self.adjacency.clone()),
            other => DeviationConcept::of_kind(other),
        }
    }
}

impl FamilyPayload {
    /// Builds the game and its default pair relation: contribution games use
    /// their edges, grouping games the pairs with a nonzero weight in either
    /// direction, congestion and routing games every pair.
    pub fn build(&self) -> Result<(Game, Adjacency)> {
        match self {
            FamilyPayload::Grouping(spec) => {
                let game = build_grouping_game(spec)?;
                let n = spec.player_count();
                let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                let adjacency = Adjacency::new(
                    pairs.filter(|&(i, j)| !spec.weights[i][j].is_zero() || !spec.weights[j][i].is_zero()),
                )?;
                Ok((game, adjacency))
            }
            FamilyPayload::Contribution(spec) => {
                let built = build_contribution_game(spec)?;
                Ok((built.game, built.adjacency))
            }
            FamilyPayload::Congestion(spec) => {
                let game = build_congestion_game(spec)?;
                let n = game.player_count();
                Ok((game, Adjacency::complete(n)))
            }
            FamilyPayload::Routing(spec) => {
                let game = build_congestion_game(&compile(spec)?)?;
                let n = game.player_count();
                Ok((game, Adjacency::complete(n)))
            }
        }
    }

    /// The congestion form, for smoothness checks.
    pub fn congestion_spec(&self) -> Option<CongestionSpec> {
        match self {
            FamilyPayload::Congestion(spec) => Some(spec.clone()),
            FamilyPayload::Routing(spec) => compile(spec).ok(),
            _ => None,
        }
    }
}

impl GameFile {
    /// Wraps a payload, filling in the header fields from the built game.
    pub fn from_family(family: FamilyPayload) -> Result<GameFile> {
        let (game, _) = family.build()?;
        Ok(GameFile {
            orientation: game.orientation(),
            players: game.player_count(),
            strategy_counts: game.strategy_counts().to_vec(),
            family,
        })
    }

    /// Builds the game and checks the header against it.
    pub fn load(self) -> Result<LoadedGame> {
        let (game, adjacency) = self.family.build()?;
        if game.orientation() != self.orientation {
            return Err(validation(format!(
                "header says orientation `{}` but the family is `{}`",
                self.orientation.name(),
                game.orientation().name()
            )));
        }
        if game.player_count() != self.players {
            return Err(validation(format!(
                "header says {} players but the family has {}",
                self.players,
                game.player_count()
            )));
        }
        if game.strategy_counts() != self.strategy_counts.as_slice() {
            return Err(validation(format!(
                "header strategy_counts {:?} do not match the family's {:?}",
                self.strategy_counts,
                game.strategy_counts()
            )));
        }
        Ok(LoadedGame { game, adjacency, file: self })
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, source_name: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        source_name: source_name.to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text, &path.display().to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types always serialise");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_game(path: &Path) -> Result<LoadedGame> {
    read_json::<GameFile>(path)?.load()
}

pub fn load_partition(path: &Path) -> Result<Partition> {
    read_json(path)
}

pub fn load_profile(path: &Path) -> Result<Profile> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contribution::gen_additive_chain;
    use crate::grouping::{gen_fig1, Variant};
    use crate::rational::Rational;

    #[test]
    fn contribution_payload_shape() {
        let text = r#"{ "orientation": "utility", "players": 3, "strategy_counts": [1, 3, 1],
            "family": { "family": "contribution",
                        "edges": [{"u":0,"v":1,"terms":[["2",1,0],["2",0,1]]},
                                  {"u":1,"v":2,"terms":[["1",1,0],["1",0,1]]}],
                        "budgets": ["0","1","0"], "grid": 1 } }"#;
        let file: GameFile = parse_json(text, "inline").unwrap();
        assert_eq!(file.family, FamilyPayload::Contribution(gen_additive_chain().spec));
        let loaded = file.load().unwrap();
        assert_eq!(loaded.adjacency.pairs(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn roundtrip_and_header_check() {
        let file = GameFile::from_family(FamilyPayload::Grouping(gen_fig1(Variant::Tribal).spec)).unwrap();
        let text = to_json(&file);
        assert!(text.contains("\"family\": \"grouping\""));
        assert!(text.contains("\"orientation\": \"utility\""));
        let back: GameFile = parse_json(&text, "roundtrip").unwrap();
        assert_eq!(back, file);
        let mut wrong = back;
        wrong.players = 5;
        assert!(matches!(wrong.load(), Err(Error::Validation(_))));
    }

    #[test]
    fn congestion_payload_shape() {
        let text = r#"{"orientation":"cost","players":1,"strategy_counts":[2],
            "family":{"family":"congestion","alpha":["1","1/2"],"strategies":[[[0],[1]]]}}"#;
        let loaded = parse_json::<GameFile>(text, "inline").unwrap().load().unwrap();
        assert_eq!(
            loaded.game.payoff(0, &Profile::new(vec![1])).unwrap(),
            Rational::new(1, 2)
        );
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = parse_json::<GameFile>("{\n  \"orientation\": \"cost\",\n  oops }", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");
    }
}
