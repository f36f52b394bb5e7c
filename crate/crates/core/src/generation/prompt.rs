use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GenerationError;

/// Default templates, shipped with the crate and editable on disk.
pub const DEFAULT_TEMPLATES: &str = include_str!("../../templates/prompts.toml");

const PLACEHOLDER: &str = "{target}";

/// The four collection stages, in protocol order.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(into = "u8", try_from = "u8")]
pub enum Stage {
    /// Sentences with the seed object as the verb's object.
    #[default]
    Seed = 1,
    /// Location-bearing phrases for each collected object.
    Location = 2,
    /// Action sentences for each collected object phrase.
    Action = 3,
    /// Sentences about each collected attribute.
    Attribute = 4,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Seed,
        Stage::Location,
        Stage::Action,
        Stage::Attribute,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Tag stamped on parsed records of this stage: `stage1` .. `stage4`.
    pub fn tag(self) -> String {
        format!("stage{}", self.number())
    }
}

impl From<Stage> for u8 {
    fn from(s: Stage) -> u8 {
        s.number()
    }
}

impl TryFrom<u8> for Stage {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        Stage::ALL
            .into_iter()
            .find(|s| s.number() == n)
            .ok_or_else(|| format!("stage must be 1..=4, got {n}"))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One template per stage, each containing a `{target}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Templates {
    pub stage1: String,
    pub stage2: String,
    pub stage3: String,
    pub stage4: String,
}

impl Default for Templates {
    fn default() -> Self {
        DEFAULT_TEMPLATES
            .parse()
            .expect("bundled templates are valid")
    }
}

impl FromStr for Templates {
    type Err = GenerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: Templates =
            toml::from_str(s).map_err(|e| GenerationError::Template(e.to_string()))?;
        for stage in Stage::ALL {
            if !t.get(stage).contains(PLACEHOLDER) {
                return Err(GenerationError::Template(format!(
                    "stage{stage} template has no {PLACEHOLDER} placeholder"
                )));
            }
        }
        Ok(t)
    }
}

impl Templates {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    pub fn get(&self, stage: Stage) -> &str {
        match stage {
            Stage::Seed => &self.stage1,
            Stage::Location => &self.stage2,
            Stage::Action => &self.stage3,
            Stage::Attribute => &self.stage4,
        }
    }

    /// Fills the stage template with `target`.
    pub fn make_prompt(&self, stage: Stage, target: &str) -> Result<String, GenerationError> {
        let target = target.trim();
        if target.is_empty() {
            return Err(GenerationError::EmptyTarget(stage));
        }
        Ok(self.get(stage).replace(PLACEHOLDER, target))
    }
}

/// [`Templates::make_prompt`] with the bundled templates.
pub fn make_prompt(stage: Stage, target: &str) -> Result<String, GenerationError> {
    Templates::default().make_prompt(stage, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_prompt_names_subject_object_and_one_sentence() {
        let p = make_prompt(Stage::Seed, "apple").unwrap();
        assert!(p.contains("\"I\""));
        assert!(p.contains("apple"));
        assert!(p.contains("one plain English sentence"));
    }

    #[test]
    fn location_prompt_asks_for_location() {
        let p = make_prompt(Stage::Location, "apple").unwrap();
        assert!(p.contains("location phrase"));
        assert!(p.contains("on the table"));
    }

    #[test]
    fn every_stage_demands_first_person_single_sentence() {
        for stage in Stage::ALL {
            let p = make_prompt(stage, "knife").unwrap();
            assert!(p.contains("subject is \"I\""), "{stage}");
            assert!(p.contains("one plain English sentence"), "{stage}");
            assert!(!p.contains(PLACEHOLDER));
        }
    }

    #[test]
    fn empty_target_is_rejected() {
        assert!(matches!(
            make_prompt(Stage::Action, ""),
            Err(GenerationError::EmptyTarget(Stage::Action))
        ));
        assert!(make_prompt(Stage::Action, "   ").is_err());
    }

    #[test]
    fn templates_need_placeholders() {
        let bad =
            "stage1 = \"x\"\nstage2 = \"{target}\"\nstage3 = \"{target}\"\nstage4 = \"{target}\"";
        assert!(bad.parse::<Templates>().is_err());
        assert!("stage1 = \"{target}\"".parse::<Templates>().is_err());
    }

    #[test]
    fn stage_numbers_round_trip() {
        for s in Stage::ALL {
            assert_eq!(Stage::try_from(s.number()), Ok(s));
        }
        assert!(Stage::try_from(5).is_err());
        assert_eq!(Stage::Attribute.tag(), "stage4");
    }
}
