use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A language code of the form `lll_Ssss`, e.g. `eng_Latn` or `trp_Latn`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageTag(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid language tag {0:?}: expected three lowercase letters, '_', and a title-case four-letter script")]
pub struct InvalidLanguageTag(pub String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self, InvalidLanguageTag> {
        let bytes = code.as_bytes();
        let ok = bytes.len() == 8
            && bytes[..3].iter().all(u8::is_ascii_lowercase)
            && bytes[3] == b'_'
            && bytes[4].is_ascii_uppercase()
            && bytes[5..].iter().all(u8::is_ascii_lowercase);
        if ok {
            Ok(LanguageTag(code.to_string()))
        } else {
            Err(InvalidLanguageTag(code.to_string()))
        }
    }

    pub fn english() -> Self {
        LanguageTag("eng_Latn".to_string())
    }

    pub fn kokborok() -> Self {
        LanguageTag("trp_Latn".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageTag {
    type Err = InvalidLanguageTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageTag::new(s)
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        LanguageTag::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Where a sentence pair came from.
///
/// Serialised as a snake-case label (`smol_doc`, `wmt_bible`, ...). Any
/// other label round-trips through [`Origin::Other`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    SmolDoc,
    Gatitos,
    SmolSent,
    WmtBible,
    Synthetic,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid origin label {0:?}")]
pub struct InvalidOrigin(pub String);

impl Origin {
    pub fn label(&self) -> &str {
        match self {
            Origin::SmolDoc => "smol_doc",
            Origin::Gatitos => "gatitos",
            Origin::SmolSent => "smol_sent",
            Origin::WmtBible => "wmt_bible",
            Origin::Synthetic => "synthetic",
            Origin::Other(label) => label,
        }
    }

    /// `true` for human-translated sources.
    pub fn is_professional(&self) -> bool {
        !matches!(self, Origin::Synthetic | Origin::Other(_))
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Origin {
    type Err = InvalidOrigin;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "smol_doc" => Origin::SmolDoc,
            "gatitos" => Origin::Gatitos,
            "smol_sent" => Origin::SmolSent,
            "wmt_bible" => Origin::WmtBible,
            "synthetic" => Origin::Synthetic,
            "" => return Err(InvalidOrigin(String::new())),
            other if other.contains(|c: char| c == ':' || c.is_whitespace()) => {
                return Err(InvalidOrigin(other.to_string()))
            }
            other => Origin::Other(other.to_string()),
        })
    }
}

impl Serialize for Origin {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Origin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
