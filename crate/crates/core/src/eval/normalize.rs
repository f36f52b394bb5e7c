//! Rule-based normalization of free-text action phrases to
//! `(verb lemma, object head lemma)` pairs.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedAction {
    pub verb: String,
    pub object: Option<String>,
}

impl NormalizedAction {
    /// The graph action label this phrase matches: "slice apple" or "run".
    pub fn label(&self) -> String {
        match &self.object {
            Some(o) => format!("{} {o}", self.verb),
            None => self.verb.clone(),
        }
    }
}

impl fmt::Display for NormalizedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("empty action phrase")]
    Empty,
    #[error("no verb in {0:?}")]
    NoVerb(String),
}

/// Leading words dropped before the verb: subjects, modals, infinitive "to".
const LEADING: &[&str] = &[
    "i", "we", "you", "they", "to", "would", "could", "can", "will", "should", "might", "may",
    "must", "shall", "just", "probably", "maybe", "then", "also",
];

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "my", "your", "his", "her", "its", "our", "their", "some", "this", "that",
    "these", "those", "any", "each", "every", "one", "two", "three", "another", "more", "few",
    "several", "many", "all", "both",
];

const PRONOUNS: &[&str] = &[
    "it",
    "them",
    "him",
    "her",
    "me",
    "us",
    "something",
    "someone",
];

const PREPOSITIONS: &[&str] = &[
    "with", "at", "in", "on", "from", "to", "into", "onto", "for", "of", "by", "under", "over",
    "near", "behind", "inside", "through", "using", "across", "about", "after", "before", "around",
    "off", "out",
];

/// Verb particles folded into the verb ("pick up"). Prepositions that are
/// more often heads of an oblique ("on", "in") are deliberately absent.
const PARTICLES: &[&str] = &["up", "down", "out", "off", "away", "back", "over"];

const IRREGULAR_VERBS: &[(&str, &str)] = &[
    ("ate", "eat"),
    ("eaten", "eat"),
    ("bought", "buy"),
    ("took", "take"),
    ("taken", "take"),
    ("threw", "throw"),
    ("thrown", "throw"),
    ("gave", "give"),
    ("given", "give"),
    ("made", "make"),
    ("held", "hold"),
    ("got", "get"),
    ("gotten", "get"),
    ("went", "go"),
    ("gone", "go"),
    ("saw", "see"),
    ("seen", "see"),
    ("brought", "bring"),
    ("caught", "catch"),
    ("drank", "drink"),
    ("drunk", "drink"),
    ("drove", "drive"),
    ("driven", "drive"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("found", "find"),
    ("ground", "grind"),
    ("hung", "hang"),
    ("kept", "keep"),
    ("left", "leave"),
    ("sold", "sell"),
    ("sent", "send"),
    ("shook", "shake"),
    ("shaken", "shake"),
    ("stole", "steal"),
    ("stolen", "steal"),
    ("wrote", "write"),
    ("written", "write"),
    ("bit", "bite"),
    ("bitten", "bite"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("did", "do"),
    ("done", "do"),
    ("does", "do"),
    ("had", "have"),
    ("has", "have"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("is", "be"),
    ("are", "be"),
    ("am", "be"),
    ("ran", "run"),
    ("sat", "sit"),
    ("stood", "stand"),
    ("told", "tell"),
    ("thought", "think"),
    ("fed", "feed"),
    ("stuck", "stick"),
    ("swung", "swing"),
    ("tore", "tear"),
    ("torn", "tear"),
    ("wore", "wear"),
    ("worn", "wear"),
    ("won", "win"),
    ("froze", "freeze"),
    ("frozen", "freeze"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("knew", "know"),
    ("known", "know"),
    ("laid", "lay"),
    ("lent", "lend"),
    ("lost", "lose"),
    ("met", "meet"),
    ("paid", "pay"),
    ("rode", "ride"),
    ("ridden", "ride"),
    ("rose", "rise"),
    ("said", "say"),
    ("sang", "sing"),
    ("sung", "sing"),
    ("sank", "sink"),
    ("slid", "slide"),
    ("spent", "spend"),
    ("spun", "spin"),
    ("struck", "strike"),
    ("swept", "sweep"),
    ("taught", "teach"),
    ("woke", "wake"),
    ("dug", "dig"),
    ("drew", "draw"),
    ("drawn", "draw"),
    ("flew", "fly"),
    ("forgot", "forget"),
    ("hid", "hide"),
    ("hidden", "hide"),
    ("led", "lead"),
    ("built", "build"),
    ("burnt", "burn"),
    ("dealt", "deal"),
    ("felt", "feel"),
    ("fought", "fight"),
    ("heard", "hear"),
    ("meant", "mean"),
    ("sought", "seek"),
    ("slept", "sleep"),
    ("smelt", "smell"),
    ("spat", "spit"),
    ("split", "split"),
    ("went", "go"),
    ("goes", "go"),
    ("lying", "lie"),
    ("dying", "die"),
    ("tying", "tie"),
];

/// Verbs whose bare form resolves suffix ambiguity ("slic" + "e").
const VERBS: &[&str] = &[
    "bake",
    "bite",
    "blend",
    "boil",
    "bring",
    "buy",
    "carry",
    "carve",
    "catch",
    "chew",
    "chop",
    "choose",
    "clean",
    "close",
    "collect",
    "cook",
    "core",
    "cover",
    "crush",
    "cut",
    "dice",
    "draw",
    "drink",
    "drop",
    "dry",
    "eat",
    "examine",
    "fall",
    "feed",
    "fill",
    "find",
    "fry",
    "give",
    "grab",
    "grate",
    "grill",
    "grind",
    "grow",
    "hand",
    "hang",
    "harvest",
    "hit",
    "hold",
    "inspect",
    "juice",
    "keep",
    "leave",
    "lift",
    "like",
    "look",
    "love",
    "make",
    "mash",
    "move",
    "offer",
    "open",
    "order",
    "pack",
    "paint",
    "pass",
    "peel",
    "pick",
    "place",
    "plant",
    "pour",
    "prepare",
    "press",
    "put",
    "reach",
    "rinse",
    "roll",
    "run",
    "save",
    "see",
    "sell",
    "serve",
    "share",
    "shake",
    "sketch",
    "slice",
    "smell",
    "snack",
    "squeeze",
    "steal",
    "stir",
    "store",
    "swap",
    "take",
    "taste",
    "toss",
    "trade",
    "throw",
    "use",
    "wash",
    "watch",
    "weigh",
    "wipe",
    "wrap",
    "write",
    "bag",
    "compare",
    "choose",
    "admire",
    "bite",
    "pickle",
    "puree",
    "arrange",
    "decorate",
    "donate",
    "exchange",
    "freeze",
    "measure",
    "notice",
    "observe",
    "photograph",
    "polish",
    "purchase",
    "receive",
    "remove",
    "scoop",
    "shape",
    "smash",
    "squash",
    "stack",
    "stuff",
    "toast",
    "try",
    "check",
    "count",
    "hide",
    "lay",
    "scrub",
    "spread",
    "split",
];

fn is_verb(w: &str) -> bool {
    VERBS.contains(&w)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Restores the base form from a stem left by stripping "-ing" or "-ed".
fn restore_stem(stem: &str) -> String {
    if stem.is_empty() {
        return stem.to_string();
    }
    if is_verb(stem) {
        return stem.to_string();
    }
    let with_e = format!("{stem}e");
    if is_verb(&with_e) {
        return with_e;
    }
    let b = stem.as_bytes();
    let n = b.len();
    // Doubled final consonant: "cutt" -> "cut", "chopp" -> "chop"; but
    // "fall", "press", "buzz" keep theirs.
    if n >= 3
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        return stem[..n - 1].to_string();
    }
    // Consonant-vowel-consonant endings usually lost an "e": "slic", "grat".
    if n >= 3
        && !is_vowel(b[n - 1])
        && is_vowel(b[n - 2])
        && !is_vowel(b[n - 3])
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
        && !stem.ends_with("en")
        && !stem.ends_with("er")
        && !stem.ends_with("on")
    {
        return with_e;
    }
    // "c", "v", "z" or "g" after a consonant: "danc", "carv", "charg".
    if n >= 2 && matches!(b[n - 1], b'c' | b'v' | b'z') && !is_vowel(b[n - 2]) {
        return with_e;
    }
    // Syllabic "l" after another consonant: "juggl", "handl", "tickl".
    if n >= 3 && b[n - 1] == b'l' && !is_vowel(b[n - 2]) && b[n - 2] != b'l' && b[n - 2] != b'r' {
        return with_e;
    }
    stem.to_string()
}

/// Lemma of an inflected verb form.
pub fn lemmatize_verb(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some((_, lemma)) = IRREGULAR_VERBS.iter().find(|(form, _)| *form == w) {
        return lemma.to_string();
    }
    if is_verb(&w) {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ing").filter(|s| s.len() >= 2) {
        return restore_stem(stem);
    }
    if let Some(stem) = w.strip_suffix("ied").filter(|s| !s.is_empty()) {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ed").filter(|s| s.len() >= 2) {
        return restore_stem(stem);
    }
    if let Some(stem) = w.strip_suffix("ies").filter(|s| !s.is_empty()) {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("es") {
        if is_verb(stem)
            || ["sh", "ch", "x", "ss", "zz", "o"]
                .iter()
                .any(|e| stem.ends_with(e))
        {
            return stem.to_string();
        }
    }
    if let Some(stem) = w
        .strip_suffix('s')
        .filter(|s| s.len() >= 2 && !s.ends_with('s'))
    {
        return stem.to_string();
    }
    w
}

const IRREGULAR_NOUNS: &[(&str, &str)] = &[
    ("children", "child"),
    ("people", "person"),
    ("men", "man"),
    ("women", "woman"),
    ("teeth", "tooth"),
    ("feet", "foot"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("loaves", "loaf"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("wolves", "wolf"),
    ("lives", "life"),
    ("wives", "wife"),
    ("potatoes", "potato"),
    ("tomatoes", "tomato"),
    ("heroes", "hero"),
    ("fish", "fish"),
    ("sheep", "sheep"),
    ("series", "series"),
    ("species", "species"),
];

/// Singular of a plural noun; other words pass through.
pub fn singularize(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some((_, s)) = IRREGULAR_NOUNS.iter().find(|(p, _)| *p == w) {
        return s.to_string();
    }
    if ["ss", "us", "is"].iter().any(|e| w.ends_with(e)) {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
        return format!("{stem}y");
    }
    for e in ["ches", "shes", "xes", "sses", "zes"] {
        if w.ends_with(e) {
            return w[..w.len() - 2].to_string();
        }
    }
    match w.strip_suffix('s') {
        Some(stem) if stem.len() >= 2 => stem.to_string(),
        _ => w,
    }
}

/// Normalizes "slicing the apples" to `(slice, apple)`.
///
/// Leading subjects and modals are dropped, the first remaining word is
/// the verb (with a following particle folded in), and the object is the
/// last word before the first preposition, skipping determiners. Pronoun
/// objects count as no object.
pub fn normalize_action(phrase: &str) -> Result<NormalizedAction, NormalizeError> {
    let words: Vec<String> = phrase
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|w| w.trim_matches(|c| c == '\'' || c == '-').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return Err(NormalizeError::Empty);
    }
    let mut rest = words
        .iter()
        .map(String::as_str)
        .skip_while(|w| LEADING.contains(w))
        .peekable();
    let Some(verb_word) = rest.next() else {
        return Err(NormalizeError::NoVerb(phrase.to_string()));
    };
    if DETERMINERS.contains(&verb_word) || PREPOSITIONS.contains(&verb_word) {
        return Err(NormalizeError::NoVerb(phrase.to_string()));
    }
    let mut verb = lemmatize_verb(verb_word);
    if let Some(p) = rest.peek().copied() {
        if PARTICLES.contains(&p) {
            verb = format!("{verb} {p}");
            rest.next();
        }
    }
    let mut object = None;
    for w in rest {
        if PREPOSITIONS.contains(&w) {
            break;
        }
        if DETERMINERS.contains(&w) {
            continue;
        }
        if PRONOUNS.contains(&w) {
            object = None;
            break;
        }
        object = Some(w);
    }
    Ok(NormalizedAction {
        verb,
        object: object.map(singularize),
    })
}
