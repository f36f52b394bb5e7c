//! Phrase extraction from basic Universal Dependencies trees.

use crate::corpus::{ParsedSentence, Pos, Token};

/// An attribute phrase attached to a noun or a verb.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributePhrase {
    /// An adjective (or participle), optionally with adverb modifiers:
    /// "red", "very red", "fall".
    Adjectival {
        adverbs: Vec<String>,
        adjective: String,
    },
    /// A preposition with its complement noun: "at store", "with knife".
    Prepositional {
        preposition: String,
        complement: String,
    },
}

impl AttributePhrase {
    pub fn adjective(adjective: &str) -> Self {
        AttributePhrase::Adjectival {
            adverbs: Vec::new(),
            adjective: adjective.to_string(),
        }
    }

    pub fn prepositional(preposition: &str, complement: &str) -> Self {
        AttributePhrase::Prepositional {
            preposition: preposition.to_string(),
            complement: complement.to_string(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AttributePhrase::Adjectival { adverbs, adjective } => {
                let mut words = adverbs.clone();
                words.push(adjective.clone());
                words.join(" ")
            }
            AttributePhrase::Prepositional {
                preposition,
                complement,
            } => format!("{preposition} {complement}"),
        }
    }
}

/// The phrase structure around one verb, or around a verbless noun phrase.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extraction {
    /// Verb lemma, with any particle folded in ("pick up").
    pub verb: Option<String>,
    pub object_head: Option<String>,
    pub object_modifiers: Vec<AttributePhrase>,
    pub verb_modifiers: Vec<AttributePhrase>,
}

const NEGATIONS: [&str; 3] = ["not", "never", "n't"];

/// Extracts one [`Extraction`] per content verb.
///
/// Verbs acting as auxiliaries, copulas or noun modifiers are not content
/// verbs, nor is `be`; negated verbs are dropped. Only a direct object
/// (`obj`, or `dobj` from older schemes) makes the action object-bearing.
/// A sentence whose root is a noun (a bare noun phrase such as "apple on
/// the table") yields a single verbless extraction for that noun.
pub fn extract_phrases(s: &ParsedSentence) -> Vec<Extraction> {
    let mut out = Vec::new();
    for verb in s.tokens.iter().filter(|t| is_content_verb(t)) {
        if is_negated(s, verb) {
            continue;
        }
        let mut e = Extraction {
            verb: Some(verb_label(s, verb)),
            ..Extraction::default()
        };
        if let Some(obj) = s
            .children(verb.index)
            .find(|c| matches!(c.base_relation(), "obj" | "dobj") && c.pos == Pos::Noun)
        {
            e.object_head = Some(unit(&obj.lemma));
            e.object_modifiers = noun_modifiers(s, obj);
        }
        e.verb_modifiers = s
            .children(verb.index)
            .filter(|c| matches!(c.base_relation(), "obl" | "advmod"))
            .filter_map(|c| prepositional(s, c))
            .collect();
        out.push(e);
    }
    if out.is_empty() {
        if let Some(root) = s.root().filter(|r| r.pos == Pos::Noun) {
            out.push(Extraction {
                verb: None,
                object_head: Some(unit(&root.lemma)),
                object_modifiers: noun_modifiers(s, root),
                verb_modifiers: Vec::new(),
            });
        }
    }
    out
}

fn is_content_verb(t: &Token) -> bool {
    t.pos == Pos::Verb
        && t.lemma != "be"
        && !matches!(t.base_relation(), "aux" | "cop" | "amod" | "acl")
}

fn is_negated(s: &ParsedSentence, verb: &Token) -> bool {
    s.children(verb.index).any(|c| {
        c.base_relation() == "neg"
            || (c.base_relation() == "advmod" && NEGATIONS.contains(&c.lemma.as_str()))
    })
}

fn verb_label(s: &ParsedSentence, verb: &Token) -> String {
    let mut words = vec![unit(&verb.lemma)];
    words.extend(
        s.children(verb.index)
            .filter(|c| c.relation == "compound:prt")
            .map(|c| unit(&c.lemma)),
    );
    words.join(" ")
}

fn noun_modifiers(s: &ParsedSentence, noun: &Token) -> Vec<AttributePhrase> {
    s.children(noun.index)
        .filter_map(|c| match c.base_relation() {
            "amod" if matches!(c.pos, Pos::Adjective | Pos::Verb) => {
                Some(AttributePhrase::Adjectival {
                    adverbs: s
                        .children(c.index)
                        .filter(|a| a.base_relation() == "advmod" && a.pos == Pos::Adverb)
                        .filter(|a| !NEGATIONS.contains(&a.lemma.as_str()))
                        .map(|a| unit(&a.lemma))
                        .collect(),
                    adjective: unit(&c.lemma),
                })
            }
            "nmod" if c.relation != "nmod:poss" => prepositional(s, c),
            _ => None,
        })
        .collect()
}

/// `complement` with a `case` marker becomes "preposition complement";
/// multiword prepositions keep their `fixed` parts ("in front of").
fn prepositional(s: &ParsedSentence, complement: &Token) -> Option<AttributePhrase> {
    let case = s
        .children(complement.index)
        .find(|c| c.base_relation() == "case" && c.pos == Pos::Preposition)?;
    let mut prep = vec![unit(&case.lemma)];
    prep.extend(
        s.children(case.index)
            .filter(|c| c.base_relation() == "fixed")
            .map(|c| unit(&c.lemma)),
    );
    Some(AttributePhrase::Prepositional {
        preposition: prep.join(" "),
        complement: unit(&complement.lemma),
    })
}

/// A single lemma as a label unit; anything the graph format reserves, and
/// internal whitespace, becomes `_`.
fn unit(lemma: &str) -> String {
    lemma
        .chars()
        .map(|c| {
            if c.is_whitespace() || c == '|' {
                '_'
            } else {
                c
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_sentence, Token};

    /// Builds a sentence from `(surface, lemma, upos, head, rel)` rows.
    fn parse(rows: &[(&str, &str, &str, usize, &str)]) -> ParsedSentence {
        let s = ParsedSentence {
            id: "t".into(),
            stage: "external".into(),
            tokens: rows
                .iter()
                .enumerate()
                .map(|(i, &(surface, lemma, upos, head, rel))| Token {
                    index: i + 1,
                    surface: surface.into(),
                    lemma: lemma.into(),
                    pos: Pos::from_upos(upos),
                    head,
                    relation: rel.into(),
                })
                .collect(),
        };
        assert!(validate_sentence(&s).is_ok());
        s
    }

    #[test]
    fn slice_the_apple() {
        let s = parse(&[
            ("I", "I", "PRON", 2, "nsubj"),
            ("slice", "slice", "VERB", 0, "root"),
            ("the", "the", "DET", 4, "det"),
            ("apple", "apple", "NOUN", 2, "obj"),
        ]);
        assert_eq!(
            extract_phrases(&s),
            vec![Extraction {
                verb: Some("slice".into()),
                object_head: Some("apple".into()),
                ..Extraction::default()
            }]
        );
    }

    #[test]
    fn pick_the_red_apple_in_the_kitchen() {
        let s = parse(&[
            ("I", "I", "PRON", 2, "nsubj"),
            ("pick", "pick", "VERB", 0, "root"),
            ("the", "the", "DET", 5, "det"),
            ("red", "red", "ADJ", 5, "amod"),
            ("apple", "apple", "NOUN", 2, "obj"),
            ("in", "in", "ADP", 8, "case"),
            ("the", "the", "DET", 8, "det"),
            ("kitchen", "kitchen", "NOUN", 2, "obl"),
        ]);
        assert_eq!(
            extract_phrases(&s),
            vec![Extraction {
                verb: Some("pick".into()),
                object_head: Some("apple".into()),
                object_modifiers: vec![AttributePhrase::adjective("red")],
                verb_modifiers: vec![AttributePhrase::prepositional("in", "kitchen")],
            }]
        );
    }

    #[test]
    fn no_verb_and_no_noun_is_empty() {
        let s = parse(&[
            ("Hello", "hello", "INTJ", 0, "root"),
            ("!", "!", "PUNCT", 1, "punct"),
        ]);
        assert!(extract_phrases(&s).is_empty());
    }

    #[test]
    fn verbless_noun_phrase() {
        let s = parse(&[
            ("apple", "apple", "NOUN", 0, "root"),
            ("on", "on", "ADP", 4, "case"),
            ("the", "the", "DET", 4, "det"),
            ("table", "table", "NOUN", 1, "nmod"),
        ]);
        assert_eq!(
            extract_phrases(&s),
            vec![Extraction {
                verb: None,
                object_head: Some("apple".into()),
                object_modifiers: vec![AttributePhrase::prepositional("on", "table")],
                verb_modifiers: vec![],
            }]
        );
    }

    #[test]
    fn negated_and_auxiliary_verbs_are_skipped() {
        // I do not eat the apple
        let s = parse(&[
            ("I", "I", "PRON", 4, "nsubj"),
            ("do", "do", "AUX", 4, "aux"),
            ("not", "not", "PART", 4, "advmod"),
            ("eat", "eat", "VERB", 0, "root"),
            ("the", "the", "DET", 6, "det"),
            ("apple", "apple", "NOUN", 4, "obj"),
        ]);
        assert!(extract_phrases(&s).is_empty());

        // I have eaten the apple: `have` is an auxiliary tagged VERB here.
        let s = parse(&[
            ("I", "I", "PRON", 3, "nsubj"),
            ("have", "have", "VERB", 3, "aux"),
            ("eaten", "eat", "VERB", 0, "root"),
            ("the", "the", "DET", 5, "det"),
            ("apple", "apple", "NOUN", 3, "obj"),
        ]);
        let e = extract_phrases(&s);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].verb.as_deref(), Some("eat"));
    }

    #[test]
    fn particles_adverbs_and_participles() {
        // I pick up the very ripe fallen apple
        let s = parse(&[
            ("I", "I", "PRON", 2, "nsubj"),
            ("pick", "pick", "VERB", 0, "root"),
            ("up", "up", "ADP", 2, "compound:prt"),
            ("the", "the", "DET", 8, "det"),
            ("very", "very", "ADV", 6, "advmod"),
            ("ripe", "ripe", "ADJ", 8, "amod"),
            ("fallen", "fall", "VERB", 8, "amod"),
            ("apple", "apple", "NOUN", 2, "obj"),
        ]);
        let e = extract_phrases(&s);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].verb.as_deref(), Some("pick up"));
        assert_eq!(
            e[0].object_modifiers,
            vec![
                AttributePhrase::Adjectival {
                    adverbs: vec!["very".into()],
                    adjective: "ripe".into()
                },
                AttributePhrase::adjective("fall"),
            ]
        );
        assert_eq!(e[0].object_modifiers[0].label(), "very ripe");
    }

    #[test]
    fn possessives_and_pronoun_objects_are_ignored() {
        // I share it with my friend
        let s = parse(&[
            ("I", "I", "PRON", 2, "nsubj"),
            ("share", "share", "VERB", 0, "root"),
            ("it", "it", "PRON", 2, "obj"),
            ("with", "with", "ADP", 6, "case"),
            ("my", "my", "PRON", 6, "nmod:poss"),
            ("friend", "friend", "NOUN", 2, "obl"),
        ]);
        assert_eq!(
            extract_phrases(&s),
            vec![Extraction {
                verb: Some("share".into()),
                object_head: None,
                object_modifiers: vec![],
                verb_modifiers: vec![AttributePhrase::prepositional("with", "friend")],
            }]
        );
    }

    #[test]
    fn multiword_preposition() {
        // I sit in front of the tree
        let s = parse(&[
            ("I", "I", "PRON", 2, "nsubj"),
            ("sit", "sit", "VERB", 0, "root"),
            ("in", "in", "ADP", 7, "case"),
            ("front", "front", "NOUN", 3, "fixed"),
            ("of", "of", "ADP", 3, "fixed"),
            ("the", "the", "DET", 7, "det"),
            ("tree", "tree", "NOUN", 2, "obl"),
        ]);
        assert_eq!(
            extract_phrases(&s)[0].verb_modifiers,
            vec![AttributePhrase::prepositional("in front of", "tree")]
        );
    }
}
