//! Hand-constructed sentence pairs shared by oracle tests.
#![allow(dead_code)]

/// (hyp, ref, meteor matches, meteor chunks), pre-tokenised, <= 8 tokens.
/// Alignment sizes and chunk counts were counted by hand under greedy
/// left-to-right exact matching.
pub const METRIC_PAIRS: [(&str, &str, usize, usize); 20] = [
    ("the cat sat on the mat", "the cat sat on the mat", 6, 1),
    ("the the the the the", "the cat sat on the mat", 2, 2),
    ("a b c d", "a b c d e", 4, 1),
    ("b a c d", "a b c d", 4, 3),
    ("the cat", "the cat sat", 2, 1),
    ("x y z", "a b c", 0, 0),
    ("he went to the market .", "he walked to the market .", 5, 2),
    ("to the market he went", "he went to the market", 5, 2),
    ("nwng tamo ?", "nwng bo tamo ?", 3, 2),
    ("a b a b a b", "a b a b", 4, 1),
    ("one two three four five six seven eight", "eight seven six five four three two one", 8, 8),
    ("the quick brown fox", "a quick brown dog", 2, 1),
    ("it is raining today", "today it is raining", 4, 2),
    ("hello", "hello", 1, 1),
    ("i like green tea very much", "i really like green tea", 4, 2),
    ("c d a b", "a b c d", 4, 2),
    ("we eat rice", "we eat rice daily", 3, 1),
    ("kok borok is a language", "kokborok is a language", 3, 1),
    ("the dog bit the man", "the man bit the dog", 5, 4),
    ("yes", "no", 0, 0),
];

/// (hyp, ref) with at most 5 tokens per side, for exhaustive TER search.
pub const TER_PAIRS: [(&str, &str); 20] = [
    ("b a c d", "a b c d"),
    ("", "a b c d"),
    ("a b c d", "a b c d"),
    ("a b c d", "c d a b"),
    ("the cat", "the cat sat"),
    ("x y z", "a b c"),
    ("it is raining today", "today it is raining"),
    ("c d a b", "a b c d"),
    ("we eat rice", "we eat rice daily"),
    ("nwng tamo ?", "nwng bo tamo ?"),
    ("the dog bit the man", "the man bit the dog"),
    ("a b a b", "b a b a"),
    ("one two three", "three two one"),
    ("a a b b", "b b a a"),
    ("to market he went", "he went to market"),
    ("yes", "no"),
    ("hello world", "world hello"),
    ("a b c d e", "d e a b c"),
    ("i go home now", "now i go home"),
    ("a x b y", "a b x y"),
];
