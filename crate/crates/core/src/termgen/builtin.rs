// SPDX-License-Identifier: Apache-2.0

//! Hand-written grammars for the standard SMT-LIB theories.

use super::grammar::load_grammar;
use super::GeneratorSet;

/// `(file name, text)` of every shipped grammar.
pub const BUILTIN_SOURCES: &[(&str, &str)] = &[
    ("Core.smtg", include_str!("../../grammars/Core.smtg")),
    ("Ints.smtg", include_str!("../../grammars/Ints.smtg")),
    ("Reals.smtg", include_str!("../../grammars/Reals.smtg")),
    ("Reals_Ints.smtg", include_str!("../../grammars/Reals_Ints.smtg")),
    ("Strings.smtg", include_str!("../../grammars/Strings.smtg")),
    (
        "FixedSizeBitVectors.smtg",
        include_str!("../../grammars/FixedSizeBitVectors.smtg"),
    ),
    ("Arrays.smtg", include_str!("../../grammars/Arrays.smtg")),
];

pub fn builtin_grammars() -> GeneratorSet {
    let grammars = BUILTIN_SOURCES
        .iter()
        .map(|(file, text)| load_grammar(text).unwrap_or_else(|e| panic!("builtin {file}: {e}")))
        .collect();
    GeneratorSet::new(grammars).expect("builtin theory names are unique")
}
