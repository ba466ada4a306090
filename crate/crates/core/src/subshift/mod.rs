//! Forbidden-word bookkeeping: allowed words, prefix/suffix classes and the
//! reduced transition matrix.

mod allowed;
mod automaton;
mod forbidden;
mod markov;

pub use allowed::{allowed_words, allowed_words_with, pack, unpack, AllowedWords, MAX_N};
pub use automaton::Automaton;
pub use forbidden::{ForbiddenSet, SUBSHIFT_MAX_ALPHABET};
pub use markov::{
    compatible, equivalence_classes, reduced_markov, reduced_markov_from, ClassInfo,
    EquivalenceClasses, ReducedMarkov,
};
