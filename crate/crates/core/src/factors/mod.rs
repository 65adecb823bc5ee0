//! (F,t)-factors and patterned factors in graph collections.

mod pipeline;
mod search;
mod spec;
mod units;

pub use pipeline::{colour_covering_factor, common_colour_f_copy, ft_factor, ft_factor_surplus, patterned_factor, t_copy_with_colour};
pub use search::patterned_copies;
pub use spec::{builtin_spec, check_patterns, patterns_to_text, read_patterns, FCopy, FactorSpec, FtFactor};
