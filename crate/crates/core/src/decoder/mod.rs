//! Guided decoding: every base-model candidate is rescored with the two
//! guide models on the extended prefix before a token is chosen.

mod config;
mod rewrite;
mod step;
mod sweep;

pub use config::{DecodeConfig, DecodeMode, GuidanceSpace, Omega};
pub use rewrite::{fidelity, final_scores, prompt_tokens, rewrite, step_rng, RewriteResult, StepTrace, STOPWORDS};
pub use step::{combine_scores, decode_step, greedy_index, positive_guidance, Combined, Providers, ScoredCandidate};
pub use sweep::{parse_grid, sweep, sweep_cell, SweepReport, SweepRow, SWEEP_CSV_HEADER};
