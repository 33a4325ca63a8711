//! Rubric-guided headline rewriting.
//!
//! Neutral headlines are paired with synthetic clickbait variants built from
//! a ten-tactic rubric. Two prefix guide models are trained on the result: a
//! binary clickbait scorer and a ten-output engagement attribute model. At
//! decode time both guides rescore every candidate continuation proposed by
//! a base language model, pushing toward chosen tactics and away from
//! clickbait.
//!
//! ```
//! use clickwise::decoder::{positive_guidance, Omega};
//!
//! let mut scores = [0.0; 10];
//! scores[1] = 0.8;
//! let omega = Omega::from_names(&["emphasis_intensity"], &[]).unwrap();
//! assert_eq!(positive_guidance(&scores, &omega), 0.8);
//! ```

pub mod corpus;
pub mod decoder;
mod error;
pub mod guides;
mod http;
pub mod lm;
pub mod pipeline;
pub mod rubric;
pub mod synthgen;

pub use error::{Error, Result};
pub use http::RetryPolicy;
