//! Near-linear edit distance for strings passed through a random
//! insertion/deletion/substitution channel.
//!
//! [`pipeline::edit_distance_fast`] anchors `s1` against `s2` block by block
//! and runs a banded DP around the anchors. On channel outputs within the
//! admissible parameter regime it returns the exact distance with high
//! probability; on any input it returns the cost of a valid alignment.

pub mod alignment;
pub mod approx;
pub mod bitstring;
pub mod channel;
pub mod cli;
pub mod dp;
pub mod error;
pub mod params;
pub mod pipeline;
pub mod rng;
pub mod verify;

pub use alignment::{Alignment, Break, Step, Vertex};
pub use approx::{approx_align, AnchorFunction};
pub use bitstring::BitString;
pub use channel::{apply_channel, canonical_alignment, ChannelSample, EditTrace};
pub use dp::{edit_distance_banded, edit_distance_cost, edit_distance_full, Band, DpResult};
pub use error::{Error, Result};
pub use params::{ChannelParams, ParamBounds};
pub use pipeline::{edit_distance_fast, FastResult, Mode, PipelineConfig, PipelineReport};
