//! Paired-comparison data and model definitions.
//!
//! In every contest the player in the `player1` column plays the role of `i`
//! and the player in the `player0` column plays the role of `j`:
//!
//! ```text
//! P[i beats j] = exp(l_i) / (exp(l_i) + exp(l_j + z * gamma))
//! ```
//!
//! where `z` is the per-contest order indicator. The Davidson variant adds a
//! tie outcome with weight `exp(nu + (l_i + l_j') / 2)`.

mod compile;
mod data;
mod density;
mod layout;
mod probability;
mod spec;

pub use compile::{build_model, CompiledModel, ModelInfo, Standardization};
pub use data::{Contest, ContestDataset, ContestRecord, Outcome, PlayerCovariates};
pub use density::{compose_ability, LogDensity};
pub use layout::{Block, BlockKind, ParameterLayout};
pub use probability::{
    bt_probabilities, bt_win_probability, davidson_log_probabilities, davidson_probabilities, log1p_exp, log_sum_exp,
};
pub use spec::{BaseModel, Extension, ModelSpec, Priors};
