//! Variational set tokenizer for spatial graphs: a cross-attention encoder
//! compresses a node cloud into `K×C` latent tokens and an attention decoder
//! predicts the dilated occupancy field at arbitrary query points.

mod config;
mod error;
mod io;
mod loss;
mod model;
mod params;
mod train;

pub use config::{parse_config_text, write_config_text, ModelConfig, TrainConfig};
pub use error::{Error, Result};
pub use io::{
    read_checkpoint, read_loss_csv, read_tokens, write_checkpoint, write_loss_csv, write_tokens,
    CHECKPOINT_MAGIC, TOKEN_MAGIC,
};
pub use loss::{bce, kl_divergence, total_loss, LossParts, PROB_CLAMP};
pub use model::{
    decode, decode_field, decode_on_tape, encode, encode_on_tape, fourier_encode, reparameterize,
    reparameterize_with, LatentTokens, LatentVars, ParamVars,
};
pub use params::Params;
pub use train::{
    compression_ratio, cosine_lr, train, train_with_progress, training_loss, EpochLoss, TrainOutcome,
};
