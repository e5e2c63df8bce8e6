pub mod benchmark;
pub mod gen_data;
pub mod hyperopt;
pub mod mc_validate;
pub mod stats;
pub mod train;
pub mod transfer;
