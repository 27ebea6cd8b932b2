//! Files: signal records, dataset containers, configs, models, key/value text.

pub mod config;
pub mod container;
pub mod kv;
pub mod model;
pub mod wvb;
