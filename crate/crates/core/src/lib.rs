pub mod block;
pub mod cross_cluster;
pub mod error;
pub mod group;
pub mod hash;
pub mod join;
pub mod key_update;
pub mod opcount;
pub mod poly;
pub mod registry;
pub mod wire;
pub mod overhead;
pub mod par;
