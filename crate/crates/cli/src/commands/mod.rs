pub mod cavity;
pub mod g0;
pub mod profile;
pub mod spectrum;
pub mod transduce;
