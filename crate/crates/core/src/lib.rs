pub mod term;
pub mod kb;
pub mod sitlog;
pub mod world;
pub mod scalar;
pub mod inference;
pub mod record;
pub mod session;
pub mod prefs;
pub mod cli;
