//! Command-line front end and HTTP answer service.

pub mod server;
