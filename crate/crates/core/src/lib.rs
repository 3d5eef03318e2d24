pub mod harness;
pub mod heat;
pub mod io;
pub mod ipm;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod reduction;
