pub mod io;
pub mod ipm;
pub mod linalg;
pub mod lp;
pub mod master;
pub mod mcnf;
pub mod oracle;
pub mod pdcgm;
pub mod simplex;
pub mod tssp;
pub mod verify;
