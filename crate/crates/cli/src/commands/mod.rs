pub mod chl5;
pub mod frame;
pub mod framing;
pub mod ovm;
