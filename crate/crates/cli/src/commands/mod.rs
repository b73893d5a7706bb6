pub mod experiment;
pub mod fitcmd;
pub mod parsecmd;
pub mod simulate;
