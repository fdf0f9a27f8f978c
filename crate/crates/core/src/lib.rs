pub mod compare;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod rlt;
pub mod relax;
pub mod sdp;
