//! Graphical spacelike mean curvature flow in pseudo-Euclidean space R^{n,m}.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod solutions;
pub mod flow;
pub mod renorm;
pub mod verify;
pub mod g2;
pub mod oracle;
pub mod io;
