mod analyze;
mod construct;
mod render;
mod verify;

pub use analyze::{analyze, analyze_report};
pub use construct::construct;
pub use render::render;
pub use verify::{verify_baker, verify_report};
