pub mod ca;
pub mod construction;
pub mod group;
pub mod io;
pub mod labels;
pub mod mealy;
mod minimal;
pub mod random;
pub mod tm;
