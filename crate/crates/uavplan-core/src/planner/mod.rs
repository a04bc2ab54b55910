mod baselines;
mod instance;
mod phase1;
mod phase2;

pub use baselines::*;
pub use instance::*;
pub use phase1::*;
pub use phase2::*;

#[cfg(test)]
pub(crate) mod fixtures;
#[cfg(test)]
mod tests;
