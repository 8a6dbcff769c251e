//! Small building blocks shared by the label propagation, balancing and FM
//! implementations.

pub(crate) mod heap;
pub(crate) mod order;
pub(crate) mod random;
pub(crate) mod rating;
