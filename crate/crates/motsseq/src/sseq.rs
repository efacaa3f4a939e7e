//! Placeholder.
pub struct PageEntry;
pub struct PiResult;
