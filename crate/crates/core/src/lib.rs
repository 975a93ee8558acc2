pub mod grid;
pub mod perm;
pub mod poly;
pub mod enumeration;
pub mod ktheory;
pub mod removal;
pub mod specialization;
pub mod verify;
