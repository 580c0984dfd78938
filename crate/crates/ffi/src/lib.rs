pub use ohara;
