#![allow(clippy::needless_range_loop)]

pub mod angles;
pub mod cli;
pub mod construction;
pub mod enumeration;
pub mod estimation;
pub mod exact;
pub mod exec;
pub mod morphisms;
pub mod real;
pub mod report;
pub mod suites;
