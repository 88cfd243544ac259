#![allow(dead_code)]

pub mod shaping_oracle;
pub mod strand_families;
