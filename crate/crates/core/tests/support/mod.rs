pub mod oracles;
pub mod random;
