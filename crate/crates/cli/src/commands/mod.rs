pub mod besov;
pub mod check;
pub mod dispersion;
pub mod simulate;
pub mod stability;
