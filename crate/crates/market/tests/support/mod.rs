pub mod rematch;
