//! Limit order book and the exchange agent that owns it.

mod agent;
mod book;

pub use agent::{ExchangeAgent, OpeningBook, OrderAction, OrderEvent};
pub use book::{Execution, L2Snapshot, OrderBook, RestingOrder, Trade, L2_DEPTH, PAD_PRICE};
