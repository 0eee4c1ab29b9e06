use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::kernel::RejectReason;
use crate::types::{div_round_half_away, AgentId, OrderId, Qty, SimTime, Side, Ticks};

pub const L2_DEPTH: usize = 5;
/// Price written for a level that does not exist.
pub const PAD_PRICE: Ticks = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestingOrder {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub price: Ticks,
    pub qty: Qty,
    pub entry_qty: Qty,
    pub entry_time: SimTime,
    pub entry_seq: u64,
}

impl RestingOrder {
    /// Queue priority within a price level: earlier, then larger, then first in.
    fn key(&self) -> (SimTime, std::cmp::Reverse<Qty>, u64) {
        (self.entry_time, std::cmp::Reverse(self.entry_qty), self.entry_seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub time: SimTime,
    pub price: Ticks,
    pub qty: Qty,
    pub buy_agent: AgentId,
    pub sell_agent: AgentId,
    pub aggressor: Side,
    pub resting_order: OrderId,
    pub incoming_order: OrderId,
    /// Open quantity left on the resting order after this fill.
    pub resting_remaining: Qty,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Execution {
    pub trades: Vec<Trade>,
    /// Quantity left resting (limit) or dropped (market).
    pub remainder: Qty,
}

impl Execution {
    pub fn filled(&self) -> Qty {
        self.trades.iter().map(|t| t.qty).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Snapshot {
    pub time: SimTime,
    pub bid_prices: Vec<Ticks>,
    pub bid_volumes: Vec<Qty>,
    pub ask_prices: Vec<Ticks>,
    pub ask_volumes: Vec<Qty>,
    pub last_trade: Option<Ticks>,
}

impl L2Snapshot {
    pub fn best_bid(&self) -> Option<Ticks> {
        self.bid_volumes
            .first()
            .filter(|&&v| v > 0)
            .map(|_| self.bid_prices[0])
    }

    pub fn best_ask(&self) -> Option<Ticks> {
        self.ask_volumes
            .first()
            .filter(|&&v| v > 0)
            .map(|_| self.ask_prices[0])
    }

    /// `round(½(a + b))`, half away from zero.
    pub fn mid(&self) -> Option<Ticks> {
        Some(div_round_half_away(self.best_ask()? + self.best_bid()?, 2))
    }

    pub fn spread(&self) -> Option<Ticks> {
        Some(self.best_ask()? - self.best_bid()?)
    }

    /// Same levels and last trade, ignoring the timestamp.
    pub fn same_state(&self, other: &L2Snapshot) -> bool {
        self.bid_prices == other.bid_prices
            && self.bid_volumes == other.bid_volumes
            && self.ask_prices == other.ask_prices
            && self.ask_volumes == other.ask_volumes
            && self.last_trade == other.last_trade
    }
}

type Level = VecDeque<RestingOrder>;

#[derive(Debug, Clone, Default)]
pub struct OrderBook {
    bids: BTreeMap<Ticks, Level>,
    asks: BTreeMap<Ticks, Level>,
    index: HashMap<OrderId, (Side, Ticks)>,
    next_seq: u64,
    last_trade: Option<Ticks>,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<Ticks> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<Ticks> {
        self.asks.keys().next().copied()
    }

    pub fn last_trade(&self) -> Option<Ticks> {
        self.last_trade
    }

    pub fn open_orders(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn order(&self, id: OrderId) -> Option<&RestingOrder> {
        let (side, price) = self.index.get(&id)?;
        self.side(*side).get(price)?.iter().find(|o| o.id == id)
    }

    pub fn volume_at(&self, side: Side, price: Ticks) -> Qty {
        self.side(side)
            .get(&price)
            .map_or(0, |l| l.iter().map(|o| o.qty).sum())
    }

    fn side(&self, side: Side) -> &BTreeMap<Ticks, Level> {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut BTreeMap<Ticks, Level> {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }

    /// Best opposite price that an incoming order on `side` limited at
    /// `limit` may trade against.
    fn best_opposite(&self, side: Side, limit: Option<Ticks>) -> Option<Ticks> {
        match side {
            Side::Buy => self.best_ask().filter(|&a| limit.map_or(true, |l| a <= l)),
            Side::Sell => self.best_bid().filter(|&b| limit.map_or(true, |l| b >= l)),
        }
    }

    fn take(
        &mut self,
        time: SimTime,
        id: OrderId,
        agent: AgentId,
        side: Side,
        limit: Option<Ticks>,
        mut qty: Qty,
    ) -> (Vec<Trade>, Qty) {
        let mut trades = Vec::new();
        while qty > 0 {
            let Some(price) = self.best_opposite(side, limit) else {
                break;
            };
            let book = self.side_mut(side.opposite());
            let level = book.get_mut(&price).expect("level exists");
            let head = level.front_mut().expect("levels are never empty");
            let fill = qty.min(head.qty);
            head.qty -= fill;
            qty -= fill;
            let (buy_agent, sell_agent) = match side {
                Side::Buy => (agent, head.agent),
                Side::Sell => (head.agent, agent),
            };
            trades.push(Trade {
                time,
                price,
                qty: fill,
                buy_agent,
                sell_agent,
                aggressor: side,
                resting_order: head.id,
                incoming_order: id,
                resting_remaining: head.qty,
            });
            if head.qty == 0 {
                let done = level.pop_front().expect("head");
                if level.is_empty() {
                    book.remove(&price);
                }
                self.index.remove(&done.id);
            }
            self.last_trade = Some(price);
        }
        (trades, qty)
    }

    pub fn submit_limit(
        &mut self,
        time: SimTime,
        id: OrderId,
        agent: AgentId,
        side: Side,
        price: Ticks,
        qty: Qty,
    ) -> Result<Execution, RejectReason> {
        if qty == 0 {
            return Err(RejectReason::InvalidQuantity);
        }
        if price <= 0 {
            return Err(RejectReason::InvalidPrice);
        }
        if self.index.contains_key(&id) {
            return Err(RejectReason::DuplicateOrderId);
        }
        let (trades, remainder) = self.take(time, id, agent, side, Some(price), qty);
        if remainder > 0 {
            let order = RestingOrder {
                id,
                agent,
                side,
                price,
                qty: remainder,
                entry_qty: remainder,
                entry_time: time,
                entry_seq: self.next_seq,
            };
            self.next_seq += 1;
            self.index.insert(id, (side, price));
            let level = self.side_mut(side).entry(price).or_default();
            let key = order.key();
            let at = level.partition_point(|o| o.key() <= key);
            level.insert(at, order);
        }
        Ok(Execution { trades, remainder })
    }

    /// Walks the opposite side; whatever cannot be filled is dropped.
    pub fn submit_market(
        &mut self,
        time: SimTime,
        id: OrderId,
        agent: AgentId,
        side: Side,
        qty: Qty,
    ) -> Result<Execution, RejectReason> {
        if qty == 0 {
            return Err(RejectReason::InvalidQuantity);
        }
        if self.best_opposite(side, None).is_none() {
            return Err(RejectReason::NoLiquidity);
        }
        let (trades, remainder) = self.take(time, id, agent, side, None, qty);
        Ok(Execution { trades, remainder })
    }

    /// Removes an open order owned by `agent`; returns the cancelled quantity.
    pub fn cancel(&mut self, agent: AgentId, id: OrderId) -> Option<Qty> {
        let &(side, price) = self.index.get(&id)?;
        let book = self.side_mut(side);
        let level = book.get_mut(&price)?;
        let pos = level.iter().position(|o| o.id == id)?;
        if level[pos].agent != agent {
            return None;
        }
        let order = level.remove(pos).expect("position valid");
        if level.is_empty() {
            book.remove(&price);
        }
        self.index.remove(&id);
        Some(order.qty)
    }

    pub fn cancel_order(&mut self, agent: AgentId, id: OrderId) -> bool {
        self.cancel(agent, id).is_some()
    }

    pub fn snapshot_l2(&self, time: SimTime, depth: usize) -> L2Snapshot {
        fn fill<'a>(
            levels: impl Iterator<Item = (&'a Ticks, &'a Level)>,
            depth: usize,
        ) -> (Vec<Ticks>, Vec<Qty>) {
            let mut prices = vec![PAD_PRICE; depth];
            let mut volumes = vec![0; depth];
            for (i, (p, l)) in levels.take(depth).enumerate() {
                prices[i] = *p;
                volumes[i] = l.iter().map(|o| o.qty).sum();
            }
            (prices, volumes)
        }
        let (bid_prices, bid_volumes) = fill(self.bids.iter().rev(), depth);
        let (ask_prices, ask_volumes) = fill(self.asks.iter(), depth);
        L2Snapshot {
            time,
            bid_prices,
            bid_volumes,
            ask_prices,
            ask_volumes,
            last_trade: self.last_trade,
        }
    }

    /// Resting orders of one side in fill order.
    pub fn queue(&self, side: Side) -> Vec<&RestingOrder> {
        match side {
            Side::Buy => self.bids.values().rev().flatten().collect(),
            Side::Sell => self.asks.values().flatten().collect(),
        }
    }

    pub fn orders_of(&self, agent: AgentId) -> Vec<OrderId> {
        let mut ids: Vec<OrderId> = self
            .bids
            .values()
            .chain(self.asks.values())
            .flatten()
            .filter(|o| o.agent == agent)
            .map(|o| o.id)
            .collect();
        ids.sort();
        ids
    }
}
