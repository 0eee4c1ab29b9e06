use serde::{Deserialize, Serialize};

use super::book::{Execution, L2Snapshot, OrderBook, Trade, L2_DEPTH};
use crate::agents::Archetype;
use crate::error::Result;
use crate::kernel::{Agent, Ctx, Message, RejectReason};
use crate::types::{AgentId, OrderId, Qty, Side, SimTime, Ticks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OrderAction {
    Limit,
    Market,
    Cancel,
}

impl OrderAction {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderAction::Limit => "LIMIT",
            OrderAction::Market => "MARKET",
            OrderAction::Cancel => "CANCEL",
        }
    }
}

/// One row of the order-event log, stamped with exchange receipt time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderEvent {
    pub time: SimTime,
    pub agent: AgentId,
    pub archetype: Archetype,
    pub action: OrderAction,
    pub side: Side,
    pub price: Option<Ticks>,
    pub qty: Qty,
}

/// Resting liquidity placed by the exchange itself at the open, so the first
/// arrivals see a two-sided book. It is not part of the order log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpeningBook {
    pub levels: u32,
    pub qty: Qty,
    /// Distance from the reference price to the first level on each side.
    pub half_spread: Ticks,
    pub level_step: Ticks,
}

impl Default for OpeningBook {
    fn default() -> Self {
        Self {
            levels: 10,
            qty: 500,
            half_spread: 1,
            level_step: 1,
        }
    }
}

pub struct ExchangeAgent {
    id: AgentId,
    book: OrderBook,
    labels: Vec<Option<Archetype>>,
    opening: OpeningBook,
    reference_price: Ticks,
    orders: Vec<OrderEvent>,
    trades: Vec<Trade>,
    l2: Vec<L2Snapshot>,
    seeded: u32,
}

impl ExchangeAgent {
    /// `labels[i]` is the archetype of agent `i`; agents without one are not
    /// logged.
    pub fn new(id: AgentId, labels: Vec<Option<Archetype>>, opening: OpeningBook, reference_price: Ticks) -> Self {
        Self {
            id,
            book: OrderBook::new(),
            labels,
            opening,
            reference_price,
            orders: Vec::new(),
            trades: Vec::new(),
            l2: Vec::new(),
            seeded: 0,
        }
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn orders(&self) -> &[OrderEvent] {
        &self.orders
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn l2(&self) -> &[L2Snapshot] {
        &self.l2
    }

    pub fn into_logs(self) -> (Vec<OrderEvent>, Vec<Trade>, Vec<L2Snapshot>) {
        (self.orders, self.trades, self.l2)
    }

    fn seed_book(&mut self, t: SimTime) {
        let o = &self.opening;
        for k in 0..o.levels as Ticks {
            let off = o.half_spread + k * o.level_step;
            for (side, price) in [(Side::Buy, self.reference_price - off), (Side::Sell, self.reference_price + off)] {
                if price <= 0 || o.qty == 0 {
                    continue;
                }
                let id = OrderId::compose(self.id, self.seeded);
                self.seeded += 1;
                self.book
                    .submit_limit(t, id, self.id, side, price, o.qty)
                    .expect("opening book never crosses");
            }
        }
    }

    fn log(&mut self, ev: OrderEvent) {
        self.orders.push(ev);
    }

    fn label(&self, agent: AgentId) -> Option<Archetype> {
        self.labels.get(agent.index()).copied().flatten()
    }

    fn record_l2(&mut self, t: SimTime) {
        let snap = self.book.snapshot_l2(t, L2_DEPTH);
        if self.l2.last().map_or(true, |prev| !prev.same_state(&snap)) {
            self.l2.push(snap);
        }
    }

    fn notify(&self, ctx: &mut Ctx<'_>, agent: AgentId, msg: Message) -> Result<()> {
        if agent != self.id {
            ctx.send(agent, msg)?;
        }
        Ok(())
    }

    fn report(&mut self, ctx: &mut Ctx<'_>, from: AgentId, order_id: OrderId, qty: Qty, ex: Execution) -> Result<()> {
        let mut left = qty;
        for tr in &ex.trades {
            left -= tr.qty;
            let resting_owner = if tr.aggressor == Side::Buy { tr.sell_agent } else { tr.buy_agent };
            self.notify(
                ctx,
                resting_owner,
                Message::OrderExecuted {
                    order_id: tr.resting_order,
                    price: tr.price,
                    qty: tr.qty,
                    remaining: tr.resting_remaining,
                },
            )?;
            self.notify(
                ctx,
                from,
                Message::OrderExecuted {
                    order_id,
                    price: tr.price,
                    qty: tr.qty,
                    remaining: left,
                },
            )?;
        }
        self.trades.extend(ex.trades);
        Ok(())
    }
}

impl Agent for ExchangeAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        self.seed_book(ctx.now());
        self.record_l2(ctx.now());
        Ok(())
    }

    fn on_wakeup(&mut self, _ctx: &mut Ctx<'_>) -> Result<()> {
        Ok(())
    }

    fn on_message(&mut self, from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
        let now = ctx.now();
        let (open, close) = ctx.window();
        let closed = now < open || now > close;
        let archetype = self.label(from);
        match msg {
            Message::LimitOrder {
                order_id,
                side,
                price,
                qty,
            } => {
                if let Some(a) = archetype {
                    self.log(OrderEvent {
                        time: now,
                        agent: from,
                        archetype: a,
                        action: OrderAction::Limit,
                        side,
                        price: Some(price),
                        qty,
                    });
                }
                let res = if closed {
                    Err(RejectReason::MarketClosed)
                } else {
                    self.book.submit_limit(now, order_id, from, side, price, qty)
                };
                match res {
                    Ok(ex) => {
                        if ex.remainder > 0 {
                            self.notify(ctx, from, Message::OrderAccepted { order_id })?;
                        }
                        self.report(ctx, from, order_id, qty, ex)?;
                    }
                    Err(reason) => self.notify(ctx, from, Message::OrderRejected { order_id, reason })?,
                }
            }
            Message::MarketOrder { order_id, side, qty } => {
                if let Some(a) = archetype {
                    self.log(OrderEvent {
                        time: now,
                        agent: from,
                        archetype: a,
                        action: OrderAction::Market,
                        side,
                        price: None,
                        qty,
                    });
                }
                let res = if closed {
                    Err(RejectReason::MarketClosed)
                } else {
                    self.book.submit_market(now, order_id, from, side, qty)
                };
                match res {
                    Ok(ex) => self.report(ctx, from, order_id, qty, ex)?,
                    Err(reason) => self.notify(ctx, from, Message::OrderRejected { order_id, reason })?,
                }
            }
            Message::CancelOrder { order_id } => {
                let resting = self.book.order(order_id).map(|o| (o.side, o.price));
                match (self.book.cancel(from, order_id), resting) {
                    (Some(qty), Some((side, price))) => {
                        if let Some(a) = archetype {
                            self.log(OrderEvent {
                                time: now,
                                agent: from,
                                archetype: a,
                                action: OrderAction::Cancel,
                                side,
                                price: Some(price),
                                qty,
                            });
                        }
                        self.notify(ctx, from, Message::OrderCancelled { order_id, qty })?;
                    }
                    _ => self.notify(ctx, from, Message::CancelRejected { order_id })?,
                }
            }
            Message::L2Request { depth } => {
                let snap = self.book.snapshot_l2(now, depth.max(1));
                self.notify(ctx, from, Message::L2Response(snap))?;
            }
            _ => {}
        }
        self.record_l2(now);
        Ok(())
    }
}
