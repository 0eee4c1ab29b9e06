//! Single-threaded discrete-event kernel.
//!
//! Events are totally ordered by `(deliver_at, seq)`, where `seq` is a global
//! insertion counter. Every message sent through [`Ctx::send`] is delayed by
//! the sender's computation delay plus the pairwise network latency.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};
use crate::exchange::L2Snapshot;
use crate::types::{AgentId, OrderId, Qty, SimTime, Side, Ticks};

/// Great-circle distance between New York and Seattle.
pub const NY_SEATTLE_KM: f64 = 3866.0;
/// Signal propagation speed in optical fibre, two thirds of c.
pub const FIBRE_KM_PER_S: f64 = 2.0e5;
pub const DEFAULT_COMPUTATION_DELAY_NS: u64 = 50;

/// One-way propagation delay over `km` at `km_per_s`, in whole nanoseconds.
pub fn propagation_ns(km: f64, km_per_s: f64) -> u64 {
    (km / km_per_s * 1e9).round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLatency {
    pub a: u32,
    pub b: u32,
    pub ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyModel {
    /// Latency for any pair not listed in `pairwise`.
    pub default_latency_ns: u64,
    /// Symmetric overrides.
    pub pairwise: Vec<PairLatency>,
    pub computation_delay_ns: u64,
    /// Per-agent computation delay overrides.
    pub agent_delay_ns: BTreeMap<u32, u64>,
    /// Uniform extra latency in `[0, jitter_ns]`; zero disables jitter.
    pub jitter_ns: u64,
    pub jitter_seed: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            default_latency_ns: propagation_ns(NY_SEATTLE_KM, FIBRE_KM_PER_S),
            pairwise: Vec::new(),
            computation_delay_ns: DEFAULT_COMPUTATION_DELAY_NS,
            agent_delay_ns: BTreeMap::new(),
            jitter_ns: 0,
            jitter_seed: 0,
        }
    }
}

impl LatencyModel {
    pub fn zero() -> Self {
        Self {
            default_latency_ns: 0,
            computation_delay_ns: 0,
            ..Self::default()
        }
    }

    pub fn latency(&self, a: AgentId, b: AgentId) -> u64 {
        let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        self.pairwise
            .iter()
            .find(|p| (p.a.min(p.b), p.a.max(p.b)) == (lo, hi))
            .map_or(self.default_latency_ns, |p| p.ns)
    }

    pub fn computation_delay(&self, agent: AgentId) -> u64 {
        self.agent_delay_ns
            .get(&agent.0)
            .copied()
            .unwrap_or(self.computation_delay_ns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    InvalidQuantity,
    InvalidPrice,
    DuplicateOrderId,
    NoLiquidity,
    MarketClosed,
}

/// The message protocol between agents and the exchange.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Wakeup,
    LimitOrder {
        order_id: OrderId,
        side: Side,
        price: Ticks,
        qty: Qty,
    },
    MarketOrder {
        order_id: OrderId,
        side: Side,
        qty: Qty,
    },
    CancelOrder {
        order_id: OrderId,
    },
    L2Request {
        depth: usize,
    },
    L2Response(L2Snapshot),
    OrderAccepted {
        order_id: OrderId,
    },
    OrderExecuted {
        order_id: OrderId,
        price: Ticks,
        qty: Qty,
        remaining: Qty,
    },
    OrderCancelled {
        order_id: OrderId,
        qty: Qty,
    },
    CancelRejected {
        order_id: OrderId,
    },
    OrderRejected {
        order_id: OrderId,
        reason: RejectReason,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Wakeup => "WAKEUP",
            Message::LimitOrder { .. } => "LIMIT_ORDER",
            Message::MarketOrder { .. } => "MARKET_ORDER",
            Message::CancelOrder { .. } => "CANCEL_ORDER",
            Message::L2Request { .. } => "L2_REQUEST",
            Message::L2Response(_) => "L2_RESPONSE",
            Message::OrderAccepted { .. } => "ORDER_ACCEPTED",
            Message::OrderExecuted { .. } => "ORDER_EXECUTED",
            Message::OrderCancelled { .. } => "ORDER_CANCELLED",
            Message::CancelRejected { .. } => "CANCEL_REJECTED",
            Message::OrderRejected { .. } => "ORDER_REJECTED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub deliver_at: SimTime,
    pub seq: u64,
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: Message,
}

struct Queued(Event);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.0.deliver_at, self.0.seq) == (other.0.deliver_at, other.0.seq)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.deliver_at, self.0.seq).cmp(&(other.0.deliver_at, other.0.seq))
    }
}

pub trait Agent {
    fn on_start(&mut self, _ctx: &mut Ctx<'_>) -> Result<()> {
        Ok(())
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()>;

    fn on_message(&mut self, from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()>;
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    time_ns: u64,
    sender: u32,
    recipient: u32,
    kind: &'a str,
}

/// Kernel state reachable from agent callbacks.
pub struct KernelCore {
    now: SimTime,
    start: SimTime,
    end: SimTime,
    next_seq: u64,
    n_agents: u32,
    queue: BinaryHeap<Reverse<Queued>>,
    latency: LatencyModel,
    jitter_rng: ChaCha8Rng,
    trace: Option<Box<dyn Write + Send>>,
    digest: Sha256,
    dropped_wakeups: u64,
}

impl KernelCore {
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn window(&self) -> (SimTime, SimTime) {
        (self.start, self.end)
    }

    fn check_agent(&self, id: AgentId) -> Result<()> {
        if id.0 < self.n_agents {
            Ok(())
        } else {
            Err(SimError::UnknownAgent(id))
        }
    }

    pub fn schedule(
        &mut self,
        deliver_at: SimTime,
        sender: AgentId,
        recipient: AgentId,
        payload: Message,
    ) -> Result<u64> {
        if deliver_at < self.now {
            return Err(SimError::ScheduleInPast {
                at: deliver_at,
                now: self.now,
            });
        }
        self.check_agent(recipient)?;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Queued(Event {
            deliver_at,
            seq,
            sender,
            recipient,
            payload,
        })));
        Ok(seq)
    }

    /// Returns `false` (and schedules nothing) when `t` falls outside the
    /// simulation window.
    pub fn wakeup_at(&mut self, agent: AgentId, t: SimTime) -> Result<bool> {
        if t < self.start || t > self.end {
            self.dropped_wakeups += 1;
            log::trace!("agent {agent}: wakeup at {t} outside window, dropped");
            return Ok(false);
        }
        self.schedule(t, agent, agent, Message::Wakeup)?;
        Ok(true)
    }

    pub fn deliver(&mut self, sender: AgentId, recipient: AgentId, payload: Message) -> Result<SimTime> {
        self.check_agent(sender)?;
        self.check_agent(recipient)?;
        let mut delay = self.latency.computation_delay(sender) + self.latency.latency(sender, recipient);
        if self.latency.jitter_ns > 0 {
            delay += self.jitter_rng.gen_range(0..=self.latency.jitter_ns);
        }
        let at = self.now.plus(delay);
        self.schedule(at, sender, recipient, payload)?;
        Ok(at)
    }
}

/// Handle passed to an agent while it is being stepped.
pub struct Ctx<'k> {
    core: &'k mut KernelCore,
    me: AgentId,
}

impl Ctx<'_> {
    pub fn now(&self) -> SimTime {
        self.core.now
    }

    pub fn me(&self) -> AgentId {
        self.me
    }

    pub fn window(&self) -> (SimTime, SimTime) {
        self.core.window()
    }

    pub fn send(&mut self, to: AgentId, msg: Message) -> Result<SimTime> {
        self.core.deliver(self.me, to, msg)
    }

    pub fn wakeup_at(&mut self, t: SimTime) -> Result<bool> {
        self.core.wakeup_at(self.me, t)
    }
}

pub struct Kernel<A> {
    core: KernelCore,
    agents: Vec<A>,
    started: bool,
    processed: u64,
}

impl<A: Agent> Kernel<A> {
    pub fn new(latency: LatencyModel, start: SimTime, end: SimTime) -> Self {
        let jitter_rng = ChaCha8Rng::seed_from_u64(latency.jitter_seed);
        Self {
            core: KernelCore {
                now: start,
                start,
                end,
                next_seq: 0,
                n_agents: 0,
                queue: BinaryHeap::new(),
                latency,
                jitter_rng,
                trace: None,
                digest: Sha256::new(),
                dropped_wakeups: 0,
            },
            agents: Vec::new(),
            started: false,
            processed: 0,
        }
    }

    /// Writes one JSON line per processed event.
    pub fn with_trace(mut self, out: Box<dyn Write + Send>) -> Self {
        self.core.trace = Some(out);
        self
    }

    pub fn add_agent(&mut self, agent: A) -> AgentId {
        let id = AgentId(self.agents.len() as u32);
        self.agents.push(agent);
        self.core.n_agents += 1;
        id
    }

    pub fn now(&self) -> SimTime {
        self.core.now
    }

    pub fn core_mut(&mut self) -> &mut KernelCore {
        &mut self.core
    }

    pub fn agents(&self) -> &[A] {
        &self.agents
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut A> {
        self.agents.get_mut(id.index())
    }

    pub fn into_agents(self) -> Vec<A> {
        self.agents
    }

    pub fn pending(&self) -> usize {
        self.core.queue.len()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn dropped_wakeups(&self) -> u64 {
        self.core.dropped_wakeups
    }

    pub fn schedule(
        &mut self,
        deliver_at: SimTime,
        sender: AgentId,
        recipient: AgentId,
        payload: Message,
    ) -> Result<u64> {
        self.core.schedule(deliver_at, sender, recipient, payload)
    }

    pub fn wakeup_at(&mut self, agent: AgentId, t: SimTime) -> Result<bool> {
        self.core.wakeup_at(agent, t)
    }

    pub fn deliver(&mut self, sender: AgentId, recipient: AgentId, payload: Message) -> Result<SimTime> {
        self.core.deliver(sender, recipient, payload)
    }

    /// Calls `on_start` for every agent in registration order.
    pub fn start(&mut self) -> Result<()> {
        if self.started {
            return Ok(());
        }
        self.started = true;
        for i in 0..self.agents.len() {
            let mut ctx = Ctx {
                core: &mut self.core,
                me: AgentId(i as u32),
            };
            self.agents[i].on_start(&mut ctx)?;
        }
        Ok(())
    }

    /// Processes every event with `deliver_at <= until`; returns how many.
    pub fn run(&mut self, until: SimTime) -> Result<u64> {
        self.start()?;
        let mut count = 0;
        while let Some(Reverse(Queued(head))) = self.core.queue.peek() {
            if head.deliver_at > until {
                break;
            }
            let Reverse(Queued(ev)) = self.core.queue.pop().expect("peeked");
            self.core.now = ev.deliver_at;
            self.record(&ev)?;
            let mut ctx = Ctx {
                core: &mut self.core,
                me: ev.recipient,
            };
            let agent = &mut self.agents[ev.recipient.index()];
            match ev.payload {
                Message::Wakeup => agent.on_wakeup(&mut ctx)?,
                msg => agent.on_message(ev.sender, msg, &mut ctx)?,
            }
            count += 1;
        }
        self.processed += count;
        if let Some(t) = self.core.trace.as_mut() {
            t.flush()?;
        }
        Ok(count)
    }

    fn record(&mut self, ev: &Event) -> Result<()> {
        let rec = TraceRecord {
            time_ns: ev.deliver_at.0,
            sender: ev.sender.0,
            recipient: ev.recipient.0,
            kind: ev.payload.kind(),
        };
        let mut line = serde_json::to_vec(&rec)?;
        line.push(b'\n');
        self.core.digest.update(&line);
        if let Some(t) = self.core.trace.as_mut() {
            t.write_all(&line)?;
        }
        Ok(())
    }

    /// SHA-256 over every trace record processed so far, hex encoded.
    pub fn trace_digest(&self) -> String {
        hex(&self.core.digest.clone().finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::{Arc, Mutex};

    /// Records `(time, kind)` for every callback.
    #[derive(Default)]
    struct Recorder {
        log: Arc<Mutex<Vec<(u64, u32, &'static str)>>>,
        start_wakeups: Vec<SimTime>,
        echo_to: Option<AgentId>,
    }

    impl Agent for Recorder {
        fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
            for &t in &self.start_wakeups {
                ctx.wakeup_at(t)?;
            }
            Ok(())
        }

        fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
            self.log.lock().unwrap().push((ctx.now().0, ctx.me().0, "wake"));
            if let Some(to) = self.echo_to {
                ctx.send(to, Message::L2Request { depth: 1 })?;
            }
            Ok(())
        }

        fn on_message(&mut self, _from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
            self.log.lock().unwrap().push((ctx.now().0, ctx.me().0, msg.kind()));
            if let (Message::L2Request { .. }, Some(_)) = (&msg, self.echo_to) {
                return Ok(());
            }
            if let Message::L2Request { .. } = msg {
                ctx.send(_from, Message::OrderAccepted { order_id: OrderId(0) })?;
            }
            Ok(())
        }
    }

    fn kernel(latency: LatencyModel) -> Kernel<Recorder> {
        Kernel::new(latency, SimTime(0), SimTime(1_000))
    }

    #[test]
    fn dequeues_by_time_then_insertion() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut k = kernel(LatencyModel::zero());
        let a = k.add_agent(Recorder {
            log: log.clone(),
            ..Default::default()
        });
        k.schedule(SimTime(5), a, a, Message::CancelOrder { order_id: OrderId(5) })
            .unwrap();
        k.schedule(SimTime(3), a, a, Message::CancelOrder { order_id: OrderId(3) })
            .unwrap();
        k.schedule(SimTime(3), a, a, Message::CancelRejected { order_id: OrderId(4) })
            .unwrap();
        assert_eq!(k.run(SimTime(100)).unwrap(), 3);
        let kinds: Vec<_> = log.lock().unwrap().iter().map(|e| (e.0, e.2)).collect();
        assert_eq!(
            kinds,
            vec![(3, "CANCEL_ORDER"), (3, "CANCEL_REJECTED"), (5, "CANCEL_ORDER")]
        );
    }

    #[test]
    fn scheduling_in_the_past_is_an_error() {
        let mut k = kernel(LatencyModel::zero());
        let a = k.add_agent(Recorder::default());
        k.schedule(SimTime(2), a, a, Message::Wakeup).unwrap();
        k.run(SimTime(2)).unwrap();
        assert!(matches!(
            k.schedule(SimTime(1), a, a, Message::Wakeup),
            Err(SimError::ScheduleInPast { .. })
        ));
    }

    #[test]
    fn run_counts_only_events_up_to_until() {
        let mut k = kernel(LatencyModel::zero());
        assert_eq!(k.run(SimTime(10)).unwrap(), 0);
        let a = k.add_agent(Recorder::default());
        for t in [1, 2, 3, 50] {
            k.schedule(SimTime(t), a, a, Message::Wakeup).unwrap();
        }
        assert_eq!(k.run(SimTime(10)).unwrap(), 3);
        assert_eq!(k.pending(), 1);
    }

    #[test]
    fn wakeups_outside_window_are_dropped() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut k = kernel(LatencyModel::zero());
        k.add_agent(Recorder {
            log: log.clone(),
            start_wakeups: vec![SimTime(0), SimTime(5_000)],
            ..Default::default()
        });
        k.run(SimTime(10_000)).unwrap();
        assert_eq!(log.lock().unwrap().len(), 1);
        assert_eq!(log.lock().unwrap()[0].0, 0);
        assert_eq!(k.dropped_wakeups(), 1);
    }

    #[test]
    fn simultaneous_wakeups_follow_registration_order() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut k = kernel(LatencyModel::zero());
        for _ in 0..3 {
            k.add_agent(Recorder {
                log: log.clone(),
                start_wakeups: vec![SimTime(7)],
                ..Default::default()
            });
        }
        k.run(SimTime(10)).unwrap();
        let who: Vec<u32> = log.lock().unwrap().iter().map(|e| e.1).collect();
        assert_eq!(who, vec![0, 1, 2]);
    }

    #[test]
    fn delivery_adds_delay_and_latency() {
        let lat = LatencyModel::default();
        assert_eq!(lat.default_latency_ns, 19_330_000);
        let mut k: Kernel<Recorder> = Kernel::new(lat, SimTime(0), SimTime(u64::MAX));
        let a = k.add_agent(Recorder::default());
        let b = k.add_agent(Recorder::default());
        assert_eq!(k.deliver(a, b, Message::Wakeup).unwrap(), SimTime(19_330_050));
        assert!(matches!(
            k.deliver(a, AgentId(9), Message::Wakeup),
            Err(SimError::UnknownAgent(_))
        ));
        let mut z: Kernel<Recorder> = Kernel::new(LatencyModel::zero(), SimTime(0), SimTime(10));
        let a = z.add_agent(Recorder::default());
        assert_eq!(z.deliver(a, a, Message::Wakeup).unwrap(), SimTime(0));
    }

    #[test]
    fn round_trip_is_two_hops() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let lat = LatencyModel {
            default_latency_ns: 1_000,
            computation_delay_ns: 50,
            ..LatencyModel::default()
        };
        let mut k: Kernel<Recorder> = Kernel::new(lat, SimTime(0), SimTime(u64::MAX));
        let server = k.add_agent(Recorder {
            log: log.clone(),
            ..Default::default()
        });
        k.add_agent(Recorder {
            log: log.clone(),
            start_wakeups: vec![SimTime(0)],
            echo_to: Some(server),
        });
        k.run(SimTime(u64::MAX)).unwrap();
        let reply = log
            .lock()
            .unwrap()
            .iter()
            .find(|e| e.2 == "ORDER_ACCEPTED")
            .copied()
            .unwrap();
        assert_eq!(reply.0, 2 * 1_000 + 2 * 50);
    }

    #[test]
    fn pairwise_override_and_jitter_off_by_default() {
        let lat = LatencyModel {
            pairwise: vec![PairLatency { a: 3, b: 1, ns: 7 }],
            ..LatencyModel::default()
        };
        assert_eq!(lat.latency(AgentId(1), AgentId(3)), 7);
        assert_eq!(lat.latency(AgentId(1), AgentId(2)), lat.default_latency_ns);
        assert_eq!(lat.jitter_ns, 0);
    }
}
