//! CSV encodings of the per-day logs and file checksums.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::Archetype;
use crate::error::{Result, SimError};
use crate::exchange::{L2Snapshot, OrderAction, OrderEvent, Trade, L2_DEPTH};
use crate::kernel::hex;
use crate::types::{AgentId, Qty, Side, SimTime, Ticks};

pub const ORDERS_HEADER: [&str; 7] = ["time_ns", "agent_id", "archetype", "action", "side", "price_ticks", "qty"];
pub const TRADES_HEADER: [&str; 6] = ["time_ns", "price_ticks", "qty", "buy_agent", "sell_agent", "aggressor"];

pub fn l2_header() -> Vec<String> {
    let mut h = vec!["time_ns".to_string()];
    for (side, what) in [("bid", "price"), ("bid", "volume"), ("ask", "price"), ("ask", "volume")] {
        for i in 1..=L2_DEPTH {
            h.push(format!("{side}_{what}_{i}"));
        }
    }
    h.push("last_trade_ticks".into());
    h
}

/// A trade as it appears on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeRow {
    pub time_ns: u64,
    pub price_ticks: Ticks,
    pub qty: Qty,
    pub buy_agent: u32,
    pub sell_agent: u32,
    pub aggressor: Side,
}

impl From<&Trade> for TradeRow {
    fn from(t: &Trade) -> Self {
        Self {
            time_ns: t.time.0,
            price_ticks: t.price,
            qty: t.qty,
            buy_agent: t.buy_agent.0,
            sell_agent: t.sell_agent.0,
            aggressor: t.aggressor,
        }
    }
}

fn data_err(file: &str, row: usize, reason: impl ToString) -> SimError {
    SimError::Data {
        file: file.to_string(),
        row,
        reason: reason.to_string(),
    }
}

fn check_header(file: &str, got: &csv::StringRecord, want: &[String]) -> Result<()> {
    if got.iter().ne(want.iter().map(String::as_str)) {
        return Err(data_err(file, 0, format!("unexpected header {:?}", got.iter().collect::<Vec<_>>())));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, file: &str, row: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| data_err(file, row, format!("missing column {i}")))?;
    raw.parse()
        .map_err(|e: T::Err| data_err(file, row, format!("column {i} `{raw}`: {e}")))
}

fn opt_field(rec: &csv::StringRecord, i: usize, file: &str, row: usize) -> Result<Option<Ticks>> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(rec, i, file, row).map(Some),
    }
}

pub fn write_orders<W: Write>(out: W, rows: &[OrderEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ORDERS_HEADER)?;
    for r in rows {
        w.write_record([
            r.time.0.to_string(),
            r.agent.0.to_string(),
            r.archetype.name().to_string(),
            r.action.as_str().to_string(),
            r.side.as_str().to_string(),
            r.price.map(|p| p.to_string()).unwrap_or_default(),
            r.qty.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_orders<R: Read>(input: R, file: &str) -> Result<Vec<OrderEvent>> {
    let mut rd = csv::Reader::from_reader(input);
    let want: Vec<String> = ORDERS_HEADER.iter().map(|s| s.to_string()).collect();
    check_header(file, rd.headers()?, &want)?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| data_err(file, row, e))?;
        let archetype = Archetype::parse(&rec[2]).ok_or_else(|| data_err(file, row, format!("archetype `{}`", &rec[2])))?;
        let action = match &rec[3] {
            "LIMIT" => OrderAction::Limit,
            "MARKET" => OrderAction::Market,
            "CANCEL" => OrderAction::Cancel,
            other => return Err(data_err(file, row, format!("action `{other}`"))),
        };
        let side = Side::parse(&rec[4]).ok_or_else(|| data_err(file, row, format!("side `{}`", &rec[4])))?;
        out.push(OrderEvent {
            time: SimTime(field(&rec, 0, file, row)?),
            agent: AgentId(field(&rec, 1, file, row)?),
            archetype,
            action,
            side,
            price: opt_field(&rec, 5, file, row)?,
            qty: field(&rec, 6, file, row)?,
        });
    }
    Ok(out)
}

pub fn write_trades<W: Write>(out: W, rows: &[Trade]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADES_HEADER)?;
    for t in rows {
        w.write_record([
            t.time.0.to_string(),
            t.price.to_string(),
            t.qty.to_string(),
            t.buy_agent.0.to_string(),
            t.sell_agent.0.to_string(),
            t.aggressor.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trades<R: Read>(input: R, file: &str) -> Result<Vec<TradeRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let want: Vec<String> = TRADES_HEADER.iter().map(|s| s.to_string()).collect();
    check_header(file, rd.headers()?, &want)?;
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| data_err(file, i + 1, e)))
        .collect()
}

pub fn write_l2<W: Write>(out: W, rows: &[L2Snapshot]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(l2_header())?;
    for s in rows {
        let mut rec = Vec::with_capacity(4 * L2_DEPTH + 2);
        rec.push(s.time.0.to_string());
        rec.extend(s.bid_prices.iter().map(|x| x.to_string()));
        rec.extend(s.bid_volumes.iter().map(|x| x.to_string()));
        rec.extend(s.ask_prices.iter().map(|x| x.to_string()));
        rec.extend(s.ask_volumes.iter().map(|x| x.to_string()));
        rec.push(s.last_trade.map(|p| p.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_l2<R: Read>(input: R, file: &str) -> Result<Vec<L2Snapshot>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(file, rd.headers()?, &l2_header())?;
    let d = L2_DEPTH;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| data_err(file, row, e))?;
        let ints = |from: usize| -> Result<Vec<Ticks>> { (from..from + d).map(|k| field(&rec, k, file, row)).collect() };
        let uints = |from: usize| -> Result<Vec<Qty>> { (from..from + d).map(|k| field(&rec, k, file, row)).collect() };
        out.push(L2Snapshot {
            time: SimTime(field(&rec, 0, file, row)?),
            bid_prices: ints(1)?,
            bid_volumes: uints(1 + d)?,
            ask_prices: ints(1 + 2 * d)?,
            ask_volumes: uints(1 + 3 * d)?,
            last_trade: opt_field(&rec, 1 + 4 * d, file, row)?,
        });
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        SimError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn load_orders(path: &Path) -> Result<Vec<OrderEvent>> {
    read_orders(open(path)?, &path.display().to_string())
}

pub fn load_trades(path: &Path) -> Result<Vec<TradeRow>> {
    read_trades(open(path)?, &path.display().to_string())
}

pub fn load_l2(path: &Path) -> Result<Vec<L2Snapshot>> {
    read_l2(open(path)?, &path.display().to_string())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = open(path)?;
    let mut h = Sha256::new();
    std::io::copy(&mut f, &mut h)?;
    Ok(hex(&h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_round_trip() {
        let rows = vec![
            OrderEvent {
                time: SimTime(5),
                agent: AgentId(3),
                archetype: Archetype::Background,
                action: OrderAction::Market,
                side: Side::Buy,
                price: None,
                qty: 40,
            },
            OrderEvent {
                time: SimTime(9),
                agent: AgentId(4),
                archetype: Archetype::MarketMaker,
                action: OrderAction::Limit,
                side: Side::Sell,
                price: Some(1010),
                qty: 4,
            },
        ];
        let mut buf = Vec::new();
        write_orders(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_ns,agent_id,archetype,action,side,price_ticks,qty\n"));
        assert!(text.contains("5,3,BACKGROUND,MARKET,BUY,,40\n"));
        assert_eq!(read_orders(&buf[..], "o").unwrap(), rows);
    }

    #[test]
    fn l2_round_trip_and_header() {
        let h = l2_header();
        assert_eq!(h.len(), 22);
        assert_eq!(h[1], "bid_price_1");
        assert_eq!(h[6], "bid_volume_1");
        assert_eq!(h[21], "last_trade_ticks");
        let snap = L2Snapshot {
            time: SimTime(1),
            bid_prices: vec![1000, 999, 0, 0, 0],
            bid_volumes: vec![7, 3, 0, 0, 0],
            ask_prices: vec![1010, 0, 0, 0, 0],
            ask_volumes: vec![2, 0, 0, 0, 0],
            last_trade: None,
        };
        let mut buf = Vec::new();
        write_l2(&mut buf, &[snap.clone()]).unwrap();
        assert_eq!(read_l2(&buf[..], "l2").unwrap(), vec![snap]);
    }

    #[test]
    fn bad_rows_are_named() {
        let text = "time_ns,agent_id,archetype,action,side,price_ticks,qty\n1,2,BACKGROUND,LIMIT,UP,5,5\n";
        let err = read_orders(text.as_bytes(), "o.csv").unwrap_err();
        assert!(matches!(err, SimError::Data { row: 1, .. }), "{err}");
        let err = read_trades("a,b\n".as_bytes(), "t.csv").unwrap_err();
        assert!(matches!(err, SimError::Data { row: 0, .. }));
    }
}
