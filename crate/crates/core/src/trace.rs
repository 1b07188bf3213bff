//! Timestamped run records, written as CSV.
//!
//! Columns, in order: `step`, `time_s`, `active_mode`, one column per state
//! coordinate, `w_<label>` per vertex in vertex-set order, then `event`. The event
//! cell holds `|`-separated tokens such as `TransferOK` or `Wait:2` (car number
//! after the colon in multi-car runs); it is `None` when nothing happened.

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    TransferOK,
    TransferNotOK,
    Wait,
    Resume,
    ShieldBreach,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// 1-based car number, for multi-car runs.
    pub car: Option<usize>,
}

impl Event {
    pub fn new(kind: EventKind) -> Self {
        Self { kind, car: None }
    }

    pub fn for_car(kind: EventKind, car: usize) -> Self {
        Self { kind, car: Some(car) }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(c) = self.car {
            write!(f, ":{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub time_s: f64,
    pub active_mode: String,
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
    pub events: Vec<Event>,
}

impl TraceRow {
    pub fn has(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    pub fn event_cell(&self) -> String {
        if self.events.is_empty() {
            return "None".to_owned();
        }
        self.events.iter().map(Event::to_string).collect::<Vec<_>>().join("|")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    coords: Vec<String>,
    vertices: Vec<String>,
    rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(coords: Vec<String>, vertices: Vec<String>) -> Self {
        Self { coords, vertices, rows: Vec::new() }
    }

    pub fn push(&mut self, row: TraceRow) {
        debug_assert_eq!(row.coords.len(), self.coords.len());
        debug_assert_eq!(row.weights.len(), self.vertices.len());
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn coord(&self, row: &TraceRow, name: &str) -> Option<f64> {
        self.coords.iter().position(|c| c == name).map(|i| row.coords[i])
    }

    pub fn weight(&self, row: &TraceRow, label: &str) -> Option<f64> {
        self.vertices.iter().position(|c| c == label).map(|i| row.weights[i])
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["step".to_owned(), "time_s".to_owned(), "active_mode".to_owned()];
        h.extend(self.coords.iter().cloned());
        h.extend(self.vertices.iter().map(|v| format!("w_{v}")));
        h.push("event".to_owned());
        h
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![r.step.to_string(), r.time_s.to_string(), r.active_mode.clone()];
            rec.extend(r.coords.iter().map(f64::to_string));
            rec.extend(r.weights.iter().map(f64::to_string));
            rec.push(r.event_cell());
            w.write_record(&rec)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
