//! Problem instances and their line-oriented text format.
//!
//! ```text
//! UFL 1
//! dim <d>
//! facilities <nf>
//! <id> <open_cost> <c1> ... <cd>
//! clients <nc>
//! <id> <c1> ... <cd>
//! ```
//!
//! Lines starting with `#` are comments. Reals are written with the shortest
//! representation that parses back to the same value.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, UflError};
use crate::geometry::{distance_unchecked, Point};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Facility<T: Scalar = f64> {
    pub id: u64,
    pub location: Point<T>,
    pub open_cost: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Client<T: Scalar = f64> {
    pub id: u64,
    pub location: Point<T>,
}

/// A Euclidean UFL instance. Algorithms address facilities and clients by
/// their position in these vectors; ids only matter for I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T: Scalar = f64> {
    dim: usize,
    facilities: Vec<Facility<T>>,
    clients: Vec<Client<T>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(facilities: Vec<Facility<T>>, clients: Vec<Client<T>>) -> Result<Self> {
        if facilities.is_empty() {
            return Err(UflError::input("instance needs at least one facility"));
        }
        if clients.is_empty() {
            return Err(UflError::input("instance needs at least one client"));
        }
        let dim = facilities[0].location.dim();
        let mut seen = HashSet::new();
        for f in &facilities {
            if f.location.dim() != dim {
                return Err(UflError::DimensionMismatch { left: dim, right: f.location.dim() });
            }
            if !(f.open_cost >= T::zero()) || !f.open_cost.is_finite() {
                return Err(UflError::input(format!("facility {} has invalid open cost", f.id)));
            }
            if !seen.insert(f.id) {
                return Err(UflError::input(format!("duplicate facility id {}", f.id)));
            }
        }
        seen.clear();
        for c in &clients {
            if c.location.dim() != dim {
                return Err(UflError::DimensionMismatch { left: dim, right: c.location.dim() });
            }
            if !seen.insert(c.id) {
                return Err(UflError::input(format!("duplicate client id {}", c.id)));
            }
        }
        Ok(Instance { dim, facilities, clients })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facilities(&self) -> &[Facility<T>] {
        &self.facilities
    }

    pub fn clients(&self) -> &[Client<T>] {
        &self.clients
    }

    pub fn n_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn open_cost(&self, i: usize) -> T {
        self.facilities[i].open_cost
    }

    /// Distance between facility `i` and client `j` (both by index).
    pub fn dist(&self, i: usize, j: usize) -> T {
        distance_unchecked(self.facilities[i].location.coords(), self.clients[j].location.coords())
    }

    /// Distance between two clients, by index.
    pub fn client_dist(&self, a: usize, b: usize) -> T {
        distance_unchecked(self.clients[a].location.coords(), self.clients[b].location.coords())
    }

    pub fn to_f64(&self) -> Instance<f64> {
        Instance {
            dim: self.dim,
            facilities: self
                .facilities
                .iter()
                .map(|f| Facility { id: f.id, location: f.location.to_f64(), open_cost: f.open_cost.as_f64() })
                .collect(),
            clients: self
                .clients
                .iter()
                .map(|c| Client { id: c.id, location: c.location.to_f64() })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "UFL 1");
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "facilities {}", self.facilities.len());
        for f in &self.facilities {
            let _ = write!(out, "{} {}", f.id, f.open_cost);
            for c in f.location.coords() {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "clients {}", self.clients.len());
        for c in &self.clients {
            let _ = write!(out, "{}", c.id);
            for x in c.location.coords() {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut next = |what: &str| {
            lines.next().ok_or_else(|| UflError::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })
        };

        let (ln, header) = next("header")?;
        if header.split_whitespace().collect::<Vec<_>>() != ["UFL", "1"] {
            return Err(UflError::Parse { line: ln, msg: "expected `UFL 1`".into() });
        }
        let dim = keyed_count(next("dim")?, "dim")?;
        if dim == 0 {
            return Err(UflError::Parse { line: ln + 1, msg: "dim must be positive".into() });
        }
        let nf = keyed_count(next("facilities")?, "facilities")?;
        let mut facilities = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, line) = next("facility row")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 2 {
                return Err(UflError::Parse { line: ln, msg: format!("expected {} fields, found {}", dim + 2, fields.len()) });
            }
            let id = parse_field::<u64>(fields[0], ln)?;
            let open_cost = parse_field::<T>(fields[1], ln)?;
            let coords = fields[2..].iter().map(|s| parse_field::<T>(s, ln)).collect::<Result<Vec<_>>>()?;
            let location = Point::new(coords).map_err(|e| UflError::Parse { line: ln, msg: e.to_string() })?;
            facilities.push(Facility { id, location, open_cost });
        }
        let nc = keyed_count(next("clients")?, "clients")?;
        let mut clients = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, line) = next("client row")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(UflError::Parse { line: ln, msg: format!("expected {} fields, found {}", dim + 1, fields.len()) });
            }
            let id = parse_field::<u64>(fields[0], ln)?;
            let coords = fields[1..].iter().map(|s| parse_field::<T>(s, ln)).collect::<Result<Vec<_>>>()?;
            let location = Point::new(coords).map_err(|e| UflError::Parse { line: ln, msg: e.to_string() })?;
            clients.push(Client { id, location });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(UflError::Parse { line: ln, msg: "trailing content".into() });
        }
        Instance::new(facilities, clients)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn keyed_count((ln, line): (usize, &str), key: &str) -> Result<usize> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => parse_field(v, ln),
        _ => Err(UflError::Parse { line: ln, msg: format!("expected `{key} <n>`") }),
    }
}

fn parse_field<V: std::str::FromStr>(s: &str, line: usize) -> Result<V> {
    s.parse().map_err(|_| UflError::Parse { line, msg: format!("cannot parse `{s}`") })
}
