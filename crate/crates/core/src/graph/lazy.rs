//! Lazily expanded graphs addressed by construction coordinates.
//!
//! A [`Construction`] knows how to list the neighbors of a coordinate. The
//! [`LazyGraph`] wrapper hashes coordinates into [`VertexId`]s and keeps an
//! intern table so ids can be mapped back. Expansion is a pure function of the
//! construction (and its seed), so two instances agree on every id.

use std::fmt::Debug;
use std::hash::Hash;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::hash::{seeded_hash, StableMap};

use super::{NeighborOracle, OrbitLabel, OrbitQuotient, VertexId};

pub trait Construction: Send + Sync + 'static {
    type Coord: Clone + Eq + Hash + Debug + Send + Sync;

    fn kind(&self) -> &str;

    /// Salt mixed into vertex ids (the sample seed for random constructions).
    fn id_salt(&self) -> u64 {
        0
    }

    fn origin(&self) -> Self::Coord;

    fn neighbors(&self, v: &Self::Coord) -> Result<Vec<(Self::Coord, u32)>>;

    fn distance(&self, _u: &Self::Coord, _v: &Self::Coord) -> Option<Result<u64>> {
        None
    }

    fn ball_volume(&self, _v: &Self::Coord, _r: u32) -> Option<Result<u128>> {
        None
    }

    fn label(&self, _v: &Self::Coord) -> Option<i64> {
        None
    }

    /// Orbit of `v` under automorphisms fixing [`Self::origin`], if known.
    fn orbit_of(&self, _v: &Self::Coord) -> Option<OrbitLabel> {
        None
    }

    fn orbit_representative(&self, _label: OrbitLabel) -> Option<Self::Coord> {
        None
    }

    fn orbit_size(&self, _label: OrbitLabel) -> f64 {
        f64::NAN
    }
}

pub struct LazyGraph<C: Construction> {
    construction: C,
    origin: VertexId,
    interned: RwLock<StableMap<VertexId, C::Coord>>,
    has_quotient: bool,
}

impl<C: Construction> LazyGraph<C> {
    pub fn new(construction: C) -> Self {
        let origin_coord = construction.origin();
        let origin = VertexId(seeded_hash(construction.id_salt(), &origin_coord));
        let has_quotient = construction.orbit_of(&origin_coord).is_some();
        let mut map = StableMap::default();
        map.insert(origin, origin_coord);
        LazyGraph { construction, origin, interned: RwLock::new(map), has_quotient }
    }

    pub fn construction(&self) -> &C {
        &self.construction
    }

    pub fn id_of(&self, coord: &C::Coord) -> Result<VertexId> {
        let id = VertexId(seeded_hash(self.construction.id_salt(), coord));
        {
            let map = self.interned.read().unwrap();
            if let Some(existing) = map.get(&id) {
                return check_same(existing, coord, id);
            }
        }
        let mut map = self.interned.write().unwrap();
        match map.get(&id) {
            Some(existing) => check_same(existing, coord, id),
            None => {
                map.insert(id, coord.clone());
                Ok(id)
            }
        }
    }

    pub fn coord_of(&self, v: VertexId) -> Result<C::Coord> {
        self.interned.read().unwrap().get(&v).cloned().ok_or(Error::UnknownVertex(v))
    }

    /// Number of coordinates interned so far.
    pub fn interned_len(&self) -> usize {
        self.interned.read().unwrap().len()
    }
}

fn check_same<T: PartialEq + Debug>(existing: &T, coord: &T, id: VertexId) -> Result<VertexId> {
    if existing == coord {
        Ok(id)
    } else {
        Err(Error::IdCollision(format!("{existing:?} vs {coord:?}")))
    }
}

impl<C: Construction> NeighborOracle for LazyGraph<C> {
    fn kind(&self) -> &str {
        self.construction.kind()
    }

    fn origin(&self) -> VertexId {
        self.origin
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>> {
        let coord = self.coord_of(v)?;
        let raw = self.construction.neighbors(&coord)?;
        let salt = self.construction.id_salt();
        let mut out = Vec::with_capacity(raw.len());
        {
            let mut map = self.interned.write().unwrap();
            for (c, m) in raw {
                let id = VertexId(seeded_hash(salt, &c));
                match map.get(&id) {
                    Some(existing) => {
                        check_same(existing, &c, id)?;
                    }
                    None => {
                        map.insert(id, c);
                    }
                }
                out.push((id, m));
            }
        }
        out.sort_unstable_by_key(|&(id, _)| id);
        out.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        Ok(out)
    }

    fn random_neighbor(&self, v: VertexId, ticket: u64) -> Result<VertexId> {
        let coord = self.coord_of(v)?;
        let raw = self.construction.neighbors(&coord)?;
        let deg: u64 = raw.iter().map(|&(_, m)| m as u64).sum();
        let mut k = ((ticket as u128 * deg as u128) >> 64) as u64;
        for (c, m) in raw {
            if k < m as u64 {
                // Only the chosen endpoint is interned.
                return self.id_of(&c);
            }
            k -= m as u64;
        }
        Err(Error::InvalidGraph(format!("{v:?} has no edges")))
    }

    fn distance(&self, u: VertexId, v: VertexId) -> Option<Result<u64>> {
        let (cu, cv) = match (self.coord_of(u), self.coord_of(v)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
        };
        self.construction.distance(&cu, &cv)
    }

    fn ball_volume(&self, v: VertexId, r: u32) -> Option<Result<u128>> {
        match self.coord_of(v) {
            Ok(c) => self.construction.ball_volume(&c, r),
            Err(e) => Some(Err(e)),
        }
    }

    fn quotient(&self) -> Option<&dyn OrbitQuotient> {
        if self.has_quotient {
            Some(self)
        } else {
            None
        }
    }

    fn label(&self, v: VertexId) -> Option<i64> {
        self.coord_of(v).ok().and_then(|c| self.construction.label(&c))
    }

    fn describe(&self, v: VertexId) -> String {
        match self.coord_of(v) {
            Ok(c) => format!("{c:?}"),
            Err(_) => format!("{v:?}"),
        }
    }
}

impl<C: Construction> OrbitQuotient for LazyGraph<C> {
    fn orbit_of(&self, v: VertexId) -> Result<OrbitLabel> {
        let c = self.coord_of(v)?;
        self.construction
            .orbit_of(&c)
            .ok_or_else(|| Error::param("construction has no orbit quotient"))
    }

    fn representative(&self, label: OrbitLabel) -> Result<VertexId> {
        let c = self
            .construction
            .orbit_representative(label)
            .ok_or_else(|| Error::param(format!("no representative for orbit {label}")))?;
        self.id_of(&c)
    }

    fn orbit_size(&self, label: OrbitLabel) -> f64 {
        self.construction.orbit_size(label)
    }
}
