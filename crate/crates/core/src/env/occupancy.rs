use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::rng::{unit, Seed};

/// How the finite window closes off.
///
/// `Torus` glues the rightmost cell to the leftmost one. `Frozen` treats every
/// site outside the window as permanently vacant: no exclusion link crosses the
/// window edge and spin-flip neighbourhoods read outside sites as 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Torus,
    Frozen,
}

/// A contiguous range of sites `[offset, offset + len)` plus its boundary policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub offset: i64,
    pub len: usize,
    pub boundary: Boundary,
}

impl Window {
    pub fn new(offset: i64, len: usize, boundary: Boundary) -> Result<Self> {
        if len == 0 {
            return Err(invalid("window must contain at least one site"));
        }
        Ok(Window {
            offset,
            len,
            boundary,
        })
    }

    /// Sites `-half_width ..= half_width`.
    pub fn centered(half_width: usize, boundary: Boundary) -> Self {
        Window {
            offset: -(half_width as i64),
            len: 2 * half_width + 1,
            boundary,
        }
    }

    pub fn torus(len: usize) -> Result<Self> {
        Window::new(0, len, Boundary::Torus)
    }

    #[inline]
    pub fn leftmost(&self) -> i64 {
        self.offset
    }

    #[inline]
    pub fn rightmost(&self) -> i64 {
        self.offset + self.len as i64 - 1
    }

    #[inline]
    pub fn contains(&self, site: i64) -> bool {
        site >= self.offset && site <= self.rightmost()
    }

    /// Cell index of `site`, or a window-too-small error.
    #[inline]
    pub fn index(&self, site: i64) -> Result<usize> {
        if self.contains(site) {
            Ok((site - self.offset) as usize)
        } else {
            Err(self.exit_error(site))
        }
    }

    /// Cell index of `site` reduced modulo the window length.
    #[inline]
    pub fn wrapped_index(&self, site: i64) -> usize {
        (site - self.offset).rem_euclid(self.len as i64) as usize
    }

    #[inline]
    pub fn site(&self, index: usize) -> i64 {
        self.offset + index as i64
    }

    pub(crate) fn exit_error(&self, site: i64) -> Error {
        Error::WindowTooSmall {
            site,
            lo: self.leftmost(),
            hi: self.rightmost(),
        }
    }

    /// Number of nearest-neighbour edges. Edge `e` joins cells `e` and
    /// `(e + 1) % len`.
    pub fn n_edges(&self) -> usize {
        match (self.boundary, self.len) {
            (_, 1) => 0,
            (Boundary::Torus, 2) => 1,
            (Boundary::Torus, n) => n,
            (Boundary::Frozen, n) => n - 1,
        }
    }

    #[inline]
    pub fn edge(&self, e: usize) -> (usize, usize) {
        let b = e + 1;
        (e, if b == self.len { 0 } else { b })
    }
}

/// Finite window of a {0,1}-valued configuration, with its environment clock.
#[derive(Clone, Debug, PartialEq)]
pub struct Occupancy {
    cells: Vec<u8>,
    window: Window,
    time: f64,
}

impl Occupancy {
    pub fn from_cells(offset: i64, boundary: Boundary, cells: Vec<u8>) -> Result<Self> {
        let window = Window::new(offset, cells.len(), boundary)?;
        if let Some(bad) = cells.iter().find(|&&c| c > 1) {
            return Err(invalid(format!("cell value {bad} is not 0 or 1")));
        }
        Ok(Occupancy {
            cells,
            window,
            time: 0.0,
        })
    }

    pub fn filled(window: Window, value: bool) -> Self {
        Occupancy {
            cells: vec![value as u8; window.len],
            window,
            time: 0.0,
        }
    }

    #[inline]
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub(crate) fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    #[inline]
    pub fn window(&self) -> Window {
        self.window
    }

    #[inline]
    pub fn offset(&self) -> i64 {
        self.window.offset
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.window.boundary
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    #[inline]
    pub fn get(&self, site: i64) -> Result<bool> {
        Ok(self.cells[self.window.index(site)?] == 1)
    }

    #[inline]
    pub fn get_periodic(&self, site: i64) -> bool {
        self.cells[self.window.wrapped_index(site)] == 1
    }

    pub fn set(&mut self, site: i64, value: bool) -> Result<()> {
        let i = self.window.index(site)?;
        self.cells[i] = value as u8;
        Ok(())
    }

    pub fn particle_count(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum()
    }

    /// `offset` followed by the cells as a binary string, e.g. `-3 0110101`.
    pub fn to_snapshot(&self) -> String {
        format!("{} {}", self.offset(), self.bit_string())
    }

    pub fn bit_string(&self) -> String {
        self.cells
            .iter()
            .map(|&c| if c == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn parse_snapshot(line: &str, boundary: Boundary) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let (Some(off), Some(bits), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: 1,
                msg: "expected `<offset> <bits>`".into(),
            });
        };
        let offset: i64 = off.parse().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad offset {off:?}: {e}"),
        })?;
        let cells = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Occupancy::from_cells(offset, boundary, cells)
    }
}

impl fmt::Display for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_snapshot())
    }
}

/// Product Bernoulli(`rho`) configuration on `window`, clock at 0.
pub fn bernoulli_init(rho: f64, window: Window, seed: Seed) -> Result<Occupancy> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid(format!("density {rho} outside [0, 1]")));
    }
    if window.len == 0 {
        return Err(invalid("empty window"));
    }
    let mut rng = seed.rng();
    let cells = (0..window.len)
        .map(|_| (unit(&mut rng) < rho) as u8)
        .collect();
    Ok(Occupancy {
        cells,
        window,
        time: 0.0,
    })
}
