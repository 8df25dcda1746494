//! Single-window codec: one secret index per 4x4 block of one cover channel.
//!
//! A clean window holds 16 multiples of 5, each at most 250. To carry an
//! index `v` in 0..=51, exactly one cell is raised by the remainder
//! `part = v / 16 + 1`. The cell is chosen by `v % 16` in vertical
//! (column-major) order and then advanced by the key shift in the key's
//! tracing order.

use thiserror::Error;

use crate::fmm::{COVER_CAP, MAX_INDEX, MODULUS};

pub const WINDOW_SIDE: usize = 4;
pub const WINDOW_CELLS: usize = WINDOW_SIDE * WINDOW_SIDE;
/// Values per part; parts 1..=3 are full, part 4 holds 48..=51 only.
const PART_WIDTH: u8 = WINDOW_CELLS as u8;

/// Window values in row-major order: cell (r, c) lives at `r * 4 + c`.
pub type Window = [u8; WINDOW_CELLS];

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum WindowError {
    #[error("IndexOutOfRange: secret index {0} exceeds 51")]
    IndexOutOfRange(u8),
    #[error("WindowNotClean: cell ({row}, {col}) holds {value}")]
    WindowNotClean { row: usize, col: usize, value: u8 },
    #[error("NoMark: window has no cell with a nonzero remainder")]
    NoMark,
    #[error("MultipleMark: window has {0} marked cells")]
    MultipleMark(usize),
    #[error("ValueOverflow: part {part} at position {position} decodes past 51")]
    ValueOverflow { part: u8, position: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    row: u8,
    col: u8,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Option<Self> {
        (row < WINDOW_SIDE && col < WINDOW_SIDE).then_some(Self {
            row: row as u8,
            col: col as u8,
        })
    }

    pub fn row(self) -> usize {
        self.row as usize
    }

    pub fn col(self) -> usize {
        self.col as usize
    }

    /// Offset into a row-major [`Window`].
    pub fn offset(self) -> usize {
        self.row() * WINDOW_SIDE + self.col()
    }

    fn from_offset(offset: usize) -> Self {
        Self {
            row: (offset / WINDOW_SIDE) as u8,
            col: (offset % WINDOW_SIDE) as u8,
        }
    }
}

/// Linearization of the 16 cells of a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceOrder {
    /// Row-major.
    Horizontal,
    /// Column-major.
    Vertical,
}

impl TraceOrder {
    pub fn index_of(self, cell: Cell) -> u8 {
        match self {
            Self::Horizontal => cell.row * WINDOW_SIDE as u8 + cell.col,
            Self::Vertical => cell.col * WINDOW_SIDE as u8 + cell.row,
        }
    }

    pub fn cell_at(self, index: u8) -> Cell {
        let index = index % WINDOW_CELLS as u8;
        let (major, minor) = (index / WINDOW_SIDE as u8, index % WINDOW_SIDE as u8);
        match self {
            Self::Horizontal => Cell {
                row: major,
                col: minor,
            },
            Self::Vertical => Cell {
                row: minor,
                col: major,
            },
        }
    }
}

/// Where a secret index lands before any key shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mark {
    /// Remainder written into the cover, 1..=4.
    pub part: u8,
    /// Vertical-order position inside the window, 0..=15.
    pub position: u8,
}

impl Mark {
    pub fn base(self) -> u8 {
        (self.part - 1) * PART_WIDTH
    }
}

pub fn value_to_mark(value: u8) -> Result<Mark, WindowError> {
    if value > MAX_INDEX {
        return Err(WindowError::IndexOutOfRange(value));
    }
    Ok(Mark {
        part: value / PART_WIDTH + 1,
        position: value % PART_WIDTH,
    })
}

fn shifted(cell: Cell, shift: u8, dir: TraceOrder) -> Cell {
    let j = dir.index_of(cell) as usize;
    dir.cell_at(((j + shift as usize) % WINDOW_CELLS) as u8)
}

fn unshifted(cell: Cell, shift: u8, dir: TraceOrder) -> Cell {
    let j = dir.index_of(cell) as usize;
    let back = shift as usize % WINDOW_CELLS;
    dir.cell_at(((j + WINDOW_CELLS - back) % WINDOW_CELLS) as u8)
}

/// Checks that every cell is a multiple of 5 no greater than 250.
pub fn check_clean(window: &Window) -> Result<(), WindowError> {
    match window
        .iter()
        .position(|&v| v % MODULUS != 0 || v > COVER_CAP)
    {
        None => Ok(()),
        Some(offset) => {
            let cell = Cell::from_offset(offset);
            Err(WindowError::WindowNotClean {
                row: cell.row(),
                col: cell.col(),
                value: window[offset],
            })
        }
    }
}

/// Marks `value` into a clean window. `shift` is taken modulo 16.
pub fn embed_value(
    window: &Window,
    value: u8,
    shift: u8,
    dir: TraceOrder,
) -> Result<Window, WindowError> {
    check_clean(window)?;
    let mark = value_to_mark(value)?;
    let home = TraceOrder::Vertical.cell_at(mark.position);
    let target = shifted(home, shift, dir);
    let mut out = *window;
    out[target.offset()] += mark.part;
    Ok(out)
}

/// The single cell with a nonzero remainder and that remainder.
pub fn find_mark(window: &Window) -> Result<(Cell, u8), WindowError> {
    let mut found = None;
    let mut count = 0;
    for (offset, &v) in window.iter().enumerate() {
        let r = v % MODULUS;
        if r != 0 {
            count += 1;
            found = Some((Cell::from_offset(offset), r));
        }
    }
    match (count, found) {
        (1, Some(mark)) => Ok(mark),
        (0, _) => Err(WindowError::NoMark),
        (n, _) => Err(WindowError::MultipleMark(n)),
    }
}

pub fn decode_value(window: &Window, shift: u8, dir: TraceOrder) -> Result<u8, WindowError> {
    let (marked, part) = find_mark(window)?;
    let home = unshifted(marked, shift, dir);
    let position = TraceOrder::Vertical.index_of(home);
    let value = (part - 1) * PART_WIDTH + position;
    if value > MAX_INDEX {
        return Err(WindowError::ValueOverflow { part, position });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(r: usize, c: usize) -> Cell {
        Cell::new(r, c).unwrap()
    }

    fn marked(base: u8, at: Cell, value: u8) -> Window {
        let mut w = [base; WINDOW_CELLS];
        w[at.offset()] = value;
        w
    }

    #[test]
    fn trace_orders_are_bijections() {
        for dir in [TraceOrder::Horizontal, TraceOrder::Vertical] {
            let mut seen = [false; WINDOW_CELLS];
            for i in 0..16u8 {
                let c = dir.cell_at(i);
                assert_eq!(dir.index_of(c), i);
                assert!(!seen[c.offset()]);
                seen[c.offset()] = true;
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                let same = TraceOrder::Horizontal.index_of(cell(r, c))
                    == TraceOrder::Vertical.index_of(cell(r, c));
                assert_eq!(same, r == c);
            }
        }
        assert_eq!(TraceOrder::Vertical.index_of(cell(1, 0)), 1);
        assert_eq!(TraceOrder::Horizontal.index_of(cell(1, 3)), 7);
    }

    #[test]
    fn value_to_mark_examples() {
        assert_eq!(
            value_to_mark(0),
            Ok(Mark {
                part: 1,
                position: 0
            })
        );
        assert_eq!(
            value_to_mark(17),
            Ok(Mark {
                part: 2,
                position: 1
            })
        );
        assert_eq!(
            value_to_mark(51),
            Ok(Mark {
                part: 4,
                position: 3
            })
        );
        assert_eq!(value_to_mark(52), Err(WindowError::IndexOutOfRange(52)));
        assert_eq!(value_to_mark(17).unwrap().base(), 16);
    }

    #[test]
    fn looping_method_examples() {
        let clean = [25u8; WINDOW_CELLS];
        let w = embed_value(&clean, 0, 0, TraceOrder::Horizontal).unwrap();
        assert_eq!(w, marked(25, cell(0, 0), 26));
        assert_eq!(decode_value(&w, 0, TraceOrder::Horizontal), Ok(0));

        let w = embed_value(&clean, 17, 0, TraceOrder::Vertical).unwrap();
        assert_eq!(w, marked(25, cell(1, 0), 27));
        assert_eq!(decode_value(&w, 0, TraceOrder::Vertical), Ok(17));
    }

    #[test]
    fn third_looping_example_follows_column_major_convention() {
        // 28 at row 2, col 2: part 3, vertical position 10.
        let w = marked(25, cell(2, 2), 28);
        assert_eq!(decode_value(&w, 0, TraceOrder::Vertical), Ok(42));
    }

    #[test]
    fn horizontal_shift_by_seven() {
        let clean = [20u8; WINDOW_CELLS];
        let w = embed_value(&clean, 0, 7, TraceOrder::Horizontal).unwrap();
        assert_eq!(w, marked(20, cell(1, 3), 21));
        assert_eq!(decode_value(&w, 7, TraceOrder::Horizontal), Ok(0));
    }

    /// Six windows each carrying a part-1 mark, before and after keying
    /// with digits 7, 9, 1, 4, 3, 2.
    const UNSHIFTED: [(usize, usize); 6] = [(0, 0), (0, 0), (0, 0), (0, 0), (1, 0), (1, 0)];
    const SHIFTS: [u8; 6] = [7, 9, 1, 4, 3, 2];

    #[test]
    fn horizontal_key_table() {
        let expected = [(1, 3), (2, 1), (0, 1), (1, 0), (1, 3), (1, 2)];
        for i in 0..6 {
            let (r, c) = UNSHIFTED[i];
            let value = TraceOrder::Vertical.index_of(cell(r, c));
            let w = embed_value(&[20; 16], value, SHIFTS[i], TraceOrder::Horizontal).unwrap();
            let (er, ec) = expected[i];
            assert_eq!(w, marked(20, cell(er, ec), 21), "window {i}");
        }
    }

    #[test]
    fn vertical_key_table() {
        // Window 4 of the published vertical table shows (3, 0); shifting
        // (1, 0) forward by 3 in column-major order reaches (0, 1).
        let expected = [(3, 1), (1, 2), (1, 0), (0, 1), (0, 1), (3, 0)];
        for i in 0..6 {
            let (r, c) = UNSHIFTED[i];
            let value = TraceOrder::Vertical.index_of(cell(r, c));
            let w = embed_value(&[20; 16], value, SHIFTS[i], TraceOrder::Vertical).unwrap();
            let (er, ec) = expected[i];
            assert_eq!(w, marked(20, cell(er, ec), 21), "window {i}");
        }
    }

    #[test]
    fn exhaustive_round_trip_and_injectivity() {
        let clean = [100u8; WINDOW_CELLS];
        for dir in [TraceOrder::Horizontal, TraceOrder::Vertical] {
            for shift in 0..16u8 {
                let mut seen = std::collections::HashSet::new();
                for v in 0..=MAX_INDEX {
                    let w = embed_value(&clean, v, shift, dir).unwrap();
                    let changed: Vec<_> = (0..16).filter(|&i| w[i] != clean[i]).collect();
                    assert_eq!(changed.len(), 1);
                    let delta = w[changed[0]] - clean[changed[0]];
                    assert_eq!(delta, v / 16 + 1);
                    assert_eq!(decode_value(&w, shift, dir), Ok(v));
                    assert!(seen.insert(w));
                }
            }
        }
    }

    #[test]
    fn marked_value_never_exceeds_254() {
        let clean = [COVER_CAP; WINDOW_CELLS];
        for v in 0..=MAX_INDEX {
            let w = embed_value(&clean, v, 0, TraceOrder::Vertical).unwrap();
            assert!(w.iter().all(|&x| x <= 254));
        }
    }

    #[test]
    fn error_paths() {
        let clean = [100u8; WINDOW_CELLS];
        assert_eq!(
            embed_value(&marked(100, cell(2, 1), 101), 0, 0, TraceOrder::Vertical),
            Err(WindowError::WindowNotClean {
                row: 2,
                col: 1,
                value: 101
            })
        );
        assert_eq!(
            embed_value(&marked(100, cell(0, 0), 255), 0, 0, TraceOrder::Vertical),
            Err(WindowError::WindowNotClean {
                row: 0,
                col: 0,
                value: 255
            })
        );
        assert_eq!(
            embed_value(&clean, 52, 0, TraceOrder::Vertical),
            Err(WindowError::IndexOutOfRange(52))
        );
        assert_eq!(
            decode_value(&clean, 0, TraceOrder::Vertical),
            Err(WindowError::NoMark)
        );
        let mut two = marked(100, cell(0, 0), 101);
        two[5] = 103;
        assert_eq!(
            decode_value(&two, 0, TraceOrder::Vertical),
            Err(WindowError::MultipleMark(2))
        );
        // Part 4 at vertical position 4 would be 52.
        assert_eq!(
            decode_value(&marked(100, cell(0, 1), 104), 0, TraceOrder::Vertical),
            Err(WindowError::ValueOverflow {
                part: 4,
                position: 4
            })
        );
    }
}
