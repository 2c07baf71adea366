//! Arena floor: a square grid of black and white tiles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arena side length in meters.
pub const ARENA_SIZE: f64 = 2.0;
/// Tiles per arena side.
pub const SIDE_TILES: usize = 20;
/// Tile edge length in meters.
pub const TILE_SIZE: f64 = ARENA_SIZE / SIDE_TILES as f64;
pub const CELL_COUNT: usize = SIDE_TILES * SIDE_TILES;

/// Floor color, doubling as a robot opinion. Black = 0, White = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Black = 0,
    White = 1,
}

pub type Opinion = Color;

impl Color {
    pub const BOTH: [Color; 2] = [Color::Black, Color::White];

    pub fn inverted(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn value(self) -> f64 {
        f64::from(self.bit())
    }

    pub fn from_bit(bit: bool) -> Color {
        if bit {
            Color::White
        } else {
            Color::Black
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::Black => 'B',
            Color::White => 'W',
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "B" | "b" | "black" | "Black" | "0" => Ok(Color::Black),
            "W" | "w" | "white" | "White" | "1" => Ok(Color::White),
            other => Err(Error::Parse(format!("unknown color {other:?}"))),
        }
    }
}

/// Minority-to-majority tile ratio, in (0, 1]. 1 is the hardest setting.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Difficulty(f64);

impl Difficulty {
    /// The four settings of the benchmark protocol.
    pub const BENCHMARK: [f64; 4] = [0.25, 0.52, 0.67, 0.82];

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Difficulty(value))
        } else {
            Err(Error::InvalidDifficulty(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Number of minority tiles used to realize this difficulty on the grid.
    pub fn minority_tiles(self) -> usize {
        let d = self.0;
        let m = (CELL_COUNT as f64 * d / (1.0 + d)).round() as usize;
        m.clamp(1, CELL_COUNT / 2)
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn task_difficulty(rho_white: f64, rho_black: f64) -> Result<Difficulty> {
    let degenerate = || Error::DegenerateEnvironment {
        white: rho_white,
        black: rho_black,
    };
    if !(rho_white > 0.0 && rho_black > 0.0) || (rho_white + rho_black - 1.0).abs() > 1e-9 {
        return Err(degenerate());
    }
    Difficulty::new((rho_white / rho_black).min(rho_black / rho_white))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TileGrid {
    cells: Vec<Color>,
}

impl TileGrid {
    /// Row-major cells; the row index follows y, the column index follows x.
    pub fn from_cells(cells: Vec<Color>) -> Result<Self> {
        if cells.len() != CELL_COUNT {
            return Err(Error::Parse(format!(
                "expected {CELL_COUNT} cells, got {}",
                cells.len()
            )));
        }
        Ok(TileGrid { cells })
    }

    pub fn uniform(color: Color) -> Self {
        TileGrid {
            cells: vec![color; CELL_COUNT],
        }
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    pub fn side_tiles(&self) -> usize {
        SIDE_TILES
    }

    pub fn tile_size(&self) -> f64 {
        TILE_SIZE
    }

    pub fn cell(&self, col: usize, row: usize) -> Color {
        self.cells[row * SIDE_TILES + col]
    }

    pub fn count(&self, color: Color) -> usize {
        self.cells.iter().filter(|&&c| c == color).count()
    }

    pub fn fraction(&self, color: Color) -> f64 {
        self.count(color) as f64 / CELL_COUNT as f64
    }

    /// The more frequent color; `None` on an even split.
    pub fn dominant(&self) -> Option<Color> {
        let white = self.count(Color::White);
        let black = CELL_COUNT - white;
        match white.cmp(&black) {
            std::cmp::Ordering::Greater => Some(Color::White),
            std::cmp::Ordering::Less => Some(Color::Black),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn difficulty(&self) -> Result<Difficulty> {
        task_difficulty(self.fraction(Color::White), self.fraction(Color::Black))
    }

    /// Inverts every tile in place of position.
    pub fn mirror(&self) -> TileGrid {
        TileGrid {
            cells: self.cells.iter().map(|c| c.inverted()).collect(),
        }
    }

    /// Color under a point; tiles are half-open `[k*0.1, (k+1)*0.1)`.
    pub fn ground_color(&self, x: f64, y: f64) -> Result<Color> {
        if !(0.0..ARENA_SIZE).contains(&x) || !(0.0..ARENA_SIZE).contains(&y) {
            return Err(Error::OutOfArena { x, y });
        }
        let col = ((x * SIDE_TILES as f64 / ARENA_SIZE).floor() as usize).min(SIDE_TILES - 1);
        let row = ((y * SIDE_TILES as f64 / ARENA_SIZE).floor() as usize).min(SIDE_TILES - 1);
        Ok(self.cell(col, row))
    }

    pub fn to_bit_string(&self) -> String {
        self.cells
            .iter()
            .map(|c| if *c == Color::White { '1' } else { '0' })
            .collect()
    }
}

pub fn generate_pattern<R: Rng + ?Sized>(
    difficulty: Difficulty,
    dominant: Color,
    rng: &mut R,
) -> TileGrid {
    let minority = difficulty.minority_tiles();
    let mut cells = vec![dominant; CELL_COUNT];
    for idx in rand::seq::index::sample(rng, CELL_COUNT, minority) {
        cells[idx] = dominant.inverted();
    }
    TileGrid { cells }
}

/// A grid plus the generation parameters, as written by `gen-env`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub grid: TileGrid,
    pub difficulty: Difficulty,
    pub dominant: Color,
    pub seed: u64,
}

impl GridFile {
    pub fn to_text(&self) -> String {
        format!(
            "tiles={SIDE_TILES}x{SIDE_TILES} difficulty={} dominant={} seed={}\n{}\n",
            self.difficulty,
            self.dominant,
            self.seed,
            self.grid.to_bit_string()
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing grid header".into()))?;
        let body = lines
            .next()
            .ok_or_else(|| Error::Parse("missing grid body".into()))?;

        let mut difficulty = None;
        let mut dominant = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            match key {
                "tiles" => {
                    if value != format!("{SIDE_TILES}x{SIDE_TILES}") {
                        return Err(Error::Parse(format!("unsupported tiles={value}")));
                    }
                }
                "difficulty" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad difficulty {value:?}")))?;
                    difficulty = Some(Difficulty::new(v)?);
                }
                "dominant" => dominant = Some(value.parse()?),
                "seed" => {
                    seed = Some(
                        value
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad seed {value:?}")))?,
                    )
                }
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }

        let cells = body
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(Color::Black),
                '1' => Ok(Color::White),
                other => Err(Error::Parse(format!("bad cell {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(GridFile {
            grid: TileGrid::from_cells(cells)?,
            difficulty: difficulty.ok_or_else(|| Error::Parse("missing difficulty".into()))?,
            dominant: dominant.ok_or_else(|| Error::Parse("missing dominant".into()))?,
            seed: seed.ok_or_else(|| Error::Parse("missing seed".into()))?,
        })
    }
}
