//! ARC corpus ingestion: grids, items, directory loading, and the seeded
//! 300/100 train/validation split.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_SIDE: usize = 30;
pub const NUM_COLORS: usize = 10;

/// Number of items in the official ARC training set.
pub const OFFICIAL_SPLIT_TOTAL: usize = 400;
pub const TRAIN_SPLIT_SIZE: usize = 300;
pub const VALIDATION_SPLIT_SIZE: usize = 100;

/// A rectangular matrix of color indices `0..=9`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<u8>,
}

impl Grid {
    /// Builds a grid of arbitrary size up to 30x30. Colors must be in `0..=9`.
    pub fn new(height: usize, width: usize, cells: Vec<u8>) -> Result<Self> {
        if !(1..=MAX_SIDE).contains(&height) || !(1..=MAX_SIDE).contains(&width) {
            return Err(Error::Size(format!(
                "grid dims {height}x{width} outside 1..={MAX_SIDE}"
            )));
        }
        if cells.len() != height * width {
            return Err(Error::Size(format!(
                "expected {} cells for {height}x{width}, got {}",
                height * width,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c as usize >= NUM_COLORS) {
            return Err(Error::Size(format!("color {bad} outside 0..=9")));
        }
        Ok(Grid {
            height,
            width,
            cells,
        })
    }

    pub fn filled(height: usize, width: usize, color: u8) -> Result<Self> {
        Grid::new(height, width, vec![color; height * width])
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::Size("ragged rows".into()));
        }
        let cells = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Grid::new(height, width, cells)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks(self.width)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.rows().map(<[u8]>::to_vec).collect()
    }

    /// Count of each color.
    pub fn histogram(&self) -> [usize; NUM_COLORS] {
        let mut hist = [0; NUM_COLORS];
        for &c in &self.cells {
            hist[c as usize] += 1;
        }
        hist
    }

    pub fn color_set(&self) -> BTreeSet<u8> {
        self.cells.iter().copied().collect()
    }

    /// Applies `f(row, col) -> color` over a new `height x width` canvas.
    pub(crate) fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Self {
        let mut cells = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                cells.push(f(r, c));
            }
        }
        Grid {
            height,
            width,
            cells,
        }
    }

    pub(crate) fn map_colors(&self, f: impl Fn(u8) -> u8) -> Self {
        Grid {
            height: self.height,
            width: self.width,
            cells: self.cells.iter().map(|&c| f(c)).collect(),
        }
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.rows())
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        Grid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Pair {
    pub input: Grid,
    pub output: Grid,
}

impl Pair {
    pub fn grids(&self) -> [&Grid; 2] {
        [&self.input, &self.output]
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Item {
    #[serde(skip)]
    pub id: String,
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
}

impl Item {
    /// The first test pair; scoring and solving only consider this one.
    pub fn first_test(&self) -> &Pair {
        &self.test[0]
    }

    /// Every grid in the example pairs, inputs before outputs per pair.
    pub fn example_grids(&self) -> impl Iterator<Item = &Grid> {
        self.train.iter().flat_map(|p| p.grids())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("items always serialize")
    }
}

#[derive(Deserialize)]
struct RawPair {
    input: Vec<Vec<i64>>,
    output: Option<Vec<Vec<i64>>>,
}

#[derive(Deserialize)]
struct RawItem {
    train: Vec<RawPair>,
    test: Vec<RawPair>,
}

fn validate_grid(id: &str, what: &str, rows: &[Vec<i64>]) -> Result<Grid> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if !(1..=MAX_SIDE).contains(&height) || !(1..=MAX_SIDE).contains(&width) {
        return Err(Error::validation(
            id,
            format!("{what}: dims {height}x{width} outside 1..={MAX_SIDE}"),
        ));
    }
    let mut cells = Vec::with_capacity(height * width);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::validation(
                id,
                format!("{what}: row {r} has {} cells, expected {width}", row.len()),
            ));
        }
        for &v in row {
            if !(0..NUM_COLORS as i64).contains(&v) {
                return Err(Error::validation(
                    id,
                    format!("{what}: color {v} outside 0..=9"),
                ));
            }
            cells.push(v as u8);
        }
    }
    Ok(Grid {
        height,
        width,
        cells,
    })
}

fn validate_pairs(id: &str, section: &str, raw: Vec<RawPair>) -> Result<Vec<Pair>> {
    raw.into_iter()
        .enumerate()
        .map(|(i, p)| {
            let input = validate_grid(id, &format!("{section}[{i}].input"), &p.input)?;
            let output = p.output.ok_or_else(|| {
                Error::validation(id, format!("{section}[{i}] is missing its output grid"))
            })?;
            let output = validate_grid(id, &format!("{section}[{i}].output"), &output)?;
            Ok(Pair { input, output })
        })
        .collect()
}

/// Parses one item in the ARC JSON layout (`{"train": [...], "test": [...]}`).
pub fn parse_item(raw_json: &[u8], id: &str) -> Result<Item> {
    let raw: RawItem = serde_json::from_slice(raw_json).map_err(|source| Error::Parse {
        id: id.to_string(),
        source,
    })?;
    let train = validate_pairs(id, "train", raw.train)?;
    let test = validate_pairs(id, "test", raw.test)?;
    if train.len() < 2 {
        return Err(Error::validation(
            id,
            format!("needs at least 2 train pairs, found {}", train.len()),
        ));
    }
    if test.is_empty() {
        return Err(Error::validation(id, "needs at least 1 test pair"));
    }
    Ok(Item {
        id: id.to_string(),
        train,
        test,
    })
}

fn json_files(directory: &Path) -> Result<Vec<std::path::PathBuf>> {
    let entries = fs::read_dir(directory).map_err(|e| Error::io(directory, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(directory, e))?.path();
        if path.is_file() && path.extension().is_some_and(|ext| ext == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn load_file(path: &Path) -> Result<Item> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_item(&bytes, &id)
}

/// Loads every `*.json` file of a directory, sorted by filename. The item id
/// is the filename stem. Any malformed file aborts the load.
pub fn load_dataset(directory: impl AsRef<Path>) -> Result<Vec<Item>> {
    let directory = directory.as_ref();
    let items = json_files(directory)?
        .iter()
        .map(|p| load_file(p))
        .collect::<Result<Vec<_>>>()?;
    log::info!("loaded {} items from {}", items.len(), directory.display());
    Ok(items)
}

#[derive(Clone, Debug)]
pub struct DatasetSplit {
    pub train_items: Vec<Item>,
    pub validation_items: Vec<Item>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn train_ids(&self) -> Vec<&str> {
        self.train_items.iter().map(|i| i.id.as_str()).collect()
    }

    pub fn validation_ids(&self) -> Vec<&str> {
        self.validation_items.iter().map(|i| i.id.as_str()).collect()
    }
}

/// Seeded 300/100 partition of the 400 official training items.
pub fn split_train_validation(items: &[Item], seed: u64) -> Result<DatasetSplit> {
    if items.len() != OFFICIAL_SPLIT_TOTAL {
        return Err(Error::Split(format!(
            "expected {OFFICIAL_SPLIT_TOTAL} items, got {}",
            items.len()
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, validation) = order.split_at(TRAIN_SPLIT_SIZE);
    let pick = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| items[i].clone()).collect::<Vec<_>>()
    };
    Ok(DatasetSplit {
        train_items: pick(train),
        validation_items: pick(validation),
        seed,
    })
}
