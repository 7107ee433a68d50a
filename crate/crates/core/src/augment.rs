//! Training-corpus expansion: color permutations, quarter-turn rotations and
//! horizontal mirroring.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Grid, Item, Pair};
use crate::error::{Error, Result};
use crate::seed::sub_seed;

/// A bijection on the colors `1..=9`; black (0) always maps to itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColorPermutation([u8; 10]);

impl ColorPermutation {
    /// `mapping[i]` is the image of color `i + 1`.
    pub fn new(mapping: [u8; 9]) -> Result<Self> {
        let mut seen = [false; 10];
        for &m in &mapping {
            if !(1..=9).contains(&m) || seen[m as usize] {
                return Err(Error::Config(format!(
                    "{mapping:?} is not a bijection on colors 1..=9"
                )));
            }
            seen[m as usize] = true;
        }
        let mut full = [0u8; 10];
        full[1..].copy_from_slice(&mapping);
        Ok(ColorPermutation(full))
    }

    pub fn identity() -> Self {
        ColorPermutation([0, 1, 2, 3, 4, 5, 6, 7, 8, 9])
    }

    /// Swaps two non-black colors.
    pub fn swap(a: u8, b: u8) -> Result<Self> {
        if !(1..=9).contains(&a) || !(1..=9).contains(&b) {
            return Err(Error::Config(format!("cannot swap {a} and {b}")));
        }
        let mut p = Self::identity();
        p.0.swap(a as usize, b as usize);
        Ok(p)
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let mut tail: Vec<u8> = (1..=9).collect();
        tail.shuffle(rng);
        let mut full = [0u8; 10];
        full[1..].copy_from_slice(&tail);
        ColorPermutation(full)
    }

    #[inline]
    pub fn apply(&self, color: u8) -> u8 {
        self.0[color as usize]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

pub fn permute_grid(g: &Grid, perm: &ColorPermutation) -> Grid {
    g.map_colors(|c| perm.apply(c))
}

pub fn permute_colors(p: &Pair, perm: &ColorPermutation) -> Pair {
    Pair {
        input: permute_grid(&p.input, perm),
        output: permute_grid(&p.output, perm),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    Quarter,
    Half,
    ThreeQuarter,
}

impl Rotation {
    pub const ALL: [Rotation; 3] = [Rotation::Quarter, Rotation::Half, Rotation::ThreeQuarter];

    pub fn from_degrees(angle: u32) -> Result<Self> {
        match angle {
            90 => Ok(Rotation::Quarter),
            180 => Ok(Rotation::Half),
            270 => Ok(Rotation::ThreeQuarter),
            other => Err(Error::Config(format!(
                "rotation angle {other} not in {{90, 180, 270}}"
            ))),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Rotation::Quarter => 90,
            Rotation::Half => 180,
            Rotation::ThreeQuarter => 270,
        }
    }
}

/// Clockwise quarter turn: cell `(r, c)` moves to `(c, h - 1 - r)`.
pub fn rotate90(g: &Grid) -> Grid {
    let h = g.height();
    Grid::from_fn(g.width(), h, |r, c| g.get(h - 1 - c, r))
}

pub fn rotate_grid(g: &Grid, rotation: Rotation) -> Grid {
    let turns = rotation.degrees() / 90;
    (0..turns).fold(g.clone(), |acc, _| rotate90(&acc))
}

pub fn rotate_pair(p: &Pair, angle: u32) -> Result<Pair> {
    let rotation = Rotation::from_degrees(angle)?;
    Ok(Pair {
        input: rotate_grid(&p.input, rotation),
        output: rotate_grid(&p.output, rotation),
    })
}

/// Reverses the column order.
pub fn mirror_grid(g: &Grid) -> Grid {
    let w = g.width();
    Grid::from_fn(g.height(), w, |r, c| g.get(r, w - 1 - c))
}

pub fn mirror_pair(p: &Pair) -> Pair {
    Pair {
        input: mirror_grid(&p.input),
        output: mirror_grid(&p.output),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub color_copies: usize,
    pub rotate_fraction: f64,
    pub mirror: bool,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            color_copies: 5,
            rotate_fraction: 0.6,
            mirror: true,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn none(seed: u64) -> Self {
        AugmentConfig {
            color_copies: 0,
            rotate_fraction: 0.0,
            mirror: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rotate_fraction) {
            return Err(Error::Config(format!(
                "rotate_fraction {} outside [0, 1]",
                self.rotate_fraction
            )));
        }
        // 9! - 1 non-identity permutations exist; far more than anyone asks for.
        if self.color_copies > 1000 {
            return Err(Error::Config("color_copies must be at most 1000".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub items: usize,
    pub original_grids: usize,
    pub color_copy_grids: usize,
    pub mirror_grids: usize,
    pub rotated_items: usize,
    pub rotation_grids: usize,
    pub total_grids: usize,
    /// `total_grids / original_grids`.
    pub expansion_factor: f64,
}

#[derive(Clone, Debug)]
pub struct TrainingCorpus {
    pub grids: Vec<Grid>,
    pub report: CorpusReport,
}

fn distinct_permutations(n: usize, rng: &mut impl Rng) -> Vec<ColorPermutation> {
    let mut perms: Vec<ColorPermutation> = Vec::with_capacity(n);
    while perms.len() < n {
        let p = ColorPermutation::random(rng);
        if !p.is_identity() && !perms.contains(&p) {
            perms.push(p);
        }
    }
    perms
}

/// Expands the example pairs of `items` into a flat list of training grids.
///
/// Per item: originals, then `color_copies` recolored copies (one permutation
/// shared by all pairs of the item), then mirrored copies of all of those, then
/// (for the selected `rotate_fraction` of items) one rotated copy of everything
/// with a single angle for the whole item.
pub fn build_training_corpus(items: &[Item], cfg: &AugmentConfig) -> Result<TrainingCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "rotation-selection", 0));
    let n_rotated = (cfg.rotate_fraction * items.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut rng);
    let mut rotate = vec![false; items.len()];
    for &i in &order[..n_rotated] {
        rotate[i] = true;
    }

    let mut report = CorpusReport {
        seed: cfg.seed,
        items: items.len(),
        rotated_items: n_rotated,
        ..Default::default()
    };
    let mut grids = Vec::new();
    for (idx, item) in items.iter().enumerate() {
        let mut item_rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "augment-item", idx as u64));
        let mut pairs: Vec<Pair> = item.train.clone();
        report.original_grids += 2 * pairs.len();

        for perm in distinct_permutations(cfg.color_copies, &mut item_rng) {
            let copies: Vec<Pair> = item.train.iter().map(|p| permute_colors(p, &perm)).collect();
            report.color_copy_grids += 2 * copies.len();
            pairs.extend(copies);
        }
        if cfg.mirror {
            let mirrored: Vec<Pair> = pairs.iter().map(mirror_pair).collect();
            report.mirror_grids += 2 * mirrored.len();
            pairs.extend(mirrored);
        }
        if rotate[idx] {
            let rotation = *Rotation::ALL.choose(&mut item_rng).expect("non-empty");
            let rotated: Vec<Pair> = pairs
                .iter()
                .map(|p| Pair {
                    input: rotate_grid(&p.input, rotation),
                    output: rotate_grid(&p.output, rotation),
                })
                .collect();
            report.rotation_grids += 2 * rotated.len();
            pairs.extend(rotated);
        }
        grids.extend(pairs.into_iter().flat_map(|p| [p.input, p.output]));
    }
    report.total_grids = grids.len();
    report.expansion_factor = if report.original_grids == 0 {
        0.0
    } else {
        report.total_grids as f64 / report.original_grids as f64
    };
    Ok(TrainingCorpus { grids, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_item;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn pair(a: Grid, b: Grid) -> Pair {
        Pair {
            input: a,
            output: b,
        }
    }

    #[test]
    fn identity_and_swap_involution() {
        let p = pair(grid(&[&[0, 1, 2], &[3, 1, 0]]), grid(&[&[2, 2], &[1, 9]]));
        assert_eq!(permute_colors(&p, &ColorPermutation::identity()), p);
        let swap = ColorPermutation::swap(1, 2).unwrap();
        let once = permute_colors(&p, &swap);
        assert_ne!(once, p);
        assert_eq!(permute_colors(&once, &swap), p);
    }

    #[test]
    fn permutation_remaps_cell_by_cell() {
        let p = pair(grid(&[&[1, 0, 3], &[3, 3, 0]]), grid(&[&[0, 1], &[1, 3]]));
        let perm = ColorPermutation::new([4, 2, 9, 1, 5, 6, 7, 8, 3]).unwrap();
        let out = permute_colors(&p, &perm);
        for (src, dst) in [(&p.input, &out.input), (&p.output, &out.output)] {
            assert_eq!(src.dims(), dst.dims());
            for (a, b) in src.cells().iter().zip(dst.cells()) {
                let expected = match a {
                    0 => 0,
                    1 => 4,
                    3 => 9,
                    _ => unreachable!(),
                };
                assert_eq!(*b, expected);
            }
        }
        let used: std::collections::BTreeSet<u8> =
            out.input.color_set().union(&out.output.color_set()).copied().collect();
        assert_eq!(used, [0, 4, 9].into_iter().collect());
    }

    #[test]
    fn non_bijection_rejected() {
        assert!(matches!(
            ColorPermutation::new([1, 1, 3, 4, 5, 6, 7, 8, 9]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ColorPermutation::new([0, 2, 3, 4, 5, 6, 7, 8, 9]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rotation_index_mapping() {
        let g = grid(&[&[1, 2, 3], &[4, 5, 6]]);
        let r = rotate90(&g);
        assert_eq!(r.dims(), (3, 2));
        for row in 0..2 {
            for col in 0..3 {
                assert_eq!(r.get(col, 2 - 1 - row), g.get(row, col));
            }
        }
    }

    #[test]
    fn rotation_group_laws() {
        let p = pair(grid(&[&[1, 2, 3], &[4, 5, 6]]), grid(&[&[7], &[8]]));
        let four = (0..4).try_fold(p.clone(), |acc, _| rotate_pair(&acc, 90)).unwrap();
        assert_eq!(four, p);
        let twice = rotate_pair(&rotate_pair(&p, 180).unwrap(), 180).unwrap();
        assert_eq!(twice, p);
        assert!(matches!(rotate_pair(&p, 45), Err(Error::Config(_))));
    }

    #[test]
    fn mirror_cases() {
        assert_eq!(mirror_grid(&grid(&[&[1, 2, 3]])), grid(&[&[3, 2, 1]]));
        let column = grid(&[&[1], &[2], &[3]]);
        assert_eq!(mirror_grid(&column), column);
        let p = pair(grid(&[&[1, 2], &[3, 4]]), grid(&[&[5, 6, 7]]));
        assert_eq!(mirror_pair(&mirror_pair(&p)), p);
    }

    fn items(n: usize) -> Vec<Item> {
        let raw = r#"{"train":[{"input":[[0,1],[2,0]],"output":[[1,1]]},{"input":[[3]],"output":[[4,0,5]]}],"test":[{"input":[[4]],"output":[[5]]}]}"#;
        (0..n)
            .map(|i| parse_item(raw.as_bytes(), &format!("{i}")).unwrap())
            .collect()
    }

    #[test]
    fn identity_config_returns_originals() {
        let items = items(3);
        let corpus = build_training_corpus(&items, &AugmentConfig::none(7)).unwrap();
        let expected: Vec<Grid> = items
            .iter()
            .flat_map(|i| i.example_grids().cloned().collect::<Vec<_>>())
            .collect();
        assert_eq!(corpus.grids, expected);
        assert_eq!(corpus.report.total_grids, 12);
    }

    #[test]
    fn default_config_counts_and_determinism() {
        let items = items(10);
        let cfg = AugmentConfig {
            seed: 3,
            ..Default::default()
        };
        let a = build_training_corpus(&items, &cfg).unwrap();
        let b = build_training_corpus(&items, &cfg).unwrap();
        assert_eq!(a.grids, b.grids);
        // 4 grids per item, x6 colors, x2 mirror, x2 for the 6 rotated items
        assert_eq!(a.report.rotated_items, 6);
        assert_eq!(a.report.total_grids, 4 * 6 * 2 * (10 + 6));
        assert_eq!(a.report.total_grids, a.grids.len());
    }
}
