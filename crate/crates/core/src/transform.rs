//! Transformations of a finite set `{1..n}`.
//!
//! Composition is left to right: `x(fg) = (xf)g`. Internally images are stored
//! zero-indexed; the text form and all user-facing output are one-indexed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A total map on `{1..n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transformation {
    images: Vec<u8>,
}

impl Transformation {
    /// Builds a transformation from one-indexed images.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::Parse("a transformation needs a non-empty domain".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::Parse(format!("domain size {n} is too large")));
        }
        let mut zero = Vec::with_capacity(n);
        for &i in images {
            if i == 0 || i > n {
                return Err(Error::Parse(format!("image {i} lies outside 1..={n}")));
            }
            zero.push((i - 1) as u8);
        }
        Ok(Transformation { images: zero })
    }

    pub(crate) fn from_zero_indexed(images: Vec<u8>) -> Self {
        debug_assert!(images.iter().all(|&x| (x as usize) < images.len()));
        Transformation { images }
    }

    pub fn identity(n: usize) -> Self {
        Transformation::from_zero_indexed((0..n as u8).collect())
    }

    /// The constant map with value `x` (one-indexed).
    pub fn constant(n: usize, x: usize) -> Self {
        assert!(x >= 1 && x <= n);
        Transformation::from_zero_indexed(vec![(x - 1) as u8; n])
    }

    /// Every transformation of `{1..n}`, in lexicographic order of image tuples.
    pub fn all(n: usize) -> impl Iterator<Item = Transformation> {
        let total = (n as u64).pow(n as u32);
        (0..total).map(move |mut code| {
            let mut images = vec![0u8; n];
            for slot in images.iter_mut().rev() {
                *slot = (code % n as u64) as u8;
                code /= n as u64;
            }
            Transformation { images }
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the zero-indexed point `x`, zero-indexed.
    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    /// One-indexed image sequence.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize + 1).collect()
    }

    /// `x(fg) = (xf)g`.
    pub fn compose(&self, g: &Transformation) -> Result<Transformation> {
        if self.degree() != g.degree() {
            return Err(Error::DegreeMismatch(self.degree(), g.degree()));
        }
        Ok(self.then(g))
    }

    #[inline]
    pub(crate) fn then(&self, g: &Transformation) -> Transformation {
        Transformation {
            images: self.images.iter().map(|&x| g.images[x as usize]).collect(),
        }
    }

    /// Sorted image set, one-indexed.
    pub fn image(&self) -> Vec<usize> {
        let mut seen = vec![false; self.degree()];
        for &x in &self.images {
            seen[x as usize] = true;
        }
        (0..self.degree()).filter(|&x| seen[x]).map(|x| x + 1).collect()
    }

    /// Kernel classes, one-indexed, each sorted, ordered by least element.
    pub fn kernel(&self) -> Vec<Vec<usize>> {
        self.kernel_zero()
            .into_iter()
            .map(|b| b.into_iter().map(|x| x + 1).collect())
            .collect()
    }

    pub(crate) fn kernel_zero(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut slot = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let y = self.images[x] as usize;
            if slot[y] == usize::MAX {
                slot[y] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[slot[y]].push(x);
        }
        blocks
    }

    pub fn rank(&self) -> usize {
        let mut seen = 0u64;
        let mut big = Vec::new();
        for &x in &self.images {
            if x < 64 {
                seen |= 1 << x;
            } else {
                big.push(x);
            }
        }
        big.sort_unstable();
        big.dedup();
        seen.count_ones() as usize + big.len()
    }

    pub fn is_idempotent(&self) -> bool {
        self.images.iter().all(|&x| self.images[x as usize] == x)
    }

    pub fn is_permutation(&self) -> bool {
        self.rank() == self.degree()
    }

    /// Inverse of a permutation.
    pub fn inverse(&self) -> Option<Transformation> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0u8; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u8;
        }
        Some(Transformation { images: inv })
    }
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transformation({self})")
    }
}

/// `n: i1 i2 ... in`
impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.degree())?;
        for &x in &self.images {
            write!(f, " {}", x + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Transformation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `n: i1 ... in`, got {s:?}")))?;
        let n: usize = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree {:?}", head.trim())))?;
        let images = tail
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad image {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if images.len() != n {
            return Err(Error::Parse(format!("degree {n} but {} images given", images.len())));
        }
        Transformation::from_images(&images)
    }
}

impl Serialize for Transformation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transformation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An idempotent sandwich element together with its kernel blocks `A_i`
/// and image points `a_i ∈ A_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichElement {
    a: Transformation,
    /// Zero-indexed kernel classes, ordered by least element.
    blocks: Vec<Vec<usize>>,
    /// Zero-indexed image point of each block.
    reps: Vec<usize>,
}

impl SandwichElement {
    pub fn new(a: Transformation) -> Result<Self> {
        if !a.is_idempotent() {
            return Err(Error::NotIdempotent(a.to_string()));
        }
        let blocks = a.kernel_zero();
        let reps = blocks.iter().map(|b| a.apply(b[0])).collect();
        Ok(SandwichElement { a, blocks, reps })
    }

    pub fn transformation(&self) -> &Transformation {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.a.degree()
    }

    pub fn rank(&self) -> usize {
        self.blocks.len()
    }

    /// Zero-indexed blocks `A_1..A_r`.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Zero-indexed image points `a_1..a_r`.
    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Index `i` of the block `A_i` containing the zero-indexed point `x`.
    pub fn block_of(&self, x: usize) -> usize {
        let y = self.a.apply(x);
        self.reps.iter().position(|&r| r == y).expect("image point")
    }
}

/// Finds a permutation `p` with `ap` idempotent.
///
/// Each image point `y_i` of the kernel class `A_i` is sent to itself when it
/// already lies in `A_i`, and to `min A_i` otherwise. Remaining points are then
/// matched in increasing order. Idempotent input yields the identity.
pub fn normalize_sandwich(a: &Transformation) -> (Transformation, SandwichElement) {
    let n = a.degree();
    let mut p = vec![u8::MAX; n];
    let mut target_used = vec![false; n];
    for block in a.kernel_zero() {
        let y = a.apply(block[0]);
        let target = if block.contains(&y) { y } else { block[0] };
        p[y] = target as u8;
        target_used[target] = true;
    }
    let mut free_targets = (0..n).filter(|&t| !target_used[t]);
    for slot in p.iter_mut() {
        if *slot == u8::MAX {
            *slot = free_targets.next().expect("bijection") as u8;
        }
    }
    let p = Transformation::from_zero_indexed(p);
    let normalized = a.then(&p);
    let sandwich = SandwichElement::new(normalized).expect("normalized sandwich is idempotent");
    (p, sandwich)
}

/// Transports `f ∈ T_X^a` to `p⁻¹f ∈ T_X^{ap}`.
pub fn transport(p_inverse: &Transformation, f: &Transformation) -> Transformation {
    p_inverse.then(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Transformation {
        s.parse().unwrap()
    }

    #[test]
    fn compose_examples() {
        let id = Transformation::identity(4);
        let g = t("4: 3 1 4 4");
        assert_eq!(id.compose(&g).unwrap(), g);
        let f = t("4: 1 2 3 3");
        assert_eq!(f.compose(&f).unwrap(), f);
        assert_eq!(t("4: 2 2 4 4").compose(&f).unwrap(), t("4: 2 2 3 3"));
    }

    #[test]
    fn compose_rejects_mismatched_degrees() {
        assert!(matches!(
            t("2: 1 1").compose(&t("3: 1 1 1")),
            Err(Error::DegreeMismatch(2, 3))
        ));
    }

    #[test]
    fn image_kernel_rank() {
        let f = t("4: 1 2 3 3");
        assert_eq!(f.image(), vec![1, 2, 3]);
        assert_eq!(f.kernel(), vec![vec![1], vec![2], vec![3, 4]]);
        assert_eq!(f.rank(), 3);
        assert_eq!(Transformation::constant(5, 2).rank(), 1);
        assert_eq!(Transformation::identity(5).rank(), 5);
    }

    #[test]
    fn text_format() {
        assert_eq!(t("4: 1 2 3 3").to_string(), "4: 1 2 3 3");
        assert!("3: 1 2".parse::<Transformation>().is_err());
        assert!("2: 1 3".parse::<Transformation>().is_err());
        assert!("1 2".parse::<Transformation>().is_err());
        assert_eq!(t("  2 :2  1 ").images(), vec![2, 1]);
    }

    #[test]
    fn enumerates_full_monoid() {
        let all: Vec<_> = Transformation::all(3).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(all[0], t("3: 1 1 1"));
        assert_eq!(all[26], t("3: 3 3 3"));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn normalize_idempotent_is_identity() {
        for a in Transformation::all(4).filter(Transformation::is_idempotent) {
            let (p, s) = normalize_sandwich(&a);
            assert_eq!(p, Transformation::identity(4));
            assert_eq!(s.transformation(), &a);
        }
    }

    #[test]
    fn normalize_transposition() {
        let (p, s) = normalize_sandwich(&t("2: 2 1"));
        assert_eq!(p, t("2: 2 1"));
        assert_eq!(s.transformation(), &Transformation::identity(2));
    }

    #[test]
    fn normalize_non_idempotent_rank_two() {
        let a = t("3: 2 2 3");
        let (p, s) = normalize_sandwich(&a);
        assert!(p.is_permutation());
        let ap = a.then(&p);
        assert_eq!(ap.then(&ap), ap);
        assert_eq!(s.transformation(), &ap);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn sandwich_element_invariants_exhaustive() {
        for n in 1..=4 {
            for a in Transformation::all(n) {
                let (p, s) = normalize_sandwich(&a);
                assert!(p.is_permutation());
                let ap = s.transformation();
                assert!(ap.is_idempotent());
                assert_eq!(ap.rank(), a.rank());
                assert_eq!(s.rank(), a.rank());
                let mut covered: Vec<usize> = s.blocks().iter().flatten().copied().collect();
                covered.sort_unstable();
                assert_eq!(covered, (0..n).collect::<Vec<_>>());
                for (block, &rep) in s.blocks().iter().zip(s.reps()) {
                    assert!(block.contains(&rep));
                }
                let mut reps: Vec<usize> = s.reps().iter().map(|x| x + 1).collect();
                reps.sort_unstable();
                assert_eq!(reps, ap.image());
            }
        }
    }

    #[test]
    fn transport_is_an_isomorphism_of_variants() {
        let a = t("3: 2 2 3");
        let (p, s) = normalize_sandwich(&a);
        let p_inv = p.inverse().unwrap();
        let ap = s.transformation();
        let all: Vec<_> = Transformation::all(3).collect();
        for f in &all {
            for g in &all {
                let lhs = transport(&p_inv, &f.then(&a).then(g));
                let rhs = transport(&p_inv, f).then(ap).then(&transport(&p_inv, g));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn rank_is_submultiplicative() {
        for n in 1..=3 {
            let all: Vec<_> = Transformation::all(n).collect();
            for f in &all {
                for g in &all {
                    assert!(f.then(g).rank() <= f.rank().min(g.rank()));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn transformation(n: usize) -> impl Strategy<Value = Transformation> {
            proptest::collection::vec(0..n as u8, n).prop_map(Transformation::from_zero_indexed)
        }

        proptest! {
            #[test]
            fn composition_is_associative(
                (f, g, h) in (1usize..7).prop_flat_map(|n| (transformation(n), transformation(n), transformation(n)))
            ) {
                prop_assert_eq!(f.then(&g).then(&h), f.then(&g.then(&h)));
            }

            #[test]
            fn text_round_trip(f in (1usize..9).prop_flat_map(transformation)) {
                prop_assert_eq!(f.to_string().parse::<Transformation>().unwrap(), f);
            }
        }
    }
}
