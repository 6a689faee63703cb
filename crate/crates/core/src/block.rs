//! Vectors made of named variable blocks, e.g. `(x₁, x₂, λ)` or `(x, y)`.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Vector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    names: Vec<String>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new<S: AsRef<str>>(blocks: &[(S, usize)]) -> Arc<Self> {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for (_, size) in blocks {
            offsets.push(offsets.last().unwrap() + size);
        }
        Arc::new(BlockLayout { names: blocks.iter().map(|(n, _)| n.as_ref().to_string()).collect(), offsets })
    }

    pub fn num_blocks(&self) -> usize {
        self.names.len()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    layout: Arc<BlockLayout>,
    values: Vector,
}

impl BlockVector {
    pub fn new(layout: Arc<BlockLayout>, values: Vector) -> Result<Self> {
        if layout.dim() != values.dim() {
            return Err(Error::Structure(format!(
                "layout has dimension {}, values have {}",
                layout.dim(),
                values.dim()
            )));
        }
        Ok(BlockVector { layout, values })
    }

    pub fn zeros(layout: Arc<BlockLayout>) -> Self {
        let values = Vector::zeros(layout.dim());
        BlockVector { layout, values }
    }

    pub fn from_blocks(layout: Arc<BlockLayout>, blocks: &[&[f64]]) -> Result<Self> {
        if blocks.len() != layout.num_blocks() || blocks.iter().enumerate().any(|(i, b)| b.len() != layout.size(i)) {
            return Err(Error::Structure("block sizes do not match layout".into()));
        }
        BlockVector::new(layout, Vector::new(blocks.concat())?)
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn into_values(self) -> Vector {
        self.values
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.values[self.layout.range(i)]
    }

    pub fn block_vector(&self, i: usize) -> Vector {
        Vector::from_raw(self.block(i).to_vec())
    }

    pub fn check_same_structure(&self, other: &BlockVector) -> Result<()> {
        if self.layout == other.layout {
            Ok(())
        } else {
            Err(Error::Structure(format!("blocks {:?} vs {:?}", self.layout.names(), other.layout.names())))
        }
    }

    /// `a·x + b·y` over identical layouts.
    pub fn lincomb(a: f64, x: &BlockVector, b: f64, y: &BlockVector) -> Result<BlockVector> {
        x.check_same_structure(y)?;
        Ok(BlockVector { layout: x.layout.clone(), values: Vector::lincomb(a, &x.values, b, &y.values) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_ranges() {
        let l = BlockLayout::new(&[("x1", 2), ("x2", 3), ("lambda", 1)]);
        assert_eq!(l.dim(), 6);
        assert_eq!(l.range(1), 2..5);
        assert_eq!(l.name(2), "lambda");
        let w = BlockVector::from_blocks(l.clone(), &[&[1.0, 2.0], &[3.0, 4.0, 5.0], &[6.0]]).unwrap();
        assert_eq!(w.block(1), &[3.0, 4.0, 5.0]);
        assert!(BlockVector::from_blocks(l, &[&[1.0], &[3.0, 4.0, 5.0], &[6.0]]).is_err());
    }

    #[test]
    fn lincomb_rejects_other_layouts() {
        let a = BlockVector::zeros(BlockLayout::new(&[("x", 1), ("y", 1)]));
        let b = BlockVector::zeros(BlockLayout::new(&[("x", 2)]));
        assert!(BlockVector::lincomb(1.0, &a, 1.0, &b).is_err());
    }
}
