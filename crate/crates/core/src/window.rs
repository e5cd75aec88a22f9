//! Sliding windows over a series, each remembering its source index range.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::series::MultivariateSeries;

/// A fixed-length slice of a series. `start_index` points back at the source
/// observation the first row came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    values: Array2<f64>,
    start_index: usize,
}

impl Window {
    pub fn new(values: Array2<f64>, start_index: usize) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidWindow(values.nrows()));
        }
        Ok(Self {
            values,
            start_index,
        })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 2 by construction
    }

    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }
}

/// The ordered collection of windows sliced from one series. All windows
/// share the same length and dimensionality; window k starts at k * stride.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    windows: Vec<Window>,
    window_length: usize,
    stride: usize,
    source_length: usize,
}

impl WindowSet {
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn dims(&self) -> usize {
        self.windows[0].dims()
    }

    /// Indices of the observations window k covers.
    pub fn covered_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = self.windows[k].start_index();
        start..start + self.window_length
    }

    /// Build a set directly from windows, for callers that assemble their own
    /// samples (benchmarks, pre-segmented datasets). All windows must agree in
    /// length and dimensionality.
    pub fn from_windows(windows: Vec<Window>, stride: usize, source_length: usize) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::EmptyInput("window set has no windows"));
        }
        let len = windows[0].len();
        let dims = windows[0].dims();
        for win in &windows[1..] {
            if win.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: win.len(),
                });
            }
            if win.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: win.dims(),
                });
            }
        }
        Ok(Self {
            windows,
            window_length: len,
            stride,
            source_length,
        })
    }
}

/// Slice `series` into ⌊(n − length)/stride⌋ + 1 windows.
pub fn make_windows(
    series: &MultivariateSeries,
    length: usize,
    stride: usize,
) -> Result<WindowSet> {
    if length < 2 {
        return Err(Error::InvalidWindow(length));
    }
    if stride == 0 {
        return Err(Error::InvalidStride(stride));
    }
    let n = series.len();
    if length > n {
        return Err(Error::InputTooShort {
            needed: length,
            actual: n,
        });
    }
    let count = (n - length) / stride + 1;
    let mut windows = Vec::with_capacity(count);
    for k in 0..count {
        let start = k * stride;
        let values = series
            .values()
            .slice(ndarray::s![start..start + length, ..])
            .to_owned();
        windows.push(Window {
            values,
            start_index: start,
        });
    }
    Ok(WindowSet {
        windows,
        window_length: length,
        stride,
        source_length: n,
    })
}
