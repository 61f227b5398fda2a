use crate::error::{dim_err, Result};
use crate::tensor::{Element, Tensor};

/// Hyperspectral image cube, stored band-sequentially: all of band 0 in
/// row-major order, then band 1, and so on.
#[derive(Clone, Debug, PartialEq)]
pub struct HsiCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f32>,
    band_ids: Vec<String>,
}

impl HsiCube {
    pub fn new(height: usize, width: usize, bands: usize, data: Vec<f32>) -> Result<Self> {
        let ids = (0..bands).map(|b| format!("b{b}")).collect();
        Self::with_band_ids(height, width, bands, data, ids)
    }

    pub fn with_band_ids(
        height: usize,
        width: usize,
        bands: usize,
        data: Vec<f32>,
        band_ids: Vec<String>,
    ) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(dim_err!("cube extents must be positive, got {height}x{width}x{bands}"));
        }
        if data.len() != height * width * bands {
            return Err(dim_err!(
                "cube {height}x{width}x{bands} needs {} values, got {}",
                height * width * bands,
                data.len()
            ));
        }
        if band_ids.len() != bands {
            return Err(dim_err!("{} band ids for {bands} bands", band_ids.len()));
        }
        Ok(Self { height, width, bands, data, band_ids })
    }

    pub fn zeros(height: usize, width: usize, bands: usize) -> Self {
        Self::new(height, width, bands, vec![0.0; height * width * bands]).expect("positive extents")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// `(height, width, bands)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.bands)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn band_ids(&self) -> &[String] {
        &self.band_ids
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f32 {
        self.data[(band * self.height + row) * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, band: usize, value: f32) {
        self.data[(band * self.height + row) * self.width + col] = value;
    }

    pub fn band(&self, band: usize) -> &[f32] {
        let plane = self.pixels();
        &self.data[band * plane..(band + 1) * plane]
    }

    /// Spectrum of one pixel.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f32> {
        (0..self.bands).map(|b| self.get(row, col, b)).collect()
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    /// `(1, bands, height, width)` tensor.
    pub fn to_tensor<T: Element>(&self) -> Tensor<T> {
        let data = self.data.iter().map(|&v| T::from_f64(v as f64)).collect();
        Tensor::new(&[1, self.bands, self.height, self.width], data).expect("cube layout")
    }

    /// Stack cubes of equal extents into one `(N, bands, height, width)` tensor.
    pub fn stack<T: Element>(cubes: &[&HsiCube]) -> Result<Tensor<T>> {
        let Some(first) = cubes.first() else {
            return Err(dim_err!("cannot stack zero cubes"));
        };
        let mut data = Vec::with_capacity(cubes.len() * first.data.len());
        for c in cubes {
            if c.dims() != first.dims() {
                return Err(dim_err!("stack: {:?} vs {:?}", c.dims(), first.dims()));
            }
            data.extend(c.data.iter().map(|&v| T::from_f64(v as f64)));
        }
        Tensor::new(&[cubes.len(), first.bands, first.height, first.width], data)
    }

    /// Cube `index` of an NCHW tensor.
    pub fn from_tensor<T: Element>(t: &Tensor<T>, index: usize) -> Result<Self> {
        let s = t.shape();
        if s.len() != 4 || index >= s[0] {
            return Err(dim_err!("cannot take cube {index} from tensor {s:?}"));
        }
        let per = s[1] * s[2] * s[3];
        let data = t.data()[index * per..(index + 1) * per].iter().map(|v| v.as_f64() as f32).collect();
        Self::new(s[2], s[3], s[1], data)
    }
}
