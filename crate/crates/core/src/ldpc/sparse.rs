/// Sparse binary matrix with row and column adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseBinaryMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
            cols: vec![Vec::new(); ncols],
        }
    }

    /// Builds from `(row, col)` positions of the ones; duplicates cancel.
    pub fn from_entries(nrows: usize, ncols: usize, entries: &[(usize, usize)]) -> Self {
        let mut m = Self::new(nrows, ncols);
        for &(r, c) in entries {
            m.toggle(r, c);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), ncols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v & 1 == 1 {
                    m.insert(r, c);
                }
            }
        }
        m
    }

    pub fn insert(&mut self, row: usize, col: usize) {
        if !self.contains(row, col) {
            self.rows[row].push(col);
            self.rows[row].sort_unstable();
            self.cols[col].push(row);
            self.cols[col].sort_unstable();
        }
    }

    pub fn toggle(&mut self, row: usize, col: usize) {
        if self.contains(row, col) {
            self.rows[row].retain(|&c| c != col);
            self.cols[col].retain(|&r| r != row);
        } else {
            self.insert(row, col);
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows[row].binary_search(&col).is_ok()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn num_ones(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Matrix with columns reordered so that new column `j` is old column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.ncols);
        let mut new_of_old = vec![0; self.ncols];
        for (new, &old) in order.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut m = Self::new(self.nrows, self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            let mut mapped: Vec<usize> = row.iter().map(|&c| new_of_old[c]).collect();
            mapped.sort_unstable();
            for &c in &mapped {
                m.cols[c].push(r);
            }
            m.rows[r] = mapped;
        }
        m
    }

    /// `H · xᵀ` over GF(2).
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)))
            .collect()
    }

    pub fn syndrome_is_zero(&self, x: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)) == 0)
    }
}

/// Dense GF(2) matrix stored as packed 64-bit words per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        let words = ncols.div_ceil(64).max(1);
        BitMatrix {
            nrows,
            ncols,
            words,
            data: vec![0; nrows * words],
        }
    }

    pub fn from_sparse(m: &SparseBinaryMatrix) -> Self {
        let mut d = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for &c in m.row(r) {
                d.set(r, c, true);
            }
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let w = self.words;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&mut lo[dst * w..(dst + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..(src + 1) * w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= *y;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        for i in 0..w {
            self.data.swap(a * w + i, b * w + i);
        }
    }
}
