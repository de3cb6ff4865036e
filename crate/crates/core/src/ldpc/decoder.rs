use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sparse::SparseBinaryMatrix;

/// Magnitude at which channel and internal LLRs are clipped.
pub const LLR_CLIP: f64 = 30.0;

/// Edge-indexed Tanner graph. Edges are grouped by check node.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &SparseBinaryMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.nrows() + 1);
        let mut edge_var = Vec::with_capacity(h.num_ones());
        let mut var_edges = vec![Vec::new(); h.ncols()];
        check_start.push(0);
        for r in 0..h.nrows() {
            for &c in h.row(r) {
                var_edges[c].push(edge_var.len());
                edge_var.push(c);
            }
            check_start.push(edge_var.len());
        }
        TannerGraph {
            n: h.ncols(),
            check_start,
            edge_var,
            var_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        (0..self.num_checks()).all(|c| {
            self.check_edges(c)
                .fold(0u8, |acc, e| acc ^ bits[self.edge_var[e]])
                == 0
        })
    }
}

/// Result of one decoding run. LLRs use the `log(P0/P1)` convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
    pub posteriors: Vec<f64>,
}

/// Flooding sum-product decoder with reusable message buffers.
#[derive(Clone, Debug)]
pub struct BpDecoder {
    graph: Arc<TannerGraph>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    tanh_buf: Vec<f64>,
}

impl BpDecoder {
    pub fn new(graph: &Arc<TannerGraph>) -> Self {
        let e = graph.num_edges();
        BpDecoder {
            graph: Arc::clone(graph),
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            tanh_buf: Vec::new(),
        }
    }

    /// Decodes channel LLRs. At least one iteration is always run; decoding
    /// stops at the first iteration whose hard decision satisfies all checks
    /// with every posterior nonzero.
    pub fn decode(&mut self, llrs: &[f64], max_iter: usize) -> DecodeOutcome {
        let g = Arc::clone(&self.graph);
        assert_eq!(llrs.len(), g.n, "LLR length must equal the code length");
        let channel: Vec<f64> = llrs.iter().map(|&l| clip(l)).collect();
        for (e, &v) in g.edge_var.iter().enumerate() {
            self.v2c[e] = channel[v];
        }
        let mut posteriors = channel.clone();
        let mut bits = vec![0u8; g.n];
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=max_iter.max(1) {
            iterations = it;
            for c in 0..g.num_checks() {
                self.check_update(&g, c);
            }
            for (v, edges) in g.var_edges.iter().enumerate() {
                let total = channel[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                posteriors[v] = total;
                bits[v] = u8::from(total < 0.0);
                for &e in edges {
                    self.v2c[e] = clip(total - self.c2v[e]);
                }
            }
            if posteriors.iter().all(|&p| p != 0.0) && g.syndrome_is_zero(&bits) {
                converged = true;
                break;
            }
        }
        DecodeOutcome {
            bits,
            converged,
            iterations,
            posteriors,
        }
    }

    fn check_update(&mut self, g: &TannerGraph, c: usize) {
        let edges = g.check_edges(c);
        self.tanh_buf.clear();
        self.tanh_buf
            .extend(self.v2c[edges.clone()].iter().map(|&m| (0.5 * m).tanh()));
        let t = &self.tanh_buf;
        let d = t.len();
        // exclusive products via prefix and suffix scans
        let mut prefix = 1.0;
        for (i, e) in edges.clone().enumerate() {
            self.c2v[e] = prefix;
            prefix *= t[i];
        }
        let mut suffix = 1.0;
        for i in (0..d).rev() {
            let e = edges.start + i;
            let p = (self.c2v[e] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
            self.c2v[e] = clip(2.0 * p.atanh());
            suffix *= t[i];
        }
    }
}

fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::hamming_7_4;
    use proptest::prelude::*;

    fn llrs_of(word: &[u8], mag: f64) -> Vec<f64> {
        word.iter()
            .map(|&b| if b == 0 { mag } else { -mag })
            .collect()
    }

    #[test]
    fn corrects_a_single_flip() {
        let code = Arc::new(hamming_7_4().systematize().unwrap());
        let word = code.encode(&[1, 0, 1, 1]).unwrap();
        for pos in 0..7 {
            let mut llrs = llrs_of(&word, 2.0);
            llrs[pos] = -llrs[pos] * 0.5;
            let out = crate::ldpc::decode(&code, &llrs, 50);
            assert!(out.converged, "flip at {pos}");
            assert_eq!(out.bits, word);
        }
    }

    #[test]
    fn all_zero_llrs_never_converge() {
        let code = Arc::new(hamming_7_4().systematize().unwrap());
        let out = crate::ldpc::decode(&code, &[0.0; 7], 20);
        assert!(!out.converged);
        assert_eq!(out.iterations, 20);
    }

    #[test]
    fn noiseless_input_converges_in_one_iteration() {
        let code = Arc::new(hamming_7_4().systematize().unwrap());
        let word = code.encode(&[0, 1, 1, 0]).unwrap();
        let out = crate::ldpc::decode(&code, &llrs_of(&word, 1e6), 0);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.bits, word);
        assert!(out.posteriors.iter().all(|p| p.abs() <= 30.0 * 4.0));
    }

    proptest! {
        #[test]
        fn converged_output_is_a_codeword(llrs in prop::collection::vec(-6.0f64..6.0, 7)) {
            let code = Arc::new(hamming_7_4().systematize().unwrap());
            let out = crate::ldpc::decode(&code, &llrs, 30);
            if out.converged {
                prop_assert!(code.h().syndrome_is_zero(&out.bits));
            }
        }
    }
}
