use crate::backends::hash64;
use crate::game::InfostateKey;

pub const DEFAULT_DIMENSION: usize = 768;

/// Maps text to a fixed-length real vector.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Signed feature hashing over lowercase alphanumeric tokens, L2-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashingEmbedder {
    dimension: usize,
}

impl HashingEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 8, "embedding dimension must be at least 8");
        HashingEmbedder { dimension }
    }

    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
    }

    /// Bucket and sign of one token.
    pub fn slot(&self, token: &str) -> (usize, f64) {
        let index = hash64(&[b"index\x1f", token.as_bytes()]) % self.dimension as u64;
        let sign = if hash64(&[b"sign\x1f", token.as_bytes()]) & 1 == 0 { 1.0 } else { -1.0 };
        (index as usize, sign)
    }

    /// Signed token counts before normalization.
    pub fn raw(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        for token in Self::tokens(text) {
            let (i, s) = self.slot(&token);
            v[i] += s;
        }
        v
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder::new(DEFAULT_DIMENSION)
    }
}

impl Embedder for HashingEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    /// A zero vector (no tokens, or cancelling signs) maps to the first basis vector.
    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = self.raw(text);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

pub fn embed_infostate(key: &InfostateKey, embedder: &dyn Embedder) -> Vec<f64> {
    embedder.embed(&key.canonical())
}
