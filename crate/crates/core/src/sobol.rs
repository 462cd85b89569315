//! Minimal low-discrepancy point generator for up to three dimensions,
//! used for deterministic membership sampling. Gray-code construction with
//! classic direction numbers: dimension one is the binary van der Corput
//! radical inverse; dimensions two and three come from the primitive
//! polynomials x+1 and x²+x+1 with initial odd integers (1) and (1,3).

const BITS: usize = 32;

pub struct Sobol {
    dim: usize,
    index: u64,
    state: [u32; 3],
    dirs: [[u32; BITS]; 3],
}

impl Sobol {
    /// `dim` must be 1, 2, or 3.
    pub fn new(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "supported dimensions are 1..=3");
        let mut dirs = [[0u32; BITS]; 3];

        // dimension 1: v_j = 2^{31-j}
        for j in 0..BITS {
            dirs[0][j] = 1u32 << (31 - j);
        }

        // dimension 2: polynomial x+1 (degree 1), m_1 = 1,
        // recurrence m_k = 2 m_{k-1} XOR m_{k-1}
        {
            let mut m = [0u64; BITS + 1];
            m[1] = 1;
            for k in 2..=BITS {
                m[k] = (2 * m[k - 1]) ^ m[k - 1];
            }
            for j in 1..=BITS {
                dirs[1][j - 1] = (m[j] << (32 - j)) as u32;
            }
        }

        // dimension 3: polynomial x²+x+1 (degree 2), m_1 = 1, m_2 = 3,
        // recurrence m_k = 2 m_{k-1} XOR 4 m_{k-2} XOR m_{k-2}
        {
            let mut m = [0u64; BITS + 1];
            m[1] = 1;
            m[2] = 3;
            for k in 3..=BITS {
                m[k] = (2 * m[k - 1]) ^ (4 * m[k - 2]) ^ m[k - 2];
            }
            for j in 1..=BITS {
                dirs[2][j - 1] = (m[j] << (32 - j)) as u32;
            }
        }

        Sobol { dim, index: 0, state: [0; 3], dirs }
    }

    /// Next point in (0,1)^dim. The all-zero first element of the raw
    /// sequence is skipped so every returned coordinate is strictly inside
    /// (0,1).
    pub fn next_point(&mut self) -> Vec<f64> {
        // Gray-code step: flip the direction indexed by the lowest zero bit
        // of the running index.
        let c = (!self.index).trailing_zeros() as usize;
        self.index += 1;
        let mut out = Vec::with_capacity(self.dim);
        for d in 0..self.dim {
            self.state[d] ^= self.dirs[d][c];
            out.push(self.state[d] as f64 / 4294967296.0 + 0.5 / 4294967296.0);
        }
        out
    }
}
