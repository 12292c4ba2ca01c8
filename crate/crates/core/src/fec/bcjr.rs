use super::rsc::{NUM_STATES, TRELLIS};
use crate::{Error, Result};

/// A-priori LLRs are saturated to this magnitude before decoding.
pub const LLR_SATURATION: f64 = 60.0;

/// A-posteriori output of [`bcjr_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    /// One LLR per information bit.
    pub app_info: Vec<f64>,
    /// One LLR per coded bit, in the interlaced codeword order.
    pub app_coded: Vec<f64>,
}

impl BcjrOutput {
    pub fn hard_info(&self) -> Vec<u8> {
        self.app_info
            .iter()
            .map(|&l| super::hard_decision(l))
            .collect()
    }
}

/// Jacobian logarithm `ln(e^a + e^b)`.
#[inline]
fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Log-MAP BCJR over the unterminated (5/7) trellis.
///
/// `a_priori` holds one LLR per coded bit in codeword order. The forward
/// recursion starts in the zero state; the backward recursion starts from a
/// uniform distribution because the trellis is not terminated.
pub fn bcjr_decode(a_priori: &[f64]) -> Result<BcjrOutput> {
    if a_priori.is_empty() || !a_priori.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "a-priori length must be a positive even number, got {}",
            a_priori.len()
        )));
    }
    if let Some(pos) = a_priori.iter().position(|l| !l.is_finite()) {
        return Err(Error::NonFiniteLlr(pos));
    }
    let k_len = a_priori.len() / 2;
    let sat = |l: f64| l.clamp(-LLR_SATURATION, LLR_SATURATION);

    // gamma[k][s][u] = (x_u L_u + x_p L_p) / 2 with bipolar x
    let bipolar = |b: u8| if b == 1 { 1.0 } else { -1.0 };
    let gamma: Vec<[[f64; 2]; NUM_STATES]> = (0..k_len)
        .map(|k| {
            let lu = sat(a_priori[2 * k]);
            let lp = sat(a_priori[2 * k + 1]);
            let mut g = [[0.0; 2]; NUM_STATES];
            for (s, row) in g.iter_mut().enumerate() {
                for (u, cell) in row.iter_mut().enumerate() {
                    let p = TRELLIS.parity[s][u];
                    *cell = 0.5 * (bipolar(u as u8) * lu + bipolar(p) * lp);
                }
            }
            g
        })
        .collect();

    let mut alpha = vec![[f64::NEG_INFINITY; NUM_STATES]; k_len + 1];
    alpha[0][0] = 0.0;
    for k in 0..k_len {
        let mut next = [f64::NEG_INFINITY; NUM_STATES];
        for s in 0..NUM_STATES {
            if alpha[k][s] == f64::NEG_INFINITY {
                continue;
            }
            for (&ns, g) in TRELLIS.next[s].iter().zip(&gamma[k][s]) {
                let ns = ns as usize;
                next[ns] = max_star(next[ns], alpha[k][s] + g);
            }
        }
        normalize(&mut next);
        alpha[k + 1] = next;
    }

    let mut beta = vec![[0.0; NUM_STATES]; k_len + 1];
    for k in (0..k_len).rev() {
        let mut cur = [f64::NEG_INFINITY; NUM_STATES];
        for (s, slot) in cur.iter_mut().enumerate() {
            for (&ns, g) in TRELLIS.next[s].iter().zip(&gamma[k][s]) {
                *slot = max_star(*slot, beta[k + 1][ns as usize] + g);
            }
        }
        normalize(&mut cur);
        beta[k] = cur;
    }

    let mut app_info = Vec::with_capacity(k_len);
    let mut app_coded = Vec::with_capacity(2 * k_len);
    for k in 0..k_len {
        let mut by_info = [f64::NEG_INFINITY; 2];
        let mut by_parity = [f64::NEG_INFINITY; 2];
        for s in 0..NUM_STATES {
            for u in 0..2 {
                let ns = TRELLIS.next[s][u] as usize;
                let metric = alpha[k][s] + gamma[k][s][u] + beta[k + 1][ns];
                by_info[u] = max_star(by_info[u], metric);
                let p = TRELLIS.parity[s][u] as usize;
                by_parity[p] = max_star(by_parity[p], metric);
            }
        }
        let info = by_info[1] - by_info[0];
        app_info.push(info);
        app_coded.push(info);
        app_coded.push(by_parity[1] - by_parity[0]);
    }

    Ok(BcjrOutput {
        app_info,
        app_coded,
    })
}

fn normalize(metrics: &mut [f64; NUM_STATES]) {
    let top = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.is_finite() {
        for m in metrics.iter_mut() {
            *m -= top;
        }
    }
}
