//! Exact mutual informations on small discrete tracking problems.
//!
//! A toy lists a distribution over whole trajectories `Y`, the class `h(Y)` of
//! each, and a measurement channel `p(z | Y)`. Since `h` is a function of `Y`,
//! `I(h; z) <= I(Y; z)` must hold.

use serde::{Deserialize, Serialize};

use super::GainError;

/// Joint states enumerated at most.
pub const ENUMERATION_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpiToy {
    /// Probability of each trajectory.
    pub p_y: Vec<f64>,
    /// Class index of each trajectory.
    pub class_of: Vec<usize>,
    /// `channel[y][z] = p(z | y)`.
    pub channel: Vec<Vec<f64>>,
}

fn plogq(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).ln()
    } else {
        0.0
    }
}

/// Returns `(I(Y; z), I(h; z))` in nats.
pub fn dpi_check(toy: &DpiToy) -> Result<(f64, f64), GainError> {
    let ny = toy.p_y.len();
    if toy.class_of.len() != ny || toy.channel.len() != ny {
        return Err(GainError::InvalidToy(
            "p_y, class_of and channel must have one entry per trajectory".into(),
        ));
    }
    let nz = toy.channel.first().map_or(0, Vec::len);
    if toy.channel.iter().any(|row| row.len() != nz) {
        return Err(GainError::InvalidToy("channel rows differ in length".into()));
    }
    let states = ny.saturating_mul(nz);
    if states > ENUMERATION_BUDGET {
        return Err(GainError::ToyTooLarge { states });
    }
    let nh = toy.class_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut p_z = vec![0.0; nz];
    let mut p_h = vec![0.0; nh];
    let mut p_hz = vec![vec![0.0; nz]; nh];
    for y in 0..ny {
        let h = toy.class_of[y];
        p_h[h] += toy.p_y[y];
        for z in 0..nz {
            let j = toy.p_y[y] * toy.channel[y][z];
            p_z[z] += j;
            p_hz[h][z] += j;
        }
    }
    let mut i_y = 0.0;
    for y in 0..ny {
        for z in 0..nz {
            let j = toy.p_y[y] * toy.channel[y][z];
            i_y += plogq(j, toy.p_y[y] * p_z[z]);
        }
    }
    let mut i_h = 0.0;
    for h in 0..nh {
        for z in 0..nz {
            i_h += plogq(p_hz[h][z], p_h[h] * p_z[z]);
        }
    }
    Ok((i_y.max(0.0), i_h.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_channel_has_no_information() {
        let toy = DpiToy {
            p_y: vec![0.2, 0.3, 0.5],
            class_of: vec![0, 1, 1],
            channel: vec![vec![0.4, 0.6]; 3],
        };
        let (iy, ih) = dpi_check(&toy).unwrap();
        assert!(iy.abs() < 1e-15 && ih.abs() < 1e-15);
    }

    #[test]
    fn identity_channel_gives_entropies() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let toy = DpiToy {
            p_y: p.to_vec(),
            class_of: vec![0, 0, 1, 1],
            channel: (0..4).map(|i| (0..4).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
        };
        let (iy, ih) = dpi_check(&toy).unwrap();
        let hy: f64 = -p.iter().map(|q| q * q.ln()).sum::<f64>();
        let hh = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        assert!((iy - hy).abs() < 1e-12);
        assert!((ih - hh).abs() < 1e-12);
        assert!(ih <= iy);
    }

    #[test]
    fn budget_is_enforced() {
        let toy = DpiToy {
            p_y: vec![1.0 / 4000.0; 4000],
            class_of: vec![0; 4000],
            channel: vec![vec![1.0 / 2501.0; 2501]; 4000],
        };
        assert!(matches!(dpi_check(&toy), Err(GainError::ToyTooLarge { .. })));
    }
}
