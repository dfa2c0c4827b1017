//! Standard bivariate normal upper orthant probabilities.
//!
//! Port of the Drezner–Wesolowsky / Genz `BVNU` routine: Gauss–Legendre
//! quadrature of the Plackett identity for moderate correlation, an
//! asymptotic expansion near `|r| = 1`. Absolute accuracy is about 1e-15.

use std::f64::consts::PI;

use statrs::function::erf::erfc;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

const W6: [f64; 3] = [0.1713244923791705, 0.3607615730481384, 0.4679139345726904];
const X6: [f64; 3] = [-0.9324695142031522, -0.6612093864662647, -0.2386191860831970];
const W12: [f64; 6] = [
    0.04717533638651177,
    0.1069393259953183,
    0.1600783285433464,
    0.2031674267230659,
    0.2334925365383547,
    0.2491470458134029,
];
const X12: [f64; 6] = [
    -0.9815606342467191,
    -0.9041172563704750,
    -0.7699026741943050,
    -0.5873179542866171,
    -0.3678314989981802,
    -0.1252334085114692,
];
const W20: [f64; 10] = [
    0.01761400713915212,
    0.04060142980038694,
    0.06267204833410906,
    0.08327674157670475,
    0.1019301198172404,
    0.1181945319615184,
    0.1316886384491766,
    0.1420961093183821,
    0.1491729864726037,
    0.1527533871307259,
];
const X20: [f64; 10] = [
    -0.9931285991850949,
    -0.9639719272779138,
    -0.9122344282513259,
    -0.8391169718222188,
    -0.7463319064601508,
    -0.6360536807265150,
    -0.5108670019508271,
    -0.3737060887154196,
    -0.2277858511416451,
    -0.07652652113349733,
];

/// `P(X > h, Y > k)` for standard normals with correlation `r`.
pub fn bvnu(h: f64, k: f64, r: f64) -> f64 {
    let r = r.clamp(-1.0, 1.0);
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&W6, &X6)
    } else if r.abs() < 0.75 {
        (&W12, &X12)
    } else {
        (&W20, &X20)
    };
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for (wi, xi) in w.iter().zip(x) {
            for s in [1.0, -1.0] {
                let sn = (asr * (s * xi + 1.0) / 2.0).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return (bvn * asr / (4.0 * PI) + norm_cdf(-h) * norm_cdf(-k)).clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a2 = (1.0 - r) * (1.0 + r);
        let mut a = a2.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / a2 + hk) / 2.0).exp()
            * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a2 * a2 / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * (2.0 * PI).sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (wi, xi) in w.iter().zip(x) {
            for s in [1.0, -1.0] {
                let xs = (a * (s * xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a
                        * wi
                        * asr.exp()
                        * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    let out = if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        let mut v = -bvn;
        if k > h {
            if h < 0.0 {
                v += norm_cdf(k) - norm_cdf(h);
            } else {
                v += norm_cdf(-h) - norm_cdf(-k);
            }
        }
        v
    };
    out.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_closed_form() {
        for r in [-0.999, -0.95, -0.6, -0.2, 0.0, 0.1, 0.5, 0.8, 0.93, 0.99, 0.9999] {
            let exact = 0.25 + f64::asin(r) / (2.0 * PI);
            assert!((bvnu(0.0, 0.0, r) - exact).abs() < 1e-14, "r={r}");
        }
    }

    #[test]
    fn independence_factorizes() {
        for (h, k) in [(0.3, -1.2), (-2.0, 0.7), (1.5, 1.5)] {
            let v = bvnu(h, k, 0.0);
            assert!((v - norm_cdf(-h) * norm_cdf(-k)).abs() < 1e-15);
        }
    }

    #[test]
    fn perfect_correlation_limits() {
        assert!((bvnu(0.4, -0.3, 1.0) - norm_cdf(-0.4)).abs() < 1e-15);
        // r = -1: P(X > h, -X > k) = P(h < X < -k).
        let v = bvnu(-0.5, -0.2, -1.0);
        assert!((v - (norm_cdf(0.2) - norm_cdf(-0.5))).abs() < 1e-15);
        assert_eq!(bvnu(0.5, 0.5, -1.0), 0.0);
    }

    /// Orthant probability via one-dimensional quadrature of the conditional CDF.
    fn quadrature(h: f64, k: f64, r: f64) -> f64 {
        let n = 200_000;
        let (lo, hi) = (h, 9.0_f64.max(h + 1.0));
        let dx = (hi - lo) / n as f64;
        let s = (1.0 - r * r).sqrt();
        (0..n)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * dx;
                let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                pdf * norm_cdf((r * x - k) / s) * dx
            })
            .sum()
    }

    #[test]
    fn matches_quadrature_across_branches() {
        for &(h, k, r) in &[
            (0.5, -0.3, 0.2),
            (-1.1, 0.4, -0.5),
            (0.9, 1.3, 0.7),
            (-0.2, -0.8, 0.95),
            (1.0, -1.5, -0.96),
            (0.3, 0.1, -0.99),
            (-2.0, 2.5, 0.97),
        ] {
            let a = bvnu(h, k, r);
            let b = quadrature(h, k, r);
            assert!((a - b).abs() < 1e-8, "h={h} k={k} r={r}: {a} vs {b}");
        }
    }
}
