//! Dormand-Prince 5(4) tableau with the continuous extension of order 4.

use super::chart::{Vec6, DIM};

// The field is autonomous, so the nodes c_i are not needed.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of one trial step.
pub(crate) struct Trial {
    pub y_new: Vec6,
    /// Field at `y_new`; reused as the first stage of the next step.
    pub k7: Vec6,
    /// Scaled RMS error estimate; accept when `<= 1`.
    pub err: f64,
    pub dense: [Vec6; 5],
}

fn axpy(y: &Vec6, h: f64, terms: &[(f64, &Vec6)]) -> Vec6 {
    let mut out = *y;
    for i in 0..DIM {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

pub(crate) fn rms_norm(v: &Vec6, scale: &Vec6) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b).powi(2)).sum();
    (s / DIM as f64).sqrt()
}

pub(crate) fn trial_step<Fn6: Fn(&Vec6) -> Vec6>(
    field: &Fn6,
    y: &Vec6,
    k1: &Vec6,
    h: f64,
    rtol: f64,
    atol: f64,
) -> Trial {
    let k2 = field(&axpy(y, h, &[(A21, k1)]));
    let k3 = field(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = field(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = field(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = field(&y_new);

    let mut err_vec = [0.0; DIM];
    let mut scale = [0.0; DIM];
    for i in 0..DIM {
        err_vec[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        scale[i] = atol + rtol * y[i].abs().max(y_new[i].abs());
    }
    let err = rms_norm(&err_vec, &scale);

    let mut dense = [[0.0; DIM]; 5];
    for i in 0..DIM {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        dense[0][i] = y[i];
        dense[1][i] = ydiff;
        dense[2][i] = bspl;
        dense[3][i] = ydiff - h * k7[i] - bspl;
        dense[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Trial {
        y_new,
        k7,
        err,
        dense,
    }
}

/// Continuous extension at `theta in [0, 1]`.
pub(crate) fn interpolate(dense: &[Vec6; 5], theta: f64) -> Vec6 {
    let t1 = 1.0 - theta;
    let mut out = [0.0; DIM];
    for i in 0..DIM {
        out[i] = dense[0][i]
            + theta
                * (dense[1][i]
                    + t1 * (dense[2][i] + theta * (dense[3][i] + t1 * dense[4][i])));
    }
    out
}

/// Initial step heuristic: balances `|y| / |y'|` against a curvature estimate.
pub(crate) fn initial_step<Fn6: Fn(&Vec6) -> Vec6>(
    field: &Fn6,
    y: &Vec6,
    k1: &Vec6,
    dir: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
) -> f64 {
    let mut scale = [0.0; DIM];
    for i in 0..DIM {
        scale[i] = atol + rtol * y[i].abs();
    }
    let d0 = rms_norm(y, &scale);
    let d1 = rms_norm(k1, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(max_step);
    let y1 = axpy(y, dir * h0, &[(1.0, k1)]);
    let k2 = field(&y1);
    let mut diff = [0.0; DIM];
    for i in 0..DIM {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    let h = (100.0 * h0).min(h1).min(max_step);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1e-6f64.min(max_step)
    }
}
