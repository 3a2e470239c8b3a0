//! Physical constants (SI, CODATA 2018 exact values where defined).

pub const HBAR: f64 = 1.054_571_817e-34;
pub const C: f64 = 299_792_458.0;
pub const K_B: f64 = 1.380_649e-23;

/// Bose occupation of an oscillator of angular frequency `omega` at
/// temperature `t`; equals sinh²(r_T) with tanh r_T = exp(−ħω/2k_BT).
pub fn thermal_occupation(omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (K_B * t);
    1.0 / x.exp_m1()
}
