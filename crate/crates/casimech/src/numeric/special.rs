use num_complex::Complex64;

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (e^z - 1)/z, evaluated by its Taylor series near the origin.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..30 {
            sum += term;
            term *= z / (k as f64 + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Finite part of 1/(4 sinh²(a/2)), i.e. the value with the 1/a² pole removed.
///
/// Uses the Bernoulli expansion for small arguments, where the direct
/// subtraction would cancel catastrophically.
pub fn inv_sinh2_finite(a: f64) -> f64 {
    if a.abs() < 1.0 {
        let a2 = a * a;
        let mut pow = 1.0;
        let mut fact = 2.0; // (2k)!
        let mut sum = 0.0;
        for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k = (i + 1) as f64;
            sum -= b * (2.0 * k - 1.0) * pow / fact;
            pow *= a2;
            fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        }
        sum
    } else {
        let s = (0.5 * a).sinh();
        0.25 / (s * s) - 1.0 / (a * a)
    }
}
