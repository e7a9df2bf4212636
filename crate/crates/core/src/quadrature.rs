//! Gauss-Legendre nodes and Hermite (harmonic-oscillator) functions used by
//! the continuous-outcome Fisher information integrals.

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Abramowitz & Stegun 22.16.6).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Oscillator eigenfunctions psi_n(x) = pi^{-1/4} (2^n n!)^{-1/2} H_n(x)
/// e^{-x^2/2} for n = 0..=nmax, by the stable three-term recurrence.
/// Convention x = (a + a^dag)/sqrt(2), vacuum variance 1/2.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(nmax + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    psi.push(psi0);
    if nmax >= 1 {
        psi.push(std::f64::consts::SQRT_2 * x * psi0);
    }
    for n in 2..=nmax {
        let nf = n as f64;
        let v = x * (2.0 / nf).sqrt() * psi[n - 1] - ((nf - 1.0) / nf).sqrt() * psi[n - 2];
        psi.push(v);
    }
    psi
}
