use mtf::tvd::{kkt_residual, objective, solve_tvd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Piecewise-linear increasing function stored as breakpoints plus one
/// `(slope, intercept)` pair per segment.
struct Pwl {
    knots: Vec<f64>,
    segs: Vec<(f64, f64)>,
}

impl Pwl {
    fn root(&self, v: f64) -> f64 {
        for (k, &(a, c)) in self.segs.iter().enumerate() {
            let right = self.knots.get(k).copied();
            let at_right = right.map(|x| a * x + c);
            if at_right.is_none_or(|w| w >= v) {
                return (v - c) / a;
            }
        }
        unreachable!()
    }

    fn clamp(&self, lo: f64, hi: f64, lam: f64) -> Pwl {
        let mut knots = vec![lo];
        let mut segs = vec![(0.0, -lam)];
        let mut current = 0;
        // Segment containing `lo`.
        while current < self.knots.len() && self.knots[current] <= lo {
            current += 1;
        }
        segs.push(self.segs[current]);
        while current < self.knots.len() && self.knots[current] < hi {
            knots.push(self.knots[current]);
            current += 1;
            segs.push(self.segs[current]);
        }
        knots.push(hi);
        segs.push((0.0, lam));
        Pwl { knots, segs }
    }

    fn add_data(&mut self, y: f64) {
        for s in &mut self.segs {
            s.0 += 1.0;
            s.1 -= y;
        }
    }
}

/// Exact fused lasso by the derivative-message dynamic program.
fn dp_tvd(y: &[f64], lam: f64) -> Vec<f64> {
    let n = y.len();
    let mut msg = Pwl {
        knots: vec![],
        segs: vec![(1.0, -y[0])],
    };
    let mut lows = Vec::with_capacity(n);
    let mut highs = Vec::with_capacity(n);
    for t in 1..n {
        let lo = msg.root(-lam);
        let hi = msg.root(lam);
        lows.push(lo);
        highs.push(hi);
        msg = msg.clamp(lo, hi, lam);
        msg.add_data(y[t]);
    }
    let mut theta = vec![0.0; n];
    theta[n - 1] = msg.root(0.0);
    for t in (0..n - 1).rev() {
        theta[t] = theta[t + 1].clamp(lows[t], highs[t]);
    }
    theta
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

#[test]
fn dp_oracle_sanity() {
    let t = dp_tvd(&[0.0, 4.0], 1.0);
    assert!((t[0] - 1.0).abs() < 1e-12 && (t[1] - 3.0).abs() < 1e-12);
}

#[test]
fn agrees_with_dynamic_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..300 {
        let n = rng.random_range(1..=200);
        let mut y = gaussian(&mut rng, n);
        if rng.random_bool(0.3) {
            // Piecewise constant truth with a few jumps.
            let mut level = 0.0;
            for (t, v) in y.iter_mut().enumerate() {
                if t % 37 == 0 {
                    level = rng.random_range(-4.0..4.0);
                }
                *v += level;
            }
        }
        let lam = 10f64.powf(rng.random_range(-3.0..2.0));
        let a = solve_tvd(&y, lam).unwrap();
        let b = dp_tvd(&y, lam);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-8, "n={n} lam={lam}: {u} vs {v}");
        }
        assert!(kkt_residual(&y, lam, &a).unwrap() <= 1e-8);
    }
}

#[test]
fn perturbations_do_not_improve() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = rng.random_range(2..60);
        let y = gaussian(&mut rng, n);
        let lam = rng.random_range(0.05..3.0);
        let theta = solve_tvd(&y, lam).unwrap();
        let best = objective(&y, lam, &theta);
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.random_range(-6.0..0.0));
            let pert: Vec<f64> = theta
                .iter()
                .map(|v| v + scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            assert!(objective(&y, lam, &pert) >= best - 1e-12);
        }
    }
}

#[test]
fn identity_fails_kkt() {
    let y = [0.0, 1.0, 0.0, 2.0];
    assert!(kkt_residual(&y, 0.5, &y).unwrap() > 0.0);
}
