//! The three-literal clause evaluator (3CE): a five-parameter interaction
//! whose four class energies can be tailored so the seven satisfied states sit
//! at one common level while the single unsatisfied state is pushed higher.
//!
//! With spins s_i = 1 - 2 l_i and S = s_1 + s_2 + s_3 = 3 - 2k (k = number of
//! true literals), the energy of a class-k state is
//!
//! ```text
//! U(S) = A*S + B*(S^2 - 3)/2 - sqrt(D^2 + (E + F*S)^2)
//! ```
//!
//! The square root is the ground branch of a two-level field responser with
//! half-splitting D driven by the superposed field E + F*S. Tailoring means
//! choosing (A, E) for given (B, D, F) so that U1 = U2 = U3 and U0 exceeds
//! them by at least a required gap.

mod region;

pub use region::{scan_region, RegionCell, RegionGrid, ScanError, ScanSpec};

use thiserror::Error;

/// Relative (to D) residual tolerance for the tailoring equation.
pub const ROOT_TOL: f64 = 1e-12;
/// Relative (to D) tolerance on level degeneracy for an acceptable solution.
pub const LEVEL_TOL: f64 = 1e-9;
/// Default required gap between the unsatisfied and satisfied levels, in units of D.
pub const DEFAULT_GAP_MIN: f64 = 0.2;

/// The five interaction parameters of one clause evaluator.
///
/// `a` is the one-body bias, `b` the pairwise coupling, `d` the responser
/// half-splitting (d > 0), `e` the applied field and `f` the per-wire field
/// step, all in energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ce3Params {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Ce3Params {
    /// Responser level magnitude sqrt(D^2 + (E + F*S)^2) at total spin S.
    pub fn splitting(&self, s: i32) -> f64 {
        let x = self.e + self.f * f64::from(s);
        (self.d * self.d + x * x).sqrt()
    }

    /// Energy of a class-k state, k in {0,1,2,3}.
    pub fn level_energy(&self, k: usize) -> f64 {
        assert!(k < 4, "class index must be in 0..=3");
        let s = 3 - 2 * k as i32;
        let sf = f64::from(s);
        self.a * sf + self.b * (sf * sf - 3.0) * 0.5 - self.splitting(s)
    }

    /// All four class energies `[U0, U1, U2, U3]`.
    pub fn levels(&self) -> [f64; 4] {
        [
            self.level_energy(0),
            self.level_energy(1),
            self.level_energy(2),
            self.level_energy(3),
        ]
    }
}

/// A tailored parameter set: the satisfied classes 1..3 share `u_sat` and the
/// unsatisfied class sits at `u_unsat = u_sat + gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ce3Solution {
    pub params: Ce3Params,
    /// Common energy of classes 1, 2 and 3 (taken as U1).
    pub u_sat: f64,
    /// Energy of class 0.
    pub u_unsat: f64,
    /// u_unsat - u_sat.
    pub gap: f64,
    /// The minimum gap this solution was required to meet.
    pub gap_min: f64,
}

impl Ce3Solution {
    /// Degeneracy residual max(|U1-U2|, |U2-U3|), recomputed from the parameters.
    pub fn level_residual(&self) -> f64 {
        let [_, u1, u2, u3] = self.params.levels();
        (u1 - u2).abs().max((u2 - u3).abs())
    }

    /// True when the stored levels are consistent with the parameters, the
    /// satisfied classes are degenerate to `LEVEL_TOL * d`, and the gap meets
    /// its requirement.
    pub fn is_valid(&self) -> bool {
        let d = self.params.d;
        let [u0, u1, _, _] = self.params.levels();
        d > 0.0
            && self.level_residual() <= LEVEL_TOL * d
            && (self.u_sat - u1).abs() <= LEVEL_TOL * d
            && (self.u_unsat - u0).abs() <= LEVEL_TOL * d
            && (self.gap - (self.u_unsat - self.u_sat)).abs() <= LEVEL_TOL * d
            && self.gap >= self.gap_min
    }
}

/// Raised when no tailoring of (A, E) meets the gap requirement. This marks an
/// infeasible (B/D, F/D) point, not a fault.
#[derive(Debug, Clone, Error)]
#[error("no tailoring for b = {b}, d = {d}, f = {f} with gap >= {gap_min} ({roots} root(s) found, all rejected)")]
pub struct NoSolution {
    pub b: f64,
    pub d: f64,
    pub f: f64,
    pub gap_min: f64,
    /// Number of real roots of the tailoring equation that were located.
    pub roots: usize,
}

/// Root-search controls for the tailoring equation.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Half-width of the scan window around E = F; `None` picks a width wide
    /// enough to cover every root at the given (B, D, F).
    pub window: Option<f64>,
    /// Number of scan brackets across the window (rounded up to even).
    pub brackets: usize,
    /// Bisection iteration cap.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            window: None,
            brackets: 2048,
            max_iter: 200,
        }
    }
}

/// Residual of the tailoring condition U2 = U3 after A has been eliminated
/// via U1 = U2:
///
/// ```text
/// phi(E) = g(E+F) - 2 g(E-F) + g(E-3F) - 4B,   g(x) = sqrt(D^2 + x^2)
/// ```
///
/// This is the second difference of the strictly convex g over three points
/// spaced 2F, minus 4B; it is symmetric about E = F and tends to -4B at
/// +/- infinity.
pub fn tailoring_residual(b: f64, d: f64, f: f64, e: f64) -> f64 {
    let g = |x: f64| (d * d + x * x).sqrt();
    g(e + f) - 2.0 * g(e - f) + g(e - 3.0 * f) - 4.0 * b
}

fn default_window(b: f64, d: f64, f: f64) -> f64 {
    // All roots lie where the second difference is still of order 4B, a few
    // multiples of D/F away from E = F; this is generous at every grid point.
    let f_eff = f.abs().max(1e-9).min(1.0);
    (10.0 * (f.abs() + b.abs() + d) / f_eff).min(1e3 * d)
}

/// All real roots of the tailoring residual, in ascending order.
///
/// The scan grid is symmetric about E = F (including the point E = F itself,
/// where the residual attains its maximum) so tangent double roots at the
/// feasibility boundary are still detected. Roots are refined by bisection to
/// |phi| <= ROOT_TOL * d.
pub fn tailoring_roots(b: f64, d: f64, f: f64, opts: &SolveOptions) -> Vec<f64> {
    let phi = |e: f64| tailoring_residual(b, d, f, e);
    let atol = ROOT_TOL * d;
    let w = opts.window.unwrap_or_else(|| default_window(b, d, f));
    let half = (opts.brackets.max(2) + 1) / 2;
    let step = w / half as f64;

    let xs: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|k| f + k as f64 * step)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();

    let mut roots = Vec::new();
    for (&x, &v) in xs.iter().zip(&vals) {
        if v.abs() <= atol {
            roots.push(x);
        }
    }
    for i in 0..xs.len() - 1 {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa.abs() <= atol || fb.abs() <= atol || fa.signum() == fb.signum() {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (xs[i], xs[i + 1], fa);
        let mut root = 0.5 * (lo + hi);
        for _ in 0..opts.max_iter {
            root = 0.5 * (lo + hi);
            let fm = phi(root);
            if fm.abs() <= atol {
                break;
            }
            if fm.signum() == flo.signum() {
                lo = root;
                flo = fm;
            } else {
                hi = root;
            }
        }
        roots.push(root);
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= step * 1e-9 + atol);
    roots
}

/// Build the tailored solution for a located root E: A follows from U1 = U2,
/// the levels and gap from the closed form.
fn solution_at_root(b: f64, d: f64, f: f64, e: f64, gap_min: f64) -> Ce3Solution {
    let g = |x: f64| (d * d + x * x).sqrt();
    let a = 0.5 * (g(e + f) - g(e - f));
    let params = Ce3Params { a, b, d, e, f };
    let [u0, u1, _, _] = params.levels();
    Ce3Solution {
        params,
        u_sat: u1,
        u_unsat: u0,
        gap: u0 - u1,
        gap_min,
    }
}

/// Solve the tailoring conditions for (A, E) given (B, D, F), keeping only
/// solutions whose gap meets `gap_min`. Solutions are returned in ascending
/// order of E; roots come in a pair mirrored about E = F and both are
/// evaluated independently.
pub fn solve(b: f64, d: f64, f: f64, gap_min: f64) -> Result<Vec<Ce3Solution>, NoSolution> {
    solve_with(b, d, f, gap_min, &SolveOptions::default())
}

/// [`solve`] with explicit root-search controls.
pub fn solve_with(
    b: f64,
    d: f64,
    f: f64,
    gap_min: f64,
    opts: &SolveOptions,
) -> Result<Vec<Ce3Solution>, NoSolution> {
    assert!(d > 0.0, "responser half-splitting d must be positive");
    assert!(gap_min >= 0.0, "gap_min must be non-negative");
    let roots = tailoring_roots(b, d, f, opts);
    let sols: Vec<Ce3Solution> = roots
        .iter()
        .map(|&e| solution_at_root(b, d, f, e, gap_min))
        .filter(|s| s.gap >= gap_min)
        .collect();
    if sols.is_empty() {
        Err(NoSolution {
            b,
            d,
            f,
            gap_min,
            roots: roots.len(),
        })
    } else {
        Ok(sols)
    }
}

/// Largest B (given D and F) for which the tailoring equation can have a root:
/// the maximum of the second difference over E, attained at E = F, is
/// 2 (sqrt(D^2 + 4 F^2) - D), so feasibility requires 4B below it.
pub fn max_feasible_b(d: f64, f: f64) -> f64 {
    0.5 * ((d * d + 4.0 * f * f).sqrt() - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen oracle values for b = 0.3, d = 1, f = 1, computed by bisection on
    // the tailoring residual at 50-digit precision and rounded to f64.
    pub(crate) const REF_E: f64 = 2.458_996_394_492_894_4;
    pub(crate) const REF_A: f64 = 0.915_920_899_975_907_2;
    pub(crate) const REF_U_SAT: f64 = -2.984_725_716_552_135_7;
    pub(crate) const REF_U_UNSAT: f64 = -1.902_069_877_284_533_5;
    pub(crate) const REF_GAP: f64 = 1.082_655_839_267_602_2;
    const REF_MIRROR_GAP: f64 = -1.025_574_541_408_133_4;

    /// Independent slow oracle: dense scan of the residual plus bisection,
    /// structured differently from `tailoring_roots` (fixed window, linear
    /// scan, no dedup subtleties).
    fn oracle_roots(b: f64, d: f64, f: f64) -> Vec<f64> {
        let phi = |e: f64| tailoring_residual(b, d, f, e);
        let (lo, hi, step) = (-20.0f64, 20.0f64, 1e-3f64);
        let mut roots = Vec::new();
        let mut x = lo;
        let mut fx = phi(x);
        while x < hi {
            let y = x + step;
            let fy = phi(y);
            if fx == 0.0 {
                roots.push(x);
            } else if fx * fy < 0.0 {
                let (mut a, mut b_) = (x, y);
                for _ in 0..200 {
                    let m = 0.5 * (a + b_);
                    if phi(a) * phi(m) <= 0.0 {
                        b_ = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b_));
            }
            x = y;
            fx = fy;
        }
        roots
    }

    #[test]
    fn level_energy_closed_form() {
        // Zero couplings: every class sits at -sqrt(D^2) = -1.
        let p = Ce3Params { a: 0.0, b: 0.0, d: 1.0, e: 0.0, f: 0.0 };
        for k in 0..4 {
            assert_eq!(p.level_energy(k), -1.0);
        }
        // Pure one-body bias: U0 = 3A - 1, U3 = -3A - 1.
        let p = Ce3Params { a: 1.0, b: 0.0, d: 1.0, e: 0.0, f: 0.0 };
        assert_eq!(p.level_energy(0), 2.0);
        assert_eq!(p.level_energy(3), -4.0);
    }

    #[test]
    fn level_energy_at_reference_solution() {
        let p = Ce3Params { a: REF_A, b: 0.3, d: 1.0, e: REF_E, f: 1.0 };
        let [u0, u1, u2, u3] = p.levels();
        assert!((u0 - REF_U_UNSAT).abs() < 1e-12);
        assert!((u1 - REF_U_SAT).abs() < 1e-12);
        assert!((u2 - REF_U_SAT).abs() < 1e-12);
        assert!((u3 - REF_U_SAT).abs() < 1e-12);
    }

    #[test]
    fn solve_reference_point() {
        let sols = solve(0.3, 1.0, 1.0, 0.2).unwrap();
        assert_eq!(sols.len(), 1, "the mirror root fails the gap test");
        let s = &sols[0];
        assert!((s.params.e - REF_E).abs() < 1e-10);
        assert!((s.params.a - REF_A).abs() < 1e-12);
        assert!((s.gap - REF_GAP).abs() < 1e-12);
        assert!(s.is_valid());
        assert!(s.level_residual() <= ROOT_TOL);
    }

    #[test]
    fn solve_agrees_with_dense_scan_oracle() {
        let roots = tailoring_roots(0.3, 1.0, 1.0, &SolveOptions::default());
        let expect = oracle_roots(0.3, 1.0, 1.0);
        assert_eq!(roots.len(), 2);
        assert_eq!(expect.len(), 2);
        for (r, e) in roots.iter().zip(&expect) {
            assert!((r - e).abs() < 1e-9, "root {r} vs oracle {e}");
        }
        // The mirror root's gap is negative and rejected.
        let mirror = solution_at_root(0.3, 1.0, 1.0, roots[0], 0.2);
        assert!((mirror.gap - REF_MIRROR_GAP).abs() < 1e-9);
        assert!(mirror.gap < 0.2);
    }

    #[test]
    fn zero_coupling_is_infeasible() {
        // The residual is a strictly positive second difference for B = 0.
        let err = solve(0.0, 1.0, 1.0, 0.2).unwrap_err();
        assert_eq!(err.roots, 0);
    }

    #[test]
    fn coupling_beyond_second_difference_max_is_infeasible() {
        // Max of the second difference is 2 (sqrt(5) - 1) ~ 2.472 < 4B = 2.8.
        assert!((max_feasible_b(1.0, 1.0) - 0.5 * (5.0f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(solve(0.7, 1.0, 1.0, 0.2).is_err());
        assert!(solve(0.7, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn boundary_tangency_is_detected() {
        // At B exactly on the boundary the two roots collapse at E = F, which
        // is a scan grid point; just below, both roots must be found.
        let f = 1.0;
        let b = max_feasible_b(1.0, f) * (1.0 - 1e-6);
        let roots = tailoring_roots(b, 1.0, f, &SolveOptions::default());
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(tailoring_residual(b, 1.0, f, *r).abs() <= ROOT_TOL);
        }
    }

    #[test]
    fn solve_scales_with_d() {
        // Everything is homogeneous of degree one in energy: scaling
        // (B, D, F) by c scales (A, E, gap) by c.
        let c = 2.5;
        let base = &solve(0.3, 1.0, 1.0, 0.2).unwrap()[0];
        let scaled = &solve(0.3 * c, c, c, 0.2 * c).unwrap()[0];
        assert!((scaled.params.a - c * base.params.a).abs() < 1e-9);
        assert!((scaled.params.e - c * base.params.e).abs() < 1e-9);
        assert!((scaled.gap - c * base.gap).abs() < 1e-9);
    }
}
