//! Spacing-calibration tables and the critical-coupling search.
//!
//! The effective damping `β(d)` is formed from shape-preserving
//! (Fritsch-Carlson monotone piecewise-cubic) interpolants of each rate
//! column; overshooting interpolants could fabricate spurious roots
//! between samples.

use super::FitError;

/// One calibration row at lateral spacing `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub d_mm: f64,
    pub f_c_ghz: f64,
    pub kappa_l_mhz: f64,
    pub kappa_r_mhz: f64,
    pub beta0_mhz: f64,
}

impl CalibrationRow {
    /// Effective damping of this row (MHz).
    pub fn beta_mhz(&self) -> f64 {
        self.beta0_mhz + self.kappa_l_mhz / 2.0 - self.kappa_r_mhz / 2.0
    }
}

/// Calibration table over lateral spacing, sorted by `d` on construction.
/// Row order of the input does not matter; duplicate spacings and
/// negative rates are rejected with every violation listed.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    rows: Vec<CalibrationRow>,
}

impl CalibrationTable {
    pub fn new(mut rows: Vec<CalibrationRow>) -> Result<Self, FitError> {
        let mut violations = Vec::new();
        if rows.len() < 2 {
            violations.push(format!("need at least 2 rows, got {}", rows.len()));
        }
        for (i, r) in rows.iter().enumerate() {
            for (name, v) in [
                ("d", r.d_mm),
                ("f_c", r.f_c_ghz),
                ("kappa_cL", r.kappa_l_mhz),
                ("kappa_cR", r.kappa_r_mhz),
                ("beta0", r.beta0_mhz),
            ] {
                if !v.is_finite() {
                    violations.push(format!("row {i}: non-finite {name}"));
                }
            }
            if r.kappa_l_mhz < 0.0 {
                violations.push(format!("row {i}: negative kappa_cL = {}", r.kappa_l_mhz));
            }
            if r.kappa_r_mhz < 0.0 {
                violations.push(format!("row {i}: negative kappa_cR = {}", r.kappa_r_mhz));
            }
            if r.beta0_mhz < 0.0 {
                violations.push(format!("row {i}: negative beta0 = {}", r.beta0_mhz));
            }
        }
        rows.sort_by(|a, b| a.d_mm.partial_cmp(&b.d_mm).unwrap());
        for w in rows.windows(2) {
            if w[0].d_mm == w[1].d_mm {
                violations.push(format!("duplicate spacing d = {} mm", w[0].d_mm));
            }
        }
        if violations.is_empty() {
            Ok(Self { rows })
        } else {
            Err(FitError::InvalidTable { violations })
        }
    }

    pub fn rows(&self) -> &[CalibrationRow] {
        &self.rows
    }

    pub fn d_range_mm(&self) -> (f64, f64) {
        (self.rows[0].d_mm, self.rows[self.rows.len() - 1].d_mm)
    }

    fn column(&self, pick: impl Fn(&CalibrationRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }

    /// Monotone piecewise-cubic interpolants of the four value columns.
    pub fn interpolants(&self) -> TableInterpolants {
        let d = self.column(|r| r.d_mm);
        TableInterpolants {
            f_c: Pchip::new(&d, &self.column(|r| r.f_c_ghz)),
            kappa_l: Pchip::new(&d, &self.column(|r| r.kappa_l_mhz)),
            kappa_r: Pchip::new(&d, &self.column(|r| r.kappa_r_mhz)),
            beta0: Pchip::new(&d, &self.column(|r| r.beta0_mhz)),
        }
    }
}

/// Interpolated view of a calibration table.
#[derive(Debug, Clone)]
pub struct TableInterpolants {
    pub f_c: Pchip,
    pub kappa_l: Pchip,
    pub kappa_r: Pchip,
    pub beta0: Pchip,
}

impl TableInterpolants {
    /// Interpolated effective damping at spacing `d` (MHz).
    pub fn beta_mhz(&self, d_mm: f64) -> f64 {
        self.beta0.eval(d_mm) + self.kappa_l.eval(d_mm) / 2.0 - self.kappa_r.eval(d_mm) / 2.0
    }
}

/// Fritsch-Carlson shape-preserving piecewise cubic Hermite interpolant.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = secant[0];
            slope[1] = secant[0];
        } else {
            for i in 1..n - 1 {
                if secant[i - 1] * secant[i] <= 0.0 {
                    slope[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
                }
            }
            slope[0] = Self::end_slope(h[0], h[1], secant[0], secant[1]);
            slope[n - 1] = Self::end_slope(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
        }
    }

    fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
        let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if d * s0 <= 0.0 {
            0.0
        } else if s0 * s1 < 0.0 && d.abs() > 3.0 * s0.abs() {
            3.0 * s0
        } else {
            d
        }
    }

    /// Evaluate at `x`, which must lie inside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i]
            + h10 * h * self.slope[i]
            + h01 * self.y[i + 1]
            + h11 * h * self.slope[i + 1]
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

/// One critical-coupling condition: the root of `β(d)` and the
/// sign-change bracket it was isolated in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSpacing {
    pub d_mm: f64,
    pub bracket_mm: (f64, f64),
}

/// Result of [`find_critical_spacing`]: every root found plus the
/// location of the smallest `|β|` as a diagnostic when no sign change
/// exists.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSearch {
    pub roots: Vec<CriticalSpacing>,
    pub min_abs_beta: (f64, f64),
}

/// Locate every critical-coupling spacing: roots of the interpolated
/// `β(d) = β0(d) + κ_cL(d)/2 − κ_cR(d)/2`, isolated by scanning 64
/// subsamples per table interval and polished by bisection to
/// `|β| < 1e−6 MHz`.
pub fn find_critical_spacing(table: &CalibrationTable) -> Result<CriticalSearch, FitError> {
    if table.rows().len() < 4 {
        return Err(FitError::InsufficientData {
            need: 4,
            got: table.rows().len(),
        });
    }
    let interp = table.interpolants();
    let beta = |d: f64| interp.beta_mhz(d);

    let mut roots = Vec::new();
    let mut min_abs = (table.rows()[0].d_mm, beta(table.rows()[0].d_mm).abs());
    let subdivisions = 64;

    let rows = table.rows();
    for w in rows.windows(2) {
        let (lo, hi) = (w[0].d_mm, w[1].d_mm);
        let mut prev_d = lo;
        let mut prev_b = beta(lo);
        for k in 1..=subdivisions {
            let d = lo + (hi - lo) * k as f64 / subdivisions as f64;
            let b = beta(d);
            if b.abs() < min_abs.1 {
                min_abs = (d, b.abs());
            }
            if prev_b == 0.0 {
                push_root(&mut roots, prev_d, (prev_d, prev_d));
            } else if prev_b * b < 0.0 {
                let root = bisect(&beta, prev_d, d);
                push_root(&mut roots, root, (prev_d, d));
            }
            prev_d = d;
            prev_b = b;
        }
        if prev_b == 0.0 {
            push_root(&mut roots, prev_d, (prev_d, prev_d));
        }
        if prev_b.abs() < min_abs.1 {
            min_abs = (prev_d, prev_b.abs());
        }
    }

    Ok(CriticalSearch {
        roots,
        min_abs_beta: min_abs,
    })
}

fn push_root(roots: &mut Vec<CriticalSpacing>, d: f64, bracket: (f64, f64)) {
    if roots
        .iter()
        .all(|r| (r.d_mm - d).abs() > 1e-9 * d.abs().max(1.0))
    {
        roots.push(CriticalSpacing {
            d_mm: d,
            bracket_mm: bracket,
        });
    }
}

fn bisect(beta: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut b_lo = beta(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let b_mid = beta(mid);
        if b_mid.abs() < 1e-6 {
            return mid;
        }
        if b_lo * b_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            b_lo = b_mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(d: f64, kl: f64, kr: f64) -> CalibrationRow {
        CalibrationRow {
            d_mm: d,
            f_c_ghz: 6.2,
            kappa_l_mhz: kl,
            kappa_r_mhz: kr,
            beta0_mhz: 17.0,
        }
    }

    fn synthetic_rows(n: usize, d_lo: f64, d_hi: f64) -> Vec<CalibrationRow> {
        crate::sweep::engineered_calibration_table(n, d_lo, d_hi)
            .rows()
            .to_vec()
    }

    #[test]
    fn table_sorts_rows_and_reversal_is_invariant() {
        let mut rows = synthetic_rows(24, 4.60, 6.90);
        let table = CalibrationTable::new(rows.clone()).unwrap();
        rows.reverse();
        let reversed = CalibrationTable::new(rows).unwrap();
        assert_eq!(table, reversed);
        let a = find_critical_spacing(&table).unwrap();
        let b = find_critical_spacing(&reversed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_lists_all_violations() {
        let rows = vec![
            row(5.0, -1.0, 37.0),
            row(5.0, 37.0, -2.0),
            row(6.0, 37.0, 37.0),
        ];
        match CalibrationTable::new(rows) {
            Err(FitError::InvalidTable { violations }) => {
                assert!(violations.iter().any(|v| v.contains("kappa_cL")));
                assert!(violations.iter().any(|v| v.contains("kappa_cR")));
                assert!(violations.iter().any(|v| v.contains("duplicate")));
                assert_eq!(violations.len(), 3);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn pchip_is_monotone_between_monotone_nodes() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| (x * 0.7).exp()).collect();
        let p = Pchip::new(&x, &y);
        let mut last = p.eval(0.0);
        let mut t = 0.01;
        while t < 9.0 {
            let v = p.eval(t);
            assert!(v >= last - 1e-12, "non-monotone at {t}");
            last = v;
            t += 0.01;
        }
        // Node values reproduced exactly.
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(p.eval(*xi), *yi);
        }
    }

    #[test]
    fn finds_both_engineered_roots() {
        let table = CalibrationTable::new(synthetic_rows(24, 4.60, 6.90)).unwrap();
        let found = find_critical_spacing(&table).unwrap();
        assert_eq!(found.roots.len(), 2, "{found:?}");
        assert!(
            (found.roots[0].d_mm - 4.90).abs() < 0.01,
            "root 0 at {}",
            found.roots[0].d_mm
        );
        assert!(
            (found.roots[1].d_mm - 5.80).abs() < 0.01,
            "root 1 at {}",
            found.roots[1].d_mm
        );
        for r in &found.roots {
            assert!(r.bracket_mm.0 <= r.d_mm && r.d_mm <= r.bracket_mm.1);
        }
    }

    #[test]
    fn no_sign_change_reports_min_abs_beta() {
        let rows: Vec<CalibrationRow> = (0..8)
            .map(|i| row(4.0 + i as f64 * 0.2, 37.0, 37.0))
            .collect();
        let table = CalibrationTable::new(rows).unwrap();
        let found = find_critical_spacing(&table).unwrap();
        assert!(found.roots.is_empty());
        assert!((found.min_abs_beta.1 - 17.0).abs() < 1e-9);
    }

    #[test]
    fn root_on_grid_row_is_returned_exactly() {
        // Place beta = 0 exactly on a table row: kappa_R = 2*beta0 + kappa_L.
        let mut rows = synthetic_rows(12, 5.0, 5.5);
        rows.push(row(5.8, 37.0, 71.0)); // beta = 0 exactly
        rows.push(row(6.0, 37.0, 40.0));
        rows.push(row(6.2, 37.0, 36.0));
        let table = CalibrationTable::new(rows).unwrap();
        let found = find_critical_spacing(&table).unwrap();
        assert!(
            found.roots.iter().any(|r| r.d_mm == 5.8),
            "roots: {:?}",
            found.roots
        );
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let rows = vec![
            row(5.0, 37.0, 37.0),
            row(5.5, 37.0, 40.0),
            row(6.0, 37.0, 42.0),
        ];
        let table = CalibrationTable::new(rows).unwrap();
        assert!(matches!(
            find_critical_spacing(&table),
            Err(FitError::InsufficientData { need: 4, .. })
        ));
    }
}
