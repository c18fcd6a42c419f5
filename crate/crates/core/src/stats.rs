//! Welch two-sample t-tests between fake- and real-news spreaders.

use std::fmt;
use std::io::Write;

use crate::corpus::SpreaderClass;
use crate::error::{Error, Result};
use crate::features::{Feature, LabeledFeatureRow};
use crate::scalar::{mean, sample_variance, Scalar};

/// Relative tolerance of the incomplete beta continued fraction.
pub const BETA_CF_TOLERANCE: f64 = 1e-12;
pub const BETA_CF_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchT<T> {
    pub t: T,
    pub df: T,
}

/// Welch's unequal-variance t statistic for `mean(a) - mean(b)` and its
/// Welch–Satterthwaite degrees of freedom.
pub fn welch_t<T: Scalar>(a: &[T], b: &[T]) -> Result<WelchT<T>> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample value".into()));
    }
    let (ma, mb) = (mean(a).unwrap(), mean(b).unwrap());
    let va = sample_variance(a).unwrap() / T::from_count(a.len());
    let vb = sample_variance(b).unwrap() / T::from_count(b.len());
    let se2 = va + vb;
    if se2 <= T::zero() {
        return Err(Error::DegenerateSample(
            "both groups have zero variance".into(),
        ));
    }
    let t = (ma - mb) / se2.sqrt();
    let df =
        se2 * se2 / (va * va / T::from_count(a.len() - 1) + vb * vb / T::from_count(b.len() - 1));
    Ok(WelchT { t, df })
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` by the Lanczos approximation.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Continued fraction part of the incomplete beta (modified Lentz).
fn beta_cf<T: Scalar>(a: T, b: T, x: T) -> Result<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::lit(BETA_CF_TOLERANCE).max(T::epsilon());
    let clamp = |v: T| if v.abs() < tiny { tiny } else { v };

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = clamp(one - qab * x / qap).recip();
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = clamp(one + aa * d).recip();
        c = clamp(one + aa / c);
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = clamp(one + aa * d).recip();
        c = clamp(one + aa / c);
        let del = d * c;
        h = h * del;
        if (del - one).abs() < eps {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence(BETA_CF_MAX_ITER))
}

/// Regularized incomplete beta `I_x(a, b)`. `x_complement` must equal
/// `1 - x`; passing it separately keeps precision when `x` is close to 1.
pub fn regularized_incomplete_beta<T: Scalar>(a: T, b: T, x: T, x_complement: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::InvalidArgument(
            "beta parameters must be positive".into(),
        ));
    }
    if x <= T::zero() {
        return Ok(T::zero());
    }
    if x_complement <= T::zero() {
        return Ok(T::one());
    }
    let ln_front = a * x.ln() + b * x_complement.ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let front = ln_front.exp();
    let value = if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x)? / a
    } else {
        T::one() - front * beta_cf(b, a, x_complement)? / b
    };
    Ok(value.max(T::zero()).min(T::one()))
}

/// Two-tailed p-value of Student's t distribution with `df` degrees of
/// freedom, `2 (1 - CDF(|t|))`.
pub fn p_two_tailed<T: Scalar>(t: T, df: T) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("t statistic {t}")));
    }
    if df.is_nan() || df <= T::zero() || !df.is_finite() {
        return Err(Error::InvalidArgument(format!("degrees of freedom {df}")));
    }
    let t2 = t * t;
    let denom = df + t2;
    let x = df / denom;
    let x_complement = t2 / denom;
    regularized_incomplete_beta(df / T::lit(2.0), T::lit(0.5), x, x_complement)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    None,
    /// p < 0.05
    Star,
    /// p < 0.005
    DoubleStar,
}

impl Marker {
    pub fn from_p<T: Scalar>(p: T) -> Self {
        if p < T::lit(0.005) {
            Marker::DoubleStar
        } else if p < T::lit(0.05) {
            Marker::Star
        } else {
            Marker::None
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Marker::None => "",
            Marker::Star => "*",
            Marker::DoubleStar => "**",
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Significance<T> {
    pub t: T,
    pub df: T,
    pub p: T,
    pub marker: Marker,
}

/// One row of the group comparison. `outcome` is `Err` with a reason when
/// the feature could not be tested.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestResult<T> {
    pub feature: Feature,
    pub n_fake: usize,
    pub n_real: usize,
    pub outcome: std::result::Result<Significance<T>, String>,
}

impl<T: Scalar> TTestResult<T> {
    pub fn feature_name(&self) -> &'static str {
        self.feature.display_name()
    }

    pub fn marker(&self) -> Option<Marker> {
        self.outcome.as_ref().ok().map(|s| s.marker)
    }

    pub fn is_testable(&self) -> bool {
        self.outcome.is_ok()
    }
}

pub fn welch_test<T: Scalar>(a: &[T], b: &[T]) -> Result<Significance<T>> {
    let WelchT { t, df } = welch_t(a, b)?;
    let p = p_two_tailed(t, df)?;
    Ok(Significance {
        t,
        df,
        p,
        marker: Marker::from_p(p),
    })
}

/// Tests every feature for a difference in means, fake minus real, skipping
/// masked values.
pub fn significance_table<T: Scalar>(rows: &[LabeledFeatureRow<T>]) -> Vec<TTestResult<T>> {
    Feature::ALL
        .into_iter()
        .map(|feature| {
            let group = |class: SpreaderClass| -> Vec<T> {
                rows.iter()
                    .filter(|r| r.label == class)
                    .filter_map(|r| r.features.get(feature))
                    .collect()
            };
            let fake = group(SpreaderClass::FakeSpreader);
            let real = group(SpreaderClass::RealSpreader);
            TTestResult {
                feature,
                n_fake: fake.len(),
                n_real: real.len(),
                outcome: welch_test(&fake, &real).map_err(|e| e.to_string()),
            }
        })
        .collect()
}

pub fn write_report_csv<T: Scalar, W: Write>(results: &[TTestResult<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "t", "df", "p", "marker", "n_fake", "n_real"])?;
    for r in results {
        let (t, df, p, marker) = match &r.outcome {
            Ok(s) => (
                s.t.to_string(),
                s.df.to_string(),
                s.p.to_string(),
                match s.marker {
                    Marker::None => "none",
                    Marker::Star => "*",
                    Marker::DoubleStar => "**",
                },
            ),
            Err(_) => (String::new(), String::new(), String::new(), "untestable"),
        };
        w.write_record([
            r.feature.key(),
            &t,
            &df,
            &p,
            marker,
            &r.n_fake.to_string(),
            &r.n_real.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<report csv>", e))?;
    Ok(())
}

/// Aligned plain-text table: feature name, t with significance marker,
/// degrees of freedom, p-value and group sizes.
pub fn render_report_table<T: Scalar>(results: &[TTestResult<T>]) -> String {
    let header = [
        "Feature Name",
        "t-statistic",
        "df",
        "p-value",
        "n_fake",
        "n_real",
    ];
    let mut cells: Vec<[String; 6]> = vec![header.map(str::to_string)];
    for r in results {
        let (t, df, p) = match &r.outcome {
            Ok(s) => (
                format!("{:.2}{}", s.t.to_f64_lossy(), s.marker),
                format!("{:.1}", s.df.to_f64_lossy()),
                format!("{:.3e}", s.p.to_f64_lossy()),
            ),
            Err(_) => ("untestable".into(), "-".into(), "-".into()),
        };
        cells.push([
            r.feature_name().to_string(),
            t,
            df,
            p,
            r.n_fake.to_string(),
            r.n_real.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| {
            cells
                .iter()
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let rule = widths
        .iter()
        .map(|w| "-".repeat(*w))
        .collect::<Vec<_>>()
        .join("  ");
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&rule);
            out.push('\n');
        }
    }
    out.push_str("** p < 0.005, * p < 0.05 (two-tailed Welch t-test, fake minus real)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;

    #[test]
    fn welch_hand_example() {
        let a = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0f64, 3.0, 4.0, 5.0, 6.0];
        let w = welch_t(&a, &b).unwrap();
        assert_eq!(w.t, -1.0);
        assert_eq!(w.df, 8.0);
        // scipy.stats.ttest_ind(equal_var=False)
        let p = p_two_tailed(w.t, w.df).unwrap();
        assert!((p - 0.346_593_507_087_334_16).abs() < 1e-12);
    }

    #[test]
    fn welch_identical_samples() {
        let a = [0.3f64, 1.7, 2.2, -0.4];
        let w = welch_t(&a, &a).unwrap();
        assert_eq!(w.t, 0.0);
        assert_eq!(p_two_tailed(w.t, w.df).unwrap(), 1.0);
    }

    #[test]
    fn welch_degenerate() {
        assert!(matches!(
            welch_t(&[1.0f64], &[1.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            welch_t(&[1.0f64, 1.0], &[2.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
        // one constant group is still testable
        assert!(welch_t(&[1.0f64, 1.0], &[2.0, 3.0]).is_ok());
        assert!(welch_t(&[f64::NAN, 1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn p_value_reference_points() {
        // two-tailed values from scipy.stats.t.sf
        let cases = [
            (2.0, 10.0, 0.073_388_034_770_740_39),
            (1.0, 3.0, 0.391_002_218_955_770_53),
            (0.5, 1.0, 0.704_832_764_699_133_6),
            (3.7, 25.5, 0.001_040_881_424_251_885_8),
            (10.0, 1000.0, 1.667_070_295_860_006_5e-22),
            (-2.2, 7.3, 0.062_169_165_400_023_534),
            (5.0, 12000.0, 5.814_019_049_738_86e-7),
            (1.96, 100000.0, 0.049_998_563_194_301_67),
        ];
        for (t, df, expected) in cases {
            let p: f64 = p_two_tailed(t, df).unwrap();
            assert!(
                (p - expected).abs() <= 1e-10,
                "t={t} df={df}: {p} vs {expected}"
            );
        }
    }

    #[test]
    fn p_value_errors_and_limits() {
        assert!(p_two_tailed(f64::INFINITY, 5.0).is_err());
        assert!(p_two_tailed(f64::NAN, 5.0).is_err());
        assert!(p_two_tailed(1.0, 0.0).is_err());
        let mut last = 1.0;
        for t in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1e4] {
            let p: f64 = p_two_tailed(t, 7.0).unwrap();
            assert!(p < last);
            last = p;
        }
        assert!(last < 1e-20);
    }

    #[test]
    fn works_in_f32() {
        let w = welch_t(&[1.0f32, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!((w.t, w.df), (-1.0, 8.0));
        let p = p_two_tailed(2.0f32, 10.0).unwrap();
        assert!((p - 0.073_388_03).abs() < 1e-5);
    }

    #[test]
    fn ln_gamma_values() {
        assert!(ln_gamma(1.0f64).abs() < 1e-14);
        assert!(ln_gamma(2.0f64).abs() < 1e-14);
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(11.0f64) - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn markers() {
        assert_eq!(Marker::from_p(0.004_999f64), Marker::DoubleStar);
        assert_eq!(Marker::from_p(0.005f64), Marker::Star);
        assert_eq!(Marker::from_p(0.049_99f64), Marker::Star);
        assert_eq!(Marker::from_p(0.05f64), Marker::None);
    }

    fn row(label: SpreaderClass, v: f64, masked: bool) -> LabeledFeatureRow<f64> {
        let mut fv = FeatureVector::default();
        for f in Feature::ALL {
            fv.set(f, Some(v));
        }
        if masked {
            fv.set(Feature::Popularity, None);
        }
        LabeledFeatureRow {
            user_id: String::new(),
            label,
            features: fv,
        }
    }

    #[test]
    fn table_structure_and_masking() {
        use SpreaderClass::*;
        let rows = vec![
            row(FakeSpreader, 1.0, false),
            row(FakeSpreader, 2.0, true),
            row(FakeSpreader, 3.0, false),
            row(RealSpreader, 5.0, false),
            row(RealSpreader, 7.0, false),
        ];
        let table = significance_table(&rows);
        assert_eq!(table.len(), 10);
        for (r, f) in table.iter().zip(Feature::ALL) {
            assert_eq!(r.feature, f);
            assert_eq!(r.n_real, 2);
        }
        assert_eq!(table[0].n_fake, 3);
        assert!(table[0].outcome.as_ref().unwrap().t < 0.0);
        assert_eq!(table[7].n_fake, 2);

        let one_real = vec![
            row(FakeSpreader, 1.0, false),
            row(FakeSpreader, 2.0, false),
            row(RealSpreader, 5.0, false),
        ];
        let table = significance_table(&one_real);
        assert!(table.iter().all(|r| !r.is_testable()));

        let mut csv = Vec::new();
        write_report_csv(&table, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.starts_with("feature,t,df,p,marker,n_fake,n_real\n"));
        assert!(csv.contains("tentat,,,,untestable,2,1"));
        assert!(render_report_table(&table).contains("untestable"));
    }
}
