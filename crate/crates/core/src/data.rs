//! Datasets: LIBSVM ingestion, z-score normalization, the synthetic Gaussian
//! benchmark generator with label-flip outliers, and k-fold splitting.
//!
//! Every random operation takes an explicit `u64` seed and draws from
//! ChaCha8, so results are reproducible across platforms.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::moments::ClassMoments;
use crate::scalar::Scalar;

/// The seeded generator used by every random operation in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn std_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    #[inline]
    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// Dense features with ±1 labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    features: Matrix<T>,
    labels: Vec<Label>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<Label>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::invalid("dataset needs at least one sample"));
        }
        if features.rows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::invalid("non-finite feature value"));
        }
        Ok(Dataset { features, labels })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        self.features.row(i)
    }

    pub fn n_pos(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn n_neg(&self) -> usize {
        self.n() - self.n_pos()
    }

    /// Rows restricted to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.d());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n() {
                return Err(Error::invalid(format!("row index {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(Matrix::from_row_major(indices.len(), self.d(), data)?, labels)
    }

    /// `wᵀx_i` for every row.
    pub fn scores(&self, w: &[T]) -> Vec<T> {
        self.features.matvec(w)
    }

    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Dataset::new(self.features.clone(), labels)
    }
}

/// Parameters of the synthetic two-Gaussian benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec<T> {
    pub d: usize,
    pub n: usize,
    pub prior_pos: T,
    /// Percentage of each class whose labels are flipped, in `[0, 100)`.
    pub outlier_pct: T,
    pub seed: u64,
    pub mean_scale: T,
    pub cov_scale: T,
}

impl<T: Scalar> GaussianSpec<T> {
    pub fn n_pos(&self) -> usize {
        (T::from_count(self.n) * self.prior_pos)
            .round()
            .to_usize()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("d and n must be positive"));
        }
        if !(self.prior_pos > T::zero() && self.prior_pos < T::one()) {
            return Err(Error::invalid("prior_pos must lie in (0,1)"));
        }
        if !(self.outlier_pct >= T::zero() && self.outlier_pct < T::lit(100.0)) {
            return Err(Error::invalid("outlier_pct must lie in [0,100)"));
        }
        if !(self.mean_scale > T::zero() && self.cov_scale > T::zero()) {
            return Err(Error::invalid("mean_scale and cov_scale must be positive"));
        }
        let n = T::from_count(self.n);
        let two = T::lit(2.0);
        if n * self.prior_pos < two || n * (T::one() - self.prior_pos) < two {
            return Err(Error::invalid("each class needs at least two samples"));
        }
        let n_pos = self.n_pos();
        if n_pos < 2 || self.n - n_pos < 2 {
            return Err(Error::invalid("each class needs at least two samples"));
        }
        Ok(())
    }
}

/// Per-feature affine map produced by [`normalize_zscore`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationStats<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Scalar> NormalizationStats<T> {
    /// Applies `(x − mean)/scale` column-wise.
    pub fn apply(&self, dataset: &Dataset<T>) -> Result<Dataset<T>> {
        if dataset.d() != self.mean.len() {
            return Err(Error::invalid("normalization dimension mismatch"));
        }
        let mut features = dataset.features.clone();
        for i in 0..features.rows() {
            for (j, v) in features.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        Dataset::new(features, dataset.labels.clone())
    }
}

/// Parses LIBSVM sparse text into a dense dataset.
///
/// `d` is the largest index seen. The two distinct raw labels are mapped so
/// that the numerically larger one becomes `+1`.
pub fn parse_libsvm<T: Scalar, R: BufRead>(reader: R) -> Result<Dataset<T>> {
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut distinct: Vec<f64> = Vec::new();
    let mut d = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-numeric label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(Error::parse(lineno, "non-finite label"));
        }
        if !distinct.contains(&label) {
            if distinct.len() == 2 {
                return Err(Error::parse(
                    lineno,
                    format!("third distinct label {label_tok:?}; binary labels required"),
                ));
            }
            distinct.push(label);
        }

        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, format!("malformed feature {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad feature index in {tok:?}")))?;
            if idx == 0 {
                return Err(Error::parse(lineno, "feature indices are 1-based"));
            }
            if idx <= last {
                return Err(Error::parse(
                    lineno,
                    format!("feature index {idx} does not increase (previous {last})"),
                ));
            }
            let val: T = val
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-numeric value in {tok:?}")))?;
            if !val.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value in {tok:?}")));
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        d = d.max(last);
        raw_labels.push(label);
        rows.push(entries);
    }

    if rows.is_empty() {
        return Err(Error::parse(0, "no samples"));
    }
    if distinct.len() != 2 {
        return Err(Error::parse(
            0,
            format!("expected two distinct labels, found {}", distinct.len()),
        ));
    }
    let positive = distinct[0].max(distinct[1]);

    let mut features = Matrix::zeros(rows.len(), d);
    for (i, entries) in rows.iter().enumerate() {
        let row = features.row_mut(i);
        for &(j, v) in entries {
            row[j] = v;
        }
    }
    let labels = raw_labels
        .into_iter()
        .map(|l| {
            if l == positive {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();
    Dataset::new(features, labels)
}

/// Writes LIBSVM text with shortest round-trip decimal values.
///
/// The last feature is always written so the dimension survives re-parsing.
pub fn write_libsvm<T: Scalar, W: Write>(dataset: &Dataset<T>, mut out: W) -> Result<()> {
    let d = dataset.d();
    for i in 0..dataset.n() {
        let label = if dataset.labels[i].is_positive() { "+1" } else { "-1" };
        write!(out, "{label}")?;
        for (j, &v) in dataset.row(i).iter().enumerate() {
            if v != T::zero() || v.is_sign_negative() || j + 1 == d {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Centers every column and divides by its population standard deviation.
/// Columns with standard deviation below `1e-12` are only centered.
pub fn normalize_zscore<T: Scalar>(
    dataset: &Dataset<T>,
) -> Result<(Dataset<T>, NormalizationStats<T>)> {
    let stats = zscore_stats(dataset)?;
    let normalized = stats.apply(dataset)?;
    Ok((normalized, stats))
}

pub fn zscore_stats<T: Scalar>(dataset: &Dataset<T>) -> Result<NormalizationStats<T>> {
    let n = dataset.n();
    if n < 2 {
        return Err(Error::invalid("normalization needs at least two samples"));
    }
    let d = dataset.d();
    let nf = T::from_count(n);
    let mut mean = vec![T::zero(); d];
    for i in 0..n {
        for (m, &v) in mean.iter_mut().zip(dataset.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }
    let mut var = vec![T::zero(); d];
    for i in 0..n {
        for ((s, &v), &m) in var.iter_mut().zip(dataset.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let floor = T::lit(1e-12);
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / nf).sqrt();
            if sd < floor {
                T::one()
            } else {
                sd
            }
        })
        .collect();
    Ok(NormalizationStats { mean, scale })
}

/// Draws the two-Gaussian benchmark. Returns the clean dataset (positives
/// first) and the exact moments it was sampled from; `outlier_pct` is not
/// applied here, see [`gen_gaussian_with_outliers`].
pub fn gen_gaussian<T: Scalar>(spec: &GaussianSpec<T>) -> Result<(Dataset<T>, ClassMoments<T>)> {
    spec.validate()?;
    let d = spec.d;
    let mut rng = seeded_rng(spec.seed);

    let draw_mean = |rng: &mut ChaCha8Rng| -> Vec<T> {
        (0..d).map(|_| spec.mean_scale * std_normal::<T, _>(rng)).collect()
    };
    let mu_pos = draw_mean(&mut rng);
    let mu_neg = draw_mean(&mut rng);

    let draw_cov = |rng: &mut ChaCha8Rng| -> Result<Matrix<T>> {
        let a = Matrix::from_fn(d, d, |_, _| std_normal::<T, _>(rng));
        let aat = a.matmul(&a.transpose())?;
        let inv_d = T::one() / T::from_count(d);
        let mut sigma = aat.scaled(inv_d).add_scaled(T::one(), &Matrix::identity(d))?;
        sigma = sigma.scaled(spec.cov_scale);
        // exact symmetry
        for i in 0..d {
            for j in (i + 1)..d {
                let v = sigma[(i, j)];
                sigma[(j, i)] = v;
            }
        }
        Ok(sigma)
    };
    let sigma_pos = draw_cov(&mut rng)?;
    let sigma_neg = draw_cov(&mut rng)?;

    let moments = ClassMoments::new(
        mu_pos,
        mu_neg,
        sigma_pos,
        sigma_neg,
        spec.prior_pos,
        T::one() - spec.prior_pos,
    )?;
    let dataset = draw_samples(&moments, spec.n_pos(), spec.n, &mut rng)?;
    Ok((dataset, moments))
}

/// Samples `n` points from a fixed moment model, `round(n·P⁺)` positives
/// first.
pub fn sample_gaussian<T: Scalar>(moments: &ClassMoments<T>, n: usize, seed: u64) -> Result<Dataset<T>> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let n_pos = (T::from_count(n) * moments.prior_pos)
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(n);
    draw_samples(moments, n_pos, n, &mut seeded_rng(seed))
}

fn draw_samples<T: Scalar>(
    m: &ClassMoments<T>,
    n_pos: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset<T>> {
    let d = m.dim();
    let chol_pos = m
        .sigma_pos
        .cholesky()
        .map_err(|e| Error::invalid(format!("positive-class covariance not SPD: {e}")))?;
    let chol_neg = m
        .sigma_neg
        .cholesky()
        .map_err(|e| Error::invalid(format!("negative-class covariance not SPD: {e}")))?;

    let mut features = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    let mut z = vec![T::zero(); d];
    for i in 0..n {
        let (mu, l, label) = if i < n_pos {
            (&m.mu_pos, &chol_pos, Label::Positive)
        } else {
            (&m.mu_neg, &chol_neg, Label::Negative)
        };
        for zj in z.iter_mut() {
            *zj = std_normal(rng);
        }
        let row = features.row_mut(i);
        for r in 0..d {
            let lrow = l.row(r);
            let mut acc = mu[r];
            for k in 0..=r {
                acc += lrow[k] * z[k];
            }
            row[r] = acc;
        }
        labels.push(label);
    }
    Dataset::new(features, labels)
}

/// [`gen_gaussian`] followed by [`inject_outliers`] at `spec.outlier_pct`,
/// seeded from `spec.seed`.
pub fn gen_gaussian_with_outliers<T: Scalar>(
    spec: &GaussianSpec<T>,
) -> Result<(Dataset<T>, ClassMoments<T>)> {
    let (clean, moments) = gen_gaussian(spec)?;
    let noisy = inject_outliers(&clean, spec.outlier_pct, outlier_seed(spec.seed))?;
    Ok((noisy, moments))
}

pub(crate) fn outlier_seed(seed: u64) -> u64 {
    seed ^ 0x6f75_746c_6965_7273
}

/// Flips the labels of `⌊pct/100·n⁺⌋` uniformly chosen positives and
/// `⌊pct/100·n⁻⌋` uniformly chosen negatives.
pub fn inject_outliers<T: Scalar>(dataset: &Dataset<T>, pct: T, seed: u64) -> Result<Dataset<T>> {
    let flipped = outlier_indices(dataset, pct, seed)?;
    let mut labels = dataset.labels.clone();
    for i in flipped {
        labels[i] = labels[i].flipped();
    }
    dataset.with_labels(labels)
}

/// Row indices [`inject_outliers`] flips, sorted ascending.
pub fn outlier_indices<T: Scalar>(dataset: &Dataset<T>, pct: T, seed: u64) -> Result<Vec<usize>> {
    if !(pct >= T::zero() && pct < T::lit(50.0)) {
        return Err(Error::invalid(format!("outlier percentage {pct} outside [0,50)")));
    }
    let frac = pct / T::lit(100.0);
    let mut rng = seeded_rng(seed);
    let mut flipped = Vec::new();
    for class in [Label::Positive, Label::Negative] {
        let members: Vec<usize> = (0..dataset.n())
            .filter(|&i| dataset.labels[i] == class)
            .collect();
        let count = (frac * T::from_count(members.len()))
            .floor()
            .to_usize()
            .unwrap_or(0);
        if count == 0 {
            continue;
        }
        for k in index::sample(&mut rng, members.len(), count) {
            flipped.push(members[k]);
        }
    }
    flipped.sort_unstable();
    Ok(flipped)
}

/// One cross-validation fold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions a seeded permutation of `0..n` into `k` folds whose sizes
/// differ by at most one (the first `n mod k` folds get the extra index).
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::invalid("k-fold needs k >= 2"));
    }
    if n < k {
        return Err(Error::invalid(format!("cannot split {n} samples into {k} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded_rng(seed));

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test = perm[start..start + size].to_vec();
        test.sort_unstable();
        let test_set: BTreeSet<usize> = test.iter().copied().collect();
        let train = (0..n).filter(|i| !test_set.contains(i)).collect();
        folds.push(Fold { train, test });
        start += size;
    }
    Ok(folds)
}
