//! The Gibbs-within-Metropolis-Hastings sampler for geographically weighted
//! sparse regression.
//!
//! The model ties each covariate's coefficient vector over locations to a
//! fused lasso prior: a Laplace shrinkage term per location plus a Laplace
//! term on the coefficient difference of every adjacent pair. Parameter
//! augmentation with latent variances `tau^2` (per location) and `omega^2`
//! (per adjacent pair) restores conjugacy, so the coefficients, augmentation
//! variables, noise variance and shrinkage strengths all have closed-form
//! conditionals. Bandwidths are sampled by a random-walk Metropolis step,
//! either one shared value or one per location (adaptive adjacency).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::baselines::{gwr_fit_at, ols};
use crate::error::{Error, Result};
use crate::rng::{
    sample_gamma, sample_inverse_gamma, sample_inverse_gaussian, sample_mvn_from_precision,
    PrecisionMvnProblem, RngStream,
};
use crate::spatial::{
    weight_row, AdjacencyStructure, DistanceMatrix, KernelFamily, SpatialDataset,
};

/// Coefficient magnitudes and differences are floored at this value before
/// forming the inverse-Gaussian mean; fusion drives exact ties and an
/// unbounded conditional mean would destroy the precision matrix.
pub const AUGMENTATION_FLOOR: f64 = 1e-10;

/// Draws of `1/tau^2` and `1/omega^2` are clamped to this range.
pub const PRECISION_CLAMP: (f64, f64) = (1e-12, 1e12);

/// Shrinkage-strength draws are floored here: gamma sampling with a sub-unit
/// shape and a large rate can underflow to exactly zero, which the
/// inverse-Gaussian conditionals cannot accept.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Residual variance used for `sigma^2` initialisation when the initial fit
/// is exact.
const SIGMA_SQ_FLOOR: f64 = 1e-8;

/// Hyperparameters and run controls for one chain.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitConfig {
    /// Inverse-gamma shape hyperparameter for the noise variance.
    pub r: f64,
    /// Inverse-gamma rate hyperparameter for the noise variance.
    pub q: f64,
    /// Gamma shape hyperparameter for the per-location shrinkage strength.
    pub r1: f64,
    /// Gamma rate hyperparameter for the per-location shrinkage strength.
    pub q1: f64,
    /// Gamma shape hyperparameter for the fusion shrinkage strength.
    pub r2: f64,
    /// Gamma rate hyperparameter for the fusion shrinkage strength.
    pub q2: f64,
    /// Upper bound of the uniform bandwidth prior.
    pub a: f64,
    /// Variance of the normal bandwidth proposal.
    pub sigma_h_sq: f64,
    /// Total iterations.
    pub t_max: usize,
    /// Iterations discarded from the front of the chain.
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in iterate.
    pub thin: usize,
    /// Base seed for the chain's random stream.
    pub seed: u64,
    /// Sample one bandwidth per location instead of a single shared one.
    pub adaptive_bandwidth: bool,
    pub kernel_family: KernelFamily,
}

impl Default for FitConfig {
    fn default() -> Self {
        let a = 3.0;
        FitConfig {
            r: 0.1,
            q: 0.1,
            r1: 0.1,
            q1: 0.1,
            r2: 0.1,
            q2: 0.1,
            a,
            // proposal standard deviation defaults to a tenth of the prior range
            sigma_h_sq: (0.1 * a) * (0.1 * a),
            t_max: 3000,
            burn_in: 1000,
            thin: 2,
            seed: 0,
            adaptive_bandwidth: false,
            kernel_family: KernelFamily::Bisquare,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r", self.r),
            ("q", self.q),
            ("r1", self.r1),
            ("q1", self.q1),
            ("r2", self.r2),
            ("q2", self.q2),
            ("a", self.a),
            ("sigma_h_sq", self.sigma_h_sq),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.t_max == 0 {
            return Err(Error::invalid("t_max must be at least 1"));
        }
        if self.burn_in >= self.t_max {
            return Err(Error::invalid(format!(
                "burn_in ({}) must be smaller than t_max ({})",
                self.burn_in, self.t_max
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        Ok(())
    }

    /// Number of retained draws: `floor((t_max - burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        (self.t_max - self.burn_in) / self.thin
    }
}

/// One retained chain iterate.
#[derive(Debug, Clone)]
pub struct RetainedDraw {
    /// Iteration index within the chain, zero based.
    pub iter: usize,
    /// `n x p` coefficient matrix.
    pub beta: DMatrix<f64>,
    pub sigma_sq: f64,
    /// Per-covariate shrinkage strengths; empty for models without them.
    pub lambda1_sq: Vec<f64>,
    pub lambda2_sq: Vec<f64>,
    /// Per-location bandwidths (all equal in shared mode).
    pub h: Vec<f64>,
}

/// Retained post-burn-in iterates plus per-location acceptance fractions of
/// the bandwidth Metropolis step.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub draws: Vec<RetainedDraw>,
    pub acceptance_rates: Vec<f64>,
}

impl PosteriorDraws {
    /// Posterior mean of the coefficient surface, `n x p`.
    pub fn posterior_mean_beta(&self) -> DMatrix<f64> {
        let first = &self.draws[0].beta;
        let mut acc = DMatrix::zeros(first.nrows(), first.ncols());
        for d in &self.draws {
            acc += &d.beta;
        }
        acc / self.draws.len() as f64
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// Assembles the fused precision matrix for covariate `k`:
/// diagonal `1/tau_i^2 + sum_{(i,l) adjacent} 1/omega_{i,l}^2`, off-diagonal
/// `-1/omega_{i,j}^2` on adjacent pairs, zero elsewhere.
pub fn build_fused_precision(
    tau_sq: &DVector<f64>,
    omega_sq: &BTreeMap<(usize, usize), f64>,
    adjacency: &AdjacencyStructure,
) -> DMatrix<f64> {
    let n = adjacency.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0 / tau_sq[i];
        for &j in adjacency.neighbors(i) {
            let key = (i.min(j), i.max(j));
            diag += 1.0 / omega_sq[&key];
        }
        m[(i, i)] = diag;
    }
    for (i, j) in adjacency.pairs() {
        let v = -1.0 / omega_sq[&(i, j)];
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

/// The backfitting partial response for covariate `k`:
/// `y - sum_{l != k} X_l beta_l`.
pub fn partial_response(
    k: usize,
    data: &SpatialDataset,
    betas: &[DVector<f64>],
) -> DVector<f64> {
    let mut out = data.response().clone();
    for (l, beta_l) in betas.iter().enumerate() {
        if l == k {
            continue;
        }
        let x_l = data.covariates().column(l);
        for i in 0..out.len() {
            out[i] -= x_l[i] * beta_l[i];
        }
    }
    out
}

/// Inner coefficient draw given the diagonal of `sum_i W(s_i)^2`.
fn draw_coefficients<R: Rng>(
    x_k: &DVector<f64>,
    col_sq_sums: &[f64],
    y_k: &DVector<f64>,
    precision: &DMatrix<f64>,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let n = x_k.len();
    let mut a = precision.clone();
    let mut b = DVector::zeros(n);
    for j in 0..n {
        let xg = x_k[j] * col_sq_sums[j];
        a[(j, j)] += x_k[j] * xg;
        b[j] = xg * y_k[j];
    }
    let problem = PrecisionMvnProblem { precision: a, linear_term: b, scale: sigma_sq };
    sample_mvn_from_precision(&problem, rng)
}

/// One draw of the coefficient vector for covariate `k` from its full
/// conditional: mean `A^{-1} X_k (sum_i W(s_i)^2) y_k` and covariance
/// `sigma^2 A^{-1}` with `A = X_k (sum_i W(s_i)^2) X_k + Sigma_k^{-1}`.
pub fn gibbs_beta<R: Rng>(
    k: usize,
    data: &SpatialDataset,
    y_k: &DVector<f64>,
    adjacency: &AdjacencyStructure,
    sigma_sq: f64,
    precision: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let g = adjacency.column_squared_sums();
    draw_coefficients(&data.covariate(k), &g, y_k, precision, sigma_sq, rng)
}

/// One sweep of the augmentation variables for covariate `k`: draws
/// `1/tau_i^2` and `1/omega_{ij}^2` from their inverse-Gaussian conditionals
/// and returns the variances. Magnitudes are floored and the precision draws
/// clamped; see [`AUGMENTATION_FLOOR`] and [`PRECISION_CLAMP`].
pub fn gibbs_augmentation<R: Rng>(
    beta_k: &DVector<f64>,
    sigma_sq: f64,
    lambda1_sq: f64,
    lambda2_sq: f64,
    adjacency: &AdjacencyStructure,
    rng: &mut R,
) -> Result<(DVector<f64>, BTreeMap<(usize, usize), f64>)> {
    let n = beta_k.len();
    let (lo, hi) = PRECISION_CLAMP;
    let mut tau_sq = DVector::zeros(n);
    for i in 0..n {
        let scale = beta_k[i].abs().max(AUGMENTATION_FLOOR);
        let mean = (lambda1_sq * sigma_sq).sqrt() / scale;
        let draw = sample_inverse_gaussian(mean, lambda1_sq, rng)?.clamp(lo, hi);
        tau_sq[i] = 1.0 / draw;
    }
    let mut omega_sq = BTreeMap::new();
    for (i, j) in adjacency.pairs() {
        let scale = (beta_k[i] - beta_k[j]).abs().max(AUGMENTATION_FLOOR);
        let mean = (lambda2_sq * sigma_sq).sqrt() / scale;
        let draw = sample_inverse_gaussian(mean, lambda2_sq, rng)?.clamp(lo, hi);
        omega_sq.insert((i, j), 1.0 / draw);
    }
    Ok((tau_sq, omega_sq))
}

/// The weighted residual sum `sum_i sum_k || W(s_i) (y_k - X_k beta_k) ||^2`.
///
/// Every backfitting partial residual `y_k - X_k beta_k` equals the total
/// residual `y - sum_l X_l beta_l`, so the sum reduces to
/// `p * sum_j g_j r_j^2` with `g` the column sums of squared weights.
pub fn weighted_residual_ssr(
    data: &SpatialDataset,
    betas: &[DVector<f64>],
    adjacency: &AdjacencyStructure,
) -> f64 {
    let residual = total_residual(data, betas);
    let g = adjacency.column_squared_sums();
    let p = betas.len() as f64;
    p * weighted_square_norm(&g, &residual)
}

fn weighted_square_norm(g: &[f64], r: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..r.len() {
        acc += g[j] * r[j] * r[j];
    }
    acc
}

/// `y - sum_k X_k beta_k`.
pub fn total_residual(data: &SpatialDataset, betas: &[DVector<f64>]) -> DVector<f64> {
    let mut r = data.response().clone();
    for (k, beta_k) in betas.iter().enumerate() {
        let x_k = data.covariates().column(k);
        for i in 0..r.len() {
            r[i] -= x_k[i] * beta_k[i];
        }
    }
    r
}

/// Number of positive entries across all weight rows: the count of weighted
/// likelihood terms. Equals `n^2` when every weight is positive.
pub fn positive_weight_count(adjacency: &AdjacencyStructure) -> usize {
    (0..adjacency.n()).map(|i| adjacency.row(i).len()).sum()
}

/// Posterior shape of the noise variance conditional: `r + p N_w / 2`, where
/// `N_w` counts the positive weights. Each covariate contributes one squared
/// weighted residual per positive weight, so the shape counts exactly the
/// terms that enter the rate; with every weight positive this is the dense
/// form `r + p n^2 / 2`.
pub fn sigma_sq_shape(r: f64, p: usize, weight_count: usize) -> f64 {
    r + (p * weight_count) as f64 / 2.0
}

/// Draws the noise variance given the weighted residual sum.
pub fn draw_sigma_sq<R: Rng>(
    ssr: f64,
    p: usize,
    weight_count: usize,
    r: f64,
    q: f64,
    rng: &mut R,
) -> Result<f64> {
    sample_inverse_gamma(sigma_sq_shape(r, p, weight_count), q + ssr / 2.0, rng)
}

/// Noise variance conditional: inverse gamma with shape `r + p N_w / 2` and
/// rate `q + ssr / 2`.
pub fn gibbs_sigma_sq<R: Rng>(
    data: &SpatialDataset,
    betas: &[DVector<f64>],
    adjacency: &AdjacencyStructure,
    config: &FitConfig,
    rng: &mut R,
) -> Result<f64> {
    let ssr = weighted_residual_ssr(data, betas, adjacency);
    draw_sigma_sq(ssr, betas.len(), positive_weight_count(adjacency), config.r, config.q, rng)
}

/// Shrinkage strength conditionals for covariate `k`:
/// `lambda1^2 ~ Gamma(r1 + n, q1 + sum_i tau_i^2 / 2)` and
/// `lambda2^2 ~ Gamma(r2 + sum_i n_i / 2, q2 + sum_pairs omega^2 / 2)`.
pub fn gibbs_lambdas<R: Rng>(
    tau_sq: &DVector<f64>,
    omega_sq: &BTreeMap<(usize, usize), f64>,
    adjacency: &AdjacencyStructure,
    config: &FitConfig,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let n = tau_sq.len() as f64;
    let shape1 = config.r1 + n;
    let rate1 = config.q1 + 0.5 * tau_sq.iter().sum::<f64>();
    let lambda1_sq = sample_gamma(shape1, rate1, rng)?.max(LAMBDA_FLOOR);

    let half_degree_sum = adjacency.neighbor_counts().iter().sum::<usize>() as f64 / 2.0;
    let shape2 = config.r2 + half_degree_sum;
    let rate2 = config.q2 + 0.5 * omega_sq.values().sum::<f64>();
    let lambda2_sq = sample_gamma(shape2, rate2, rng)?.max(LAMBDA_FLOOR);
    Ok((lambda1_sq, lambda2_sq))
}

/// Log acceptance ratio of a bandwidth proposal.
///
/// `s` is the weighted squared residual and `m` the squared-weight mass
/// under each candidate's weights. The raw residual sum grows with the
/// weight mass no matter how well the wider neighbourhood fits, which drives
/// every bandwidth to the no-adjacency boundary, so each sum is centred at
/// the mass times `center`, the residual rate a well-fitting neighbour is
/// expected to contribute: neighbourhoods at that rate are free, reaching
/// into poorly fitting territory is penalised, and covering
/// better-than-expected territory is rewarded. The chain passes the smaller
/// of the noise variance and the current mean squared residual, so a
/// uniformly bad fit cannot launder itself into the reference rate. With
/// residuals identically zero the centre is zero and every term vanishes,
/// recovering the uniform prior exactly.
///
/// `pooled_sites` is 1 for a per-location update; the shared-bandwidth
/// update pools over all locations and divides by the count to keep the
/// exponent on the per-site scale.
pub fn mh_log_acceptance(
    s_prop: f64,
    m_prop: f64,
    s_cur: f64,
    m_cur: f64,
    center: f64,
    sigma_sq: f64,
    pooled_sites: usize,
) -> f64 {
    let centered_prop = s_prop - m_prop * center;
    let centered_cur = s_cur - m_cur * center;
    -(centered_prop - centered_cur) / (2.0 * sigma_sq * pooled_sites as f64)
}

struct Chain<'a> {
    data: &'a SpatialDataset,
    config: &'a FitConfig,
    dists: DistanceMatrix,
    adj: AdjacencyStructure,
    /// column sums of squared weights, kept in step with `adj`
    g: Vec<f64>,
    x_cols: Vec<DVector<f64>>,
    beta: Vec<DVector<f64>>,
    tau_sq: Vec<DVector<f64>>,
    omega_sq: Vec<BTreeMap<(usize, usize), f64>>,
    precisions: Vec<DMatrix<f64>>,
    sigma_sq: f64,
    lambda1_sq: Vec<f64>,
    lambda2_sq: Vec<f64>,
    h: Vec<f64>,
    residual: DVector<f64>,
    accepted: Vec<u64>,
    proposed: Vec<u64>,
}

impl<'a> Chain<'a> {
    fn init(data: &'a SpatialDataset, config: &'a FitConfig) -> Result<Self> {
        let n = data.n();
        let p = data.p();
        let dists = DistanceMatrix::compute(data.locations());
        let h0 = config.a / 2.0;
        let h = vec![h0; n];
        let adj = AdjacencyStructure::build(&dists, &h, config.kernel_family)?;
        let g = adj.column_squared_sums();
        let x_cols: Vec<DVector<f64>> = (0..p).map(|k| data.covariate(k)).collect();

        // Coefficients start at a local weighted least-squares fit with the
        // midpoint bandwidth; sites where that is singular fall back to the
        // global ordinary least-squares solution.
        let ols_fit = ols(data)?;
        let mut beta: Vec<DVector<f64>> = (0..p).map(|_| DVector::zeros(n)).collect();
        for i in 0..n {
            let local = gwr_fit_at(data.locations()[i], data, h0, config.kernel_family)
                .unwrap_or_else(|_| ols_fit.clone());
            for k in 0..p {
                beta[k][i] = local[k];
            }
        }
        let residual = total_residual(data, &beta);
        let sigma_sq =
            (residual.iter().map(|r| r * r).sum::<f64>() / n as f64).max(SIGMA_SQ_FLOOR);

        let tau_sq: Vec<DVector<f64>> = (0..p).map(|_| DVector::from_element(n, 1.0)).collect();
        let omega_sq: Vec<BTreeMap<(usize, usize), f64>> =
            (0..p).map(|_| adj.pairs().map(|pair| (pair, 1.0)).collect()).collect();
        let precisions: Vec<DMatrix<f64>> =
            (0..p).map(|k| build_fused_precision(&tau_sq[k], &omega_sq[k], &adj)).collect();

        Ok(Chain {
            data,
            config,
            dists,
            adj,
            g,
            x_cols,
            beta,
            tau_sq,
            omega_sq,
            precisions,
            sigma_sq,
            lambda1_sq: vec![1.0; p],
            lambda2_sq: vec![1.0; p],
            h,
            residual,
            accepted: vec![0; n],
            proposed: vec![0; n],
        })
    }

    fn sweep<R: Rng>(&mut self, iter: usize, rng: &mut R) -> Result<()> {
        let p = self.data.p();
        // refresh the residual so incremental updates cannot drift
        self.residual = total_residual(self.data, &self.beta);

        for k in 0..p {
            // y_k = residual + X_k beta_k, the backfitting partial response
            let mut y_k = self.residual.clone();
            for i in 0..y_k.len() {
                y_k[i] += self.x_cols[k][i] * self.beta[k][i];
            }
            let new_beta = draw_coefficients(
                &self.x_cols[k],
                &self.g,
                &y_k,
                &self.precisions[k],
                self.sigma_sq,
                rng,
            )
            .map_err(|e| abort(iter, "coefficient draw", e))?;
            for i in 0..y_k.len() {
                self.residual[i] += self.x_cols[k][i] * (self.beta[k][i] - new_beta[i]);
            }
            self.beta[k] = new_beta;
        }

        for k in 0..p {
            let (tau, omega) = gibbs_augmentation(
                &self.beta[k],
                self.sigma_sq,
                self.lambda1_sq[k],
                self.lambda2_sq[k],
                &self.adj,
                rng,
            )
            .map_err(|e| abort(iter, "augmentation draw", e))?;
            self.tau_sq[k] = tau;
            self.omega_sq[k] = omega;
            self.precisions[k] =
                build_fused_precision(&self.tau_sq[k], &self.omega_sq[k], &self.adj);
        }

        let ssr = p as f64 * weighted_square_norm(&self.g, &self.residual);
        let weight_count = positive_weight_count(&self.adj);
        self.sigma_sq =
            draw_sigma_sq(ssr, p, weight_count, self.config.r, self.config.q, rng)
                .map_err(|e| abort(iter, "noise variance draw", e))?;

        for k in 0..p {
            let (l1, l2) =
                gibbs_lambdas(&self.tau_sq[k], &self.omega_sq[k], &self.adj, self.config, rng)
                    .map_err(|e| abort(iter, "shrinkage draw", e))?;
            self.lambda1_sq[k] = l1;
            self.lambda2_sq[k] = l2;
        }

        if self.config.adaptive_bandwidth {
            self.mh_bandwidth_per_location(rng);
        } else {
            self.mh_bandwidth_shared(rng)?;
        }

        #[cfg(debug_assertions)]
        self.check_invariants();
        Ok(())
    }

    /// Per-location random-walk update. A proposal outside `(0, a]` has zero
    /// prior density and is rejected outright; otherwise the acceptance ratio
    /// compares the row-`i` weighted total residual under both bandwidths.
    fn mh_bandwidth_per_location<R: Rng>(&mut self, rng: &mut R) {
        let n = self.data.n();
        let sd = self.config.sigma_h_sq.sqrt();
        let center = self.mh_center();
        for i in 0..n {
            self.proposed[i] += 1;
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let proposal = self.h[i] + sd * z;
            if proposal <= 0.0 || proposal > self.config.a {
                continue;
            }
            let (s_cur, m_cur) = self.row_weighted_residual(i);
            let new_row = weight_row(&self.dists, i, proposal, self.config.kernel_family);
            let mut s_prop = 0.0;
            let mut m_prop = 0.0;
            for &(j, w) in &new_row {
                s_prop += w * w * self.residual[j] * self.residual[j];
                m_prop += w * w;
            }
            let log_alpha =
                mh_log_acceptance(s_prop, m_prop, s_cur, m_cur, center, self.sigma_sq, 1);
            if rng.gen::<f64>().ln() < log_alpha {
                for &(j, w) in self.adj.row(i) {
                    self.g[j] -= w * w;
                }
                for &(j, w) in &new_row {
                    self.g[j] += w * w;
                }
                self.adj.replace_row(i, new_row);
                self.h[i] = proposal;
                self.accepted[i] += 1;
            }
        }
    }

    /// Shared-bandwidth update: one proposal scored on the residual pooled
    /// over all locations.
    fn mh_bandwidth_shared<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        let n = self.data.n();
        let sd = self.config.sigma_h_sq.sqrt();
        for c in self.proposed.iter_mut() {
            *c += 1;
        }
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        let proposal = self.h[0] + sd * z;
        if proposal <= 0.0 || proposal > self.config.a {
            return Ok(());
        }
        let candidate =
            AdjacencyStructure::build(&self.dists, &vec![proposal; n], self.config.kernel_family)?;
        let g_new = candidate.column_squared_sums();
        let s_cur = weighted_square_norm(&self.g, &self.residual);
        let m_cur: f64 = self.g.iter().sum();
        let s_prop = weighted_square_norm(&g_new, &self.residual);
        let m_prop: f64 = g_new.iter().sum();
        let log_alpha =
            mh_log_acceptance(s_prop, m_prop, s_cur, m_cur, self.mh_center(), self.sigma_sq, n);
        if rng.gen::<f64>().ln() < log_alpha {
            self.adj = candidate;
            self.g = g_new;
            self.h.fill(proposal);
            for c in self.accepted.iter_mut() {
                *c += 1;
            }
        }
        Ok(())
    }

    fn row_weighted_residual(&self, i: usize) -> (f64, f64) {
        let mut acc = 0.0;
        let mut mass = 0.0;
        for &(j, w) in self.adj.row(i) {
            acc += w * w * self.residual[j] * self.residual[j];
            mass += w * w;
        }
        (acc, mass)
    }

    /// Reference residual rate for the bandwidth acceptance: the smaller of
    /// the noise variance and the current mean squared residual.
    fn mh_center(&self) -> f64 {
        let kappa: f64 = std::env::var("BGWSR_KAPPA").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0);
        let mean_residual_sq =
            self.residual.iter().map(|r| r * r).sum::<f64>() / self.residual.len() as f64;
        kappa * mean_residual_sq.min(self.sigma_sq)
    }

    #[cfg(debug_assertions)]
    fn check_invariants(&self) {
        debug_assert!(self.sigma_sq > 0.0);
        for k in 0..self.data.p() {
            debug_assert!(
                self.lambda1_sq[k] > 0.0 && self.lambda2_sq[k] > 0.0,
                "shrinkage strengths not positive: lambda1 {} lambda2 {}",
                self.lambda1_sq[k],
                self.lambda2_sq[k]
            );
            debug_assert!(self.tau_sq[k].iter().all(|&t| t > 0.0));
            debug_assert!(self.omega_sq[k].values().all(|&o| o > 0.0));
        }
        for &h in &self.h {
            debug_assert!(h > 0.0 && h <= self.config.a);
        }
        if !self.config.adaptive_bandwidth {
            debug_assert!(self.h.iter().all(|&h| h == self.h[0]));
        }
        // partial-residual bookkeeping: every y_k - X_k beta_k equals the
        // total residual
        let fresh = total_residual(self.data, &self.beta);
        for k in 0..self.data.p() {
            let y_k = partial_response(k, self.data, &self.beta);
            for i in 0..fresh.len() {
                let direct = y_k[i] - self.x_cols[k][i] * self.beta[k][i];
                debug_assert!(
                    (direct - fresh[i]).abs() <= 1e-10 * (1.0 + fresh[i].abs()),
                    "partial residual diverged at site {i}, covariate {k}"
                );
            }
        }
    }

    fn retained_draw(&self, iter: usize) -> RetainedDraw {
        RetainedDraw {
            iter,
            beta: DMatrix::from_columns(&self.beta),
            sigma_sq: self.sigma_sq,
            lambda1_sq: self.lambda1_sq.clone(),
            lambda2_sq: self.lambda2_sq.clone(),
            h: self.h.clone(),
        }
    }
}

fn abort(iteration: usize, step: &'static str, source: Error) -> Error {
    Error::ChainAborted { iteration, step, source: Box::new(source) }
}

/// Runs one chain and returns the retained draws.
///
/// Sweep order: coefficients for every covariate, then augmentation variables
/// and the rebuilt fused precision for every covariate, then the noise
/// variance, then the shrinkage strengths, then the bandwidth Metropolis step
/// and the weight rebuild.
pub fn run_chain(
    data: &SpatialDataset,
    config: &FitConfig,
    stream: RngStream,
) -> Result<PosteriorDraws> {
    config.validate()?;
    let mut rng = stream.rng();
    let mut chain = Chain::init(data, config)?;
    let mut draws = Vec::with_capacity(config.retained());
    for t in 0..config.t_max {
        chain.sweep(t, &mut rng)?;
        if t >= config.burn_in && (t - config.burn_in) % config.thin == config.thin - 1 {
            draws.push(chain.retained_draw(t));
        }
    }
    let acceptance_rates = chain
        .accepted
        .iter()
        .zip(&chain.proposed)
        .map(|(&a, &p)| if p == 0 { 0.0 } else { a as f64 / p as f64 })
        .collect();
    Ok(PosteriorDraws { draws, acceptance_rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{build_adjacency, Location};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_dataset(n: usize, spacing: f64) -> SpatialDataset {
        let locations: Vec<Location> =
            (0..n).map(|i| Location::new(i as f64 * spacing, 0.0)).collect();
        let x = DMatrix::from_element(n, 1, 1.0);
        let y = DVector::zeros(n);
        SpatialDataset::new(locations, x, y).unwrap()
    }

    fn path_adjacency(n: usize) -> AdjacencyStructure {
        // unit spacing, bandwidth 1.5: each site adjacent to its line neighbors
        let data = line_dataset(n, 1.0);
        build_adjacency(&data, &vec![1.5; n], KernelFamily::Bisquare).unwrap()
    }

    #[test]
    fn fused_precision_path_graph() {
        let adj = path_adjacency(3);
        let tau = DVector::from_element(3, 1.0);
        let omega: BTreeMap<_, _> = adj.pairs().map(|p| (p, 0.5)).collect();
        let m = build_fused_precision(&tau, &omega, &adj);
        let expect =
            DMatrix::from_row_slice(3, 3, &[3.0, -2.0, 0.0, -2.0, 5.0, -2.0, 0.0, -2.0, 3.0]);
        assert_eq!(m, expect);
    }

    #[test]
    fn fused_precision_empty_pairs_is_diagonal() {
        let data = line_dataset(3, 10.0);
        let adj = build_adjacency(&data, &vec![1.0; 3], KernelFamily::Bisquare).unwrap();
        assert_eq!(adj.pair_count(), 0);
        let tau = DVector::from_vec(vec![0.5, 2.0, 4.0]);
        let m = build_fused_precision(&tau, &BTreeMap::new(), &adj);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / tau[i] } else { 0.0 };
                assert_eq!(m[(i, j)], expect);
            }
        }
    }

    #[test]
    fn fused_precision_rows_annihilate_constants() {
        // Laplacian structure: M * 1 recovers the 1/tau^2 entries
        let adj = path_adjacency(6);
        let tau = DVector::from_fn(6, |i, _| 0.5 + i as f64 * 0.3);
        let omega: BTreeMap<_, _> = adj.pairs().map(|p| (p, 0.7)).collect();
        let m = build_fused_precision(&tau, &omega, &adj);
        let ones = DVector::from_element(6, 1.0);
        let v = &m * &ones;
        for i in 0..6 {
            assert_relative_eq!(v[i], 1.0 / tau[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn fused_precision_matches_brute_force() {
        // random instances up to n = 20, exact equality against a double loop
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 4 + (trial % 17);
            let locations: Vec<Location> = (0..n)
                .map(|_| Location::new(rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 3.0))
                .collect();
            let x = DMatrix::from_element(n, 1, 1.0);
            let y = DVector::zeros(n);
            let data = SpatialDataset::new(locations, x, y).unwrap();
            let h: Vec<f64> = (0..n).map(|_| 0.3 + rng.gen::<f64>() * 1.5).collect();
            let adj = build_adjacency(&data, &h, KernelFamily::Bisquare).unwrap();
            let tau = DVector::from_fn(n, |_, _| 0.1 + rng.gen::<f64>());
            let omega: BTreeMap<_, _> =
                adj.pairs().map(|p| (p, 0.1 + rng.gen::<f64>())).collect();

            let got = build_fused_precision(&tau, &omega, &adj);

            let mut expect = DMatrix::zeros(n, n);
            for i in 0..n {
                let mut diag = 1.0 / tau[i];
                for j in 0..n {
                    if adj.contains_pair(i, j) {
                        diag += 1.0 / omega[&(i.min(j), i.max(j))];
                    }
                }
                expect[(i, i)] = diag;
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && adj.contains_pair(i, j) {
                        expect[(i, j)] = -1.0 / omega[&(i.min(j), i.max(j))];
                    }
                }
            }
            assert_eq!(got, expect, "mismatch at trial {trial} (n = {n})");
        }
    }

    fn small_dataset() -> SpatialDataset {
        let locations =
            vec![Location::new(0.0, 0.0), Location::new(1.0, 0.0), Location::new(0.0, 1.0)];
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -1.0, 2.0, 0.3, 1.5]);
        let y = DVector::from_vec(vec![2.0, -1.0, 0.5]);
        SpatialDataset::new(locations, x, y).unwrap()
    }

    #[test]
    fn partial_response_single_covariate_is_response() {
        let data = line_dataset(3, 1.0);
        let betas = vec![DVector::from_vec(vec![1.0, 2.0, 3.0])];
        let y1 = partial_response(0, &data, &betas);
        assert_eq!(y1, *data.response());
    }

    #[test]
    fn partial_response_zero_other_coefficient() {
        let data = small_dataset();
        let betas = vec![DVector::from_vec(vec![1.0, 2.0, 3.0]), DVector::zeros(3)];
        let y1 = partial_response(0, &data, &betas);
        assert_eq!(y1, *data.response());
    }

    #[test]
    fn partial_response_matches_elementwise_oracle() {
        let data = small_dataset();
        let betas = vec![
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DVector::from_vec(vec![-0.5, 0.25, 2.0]),
        ];
        let y0 = partial_response(0, &data, &betas);
        for i in 0..3 {
            let expect = data.response()[i] - data.covariates()[(i, 1)] * betas[1][i];
            assert_relative_eq!(y0[i], expect, max_relative = 1e-15);
        }
        let y1 = partial_response(1, &data, &betas);
        for i in 0..3 {
            let expect = data.response()[i] - data.covariates()[(i, 0)] * betas[0][i];
            assert_relative_eq!(y1[i], expect, max_relative = 1e-15);
        }
    }

    #[test]
    fn coefficient_draw_single_site_conjugate() {
        // One site, unit weight and covariate, vague prior: the posterior
        // mean approaches the observation.
        let x = DVector::from_element(1, 1.0);
        let g = [1.0];
        let y = DVector::from_element(1, 1.7);
        let precision = DMatrix::from_element(1, 1, 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut acc = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            acc += draw_coefficients(&x, &g, &y, &precision, 1e-4, &mut rng).unwrap()[0];
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.7).abs() < 1e-3, "posterior mean {mean}");
    }

    #[test]
    fn coefficient_draw_prior_dominated_shrinks_to_zero() {
        let x = DVector::from_element(3, 1e-3);
        let g = [1e-3; 3];
        let y = DVector::from_element(3, 5.0);
        let precision = DMatrix::identity(3, 3) * 1e6;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut acc = DVector::zeros(3);
        let draws = 2_000;
        for _ in 0..draws {
            acc += draw_coefficients(&x, &g, &y, &precision, 1.0, &mut rng).unwrap();
        }
        for i in 0..3 {
            assert!((acc[i] / draws as f64).abs() < 0.01);
        }
    }

    #[test]
    fn coefficient_draw_moments_match_dense_oracle() {
        let data = small_dataset();
        let adj = build_adjacency(&data, &vec![1.5; 3], KernelFamily::Bisquare).unwrap();
        let tau = DVector::from_element(3, 2.0);
        let omega: BTreeMap<_, _> = adj.pairs().map(|p| (p, 1.5)).collect();
        let precision = build_fused_precision(&tau, &omega, &adj);
        let y_k = DVector::from_vec(vec![1.0, -0.5, 0.25]);
        let sigma_sq = 0.8;

        // dense linear-algebra oracle
        let g = adj.column_squared_sums();
        let x0 = data.covariate(0);
        let mut a = precision.clone();
        let mut b = DVector::zeros(3);
        for j in 0..3 {
            a[(j, j)] += x0[j] * x0[j] * g[j];
            b[j] = x0[j] * g[j] * y_k[j];
        }
        let a_inv = a.clone().try_inverse().unwrap();
        let mean_expect = &a_inv * &b;
        let cov_expect = a_inv * sigma_sq;

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut sum = DVector::zeros(3);
        let mut cross = DMatrix::zeros(3, 3);
        for _ in 0..draws {
            let d = gibbs_beta(0, &data, &y_k, &adj, sigma_sq, &precision, &mut rng).unwrap();
            sum += &d;
            cross += &d * d.transpose();
        }
        let mean = sum / draws as f64;
        let cov = cross / draws as f64 - &mean * mean.transpose();
        for i in 0..3 {
            assert!((mean[i] - mean_expect[i]).abs() < 0.02, "mean[{i}]");
            for j in 0..3 {
                assert!(
                    (cov[(i, j)] - cov_expect[(i, j)]).abs() < 0.02,
                    "cov[{i}][{j}]: got {}, expected {}",
                    cov[(i, j)],
                    cov_expect[(i, j)]
                );
            }
        }
    }

    #[test]
    fn augmentation_handles_zero_coefficients() {
        let adj = path_adjacency(3);
        let beta = DVector::zeros(3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (tau, omega) = gibbs_augmentation(&beta, 1.0, 1.0, 1.0, &adj, &mut rng).unwrap();
        for t in tau.iter() {
            assert!(t.is_finite() && *t > 0.0);
        }
        for o in omega.values() {
            assert!(o.is_finite() && *o > 0.0);
        }
    }

    #[test]
    fn augmentation_moment_identity() {
        // lambda1^2 = 1, sigma^2 = 1, beta = 1: 1/tau^2 is inverse Gaussian
        // with mean 1
        let data = line_dataset(2, 10.0);
        let adj = build_adjacency(&data, &vec![1.0; 2], KernelFamily::Bisquare).unwrap();
        let beta = DVector::from_element(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws = 50_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let (tau, _) = gibbs_augmentation(&beta, 1.0, 1.0, 1.0, &adj, &mut rng).unwrap();
            acc += 1.0 / tau[0] + 1.0 / tau[1];
        }
        let mean = acc / (2 * draws) as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean of 1/tau^2: {mean}");
    }

    #[test]
    fn augmentation_ties_drive_fusion() {
        // A tied pair pushes the pair precision 1/omega^2 far above that of a
        // well separated pair: fusion pressure. Thresholds frozen from a
        // Monte Carlo run of the floored conditional.
        let adj = path_adjacency(2);
        assert_eq!(adj.pair_count(), 1);
        let tied = DVector::from_element(2, 1.3);
        let separated = DVector::from_vec(vec![-4.0, 6.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut draws_tied = Vec::new();
        let mut draws_sep = Vec::new();
        for _ in 0..1_000 {
            let (_, omega) = gibbs_augmentation(&tied, 1.0, 1.0, 1.0, &adj, &mut rng).unwrap();
            draws_tied.push(1.0 / omega[&(0, 1)]);
            let (_, omega) =
                gibbs_augmentation(&separated, 1.0, 1.0, 1.0, &adj, &mut rng).unwrap();
            draws_sep.push(1.0 / omega[&(0, 1)]);
        }
        draws_tied.sort_by(|a, b| a.partial_cmp(b).unwrap());
        draws_sep.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_tied = draws_tied[500];
        let median_sep = draws_sep[500];
        assert!(median_tied > 1.0, "tied-pair median precision {median_tied}");
        assert!(median_sep < 0.2, "separated-pair median precision {median_sep}");
        assert!(median_tied > 10.0 * median_sep);
    }

    #[test]
    fn sigma_sq_shape_counts_weighted_observations() {
        // with every weight positive the shape is the dense form r + p n^2 / 2
        let data = line_dataset(3, 1.0);
        let adj = build_adjacency(&data, &vec![100.0; 3], KernelFamily::Boxcar).unwrap();
        assert_eq!(positive_weight_count(&adj), 9);
        assert_relative_eq!(sigma_sq_shape(0.1, 2, positive_weight_count(&adj)), 9.1);
        // sparse weights count only their support
        let adj = build_adjacency(&data, &vec![1.5; 3], KernelFamily::Bisquare).unwrap();
        assert_eq!(positive_weight_count(&adj), 3 + 4);
        assert_relative_eq!(sigma_sq_shape(0.1, 2, 7), 7.1);
    }

    #[test]
    fn sigma_sq_zero_residual_keeps_prior_rate() {
        // beta reproduces y exactly: the rate stays at q
        let data = small_dataset();
        let adj = build_adjacency(&data, &vec![1.5; 3], KernelFamily::Bisquare).unwrap();
        let x0 = data.covariate(0);
        let x1 = data.covariate(1);
        // put everything on covariate 0, zero on covariate 1
        let beta0 = DVector::from_fn(3, |i, _| data.response()[i] / x0[i]);
        let betas = vec![beta0, DVector::zeros(3)];
        let _ = x1;
        let ssr = weighted_residual_ssr(&data, &betas, &adj);
        assert!(ssr.abs() < 1e-20, "ssr = {ssr}");
    }

    #[test]
    fn weighted_ssr_matches_double_loop_oracle() {
        let data = small_dataset();
        let adj = build_adjacency(&data, &vec![1.2; 3], KernelFamily::Bisquare).unwrap();
        let betas = vec![
            DVector::from_vec(vec![0.2, -0.7, 1.1]),
            DVector::from_vec(vec![1.5, 0.3, -0.4]),
        ];
        let got = weighted_residual_ssr(&data, &betas, &adj);

        // brute force over (i, k): || W(s_i) y_k - W(s_i) X_k beta_k ||^2
        let mut expect = 0.0;
        for i in 0..3 {
            for k in 0..2 {
                let y_k = partial_response(k, &data, &betas);
                for j in 0..3 {
                    let w = adj.weight(i, j);
                    let r = w * y_k[j] - w * data.covariates()[(j, k)] * betas[k][j];
                    expect += r * r;
                }
            }
        }
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn lambda_updates_use_counts() {
        let adj = path_adjacency(3); // pairs (0,1), (1,2): sum n_i = 4
        let tau = DVector::from_element(3, 2.0);
        let omega: BTreeMap<_, _> = adj.pairs().map(|p| (p, 0.5)).collect();
        let config = FitConfig::default();
        // moment check against the gamma parameters the update must use:
        // shape1 = r1 + n, rate1 = q1 + sum(tau)/2,
        // shape2 = r2 + sum(n_i)/2 = r2 + 2, rate2 = q2 + sum(omega)/2
        let shape1 = 0.1 + 3.0;
        let rate1 = 0.1 + 0.5 * 6.0;
        let shape2 = 0.1 + 2.0;
        let rate2 = 0.1 + 0.5 * 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 50_000;
        let (mut acc1, mut acc2) = (0.0, 0.0);
        for _ in 0..draws {
            let (l1, l2) = gibbs_lambdas(&tau, &omega, &adj, &config, &mut rng).unwrap();
            acc1 += l1;
            acc2 += l2;
        }
        let mean1 = acc1 / draws as f64;
        let mean2 = acc2 / draws as f64;
        assert!((mean1 - shape1 / rate1).abs() < 0.02, "lambda1 mean {mean1}");
        assert!((mean2 - shape2 / rate2).abs() < 0.03, "lambda2 mean {mean2}");
    }

    #[test]
    fn lambda_update_with_empty_graph_returns_prior() {
        let data = line_dataset(3, 10.0);
        let adj = build_adjacency(&data, &vec![1.0; 3], KernelFamily::Bisquare).unwrap();
        assert_eq!(adj.pair_count(), 0);
        let tau = DVector::from_element(3, 1.0);
        let config = FitConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let draws = 50_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let (_, l2) = gibbs_lambdas(&tau, &BTreeMap::new(), &adj, &config, &mut rng).unwrap();
            acc += l2;
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.0).abs() < 0.1, "prior mean {mean}"); // r2/q2 = 1
    }

    #[test]
    fn mh_acceptance_identities() {
        // identical centred sums: always accepted
        assert_eq!(mh_log_acceptance(4.0, 2.0, 4.0, 2.0, 1.0, 0.7, 1), 0.0);
        // zero residuals: ratio one regardless of the masses
        assert_eq!(mh_log_acceptance(0.0, 5.0, 0.0, 1.3, 0.0, 0.7, 1), 0.0);
        // scalar oracle on a two-site instance
        let (s_prop, m_prop, s_cur, m_cur, rbar, sigma_sq) = (1.9, 1.4, 0.8, 1.1, 0.9, 0.6);
        let expect = -((s_prop - m_prop * rbar) - (s_cur - m_cur * rbar)) / (2.0 * sigma_sq);
        assert_relative_eq!(
            mh_log_acceptance(s_prop, m_prop, s_cur, m_cur, rbar, sigma_sq, 1),
            expect
        );
        // pooled update divides the exponent by the site count
        assert_relative_eq!(
            mh_log_acceptance(s_prop, m_prop, s_cur, m_cur, rbar, sigma_sq, 10),
            expect / 10.0
        );
    }

    fn synthetic_dataset(n: usize, seed: u64) -> (SpatialDataset, Vec<f64>) {
        // two left-right clusters with coefficients 1 and 2
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut locations = Vec::with_capacity(n);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut truth = Vec::with_capacity(n);
        for _ in 0..n {
            let s1 = rng.gen::<f64>() * 2.0 - 1.0;
            let s2 = rng.gen::<f64>() * 2.0;
            let beta = if s1 <= 0.0 { 1.0 } else { 2.0 };
            let x: f64 = rng.sample(rand_distr::StandardNormal);
            let eps: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * 0.5;
            locations.push(Location::new(s1, s2));
            xs.push(x);
            ys.push(x * beta + eps);
            truth.push(beta);
        }
        let x = DMatrix::from_column_slice(n, 1, &xs);
        let y = DVector::from_vec(ys);
        (SpatialDataset::new(locations, x, y).unwrap(), truth)
    }

    #[test]
    fn chain_bookkeeping_and_determinism() {
        let (data, _) = synthetic_dataset(12, 420);
        let config = FitConfig {
            t_max: 10,
            burn_in: 0,
            thin: 1,
            adaptive_bandwidth: true,
            ..FitConfig::default()
        };
        let draws = run_chain(&data, &config, RngStream::new(3, 1)).unwrap();
        assert_eq!(draws.len(), 10);
        // retained count honours thinning
        let config2 = FitConfig { t_max: 11, burn_in: 0, thin: 2, ..config.clone() };
        let draws2 = run_chain(&data, &config2, RngStream::new(3, 1)).unwrap();
        assert_eq!(draws2.len(), 5);
        // fixed seed, identical draw sequences
        let again = run_chain(&data, &config, RngStream::new(3, 1)).unwrap();
        for (a, b) in draws.draws.iter().zip(&again.draws) {
            assert_eq!(a.beta, b.beta);
            assert_eq!(a.sigma_sq, b.sigma_sq);
            assert_eq!(a.h, b.h);
        }
        let other_stream = run_chain(&data, &config, RngStream::new(3, 2)).unwrap();
        assert_ne!(draws.draws[9].beta, other_stream.draws[9].beta);
    }

    #[test]
    fn shared_mode_keeps_bandwidths_equal() {
        let (data, _) = synthetic_dataset(10, 99);
        let config = FitConfig {
            t_max: 30,
            burn_in: 0,
            thin: 1,
            adaptive_bandwidth: false,
            ..FitConfig::default()
        };
        let draws = run_chain(&data, &config, RngStream::new(8, 0)).unwrap();
        for d in &draws.draws {
            assert!(d.h.iter().all(|&h| h == d.h[0]));
        }
        // and at least one proposal was accepted over 30 sweeps
        assert!(draws.acceptance_rates[0] > 0.0);
    }

    #[test]
    fn chain_beats_intercept_only_predictor() {
        let (data, _) = synthetic_dataset(60, 7);
        let config = FitConfig {
            t_max: 400,
            burn_in: 200,
            thin: 1,
            adaptive_bandwidth: true,
            ..FitConfig::default()
        };
        let draws = run_chain(&data, &config, RngStream::new(21, 4)).unwrap();
        let beta_hat = draws.posterior_mean_beta();
        let y_bar = data.response().iter().sum::<f64>() / 60.0;
        let mut model_sse = 0.0;
        let mut baseline_sse = 0.0;
        for i in 0..60 {
            let fitted = data.covariates()[(i, 0)] * beta_hat[(i, 0)];
            model_sse += (data.response()[i] - fitted).powi(2);
            baseline_sse += (data.response()[i] - y_bar).powi(2);
        }
        assert!(
            model_sse < baseline_sse,
            "model SSE {model_sse} vs intercept-only {baseline_sse}"
        );
    }
}
