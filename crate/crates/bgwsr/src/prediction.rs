//! Coefficient and response prediction at unobserved locations, with
//! posterior predictive summaries over retained draws.
//!
//! The predicted coefficient at a new site is the kernel-weighted sum of the
//! observed sites' coefficients, where each observed site contributes under
//! its own bandwidth. The plain weighted sum is the default; it scales with
//! the neighbour count, so dense regions usually want the normalised variant
//! that divides by the weight total.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sampler::PosteriorDraws;
use crate::spatial::{distance, KernelFamily, Location, SpatialDataset};

/// Prediction sites and their covariates.
#[derive(Debug, Clone)]
pub struct PredictionRequest {
    pub sites: Vec<Location>,
    /// `n* x p` covariates at the prediction sites.
    pub x_star: DMatrix<f64>,
    /// Divide predicted coefficients by the weight total when it is positive.
    pub normalize_weights: bool,
}

impl PredictionRequest {
    pub fn new(sites: Vec<Location>, x_star: DMatrix<f64>, normalize_weights: bool) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::invalid("need at least one prediction site"));
        }
        if x_star.nrows() != sites.len() {
            return Err(Error::invalid(format!(
                "{} sites but {} covariate rows",
                sites.len(),
                x_star.nrows()
            )));
        }
        if sites.iter().any(|s| !s.is_finite()) || x_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite entry in prediction request"));
        }
        Ok(PredictionRequest { sites, x_star, normalize_weights })
    }
}

/// Central posterior summary of a scalar prediction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub lo95: f64,
    pub hi95: f64,
}

/// Per-site prediction results.
#[derive(Debug, Clone)]
pub struct SitePrediction {
    pub site: Location,
    /// One summary per covariate; `None` when the site was isolated under
    /// every draw.
    pub beta: Vec<Option<Summary>>,
    pub y: Option<Summary>,
    /// Number of draws under which the site had zero weight to every
    /// observed location.
    pub isolated_draws: usize,
}

#[derive(Debug, Clone)]
pub struct PredictionResult {
    pub sites: Vec<SitePrediction>,
    /// Per-draw responses, `draws x sites`; the raw material for the
    /// summaries above.
    pub y_draws: DMatrix<f64>,
}

/// Kernel weights from a prediction site to every observed location, each
/// observed site `j` contributing under its own bandwidth `h_j`. An all-zero
/// vector is allowed: the site is isolated and handled downstream.
pub fn prediction_weights(
    site: Location,
    data: &SpatialDataset,
    bandwidths: &[f64],
    family: KernelFamily,
) -> Vec<f64> {
    data.locations()
        .iter()
        .zip(bandwidths)
        .map(|(&s_j, &h_j)| family.weight(h_j, distance(site, s_j)))
        .collect()
}

/// Predicted coefficient vector: the weighted sum of observed coefficients,
/// optionally normalised by the weight total.
///
/// With normalisation on and every weight zero there is nothing to divide
/// by; the caller gets an isolated-site error and decides how to proceed.
pub fn predict_coefficients(
    weights: &[f64],
    beta: &DMatrix<f64>,
    normalize: bool,
) -> Result<DVector<f64>> {
    let p = beta.ncols();
    let mut out = DVector::zeros(p);
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for k in 0..p {
            out[k] += w * beta[(j, k)];
        }
    }
    if normalize {
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            out /= total;
        } else {
            return Err(Error::IsolatedSite { site: 0 });
        }
    }
    Ok(out)
}

/// Predicted response: the inner product of the covariates at the site with
/// the predicted coefficients.
pub fn predict_response(x_star: &DVector<f64>, beta_hat: &DVector<f64>) -> f64 {
    x_star.dot(beta_hat)
}

/// Empirical quantile by linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn summarize(values: &mut Vec<f64>) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some(Summary {
        mean,
        median: quantile(values, 0.5),
        lo95: quantile(values, 0.025),
        hi95: quantile(values, 0.975),
    })
}

/// Predicts coefficients and responses at every requested site for every
/// retained draw, then summarises across draws.
///
/// Weights are recomputed per draw with that draw's bandwidths. Under
/// normalisation a draw that isolates a site contributes nothing to that
/// site's summaries; a site isolated under every draw gets `None` summaries.
pub fn predict_all(
    draws: &PosteriorDraws,
    request: &PredictionRequest,
    data: &SpatialDataset,
    family: KernelFamily,
) -> Result<PredictionResult> {
    if draws.is_empty() {
        return Err(Error::invalid("no retained draws to predict from"));
    }
    let n_star = request.sites.len();
    let p = data.p();
    let n_draws = draws.len();
    let mut y_draws = DMatrix::zeros(n_draws, n_star);
    let mut beta_draws: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); p]; n_star];
    let mut y_kept: Vec<Vec<f64>> = vec![Vec::new(); n_star];
    let mut isolated = vec![0usize; n_star];

    for (t, draw) in draws.draws.iter().enumerate() {
        for (s, &site) in request.sites.iter().enumerate() {
            let w = prediction_weights(site, data, &draw.h, family);
            let x_star = request.x_star.row(s).transpose();
            match predict_coefficients(&w, &draw.beta, request.normalize_weights) {
                Ok(beta_hat) => {
                    let y_hat = predict_response(&x_star, &beta_hat);
                    y_draws[(t, s)] = y_hat;
                    y_kept[s].push(y_hat);
                    for k in 0..p {
                        beta_draws[s][k].push(beta_hat[k]);
                    }
                }
                Err(Error::IsolatedSite { .. }) => {
                    isolated[s] += 1;
                    y_draws[(t, s)] = f64::NAN;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let sites = request
        .sites
        .iter()
        .enumerate()
        .map(|(s, &site)| SitePrediction {
            site,
            beta: (0..p).map(|k| summarize(&mut beta_draws[s][k])).collect(),
            y: summarize(&mut y_kept[s]),
            isolated_draws: isolated[s],
        })
        .collect();
    Ok(PredictionResult { sites, y_draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::RetainedDraw;
    use approx::assert_relative_eq;

    fn three_site_data() -> SpatialDataset {
        let locations = vec![
            Location::new(0.0, 0.0),
            Location::new(1.0, 0.0),
            Location::new(2.0, 0.0),
        ];
        let x = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::zeros(3);
        SpatialDataset::new(locations, x, y).unwrap()
    }

    #[test]
    fn weights_use_observed_site_bandwidths() {
        let data = three_site_data();
        // coincident with site 0: weight 1 there
        let w = prediction_weights(
            Location::new(0.0, 0.0),
            &data,
            &[1.0, 1.0, 1.0],
            KernelFamily::Bisquare,
        );
        assert_eq!(w[0], 1.0);
        // mixed bandwidths: elementwise kernel oracle
        let site = Location::new(0.5, 0.5);
        let h = [0.9, 1.5, 0.3];
        let w = prediction_weights(site, &data, &h, KernelFamily::Bisquare);
        for j in 0..3 {
            let d = distance(site, data.locations()[j]);
            let expect = KernelFamily::Bisquare.weight(h[j], d);
            assert_relative_eq!(w[j], expect, max_relative = 1e-15);
        }
        // farther than every bandwidth: all zero
        let w = prediction_weights(Location::new(50.0, 0.0), &data, &h, KernelFamily::Bisquare);
        assert!(w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coefficient_prediction_modes() {
        let beta = DMatrix::from_column_slice(3, 1, &[2.0, 3.0, 9.0]);
        // single neighbour with weight 0.75
        let w = [0.75, 0.0, 0.0];
        let plain = predict_coefficients(&w, &beta, false).unwrap();
        assert_relative_eq!(plain[0], 1.5);
        let norm = predict_coefficients(&w, &beta, true).unwrap();
        assert_relative_eq!(norm[0], 2.0);
        // coincident site dominates
        let w = [1.0, 0.0, 0.0];
        assert_relative_eq!(predict_coefficients(&w, &beta, false).unwrap()[0], 2.0);
        assert_relative_eq!(predict_coefficients(&w, &beta, true).unwrap()[0], 2.0);
        // weights summing to one agree in both modes
        let w = [0.5, 0.5, 0.0];
        let a = predict_coefficients(&w, &beta, false).unwrap();
        let b = predict_coefficients(&w, &beta, true).unwrap();
        assert_relative_eq!(a[0], 2.5);
        assert_relative_eq!(a[0], b[0]);
        // all-zero weights: zero unnormalised, error normalised
        let w = [0.0, 0.0, 0.0];
        assert_eq!(predict_coefficients(&w, &beta, false).unwrap()[0], 0.0);
        assert!(matches!(
            predict_coefficients(&w, &beta, true),
            Err(Error::IsolatedSite { .. })
        ));
    }

    #[test]
    fn normalized_prediction_stays_in_convex_hull() {
        let beta = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 4.0, -1.0, 0.0, 3.0]);
        let w = [0.2, 0.9, 0.4];
        let out = predict_coefficients(&w, &beta, true).unwrap();
        assert!(out[0] >= 1.0 && out[0] <= 4.0);
        assert!(out[1] >= -1.0 && out[1] <= 3.0);
    }

    #[test]
    fn response_is_inner_product() {
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![5.0, 7.0]);
        assert_eq!(predict_response(&x, &b), 5.0);
        assert_eq!(predict_response(&DVector::zeros(2), &b), 0.0);
        let x = DVector::from_vec(vec![0.3, -1.2, 0.8, 2.0]);
        let b = DVector::from_vec(vec![1.5, 0.4, -0.6, 0.25]);
        let expect = 0.3 * 1.5 + (-1.2) * 0.4 + 0.8 * (-0.6) + 2.0 * 0.25;
        assert_relative_eq!(predict_response(&x, &b), expect);
    }

    fn fake_draws(betas: Vec<DMatrix<f64>>, h: Vec<f64>) -> PosteriorDraws {
        let draws = betas
            .into_iter()
            .enumerate()
            .map(|(t, beta)| RetainedDraw {
                iter: t,
                beta,
                sigma_sq: 1.0,
                lambda1_sq: vec![],
                lambda2_sq: vec![],
                h: h.clone(),
            })
            .collect();
        PosteriorDraws { draws, acceptance_rates: vec![] }
    }

    #[test]
    fn single_draw_has_degenerate_interval() {
        let data = three_site_data();
        let draws = fake_draws(
            vec![DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0])],
            vec![1.5; 3],
        );
        let request = PredictionRequest::new(
            vec![Location::new(0.5, 0.0)],
            DMatrix::from_element(1, 1, 1.0),
            true,
        )
        .unwrap();
        let result = predict_all(&draws, &request, &data, KernelFamily::Bisquare).unwrap();
        let y = result.sites[0].y.unwrap();
        assert_eq!(y.mean, y.median);
        assert_eq!(y.lo95, y.hi95);
        assert_eq!(y.lo95, y.mean);
    }

    #[test]
    fn identical_draws_have_zero_width_everywhere() {
        let data = three_site_data();
        let beta = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let draws = fake_draws(vec![beta.clone(), beta.clone(), beta], vec![1.5; 3]);
        let request = PredictionRequest::new(
            vec![Location::new(0.5, 0.0), Location::new(1.5, 0.2)],
            DMatrix::from_element(2, 1, 1.0),
            false,
        )
        .unwrap();
        let result = predict_all(&draws, &request, &data, KernelFamily::Bisquare).unwrap();
        for site in &result.sites {
            let y = site.y.unwrap();
            assert_eq!(y.hi95 - y.lo95, 0.0);
        }
    }

    #[test]
    fn quantiles_match_sorting_oracle() {
        // 50 synthetic draws at a 2-site request
        let data = three_site_data();
        let mut betas = Vec::new();
        for t in 0..50 {
            let v = (t as f64 * 0.37).sin() * 2.0;
            betas.push(DMatrix::from_column_slice(3, 1, &[v, v + 1.0, v - 0.5]));
        }
        let draws = fake_draws(betas, vec![1.5; 3]);
        let request = PredictionRequest::new(
            vec![Location::new(0.4, 0.0), Location::new(1.8, 0.0)],
            DMatrix::from_element(2, 1, 1.0),
            true,
        )
        .unwrap();
        let result = predict_all(&draws, &request, &data, KernelFamily::Bisquare).unwrap();

        for s in 0..2 {
            let mut ys: Vec<f64> = (0..50).map(|t| result.y_draws[(t, s)]).collect();
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // independent interpolation oracle
            let oracle = |q: f64| {
                let pos = q * 49.0;
                let lo = pos.floor() as usize;
                let frac = pos - lo as f64;
                if lo + 1 < 50 {
                    ys[lo] * (1.0 - frac) + ys[lo + 1] * frac
                } else {
                    ys[49]
                }
            };
            let summary = result.sites[s].y.unwrap();
            assert_relative_eq!(summary.lo95, oracle(0.025), max_relative = 1e-12);
            assert_relative_eq!(summary.median, oracle(0.5), max_relative = 1e-12);
            assert_relative_eq!(summary.hi95, oracle(0.975), max_relative = 1e-12);
        }
    }

    #[test]
    fn interval_endpoints_monotone_in_level() {
        // widening the nominal level pushes the lower endpoint down and the
        // upper endpoint up
        let mut values: Vec<f64> = (0..101).map(|i| (i as f64 * 0.713).sin() * 3.0).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev_lo = f64::INFINITY;
        let mut prev_hi = f64::NEG_INFINITY;
        for level in [0.5, 0.8, 0.9, 0.95, 0.99] {
            let lo = quantile(&values, (1.0 - level) / 2.0);
            let hi = quantile(&values, 1.0 - (1.0 - level) / 2.0);
            assert!(lo <= prev_lo + 1e-12, "lower endpoint rose at level {level}");
            assert!(hi >= prev_hi - 1e-12, "upper endpoint fell at level {level}");
            prev_lo = lo;
            prev_hi = hi;
        }
    }

    #[test]
    fn fully_isolated_site_is_flagged() {
        let data = three_site_data();
        let draws = fake_draws(
            vec![DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0])],
            vec![0.5; 3],
        );
        let request = PredictionRequest::new(
            vec![Location::new(30.0, 0.0)],
            DMatrix::from_element(1, 1, 1.0),
            true,
        )
        .unwrap();
        let result = predict_all(&draws, &request, &data, KernelFamily::Bisquare).unwrap();
        assert_eq!(result.sites[0].isolated_draws, 1);
        assert!(result.sites[0].y.is_none());
        assert!(result.sites[0].beta[0].is_none());
    }
}
