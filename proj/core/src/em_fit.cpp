#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hopcalc/errors.hpp"
#include "hopcalc/interdistance.hpp"

namespace hopcalc {

namespace {

// 1-D k-means on log-samples; returns per-group mean of the raw samples.
std::vector<double> kmeans_group_means(std::span<const double> samples, int k) {
  std::vector<double> lx(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    lx[i] = std::log(std::max(samples[i], 1e-300));
  std::sort(lx.begin(), lx.end());

  // centroids at group quantiles, then Lloyd iterations (1-D: assignment by
  // nearest centroid is an interval partition)
  std::vector<double> c(k);
  for (int j = 0; j < k; ++j)
    c[j] = lx[std::min(lx.size() - 1, (2 * j + 1) * lx.size() / (2 * k))];
  for (int it = 0; it < 50; ++it) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (double v : lx) {
      int best = 0;
      double bd = std::abs(v - c[0]);
      for (int j = 1; j < k; ++j) {
        double d = std::abs(v - c[j]);
        if (d < bd) { bd = d; best = j; }
      }
      sum[best] += v;
      ++cnt[best];
    }
    bool moved = false;
    for (int j = 0; j < k; ++j) {
      if (cnt[j] == 0) continue;
      double nc = sum[j] / cnt[j];
      if (std::abs(nc - c[j]) > 1e-12) moved = true;
      c[j] = nc;
    }
    if (!moved) break;
  }

  // group raw samples by nearest centroid in log space
  std::vector<double> gsum(k, 0.0);
  std::vector<std::size_t> gcnt(k, 0);
  for (double x : samples) {
    double v = std::log(std::max(x, 1e-300));
    int best = 0;
    double bd = std::abs(v - c[0]);
    for (int j = 1; j < k; ++j) {
      double d = std::abs(v - c[j]);
      if (d < bd) { bd = d; best = j; }
    }
    gsum[best] += x;
    ++gcnt[best];
  }
  std::vector<double> means(k);
  double overall = 0.0;
  for (double x : samples) overall += x;
  overall /= samples.size();
  for (int j = 0; j < k; ++j)
    means[j] = gcnt[j] ? gsum[j] / gcnt[j] : overall;
  return means;
}

}  // namespace

FitResult fit_hyperexponential(std::span<const double> samples, int k,
                               const FitConfig& config) {
  if (k < 1) throw std::invalid_argument("fit: k must be >= 1");
  if (samples.size() < 100) throw std::invalid_argument("fit: need >= 100 samples");
  for (double x : samples)
    if (!(x > 0.0)) throw std::invalid_argument("fit: samples must be > 0");

  const double xmin = *std::min_element(samples.begin(), samples.end());
  const double xmax = *std::max_element(samples.begin(), samples.end());
  if (xmax - xmin <= 1e-12 * xmax)
    throw numerical_error("fit: degenerate samples (all equal)");

  const std::size_t n = samples.size();

  if (k == 1) {
    // exponential MLE, no iteration
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    FitResult r;
    r.model = InterdistanceModel::exponential(1.0 / mean);
    r.iterations = 0;
    r.log_likelihood = n * (-std::log(mean) - 1.0);
    return r;
  }

  std::vector<double> means = kmeans_group_means(samples, k);
  std::vector<double> rate(k), w(k, 1.0 / k);
  for (int j = 0; j < k; ++j) rate[j] = 1.0 / std::max(means[j], 1e-12);

  FitResult r;
  double ll_old = -std::numeric_limits<double>::infinity();
  std::vector<double> resp(k);
  std::vector<double> nk(k), sx(k);
  for (int it = 0; it < config.max_iter; ++it) {
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(sx.begin(), sx.end(), 0.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double tot = 0.0;
      for (int j = 0; j < k; ++j) {
        resp[j] = w[j] * rate[j] * std::exp(-rate[j] * samples[i]);
        tot += resp[j];
      }
      ll += std::log(std::max(tot, 1e-300));
      for (int j = 0; j < k; ++j) {
        double g = resp[j] / tot;
        nk[j] += g;
        sx[j] += g * samples[i];
      }
    }
    r.ll_trace.push_back(ll);
    r.iterations = it + 1;
    for (int j = 0; j < k; ++j) {
      w[j] = nk[j] / n;
      if (nk[j] > 0.0 && sx[j] > 0.0) rate[j] = nk[j] / sx[j];
    }
    if (std::isfinite(ll_old) && std::abs(ll - ll_old) < config.tol * std::abs(ll)) {
      ll_old = ll;
      break;
    }
    ll_old = ll;
  }
  r.log_likelihood = ll_old;

  // renormalize weights against accumulated round-off, drop empty components
  double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> fw, fr;
  for (int j = 0; j < k; ++j) {
    if (w[j] / wsum < 1e-12) continue;
    fw.push_back(w[j] / wsum);
    fr.push_back(rate[j]);
  }
  double fsum = std::accumulate(fw.begin(), fw.end(), 0.0);
  for (double& x : fw) x /= fsum;
  r.model = fw.size() == 1 ? InterdistanceModel::exponential(fr[0])
                           : InterdistanceModel::hyperexponential(fw, fr);
  return r;
}

}  // namespace hopcalc
