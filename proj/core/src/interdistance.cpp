#include "hopcalc/interdistance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hopcalc/errors.hpp"

namespace hopcalc {

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("interdistance rate must be > 0");
}

std::vector<double> split_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

// shortest decimal that parses back to the same double
std::string format_double(double v) {
  char buf[40];
  for (int prec = 12; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

InterdistanceModel InterdistanceModel::exponential(double rate) {
  check_rate(rate);
  InterdistanceModel m;
  m.kind_ = ModelKind::Exponential;
  m.rates_ = {rate};
  m.weights_ = {1.0};
  return m;
}

InterdistanceModel InterdistanceModel::hyperexponential(std::vector<double> weights,
                                                        std::vector<double> rates) {
  if (weights.empty() || weights.size() != rates.size())
    throw std::invalid_argument("hyperexponential: weights/rates size mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("hyperexponential: weights must be > 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("hyperexponential: weights must sum to 1");
  for (double r : rates) check_rate(r);
  InterdistanceModel m;
  m.kind_ = ModelKind::Hyperexponential;
  m.weights_ = std::move(weights);
  m.rates_ = std::move(rates);
  return m;
}

InterdistanceModel InterdistanceModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical: no samples");
  for (double s : samples)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("empirical: samples must be nonnegative");
  std::sort(samples.begin(), samples.end());
  InterdistanceModel m;
  m.kind_ = ModelKind::Empirical;
  m.samples_ = std::move(samples);
  return m;
}

double InterdistanceModel::cdf(double x) const {
  if (x < 0.0) return 0.0;
  switch (kind_) {
    case ModelKind::Exponential:
      return -std::expm1(-rates_[0] * x);
    case ModelKind::Hyperexponential: {
      double tail = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i)
        tail += weights_[i] * std::exp(-rates_[i] * x);
      return 1.0 - tail;
    }
    case ModelKind::Empirical: {
      auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
      return static_cast<double>(it - samples_.begin()) / samples_.size();
    }
  }
  return 0.0;
}

std::optional<double> InterdistanceModel::pdf(double x) const {
  if (kind_ == ModelKind::Empirical) return std::nullopt;
  if (x < 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    d += weights_[i] * rates_[i] * std::exp(-rates_[i] * x);
  return d;
}

double InterdistanceModel::mean() const {
  switch (kind_) {
    case ModelKind::Exponential:
      return 1.0 / rates_[0];
    case ModelKind::Hyperexponential: {
      double m = 0.0;
      for (std::size_t i = 0; i < rates_.size(); ++i) m += weights_[i] / rates_[i];
      return m;
    }
    case ModelKind::Empirical:
      return std::accumulate(samples_.begin(), samples_.end(), 0.0) / samples_.size();
  }
  return 0.0;
}

double InterdistanceModel::sample(SplitMix64& rng) const {
  switch (kind_) {
    case ModelKind::Exponential:
      return rng.exponential(rates_[0]);
    case ModelKind::Hyperexponential: {
      double u = rng.uniform01();
      double acc = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        if (u < acc || i + 1 == weights_.size()) return rng.exponential(rates_[i]);
      }
      return rng.exponential(rates_.back());
    }
    case ModelKind::Empirical: {
      // bootstrap draw from the stored values
      std::size_t i = static_cast<std::size_t>(rng.uniform01() * samples_.size());
      if (i >= samples_.size()) i = samples_.size() - 1;
      return samples_[i];
    }
  }
  return 0.0;
}

double InterdistanceModel::mixing_rate() const {
  if (kind_ != ModelKind::Hyperexponential || rates_.size() != 2)
    throw std::invalid_argument("mixing_rate: two-component hyperexponential only");
  return rates_[0] * (1.0 - weights_[0]) + rates_[1] * (1.0 - weights_[1]);
}

std::string InterdistanceModel::serialize() const {
  switch (kind_) {
    case ModelKind::Exponential:
      return "kind=exp; mean=" + format_double(1.0 / rates_[0]);
    case ModelKind::Hyperexponential: {
      std::vector<double> means(rates_.size());
      for (std::size_t i = 0; i < rates_.size(); ++i) means[i] = 1.0 / rates_[i];
      return "kind=hyperexp; alphas=" + join_doubles(weights_) +
             "; means=" + join_doubles(means);
    }
    case ModelKind::Empirical:
      return "kind=empirical; samples=" + join_doubles(samples_);
  }
  return {};
}

InterdistanceModel InterdistanceModel::parse(const std::string& text) {
  std::string kind;
  std::vector<double> alphas, means, samples;
  double mean_single = -1.0;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ';')) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq);
    std::string val = field.substr(eq + 1);
    auto strip = [](std::string& s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' ||
                            s.back() == '\r'))
        s.pop_back();
    };
    strip(key);
    strip(val);
    if (key == "kind") kind = val;
    else if (key == "alphas") alphas = split_csv_doubles(val);
    else if (key == "means") means = split_csv_doubles(val);
    else if (key == "mean") mean_single = std::stod(val);
    else if (key == "samples") samples = split_csv_doubles(val);
    else throw std::invalid_argument("model parse: unknown key '" + key + "'");
  }
  if (kind == "exp") {
    if (!(mean_single > 0.0)) throw std::invalid_argument("model parse: exp needs mean>0");
    return exponential(1.0 / mean_single);
  }
  if (kind == "hyperexp") {
    if (alphas.size() != means.size() || alphas.empty())
      throw std::invalid_argument("model parse: hyperexp needs matching alphas/means");
    std::vector<double> rates(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
      if (!(means[i] > 0.0)) throw std::invalid_argument("model parse: means must be > 0");
      rates[i] = 1.0 / means[i];
    }
    return hyperexponential(std::move(alphas), std::move(rates));
  }
  if (kind == "empirical") return empirical(std::move(samples));
  throw std::invalid_argument("model parse: unknown kind '" + kind + "'");
}

}  // namespace hopcalc
