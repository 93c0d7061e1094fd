#include "quadcatch/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace quadcatch {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)

// Cholesky factor of a symmetric positive definite covariance; throws on
// failure.
Mat3 cholesky_of(const Mat3& cov) {
  Eigen::LLT<Mat3> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw InvalidInputError("covariance matrix is not positive definite");
  }
  return llt.matrixL();
}

double log_gaussian(const Vec3& x, const Vec3& mean, const Mat3& chol_l,
                    double log_norm) {
  // Solve L y = (x - mean); the Mahalanobis term is |y|^2.
  const Vec3 y = chol_l.triangularView<Eigen::Lower>().solve(x - mean);
  return log_norm - 0.5 * y.squaredNorm();
}

double log_normalizer(const Mat3& chol_l) {
  const double log_det =
      2.0 * (std::log(chol_l(0, 0)) + std::log(chol_l(1, 1)) + std::log(chol_l(2, 2)));
  return -0.5 * (3.0 * kLog2Pi + log_det);
}

// Clamps covariance eigenvalues from below and re-symmetrizes.
Mat3 floor_covariance(const Mat3& cov, double floor) {
  const Mat3 sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
  Vec3 vals = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

int count_distinct(const std::vector<Vec3>& points) {
  std::vector<Vec3> seen;
  for (const auto& p : points) {
    bool found = false;
    for (const auto& q : seen) {
      if (p == q) {
        found = true;
        break;
      }
    }
    if (!found) {
      seen.push_back(p);
    }
  }
  return static_cast<int>(seen.size());
}

// k-means++ style seeding: means drawn from the data, biased toward points
// far from the means already chosen.
std::vector<Vec3> seed_means(const std::vector<Vec3>& points, int k,
                             std::mt19937_64& rng) {
  std::vector<Vec3> means;
  means.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  means.push_back(points[first(rng)]);

  std::vector<double> dist2(points.size());
  while (static_cast<int>(means.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : means) {
        best = std::min(best, (points[i] - m).squaredNorm());
      }
      dist2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All remaining points coincide with a chosen mean; reuse any point.
      means.push_back(points[first(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> pick(0.0, total);
    double target = pick(rng);
    std::size_t chosen = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      target -= dist2[i];
      if (target <= 0.0) {
        chosen = i;
        break;
      }
    }
    means.push_back(points[chosen]);
  }
  return means;
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw InvalidInputError("mixture needs at least one component");
  }
  double weight_sum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || c.weight > 1.0 + 1e-12) {
      throw InvalidInputError("component weights must lie in (0, 1]");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw InvalidInputError("component parameters must be finite");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw InvalidInputError("component weights must sum to one");
  }
  chol_.reserve(components_.size());
  log_norm_.reserve(components_.size());
  for (const auto& c : components_) {
    chol_.push_back(cholesky_of(c.covariance));
    log_norm_.push_back(log_normalizer(chol_.back()));
  }
}

double GaussianMixture::log_density(const Vec3& x) const {
  if (components_.empty()) {
    throw InvalidInputError("mixture is empty");
  }
  double max_term = -std::numeric_limits<double>::infinity();
  std::array<double, 16> small;
  std::vector<double> big;
  double* terms = small.data();
  if (components_.size() > small.size()) {
    big.resize(components_.size());
    terms = big.data();
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    terms[i] = std::log(components_[i].weight) +
               log_gaussian(x, components_[i].mean, chol_[i], log_norm_[i]);
    max_term = std::max(max_term, terms[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    sum += std::exp(terms[i] - max_term);
  }
  return max_term + std::log(sum);
}

double log_density(const GaussianMixture& mix, const Vec3& x) {
  return mix.log_density(x);
}

EmResult fit_em(const DemoDataset& data, int k, const EmOptions& opts) {
  if (k < 1) {
    throw InvalidInputError("component count must be at least 1");
  }
  const auto& pts = data.points;
  const int n = static_cast<int>(pts.size());
  if (n < k + 1) {
    throw InsufficientDataError("need at least k + 1 demonstration points");
  }
  if (count_distinct(pts) < k + 1) {
    throw DegenerateFitError("need at least k + 1 distinct demonstration points");
  }

  std::mt19937_64 rng(opts.seed);

  // Initialise: seeded means, shared sample covariance, uniform weights.
  Vec3 data_mean = Vec3::Zero();
  for (const auto& p : pts) {
    data_mean += p;
  }
  data_mean /= n;
  Mat3 data_cov = Mat3::Zero();
  for (const auto& p : pts) {
    data_cov += (p - data_mean) * (p - data_mean).transpose();
  }
  data_cov /= n;
  data_cov = floor_covariance(data_cov, opts.covariance_floor);

  std::vector<GaussianComponent> comps(k);
  const auto means = seed_means(pts, k, rng);
  for (int j = 0; j < k; ++j) {
    comps[j].weight = 1.0 / k;
    comps[j].mean = means[j];
    comps[j].covariance = data_cov;
  }

  std::vector<Mat3> chol(k);
  std::vector<double> log_norm(k);
  auto refresh_chol = [&]() {
    for (int j = 0; j < k; ++j) {
      chol[j] = cholesky_of(comps[j].covariance);
      log_norm[j] = log_normalizer(chol[j]);
    }
  };
  refresh_chol();

  Eigen::MatrixXd resp(n, k);
  EmResult result;
  std::vector<GaussianComponent> best = comps;
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E step and the current log-likelihood.
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double max_term = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        resp(i, j) = std::log(comps[j].weight) +
                     log_gaussian(pts[i], comps[j].mean, chol[j], log_norm[j]);
        max_term = std::max(max_term, resp(i, j));
      }
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        resp(i, j) = std::exp(resp(i, j) - max_term);
        sum += resp(i, j);
      }
      resp.row(i) /= sum;
      ll += max_term + std::log(sum);
    }

    if (ll + 1e-9 * (1.0 + std::abs(ll)) < prev_ll) {
      // Covariance flooring can break the EM guarantee; keep the best
      // iterate and stop.
      result.converged = true;
      break;
    }
    best = comps;
    result.log_likelihood.push_back(ll);
    result.iterations = iter + 1;
    if (iter > 0 && ll - prev_ll < opts.tol) {
      result.converged = true;
      prev_ll = ll;
      break;
    }
    prev_ll = ll;

    // M step.
    for (int j = 0; j < k; ++j) {
      const double nk = resp.col(j).sum();
      if (!(nk > 1e-12)) {
        throw DegenerateFitError("a mixture component collapsed to zero weight");
      }
      Vec3 mu = Vec3::Zero();
      for (int i = 0; i < n; ++i) {
        mu += resp(i, j) * pts[i];
      }
      mu /= nk;
      Mat3 cov = Mat3::Zero();
      for (int i = 0; i < n; ++i) {
        const Vec3 d = pts[i] - mu;
        cov += resp(i, j) * d * d.transpose();
      }
      cov /= nk;
      comps[j].weight = nk / n;
      comps[j].mean = mu;
      comps[j].covariance = floor_covariance(cov, opts.covariance_floor);
    }
    // Renormalize against accumulated rounding.
    double wsum = 0.0;
    for (const auto& c : comps) {
      wsum += c.weight;
    }
    for (auto& c : comps) {
      c.weight /= wsum;
    }
    refresh_chol();
  }

  result.mixture = GaussianMixture(best);
  return result;
}

double bic(const GaussianMixture& mix, const DemoDataset& data) {
  if (data.points.empty()) {
    throw InvalidInputError("BIC needs a non-empty dataset");
  }
  const int k = mix.k();
  const double p = (k - 1) + 3 * k + 6 * k;
  double ll = 0.0;
  for (const auto& x : data.points) {
    ll += mix.log_density(x);
  }
  return p * std::log(static_cast<double>(data.points.size())) - 2.0 * ll;
}

GaussianMixture select_k(const DemoDataset& data, const std::vector<int>& k_values,
                         const EmOptions& opts) {
  if (k_values.empty()) {
    throw InvalidInputError("k range must be non-empty");
  }
  std::vector<int> ks = k_values;
  std::sort(ks.begin(), ks.end());

  bool have_best = false;
  GaussianMixture best_mix;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k : ks) {
    EmResult fit = fit_em(data, k, opts);
    const double score = bic(fit.mixture, data);
    if (!have_best || score < best_bic) {
      have_best = true;
      best_bic = score;
      best_mix = std::move(fit.mixture);
    }
  }
  return best_mix;
}

GaussianMixture select_k(const DemoDataset& data, int k_min, int k_max,
                         const EmOptions& opts) {
  if (k_min < 1 || k_max < k_min) {
    throw InvalidInputError("invalid k range");
  }
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k) {
    ks.push_back(k);
  }
  return select_k(data, ks, opts);
}

DemoDataset generate_demo_dataset(int n, const Vec3& mean, const Vec3& stddev,
                                  std::uint64_t seed) {
  if (n < 1) {
    throw InvalidInputError("demo dataset size must be positive");
  }
  if ((stddev.array() < 0.0).any()) {
    throw InvalidInputError("demo stddev must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DemoDataset data;
  data.source = "synthetic";
  data.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      p(a) = mean(a) + stddev(a) * gauss(rng);
    }
    data.points.push_back(p);
  }
  return data;
}

void save_demo_dataset(const DemoDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidInputError("cannot open demo dataset for writing: " + path.string());
  }
  out << "# quadcatch demo dataset: x y z\n";
  out.precision(17);
  for (const auto& p : data.points) {
    out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
}

DemoDataset load_demo_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("cannot open demo dataset: " + path.string());
  }
  DemoDataset data;
  data.source = path.string();
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream row(line);
    Vec3 p;
    if (!(row >> p.x() >> p.y() >> p.z())) {
      throw InvalidInputError("malformed demo dataset line: " + line);
    }
    data.points.push_back(p);
  }
  return data;
}

}  // namespace quadcatch
