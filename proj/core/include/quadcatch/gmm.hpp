#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quadcatch/frames.hpp"

namespace quadcatch {

struct GaussianComponent {
  double weight = 1.0;
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
};

// A validated mixture: weights sum to one, covariances are symmetric
// positive definite. Immutable after construction.
class GaussianMixture {
 public:
  GaussianMixture() = default;  // empty, k() == 0
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  int k() const { return static_cast<int>(components_.size()); }
  const std::vector<GaussianComponent>& components() const { return components_; }

  // Log of the mixture probability density at x.
  double log_density(const Vec3& x) const;

 private:
  std::vector<GaussianComponent> components_;
  // Per-component Cholesky factor and log normalizer, precomputed.
  std::vector<Mat3> chol_;
  std::vector<double> log_norm_;
};

double log_density(const GaussianMixture& mix, const Vec3& x);

// Recorded catch positions used to model the reachable space.
struct DemoDataset {
  std::vector<Vec3> points;
  std::string source;
};

struct EmOptions {
  double tol = 1e-6;              // stop when the log-likelihood gain drops below
  int max_iter = 200;
  std::uint64_t seed = 0;         // k-means++ style initialisation seed
  double covariance_floor = 1e-6; // minimum covariance eigenvalue, m^2
};

struct EmResult {
  GaussianMixture mixture;
  std::vector<double> log_likelihood;  // accepted value per iteration
  int iterations = 0;
  bool converged = false;
};

// Expectation maximization for a k-component mixture. Requires at least
// k + 1 distinct points. The reported log-likelihood sequence is
// non-decreasing; if covariance flooring ever lowers it, fitting stops at
// the previous iterate.
EmResult fit_em(const DemoDataset& data, int k, const EmOptions& opts = {});

// Bayesian information criterion, lower is better. Free parameter count is
// (k - 1) weights + 3k means + 6k covariance entries.
double bic(const GaussianMixture& mix, const DemoDataset& data);

// Fits every k in k_values and returns the mixture with minimal BIC, ties
// broken toward smaller k.
GaussianMixture select_k(const DemoDataset& data, const std::vector<int>& k_values,
                         const EmOptions& opts = {});
GaussianMixture select_k(const DemoDataset& data, int k_min, int k_max,
                         const EmOptions& opts = {});

// Synthetic stand-in for human-guided catching demonstrations: n draws from
// an axis-aligned Gaussian.
DemoDataset generate_demo_dataset(int n, const Vec3& mean, const Vec3& stddev,
                                  std::uint64_t seed);

// Line-oriented storage: "x y z" per point, '#' comments.
void save_demo_dataset(const DemoDataset& data, const std::filesystem::path& path);
DemoDataset load_demo_dataset(const std::filesystem::path& path);

}  // namespace quadcatch
