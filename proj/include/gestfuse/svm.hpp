#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "gestfuse/types.hpp"

namespace gestfuse {

enum class KernelKind { linear, rbf };

// gamma <= 0 means "use the default 1/d", resolved when training starts.
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;
};

// Linear -> <x,y>; RBF -> exp(-gamma * |x-y|^2).
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Per-dimension z-score parameters fitted on a training set. Dimensions with
// zero variance keep stddev 1 so they pass through unchanged.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::vector<double> transform(std::span<const double> x) const;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows);

// One two-class maximum-margin model; decision f(x) = sum_i coef_i k(sv_i, x) + b
// where coef_i = alpha_i * y_i from the dual solution.
struct BinarySvmModel {
  KernelSpec kernel;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefs;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
};

// One-vs-rest ensemble over the distinct labels seen at training time,
// with the shared feature standardization fitted on the training set.
struct MulticlassSvmModel {
  std::size_t dim = 0;
  KernelSpec kernel;
  Standardizer standardizer;
  std::vector<int> class_labels;
  std::vector<BinarySvmModel> classes;  // parallel to class_labels
};

// Sequential minimal optimization on the dual with maximal-violating-pair
// selection, KKT tolerance 1e-3. Labels must be exactly -1 or +1 with both
// classes present.
BinarySvmModel train_binary(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                            double C, KernelSpec spec);

// Standardizes the features, then trains one binary model per distinct label
// (that label vs all others).
MulticlassSvmModel train_multiclass(const std::vector<std::vector<double>>& X,
                                    const std::vector<int>& labels, double C, KernelSpec spec);

// (label, one decision value per class in class_labels order); ties go to the
// lowest class index.
std::pair<int, std::vector<double>> predict(const MulticlassSvmModel& model,
                                            std::span<const double> x);

inline constexpr double kDefaultSlackGrid[] = {0.01, 0.1, 1.0, 10.0, 100.0};

// Seeded stratified fold assignment: per-class shuffle, then round-robin
// dealing. Every class must have at least `folds` samples.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int folds,
                                                       std::uint64_t seed);

// Grid search for the slack parameter by mean stratified k-fold validation
// accuracy; ties resolve to the smallest C.
double select_slack(const std::vector<std::vector<double>>& X, const std::vector<int>& labels,
                    KernelSpec spec, std::span<const double> C_grid = kDefaultSlackGrid,
                    int folds = 5, std::uint64_t seed = 0);

// JSON model files:
//   {kernel, gamma, d, standardization: {mean, std},
//    classes: [{label, support_vectors, dual_coefs, bias}]}
void save_svm(const std::filesystem::path& path, const MulticlassSvmModel& model);
MulticlassSvmModel load_svm(const std::filesystem::path& path);

}  // namespace gestfuse
