#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facetag/corpus.hpp"
#include "facetag/json.hpp"

namespace facetag {

// n blocks (rows, e.g. folds or labels) by k treatments (columns, e.g.
// systems), row-major.
class BlockMatrix {
 public:
  // Throws Error(InvalidArgument) unless n >= 2, k >= 2, rows are equally
  // long and every cell is finite.
  static BlockMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t treatments() const noexcept { return treatments_; }
  double at(std::size_t block, std::size_t treatment) const {
    return values_[block * treatments_ + treatment];
  }
  std::span<const double> row(std::size_t block) const {
    return {values_.data() + block * treatments_, treatments_};
  }

 private:
  std::size_t blocks_ = 0;
  std::size_t treatments_ = 0;
  std::vector<double> values_;
};

enum class EffectSize { Negligible, Small, Moderate, Large };

std::string_view to_string(EffectSize e) noexcept;

// Cohen's bands for Kendall's W: 0.1 small, 0.3 moderate, above 0.5 large.
EffectSize interpret_w(double w) noexcept;

struct FriedmanOptions {
  std::vector<double> alpha_levels = {0.05, 0.10};
  // Use the permutation distribution of Q instead of the chi-square
  // approximation: exhaustive when (k!)^n <= exact_limit, otherwise
  // permutation_draws Monte Carlo draws under seed.
  bool exact = false;
  std::size_t exact_limit = 2'000'000;
  std::size_t permutation_draws = 10'000;
  std::uint64_t seed = 0;
};

struct FriedmanResult {
  std::size_t n = 0;
  std::size_t k = 0;
  double q = 0.0;
  int df = 0;
  double p = 1.0;
  std::string p_method;  // "chi-square", "exact", "monte-carlo"
  double tie_correction = 1.0;
  std::vector<double> mean_ranks;
  double w = 0.0;
  EffectSize interpretation = EffectSize::Negligible;
  // (alpha, p < alpha) per requested level
  std::vector<std::pair<double, bool>> significant;

  Json to_json() const;
  // "++" when significant at 0.05, "+" at 0.10, otherwise empty.
  std::string marker() const;
};

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

FriedmanResult friedman(const BlockMatrix& m, const FriedmanOptions& options = {});

std::pair<double, EffectSize> kendalls_w(const FriedmanResult& result, std::size_t n,
                                         std::size_t k);

// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

// Chi-square survival function; throws Error(NonConvergence) when the
// series or continued fraction exceeds its iteration cap.
double chi2_sf(double x, int df);

// Pearson correlation of 0/1 indicator vectors.
double phi_correlation(std::span<const int> x, std::span<const int> y);

// Sample Pearson correlation; throws Error(InvalidArgument) for unequal
// lengths, n < 2, or a constant vector.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct CorrelationCell {
  std::string da_tag;
  std::string fa_label;
  double r = 0.0;
  std::size_t n = 0;
};

struct CorrelationMatrix {
  std::vector<std::string> tags;
  std::vector<std::string> labels;
  std::vector<CorrelationCell> cells;
  // Tags or labels whose indicator vector is constant have no defined phi.
  std::vector<std::string> undefined_tags;
  std::vector<std::string> undefined_labels;
  std::size_t n = 0;

  Json to_json() const;
  std::string render() const;
};

// Per-utterance phi between every dialog-act tag indicator and every
// face-act indicator.
CorrelationMatrix da_fa_matrix(const Corpus& corpus);

}  // namespace facetag
