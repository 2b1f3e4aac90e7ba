#include "facetag/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "facetag/error.hpp"

namespace facetag {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTolerance = 1e-10;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// P(a, x) by its power series; used below the switch point.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) <= std::fabs(sum) * kEpsilon) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  if (std::fabs(term) > std::fabs(sum) * kTolerance) {
    fail(ErrorCode::NonConvergence, "incomplete gamma series did not converge in " +
                                        std::to_string(kMaxIterations) + " iterations");
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction.
double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  double delta = 0.0;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) <= kEpsilon) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  if (std::fabs(delta - 1.0) > kTolerance) {
    fail(ErrorCode::NonConvergence, "incomplete gamma continued fraction did not converge in " +
                                        std::to_string(kMaxIterations) + " iterations");
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double friedman_statistic(const std::vector<std::vector<double>>& ranks, std::size_t k,
                          double tie_correction) {
  if (tie_correction <= 0.0) return 0.0;
  const double n = static_cast<double>(ranks.size());
  const double kd = static_cast<double>(k);
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double rj = 0.0;
    for (const auto& row : ranks) rj += row[j];
    sum_sq += rj * rj;
  }
  const double q = 12.0 / (n * kd * (kd + 1.0)) * sum_sq - 3.0 * n * (kd + 1.0);
  return std::max(0.0, q / tie_correction);
}

double permutation_p(std::vector<std::vector<double>> ranks, std::size_t k, double tie_correction,
                     double observed, const FriedmanOptions& options, std::string& method) {
  const double threshold = observed - 1e-9 * std::max(1.0, observed);
  const std::size_t n = ranks.size();

  double k_fact = 1.0;
  for (std::size_t i = 2; i <= k; ++i) k_fact *= static_cast<double>(i);
  const double total = std::pow(k_fact, static_cast<double>(n));

  if (total <= static_cast<double>(options.exact_limit)) {
    method = "exact";
    // Block 0 is held fixed: Q depends only on the relative arrangement, and
    // every arrangement of the others is paired with each of block 0's k!.
    std::vector<std::vector<std::vector<double>>> perms(n);
    for (std::size_t b = 0; b < n; ++b) {
      auto row = ranks[b];
      std::sort(row.begin(), row.end());
      do {
        perms[b].push_back(row);
      } while (std::next_permutation(row.begin(), row.end()));
    }
    // Counts are weighted by k!/distinct permutations so tied blocks stay uniform.
    std::vector<double> weight(n);
    for (std::size_t b = 0; b < n; ++b) weight[b] = k_fact / static_cast<double>(perms[b].size());

    std::vector<std::size_t> idx(n, 0);
    std::vector<std::vector<double>> current(n);
    double hits = 0.0;
    double seen = 0.0;
    for (;;) {
      double w = 1.0;
      for (std::size_t b = 0; b < n; ++b) {
        current[b] = perms[b][idx[b]];
        w *= weight[b];
      }
      seen += w;
      if (friedman_statistic(current, k, tie_correction) >= threshold) hits += w;
      std::size_t b = 0;
      while (b < n && ++idx[b] == perms[b].size()) idx[b++] = 0;
      if (b == n) break;
    }
    return hits / seen;
  }

  method = "monte-carlo";
  std::mt19937_64 rng(options.seed);
  std::size_t hits = 0;
  for (std::size_t draw = 0; draw < options.permutation_draws; ++draw) {
    for (auto& row : ranks) std::shuffle(row.begin(), row.end(), rng);
    if (friedman_statistic(ranks, k, tie_correction) >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(options.permutation_draws);
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

BlockMatrix BlockMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) fail(ErrorCode::InvalidArgument, "block matrix needs n >= 2 blocks");
  const std::size_t k = rows.front().size();
  if (k < 2) fail(ErrorCode::InvalidArgument, "block matrix needs k >= 2 treatments");
  BlockMatrix m;
  m.blocks_ = rows.size();
  m.treatments_ = k;
  m.values_.reserve(rows.size() * k);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].size() != k) {
      fail(ErrorCode::InvalidArgument, "block matrix row " + std::to_string(b) + " has " +
                                           std::to_string(rows[b].size()) + " cells, expected " +
                                           std::to_string(k));
    }
    for (double v : rows[b]) {
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "block matrix has a missing cell");
      m.values_.push_back(v);
    }
  }
  return m;
}

std::string_view to_string(EffectSize e) noexcept {
  switch (e) {
    case EffectSize::Negligible: return "negligible";
    case EffectSize::Small: return "small";
    case EffectSize::Moderate: return "moderate";
    case EffectSize::Large: return "large";
  }
  return "negligible";
}

EffectSize interpret_w(double w) noexcept {
  if (w > 0.5) return EffectSize::Large;
  if (w >= 0.3) return EffectSize::Moderate;
  if (w >= 0.1) return EffectSize::Small;
  return EffectSize::Negligible;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

FriedmanResult friedman(const BlockMatrix& m, const FriedmanOptions& options) {
  const std::size_t n = m.blocks();
  const std::size_t k = m.treatments();
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);

  std::vector<std::vector<double>> ranks;
  ranks.reserve(n);
  double tie_sum = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    auto r = average_ranks(m.row(b));
    // Tie groups show up as repeated average ranks.
    auto sorted = r;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
    ranks.push_back(std::move(r));
  }

  FriedmanResult res;
  res.n = n;
  res.k = k;
  res.df = static_cast<int>(k) - 1;
  res.tie_correction = 1.0 - tie_sum / (nd * kd * (kd * kd - 1.0));
  if (res.tie_correction < 1e-12) res.tie_correction = 0.0;
  res.q = friedman_statistic(ranks, k, res.tie_correction);
  res.mean_ranks.assign(k, 0.0);
  for (const auto& row : ranks) {
    for (std::size_t j = 0; j < k; ++j) res.mean_ranks[j] += row[j] / nd;
  }

  if (options.exact) {
    if (res.tie_correction == 0.0) {
      // Every rearrangement of fully tied blocks gives Q = 0.
      res.p_method = "exact";
      res.p = 1.0;
    } else {
      res.p = permutation_p(ranks, k, res.tie_correction, res.q, options, res.p_method);
    }
  } else {
    res.p_method = "chi-square";
    res.p = chi2_sf(res.q, res.df);
  }
  std::tie(res.w, res.interpretation) = kendalls_w(res, n, k);
  for (double alpha : options.alpha_levels) res.significant.emplace_back(alpha, res.p < alpha);
  return res;
}

std::pair<double, EffectSize> kendalls_w(const FriedmanResult& result, std::size_t n,
                                         std::size_t k) {
  if (n == 0 || k < 2) return {0.0, EffectSize::Negligible};
  double w = result.q / (static_cast<double>(n) * static_cast<double>(k - 1));
  w = std::clamp(w, 0.0, 1.0);
  return {w, interpret_w(w)};
}

std::string FriedmanResult::marker() const {
  bool at05 = false;
  bool at10 = false;
  for (const auto& [alpha, sig] : significant) {
    if (!sig) continue;
    if (alpha <= 0.05 + 1e-12) at05 = true;
    if (alpha <= 0.10 + 1e-12) at10 = true;
  }
  return at05 ? "++" : at10 ? "+" : "";
}

Json FriedmanResult::to_json() const {
  Json j;
  j["n"] = n;
  j["k"] = k;
  j["Q"] = q;
  j["df"] = df;
  j["p"] = p;
  j["p_method"] = p_method;
  j["tie_correction"] = tie_correction;
  j["mean_ranks"] = mean_ranks;
  j["W"] = w;
  j["interpretation"] = std::string(to_string(interpretation));
  j["significant"] = Json::array();
  for (const auto& [alpha, sig] : significant) {
    Json s;
    s["alpha"] = alpha;
    s["significant"] = sig;
    j["significant"].push_back(std::move(s));
  }
  j["marker"] = marker();
  return j;
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "incomplete gamma: a must be > 0");
  if (x < 0.0 || std::isnan(x)) fail(ErrorCode::InvalidArgument, "incomplete gamma: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  // Same switch as chi-square x < df + 1.
  if (x < a + 0.5) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi2_sf(double x, int df) {
  if (df <= 0) fail(ErrorCode::InvalidArgument, "chi2_sf: df must be positive");
  if (x < 0.0 || std::isnan(x)) fail(ErrorCode::InvalidArgument, "chi2_sf: x must be >= 0");
  const double q = regularized_gamma_q(0.5 * df, 0.5 * x);
  return std::clamp(q, std::numeric_limits<double>::denorm_min(), 1.0);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) fail(ErrorCode::InvalidArgument, "pearson: unequal lengths");
  if (xs.size() < 2) fail(ErrorCode::InvalidArgument, "pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::InvalidArgument, "pearson: constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double phi_correlation(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "phi: unequal lengths");
  std::vector<double> xs, ys;
  xs.reserve(x.size());
  ys.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] != 0 && x[i] != 1) || (y[i] != 0 && y[i] != 1)) {
      fail(ErrorCode::InvalidArgument, "phi: vectors must be 0/1");
    }
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  return pearson(xs, ys);
}

CorrelationMatrix da_fa_matrix(const Corpus& corpus) {
  if (!corpus.tagset()) fail(ErrorCode::Validation, "correlation needs dialog-act annotations");
  CorrelationMatrix out;
  out.tags = corpus.tagset()->tags();
  for (auto label : kAllFaceActs) out.labels.emplace_back(to_string(label));

  std::vector<std::size_t> tag_of;
  std::vector<std::size_t> label_of;
  for (const auto& c : corpus.conversations()) {
    for (const auto& u : c.utterances) {
      if (!u.face_act && !u.dialog_act) continue;
      if (!u.face_act || !u.dialog_act) {
        fail(ErrorCode::Validation, "utterance " + example_id(u.conversation_id, u.turn) +
                                        " lacks a " + (u.face_act ? "dialog_act" : "face_act"));
      }
      tag_of.push_back(*corpus.tagset()->index_of(u.dialog_act->name));
      label_of.push_back(index_of(*u.face_act));
    }
  }
  out.n = tag_of.size();
  if (out.n < 2) fail(ErrorCode::Validation, "correlation needs at least two annotated utterances");

  auto indicator = [](const std::vector<std::size_t>& of, std::size_t which) {
    std::vector<int> v(of.size());
    for (std::size_t i = 0; i < of.size(); ++i) v[i] = of[i] == which ? 1 : 0;
    return v;
  };
  auto constant = [](const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [&](int x) { return x == v.front(); });
  };

  std::vector<std::vector<int>> label_vectors;
  std::vector<bool> label_ok;
  for (std::size_t l = 0; l < out.labels.size(); ++l) {
    label_vectors.push_back(indicator(label_of, l));
    label_ok.push_back(!constant(label_vectors.back()));
    if (!label_ok.back()) out.undefined_labels.push_back(out.labels[l]);
  }
  for (std::size_t t = 0; t < out.tags.size(); ++t) {
    const auto tv = indicator(tag_of, t);
    if (constant(tv)) {
      out.undefined_tags.push_back(out.tags[t]);
      continue;
    }
    for (std::size_t l = 0; l < out.labels.size(); ++l) {
      if (!label_ok[l]) continue;
      out.cells.push_back(
          CorrelationCell{out.tags[t], out.labels[l], phi_correlation(tv, label_vectors[l]), out.n});
    }
  }
  return out;
}

Json CorrelationMatrix::to_json() const {
  Json j;
  j["statistic"] = "phi (Pearson on per-utterance 0/1 indicators)";
  j["n"] = n;
  j["tags"] = tags;
  j["labels"] = labels;
  j["cells"] = Json::array();
  for (const auto& c : cells) {
    Json cell;
    cell["da_tag"] = c.da_tag;
    cell["fa_label"] = c.fa_label;
    cell["r"] = c.r;
    cell["n"] = c.n;
    j["cells"].push_back(std::move(cell));
  }
  j["undefined_tags"] = undefined_tags;
  j["undefined_labels"] = undefined_labels;
  return j;
}

std::string CorrelationMatrix::render() const {
  std::ostringstream out;
  std::size_t width = 12;
  for (const auto& t : tags) width = std::max(width, t.size() + 2);
  out << std::string(width, ' ');
  for (const auto& l : labels) out << std::string(8 - std::min<std::size_t>(8, l.size()), ' ') << l;
  out << '\n';
  for (const auto& t : tags) {
    out << t << std::string(width - t.size(), ' ');
    for (const auto& l : labels) {
      std::string cell = "n/a";
      for (const auto& c : cells) {
        if (c.da_tag == t && c.fa_label == l) cell = fixed(c.r, 2);
      }
      out << std::string(8 - std::min<std::size_t>(8, cell.size()), ' ') << cell;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace facetag
