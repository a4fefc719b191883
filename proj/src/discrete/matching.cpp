#include "fnf/discrete/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::discrete {

namespace {

constexpr long double kMaxEnumerated = 1e6L;

void check_distribution(std::span<const double> p, const char* name) {
  double total = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw UsageError(std::string(name) + " has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError(std::string(name) + " does not sum to one");
}

// Indices of `members` sorted ascending by p, ties by index.
std::vector<int> sorted_by(std::span<const double> p, std::vector<int> members) {
  std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
    return p[static_cast<std::size_t>(a)] < p[static_cast<std::size_t>(b)];
  });
  return members;
}

void match_within(std::span<const double> p0, std::span<const double> p1, const std::vector<int>& members,
                  std::vector<int>& perm) {
  const std::vector<int> by0 = sorted_by(p0, members);
  const std::vector<int> by1 = sorted_by(p1, members);
  for (std::size_t k = 0; k < members.size(); ++k) perm[static_cast<std::size_t>(by1[k])] = by0[k];
}

}  // namespace

FiniteDomain::FiniteDomain(std::vector<int> cardinalities) : cards_(std::move(cardinalities)) {
  if (cards_.empty()) throw UsageError("domain needs at least one column");
  for (int c : cards_) {
    if (c < 1) throw UsageError("cardinalities must be positive");
  }
  if (product_size() > kMaxEnumerated) {
    throw UsageError("product domain too large to enumerate; use the observed support");
  }
  const auto m = static_cast<std::size_t>(product_size());
  codes_.resize(m);
  std::iota(codes_.begin(), codes_.end(), std::uint64_t{0});
}

FiniteDomain FiniteDomain::from_points(std::vector<int> cardinalities, const std::vector<std::vector<int>>& points) {
  FiniteDomain d;
  d.cards_ = std::move(cardinalities);
  d.exhaustive_ = false;
  for (const auto& pt : points) d.codes_.push_back(d.code_of(pt));
  std::sort(d.codes_.begin(), d.codes_.end());
  d.codes_.erase(std::unique(d.codes_.begin(), d.codes_.end()), d.codes_.end());
  if (static_cast<long double>(d.codes_.size()) == d.product_size()) d.exhaustive_ = true;
  for (std::size_t i = 0; i < d.codes_.size(); ++i) d.index_[d.codes_[i]] = i;
  return d;
}

long double FiniteDomain::product_size() const {
  long double s = 1;
  for (int c : cards_) s *= c;
  return s;
}

std::uint64_t FiniteDomain::code_of(std::span<const int> point) const {
  if (point.size() != cards_.size()) throw UsageError("point has the wrong number of columns");
  std::uint64_t code = 0;
  for (std::size_t j = 0; j < cards_.size(); ++j) {
    if (point[j] < 0 || point[j] >= cards_[j]) throw UsageError("point lies outside the domain");
    code = code * static_cast<std::uint64_t>(cards_[j]) + static_cast<std::uint64_t>(point[j]);
  }
  return code;
}

std::vector<int> FiniteDomain::point(std::size_t index) const {
  std::uint64_t code = codes_.at(index);
  std::vector<int> out(cards_.size());
  for (std::size_t j = cards_.size(); j-- > 0;) {
    out[j] = static_cast<int>(code % static_cast<std::uint64_t>(cards_[j]));
    code /= static_cast<std::uint64_t>(cards_[j]);
  }
  return out;
}

std::size_t FiniteDomain::index_of(std::span<const int> point) const {
  const std::uint64_t code = code_of(point);
  if (index_.empty() && exhaustive_) return static_cast<std::size_t>(code);
  const auto it = index_.find(code);
  if (it == index_.end()) throw UsageError("point lies outside the observed domain");
  return it->second;
}

bool FiniteDomain::contains(std::span<const int> point) const {
  try {
    index_of(point);
    return true;
  } catch (const UsageError&) {
    return false;
  }
}

DomainProbabilities domain_probabilities(const density::AutoregressiveCategorical& model, const FiniteDomain& domain) {
  if (model.cardinalities() != domain.cardinalities()) throw UsageError("model and domain columns differ");
  DomainProbabilities out;
  out.p.resize(domain.size());
  double total = 0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    out.p[i] = std::exp(model.log_density(domain.point(i)));
    total += out.p[i];
  }
  out.remainder = std::max(0.0, 1.0 - total);
  if (!domain.exhaustive() && total > 0) {
    for (double& v : out.p) v /= total;
  }
  return out;
}

DiscreteMatching optimal_matching(std::span<const double> p0, std::span<const double> p1) {
  if (p0.size() != p1.size() || p0.empty()) throw UsageError("distributions must share a nonempty domain");
  check_distribution(p0, "p0");
  check_distribution(p1, "p1");
  DiscreteMatching m;
  m.optimal.assign(p0.size(), 0);
  std::vector<int> all(p0.size());
  std::iota(all.begin(), all.end(), 0);
  match_within(p0, p1, all, m.optimal);
  return m;
}

DiscreteMatching label_split_matching(std::span<const double> p0, std::span<const double> p1,
                                      std::span<const int> predicted_label) {
  if (predicted_label.size() != p0.size()) throw UsageError("label vector does not match the domain");
  DiscreteMatching m = optimal_matching(p0, p1);
  m.label_split.assign(p0.size(), 0);
  m.gamma = 0.0;
  for (int cls : {0, 1}) {
    std::vector<int> members;
    double mass0 = 0, mass1 = 0;
    for (std::size_t i = 0; i < predicted_label.size(); ++i) {
      if (predicted_label[i] != 0 && predicted_label[i] != 1) throw UsageError("predicted labels must be 0 or 1");
      if (predicted_label[i] != cls) continue;
      members.push_back(static_cast<int>(i));
      mass0 += p0[i];
      mass1 += p1[i];
    }
    if (members.empty()) continue;
    // Renormalizing within the class keeps the order, so sorting raw
    // probabilities realizes the per-class matching directly.
    if (mass0 <= 0 || mass1 <= 0) m.fallback_classes.push_back(cls);
    match_within(p0, p1, members, m.label_split);
  }
  return m;
}

DiscreteMatching mix_matchings(const DiscreteMatching& optimal, const DiscreteMatching& label_split, double gamma) {
  if (!(gamma >= 0 && gamma <= 1)) throw UsageError("gamma must lie in [0, 1]");
  if (label_split.label_split.size() != optimal.optimal.size()) throw UsageError("matchings have different domains");
  DiscreteMatching m;
  m.optimal = optimal.optimal;
  m.label_split = label_split.label_split;
  m.gamma = gamma;
  m.fallback_classes = label_split.fallback_classes;
  return m;
}

Encoding encode_discrete(const DiscreteMatching& match, int x, int group, numerics::Rng& rng) {
  if (x < 0 || static_cast<std::size_t>(x) >= match.size()) throw UsageError("point index outside the domain");
  if (group == 0) return {x, true};
  if (group != 1) throw UsageError("group must be 0 or 1");
  bool use_optimal = true;
  if (match.gamma <= 0) {
    use_optimal = false;
  } else if (match.gamma < 1) {
    use_optimal = rng.bernoulli(match.gamma);
  }
  if (!use_optimal && match.label_split.empty()) throw UsageError("matching has no label-split permutation");
  const auto& perm = use_optimal ? match.optimal : match.label_split;
  return {perm[static_cast<std::size_t>(x)], use_optimal};
}

std::vector<double> latent_distribution(const DiscreteMatching& match, std::span<const double> p, int group) {
  if (p.size() != match.size()) throw UsageError("distribution does not match the domain");
  if (group == 0) return {p.begin(), p.end()};
  std::vector<double> out(p.size(), 0.0);
  const double g = match.label_split.empty() ? 1.0 : match.gamma;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (g > 0) out[static_cast<std::size_t>(match.optimal[x])] += g * p[x];
    if (g < 1) out[static_cast<std::size_t>(match.label_split[x])] += (1 - g) * p[x];
  }
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw UsageError("distributions have different lengths");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double discrete_statistical_distance(const DiscreteMatching& match, std::span<const double> p0,
                                     std::span<const double> p1) {
  return total_variation(latent_distribution(match, p0, 0), latent_distribution(match, p1, 1));
}

std::vector<int> discrete_optimal_adversary(std::span<const double> pz0, std::span<const double> pz1) {
  if (pz0.size() != pz1.size()) throw UsageError("distributions have different lengths");
  std::vector<int> mu(pz0.size());
  for (std::size_t i = 0; i < pz0.size(); ++i) mu[i] = pz1[i] >= pz0[i] ? 1 : 0;
  return mu;
}

}  // namespace fnf::discrete
