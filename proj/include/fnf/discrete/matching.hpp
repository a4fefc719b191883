#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "fnf/density/categorical.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::discrete {

// Enumerated categorical points in lexicographic order (column 0 most
// significant). Either the full product domain or an observed subset.
class FiniteDomain {
 public:
  FiniteDomain() = default;
  // Full product of the given cardinalities.
  explicit FiniteDomain(std::vector<int> cardinalities);
  // Observed support; duplicates are dropped and points are sorted.
  static FiniteDomain from_points(std::vector<int> cardinalities, const std::vector<std::vector<int>>& points);

  std::size_t size() const { return codes_.size(); }
  bool exhaustive() const { return exhaustive_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  std::vector<int> point(std::size_t index) const;
  // Throws UsageError for points outside the domain.
  std::size_t index_of(std::span<const int> point) const;
  bool contains(std::span<const int> point) const;

  // Product of the cardinalities, possibly beyond what is enumerated.
  long double product_size() const;

 private:
  std::uint64_t code_of(std::span<const int> point) const;

  std::vector<int> cards_;
  bool exhaustive_ = true;
  std::vector<std::uint64_t> codes_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct DomainProbabilities {
  std::vector<double> p;
  // Mass of the model outside the enumerated domain (0 when exhaustive).
  double remainder = 0.0;
};

// Evaluates the model on every domain point. Domains whose product size
// exceeds `max_points` must be observed-support domains.
DomainProbabilities domain_probabilities(const density::AutoregressiveCategorical& model, const FiniteDomain& domain);

// f_0 is the identity; f_1 sends domain index x to latent index optimal[x]
// with probability gamma and to label_split[x] otherwise.
struct DiscreteMatching {
  std::vector<int> optimal;
  std::vector<int> label_split;  // empty if no label-aware variant
  double gamma = 1.0;
  // Label classes whose mass vanished in one group; matched by raw
  // probabilities instead of renormalized ones.
  std::vector<int> fallback_classes;

  std::size_t size() const { return optimal.size(); }
};

// Sorts both groups ascending by probability (ties by index) and pairs
// the k-th smallest p1 point with the k-th smallest p0 point.
DiscreteMatching optimal_matching(std::span<const double> p0, std::span<const double> p1);

// Same construction applied separately inside each predicted-label class;
// the result carries both permutations with gamma = 0.
DiscreteMatching label_split_matching(std::span<const double> p0, std::span<const double> p1,
                                      std::span<const int> predicted_label);

// Combines a fairness-optimal and a label-split matching.
DiscreteMatching mix_matchings(const DiscreteMatching& optimal, const DiscreteMatching& label_split, double gamma);

struct Encoding {
  int z = 0;
  bool used_optimal = true;
};

// Group 0 is left unchanged. For group 1 a Bernoulli(gamma) draw from rng
// picks the permutation; at gamma 0 or 1 no randomness is consumed.
Encoding encode_discrete(const DiscreteMatching& match, int x, int group, numerics::Rng& rng);

// Latent distributions p_{Z_0}, p_{Z_1} induced by the matching.
std::vector<double> latent_distribution(const DiscreteMatching& match, std::span<const double> p, int group);

double total_variation(std::span<const double> p, std::span<const double> q);

// Exact statistical distance between the two latent distributions.
double discrete_statistical_distance(const DiscreteMatching& match, std::span<const double> p0,
                                     std::span<const double> p1);

// Lemma-style optimal adversary on latent indices: 1 iff p_{Z_1} >= p_{Z_0}.
std::vector<int> discrete_optimal_adversary(std::span<const double> pz0, std::span<const double> pz1);

}  // namespace fnf::discrete
