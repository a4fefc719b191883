#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "fnf/discrete/matching.hpp"
#include "fnf/errors.hpp"

namespace fnf::discrete {
namespace {

std::vector<double> random_distribution(std::size_t m, numerics::Rng& rng) {
  std::vector<double> p(m);
  double total = 0;
  for (double& v : p) total += (v = -std::log(rng.uniform() + 1e-300));
  for (double& v : p) v /= total;
  return p;
}

double tv_of_perm(const std::vector<double>& p0, const std::vector<double>& p1, const std::vector<int>& perm) {
  DiscreteMatching m;
  m.optimal = perm;
  return discrete_statistical_distance(m, p0, p1);
}

double brute_force_min(const std::vector<double>& p0, const std::vector<double>& p1) {
  std::vector<int> perm(p0.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 2;
  do {
    best = std::min(best, tv_of_perm(p0, p1, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(OptimalMatching, ThreePointExample) {
  const std::vector<double> p0{0.2, 0.3, 0.5}, p1{0.5, 0.3, 0.2};
  const DiscreteMatching m = optimal_matching(p0, p1);
  EXPECT_EQ(m.optimal, (std::vector<int>{2, 1, 0}));
  EXPECT_NEAR(discrete_statistical_distance(m, p0, p1), 0.0, 1e-15);
  EXPECT_NEAR(brute_force_min(p0, p1), 0.0, 1e-15);
}

TEST(OptimalMatching, EqualDistributionsGiveIdentity) {
  const std::vector<double> p{0.1, 0.4, 0.2, 0.3};
  const DiscreteMatching m = optimal_matching(p, p);
  EXPECT_EQ(m.optimal, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(discrete_statistical_distance(m, p, p), 0.0);
}

TEST(OptimalMatching, TiesBrokenByIndex) {
  const std::vector<double> p0{0.25, 0.25, 0.25, 0.25}, p1{0.5, 0.25, 0.25, 0.0};
  const DiscreteMatching m = optimal_matching(p0, p1);
  // p1 ascending: 3, 1, 2, 0; p0 ascending: 0, 1, 2, 3.
  EXPECT_EQ(m.optimal, (std::vector<int>{3, 1, 2, 0}));
}

TEST(OptimalMatching, EqualsExhaustiveMinimum) {
  numerics::Rng rng(11);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 6);
    const auto p0 = random_distribution(m, rng);
    const auto p1 = random_distribution(m, rng);
    const double sorted = discrete_statistical_distance(optimal_matching(p0, p1), p0, p1);
    EXPECT_NEAR(sorted, brute_force_min(p0, p1), 1e-15) << "m=" << m;
  }
}

TEST(OptimalMatching, SwapTowardSortedOrderNeverIncreasesDistance) {
  numerics::Rng rng(12);
  int violating_pairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng.index(7);
    const auto p0 = random_distribution(m, rng);
    const auto p1 = random_distribution(m, rng);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    const auto x = static_cast<int>(rng.index(m));
    const auto xp = static_cast<int>(rng.index(m));
    if (x == xp) continue;
    // x, x' are sources; their latents violate the sorted order when the
    // larger p1 source lands on the smaller p0 latent.
    const double a = p1[static_cast<std::size_t>(x)], b = p1[static_cast<std::size_t>(xp)];
    const double za = p0[static_cast<std::size_t>(perm[static_cast<std::size_t>(x)])];
    const double zb = p0[static_cast<std::size_t>(perm[static_cast<std::size_t>(xp)])];
    if (!((a - b) * (za - zb) < 0)) continue;
    ++violating_pairs;
    const double before = tv_of_perm(p0, p1, perm);
    std::swap(perm[static_cast<std::size_t>(x)], perm[static_cast<std::size_t>(xp)]);
    EXPECT_LE(tv_of_perm(p0, p1, perm), before + 1e-15);
  }
  EXPECT_GT(violating_pairs, 300);
}

TEST(OptimalMatching, RejectsMismatchedDomains) {
  EXPECT_THROW(optimal_matching(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), UsageError);
  EXPECT_THROW(optimal_matching(std::vector<double>{0.5, 0.6}, std::vector<double>{0.5, 0.5}), UsageError);
}

TEST(LabelSplit, ConstantLabelsMatchGlobal) {
  numerics::Rng rng(3);
  const auto p0 = random_distribution(6, rng), p1 = random_distribution(6, rng);
  const std::vector<int> labels(6, 1);
  const DiscreteMatching m = label_split_matching(p0, p1, labels);
  EXPECT_EQ(m.label_split, optimal_matching(p0, p1).optimal);
}

TEST(LabelSplit, StaysInsideClassesAndIsOptimalThere) {
  numerics::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p0 = random_distribution(7, rng), p1 = random_distribution(7, rng);
    std::vector<int> labels(7);
    for (auto& l : labels) l = rng.bernoulli(0.5) ? 1 : 0;
    const DiscreteMatching m = label_split_matching(p0, p1, labels);
    for (std::size_t x = 0; x < 7; ++x) EXPECT_EQ(labels[static_cast<std::size_t>(m.label_split[x])], labels[x]);
    // Within each class the sorted matching minimizes the class-restricted TV.
    for (int cls : {0, 1}) {
      std::vector<int> members;
      for (int i = 0; i < 7; ++i) {
        if (labels[static_cast<std::size_t>(i)] == cls) members.push_back(i);
      }
      if (members.empty()) continue;
      std::vector<double> q0, q1;
      for (int i : members) {
        q0.push_back(p0[static_cast<std::size_t>(i)]);
        q1.push_back(p1[static_cast<std::size_t>(i)]);
      }
      double restricted = 0;
      for (int i : members) {
        restricted += 0.5 * std::abs(p1[static_cast<std::size_t>(i)] -
                                     p0[static_cast<std::size_t>(m.label_split[static_cast<std::size_t>(i)])]);
      }
      // Brute force over bijections of the class.
      std::vector<int> perm(members.size());
      std::iota(perm.begin(), perm.end(), 0);
      double best = 2;
      do {
        double s = 0;
        for (std::size_t k = 0; k < perm.size(); ++k) s += 0.5 * std::abs(q1[k] - q0[static_cast<std::size_t>(perm[k])]);
        best = std::min(best, s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      EXPECT_NEAR(restricted, best, 1e-15);
    }
  }
}

TEST(LabelSplit, SingletonClassesForceIdentity) {
  const std::vector<double> p0{0.7, 0.3}, p1{0.2, 0.8};
  const DiscreteMatching m = label_split_matching(p0, p1, std::vector<int>{0, 1});
  EXPECT_EQ(m.label_split, (std::vector<int>{0, 1}));
}

TEST(LabelSplit, FlagsEmptyClassMass) {
  const std::vector<double> p0{0.5, 0.5, 0.0}, p1{0.4, 0.4, 0.2};
  const DiscreteMatching m = label_split_matching(p0, p1, std::vector<int>{0, 0, 1});
  EXPECT_EQ(m.fallback_classes, (std::vector<int>{1}));
}

TEST(Encode, EndpointsAreDeterministicAndBijective) {
  numerics::Rng rng(5);
  const auto p0 = random_distribution(5, rng), p1 = random_distribution(5, rng);
  const std::vector<int> labels{0, 1, 0, 1, 1};
  const auto split = label_split_matching(p0, p1, labels);
  for (double g : {0.0, 1.0}) {
    const auto m = mix_matchings(optimal_matching(p0, p1), split, g);
    std::vector<int> seen;
    numerics::Rng r(1);
    const auto before = r.next_u64();
    numerics::Rng r2(1);
    for (int x = 0; x < 5; ++x) seen.push_back(encode_discrete(m, x, 1, r2).z);
    EXPECT_EQ(r2.next_u64(), before);
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(encode_discrete(m, 3, 0, r2).z, 3);
  }
}

TEST(Encode, MixtureFrequency) {
  numerics::Rng rng(6);
  const auto p0 = random_distribution(4, rng), p1 = random_distribution(4, rng);
  const auto m =
      mix_matchings(optimal_matching(p0, p1), label_split_matching(p0, p1, std::vector<int>{0, 1, 0, 1}), 0.5);
  int used = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) used += encode_discrete(m, i % 4, 1, rng).used_optimal ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(used) / n, 0.5, 0.01);
  EXPECT_THROW(encode_discrete(m, 4, 1, rng), UsageError);
}

TEST(Encode, MixtureLatentDistributionMatchesDraws) {
  numerics::Rng rng(7);
  const auto p0 = random_distribution(4, rng), p1 = random_distribution(4, rng);
  const auto m =
      mix_matchings(optimal_matching(p0, p1), label_split_matching(p0, p1, std::vector<int>{0, 1, 1, 0}), 0.3);
  const auto pz1 = latent_distribution(m, p1, 1);
  std::vector<double> freq(4, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    int x = 0;
    while (x < 3 && u >= p1[static_cast<std::size_t>(x)]) u -= p1[static_cast<std::size_t>(x++)];
    freq[static_cast<std::size_t>(encode_discrete(m, x, 1, rng).z)] += 1.0 / n;
  }
  for (int z = 0; z < 4; ++z) EXPECT_NEAR(freq[static_cast<std::size_t>(z)], pz1[static_cast<std::size_t>(z)], 0.005);
}

TEST(Distance, Endpoints) {
  DiscreteMatching id;
  id.optimal = {0, 1};
  EXPECT_NEAR(discrete_statistical_distance(id, std::vector<double>{0.6, 0.4}, std::vector<double>{0.4, 0.6}), 0.2,
              1e-15);
  DiscreteMatching id4;
  id4.optimal = {0, 1, 2, 3};
  EXPECT_EQ(discrete_statistical_distance(id4, std::vector<double>{0.5, 0.5, 0, 0}, std::vector<double>{0, 0, 0.3, 0.7}),
            1.0);
}

TEST(Distance, OptimalAdversaryAttainsDistance) {
  numerics::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p0 = random_distribution(6, rng), p1 = random_distribution(6, rng);
    DiscreteMatching id;
    id.optimal = {0, 1, 2, 3, 4, 5};
    const auto mu = discrete_optimal_adversary(p0, p1);
    double gap = 0;
    for (std::size_t i = 0; i < 6; ++i) gap += mu[i] * (p1[i] - p0[i]);
    EXPECT_NEAR(gap, total_variation(p0, p1), 1e-15);
    // No other classifier on this domain does better.
    for (int mask = 0; mask < 64; ++mask) {
      double g = 0;
      for (std::size_t i = 0; i < 6; ++i) g += ((mask >> i) & 1) * (p1[i] - p0[i]);
      EXPECT_LE(std::abs(g), gap + 1e-15);
    }
  }
}

TEST(Domain, EnumerationAndLookup) {
  const FiniteDomain d({2, 3});
  EXPECT_EQ(d.size(), 6u);
  EXPECT_EQ(d.point(4), (std::vector<int>{1, 1}));
  EXPECT_EQ(d.index_of(std::vector<int>{1, 2}), 5u);
  EXPECT_THROW(d.index_of(std::vector<int>{2, 0}), UsageError);
  const FiniteDomain s = FiniteDomain::from_points({4, 4}, {{3, 1}, {0, 2}, {3, 1}});
  EXPECT_FALSE(s.exhaustive());
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.index_of(std::vector<int>{3, 1}), 1u);
  EXPECT_FALSE(s.contains(std::vector<int>{1, 1}));
}

TEST(Domain, ProbabilitiesFromCategoricalModel) {
  Eigen::MatrixXi data(5, 2);
  data << 0, 1, 1, 2, 1, 2, 0, 0, 1, 1;
  const auto model = density::fit_categorical(data, {2, 3});
  const auto probs = domain_probabilities(model, FiniteDomain({2, 3}));
  EXPECT_NEAR(std::accumulate(probs.p.begin(), probs.p.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(probs.remainder, 0.0, 1e-12);
}

}  // namespace
}  // namespace fnf::discrete
