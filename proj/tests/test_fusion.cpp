// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "c3tg/errors.hpp"
#include "c3tg/fusion.hpp"
#include "c3tg/ngram.hpp"

using namespace c3tg;

namespace {

VocabularyPtr vocab_of(std::size_t n) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(i));
    return make_vocabulary(std::move(tokens));
}

TokenDistribution dist(const VocabularyPtr& vocab, std::vector<double> probs) {
    return TokenDistribution(vocab, std::move(probs));
}

// Direct-summation KL oracle on raw vectors, no smoothing.
double kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

// Brute-force fusion oracle: replicate the documented smoothing, then the
// naive product-then-normalize path (the log-space implementation is the
// route under test).
std::vector<double> fuse_oracle(const std::vector<std::vector<double>>& priors,
                                const std::vector<double>& lambdas) {
    const std::size_t v = priors.front().size();
    double lambda_total = 0.0;
    for (double l : lambdas) lambda_total += l;

    std::vector<std::vector<double>> smoothed_priors;
    for (const auto& q : priors) {
        std::vector<double> s(q);
        double sum = 0.0;
        for (double& x : s) {
            x += 1e-12;
            sum += x;
        }
        for (double& x : s) x /= sum;
        smoothed_priors.push_back(std::move(s));
    }

    std::vector<double> fused(v, 1.0);
    for (std::size_t i = 0; i < smoothed_priors.size(); ++i) {
        const double w = lambdas[i] / lambda_total;
        if (w == 0.0) continue;
        for (std::size_t x = 0; x < v; ++x) {
            fused[x] *= std::pow(smoothed_priors[i][x], w);
        }
    }
    double norm = 0.0;
    for (double f : fused) norm += f;
    for (double& f : fused) f /= norm;
    return fused;
}

std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t n,
                                         double min_mass = 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out(n);
    double sum = 0.0;
    for (double& x : out) {
        x = min_mass - std::log(1.0 - unit(rng));  // exponential + floor
        sum += x;
    }
    for (double& x : out) x /= sum;
    return out;
}

double l2_distance(const std::vector<double>& a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace

TEST_CASE("vocabulary rejects duplicates and empties") {
    CHECK_THROWS_AS(Vocabulary({}), ContractViolation);
    CHECK_THROWS_AS(Vocabulary({"a", "b", "a"}), ContractViolation);
    const Vocabulary vocab({"a", "b"});
    CHECK(vocab.size() == 2);
    CHECK(vocab.index_of("b") == 1);
    CHECK(!vocab.index_of("c").has_value());
}

TEST_CASE("token distribution validates probabilities") {
    auto vocab = vocab_of(2);
    CHECK_THROWS_AS(dist(vocab, {0.5, -0.5}), ContractViolation);
    CHECK_THROWS_AS(dist(vocab, {0.5, 0.6}), ContractViolation);
    CHECK_THROWS_AS(dist(vocab, {1.0}), ContractViolation);
    CHECK_NOTHROW(dist(vocab, {0.25, 0.75}));
}

TEST_CASE("kl_divergence identity and worked cases") {
    auto vocab = vocab_of(2);
    const auto p = dist(vocab, {0.3, 0.7});
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-9));

    const auto point = dist(vocab, {1.0, 0.0});
    const auto half = dist(vocab, {0.5, 0.5});
    CHECK(kl_divergence(point, half) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

    const auto q = dist(vocab, {0.9, 0.1});
    const double expected = kl_oracle({0.5, 0.5}, {0.9, 0.1});
    CHECK(kl_divergence(half, q) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("kl_divergence contract errors") {
    auto va = vocab_of(2);
    auto vb = vocab_of(2);  // distinct identity, same content
    const auto p = dist(va, {0.5, 0.5});
    const auto q = dist(vb, {0.5, 0.5});
    CHECK_THROWS_AS(kl_divergence(p, q), ContractViolation);
}

TEST_CASE("kl non-negativity on random pairs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t v = 2 + rng() % 7;
        auto vocab = vocab_of(v);
        const auto p = dist(vocab, random_simplex_point(rng, v));
        const auto q = dist(vocab, random_simplex_point(rng, v));
        CHECK(kl_divergence(p, q) >= -1e-12);
    }
}

TEST_CASE("weighted_kl_objective sums per-prior divergences") {
    auto vocab = vocab_of(2);
    const auto p = dist(vocab, {0.5, 0.5});

    AttributePriorSet sole;
    sole.priors.push_back(p);
    sole.lambdas = {1.0};
    CHECK(weighted_kl_objective(p, sole) == doctest::Approx(0.0).epsilon(1e-9));

    AttributePriorSet degenerate;
    degenerate.priors = {dist(vocab, {0.9, 0.1}), dist(vocab, {0.2, 0.8})};
    degenerate.lambdas = {0.0, 1.0};
    CHECK(weighted_kl_objective(p, degenerate) ==
          doctest::Approx(kl_divergence(p, degenerate.priors[1])).epsilon(1e-12));

    AttributePriorSet pair;
    pair.priors = {dist(vocab, {0.9, 0.1}), dist(vocab, {0.5, 0.5})};
    pair.lambdas = {2.0, 1.0};
    // the second prior equals p, so only the first term contributes
    CHECK(weighted_kl_objective(p, pair) ==
          doctest::Approx(2.0 * kl_oracle({0.5, 0.5}, {0.9, 0.1})).epsilon(1e-6));

    AttributePriorSet empty;
    CHECK_THROWS_AS(weighted_kl_objective(p, empty), ContractViolation);
}

TEST_CASE("fuse_distributions identity cases") {
    auto vocab = vocab_of(3);
    const auto q = dist(vocab, {0.5, 0.3, 0.2});

    AttributePriorSet sole;
    sole.priors.push_back(q);
    sole.lambdas = {1.0};
    const auto fused = fuse_distributions(sole);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fused.prob(i) == doctest::Approx(q.prob(i)).epsilon(1e-9));
    }

    AttributePriorSet equal;
    equal.priors = {q, q, q};
    equal.lambdas = {0.4, 1.1, 2.5};
    const auto fused_equal = fuse_distributions(equal);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fused_equal.prob(i) == doctest::Approx(q.prob(i)).epsilon(1e-9));
    }
}

TEST_CASE("fuse_distributions worked geometric mean") {
    auto vocab = vocab_of(3);
    AttributePriorSet set;
    set.priors = {dist(vocab, {0.5, 0.3, 0.2}), dist(vocab, {0.2, 0.3, 0.5})};
    set.lambdas = {1.0, 1.0};
    const auto fused = fuse_distributions(set);
    const auto expected = fuse_oracle({{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}}, {1.0, 1.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fused.prob(i) == doctest::Approx(expected[i]).epsilon(1e-10));
    }
    // spec-level sanity on the rounded values
    CHECK(fused.prob(0) == doctest::Approx(0.339).epsilon(1e-2));
    CHECK(fused.prob(1) == doctest::Approx(0.322).epsilon(1e-2));
    CHECK(fused.prob(2) == doctest::Approx(0.339).epsilon(1e-2));
}

TEST_CASE("fusion matches naive oracle on random prior sets") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t v = 2 + rng() % 7;  // <= 8
        const std::size_t n = 1 + rng() % 4;
        auto vocab = vocab_of(v);
        AttributePriorSet set;
        std::vector<std::vector<double>> raw;
        for (std::size_t i = 0; i < n; ++i) {
            raw.push_back(random_simplex_point(rng, v, 1e-3));
            set.priors.push_back(dist(vocab, raw.back()));
            set.lambdas.push_back(0.1 + 3.0 * static_cast<double>(rng() % 1000) / 1000.0);
        }
        const auto fused = fuse_distributions(set);
        const auto expected = fuse_oracle(raw, set.lambdas);
        double total = 0.0;
        for (std::size_t x = 0; x < v; ++x) {
            CHECK(std::abs(fused.prob(x) - expected[x]) < 1e-10);
            total += fused.prob(x);
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("fusion is invariant to uniform lambda scaling") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t v = 2 + rng() % 9;
        const std::size_t n = 1 + rng() % 4;
        auto vocab = vocab_of(v);
        AttributePriorSet set;
        for (std::size_t i = 0; i < n; ++i) {
            set.priors.push_back(dist(vocab, random_simplex_point(rng, v)));
            set.lambdas.push_back(0.05 + static_cast<double>(rng() % 1000) / 500.0);
        }
        AttributePriorSet scaled = set;
        const double c = 0.001 + 50.0 * static_cast<double>(rng() % 1000) / 1000.0;
        for (double& l : scaled.lambdas) l *= c;
        const auto a = fuse_distributions(set);
        const auto b = fuse_distributions(scaled);
        for (std::size_t x = 0; x < v; ++x) {
            CHECK(std::abs(a.prob(x) - b.prob(x)) < 1e-12);
        }
    }
}

TEST_CASE("fused distribution minimizes the weighted KL objective") {
    std::mt19937_64 rng(17);
    for (int instance = 0; instance < 60; ++instance) {
        const std::size_t v = 2 + rng() % 9;  // <= 10
        const std::size_t n = 1 + rng() % 4;
        auto vocab = vocab_of(v);
        AttributePriorSet set;
        for (std::size_t i = 0; i < n; ++i) {
            set.priors.push_back(dist(vocab, random_simplex_point(rng, v, 1e-3)));
            set.lambdas.push_back(0.1 + 2.0 * static_cast<double>(rng() % 1000) / 1000.0);
        }
        const auto p_star = fuse_distributions(set);
        const double optimum = weighted_kl_objective(p_star, set);
        std::vector<double> star(p_star.probs().begin(), p_star.probs().end());

        int checked = 0;
        int guard = 0;
        while (checked < 100 && guard < 2000) {
            ++guard;
            std::uniform_real_distribution<double> t_dist(0.01, 0.9);
            const auto other = random_simplex_point(rng, v, 1e-4);
            const double t = t_dist(rng);
            std::vector<double> perturbed(v);
            for (std::size_t x = 0; x < v; ++x) {
                perturbed[x] = (1.0 - t) * star[x] + t * other[x];
            }
            if (l2_distance(perturbed, p_star.probs()) < 1e-3) continue;
            const double value = weighted_kl_objective(dist(vocab, perturbed), set);
            CHECK(value >= optimum - 1e-9);
            ++checked;
        }
        CHECK(checked == 100);
    }
}

TEST_CASE("sample_token point masses and determinism") {
    auto vocab = vocab_of(3);
    RngState rng(99);
    CHECK(sample_token(dist(vocab, {1.0, 0.0, 0.0}), rng) == 0);
    CHECK(sample_token(dist(vocab, {0.0, 1.0, 0.0}), rng) == 1);
    CHECK(sample_token(dist(vocab, {0.0, 0.0, 1.0}), rng) == 2);

    RngState a(1234);
    RngState b(1234);
    const auto d = dist(vocab, {0.2, 0.5, 0.3});
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_token(d, a) == sample_token(d, b));
    }
}

TEST_CASE("sample_token uniform frequencies converge") {
    auto vocab = vocab_of(4);
    const auto uniform = dist(vocab, {0.25, 0.25, 0.25, 0.25});
    RngState rng(4242);
    std::vector<int> counts(4, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[sample_token(uniform, rng)] += 1;
    for (int c : counts) {
        CHECK(std::abs(static_cast<double>(c) / draws - 0.25) < 0.02);
    }
}

namespace {

class FixedProvider : public ConditionalPriorProvider {
public:
    FixedProvider(VocabularyPtr vocab, std::vector<double> probs)
        : vocab_(std::move(vocab)), probs_(std::move(probs)) {}

    TokenDistribution prior(std::span<const std::size_t>) const override {
        return TokenDistribution(vocab_, probs_);
    }
    const VocabularyPtr& vocab() const override { return vocab_; }

private:
    VocabularyPtr vocab_;
    std::vector<double> probs_;
};

}  // namespace

TEST_CASE("generate_sequence basics") {
    auto vocab = vocab_of(3);
    FixedProvider provider(vocab, {0.6, 0.3, 0.1});
    const ConditionalPriorProvider* providers[] = {&provider};
    const double lambdas[] = {1.0};

    RngState rng(5);
    const std::vector<std::size_t> context = {0, 1};
    const auto unchanged = generate_sequence(providers, lambdas, context, 0, rng);
    CHECK(unchanged == context);

    // single provider: fusion is the identity, so the sequence matches
    // direct sampling with the same seed
    RngState direct_rng(55);
    RngState fused_rng(55);
    std::vector<std::size_t> direct = context;
    for (int i = 0; i < 40; ++i) {
        direct.push_back(sample_token(provider.prior(direct), direct_rng));
    }
    const auto fused = generate_sequence(providers, lambdas, context, 40, fused_rng);
    CHECK(fused == direct);
}

TEST_CASE("generate_sequence rejects providers on a different vocabulary") {
    auto va = vocab_of(3);
    auto vb = vocab_of(3);
    FixedProvider good(va, {0.6, 0.3, 0.1});
    FixedProvider bad(vb, {0.6, 0.3, 0.1});
    const ConditionalPriorProvider* providers[] = {&good, &bad};
    const double lambdas[] = {1.0, 1.0};
    RngState rng(1);
    CHECK_THROWS_AS(generate_sequence(providers, lambdas, {}, 3, rng), ContractViolation);
}

TEST_CASE("bigram providers fuse to the per-step oracle") {
    auto vocab = make_vocabulary({"sun", "rain", "warm", "cold", "sky", "road"});
    const std::vector<std::vector<std::string>> sunny = {
        {"sun", "warm", "sky"}, {"warm", "sun", "sun"}, {"sky", "warm", "sun"}};
    const std::vector<std::vector<std::string>> rainy = {
        {"rain", "cold", "road"}, {"cold", "rain", "rain"}, {"road", "cold", "rain"}};
    BigramPriorProvider p1(vocab, sunny);
    BigramPriorProvider p2(vocab, rainy);
    const ConditionalPriorProvider* providers[] = {&p1, &p2};
    const std::vector<double> lambdas = {1.0, 1.0};

    RngState rng(2024);
    const auto sequence = generate_sequence(providers, lambdas, {0}, 12, rng);
    CHECK(sequence.size() == 13);

    // replay every step and compare the fused distribution with the
    // brute-force oracle on the providers' priors
    for (std::size_t t = 1; t < sequence.size(); ++t) {
        std::span<const std::size_t> context(sequence.data(), t);
        const auto q1 = p1.prior(context);
        const auto q2 = p2.prior(context);
        AttributePriorSet set;
        set.priors = {q1, q2};
        set.lambdas = lambdas;
        const auto fused = fuse_distributions(set);
        const auto expected =
            fuse_oracle({{q1.probs().begin(), q1.probs().end()},
                         {q2.probs().begin(), q2.probs().end()}},
                        lambdas);
        for (std::size_t x = 0; x < vocab->size(); ++x) {
            CHECK(std::abs(fused.prob(x) - expected[x]) < 1e-10);
        }
    }
}
