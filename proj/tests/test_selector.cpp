#include <doctest.h>

#include "oracles.hpp"
#include "paced/difficulty.hpp"
#include "paced/selector.hpp"

using namespace paced;

TEST_CASE("threshold selection") {
    const std::vector<double> d{0.1, 0.4, 0.8};
    auto m = select(std::span<const double>(d), 0.5);
    CHECK(m.flags == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(m.selected_count == 2);
    CHECK(select(std::span<const double>(d), 1.0).selected_count == 3);
    CHECK(select(std::span<const double>(d), 0.0).selected_count == 0);
    // Inclusive at the threshold.
    CHECK(select(std::span<const double>(d), 0.4).flags == std::vector<std::uint8_t>{1, 1, 0});
}

TEST_CASE("record overload agrees with values") {
    Rng rng(4);
    std::vector<Prediction> p;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        p.push_back(Prediction::from_p_vul(rng.uniform()));
        y.push_back(static_cast<int>(rng.below(2)));
    }
    const auto recs = difficulty_batch(p, y);
    const auto vals = difficulty_values(recs);
    for (double lambda : {0.0, 0.2, 0.5, 0.77, 1.0}) {
        CHECK(select(std::span<const DifficultyRecord>(recs), lambda).flags ==
              select(std::span<const double>(vals), lambda).flags);
    }
}

TEST_CASE("objective") {
    const std::vector<double> losses{0.2, 0.9, 0.1};
    const std::vector<double> diffs{0.1, 0.7, 0.3};
    const auto o = spl_objective(losses, diffs, 0.5);
    CHECK(o.mask == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(o.value == doctest::Approx(0.3 - 1.0));
    CHECK(spl_objective(losses, diffs, 0.0).value == 0.0);
    CHECK_THROWS_AS(spl_objective(losses, std::vector<double>{0.1}, 0.5), Error);
}

TEST_CASE("property: gating on loss minimizes the objective") {
    // When a batch's difficulty equals its loss the mask is the exact minimizer
    // of sum v(L - lambda), checked against exhaustive search.
    Rng rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> l(1 + rng.below(10));
        for (auto& x : l) x = rng.uniform();
        const double lambda = rng.uniform();
        const auto o = spl_objective(l, l, lambda);
        CHECK(o.value == doctest::Approx(oracle::brute_force_objective_min(l, lambda)).epsilon(1e-12));
    }
}

TEST_CASE("batch difficulty") {
    CHECK(batch_difficulty(std::vector<double>{0.2, 0.4}) == doctest::Approx(0.3));
    CHECK_THROWS_AS(batch_difficulty(std::vector<double>{}), Error);
}
