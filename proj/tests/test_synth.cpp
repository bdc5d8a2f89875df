#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "test_util.hpp"
#include "xlate/synth.hpp"

using namespace xlate;

TEST_CASE("benchmark configuration: sizes, pairing and planted effects") {
    const SynthConfig c = SynthConfig::benchmark();
    const auto [pair, truth] = generate(c);
    CHECK(pair.x.n_variables() == 200);
    CHECK(pair.y.n_variables() == 210);
    CHECK(pair.x.individuals.size() == 11);
    CHECK(pair.y.individuals.size() == 11);
    for (const auto* d : {&pair.x, &pair.y}) {
        for (const auto& ind : d->individuals) {
            CHECK(ind.rows.size() >= 5);
            CHECK(ind.rows.size() <= 15);
        }
    }
    CHECK(truth.pairing.n_links() == 2);
    CHECK(truth.pairing.partner_of_x(0) == 2);
    CHECK(truth.pairing.partner_of_x(2) == 1);
    CHECK(truth.pairing.partner_of_x(1) == -1);
    CHECK(truth.effects.shared.time(4, 0) == 2.0);
    CHECK(truth.effects.shared.interaction(3, 2) == -1.5);
    CHECK(truth.effects.specific_y.time(2, 3) == -1.0);
    // every cluster is used
    for (int k = 0; k < 3; ++k) CHECK((truth.assignment_x.array() == k).any());
    for (int k = 0; k < 4; ++k) CHECK((truth.assignment_y.array() == k).any());
}

TEST_CASE("latents follow their effect means with unit noise") {
    SynthConfig c = SynthConfig::benchmark();
    c.n_individuals_x = 200;
    c.n_individuals_y = 200;
    const auto [pair, truth] = generate(c);
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (std::size_t j = 0; j < pair.y.individuals.size(); ++j) {
        const auto& ind = pair.y.individuals[j];
        for (std::size_t t = 0; t < ind.rows.size(); ++t) {
            const Eigen::VectorXd m =
                latent_mean_for_sample(truth.paths_y[j][t], ind.disease, truth.effects, truth.pairing, Side::y);
            const Eigen::VectorXd r = truth.latent_y.row(ind.rows[t]).transpose() - m;
            sum += r.sum();
            sq += r.squaredNorm();
            n += static_cast<double>(r.size());
        }
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("no planted effects: empty pairing, zero effects") {
    SynthConfig c = SynthConfig::benchmark();
    c.planted.clear();
    const auto [pair, truth] = generate(c);
    CHECK(truth.pairing.n_links() == 0);
    CHECK(truth.effects.shared.time.isZero());
    CHECK(truth.effects.specific_y.time.isZero());
}

TEST_CASE("single state: every sample stays in the first state") {
    SynthConfig c;
    c.n_states = 1;
    c.p_x = 10;
    c.p_y = 10;
    c.k_x = 2;
    c.k_y = 2;
    const auto [pair, truth] = generate(c);
    for (const auto& p : truth.paths_x) CHECK(std::all_of(p.begin(), p.end(), [](int s) { return s == 0; }));
    CHECK(pair.x.n_samples() > 0);
}

TEST_CASE("same seed reproduces, different seed differs") {
    const SynthConfig c = SynthConfig::benchmark();
    SynthConfig d = c;
    d.seed = 2;
    CHECK(canonical_serialization(generate(c).first.x) == canonical_serialization(generate(c).first.x));
    CHECK(canonical_serialization(generate(c).first.y) != canonical_serialization(generate(d).first.y));
}

TEST_CASE("config validation") {
    SynthConfig c = SynthConfig::benchmark();
    c.planted[0].cluster_y = 7;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("out of range"), std::invalid_argument);
    c = SynthConfig::benchmark();
    c.planted[1].values = {0.0, 1.0};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("expected 5 values"), std::invalid_argument);
    c = SynthConfig::benchmark();
    c.planted[0].values[0] = 0.3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SynthConfig::benchmark();
    c.planted.push_back({EffectKind::shared_time, 0, 0, {0, 1, 1, 1, 1}});
    CHECK_THROWS_WITH_AS(generate(c), doctest::Contains("non-injective"), std::invalid_argument);
    CHECK(parse_effect_kind("specific_time_y") == EffectKind::specific_time_y);
    CHECK_FALSE(parse_effect_kind("bogus").has_value());
}

TEST_CASE("split balances disease groups and partitions individuals") {
    const auto [pair, truth] = generate(SynthConfig::benchmark());
    Rng rng(4);
    const auto [a, b] = split_individuals(pair.x, rng);
    std::set<int> all(a.begin(), a.end());
    all.insert(b.begin(), b.end());
    CHECK(all.size() == pair.x.individuals.size());
    CHECK(a.size() + b.size() == pair.x.individuals.size());
    auto diseased = [&](const std::vector<int>& half) {
        int n = 0;
        for (int j : half) n += pair.x.individuals[static_cast<std::size_t>(j)].disease;
        return n;
    };
    CHECK(std::abs(diseased(a) - diseased(b)) <= 1);
    CHECK(std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())) <= 1);
}

TEST_CASE("ground truth file uses 1-based clusters") {
    const auto [pair, truth] = generate(SynthConfig::benchmark());
    testutil::TempDir dir("truth");
    write_ground_truth(truth, dir / "ground_truth.json");
    const auto j = nlohmann::json::parse(testutil::read_file(dir / "ground_truth.json"));
    CHECK(j["pairing"].size() == 2);
    CHECK(j["pairing"][0]["x_cluster"] == 1);
    CHECK(j["pairing"][0]["y_cluster"] == 3);
    CHECK(j["planted_effects"][2]["y_cluster"] == 4);
    const auto assignment = j["x"]["assignment"].get<std::vector<int>>();
    CHECK(*std::min_element(assignment.begin(), assignment.end()) == 1);
    CHECK(*std::max_element(assignment.begin(), assignment.end()) == 3);
}
