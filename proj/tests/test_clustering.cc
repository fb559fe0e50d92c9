#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mldes/clustering.hh"
#include "mldes/model_io.hh"
#include "random_models.hh"

using namespace mldes;

namespace {

const std::vector<std::string> kCell{"TaH", "TaV", "Pr", "Ro", "A1", "A2"};

Dsm from_edges(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, int>>& edges) {
    Dsm p{IntMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (auto [a, b, w] : edges) {
        p.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w;
        p.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = w;
    }
    return p;
}

Dsm star(std::size_t spokes) {
    std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
    for (std::size_t s = 1; s <= spokes; ++s) edges.emplace_back(0, s, 1);
    return from_edges(spokes + 1, edges);
}

/// Flow scores by explicit loops: column-normalized off-diagonal matrix,
/// summed powers 1..alpha scaled by mu^k.
std::vector<double> naive_scores(const Dsm& p, int alpha, double mu) {
    const std::size_t n = p.size();
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) sum += p(i, j);
        for (std::size_t i = 0; i < n; ++i)
            if (i != j && sum > 0) t[i][j] = p(i, j) / sum;
    }
    std::vector<std::vector<double>> power = t, total(n, std::vector<double>(n, 0.0));
    double scale = mu;
    for (int k = 1; k <= alpha; ++k) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) total[i][j] += scale * power[i][j];
        std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t m = 0; m < n; ++m) next[i][j] += power[i][m] * t[m][j];
        power = next;
        scale *= mu;
    }
    std::vector<double> scores(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scores[i] += total[i][j];
    return scores;
}

/// Connected components using only edges heavier than `threshold`.
std::vector<std::vector<std::size_t>> components_above(const Dsm& p, int threshold) {
    const std::size_t n = p.size();
    std::vector<int> label(n, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        std::vector<std::size_t> queue{s};
        label[s] = static_cast<int>(out.size());
        for (std::size_t k = 0; k < queue.size(); ++k)
            for (std::size_t t = 0; t < n; ++t)
                if (label[t] < 0 && t != queue[k] && p(queue[k], t) > threshold) {
                    label[t] = label[s];
                    queue.push_back(t);
                }
        std::sort(queue.begin(), queue.end());
        out.push_back(queue);
    }
    return out;
}

void check_structure(const Cluster& c, std::size_t depth, bool root, const ClusterParams& params) {
    if (!root) {
        EXPECT_TRUE(c.requirements.empty());
    }
    if (!params.gamma || (!params.local_bus && depth > 0)) {
        EXPECT_TRUE(c.bus.empty());
    }
    for (const auto& b : c.bus) {
        EXPECT_TRUE(b.is_bus);
        check_structure(b, depth + 1, false, params);
    }
    for (const auto& m : c.non_bus) {
        EXPECT_FALSE(m.is_bus);
        check_structure(m, depth + 1, false, params);
    }
}

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(MLDES_DATA_DIR) + "/production_cell/" + name);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST(FlowScores, MatchNaiveLoops) {
    std::mt19937 rng(41);
    for (int i = 0; i < 100; ++i) {
        const Dsm p = testkit::random_dsm(rng, testkit::uniform(rng, 1, 9));
        const int alpha = static_cast<int>(testkit::uniform(rng, 1, 3));
        const double mu = i % 2 ? 1.0 : 0.6;
        const auto got = flow_scores(p, alpha, mu);
        const auto want = naive_scores(p, alpha, mu);
        for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
    }
}

TEST(DetectBus, StarHubIsTheOnlyBus) {
    const Dsm p = star(5);
    const auto scores = naive_scores(p, 2, 1.0);
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[2] + sorted[3]);
    ASSERT_GT(scores[0], 2.0 * median);
    for (std::size_t s = 1; s < scores.size(); ++s) ASSERT_LE(scores[s], 2.0 * median);
    const BusSplit split = detect_bus(p, 2.0);
    EXPECT_EQ(split.bus, std::vector<std::size_t>{0});
    EXPECT_EQ(split.non_bus, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(DetectBus, UniformAndTinySystemsHaveNoBus) {
    Dsm uniform{IntMatrix::Ones(6, 6)};
    for (double gamma : {1.01, 1.5, 2.0, 10.0}) EXPECT_TRUE(detect_bus(uniform, gamma).bus.empty());
    EXPECT_TRUE(detect_bus(from_edges(2, {{0, 1, 5}}), 1.0).bus.empty());
    EXPECT_TRUE(detect_bus(Dsm{IntMatrix::Identity(4, 4)}, 1.0).bus.empty());
}

TEST(MarkovPartition, DisconnectedCliquesStayApart) {
    const Dsm p = from_edges(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}});
    const auto cells = markov_partition(p, ClusterParams{});
    EXPECT_EQ(cells, (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4, 5}}));
    EXPECT_EQ(markov_partition(Dsm{IntMatrix::Ones(1, 1)}, ClusterParams{}),
              (std::vector<std::vector<std::size_t>>{{0}}));
}

TEST(MarkovPartition, BridgedCliquesMatchThresholdOracle) {
    for (int weight : {2, 3, 5}) {
        std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
        for (std::size_t base : {0u, 4u})
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = a + 1; b < 4; ++b) edges.emplace_back(base + a, base + b, weight);
        edges.emplace_back(3, 4, 1);
        const Dsm p = from_edges(8, edges);
        EXPECT_EQ(markov_partition(p, ClusterParams{}), components_above(p, 1)) << "weight " << weight;
    }
}

TEST(MarkovPartition, SurvivesRandomInputs) {
    std::mt19937 rng(43);
    for (int i = 0; i < 300; ++i) {
        const Dsm p = testkit::random_dsm(rng, testkit::uniform(rng, 1, 20));
        const auto cells = markov_partition(p, ClusterParams{});
        std::vector<int> seen(p.size(), 0);
        for (const auto& cell : cells) {
            ASSERT_FALSE(cell.empty());
            for (std::size_t x : cell) ++seen[x];
        }
        for (int s : seen) EXPECT_EQ(s, 1);
        for (std::size_t k = 1; k < cells.size(); ++k) EXPECT_LT(cells[k - 1].front(), cells[k].front());
    }
}

TEST(Cluster, SingleComponentIsALeafOwningEverything) {
    const Cluster c = cluster(Dsm{IntMatrix::Ones(1, 1)}, ClusterParams{}, 3);
    EXPECT_TRUE(c.is_leaf());
    EXPECT_EQ(c.components, IndexSet{0});
    EXPECT_EQ(c.requirements, (IndexSet{0, 1, 2}));
}

TEST(Cluster, StarWithGlobalBus) {
    const Cluster c = cluster(star(5), ClusterParams{}, 0);
    ASSERT_EQ(c.bus.size(), 1u);
    EXPECT_EQ(c.bus[0].components, IndexSet{0});
    EXPECT_TRUE(c.bus[0].is_bus);
    ASSERT_EQ(c.non_bus.size(), 5u);
    for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(c.non_bus[s].components, IndexSet{s + 1});
}

TEST(Cluster, FuzzInvariantsAndModes) {
    std::mt19937 rng(44);
    std::size_t forced = 0;
    for (int i = 0; i < 1000; ++i) {
        const Dsm p = testkit::random_dsm(rng, testkit::uniform(rng, 1, 20), testkit::chance(rng, 0.5) ? 0.2 : 0.6);
        ClusterParams params;
        switch (i % 3) {
        case 0: params.gamma.reset(); break;
        case 1: break;
        default: params.local_bus = true; break;
        }
        if (i % 7 == 0) params.max_depth = testkit::uniform(rng, 1, 3);
        const Cluster c = cluster(p, params, 4);
        ASSERT_NO_THROW(validate_clustering(c));
        EXPECT_EQ(c.components, testkit::iota_set(p.size()));
        EXPECT_EQ(c.requirements, testkit::iota_set(4));
        check_structure(c, 0, true, params);
        if (params.max_depth) {
            EXPECT_LE(c.height(), *params.max_depth + 2);
        }
        forced += c.count_forced_splits();
    }
    RecordProperty("forced_splits", static_cast<int>(forced));
}

TEST(Cluster, DeterministicSerialization) {
    std::mt19937 rng(45);
    for (int i = 0; i < 100; ++i) {
        const Dsm p = testkit::random_dsm(rng, testkit::uniform(rng, 2, 15));
        std::vector<std::string> names;
        for (std::size_t k = 0; k < p.size(); ++k) names.push_back("c" + std::to_string(k));
        ClusterParams params;
        params.local_bus = i % 2;
        EXPECT_EQ(format_clustering(cluster(p, params, 0), names), format_clustering(cluster(p, params, 0), names));
        EXPECT_EQ(clustering_json(cluster(p, params, 0), names), clustering_json(cluster(p, params, 0), names));
    }
}

TEST(Cluster, ParameterValidation) {
    ClusterParams bad;
    bad.beta = 1.0;
    EXPECT_THROW(cluster(star(3), bad, 0), std::invalid_argument);
    bad = {};
    bad.mu = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = {};
    bad.gamma = 0.5;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = {};
    bad.alpha = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(LoadClustering, LocalBusExampleShape) {
    const Cluster c = load_clustering("{bus:[A1], [{[TaH]}, {bus:[Ro], [{[TaV]}, {[Pr],[A2]}]}]}", kCell, 12);
    EXPECT_EQ(c.requirements, testkit::iota_set(12));
    ASSERT_EQ(c.bus.size(), 1u);
    EXPECT_EQ(c.bus[0].components, IndexSet{4});
    ASSERT_EQ(c.non_bus.size(), 2u);
    EXPECT_EQ(c.non_bus[0].components, IndexSet{0});
    const Cluster& inner = c.non_bus[1];
    EXPECT_EQ(inner.components, (IndexSet{1, 2, 3, 5}));
    ASSERT_EQ(inner.bus.size(), 1u);
    EXPECT_EQ(inner.bus[0].components, IndexSet{3});
    ASSERT_EQ(inner.non_bus.size(), 2u);
    EXPECT_EQ(inner.non_bus[0].components, IndexSet{1});
    EXPECT_EQ(inner.non_bus[1].components, (IndexSet{2, 5}));
    EXPECT_EQ(inner.non_bus[1].non_bus.size(), 2u);
    EXPECT_EQ(format_clustering(c, kCell), "{bus:[A1], [TaH, {bus:[Ro], [TaV, {[Pr, A2]}]}]}\n");
    EXPECT_EQ(load_clustering(fixture("local_bus.clu"), kCell, 12), c);
}

TEST(LoadClustering, FlatListGivesSingletonLeaves) {
    for (const char* text : {"[TaH, TaV, Pr, Ro, A1, A2]", "{[A2, A1, Ro, Pr, TaV, TaH]}"}) {
        const Cluster c = load_clustering(text, kCell, 2);
        EXPECT_TRUE(c.bus.empty());
        ASSERT_EQ(c.non_bus.size(), 6u);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(c.non_bus[i].components, IndexSet{i});
        EXPECT_EQ(c.height(), 2u);
    }
}

TEST(LoadClustering, Errors) {
    auto message = [](const std::string& text) -> std::string {
        try {
            load_clustering(text, kCell, 12);
        } catch (const ClusteringError& e) {
            return e.what();
        }
        return "";
    };
    EXPECT_NE(message("[TaH, TaV, Pr, Ro, A1]").find("missing component 'A2'"), std::string::npos);
    EXPECT_NE(message("[TaH, TaV, Pr, Ro, A1, A2, Belt]").find("unknown component"), std::string::npos);
    EXPECT_NE(message("[TaH, {[TaV, TaH]}, Pr, Ro, A1, A2]").find("two sibling"), std::string::npos);
    EXPECT_NE(message("[TaH, TaV").find("expected"), std::string::npos);
}

TEST(LoadClustering, AliasesAndJsonRoundTrip) {
    const Cluster c = load_clustering("{bus:[Arm], [TaH, TaV, Pr, Ro, A2]}", kCell, 1, {{"Arm", 4}});
    EXPECT_EQ(c.bus[0].components, IndexSet{4});

    std::mt19937 rng(46);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = testkit::uniform(rng, 1, 12);
        std::vector<std::string> names;
        for (std::size_t k = 0; k < n; ++k) names.push_back("n" + std::to_string(k));
        Cluster c2 = testkit::random_clustering(rng, testkit::iota_vector(n), 0.3);
        c2.requirements = testkit::iota_set(3);
        EXPECT_EQ(load_clustering(clustering_json(c2, names), names, 3), c2);
        EXPECT_EQ(load_clustering(format_clustering(c2, names), names, 3), c2);
    }
}

TEST(LoadClustering, ManualFixturesParse) {
    for (const char* file : {"no_bus.clu", "global_bus.clu", "local_bus.clu"}) {
        const Cluster c = load_clustering(fixture(file), kCell, 12);
        EXPECT_NO_THROW(validate_clustering(c)) << file;
    }
    const Cluster global = load_clustering(fixture("global_bus.clu"), kCell, 12);
    EXPECT_EQ(format_clustering(global, kCell), "{bus:[A1], [{[TaH, {[TaV, Pr, Ro, A2]}]}]}\n");
}
