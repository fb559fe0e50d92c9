#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mldes/model_io.hh"
#include "mldes/pipeline.hh"
#include "random_models.hh"

using namespace mldes;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(MLDES_DATA_DIR) + "/production_cell/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag)
        : path_(fs::temp_directory_path() / ("mldes_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() { fs::remove_all(path_); }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::size_t css_column_sum(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::size_t sum = 0;
    while (std::getline(in, line)) sum += std::stoul(line.substr(line.rfind(',') + 1));
    return sum;
}

} // namespace

TEST(Pipeline, ManualRunsReproduceNodeTables) {
    const std::vector<std::pair<std::string, std::size_t>> expected{
        {"no_bus.clu", 4}, {"global_bus.clu", 5}, {"local_bus.clu", 6}};
    for (const auto& [file, nodes] : expected) {
        PipelineConfig config;
        config.manual_clustering = data(file);
        const PipelineRun run = run_pipeline(load_model_file(data("production_cell.des")), config);
        EXPECT_EQ(run.mode, "manual");
        EXPECT_EQ(run.synthesis.nodes.size(), nodes) << file;
        EXPECT_TRUE(run.synthesis.empty_nodes.empty());
        const auto files = run.artifacts();
        EXPECT_EQ(css_column_sum(files.at("css.csv")), run.synthesis.total_css);
        EXPECT_EQ(files.at("dmm.csv"), slurp(data("production_cell.dmm.csv")));
    }
}

TEST(Pipeline, ArtifactsAreByteIdenticalAcrossRunsAndJobs) {
    ScratchDir a("a"), b("b");
    PipelineConfig config;
    config.model_path = data("production_cell.des");
    config.params.local_bus = true;
    config.write_ppm = true;
    config.out_dir = a.path().string();
    run_pipeline(config);
    config.out_dir = b.path().string();
    config.jobs = 3;
    run_pipeline(config);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a.path())) {
        ++files;
        EXPECT_EQ(slurp(entry.path()), slurp(b.path() / entry.path().filename())) << entry.path().filename();
    }
    EXPECT_EQ(files, 9u);
}

TEST(Pipeline, ZeroRequirementsSynthesizeNothing) {
    ModelSet m = load_model_file(data("production_cell.des"));
    m.requirements.clear();
    const PipelineRun run = run_pipeline(m, PipelineConfig{});
    EXPECT_EQ(run.synthesis.total_css, 0u);
    EXPECT_TRUE(run.synthesis.nodes.empty());
    EXPECT_FALSE(run.synthesis.skipped.empty());
}

TEST(Pipeline, MissingComponentIsAStageError) {
    ScratchDir dir("clu");
    const fs::path clu = dir.path() / "partial.clu";
    std::ofstream(clu) << "{bus:[A1], [TaH, {[TaV, Pr, Ro]}]}\n";
    PipelineConfig config;
    config.manual_clustering = clu.string();
    try {
        run_pipeline(load_model_file(data("production_cell.des")), config);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "load-clustering");
        EXPECT_NE(std::string(e.what()).find("A2"), std::string::npos) << e.what();
    }
}

TEST(Pipeline, ParseFailureNamesTheStage) {
    ScratchDir dir("bad");
    const fs::path model = dir.path() / "bad.des";
    std::ofstream(model) << "plant\n";
    PipelineConfig config;
    config.model_path = model.string();
    config.out_dir = dir.path().string();
    try {
        run_pipeline(config);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "parse");
    }
}

TEST(Pipeline, SummaryMatchesCssTable) {
    std::mt19937 rng(71);
    for (int i = 0; i < 30; ++i) {
        const ModelSet m = testkit::random_model(rng);
        const PipelineRun run = run_pipeline(m, PipelineConfig{});
        const auto files = run.artifacts();
        const std::string summary = files.at("summary.json");
        EXPECT_NE(summary.find("\"total_css\": " + std::to_string(css_column_sum(files.at("css.csv")))),
                  std::string::npos);
    }
}

TEST(Config, ParsesKeysAndRejectsUnknown) {
    PipelineConfig config;
    apply_config_text(config, R"(
# production cell, local bus
model = "cell.des"
gamma = 1.5
local_bus = true
max_depth = 3
jobs = 2   # threads
)");
    EXPECT_EQ(config.model_path, "cell.des");
    EXPECT_EQ(config.params.gamma, 1.5);
    EXPECT_EQ(config.params.max_depth, 3u);
    EXPECT_EQ(config.jobs, 2u);
    EXPECT_EQ(config.mode(), "local-bus");
    apply_config_text(config, "gamma = none");
    EXPECT_EQ(config.mode(), "no-bus");
    EXPECT_THROW(apply_config_text(config, "colour = blue"), std::invalid_argument);
    EXPECT_THROW(apply_config_text(config, "beta = fast"), std::invalid_argument);
    EXPECT_THROW(apply_config_text(config, "just words"), std::invalid_argument);
}

TEST(CssProfile, ColumnsDescendAndPad) {
    TreeSynthesisResult small, large;
    for (std::size_t css : {3, 9}) {
        NodeResult n;
        n.supervisor.automaton = Automaton("S");
        for (std::size_t s = 0; s < css; ++s) n.supervisor.automaton.add_state("s" + std::to_string(s), true);
        n.supervisor.automaton.set_initial(0);
        small.nodes.push_back(n);
        large.nodes.push_back(n);
    }
    large.nodes.push_back(large.nodes.back());
    EXPECT_EQ(render_css_profile({{"a", small}, {"b", large}}), "rank,a,b\n1,9,9\n2,3,9\n3,0,3\n");
}
