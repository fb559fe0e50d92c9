#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mldes/clustering.hh"
#include "mldes/matrix.hh"
#include "mldes/model.hh"
#include "mldes/product.hh"
#include "mldes/synthesis.hh"
#include "mldes/transform.hh"

namespace mldes {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirVariable = "MLDES_OUT_DIR";

struct PipelineConfig {
    std::string model_path;
    std::optional<std::string> manual_clustering;  // clustering file; overrides params
    ClusterParams params;
    std::string out_dir;
    std::size_t state_budget = kDefaultStateBudget;
    unsigned jobs = 1;
    bool write_ppm = false;

    /// "manual", "no-bus", "global-bus" or "local-bus".
    std::string mode() const;
};

/// Applies `key = value` lines (`#` comments) to `config`. Keys: model,
/// manual, out, alpha, beta, mu, gamma (a number or "none"), local_bus,
/// max_depth, state_budget, jobs, ppm.
void apply_config_text(PipelineConfig& config, std::string_view text);

/// A pipeline stage failed; `stage()` names it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Everything computed by one run, in memory.
struct PipelineRun {
    ModelSet model;
    ProductSystem product;
    std::vector<std::string> component_names;
    std::vector<std::string> requirement_names;
    Dmm dmm;
    Dsm dsm;
    Cluster clustering;
    SynthesisTree tree;
    TreeSynthesisResult synthesis;
    std::string mode;

    /// Artifact file name -> contents.
    std::map<std::string, std::string> artifacts() const;
};

/// Runs every stage on an already parsed model (the config's model path is
/// ignored). Stage failures raise StageError.
PipelineRun run_pipeline(ModelSet model, const PipelineConfig& config);

/// Loads the model, runs every stage and writes the artifacts into
/// `config.out_dir` (created if needed).
PipelineRun run_pipeline(const PipelineConfig& config);

void write_artifacts(const PipelineRun& run, const std::string& out_dir, bool write_ppm);

/// One node row per line: path, components, |R|, css.
std::string css_csv(const TreeSynthesisResult& result, const std::vector<std::string>& component_names);

std::string summary_json(const PipelineRun& run);

/// Column per labelled result holding its node css values in descending
/// order; shorter columns are padded with zeros.
std::string render_css_profile(const std::vector<std::pair<std::string, TreeSynthesisResult>>& results);

} // namespace mldes
