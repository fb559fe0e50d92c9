#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mldes/clustering.hh"
#include "mldes/matrix.hh"
#include "mldes/model_io.hh"
#include "mldes/pipeline.hh"
#include "mldes/product.hh"
#include "mldes/synthesis.hh"
#include "mldes/transform.hh"

namespace {

using namespace mldes;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << contents;
}

/// Clustering flags shared by cluster, transform and pipeline.
struct ClusterFlags {
    ClusterParams params;
    bool no_bus = false;
    std::optional<std::size_t> max_depth;
    std::string manual;

    void attach(CLI::App& app) {
        app.add_option("--alpha", params.alpha, "expansion coefficient")->capture_default_str();
        app.add_option("--beta", params.beta, "inflation coefficient")->capture_default_str();
        app.add_option("--mu", params.mu, "evaporation constant")->capture_default_str();
        app.add_option("--gamma", params.gamma, "bus detection coefficient (default 2)");
        app.add_flag("--no-bus", no_bus, "disable bus detection");
        app.add_flag("--local-bus", params.local_bus, "detect buses inside clusters as well");
        app.add_option("--max-depth", max_depth, "recursion bound");
        app.add_option("--manual", manual, "clustering file overriding the Markov clustering");
    }

    ClusterParams resolved() const {
        ClusterParams p = params;
        if (no_bus) p.gamma.reset();
        if (max_depth) p.max_depth = max_depth;
        return p;
    }

    PipelineConfig config() const {
        PipelineConfig c;
        c.params = resolved();
        if (!manual.empty()) c.manual_clustering = manual;
        return c;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Multilevel supervisory control synthesis"};
    app.require_subcommand(1);

    std::string model_path;
    std::string format = "text";
    auto* check = app.add_subcommand("check", "parse and validate a model");
    check->add_option("model", model_path, "model file")->required();

    auto* convert = app.add_subcommand("convert", "convert a model between the text and JSON formats");
    convert->add_option("model", model_path, "model file")->required();
    convert->add_option("--to", format, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

    auto* refine_cmd = app.add_subcommand("refine", "print the most refined product system");
    refine_cmd->add_option("model", model_path, "model file")->required();

    std::string dmm_out, dsm_out, ppm_out;
    auto* dsm_cmd = app.add_subcommand("dsm", "emit the DMM and DSM");
    dsm_cmd->add_option("model", model_path, "model file")->required();
    dsm_cmd->add_option("--dmm-out", dmm_out, "write the DMM CSV here instead of stdout");
    dsm_cmd->add_option("--dsm-out", dsm_out, "write the DSM CSV here instead of stdout");
    dsm_cmd->add_option("--ppm", ppm_out, "write a PPM heat grid of the DSM");

    ClusterFlags cluster_flags;
    bool cluster_json = false;
    auto* cluster_cmd = app.add_subcommand("cluster", "multilevel clustering of the DSM");
    cluster_cmd->add_option("model", model_path, "model file")->required();
    cluster_flags.attach(*cluster_cmd);
    cluster_cmd->add_flag("--json", cluster_json, "emit JSON instead of the bracket format");

    ClusterFlags transform_flags;
    std::string dot_out, json_out;
    auto* transform_cmd = app.add_subcommand("transform", "build the tree of synthesis subproblems");
    transform_cmd->add_option("model", model_path, "model file")->required();
    transform_flags.attach(*transform_cmd);
    transform_cmd->add_option("--dot", dot_out, "write the tree as Graphviz DOT");
    transform_cmd->add_option("--json-out", json_out, "write the tree JSON here instead of stdout");

    std::string tree_path;
    unsigned jobs = 1;
    std::size_t budget = kDefaultStateBudget;
    std::string result_out;
    auto* synth_cmd = app.add_subcommand("synth", "synthesize a supervisor for every tree node");
    synth_cmd->add_option("--tree", tree_path, "tree JSON written by transform")->required();
    synth_cmd->add_option("--model", model_path, "model file")->required();
    synth_cmd->add_option("--jobs", jobs, "parallel node syntheses")->capture_default_str();
    synth_cmd->add_option("--state-budget", budget, "state cap per synthesis")->capture_default_str();
    synth_cmd->add_option("--json-out", result_out, "write the JSON result document");

    ClusterFlags pipeline_flags;
    std::string out_dir, config_path;
    bool ppm = false;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage and write the artifacts");
    pipeline_cmd->add_option("--config", config_path, "key = value configuration file");
    pipeline_cmd->add_option("--model", model_path, "model file");
    pipeline_flags.attach(*pipeline_cmd);
    pipeline_cmd->add_option("--out", out_dir, "output directory (default $MLDES_OUT_DIR or .)");
    pipeline_cmd->add_option("--jobs", jobs, "parallel node syntheses")->capture_default_str();
    pipeline_cmd->add_option("--state-budget", budget, "state cap per synthesis")->capture_default_str();
    pipeline_cmd->add_flag("--ppm", ppm, "also write dsm.ppm");

    CLI11_PARSE(app, argc, argv);

    auto aliases_of = [](const ModelSet& model, const ProductSystem& ps) {
        std::vector<std::pair<std::string, std::size_t>> aliases;
        for (std::size_t p = 0; p < model.plants.size(); ++p) aliases.emplace_back(model.plants[p].name(), ps.group_of(p));
        return aliases;
    };
    auto names_of = [](const ModelSet& model, const ProductSystem& ps) {
        std::vector<std::string> components;
        for (std::size_t g = 0; g < ps.size(); ++g) components.push_back(ps.component_name(model, g));
        std::vector<std::string> requirements;
        for (const auto& r : model.requirements) requirements.push_back(r.name);
        return std::pair{components, requirements};
    };
    auto clustering_of = [&](const ClusterFlags& flags, const ModelSet& model, const ProductSystem& ps,
                             const Dsm& dsm) {
        auto [components, requirements] = names_of(model, ps);
        if (!flags.manual.empty())
            return load_clustering(read_file(flags.manual), components, requirements.size(), aliases_of(model, ps));
        return cluster(dsm, flags.resolved(), requirements.size());
    };

    if (*check) {
        const ModelSet model = load_model_file(model_path);
        std::cout << "events " << model.events.size() << "\nplants " << model.plants.size() << "\nrequirements "
                  << model.requirements.size() << '\n';
        return 0;
    }
    if (*convert) {
        const ModelSet model = load_model_file(model_path);
        std::cout << (format == "json" ? serialize_model_json(model) : serialize_model(model));
        return 0;
    }
    if (*refine_cmd) {
        const ModelSet model = load_model_file(model_path);
        std::cout << product_system_json(refine(model.plants), model);
        return 0;
    }
    if (*dsm_cmd) {
        const ModelSet model = load_model_file(model_path);
        const ProductSystem ps = refine(model.plants);
        auto [components, requirements] = names_of(model, ps);
        const Dmm dmm = build_dmm(ps, model);
        const Dsm dsm = dsm_from_dmm(dmm);
        if (dmm_out.empty()) std::cout << dmm_csv(dmm, components, requirements) << '\n';
        else write_file(dmm_out, dmm_csv(dmm, components, requirements));
        if (dsm_out.empty()) std::cout << dsm_csv(dsm, components);
        else write_file(dsm_out, dsm_csv(dsm, components));
        if (!ppm_out.empty()) write_file(ppm_out, dsm_ppm(dsm));
        return 0;
    }
    if (*cluster_cmd) {
        const ModelSet model = load_model_file(model_path);
        const ProductSystem ps = refine(model.plants);
        const Dsm dsm = dsm_from_dmm(build_dmm(ps, model));
        const Cluster c = clustering_of(cluster_flags, model, ps, dsm);
        const auto names = names_of(model, ps).first;
        std::cout << (cluster_json ? clustering_json(c, names) : format_clustering(c, names));
        return 0;
    }
    if (*transform_cmd) {
        const ModelSet model = load_model_file(model_path);
        const ProductSystem ps = refine(model.plants);
        const Dmm dmm = build_dmm(ps, model);
        const Cluster c = clustering_of(transform_flags, model, ps, dsm_from_dmm(dmm));
        const SynthesisTree tree = transform_c_to_t(c, dmm);
        auto [components, requirements] = names_of(model, ps);
        const std::string doc = tree_json(tree, components, requirements);
        if (json_out.empty()) std::cout << doc;
        else write_file(json_out, doc);
        if (!dot_out.empty()) write_file(dot_out, tree_dot(tree, components));
        return 0;
    }
    if (*synth_cmd) {
        const ModelSet model = load_model_file(model_path);
        const ProductSystem ps = refine(model.plants);
        auto [components, requirements] = names_of(model, ps);
        const SynthesisTree tree = tree_from_json(read_file(tree_path), components, requirements);
        const TreeSynthesisResult result = synthesize_tree(tree, model, ps, jobs, budget);
        std::cout << css_csv(result, components);
        for (const auto& path : result.empty_nodes)
            std::cerr << "warning: node " << path << " has an empty supervisor\n";
        if (!result_out.empty()) {
            nlohmann::json doc;
            doc["total_css"] = result.total_css;
            doc["max_node_css"] = result.max_css();
            doc["skipped"] = result.skipped;
            doc["empty_nodes"] = result.empty_nodes;
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& n : result.nodes) {
                nlohmann::json node;
                node["path"] = n.path;
                nlohmann::json comps = nlohmann::json::array();
                for (std::size_t c : n.components) comps.push_back(components[c]);
                node["components"] = comps;
                node["requirements"] = n.requirement_count;
                node["css"] = n.css();
                nodes.push_back(node);
            }
            doc["nodes"] = nodes;
            write_file(result_out, doc.dump(2) + "\n");
        }
        return 0;
    }
    if (*pipeline_cmd) {
        PipelineConfig config;
        if (!config_path.empty()) apply_config_text(config, read_file(config_path));
        const PipelineConfig from_flags = pipeline_flags.config();
        // Command-line flags win over the configuration file when given.
        if (!model_path.empty()) config.model_path = model_path;
        if (from_flags.manual_clustering) config.manual_clustering = from_flags.manual_clustering;
        if (pipeline_cmd->count("--alpha")) config.params.alpha = from_flags.params.alpha;
        if (pipeline_cmd->count("--beta")) config.params.beta = from_flags.params.beta;
        if (pipeline_cmd->count("--mu")) config.params.mu = from_flags.params.mu;
        if (pipeline_cmd->count("--gamma")) config.params.gamma = from_flags.params.gamma;
        if (pipeline_cmd->count("--local-bus")) config.params.local_bus = true;
        if (pipeline_cmd->count("--max-depth")) config.params.max_depth = from_flags.params.max_depth;
        if (pipeline_cmd->count("--no-bus")) config.params.gamma.reset();
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (config.out_dir.empty()) {
            const char* env = std::getenv(kOutDirVariable);
            config.out_dir = env ? env : ".";
        }
        if (pipeline_cmd->count("--jobs")) config.jobs = jobs;
        if (pipeline_cmd->count("--state-budget")) config.state_budget = budget;
        if (ppm) config.write_ppm = true;
        if (config.model_path.empty()) throw std::invalid_argument("pipeline: no model given");

        const PipelineRun result = run_pipeline(config);
        for (const auto& path : result.synthesis.empty_nodes)
            std::cerr << "warning: node " << path << " has an empty supervisor\n";
        std::cout << "mode " << result.mode << "\ntotal_css " << result.synthesis.total_css << "\nmax_node_css "
                  << result.synthesis.max_css() << "\nartifacts " << config.out_dir << '\n';
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
