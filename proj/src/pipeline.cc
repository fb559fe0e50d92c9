#include "mldes/pipeline.hh"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mldes/model_io.hh"

namespace mldes {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
    return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config: '" + key + "' expects true or false, got '" + value + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string join(const IndexSet& set, const std::vector<std::string>& names, char sep) {
    std::string out;
    for (std::size_t x : set) {
        if (!out.empty()) out += sep;
        out += names.at(x);
    }
    return out;
}

} // namespace

std::string PipelineConfig::mode() const {
    if (manual_clustering) return "manual";
    if (!params.gamma) return "no-bus";
    return params.local_bus ? "local-bus" : "global-bus";
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

        if (key == "model") config.model_path = value;
        else if (key == "manual") config.manual_clustering = value;
        else if (key == "out") config.out_dir = value;
        else if (key == "alpha") config.params.alpha = static_cast<int>(to_size(key, value));
        else if (key == "beta") config.params.beta = to_double(key, value);
        else if (key == "mu") config.params.mu = to_double(key, value);
        else if (key == "gamma") {
            if (value == "none") config.params.gamma.reset();
            else config.params.gamma = to_double(key, value);
        } else if (key == "local_bus") config.params.local_bus = to_bool(key, value);
        else if (key == "max_depth") config.params.max_depth = to_size(key, value);
        else if (key == "state_budget") config.state_budget = to_size(key, value);
        else if (key == "jobs") config.jobs = static_cast<unsigned>(to_size(key, value));
        else if (key == "ppm") config.write_ppm = to_bool(key, value);
        else throw std::invalid_argument("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
}

StageError::StageError(std::string stage, const std::string& cause)
    : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}

PipelineRun run_pipeline(ModelSet model, const PipelineConfig& config) {
    PipelineRun run;
    run.mode = config.mode();
    run.model = std::move(model);
    stage("validate", [&] { run.model.validate(); });

    stage("refine", [&] {
        run.product = refine(run.model.plants);
        for (std::size_t g = 0; g < run.product.size(); ++g)
            run.component_names.push_back(run.product.component_name(run.model, g));
        for (const auto& r : run.model.requirements) run.requirement_names.push_back(r.name);
    });

    stage("matrices", [&] {
        run.dmm = build_dmm(run.product, run.model);
        run.dsm = dsm_from_dmm(run.dmm);
    });

    if (config.manual_clustering) {
        run.clustering = stage("load-clustering", [&] {
            std::vector<std::pair<std::string, std::size_t>> aliases;
            for (std::size_t p = 0; p < run.model.plants.size(); ++p)
                aliases.emplace_back(run.model.plants[p].name(), run.product.group_of(p));
            return load_clustering(read_file(*config.manual_clustering), run.component_names,
                                   run.requirement_names.size(), aliases);
        });
    } else {
        run.clustering = stage("cluster", [&] { return cluster(run.dsm, config.params, run.requirement_names.size()); });
    }

    run.tree = stage("transform", [&] { return transform_c_to_t(run.clustering, run.dmm); });
    run.synthesis = stage("synthesize", [&] {
        return synthesize_tree(run.tree, run.model, run.product, config.jobs, config.state_budget);
    });
    return run;
}

PipelineRun run_pipeline(const PipelineConfig& config) {
    ModelSet model = stage("parse", [&] { return parse_model_any(read_file(config.model_path)); });
    PipelineRun run = run_pipeline(std::move(model), config);
    stage("report", [&] { write_artifacts(run, config.out_dir, config.write_ppm); });
    return run;
}

std::string css_csv(const TreeSynthesisResult& result, const std::vector<std::string>& component_names) {
    std::ostringstream os;
    os << "node,components,requirements,css\n";
    for (const auto& n : result.nodes)
        os << n.path << ',' << join(n.components, component_names, ';') << ',' << n.requirement_count << ','
           << n.css() << '\n';
    return os.str();
}

std::string summary_json(const PipelineRun& run) {
    json doc;
    doc["mode"] = run.mode;
    doc["components"] = run.component_names.size();
    doc["requirements"] = run.requirement_names.size();
    doc["synthesized_nodes"] = run.synthesis.nodes.size();
    doc["total_css"] = run.synthesis.total_css;
    doc["max_node_css"] = run.synthesis.max_css();
    doc["skipped"] = run.synthesis.skipped;
    doc["empty_nodes"] = run.synthesis.empty_nodes;
    doc["forced_splits"] = run.clustering.count_forced_splits();
    doc["clustering_height"] = run.clustering.height();
    const bool prefix_closed = std::all_of(run.model.requirements.begin(), run.model.requirements.end(),
                                           [](const Requirement& r) { return r.prefix_closed(); });
    const bool plants_marked = std::all_of(run.model.plants.begin(), run.model.plants.end(),
                                           [](const Automaton& p) { return p.all_marked(); });
    doc["nonblocking_guaranteed"] = prefix_closed && plants_marked;
    return doc.dump(2) + "\n";
}

std::map<std::string, std::string> PipelineRun::artifacts() const {
    std::map<std::string, std::string> out;
    out["product.json"] = product_system_json(product, model);
    out["dmm.csv"] = dmm_csv(dmm, component_names, requirement_names);
    out["dsm.csv"] = dsm_csv(dsm, component_names);
    out["clustering.txt"] = format_clustering(clustering, component_names);
    out["tree.json"] = tree_json(tree, component_names, requirement_names);
    std::map<std::string, std::size_t> css;
    for (const auto& n : synthesis.nodes) css.emplace(n.path, n.css());
    out["tree.dot"] = tree_dot(tree, component_names, css);
    out["css.csv"] = css_csv(synthesis, component_names);
    out["summary.json"] = summary_json(*this);
    return out;
}

void write_artifacts(const PipelineRun& run, const std::string& out_dir, bool write_ppm) {
    namespace fs = std::filesystem;
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    auto files = run.artifacts();
    if (write_ppm) files["dsm.ppm"] = dsm_ppm(run.dsm);
    for (const auto& [name, contents] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
        out << contents;
    }
}

std::string render_css_profile(const std::vector<std::pair<std::string, TreeSynthesisResult>>& results) {
    std::vector<std::vector<std::size_t>> columns;
    std::size_t rows = 0;
    std::ostringstream os;
    os << "rank";
    for (const auto& [label, result] : results) {
        os << ',' << label;
        std::vector<std::size_t> col;
        for (const auto& n : result.nodes) col.push_back(n.css());
        std::sort(col.begin(), col.end(), std::greater<>());
        rows = std::max(rows, col.size());
        columns.push_back(std::move(col));
    }
    os << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        os << i + 1;
        for (const auto& col : columns) os << ',' << (i < col.size() ? col[i] : 0);
        os << '\n';
    }
    return os.str();
}

} // namespace mldes
