#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mldes/clustering.hh"
#include "mldes/matrix.hh"

namespace mldes {

/// One synthesis subproblem: the components and requirements handed to a
/// monolithic synthesis run. Nodes without requirements mirror the
/// clustering shape but are not synthesized.
struct SynthesisNode {
    IndexSet plants;
    IndexSet requirements;
    std::vector<SynthesisNode> children;  // bus-origin children first
    IndexSet cluster_components;          // A of the cluster this node came from
    bool from_bus = false;
    std::string path;                     // "0", "0.1", "0.1.0", ...

    bool needs_synthesis() const { return !requirements.empty(); }
};

struct SynthesisTree {
    SynthesisNode root;
    std::size_t component_count = 0;
    std::size_t requirement_count = 0;
    std::size_t recursion_depth = 0;  // deepest transform call, root = 1

    /// Nodes in preorder (parent before children, bus children first).
    std::vector<const SynthesisNode*> preorder() const;
};

/// Indices (into `children`) of the clusters holding a component that
/// requirement `r` references.
std::vector<std::size_t> compute_related_clusters(std::span<const Cluster> children, const Dmm& pr, std::size_t r);

/// Pushes each requirement of `cluster` to its only related non-bus child,
/// else to its only related child when that child is a bus, else keeps it.
/// Returns the components referenced by the kept requirements. `on_step`
/// runs after every requirement decision.
IndexSet prop_req(Cluster& cluster, const Dmm& pr, const std::function<void()>& on_step = {});

/// Called after every requirement decision with the clustering being
/// transformed (used to check that requirement sets stay a partition).
using TransformObserver = std::function<void(const Cluster& root)>;

/// Preorder traversal turning a multilevel clustering whose root owns all
/// requirements into a tree of synthesis subproblems. Throws
/// ClusteringError on an invalid clustering.
SynthesisTree transform_c_to_t(Cluster clustering, const Dmm& pr, const TransformObserver& observer = {});

std::string tree_json(const SynthesisTree& tree, const std::vector<std::string>& component_names,
                      const std::vector<std::string>& requirement_names);

/// Reads the document written by tree_json back, resolving names against
/// the given catalogs. Throws ClusteringError on unknown names.
SynthesisTree tree_from_json(std::string_view text, const std::vector<std::string>& component_names,
                             const std::vector<std::string>& requirement_names);

/// Graphviz rendering; bus-origin nodes are filled, nodes without
/// requirements are dashed. `css` optionally annotates nodes by path.
std::string tree_dot(const SynthesisTree& tree, const std::vector<std::string>& component_names,
                     const std::map<std::string, std::size_t>& css = {});

} // namespace mldes
