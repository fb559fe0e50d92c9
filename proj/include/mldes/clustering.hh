#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mldes/matrix.hh"

namespace mldes {

/// Markov clustering and bus detection parameters.
struct ClusterParams {
    int alpha = 2;                 // expansion: number of path lengths summed
    double beta = 1.7;             // inflation exponent
    double mu = 1.0;               // evaporation: weight of each extra step
    std::optional<double> gamma = 2.0;  // bus threshold; absent = no bus detection
    bool local_bus = false;        // run bus detection below the top level
    std::optional<std::size_t> max_depth;

    /// Throws std::invalid_argument when a parameter is out of range.
    void validate() const;
};

/// Raised when the Markov iteration does not settle within the cap.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(std::size_t iterations);
    std::size_t iterations() const { return iterations_; }

private:
    std::size_t iterations_;
};

/// Malformed or inconsistent multilevel clustering.
class ClusteringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Multilevel clustering with local buses: component set A, bus children B,
/// non-bus children M and requirement set R. A leaf has a single component
/// and no children; `is_bus` records on which side of its parent a cluster
/// sits. Children are kept sorted by smallest component.
struct Cluster {
    IndexSet components;
    std::vector<Cluster> bus;
    std::vector<Cluster> non_bus;
    IndexSet requirements;
    bool is_bus = false;
    bool forced_split = false;  // the partition made no progress and was split by hand

    bool is_leaf() const { return bus.empty() && non_bus.empty(); }
    std::size_t min_component() const { return *components.begin(); }
    /// 1 for a leaf.
    std::size_t height() const;
    std::size_t count_forced_splits() const;

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Checks the structural invariants (children disjoint and covering A,
/// leaves singletons). Throws ClusteringError.
void validate_clustering(const Cluster& c);

/// Sorts children by smallest component, recursively.
void normalize_children(Cluster& c);

/// Row sums of F = sum_{k=1..alpha} (mu*T)^k with T the column-normalized
/// off-diagonal DSM.
std::vector<double> flow_scores(const Dsm& dsm, int alpha, double mu);

struct BusSplit {
    std::vector<std::size_t> bus;
    std::vector<std::size_t> non_bus;
};

/// A component is a bus when its flow score exceeds gamma times the median
/// of the nonzero scores. Systems of at most two components, and edgeless
/// ones, have no bus.
BusSplit detect_bus(const Dsm& dsm, double gamma, int alpha = 2, double mu = 1.0);

/// Markov clustering with expansion sum_{k=1..alpha} (mu*M)^k and
/// elementwise inflation by beta, iterated to a fixpoint. Cells are ordered
/// by smallest member; indices are local to `dsm`.
std::vector<std::vector<std::size_t>> markov_partition(const Dsm& dsm, const ClusterParams& params);

/// Recursive clustering with bus detection; the root carries requirements
/// 0..requirement_count-1.
Cluster cluster(const Dsm& dsm, const ClusterParams& params, std::size_t requirement_count);

/// Reads the bracket format, e.g. `{bus:[A1], [TaH, {bus:[Ro], [TaV, {[Pr, A2]}]}]}`
/// or its JSON mirror. `aliases` maps extra names (e.g. member plant names)
/// to component indices.
Cluster load_clustering(std::string_view text, const std::vector<std::string>& component_names,
                        std::size_t requirement_count,
                        const std::vector<std::pair<std::string, std::size_t>>& aliases = {});

std::string format_clustering(const Cluster& c, const std::vector<std::string>& component_names);
std::string clustering_json(const Cluster& c, const std::vector<std::string>& component_names);

} // namespace mldes
