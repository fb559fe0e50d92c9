#include "mldes/clustering.hh"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace mldes {

namespace {

constexpr std::size_t kMaxIterations = 200;
constexpr double kConvergence = 1e-9;
constexpr double kMassEpsilon = 1e-6;

using Matrix = Eigen::MatrixXd;

void normalize_columns(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double s = m.col(j).sum();
        if (s > 0) m.col(j) /= s;
    }
}

Matrix off_diagonal(const Dsm& dsm) {
    Matrix m = dsm.values.cast<double>();
    m.diagonal().setZero();
    return m;
}

Matrix expand(const Matrix& m, int alpha, double mu) {
    Matrix step = mu * m;
    Matrix power = step;
    Matrix sum = step;
    for (int k = 2; k <= alpha; ++k) {
        power = power * step;
        sum += power;
    }
    return sum;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

Cluster make_leaf(std::size_t component, bool is_bus) {
    Cluster leaf;
    leaf.components.insert(component);
    leaf.is_bus = is_bus;
    return leaf;
}

} // namespace

void ClusterParams::validate() const {
    if (alpha < 1) throw std::invalid_argument("alpha must be >= 1");
    if (!(beta > 1.0)) throw std::invalid_argument("beta must be > 1");
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in (0, 1]");
    if (gamma && !(*gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
}

ConvergenceError::ConvergenceError(std::size_t iterations)
    : std::runtime_error("Markov clustering did not converge after " + std::to_string(iterations) + " iterations"),
      iterations_(iterations) {}

std::size_t Cluster::height() const {
    std::size_t h = 0;
    for (const auto& c : bus) h = std::max(h, c.height());
    for (const auto& c : non_bus) h = std::max(h, c.height());
    return h + 1;
}

std::size_t Cluster::count_forced_splits() const {
    std::size_t n = forced_split ? 1 : 0;
    for (const auto& c : bus) n += c.count_forced_splits();
    for (const auto& c : non_bus) n += c.count_forced_splits();
    return n;
}

void validate_clustering(const Cluster& c) {
    if (c.components.empty()) throw ClusteringError("cluster with no components");
    if (c.is_leaf()) {
        if (c.components.size() != 1)
            throw ClusteringError("cluster with " + std::to_string(c.components.size()) +
                                  " components has no children");
        return;
    }
    IndexSet covered;
    auto visit = [&](const Cluster& child) {
        validate_clustering(child);
        if (child.components.size() >= c.components.size())
            throw ClusteringError("child cluster is not smaller than its parent");
        for (std::size_t x : child.components)
            if (!covered.insert(x).second)
                throw ClusteringError("component " + std::to_string(x) + " appears in two sibling clusters");
    };
    for (const auto& child : c.bus) visit(child);
    for (const auto& child : c.non_bus) visit(child);
    if (covered != c.components) throw ClusteringError("children do not cover their parent's components");
}

void normalize_children(Cluster& c) {
    auto by_min = [](const Cluster& a, const Cluster& b) { return a.min_component() < b.min_component(); };
    for (auto& child : c.bus) normalize_children(child);
    for (auto& child : c.non_bus) normalize_children(child);
    std::sort(c.bus.begin(), c.bus.end(), by_min);
    std::sort(c.non_bus.begin(), c.non_bus.end(), by_min);
}

std::vector<double> flow_scores(const Dsm& dsm, int alpha, double mu) {
    Matrix t = off_diagonal(dsm);
    normalize_columns(t);
    const Matrix flow = expand(t, alpha, mu);
    std::vector<double> scores(dsm.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = flow.row(static_cast<Eigen::Index>(i)).sum();
    return scores;
}

BusSplit detect_bus(const Dsm& dsm, double gamma, int alpha, double mu) {
    BusSplit split;
    const std::size_t n = dsm.size();
    if (n <= 2) {
        split.non_bus.resize(n);
        std::iota(split.non_bus.begin(), split.non_bus.end(), 0);
        return split;
    }
    const auto scores = flow_scores(dsm, alpha, mu);
    std::vector<double> nonzero;
    for (double s : scores)
        if (s > 0) nonzero.push_back(s);
    double threshold = 0;
    if (!nonzero.empty()) {
        std::sort(nonzero.begin(), nonzero.end());
        const std::size_t m = nonzero.size();
        const double median = m % 2 ? nonzero[m / 2] : 0.5 * (nonzero[m / 2 - 1] + nonzero[m / 2]);
        threshold = gamma * median;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!nonzero.empty() && scores[i] > threshold) split.bus.push_back(i);
        else split.non_bus.push_back(i);
    }
    return split;
}

std::vector<std::vector<std::size_t>> markov_partition(const Dsm& dsm, const ClusterParams& params) {
    const auto n = static_cast<Eigen::Index>(dsm.size());
    if (n == 0) return {};
    if (n == 1) return {{0}};

    Matrix m = off_diagonal(dsm);
    // Self loops as heavy as the strongest link keep the walk aperiodic.
    for (Eigen::Index j = 0; j < n; ++j) {
        const double peak = m.col(j).maxCoeff();
        m(j, j) = peak > 0 ? peak : 1.0;
    }
    normalize_columns(m);

    bool converged = false;
    for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
        Matrix next = expand(m, params.alpha, params.mu).array().pow(params.beta).matrix();
        normalize_columns(next);
        const double delta = (next - m).cwiseAbs().maxCoeff();
        m = std::move(next);
        if (delta < kConvergence) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ConvergenceError(kMaxIterations);

    // Each node joins the lowest-index attractor it flows to; attractors
    // that flow to other attractors are merged with them.
    std::vector<std::size_t> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (m(i, i) > kMassEpsilon && m(i, j) > kMassEpsilon) {
                std::size_t a = find_root(parent, static_cast<std::size_t>(i));
                std::size_t b = find_root(parent, static_cast<std::size_t>(j));
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
                break;
            }
        }
    }
    std::vector<std::vector<std::size_t>> cells;
    std::vector<std::size_t> cell_of_root(static_cast<std::size_t>(n), SIZE_MAX);
    for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
        std::size_t r = find_root(parent, j);
        if (cell_of_root[r] == SIZE_MAX) {
            cell_of_root[r] = cells.size();
            cells.emplace_back();
        }
        cells[cell_of_root[r]].push_back(j);
    }
    return cells;
}

namespace {

Cluster build_cluster(const Dsm& full, const std::vector<std::size_t>& members, std::size_t depth,
                      const ClusterParams& params, bool is_bus) {
    if (members.size() == 1) return make_leaf(members.front(), is_bus);

    Cluster node;
    node.components.insert(members.begin(), members.end());
    node.is_bus = is_bus;

    if (params.max_depth && depth >= *params.max_depth) {
        for (std::size_t x : members) node.non_bus.push_back(make_leaf(x, false));
        return node;
    }

    const Dsm sub = full.induced(members);
    BusSplit split;
    if (params.gamma && (depth == 0 || params.local_bus)) {
        split = detect_bus(sub, *params.gamma, params.alpha, params.mu);
    } else {
        split.non_bus.resize(members.size());
        std::iota(split.non_bus.begin(), split.non_bus.end(), 0);
    }

    auto partition_side = [&](const std::vector<std::size_t>& side) {
        std::vector<std::vector<std::size_t>> cells;
        if (side.empty()) return cells;
        for (const auto& cell : markov_partition(sub.induced(side), params)) {
            std::vector<std::size_t> global;
            for (std::size_t k : cell) global.push_back(members[side[k]]);
            cells.push_back(std::move(global));
        }
        return cells;
    };
    auto bus_cells = partition_side(split.bus);
    auto non_bus_cells = partition_side(split.non_bus);

    if (bus_cells.empty() && non_bus_cells.size() == 1) {
        // No progress: peel off the lowest component.
        node.forced_split = true;
        non_bus_cells = {{members.front()}, {members.begin() + 1, members.end()}};
    }

    for (const auto& cell : bus_cells) node.bus.push_back(build_cluster(full, cell, depth + 1, params, true));
    for (const auto& cell : non_bus_cells)
        node.non_bus.push_back(build_cluster(full, cell, depth + 1, params, false));
    normalize_children(node);
    return node;
}

} // namespace

Cluster cluster(const Dsm& dsm, const ClusterParams& params, std::size_t requirement_count) {
    params.validate();
    if (dsm.size() == 0) throw std::invalid_argument("cluster: empty DSM");
    std::vector<std::size_t> all(dsm.size());
    std::iota(all.begin(), all.end(), 0);
    Cluster root = build_cluster(dsm, all, 0, params, false);
    for (std::size_t j = 0; j < requirement_count; ++j) root.requirements.insert(j);
    return root;
}

} // namespace mldes
