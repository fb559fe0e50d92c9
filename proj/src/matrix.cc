#include "mldes/matrix.hh"

#include <algorithm>
#include <sstream>

namespace mldes {

IndexSet Dmm::referenced(std::size_t requirement) const {
    IndexSet out;
    for (std::size_t i = 0; i < components(); ++i)
        if (references(i, requirement)) out.insert(i);
    return out;
}

Dsm Dsm::induced(const std::vector<std::size_t>& indices) const {
    const auto n = static_cast<Eigen::Index>(indices.size());
    Dsm sub{IntMatrix::Zero(n, n)};
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) sub.values(a, b) = (*this)(indices[a], indices[b]);
    return sub;
}

Dmm build_dmm(const ProductSystem& ps, const ModelSet& model) {
    const auto rows = static_cast<Eigen::Index>(ps.size());
    const auto cols = static_cast<Eigen::Index>(model.requirements.size());
    Dmm pr{IntMatrix::Zero(rows, cols)};
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& req = model.requirements[j];
        for (EventId e : req.events())
            for (Eigen::Index i = 0; i < rows; ++i)
                if (std::binary_search(ps.alphabets[i].begin(), ps.alphabets[i].end(), e)) pr.values(i, j) = 1;
        for (std::size_t plant : req.location_plants())
            pr.values(static_cast<Eigen::Index>(ps.group_of(plant)), j) = 1;
    }
    return pr;
}

Dsm dsm_from_dmm(const Dmm& pr) { return Dsm{pr.values * pr.values.transpose()}; }

std::string dmm_csv(const Dmm& pr, const std::vector<std::string>& components,
                    const std::vector<std::string>& requirements) {
    std::ostringstream os;
    os << "component";
    for (const auto& r : requirements) os << ',' << r;
    os << '\n';
    for (std::size_t i = 0; i < pr.components(); ++i) {
        os << components.at(i);
        for (std::size_t j = 0; j < pr.requirements(); ++j) os << ',' << (pr.references(i, j) ? 1 : 0);
        os << '\n';
    }
    return os.str();
}

std::string dsm_csv(const Dsm& p, const std::vector<std::string>& components) {
    std::ostringstream os;
    os << "component";
    for (const auto& c : components) os << ',' << c;
    os << '\n';
    for (std::size_t a = 0; a < p.size(); ++a) {
        os << components.at(a);
        for (std::size_t b = 0; b < p.size(); ++b) os << ',' << p(a, b);
        os << '\n';
    }
    return os.str();
}

std::string dsm_ppm(const Dsm& p, int cell_pixels) {
    const std::size_t n = p.size();
    int peak = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b) peak = std::max(peak, p(a, b));
    const std::size_t side = n * static_cast<std::size_t>(cell_pixels);
    std::ostringstream os;
    os << "P3\n" << side << ' ' << side << "\n255\n";
    for (std::size_t y = 0; y < side; ++y) {
        const std::size_t a = y / cell_pixels;
        for (std::size_t x = 0; x < side; ++x) {
            const std::size_t b = x / cell_pixels;
            int r = 255, g = 255, bl = 255;
            if (a == b) {
                r = g = bl = 160;
            } else if (p(a, b) > 0 && peak > 0) {
                // Linear ramp from light to dark blue.
                const double t = static_cast<double>(p(a, b)) / peak;
                r = static_cast<int>(220 - 200 * t);
                g = static_cast<int>(230 - 170 * t);
                bl = 255 - static_cast<int>(75 * t);
            }
            os << r << ' ' << g << ' ' << bl << (x + 1 == side ? '\n' : ' ');
        }
    }
    return os.str();
}

} // namespace mldes
