#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mldes/model.hh"
#include "mldes/product.hh"

namespace mldes {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Binary component x requirement reference matrix.
struct Dmm {
    IntMatrix values;

    std::size_t components() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t requirements() const { return static_cast<std::size_t>(values.cols()); }
    bool references(std::size_t component, std::size_t requirement) const {
        return values(static_cast<Eigen::Index>(component), static_cast<Eigen::Index>(requirement)) != 0;
    }
    /// Components referenced by `requirement`.
    IndexSet referenced(std::size_t requirement) const;
};

/// Symmetric component x component dependency matrix. The diagonal counts
/// the requirements referencing a component; clustering ignores it.
struct Dsm {
    IntMatrix values;

    std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
    int operator()(std::size_t a, std::size_t b) const {
        return values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    /// Principal submatrix on `indices` (in the given order).
    Dsm induced(const std::vector<std::size_t>& indices) const;
};

/// Component i is referenced by requirement j when their alphabets meet
/// (automaton form), or when the guarded event belongs to i or the
/// predicate reads a location of a plant in i (invariant form).
Dmm build_dmm(const ProductSystem& ps, const ModelSet& model);

/// P = PR * PR^T.
Dsm dsm_from_dmm(const Dmm& pr);

std::string dmm_csv(const Dmm& pr, const std::vector<std::string>& components,
                    const std::vector<std::string>& requirements);
std::string dsm_csv(const Dsm& p, const std::vector<std::string>& components);

/// Plain (P3) PPM heat grid of the DSM: white for 0, dark for the largest
/// off-diagonal entry, grey diagonal.
std::string dsm_ppm(const Dsm& p, int cell_pixels = 12);

} // namespace mldes
