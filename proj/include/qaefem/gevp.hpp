#ifndef QAEFEM_GEVP_HPP
#define QAEFEM_GEVP_HPP

#include <vector>

#include "qaefem/densela.hpp"

namespace qaefem {

/// Previously found eigenpair excluded from later searches.
struct DeflatedMode {
    Vector phi;     // M-normalized
    double lambda;
};

/// Generalized eigenvalue problem H phi = lambda M phi with an optional
/// deflation set.  M must be SPD; H symmetric.
struct Gevp {
    Matrix h;
    Matrix m;
    std::vector<DeflatedMode> deflation;
};

}  // namespace qaefem

#endif
