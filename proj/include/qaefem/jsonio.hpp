#ifndef QAEFEM_JSONIO_HPP
#define QAEFEM_JSONIO_HPP

#include <json.hpp>

#include "qaefem/densela.hpp"

namespace qaefem {

inline void to_json(nlohmann::json& j, const Matrix& m) {
    j = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        j.push_back(std::move(row));
    }
}

inline void from_json(const nlohmann::json& j, Matrix& m) {
    std::size_t rows = j.size();
    std::size_t cols = rows ? j.at(0).size() : 0;
    m = Matrix(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (row.size() != cols) throw DimensionMismatch("ragged JSON matrix");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
    }
}

}  // namespace qaefem

#endif
