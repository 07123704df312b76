#pragma once

#include "homobst/fields.hpp"
#include "homobst/grid.hpp"
#include "homobst/table.hpp"

#include <variant>
#include <vector>

namespace homobst {

/// Either an oscillating operator a(x / eps, xi) or a sampled homogenized operator a0(xi).
using FluxModel = std::variant<FluxOperator, HomogenizedOperatorTable>;

/// A flux model frozen on the elements of one mesh: the x-dependent coefficients are
/// evaluated once at every element point.
class DiscreteFlux {
public:
    DiscreteFlux(const FluxModel &model, const Mesh &mesh);

    Vec flux(std::size_t e, const Vec &xi) const {
        return table_ ? table_->eval(xi) : local_[e].flux(xi);
    }
    Mat2 jacobian(std::size_t e, const Vec &xi) const {
        return table_ ? table_->jacobian(xi) : local_[e].jacobian(xi);
    }
    double potential(std::size_t e, const Vec &xi) const {
        return table_ ? table_->potential(xi) : local_[e].potential(xi);
    }
    bool is_table() const { return table_ != nullptr; }

private:
    const HomogenizedOperatorTable *table_ = nullptr;
    std::vector<LocalFlux> local_;
};

/// Evaluate a flux model at a physical point (cell centers, diagnostics).
Vec eval_model(const FluxModel &model, const Vec &x, const Vec &xi);

/// Lower exponent bound of the model (alpha).
double model_alpha(const FluxModel &model);

}  // namespace homobst
