#include "kcsim/profile.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kcsim/errors.hpp"

namespace kcsim {

MacroState InitialProfile::sample(const SpatialGrid& grid) const {
    const std::size_t n = grid.n_cells;
    MacroState state = MacroState::constant(n, base.u, base.v, base.w);
    switch (kind) {
    case Kind::Constant:
        break;
    case Kind::Cosine:
        for (std::size_t k = 0; k < n; ++k) {
            const double phase = 2.0 * std::numbers::pi * mode * grid.center(k) / grid.length;
            const double factor = 1.0 + amplitude * std::cos(phase);
            state.c[k] = base.u * factor;
            state.s[k] = base.v * factor;
            state.u[k] = base.w * factor;
        }
        break;
    case Kind::Cells: {
        if (cells.empty() || n % cells.size() != 0)
            throw ValidationError("per-cell profile size must divide the grid cell count");
        const std::size_t factor = n / cells.size();
        for (std::size_t k = 0; k < n; ++k) {
            const SirState& cell = cells[k / factor];
            state.c[k] = cell.u;
            state.s[k] = cell.v;
            state.u[k] = cell.w;
        }
        break;
    }
    }
    return state;
}

bool InitialProfile::is_homogeneous() const {
    switch (kind) {
    case Kind::Constant:
        return true;
    case Kind::Cosine:
        return amplitude == 0.0;
    case Kind::Cells:
        for (const SirState& c : cells)
            if (!(c == cells.front())) return false;
        return true;
    }
    return false;
}

std::string InitialProfile::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case Kind::Constant:
        os << "constant(c=" << base.u << ", s=" << base.v << ", u=" << base.w << ")";
        break;
    case Kind::Cosine:
        os << "cosine(c=" << base.u << ", s=" << base.v << ", u=" << base.w << ", amplitude=" << amplitude
           << ", mode=" << mode << ")";
        break;
    case Kind::Cells:
        os << "cells(n=" << cells.size() << ")";
        break;
    }
    return os.str();
}

}  // namespace kcsim
