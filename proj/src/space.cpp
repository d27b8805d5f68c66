#include "kcsim/space.hpp"

#include <sstream>

#include "kcsim/errors.hpp"

namespace kcsim {

void SpatialGrid::validate() const {
    if (!(length > 0.0)) throw ValidationError("space length must be > 0");
    if (n_cells < 3) throw ValidationError("space needs n_cells >= 3");
}

MacroState MacroState::constant(std::size_t n_cells, double c, double s, double u) {
    return {std::vector<double>(n_cells, c), std::vector<double>(n_cells, s),
            std::vector<double>(n_cells, u), 0.0};
}

void MacroState::enforce_nonnegative(double tol) {
    const char* names[] = {"c", "s", "u"};
    std::vector<double>* fields[] = {&c, &s, &u};
    for (int i = 0; i < 3; ++i) {
        auto& field = *fields[i];
        for (std::size_t k = 0; k < field.size(); ++k) {
            if (field[k] < -tol) {
                std::ostringstream os;
                os << names[i] << " = " << field[k] << " in cell " << k << " at t = " << time;
                throw NegativityError(os.str());
            }
            if (field[k] < 0.0) field[k] = 0.0;
        }
    }
}

double total_mass(const std::vector<double>& values, const SpatialGrid& grid) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * grid.dx();
}

std::vector<double> restrict_average(const std::vector<double>& fine, std::size_t factor) {
    if (factor == 0 || fine.size() % factor != 0) throw ValidationError("restriction factor must divide the fine grid");
    std::vector<double> coarse(fine.size() / factor, 0.0);
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < factor; ++i) sum += fine[k * factor + i];
        coarse[k] = sum / static_cast<double>(factor);
    }
    return coarse;
}

MacroState restrict_average(const MacroState& fine, std::size_t factor) {
    return {restrict_average(fine.c, factor), restrict_average(fine.s, factor),
            restrict_average(fine.u, factor), fine.time};
}

}  // namespace kcsim
