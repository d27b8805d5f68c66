#include "kcsim/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kcsim/errors.hpp"

namespace kcsim {

namespace {

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1], ascending
    std::vector<double> weights;
};

// Newton iteration on the Legendre polynomial P_n.
GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const auto nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t m = 2; m <= n; ++m) {
                const auto md = static_cast<double>(m);
                const double p2 = ((2.0 * md - 1.0) * x * p1 - (md - 1.0) * p0) / md;
                p0 = p1;
                p1 = p2;
            }
            dp = nd * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

void check_sizes(std::span<const double> g, const VelocityGrid& grid) {
    if (g.size() != grid.size()) throw ValidationError("per-node array size does not match velocity grid");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double VelocityGrid::measure() const {
    return std::pow(2.0 * vmax, dim);
}

Tensor Tensor::zero(int dim) {
    return Tensor{dim, std::vector<double>(static_cast<std::size_t>(dim * dim), 0.0)};
}

bool Tensor::is_symmetric(double tol) const {
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
}

bool Tensor::is_positive_definite() const {
    // Cholesky without storing the factor beyond a scratch copy.
    std::vector<double> a = entries;
    const auto n = static_cast<std::size_t>(dim);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
    }
    return true;
}

double Tensor::max_abs_diff(const Tensor& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) m = std::max(m, std::abs(entries[i] - other.entries[i]));
    return m;
}

void ChemotaxisKernel::evaluate(std::span<const double> v, std::span<const double> /*vstar*/,
                                std::span<double> out) const {
    for (std::size_t a = 0; a < v.size(); ++a) out[a] = chi0 * v[a];
}

VelocityGrid build_uniform_grid(double vmax, std::size_t n_nodes) {
    if (n_nodes < 4 || n_nodes % 2 != 0) {
        std::ostringstream os;
        os << "velocity grid needs an even node count >= 4, got " << n_nodes;
        throw OddNodeCountError(os.str());
    }
    if (!(vmax > 0.0)) throw ValidationError("vmax must be > 0");

    const std::size_t per_panel = (n_nodes % 4 == 0) ? 4 : n_nodes / 2;
    const std::size_t panels = n_nodes / per_panel;
    const GaussRule rule = gauss_legendre(per_panel);
    const double width = 2.0 * vmax / static_cast<double>(panels);

    VelocityGrid grid;
    grid.dim = 1;
    grid.vmax = vmax;
    grid.nodes.reserve(n_nodes);
    grid.weights.reserve(n_nodes);
    for (std::size_t p = 0; p < panels; ++p) {
        // Panel centers are placed symmetrically about zero.
        const double center = -vmax + (static_cast<double>(p) + 0.5) * width;
        for (std::size_t i = 0; i < per_panel; ++i) {
            grid.nodes.push_back(center + 0.5 * width * rule.nodes[i]);
            grid.weights.push_back(0.5 * width * rule.weights[i]);
        }
    }
    // Enforce exact mirror symmetry of nodes and weights.
    for (std::size_t j = 0; j < n_nodes / 2; ++j) {
        const std::size_t m = n_nodes - 1 - j;
        const double v = 0.5 * (grid.nodes[m] - grid.nodes[j]);
        const double w = 0.5 * (grid.weights[m] + grid.weights[j]);
        grid.nodes[j] = -v;
        grid.nodes[m] = v;
        grid.weights[j] = w;
        grid.weights[m] = w;
    }
    return grid;
}

EquilibriumDistribution uniform_maxwellian(const VelocityGrid& grid, int species) {
    return {species, std::vector<double>(grid.size(), 1.0 / grid.measure())};
}

Equilibria uniform_equilibria(const VelocityGrid& grid) {
    return {uniform_maxwellian(grid, 1), uniform_maxwellian(grid, 2), uniform_maxwellian(grid, 3)};
}

void check_equilibrium(const EquilibriumDistribution& m, const VelocityGrid& grid, double tol) {
    check_sizes(m.values, grid);
    std::ostringstream os;
    if (std::any_of(m.values.begin(), m.values.end(), [](double x) { return !(x > 0.0); })) {
        os << "M" << m.species << " is not strictly positive";
        throw ConsistencyError(os.str());
    }
    const double mass = velocity_average(m.values, grid);
    if (std::abs(mass - 1.0) > tol) {
        os << "M" << m.species << " normalization " << mass << " != 1";
        throw ConsistencyError(os.str());
    }
    for (int a = 0; a < grid.dim; ++a) {
        double flux = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) flux += grid.weights[j] * grid.node(j)[static_cast<std::size_t>(a)] * m.values[j];
        if (std::abs(flux) > tol) {
            os << "M" << m.species << " carries nonzero flux " << flux;
            throw ConsistencyError(os.str());
        }
    }
}

double velocity_average(std::span<const double> g, const VelocityGrid& grid) {
    check_sizes(g, grid);
    if (grid.dim != 1) return dot(g, grid.weights);
    // Mirrored pairs first, so odd integrands cancel exactly on the symmetric grid.
    const std::size_t n = g.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n / 2; ++j) sum += grid.weights[j] * g[j] + grid.weights[n - 1 - j] * g[n - 1 - j];
    return sum;
}

std::vector<double> relaxation_operator_apply(std::span<const double> g,
                                              const EquilibriumDistribution& m, double sigma,
                                              const VelocityGrid& grid) {
    const double mean = velocity_average(g, grid);
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = -sigma * (g[j] - m.values[j] * mean);
    return out;
}

TurningKernel relaxation_kernel(const EquilibriumDistribution& m, double sigma) {
    return [values = m.values, sigma](std::size_t j, std::size_t) { return sigma * values[j]; };
}

std::vector<double> turning_operator_apply(const TurningKernel& kernel, std::span<const double> g,
                                           const VelocityGrid& grid) {
    check_sizes(g, grid);
    const std::size_t n = grid.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double gain = 0.0;
        double loss_rate = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            gain += grid.weights[s] * kernel(j, s) * g[s];
            loss_rate += grid.weights[s] * kernel(s, j);
        }
        out[j] = gain - loss_rate * g[j];
    }
    return out;
}

std::vector<double> relaxation_operator_matrix(const EquilibriumDistribution& m, double sigma,
                                               const VelocityGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = sigma * m.values[i] * grid.weights[j];
        a[i * n + i] -= sigma;
    }
    return a;
}

std::vector<double> solve_theta(const EquilibriumDistribution& m, double sigma,
                                const VelocityGrid& grid) {
    check_sizes(m.values, grid);
    const std::size_t n = grid.size();
    const auto dim = static_cast<std::size_t>(grid.dim);
    std::vector<double> theta(n * dim);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < dim; ++a) theta[j * dim + a] = -grid.node(j)[a] * m.values[j] / sigma;

    // Verify L(theta_a) = v_a M and <theta_a> = 0 componentwise.
    std::vector<double> component(n);
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t j = 0; j < n; ++j) component[j] = theta[j * dim + a];
        const auto image = relaxation_operator_apply(component, m, sigma, grid);
        double residual = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            residual = std::max(residual, std::abs(image[j] - grid.node(j)[a] * m.values[j]));
        const double mean = std::abs(velocity_average(component, grid));
        if (residual > 1e-12 || mean > 1e-12) {
            std::ostringstream os;
            os << "theta" << m.species << " check failed: residual " << residual << ", mean " << mean;
            throw ResidualError(os.str());
        }
    }
    return theta;
}

Tensor diffusion_tensor(const EquilibriumDistribution& m, double sigma, const VelocityGrid& grid) {
    Tensor d = Tensor::zero(grid.dim);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto v = grid.node(j);
        const double wm = grid.weights[j] * m.values[j];
        for (int a = 0; a < grid.dim; ++a)
            for (int b = 0; b < grid.dim; ++b) d(a, b) += wm * v[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(b)];
    }
    for (double& e : d.entries) e /= sigma;
    return d;
}

Tensor diffusion_tensor_from_theta(std::span<const double> theta, const VelocityGrid& grid) {
    const auto dim = static_cast<std::size_t>(grid.dim);
    if (theta.size() != grid.size() * dim) throw ValidationError("theta size does not match velocity grid");
    Tensor d = Tensor::zero(grid.dim);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto v = grid.node(j);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                d(static_cast<int>(a), static_cast<int>(b)) -= grid.weights[j] * v[a] * theta[j * dim + b];
    }
    return d;
}

std::vector<double> perturbation_operator_apply(std::span<const double> f1,
                                                std::span<const double> grad_s,
                                                const ChemotaxisKernel& kernel,
                                                const VelocityGrid& grid) {
    check_sizes(f1, grid);
    const std::size_t n = grid.size();
    const auto dim = static_cast<std::size_t>(grid.dim);
    if (grad_s.size() != dim) throw ValidationError("gradient dimension does not match velocity grid");
    std::vector<double> out(n, 0.0);
    std::vector<double> k(dim);
    for (std::size_t j = 0; j < n; ++j) {
        double gain = 0.0;
        double loss_rate = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            kernel.evaluate(grid.node(j), grid.node(s), k);
            gain += grid.weights[s] * dot(k, grad_s) * f1[s];
            kernel.evaluate(grid.node(s), grid.node(j), k);
            loss_rate += grid.weights[s] * dot(k, grad_s);
        }
        out[j] = gain - loss_rate * f1[j];
    }
    return out;
}

std::vector<double> psi(const VelocityGrid& grid, const EquilibriumDistribution& m2,
                        const ChemotaxisKernel& kernel) {
    check_sizes(m2.values, grid);
    const std::size_t n = grid.size();
    const auto dim = static_cast<std::size_t>(grid.dim);
    std::vector<double> out(n * dim, 0.0);
    std::vector<double> k(dim);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t s = 0; s < n; ++s) {
            kernel.evaluate(grid.node(j), grid.node(s), k);
            for (std::size_t a = 0; a < dim; ++a) out[j * dim + a] += grid.weights[s] * k[a] * m2.values[s];
            kernel.evaluate(grid.node(s), grid.node(j), k);
            for (std::size_t a = 0; a < dim; ++a) out[j * dim + a] -= grid.weights[s] * k[a] * m2.values[j];
        }
    }
    return out;
}

Tensor chemotactic_sensitivity(const VelocityGrid& grid, std::span<const double> psi_values,
                               double sigma1) {
    const auto dim = static_cast<std::size_t>(grid.dim);
    if (psi_values.size() != grid.size() * dim) throw ValidationError("psi size does not match velocity grid");
    Tensor chi = Tensor::zero(grid.dim);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto v = grid.node(j);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                chi(static_cast<int>(a), static_cast<int>(b)) += grid.weights[j] * v[a] * psi_values[j * dim + b];
    }
    for (double& e : chi.entries) e /= sigma1;
    return chi;
}

Tensor chemotactic_sensitivity(const VelocityGrid& grid, const Equilibria& eq,
                               const ModelParams& params) {
    return chemotactic_sensitivity(grid, psi(grid, eq.m2, ChemotaxisKernel{params.chi0}), params.sigma1);
}

std::vector<double> alpha_direct(std::span<const double> grad_s, double /*u_value*/,
                                 const VelocityGrid& grid, const Equilibria& eq,
                                 const ModelParams& params) {
    // The chi0 v kernel does not depend on f3, so u only enters the signature.
    const auto dim = static_cast<std::size_t>(grid.dim);
    const ChemotaxisKernel kernel{params.chi0};
    const auto turned = perturbation_operator_apply(eq.m1.values, grad_s, kernel, grid);
    std::vector<double> alpha(dim, 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t a = 0; a < dim; ++a) alpha[a] += grid.weights[j] * grid.node(j)[a] * turned[j];
    for (double& x : alpha) x /= params.sigma1;

    const Tensor chi = chemotactic_sensitivity(grid, eq, params);
    for (std::size_t a = 0; a < dim; ++a) {
        double expected = 0.0;
        for (std::size_t b = 0; b < dim; ++b) expected += chi(static_cast<int>(a), static_cast<int>(b)) * grad_s[b];
        if (std::abs(alpha[a] - expected) > 1e-12) {
            std::ostringstream os;
            os << "alpha component " << a << " = " << alpha[a] << " differs from chi.grad_s = " << expected;
            throw ConsistencyError(os.str());
        }
    }
    return alpha;
}

InteractionTerms interaction_terms(std::span<const double> f1, std::span<const double> f2,
                                   std::span<const double> f3, const Equilibria& eq,
                                   const ModelParams& params, const VelocityGrid& grid) {
    check_sizes(f1, grid);
    check_sizes(f2, grid);
    check_sizes(f3, grid);
    const std::size_t n = grid.size();
    const double inv_measure = 1.0 / grid.measure();
    InteractionTerms g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double c = f1[j] / eq.m1.values[j];
        const double s = f2[j] / eq.m2.values[j];
        const double u = f3[j] / eq.m3.values[j];
        const double infection = params.beta * c * u;
        g.g1[j] = inv_measure * (-params.d1 * c - infection + params.r);
        g.g2[j] = inv_measure * (-params.d2 * s + infection);
        g.g3[j] = inv_measure * (-params.d3 * u + params.k * s);
    }
    return g;
}

TransportCoefficients transport_coefficients(const ModelParams& params, const VelocityGrid& grid,
                                             const Equilibria& eq) {
    TransportCoefficients tc;
    tc.theta1 = solve_theta(eq.m1, params.sigma1, grid);
    tc.theta2 = solve_theta(eq.m2, params.sigma2, grid);
    tc.theta3 = solve_theta(eq.m3, params.sigma3, grid);
    tc.Dc = diffusion_tensor(eq.m1, params.sigma1, grid);
    tc.Ds = diffusion_tensor(eq.m2, params.sigma2, grid);
    tc.Du = diffusion_tensor(eq.m3, params.sigma3, grid);
    tc.chi = chemotactic_sensitivity(grid, eq, params);
    return tc;
}

}  // namespace kcsim
