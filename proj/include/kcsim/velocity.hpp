/**
 * @file  velocity.hpp
 * @brief Discrete velocity set, equilibrium profiles, turning operators and the
 *        transport coefficients obtained from them by quadrature.
 *
 * Conventions
 * -----------
 * A turning kernel T(v, v*) is the rate of switching to the new velocity v from
 * the previous velocity v*. The induced operator is
 *
 *     T(g)(v) = sum_* w_* [ T(v, v*) g(v*) - T(v*, v) g(v) ]
 *
 * (gain minus loss). With T(v, v*) = sigma M(v) this is the relaxation operator
 * -sigma (g - M <g>), where <g> = sum_j w_j g(v_j).
 *
 * Per-node vector quantities (theta, psi) are stored node-major: entry
 * [j * dim + a] is component a at node j.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kcsim/model.hpp"

namespace kcsim {

struct VelocityGrid {
    int dim = 1;
    double vmax = 1.0;
    std::vector<double> nodes;    // size() * dim
    std::vector<double> weights;  // size()

    [[nodiscard]] std::size_t size() const { return weights.size(); }
    [[nodiscard]] std::span<const double> node(std::size_t j) const {
        return {nodes.data() + j * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    /// Component 0 of node j; the only component in 1D.
    [[nodiscard]] double speed(std::size_t j) const { return nodes[j * static_cast<std::size_t>(dim)]; }
    /// |V|, the measure of the velocity set.
    [[nodiscard]] double measure() const;
};

struct EquilibriumDistribution {
    int species = 1;
    std::vector<double> values;  // M(v_j)
};

/// The three equilibrium profiles M1, M2, M3.
struct Equilibria {
    EquilibriumDistribution m1;
    EquilibriumDistribution m2;
    EquilibriumDistribution m3;
};

/// Dense dim x dim matrix, row-major.
struct Tensor {
    int dim = 1;
    std::vector<double> entries;

    static Tensor zero(int dim);
    [[nodiscard]] double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * dim + j)]; }
    double& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * dim + j)]; }
    [[nodiscard]] bool is_symmetric(double tol = 0.0) const;
    [[nodiscard]] bool is_positive_definite() const;
    [[nodiscard]] double max_abs_diff(const Tensor& other) const;
};

struct TransportCoefficients {
    Tensor Dc;
    Tensor Ds;
    Tensor Du;
    Tensor chi;
    std::vector<double> theta1;
    std::vector<double> theta2;
    std::vector<double> theta3;
};

/// Turning kernel T(v_j, v_jstar) indexed by node.
using TurningKernel = std::function<double(std::size_t j, std::size_t jstar)>;

/**
 * Chemotactic perturbation kernel K_s(v, v*) = chi0 v.
 *
 * Vector valued, independent of s and of the previous velocity v*.
 */
struct ChemotaxisKernel {
    double chi0 = 0.0;

    void evaluate(std::span<const double> v, std::span<const double> vstar,
                  std::span<double> out) const;
};

// ---------------------------------------------------------------------------
// Grid and equilibria

/**
 * Symmetric composite Gauss-Legendre rule on [-vmax, vmax].
 *
 * n % 4 == 0 uses n/4 equal panels of 4 nodes; otherwise two panels of n/2
 * nodes. Every panel integrates polynomials of degree >= 5 exactly.
 * Throws OddNodeCountError unless n is even and >= 4.
 */
VelocityGrid build_uniform_grid(double vmax, std::size_t n_nodes);

/// M(v) = 1/|V| at every node.
EquilibriumDistribution uniform_maxwellian(const VelocityGrid& grid, int species = 1);
Equilibria uniform_equilibria(const VelocityGrid& grid);

/// Throws ConsistencyError if normalization, zero flux or positivity fail.
void check_equilibrium(const EquilibriumDistribution& m, const VelocityGrid& grid,
                       double tol = 1e-12);

/// <g> = sum_j w_j g_j
double velocity_average(std::span<const double> g, const VelocityGrid& grid);

// ---------------------------------------------------------------------------
// Turning operators

/// Relaxation (BGK) operator -sigma (g - M <g>).
std::vector<double> relaxation_operator_apply(std::span<const double> g,
                                              const EquilibriumDistribution& m, double sigma,
                                              const VelocityGrid& grid);

/// Relaxation kernel T(v, v*) = sigma M(v).
TurningKernel relaxation_kernel(const EquilibriumDistribution& m, double sigma);

/// Gain-minus-loss quadrature of an arbitrary turning kernel.
std::vector<double> turning_operator_apply(const TurningKernel& kernel, std::span<const double> g,
                                           const VelocityGrid& grid);

/// Matrix of g -> relaxation_operator_apply(g), row-major n x n.
std::vector<double> relaxation_operator_matrix(const EquilibriumDistribution& m, double sigma,
                                               const VelocityGrid& grid);

/**
 * theta solving L(theta) = v M with <theta> = 0, for the relaxation operator.
 *
 * Closed form theta = -v M / sigma, verified against the operator; throws
 * ResidualError if the residual exceeds 1e-12.
 */
std::vector<double> solve_theta(const EquilibriumDistribution& m, double sigma,
                                const VelocityGrid& grid);

/// D = (1/sigma) sum_j w_j v_j (x) v_j M(v_j).
Tensor diffusion_tensor(const EquilibriumDistribution& m, double sigma, const VelocityGrid& grid);

/// D = -sum_j w_j v_j (x) theta(v_j).
Tensor diffusion_tensor_from_theta(std::span<const double> theta, const VelocityGrid& grid);

/**
 * Chemotactic perturbation T1^1 applied to f1 at one point in space:
 *
 *   gain(v) = sum_* w_* K(v, v*) . grad_s f1(v*)
 *   loss(v) = f1(v) sum_* w_* K(v*, v) . grad_s
 */
std::vector<double> perturbation_operator_apply(std::span<const double> f1,
                                                std::span<const double> grad_s,
                                                const ChemotaxisKernel& kernel,
                                                const VelocityGrid& grid);

/// psi(v) = sum_* w_* [K(v, v*) M2(v*) - K(v*, v) M2(v)], node-major vectors.
std::vector<double> psi(const VelocityGrid& grid, const EquilibriumDistribution& m2,
                        const ChemotaxisKernel& kernel);

/// chi = (1/sigma1) sum_j w_j v_j (x) psi(v_j).
Tensor chemotactic_sensitivity(const VelocityGrid& grid, std::span<const double> psi_values,
                               double sigma1);
Tensor chemotactic_sensitivity(const VelocityGrid& grid, const Equilibria& eq,
                               const ModelParams& params);

/**
 * alpha = (1/sigma1) sum_j w_j v_j T1^1[M2 s, M3 u](M1)(v_j), by direct
 * quadrature of the perturbation operator.
 *
 * Throws ConsistencyError if the result differs from chi . grad_s by more
 * than 1e-12.
 */
std::vector<double> alpha_direct(std::span<const double> grad_s, double u_value,
                                 const VelocityGrid& grid, const Equilibria& eq,
                                 const ModelParams& params);

struct InteractionTerms {
    std::vector<double> g1;
    std::vector<double> g2;
    std::vector<double> g3;
};

/// Per-node interaction terms G1, G2, G3 whose velocity averages are the SIR reactions.
InteractionTerms interaction_terms(std::span<const double> f1, std::span<const double> f2,
                                   std::span<const double> f3, const Equilibria& eq,
                                   const ModelParams& params, const VelocityGrid& grid);

/// All coefficients of the macroscopic limit, each computed by quadrature.
TransportCoefficients transport_coefficients(const ModelParams& params, const VelocityGrid& grid,
                                             const Equilibria& eq);

}  // namespace kcsim
