#pragma once

#include "delaystab/catalog.hpp"
#include "delaystab/linalg.hpp"
#include "delaystab/system_model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace delaystab {

/// Lipschitz matrices of the two fixed-point forms of the BAM equilibrium equations.
/// `scaled_by_own_gain` divides the coupling by the gain of the receiving unit (a_i, b_i);
/// `scaled_by_source_gain` divides by the gain of the sending unit (b_j, a_j).
struct ExistenceMatrices {
    Matrix scaled_by_own_gain;
    Matrix scaled_by_source_gain;
};

ExistenceMatrices build_existence_matrices(const BamSpec& bam);

struct ExistenceCondition {
    int index = 0;          ///< 1..8
    std::string description;
    double value = 0.0;     ///< quantity that must stay below 1
    bool holds = false;
};

struct ExistenceReport {
    std::vector<ExistenceCondition> conditions;
    bool exists_unique = false;
};

/// Evaluates the eight sufficient conditions for a unique equilibrium: spectral radius,
/// max row sum, max column sum and squared Frobenius norm of each existence matrix.
ExistenceReport equilibrium_exists(const BamSpec& bam);

struct Equilibrium {
    Vector x_star;
    Vector y_star;
    /// Max violation of a_i·x_i = Σ_j a_ij f_j(y_j) + I_i and its y counterpart.
    double residual = 0.0;
    int iterations = 0;
    /// Largest observed ratio of consecutive step norms.
    double contraction_ratio = 0.0;
    /// Sup-norm of u_{k+1} − u_k per iteration.
    std::vector<double> step_norms;
    bool existence_guaranteed = false;
};

struct EquilibriumOptions {
    double tol = 1e-12;
    int max_iter = 100000;
    /// Consecutive growing steps that count as divergence.
    int divergence_window = 10;
};

/// Banach iteration u ← T(u) on the u = a·x, v = b·y form, started from (I, J).
/// `f` and `g` are the activations (one per unit). Throws DivergenceError.
Equilibrium solve_equilibrium(const BamSpec& bam, const std::vector<Activation>& f,
                              const std::vector<Activation>& g, const EquilibriumOptions& opts = {});

/// Residual of the equilibrium equations at (x, y).
double equilibrium_residual(const BamSpec& bam, const std::vector<Activation>& f,
                            const std::vector<Activation>& g, const Vector& x, const Vector& y);

}  // namespace delaystab
