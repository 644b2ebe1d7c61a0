#pragma once

#include "delaystab/catalog.hpp"
#include "delaystab/linalg.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace delaystab {

/// Parameter bounds of the general system
///   x_i'(t) = −a_i(t)·x_i(h_i(t)) + Σ_j F_ij(t, x_j(g_ij(t))),
/// with α_i ≤ a_i(t) ≤ A_i, t − h_i(t) ≤ τ_i, t − g_ij(t) ≤ σ_ij and |F_ij(t,u)| ≤ L_ij·|u|.
struct GeneralSystemSpec {
    std::size_t m = 0;
    Vector alpha;
    Vector A;
    Vector tau;
    Matrix sigma;
    Matrix L;
    /// h_i(t) ≡ t: the decay term is undelayed.
    bool diagonal_delay_free = false;

    /// Largest delay bound over τ and σ.
    double max_delay() const;

    bool operator==(const GeneralSystemSpec&) const = default;
};

/// Bounds of the linear system x_i'(t) = Σ_j a_ij(t)·x_j(g_ij(t)) with
/// α_i ≤ −a_ii(t) ≤ A_i, |a_ij(t)| ≤ A_off(i,j) and t − g_ij(t) ≤ σ_ij.
struct LinearSystemSpec {
    std::size_t m = 0;
    Vector alpha;
    Vector A;
    Matrix A_off;
    Matrix sigma;
    bool diagonal_delay_free = false;

    double max_delay() const;

    bool operator==(const LinearSystemSpec&) const = default;
};

/// Non-autonomous BAM network
///   x_i' = r_i(t)·(−a_i·x_i(h¹_i(t)) + Σ_j a_ij·f_j(y_j(l²_j(t))) + I_i)
///   y_i' = p_i(t)·(−b_i·y_i(h²_i(t)) + Σ_j b_ij·g_j(x_j(l¹_j(t))) + J_i)
struct BamSpec {
    std::size_t n = 0;
    Vector a;
    Vector b;
    Matrix a_conn;
    Matrix b_conn;
    Vector Lf;
    Vector Lg;
    Vector r_lo;
    Vector r_hi;
    Vector p_lo;
    Vector p_hi;
    Vector tau1;  ///< leakage delay bounds of the x layer
    Vector tau2;  ///< leakage delay bounds of the y layer
    Vector sig1;  ///< transmission delay bounds of x_j inside g_j
    Vector sig2;  ///< transmission delay bounds of y_j inside f_j
    Vector I;
    Vector J;

    double max_delay() const;

    bool operator==(const BamSpec&) const = default;
};

/// Two-neuron system with constant delays
///   x' = −a1·x(t−τ1) + a12·f1(y(t−σ1)),  y' = −a2·y(t−τ2) + a21·f2(x(t−σ2)),  |f_i(u)| ≤ L_i·|u|.
struct TwoNeuronParams {
    double a1 = 0, a2 = 0;
    double a12 = 0, a21 = 0;
    double tau1 = 0, tau2 = 0;
    double sigma1 = 0, sigma2 = 0;
    double L1 = 0, L2 = 0;

    bool operator==(const TwoNeuronParams&) const = default;
};

struct Violation {
    std::string path;
    std::string message;
    double value = 0.0;
};

std::vector<Violation> validate(const GeneralSystemSpec& spec);
std::vector<Violation> validate(const LinearSystemSpec& spec);
std::vector<Violation> validate(const BamSpec& spec);
std::vector<Violation> validate(const TwoNeuronParams& p);

/// Throws InputError listing every violation, if any.
void require_valid(const GeneralSystemSpec& spec);
void require_valid(const LinearSystemSpec& spec);
void require_valid(const BamSpec& spec);
void require_valid(const TwoNeuronParams& p);

/// Rewrites the BAM network about its equilibrium as a 2n-dimensional general system
/// with off-diagonal nonlinearities only.
GeneralSystemSpec bam_to_general(const BamSpec& bam);

/// The linear system as a general system: a_i = −a_ii, leakage lag g_ii (bound σ_ii),
/// F_ij(u) = a_ij·u off the diagonal and F_ii ≡ 0.
GeneralSystemSpec linear_to_general(const LinearSystemSpec& lin);

/// n = 1 BAM network for the two-neuron system (r ≡ p ≡ 1, zero inputs).
BamSpec two_neuron_spec(const TwoNeuronParams& p);

/// Same system read directly as a two-dimensional general system.
GeneralSystemSpec two_neuron_general(const TwoNeuronParams& p);

// ---------------------------------------------------------------------------
// Concrete systems: catalog functions that realize a spec for simulation.

struct GeneralDynamics {
    std::vector<TimeFunction> a;                       ///< a_i(t)
    std::vector<DelayFunction> h;                      ///< leakage lags
    std::vector<std::vector<DelayFunction>> g;         ///< transmission lags
    std::vector<std::vector<Activation>> F;            ///< F_ij(u), time-independent

    bool operator==(const GeneralDynamics&) const = default;
};

struct LinearDynamics {
    std::vector<TimeFunction> diag;                    ///< −a_ii(t)
    std::vector<std::vector<TimeFunction>> off;        ///< a_ij(t), i ≠ j
    std::vector<std::vector<DelayFunction>> g;         ///< lags, g_ii used by the diagonal term

    bool operator==(const LinearDynamics&) const = default;
};

struct BamDynamics {
    std::vector<TimeFunction> r;
    std::vector<TimeFunction> p;
    std::vector<DelayFunction> h1;
    std::vector<DelayFunction> h2;
    std::vector<DelayFunction> l1;
    std::vector<DelayFunction> l2;
    std::vector<Activation> f;
    std::vector<Activation> g;

    bool operator==(const BamDynamics&) const = default;
};

/// Constant coefficients at the upper bounds, delays constant at their bounds, linear
/// nonlinearities at their bounds.
GeneralDynamics default_dynamics(const GeneralSystemSpec& spec);
LinearDynamics default_dynamics(const LinearSystemSpec& spec);
BamDynamics default_dynamics(const BamSpec& spec);

/// Dynamics of two_neuron_spec(p): constant delays at their values, f = {f1}, g = {f2}.
BamDynamics two_neuron_dynamics(const TwoNeuronParams& p, const Activation& f1, const Activation& f2);

std::vector<Violation> validate(const GeneralSystemSpec& spec, const GeneralDynamics& dyn);
std::vector<Violation> validate(const LinearSystemSpec& spec, const LinearDynamics& dyn);
std::vector<Violation> validate(const BamSpec& spec, const BamDynamics& dyn);

/// Simulation-ready form shared by every family:
///   x_i' = −decay_i(t)·x_i(t − leak_i(t)) + Σ_k coef_k(t)·act_k(x_{j_k}(t − lag_k(t))) + forcing_i(t)
struct ConcreteSystem {
    struct Coupling {
        std::size_t i = 0;
        std::size_t j = 0;
        TimeFunction coefficient;
        Activation activation;
        DelayFunction delay;
        double delay_bound = 0.0;
    };

    std::size_t m = 0;
    std::vector<TimeFunction> decay;
    std::vector<DelayFunction> leakage;
    Vector leakage_bound;
    std::vector<Coupling> couplings;
    std::vector<TimeFunction> forcing;

    double max_delay() const;
    double min_positive_delay_bound() const;
};

ConcreteSystem make_concrete(const GeneralSystemSpec& spec, const GeneralDynamics& dyn);
ConcreteSystem make_concrete(const LinearSystemSpec& spec, const LinearDynamics& dyn);
ConcreteSystem make_concrete(const BamSpec& spec, const BamDynamics& dyn);

}  // namespace delaystab
