#pragma once

#include "delaystab/linalg.hpp"
#include "delaystab/system_model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace delaystab {

enum class Status { stable_certified, inconclusive };

std::string_view to_string(Status s);

/// A named inequality lhs > rhs (or lhs < rhs when the criterion bounds from above);
/// slack is positive exactly when the inequality holds.
struct Margin {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

struct StabilityVerdict {
    Status status = Status::inconclusive;
    /// theorem1, cor0..cor7, thm3, cor9-1..4, cor10-1..4, cor11, gopalsamy17, criterion18
    std::string criterion;
    std::optional<Matrix> test_matrix;
    std::optional<MMatrixReport> report;
    std::vector<Margin> margins;

    bool stable() const { return status == Status::stable_certified; }
};

struct DecayCertificate {
    double lambda0 = 0.0;
    /// Smallest λ tested that failed; lambda0 + bracket_width. Equals lambda0 when the
    /// whole range passed.
    double lambda_fail = 0.0;
    double bracket_width = 0.0;
    /// Minimum leading minor of C(λ₀).
    double boundary_margin = 0.0;
    int iterations = 0;
    double upper_limit = 0.0;
};

// Test matrices -------------------------------------------------------------------------

/// c_ii = 1 − (A_i(A_i+L_ii)τ_i + L_ii)/α_i, c_ij = −(A_i·L_ij·τ_i + L_ij)/α_i.
Matrix build_C(const GeneralSystemSpec& spec);
/// Off-diagonal-nonlinearity variant: c_ii = 1 − A_i²τ_i/α_i.
Matrix build_C_offdiag(const GeneralSystemSpec& spec);
/// Undelayed decay term: b_ii = 1 − L_ii/α_i, b_ij = −L_ij/α_i.
Matrix build_B_nodelay(const GeneralSystemSpec& spec);
/// Delayed linear system: d_ii = 1 − A_i²σ_ii/α_i, d_ij = −(A_i·A_ij·σ_ii + A_ij)/α_i.
Matrix build_D_linear(const LinearSystemSpec& spec);
/// Undelayed-diagonal linear system: f_ii = 1, f_ij = −A_ij/α_i.
Matrix build_F_linear(const LinearSystemSpec& spec);

/// Exponentially weighted C(λ) for 0 ≤ λ < min α_i; equals build_C at λ = 0. For
/// diagonal_delay_free specs the leakage delays are read as zero (then C(0) is build_B_nodelay).
Matrix build_C_lambda(const GeneralSystemSpec& spec, double lambda);

/// Largest λ found by bisection on (0, min α − tol) for which C(λ) stays an M-matrix.
DecayCertificate certify_decay_rate(const GeneralSystemSpec& spec, double tol = kDefaultTol, int iterations = 60);

// Verdicts --------------------------------------------------------------------------------

StabilityVerdict classify(Matrix test_matrix, std::string criterion, double tol = kDefaultTol);

/// Sharpest matrix for the spec family: build_B_nodelay for undelayed decay terms, build_C otherwise.
StabilityVerdict theorem1_verdict(const GeneralSystemSpec& spec, double tol = kDefaultTol);
/// build_F_linear for undelayed diagonals, build_D_linear otherwise.
StabilityVerdict theorem1_verdict(const LinearSystemSpec& spec, double tol = kDefaultTol);
/// Forces the off-diagonal-nonlinearity matrix.
StabilityVerdict corollary0_verdict(const GeneralSystemSpec& spec, double tol = kDefaultTol);

/// Closed-form two-dimensional criteria. which = 4 (delayed general) or 5 (undelayed general).
StabilityVerdict corollary_m2(const GeneralSystemSpec& spec, int which, double tol = kDefaultTol);
/// which = 6 (delayed linear) or 7 (undelayed-diagonal linear).
StabilityVerdict corollary_m2(const LinearSystemSpec& spec, int which, double tol = kDefaultTol);

struct GopalsamyComparison {
    /// a_iτ_i < 1 for both neurons; otherwise neither criterion applies.
    bool applicable = false;
    StabilityVerdict criterion17;
    StabilityVerdict criterion18;
};

GopalsamyComparison gopalsamy_vs_18(const TwoNeuronParams& p, double tol = kDefaultTol);

/// 2n×2n BAM test matrix.
Matrix build_C_bam(const BamSpec& bam);
StabilityVerdict theorem3_verdict(const BamSpec& bam, double tol = kDefaultTol);

/// Diagonal-dominance forms of the BAM criterion. Weights μ_1..μ_2n are only used by
/// which = 3, 4; when absent they come from the M-matrix witness of C_BAM (or of its
/// transpose for which = 4).
StabilityVerdict corollary9(const BamSpec& bam, int which, std::optional<Vector> weights = std::nullopt,
                            double tol = kDefaultTol);
/// Same, for networks without leakage delays (all τ bounds zero).
StabilityVerdict corollary10(const BamSpec& bam, int which, std::optional<Vector> weights = std::nullopt,
                             double tol = kDefaultTol);
/// Closed-form n = 1 criterion.
StabilityVerdict corollary11(const BamSpec& bam, double tol = kDefaultTol);

}  // namespace delaystab
