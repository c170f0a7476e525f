#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <unsupported/Eigen/CXX11/Tensor>

namespace tvart {

/// Rank-R CP parameterization of the stack of per-window system matrices.
///
/// Window k uses A_k = U1 diag(U3.row(k)) U2^T, an N x N_in matrix. When the
/// model is affine the last row of U2 is the offset loading c, so the last
/// column of A_k is the offset b_k = U1 diag(U3.row(k)) c.
struct CpFactors {
    Eigen::MatrixXd U1; // N x R, left spatial modes
    Eigen::MatrixXd U2; // N_in x R, right spatial modes
    Eigen::MatrixXd U3; // T x R, temporal modes
    bool affine = false;

    Eigen::Index state_dim() const { return U1.rows(); }
    Eigen::Index input_dim() const { return U2.rows(); }
    Eigen::Index windows() const { return U3.rows(); }
    Eigen::Index rank() const { return U1.cols(); }

    /// Throws DimensionMismatch / NonFinite / InvalidArgument on a malformed model.
    void validate() const;
};

/// Factors scaled to unit columns with the scales collected in lambda,
/// ordered by descending lambda.
struct NormalizedCp {
    CpFactors factors;
    Eigen::VectorXd lambda;

    /// Push the scales back into the factors: U1 column r is multiplied by lambda_r.
    CpFactors scaled() const;
};

/// A_k for window k (0-based).
Eigen::MatrixXd slice(const CpFactors& model, Eigen::Index k);

/// Offset b_k of an affine model (last column of slice(model, k)).
Eigen::VectorXd offset(const CpFactors& model, Eigen::Index k);

NormalizedCp normalize(const CpFactors& model);

inline constexpr std::int64_t kDefaultReconstructionCap = 100'000'000;

/// Dense N x N_in x T tensor. Diagnostics only; throws TooLarge above `max_entries`.
Eigen::Tensor<double, 3> reconstruct_tensor(const CpFactors& model,
                                            std::int64_t max_entries = kDefaultReconstructionCap);

/// Number of normalized components with lambda_r >= fraction * max(lambda).
int effective_rank(const CpFactors& model, double threshold_fraction);

} // namespace tvart
