#pragma once

#include <filesystem>
#include <string>

#include "tvart/synthetic.hpp"

namespace tvart {

// On-disk truth bundle. The system matrices are stored in factored form,
// because the dense N x N blocks are prohibitively large at benchmark sizes:
//
//   truth_index.csv        step,basis,theta   one row per transition t = 1..tau
//   truth_basis_<b>.csv    w1,w2              N rows, orthonormal basis b
//
// The matrix for transition t is W_b Rot(theta) W_b^T.

inline constexpr const char* kTruthIndexFile = "truth_index.csv";
std::string truth_basis_file(std::size_t basis);

void write_truth_bundle(const std::filesystem::path& dir, const GroundTruth& truth,
                        const std::string& manifest = {});

/// Rebuild the system description of a bundle. The returned GroundTruth has
/// no series or clean trajectory; attach the series separately.
GroundTruth read_truth_bundle(const std::filesystem::path& dir);

} // namespace tvart
