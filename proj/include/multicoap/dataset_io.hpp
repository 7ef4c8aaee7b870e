#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "multicoap/simgen.hpp"
#include "multicoap/types.hpp"

// On-disk layout (s is 1-based):
//   X_s.csv  counts, header v1..vp
//   Z_s.csv  covariates, header z1..zd
//   a_s.csv  normalization factors, header a (optional on read; default 1)
//   truth/   beta0.csv A0.csv B_s0.csv F_s.csv H_s.csv (optional)

namespace multicoap::io {

/// Creates dir if needed. Throws DataError(Io) naming the path on failure.
void ensure_directory(const std::filesystem::path& dir);

void write_dataset(const std::filesystem::path& dir, const MultiStudyDataset& data);
/// Reads studies 1, 2, ... until X_s.csv is missing; validates the result.
MultiStudyDataset read_dataset(const std::filesystem::path& dir);

void write_truth(const std::filesystem::path& dir, const SimTruth& truth);
/// Reads dir/truth if it exists.
std::optional<SimTruth> read_truth(const std::filesystem::path& dir);

/// beta.csv A.csv B_s.csv lambda.csv Mf_s.csv Sf_s.csv Mh_s.csv Sh_s.csv
/// M_s.csv V_s.csv elbo_trace.csv
void write_fit(const std::filesystem::path& dir, const FitResult& fit);
void write_params(const std::filesystem::path& dir, const ModelParams& theta, const VariationalParams& xi);
std::pair<ModelParams, VariationalParams> read_params(const std::filesystem::path& dir);

}  // namespace multicoap::io
