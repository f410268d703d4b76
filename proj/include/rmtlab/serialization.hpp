#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmtlab/dynamics.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/homogenization.hpp"
#include "rmtlab/loggas.hpp"
#include "rmtlab/spectral.hpp"

namespace rmtlab {

using Json = nlohmann::json;

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

Json to_json(const EnsembleSpec& spec);
/// Throws ConfigError naming the offending field. Custom band functions and
/// custom macroscopic shapes are not representable.
EnsembleSpec ensemble_from_json(const Json& j);

Json to_json(const LogGasSpec& spec);
LogGasSpec loggas_from_json(const Json& j);

// Binary matrix format: "RMT1", uint32 N, uint8 symmetry (0 real, 1 complex),
// then the upper triangle row by row as little-endian float64 (real and
// imaginary parts interleaved for complex entries).
void write_matrix(const std::filesystem::path& path, const HermitianMatrix& h);
HermitianMatrix read_matrix(const std::filesystem::path& path);

/// CSV "label,eigenvalue" with a "# digest=<d> seed=<s>" first line; values
/// printed with 17 significant digits so they round-trip exactly.
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumSample& s);
SpectrumSample read_spectrum_csv(const std::filesystem::path& path);

/// One row per checkpoint: t, lambda_1, ..., lambda_N.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<DbmState>& states);

// U checkpoints: "RMTU", uint32 dimension, uint32 count, then per checkpoint
// float64 time followed by the row-major matrix.
void write_fundamental_solution(const std::filesystem::path& path, const FundamentalSolution& sol);
FundamentalSolution read_fundamental_solution(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes; throws ConfigError if the
/// file cannot be opened.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rmtlab
