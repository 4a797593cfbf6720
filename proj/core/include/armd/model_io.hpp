#pragma once

#include "armd/data_io.hpp"
#include "armd/devolution.hpp"
#include "armd/schedule.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace armd {

/*
 * Model file layout (all integers and floats little-endian):
 *
 *   offset  size      field
 *   0       8         magic "ARMDMODL"
 *   8       4         u32 format version
 *   12      4         u32 horizon T
 *   16      4         u32 channel count C
 *   20      8 * 5     f64 b, c, d, beta_start, beta_end
 *   60      8 * T*T   f64 weight, row-major
 *           8 * T     f64 bias
 *           8 * T     f64 w_logits (step 1..T)
 *           8 * C     f64 normalization mean
 *           8 * C     f64 normalization std
 *           8         u64 CRC-64/XZ of every preceding byte
 */
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelArtifact {
    DevolutionModel model;
    NormalizationStats stats;
    DiffusionSchedule schedule;
};

/// Base for every model-file failure.
class ModelFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not a model file at all (bad magic, inconsistent dimensions).
class ModelFormatError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};

class ModelVersionError : public ModelFileError {
public:
    ModelVersionError(std::uint32_t found, std::uint32_t expected);
    [[nodiscard]] std::uint32_t found() const noexcept { return found_; }
    [[nodiscard]] std::uint32_t expected() const noexcept { return expected_; }

private:
    std::uint32_t found_;
    std::uint32_t expected_;
};

/// Truncated or corrupted payload.
class ModelChecksumError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};

std::vector<std::uint8_t> serialize_model(const DevolutionModel& model,
                                          const NormalizationStats& stats,
                                          const DiffusionSchedule& schedule);
ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const DevolutionModel& model, const NormalizationStats& stats,
                const DiffusionSchedule& schedule, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xor-out).
std::uint64_t crc64(std::span<const std::uint8_t> bytes);

}  // namespace armd
