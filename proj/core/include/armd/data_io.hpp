#pragma once

#include "armd/series.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace armd {

/// Malformed or unreadable input data; the message names the row and column.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Reads a comma-separated file with a header row. A leading column named
 * "date" or "timestamp" (any case) is skipped; every other column becomes a
 * channel, in column order. Rows are time order.
 *
 * Throws DataError for a missing file, ragged rows, non-numeric or
 * non-finite cells. Data rows are numbered from 1 (the header is line 1 of
 * the file, data row 1 is line 2).
 */
SeriesMatrix load_csv(const std::filesystem::path& path);

/// Writes a header of channel names, then one row per timestep.
void write_csv(const SeriesMatrix& series, const std::filesystem::path& path);
void write_csv(const SeriesMatrix& series, std::ostream& out);

struct SplitSpec {
    double train_fraction = 0.70;
    double valid_fraction = 0.10;
    double test_fraction = 0.20;
};

struct SeriesSplit {
    SeriesMatrix train;
    SeriesMatrix valid;
    SeriesMatrix test;
};

/**
 * Contiguous chronological split with boundaries floor(train_fraction * n)
 * and floor((train_fraction + valid_fraction) * n); test takes the rest. When
 * `min_length` is non-zero every segment must hold at least that many
 * steps (pass 2T so each split admits a window).
 */
SeriesSplit chronological_split(const SeriesMatrix& series, const SplitSpec& spec = {},
                                std::size_t min_length = 0);

/// Per-channel z-score statistics (population standard deviation).
struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> std;

    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

/// Throws DataError if any channel is constant.
NormalizationStats fit_normalizer(const SeriesMatrix& train);
SeriesMatrix normalize(const SeriesMatrix& series, const NormalizationStats& stats);
SeriesMatrix denormalize(const SeriesMatrix& series, const NormalizationStats& stats);

}  // namespace armd
