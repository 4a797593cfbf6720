#include "armd/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace armd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_time_column(std::string_view name) {
    const std::string n = lower(trim(name));
    return n == "date" || n == "timestamp";
}

}  // namespace

SeriesMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("load_csv: cannot open " + path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("load_csv: " + path.string() + " is empty (header row required)");
    }
    // UTF-8 byte order mark
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_fields(line);
    const std::size_t skip = is_time_column(header.front()) ? 1 : 0;
    if (header.size() <= skip) {
        throw DataError("load_csv: " + path.string() + " has no value columns");
    }
    std::vector<std::string> names;
    for (std::size_t i = skip; i < header.size(); ++i) {
        names.emplace_back(trim(header[i]));
    }

    std::vector<std::vector<double>> channels(names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "load_csv: " << path.string() << " row " << row << " (line " << row + 1
                << ") has " << fields.size() << " fields, header has " << header.size();
            throw DataError(msg.str());
        }
        for (std::size_t col = skip; col < fields.size(); ++col) {
            const std::string_view cell = trim(fields[col]);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
                !std::isfinite(value)) {
                std::ostringstream msg;
                msg << "load_csv: " << path.string() << " row " << row << " (line " << row + 1
                    << "), column '" << names[col - skip] << "': cannot parse '" << cell
                    << "' as a finite number";
                throw DataError(msg.str());
            }
            channels[col - skip].push_back(value);
        }
    }
    if (row == 0) {
        throw DataError("load_csv: " + path.string() + " has no data rows");
    }
    return SeriesMatrix::from_channels(channels, std::move(names));
}

void write_csv(const SeriesMatrix& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("write_csv: cannot open " + path.string());
    }
    write_csv(series, out);
}

void write_csv(const SeriesMatrix& series, std::ostream& out) {
    const auto& names = series.channel_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        out << (c ? "," : "") << names[c];
    }
    out << '\n';
    char buf[32];
    for (std::size_t t = 0; t < series.n_timesteps(); ++t) {
        for (std::size_t c = 0; c < series.n_channels(); ++c) {
            const auto res = std::to_chars(buf, buf + sizeof buf, series(c, t));
            out << (c ? "," : "") << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

SeriesSplit chronological_split(const SeriesMatrix& series, const SplitSpec& spec,
                                std::size_t min_length) {
    const double total = spec.train_fraction + spec.valid_fraction + spec.test_fraction;
    if (spec.train_fraction <= 0.0 || spec.valid_fraction <= 0.0 || spec.test_fraction <= 0.0 ||
        std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("chronological_split: fractions must be positive and sum to 1");
    }
    const std::size_t n = series.n_timesteps();
    // Boundaries are floors of the cumulative fractions, so every segment is
    // within one timestep of its share. The small offset keeps products such
    // as 0.7 * 100 from flooring to 69.
    const auto boundary = [n](double f) {
        return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
    };
    const std::size_t first = boundary(spec.train_fraction);
    const std::size_t second = boundary(spec.train_fraction + spec.valid_fraction);
    if (second >= n) {
        throw DataError("chronological_split: series too short to split");
    }
    const std::size_t n_train = first;
    const std::size_t n_valid = second - first;
    const std::size_t n_test = n - n_train - n_valid;
    const std::size_t floor_len = std::max<std::size_t>(min_length, 1);
    if (n_train < floor_len || n_valid < floor_len || n_test < floor_len) {
        std::ostringstream msg;
        msg << "chronological_split: segments of " << n_train << "/" << n_valid << "/" << n_test
            << " timesteps; each needs at least " << floor_len;
        throw DataError(msg.str());
    }
    return {series.columns(0, n_train), series.columns(n_train, n_valid),
            series.columns(n_train + n_valid, n_test)};
}

NormalizationStats fit_normalizer(const SeriesMatrix& train) {
    if (train.empty()) {
        throw DataError("fit_normalizer: empty training series");
    }
    NormalizationStats stats;
    const double n = static_cast<double>(train.n_timesteps());
    for (std::size_t c = 0; c < train.n_channels(); ++c) {
        const auto row = train.channel(c);
        double mean = 0.0;
        for (double v : row) {
            mean += v;
        }
        mean /= n;
        double var = 0.0;
        for (double v : row) {
            var += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(var / n);
        if (!(sd > 0.0)) {
            throw DataError("fit_normalizer: channel '" + train.channel_names()[c] +
                            "' is constant on the training split");
        }
        stats.mean.push_back(mean);
        stats.std.push_back(sd);
    }
    return stats;
}

namespace {

void require_stats(const SeriesMatrix& series, const NormalizationStats& stats, const char* what) {
    if (stats.mean.size() != series.n_channels() || stats.std.size() != series.n_channels()) {
        throw std::invalid_argument(std::string(what) + ": statistics do not match channel count");
    }
}

}  // namespace

SeriesMatrix normalize(const SeriesMatrix& series, const NormalizationStats& stats) {
    require_stats(series, stats, "normalize");
    SeriesMatrix out = series;
    for (std::size_t c = 0; c < out.n_channels(); ++c) {
        for (double& v : out.channel(c)) {
            v = (v - stats.mean[c]) / stats.std[c];
        }
    }
    return out;
}

SeriesMatrix denormalize(const SeriesMatrix& series, const NormalizationStats& stats) {
    require_stats(series, stats, "denormalize");
    SeriesMatrix out = series;
    for (std::size_t c = 0; c < out.n_channels(); ++c) {
        for (double& v : out.channel(c)) {
            v = v * stats.std[c] + stats.mean[c];
        }
    }
    return out;
}

}  // namespace armd
