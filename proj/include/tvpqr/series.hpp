#pragma once

#include <filesystem>

#include "tvpqr/types.hpp"

namespace tvpqr {

/// Reads a two-column CSV (period, value) with a header row. Under the
/// log-diff transform, values become 400 log(P_t / P_{t-1}) and the first
/// period is dropped.
SeriesData ingest_csv(const std::filesystem::path& path, Transform transform);

/// Same parser on an in-memory CSV text; `source` names it in error messages.
SeriesData parse_csv(std::string_view text, Transform transform, std::string_view source = "<memory>");

void write_series_csv(const std::filesystem::path& path, const SeriesData& data);

}  // namespace tvpqr
