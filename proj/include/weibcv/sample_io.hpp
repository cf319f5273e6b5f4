#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "weibcv/censoring.hpp"

namespace weibcv {

// Canonical JSON: {"t": [...], "X": [...], "W": [...], "n": int}, boundaries
// ascending and counts aligned by index. "n" is optional on input and must
// equal sum(X + W) when present.
//
// CSV: header `t,X,W`, one row per interval; n is inferred.
//
// Loaders throw DataError naming the offending line or field, and reject
// samples without failures.
CensoredSample parse_sample_json(const std::string& text);
CensoredSample parse_sample_csv(const std::string& text);

// Dispatches on extension (.json / .csv); otherwise sniffs the first
// non-blank character.
CensoredSample load_sample(const std::filesystem::path& path);

std::string sample_to_json(const CensoredSample& sample);
void write_sample_json(const CensoredSample& sample, const std::filesystem::path& path);

}  // namespace weibcv
