#include "weibcv/sample_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int parse_count(const std::string& cell, std::size_t line, const char* field) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || value < 0 || value > 1'000'000'000) {
    throw DataError("line " + std::to_string(line) + ": field " + field +
                    " is not a non-negative integer: '" + cell + "'");
  }
  return static_cast<int>(value);
}

double parse_time(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw DataError("line " + std::to_string(line) + ": field t is not a number: '" + cell + "'");
  }
  return value;
}

template <typename T>
std::vector<T> json_array(const json& doc, const char* field) {
  if (!doc.contains(field)) throw DataError(std::string("missing field \"") + field + "\"");
  const json& node = doc.at(field);
  if (!node.is_array()) throw DataError(std::string("field \"") + field + "\" must be an array");
  std::vector<T> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    const json& item = node[i];
    const std::string where = std::string("field \"") + field + "\"[" + std::to_string(i) + "]";
    if constexpr (std::is_same_v<T, int>) {
      if (!item.is_number_integer() || item.get<long long>() < 0) {
        throw DataError(where + " must be a non-negative integer");
      }
      out.push_back(item.get<int>());
    } else {
      if (!item.is_number()) throw DataError(where + " must be a number");
      out.push_back(item.get<double>());
    }
  }
  return out;
}

CensoredSample finish(CensoredSample sample) {
  if (!sample.has_failures()) {
    throw DataError("sample has no failures (sum X = 0); nothing can be estimated");
  }
  return sample;
}

}  // namespace

CensoredSample parse_sample_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed JSON sample: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("JSON sample must be an object with fields t, X, W, n");
  auto t = json_array<double>(doc, "t");
  auto x = json_array<int>(doc, "X");
  auto w = json_array<int>(doc, "W");
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer()) throw DataError("field \"n\" must be an integer");
    return finish(CensoredSample(std::move(t), std::move(x), std::move(w), doc["n"].get<int>()));
  }
  return finish(CensoredSample(std::move(t), std::move(x), std::move(w)));
}

CensoredSample parse_sample_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> t;
  std::vector<int> x;
  std::vector<int> w;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (cells.size() != 3 || cells[0] != "t" || cells[1] != "X" || cells[2] != "W") {
        throw DataError("line " + std::to_string(line_no) + ": expected header 't,X,W'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected 3 fields, found " +
                      std::to_string(cells.size()));
    }
    t.push_back(parse_time(cells[0], line_no));
    x.push_back(parse_count(cells[1], line_no, "X"));
    w.push_back(parse_count(cells[2], line_no, "W"));
  }
  if (!header_seen) throw DataError("empty CSV sample: expected header 't,X,W'");
  if (t.empty()) throw DataError("CSV sample has a header but no rows");
  return finish(CensoredSample(std::move(t), std::move(x), std::move(w)));
}

CensoredSample load_sample(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open sample file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const std::string ext = path.extension().string();
  if (ext == ".json") return parse_sample_json(text);
  if (ext == ".csv") return parse_sample_csv(text);
  const auto first = std::find_if(text.begin(), text.end(),
                                  [](unsigned char c) { return !std::isspace(c); });
  if (first == text.end()) throw DataError("sample file '" + path.string() + "' is empty");
  return *first == '{' ? parse_sample_json(text) : parse_sample_csv(text);
}

std::string sample_to_json(const CensoredSample& sample) {
  json doc;
  doc["t"] = sample.boundaries();
  doc["X"] = sample.failures();
  doc["W"] = sample.withdrawals();
  doc["n"] = sample.n();
  return doc.dump() + "\n";
}

void write_sample_json(const CensoredSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write sample file '" + path.string() + "'");
  out << sample_to_json(sample);
}

}  // namespace weibcv
