#include "ctfdct/feature_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctfdct/error.hpp"

namespace ctfdct {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> csv_split(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw Error(ErrorCode::Format, "unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  // strtod accepts the %.17g round trip exactly.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::Format, "bad number '" + s + "' on line " + std::to_string(line_no));
  }
  return v;
}

std::string header_line() {
  std::string h = "source_id,label,block_count";
  for (int c = 1; c <= kAcCoefficients; ++c) h += ",beta_" + std::to_string(c);
  return h;
}

void check_row(const BetaVector& v, std::size_t line_no) {
  for (double b : v.betas) {
    if (!std::isfinite(b) || b < 0.0) {
      throw Error(ErrorCode::Format, "beta values must be finite and non-negative (line " +
                                         std::to_string(line_no) + ")");
    }
  }
}

}  // namespace

void write_features_csv(std::ostream& out, std::span<const FeatureRecord> records) {
  out << header_line() << '\n';
  for (const auto& r : records) {
    out << csv_quote(r.features.source_id) << ',' << csv_quote(r.label) << ',' << r.features.block_count;
    for (double b : r.features.betas) out << ',' << format_double(b);
    out << '\n';
  }
}

void write_features_jsonl(std::ostream& out, std::span<const FeatureRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["source_id"] = r.features.source_id;
    j["label"] = r.label;
    j["block_count"] = r.features.block_count;
    for (int c = 1; c <= kAcCoefficients; ++c) j["beta_" + std::to_string(c)] = r.features.betas[c - 1];
    out << j.dump() << '\n';
  }
}

FeatureFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".ndjson") ? FeatureFormat::JsonLines : FeatureFormat::Csv;
}

void write_features(const std::filesystem::path& path, std::span<const FeatureRecord> records,
                    FeatureFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  if (format == FeatureFormat::Csv) {
    write_features_csv(out, records);
  } else {
    write_features_jsonl(out, records);
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<FeatureRecord> read_features_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorCode::Format, "empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header_line()) throw Error(ErrorCode::Format, "unexpected feature CSV header");
  std::vector<FeatureRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv_split(line, line_no);
    if (fields.size() != 3 + kAcCoefficients) {
      throw Error(ErrorCode::Format, "expected " + std::to_string(3 + kAcCoefficients) + " fields on line " +
                                         std::to_string(line_no) + ", got " + std::to_string(fields.size()));
    }
    FeatureRecord r;
    r.features.source_id = fields[0];
    r.label = fields[1];
    const auto& bc = fields[2];
    if (std::from_chars(bc.data(), bc.data() + bc.size(), r.features.block_count).ec != std::errc{}) {
      throw Error(ErrorCode::Format, "bad block_count on line " + std::to_string(line_no));
    }
    for (int c = 0; c < kAcCoefficients; ++c) r.features.betas[c] = parse_double(fields[3 + c], line_no);
    check_row(r.features, line_no);
    r.features.degenerate = std::find(r.features.betas.begin(), r.features.betas.end(), 0.0) != r.features.betas.end();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FeatureRecord> read_features_jsonl(std::istream& in) {
  std::vector<FeatureRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      FeatureRecord r;
      r.features.source_id = j.at("source_id").get<std::string>();
      r.label = j.at("label").get<std::string>();
      r.features.block_count = j.at("block_count").get<std::size_t>();
      for (int c = 1; c <= kAcCoefficients; ++c) r.features.betas[c - 1] = j.at("beta_" + std::to_string(c)).get<double>();
      check_row(r.features, line_no);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FeatureRecord> read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return format_for_path(path) == FeatureFormat::JsonLines ? read_features_jsonl(in) : read_features_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace ctfdct
