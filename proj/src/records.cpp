#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "phasels/errors.hpp"
#include "phasels/harness.hpp"

namespace phasels {

namespace {

constexpr std::array<std::string_view, 17> kColumns = {
    "trial",    "m",      "d",          "s",       "noise_kind", "eta_norm",
    "eta_l1",   "mean_eta", "solver",   "lambda",  "R",          "dist",
    "objective", "iterations", "converged", "runtime_ms", "seed"};

std::string FormatDouble(double v) {
  std::array<char, 32> buf;
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string Quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

// RFC-4180 tokenizer; each row remembers the physical line it started on.
std::vector<Row> Tokenize(const std::string& text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  int line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool row_has_content = false;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content || row.fields.size() > 1 || !row.fields.front().empty()) {
      rows.push_back(std::move(row));
    }
    row = Row{};
    row_has_content = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',': end_field(); break;
      case '\r': break;
      case '\n':
        end_row();
        ++line;
        row.line = line;
        break;
      default: field += c;
    }
  }
  if (in_quotes) Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": unterminated quote");
  if (!field.empty() || !row.fields.empty() || row_has_content) end_row();
  return rows;
}

[[noreturn]] void BadField(const Row& row, std::size_t col, const std::string& value) {
  Fail(ErrorCode::kParse, "line " + std::to_string(row.line) + ": bad value '" + value +
                              "' for field '" + std::string(kColumns[col]) + "'");
}

template <class T>
T ParseScalar(const Row& row, std::size_t col) {
  const std::string& s = row.fields[col];
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) BadField(row, col, s);
  return value;
}

std::optional<double> ParseOptional(const Row& row, std::size_t col) {
  if (row.fields[col].empty()) return std::nullopt;
  return ParseScalar<double>(row, col);
}

bool ParseBool(const Row& row, std::size_t col) {
  const std::string& s = row.fields[col];
  if (s == "true") return true;
  if (s == "false") return false;
  BadField(row, col, s);
}

}  // namespace

void WriteRecords(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    out << (i ? "," : "") << kColumns[i];
  }
  out << "\r\n";
  for (const auto& r : records) {
    const std::array<std::string, 17> fields = {
        std::to_string(r.trial),
        std::to_string(r.m),
        std::to_string(r.d),
        std::to_string(r.s),
        Quote(r.noise_kind),
        FormatDouble(r.eta_norm),
        FormatDouble(r.eta_l1),
        FormatDouble(r.mean_eta),
        Quote(r.solver),
        r.lambda ? FormatDouble(*r.lambda) : std::string(),
        r.R ? FormatDouble(*r.R) : std::string(),
        FormatDouble(r.dist),
        FormatDouble(r.objective),
        std::to_string(r.iterations),
        r.converged ? "true" : "false",
        FormatDouble(r.runtime_ms),
        std::to_string(r.seed),
    };
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << "\r\n";
  }
}

void WriteRecords(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  WriteRecords(records, out);
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<ExperimentRecord> ParseRecords(const std::string& text) {
  const auto rows = Tokenize(text);
  if (rows.empty()) Fail(ErrorCode::kParse, "line 1: missing header");
  const Row& header = rows.front();
  if (header.fields.size() != kColumns.size()) {
    Fail(ErrorCode::kParse, "line " + std::to_string(header.line) + ": header has " +
                                std::to_string(header.fields.size()) + " columns, expected " +
                                std::to_string(kColumns.size()));
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (header.fields[i] != kColumns[i]) {
      Fail(ErrorCode::kParse, "line " + std::to_string(header.line) + ": header column " +
                                  std::to_string(i + 1) + " is '" + header.fields[i] +
                                  "', expected '" + std::string(kColumns[i]) + "'");
    }
  }
  std::vector<ExperimentRecord> records;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const Row& row = rows[k];
    if (row.fields.size() != kColumns.size()) {
      Fail(ErrorCode::kParse, "line " + std::to_string(row.line) + ": expected " +
                                  std::to_string(kColumns.size()) + " fields, got " +
                                  std::to_string(row.fields.size()));
    }
    ExperimentRecord r;
    r.trial = ParseScalar<int>(row, 0);
    r.m = ParseScalar<int>(row, 1);
    r.d = ParseScalar<int>(row, 2);
    r.s = ParseScalar<int>(row, 3);
    r.noise_kind = row.fields[4];
    r.eta_norm = ParseScalar<double>(row, 5);
    r.eta_l1 = ParseScalar<double>(row, 6);
    r.mean_eta = ParseScalar<double>(row, 7);
    r.solver = row.fields[8];
    r.lambda = ParseOptional(row, 9);
    r.R = ParseOptional(row, 10);
    r.dist = ParseScalar<double>(row, 11);
    r.objective = ParseScalar<double>(row, 12);
    r.iterations = ParseScalar<int>(row, 13);
    r.converged = ParseBool(row, 14);
    r.runtime_ms = ParseScalar<double>(row, 15);
    r.seed = ParseScalar<std::uint64_t>(row, 16);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ExperimentRecord> ReadRecords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseRecords(buffer.str());
}

std::filesystem::path SlopeSidecarPath(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".slope");
}

void EmitPlotData(const std::vector<ExperimentRecord>& records, GroupBy group_by,
                  Statistic statistic, const std::filesystem::path& path) {
  if (records.empty()) Fail(ErrorCode::kInvalidArgument, "EmitPlotData: no records");
  const auto groups = SummarizeGroups(records, group_by, statistic);

  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << "# phasels plot data\n";
  out << "# x = " << GroupByName(group_by) << ", y = " << StatisticName(statistic)
      << " dist, yerr = sd(dist) / sqrt(n)\n";
  out << "# x y yerr\n";
  for (const auto& g : groups) {
    out << FormatDouble(g.x) << ' ' << FormatDouble(g.value) << ' ' << FormatDouble(g.std_error)
        << '\n';
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");

  std::ofstream side(SlopeSidecarPath(path));
  if (!side) Fail(ErrorCode::kIo, "cannot write slope sidecar for '" + path.string() + "'");
  try {
    const SlopeFit fit = FitLogLog(records, group_by, statistic);
    side << "slope=" << FormatDouble(fit.slope) << " intercept=" << FormatDouble(fit.intercept)
         << " r2=" << FormatDouble(fit.r_squared) << " points=" << fit.points
         << " slope_stderr=" << FormatDouble(fit.slope_stderr) << '\n';
  } catch (const Error& e) {
    side << "slope=nan intercept=nan r2=nan points=" << groups.size() << " slope_stderr=nan\n";
    side << "# fit unavailable: " << e.what() << '\n';
  }
}

}  // namespace phasels
