#include "seqscore/traceio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seqscore/errors.hpp"

namespace seqscore {

namespace {

using nlohmann::json;

class RecordParser {
 public:
  explicit RecordParser(std::size_t line) : line_(line) {}

  GenerationRecord parse(const json& j) const {
    if (!j.is_object()) fail("", "record is not a JSON object");
    const auto schema = required_string(j, "schema", "schema");
    if (schema != kTraceSchema) fail("schema", "unsupported schema '" + schema + "'");

    GenerationRecord rec;
    rec.id = required_string(j, "id", "id");
    rec.question = optional_string(j, "question", "question");
    if (const auto it = j.find("gold_answers"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) fail("gold_answers", "expected an array of strings");
      for (const auto& g : *it) {
        if (!g.is_string()) fail("gold_answers", "expected an array of strings");
        rec.gold_answers.push_back(g.get<std::string>());
      }
    }

    const auto ref = j.find("reference");
    if (ref == j.end() || !ref->is_object()) fail("reference", "missing required object");
    rec.reference.text = required_string(*ref, "text", "reference.text");
    rec.reference.token_log_probs = log_probs(*ref, "reference.token_log_probs");
    if (const auto it = ref->find("tokens"); it != ref->end() && !it->is_null()) {
      if (!it->is_array()) fail("reference.tokens", "expected an array of token ids");
      for (const auto& t : *it) {
        if (!t.is_number_unsigned() || t.get<std::uint64_t>() > std::numeric_limits<TokenId>::max()) {
          fail("reference.tokens", "expected non-negative integer token ids");
        }
        rec.reference.tokens.push_back(t.get<TokenId>());
      }
      if (rec.reference.tokens.size() != rec.reference.token_log_probs.size()) {
        fail("reference.tokens", "length differs from token_log_probs");
      }
    }
    if (const auto it = ref->find("decode"); it != ref->end() && !it->is_null()) {
      rec.reference.decode = decode(*it);
    }

    if (const auto it = j.find("samples"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) fail("samples", "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& s = (*it)[i];
        const std::string field = "samples[" + std::to_string(i) + "]";
        if (!s.is_object()) fail(field, "expected an object");
        SampledAnswer sample;
        sample.text = required_string(s, "text", field + ".text");
        sample.token_log_probs = log_probs(s, field + ".token_log_probs");
        if (const auto t = s.find("temperature"); t != s.end() && !t->is_null()) {
          if (!t->is_number() || !(t->get<double>() > 0.0)) fail(field + ".temperature", "expected a number > 0");
          sample.temperature = t->get<double>();
        }
        rec.samples.push_back(std::move(sample));
      }
    }

    if (const auto it = j.find("external_labels"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) fail("external_labels", "expected an object of booleans");
      for (const auto& [name, v] : it->items()) {
        if (!v.is_boolean()) fail("external_labels." + name, "expected a boolean");
        rec.external_labels[name] = v.get<bool>();
      }
    }
    return rec;
  }

 private:
  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(line_, field, what);
  }

  std::string required_string(const json& obj, const char* key, const std::string& field) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(field, "missing required field");
    if (!it->is_string()) fail(field, "expected a string");
    return it->get<std::string>();
  }

  std::string optional_string(const json& obj, const char* key, const std::string& field) const {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) fail(field, "expected a string");
    return it->get<std::string>();
  }

  std::vector<double> log_probs(const json& obj, const std::string& field) const {
    const auto it = obj.find("token_log_probs");
    if (it == obj.end()) fail(field, "missing required field");
    if (!it->is_array() || it->empty()) fail(field, "expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number()) fail(field, "expected a non-empty array of numbers");
      const double lp = v.get<double>();
      if (lp > 0.0) fail(field, "log-prob > 0");
      out.push_back(lp);
    }
    return out;
  }

  ReferenceDecode decode(const json& d) const {
    ReferenceDecode out;
    std::string strategy;
    if (d.is_string()) {
      strategy = d.get<std::string>();
    } else if (d.is_object() && d.contains("strategy") && d["strategy"].is_string()) {
      strategy = d["strategy"].get<std::string>();
    } else {
      fail("reference.decode", "expected {\"strategy\": \"greedy\" | \"beam\"}");
    }
    if (strategy == "greedy") return out;
    if (strategy != "beam") fail("reference.decode", "unknown strategy '" + strategy + "'");
    out.kind = ReferenceDecode::Kind::Beam;
    if (d.is_object() && d.contains("width")) {
      if (!d["width"].is_number_unsigned() || d["width"].get<std::size_t>() == 0) {
        fail("reference.decode.width", "expected a positive integer");
      }
      out.beam_width = d["width"].get<std::size_t>();
    }
    return out;
  }

  std::size_t line_;
};

json to_json(const GenerationRecord& rec) {
  json ref = {{"text", rec.reference.text}, {"token_log_probs", rec.reference.token_log_probs}};
  if (!rec.reference.tokens.empty()) ref["tokens"] = rec.reference.tokens;
  if (rec.reference.decode.kind == ReferenceDecode::Kind::Beam) {
    ref["decode"] = {{"strategy", "beam"}, {"width", rec.reference.decode.beam_width}};
  } else {
    ref["decode"] = {{"strategy", "greedy"}};
  }
  json samples = json::array();
  for (const auto& s : rec.samples) {
    samples.push_back({{"text", s.text}, {"token_log_probs", s.token_log_probs}, {"temperature", s.temperature}});
  }
  json j = {{"schema", kTraceSchema},
            {"id", rec.id},
            {"question", rec.question},
            {"gold_answers", rec.gold_answers},
            {"reference", ref},
            {"samples", samples}};
  if (!rec.external_labels.empty()) j["external_labels"] = rec.external_labels;
  return j;
}

std::string value_token(double v) {
  if (std::isfinite(v)) return format_real6(v);
  return json(format_real6(v)).dump();  // "inf", "-inf", "nan" as strings
}

double parse_value_cell(const std::string& cell) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(cell, &used);
  if (used != cell.size()) throw std::invalid_argument(cell);
  return v;
}

std::vector<std::string> labeler_columns(const std::vector<ResultRow>& rows) {
  std::set<std::string> names;
  for (const auto& r : rows) {
    for (const auto& [name, _] : r.labels) names.insert(name);
  }
  return {names.begin(), names.end()};
}

}  // namespace

ScoredSequence GenerationRecord::reference_sequence() const {
  return ScoredSequence(reference.tokens, reference.token_log_probs);
}

std::vector<ScoredSequence> GenerationRecord::sample_sequences() const {
  std::vector<ScoredSequence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(ScoredSequence::from_log_probs(s.token_log_probs));
  return out;
}

std::vector<std::string> GenerationRecord::sample_texts() const {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.text);
  return out;
}

std::vector<GenerationRecord> parse_traces(std::istream& in) {
  std::vector<GenerationRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, "", std::string("malformed JSON: ") + e.what());
    }
    records.push_back(RecordParser(lineno).parse(j));
  }
  return records;
}

std::vector<GenerationRecord> read_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file " + path.string());
  return parse_traces(in);
}

void write_traces(const std::vector<GenerationRecord>& records, std::ostream& out) {
  for (const auto& rec : records) out << to_json(rec).dump() << '\n';
}

void write_traces(const std::vector<GenerationRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write trace file " + path.string());
  write_traces(records, out);
  if (!out) throw InputError("write failed for " + path.string());
}

ResultFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".json" ? ResultFormat::Jsonl : ResultFormat::Csv;
}

std::string format_real6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else if (c != '\r') {
      cells.back() += c;
    }
  }
  return cells;
}

void write_results(const std::vector<ResultRow>& rows, std::ostream& out, ResultFormat format) {
  const auto labelers = labeler_columns(rows);
  if (format == ResultFormat::Csv) {
    out << "id,measure,value";
    for (const auto& l : labelers) out << ',' << csv_escape(l);
    out << '\n';
    for (const auto& r : rows) {
      out << csv_escape(r.id) << ',' << to_string(r.measure) << ',' << format_real6(r.value);
      for (const auto& l : labelers) {
        out << ',';
        if (const auto it = r.labels.find(l); it != r.labels.end()) out << (it->second ? '1' : '0');
      }
      out << '\n';
    }
    return;
  }
  for (const auto& r : rows) {
    out << "{\"id\":" << json(r.id).dump() << ",\"measure\":" << json(std::string(to_string(r.measure))).dump()
        << ",\"value\":" << value_token(r.value) << ",\"labels\":{";
    bool first = true;
    for (const auto& l : labelers) {
      const auto it = r.labels.find(l);
      if (it == r.labels.end()) continue;
      out << (first ? "" : ",") << json(l).dump() << ':' << (it->second ? "true" : "false");
      first = false;
    }
    out << "}}\n";
  }
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path, ResultFormat format) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write results file " + path.string());
  write_results(rows, out, format);
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<ResultRow> parse_results(std::istream& in, ResultFormat format) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  if (format == ResultFormat::Csv) {
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto cells = csv_split(line);
      if (header.empty()) {
        if (cells.size() < 3 || cells[0] != "id" || cells[1] != "measure" || cells[2] != "value") {
          throw ParseError(lineno, "", "results header must start with id,measure,value");
        }
        header = std::move(cells);
        continue;
      }
      if (cells.size() != header.size()) throw ParseError(lineno, "", "wrong number of columns");
      ResultRow row;
      row.id = cells[0];
      try {
        row.measure = parse_measure(cells[1]);
      } catch (const InputError&) {
        throw ParseError(lineno, "measure", "unknown measure '" + cells[1] + "'");
      }
      try {
        row.value = parse_value_cell(cells[2]);
      } catch (const std::logic_error&) {
        throw ParseError(lineno, "value", "not a number: '" + cells[2] + "'");
      }
      for (std::size_t c = 3; c < cells.size(); ++c) {
        if (cells[c].empty()) continue;
        if (cells[c] != "0" && cells[c] != "1") throw ParseError(lineno, header[c], "label must be 0, 1 or empty");
        row.labels[header[c]] = cells[c] == "1";
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, "", std::string("malformed JSON: ") + e.what());
    }
    ResultRow row;
    if (!j.contains("id") || !j["id"].is_string()) throw ParseError(lineno, "id", "expected a string");
    row.id = j["id"].get<std::string>();
    if (!j.contains("measure") || !j["measure"].is_string()) throw ParseError(lineno, "measure", "expected a string");
    try {
      row.measure = parse_measure(j["measure"].get<std::string>());
    } catch (const InputError&) {
      throw ParseError(lineno, "measure", "unknown measure");
    }
    const auto& v = j.contains("value") ? j["value"] : json();
    if (v.is_number()) {
      row.value = v.get<double>();
    } else if (v.is_string()) {
      try {
        row.value = parse_value_cell(v.get<std::string>());
      } catch (const std::logic_error&) {
        throw ParseError(lineno, "value", "not a number");
      }
    } else {
      throw ParseError(lineno, "value", "expected a number");
    }
    if (j.contains("labels")) {
      if (!j["labels"].is_object()) throw ParseError(lineno, "labels", "expected an object of booleans");
      for (const auto& [name, b] : j["labels"].items()) {
        if (!b.is_boolean()) throw ParseError(lineno, "labels." + name, "expected a boolean");
        row.labels[name] = b.get<bool>();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open results file " + path.string());
  return parse_results(in, format_for_path(path));
}

}  // namespace seqscore
