#pragma once

// Generation traces and result exports.
//
// Trace files are JSONL, one GenerationRecord per line:
//
//   {"schema": "seqscore/1",
//    "id": "q17", "question": "...", "gold_answers": ["..."],
//    "reference": {"text": "...", "tokens": [..]?, "token_log_probs": [..],
//                  "decode": {"strategy": "greedy"} | {"strategy": "beam", "width": 5}},
//    "samples": [{"text": "...", "token_log_probs": [..], "temperature": 1.0}, ...],
//    "external_labels": {"llm-judge": true}}
//
// Only schema, id, reference.text and reference.token_log_probs are required.
// Every log-prob must be <= 0. Text is authoritative for clustering, log-probs
// for likelihoods; the length used for normalization is the number of logged
// log-probs.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqscore/estimators.hpp"
#include "seqscore/seqmodel.hpp"

namespace seqscore {

inline constexpr const char* kTraceSchema = "seqscore/1";

struct ReferenceDecode {
  enum class Kind { Greedy, Beam };
  Kind kind = Kind::Greedy;
  std::size_t beam_width = 1;

  friend bool operator==(const ReferenceDecode&, const ReferenceDecode&) = default;
};

struct ReferenceAnswer {
  std::string text;
  std::vector<TokenId> tokens;  // optional; empty when not logged
  std::vector<double> token_log_probs;
  ReferenceDecode decode;

  friend bool operator==(const ReferenceAnswer&, const ReferenceAnswer&) = default;
};

struct SampledAnswer {
  std::string text;
  std::vector<double> token_log_probs;
  double temperature = 1.0;

  friend bool operator==(const SampledAnswer&, const SampledAnswer&) = default;
};

struct GenerationRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  ReferenceAnswer reference;
  std::vector<SampledAnswer> samples;
  std::map<std::string, bool> external_labels;

  ScoredSequence reference_sequence() const;
  std::vector<ScoredSequence> sample_sequences() const;
  std::vector<std::string> sample_texts() const;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

/// Reads a JSONL trace file. Blank lines are skipped; an empty file yields no
/// records. Throws ParseError naming the line and field on any violation.
std::vector<GenerationRecord> read_traces(const std::filesystem::path& path);
std::vector<GenerationRecord> parse_traces(std::istream& in);

void write_traces(const std::vector<GenerationRecord>& records, const std::filesystem::path& path);
void write_traces(const std::vector<GenerationRecord>& records, std::ostream& out);

/// One (record, measure) score in long form, with the correctness labels of
/// the record's reference answer per labeler.
struct ResultRow {
  std::string id;
  Measure measure = Measure::GNLL;
  double value = 0.0;
  std::map<std::string, bool> labels;
};

enum class ResultFormat { Csv, Jsonl };

/// csv for anything but a .jsonl/.json extension.
ResultFormat format_for_path(const std::filesystem::path& path);

/// Renders a real with 6 significant digits ("%.6g").
std::string format_real6(double v);

/// Column order: id, measure, value, then the union of labeler names sorted
/// lexicographically. Label cells are 1, 0 or empty.
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path, ResultFormat format);
void write_results(const std::vector<ResultRow>& rows, std::ostream& out, ResultFormat format);

std::vector<ResultRow> read_results(const std::filesystem::path& path);
std::vector<ResultRow> parse_results(std::istream& in, ResultFormat format);

/// Minimal RFC 4180 helpers shared by the CSV writers and readers.
std::string csv_escape(const std::string& cell);
std::vector<std::string> csv_split(const std::string& line);

}  // namespace seqscore
