#pragma once

// Trace scoring and evaluation, shared by the CLI and the integration tests.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqscore/estimators.hpp"
#include "seqscore/eval.hpp"
#include "seqscore/semcluster.hpp"
#include "seqscore/traceio.hpp"

namespace seqscore {

/// Name of the labeler derived from SQuAD F1 against the gold answers.
inline constexpr const char* kF1Labeler = "f1";

struct ScoreOptions {
  std::vector<Measure> measures{std::begin(kAllMeasures), std::end(kAllMeasures)};
  ClusterStrategy strategy = ExactMatch{};
  F1Config f1;
};

/// Correctness labels of a record's reference answer: its external labels plus
/// "f1" (SQuAD F1 > threshold) when gold answers exist. An external label named
/// "f1" takes precedence.
std::map<std::string, bool> record_labels(const GenerationRecord& record, const F1Config& f1);

/// Cluster ids of each record's sampled answers. Entailment strategies get the
/// record's question as context. Records are processed in parallel.
std::vector<std::vector<std::size_t>> cluster_records(const std::vector<GenerationRecord>& records,
                                                      const ClusterStrategy& strategy);

/// One ResultRow per (record, requested measure), records in input order.
/// Throws ConfigError when a sample-based measure is requested for a record
/// without samples.
std::vector<ResultRow> score_records(const std::vector<GenerationRecord>& records, const ScoreOptions& options);

/// JSONL: {"id": ..., "clusters": [...]} per record.
void write_cluster_assignments(const std::vector<GenerationRecord>& records,
                               const std::vector<std::vector<std::size_t>>& clusters, std::ostream& out);

struct DatasetResults {
  std::string name;
  std::vector<ResultRow> rows;
};

/// id -> labeler -> correct. Read from JSONL {"id": ..., "labels": {...}}.
using LabelTable = std::map<std::string, std::map<std::string, bool>>;
LabelTable read_labels(const std::filesystem::path& path);

struct EvaluationEntry {
  std::string dataset;  // "mean" for the unweighted mean over datasets
  std::string labeler;
  Measure measure;
  std::size_t n;
  double auroc;
  double rejection_accuracy;
};

struct EvaluationReport {
  double keep_fraction;
  std::vector<std::string> datasets;
  std::vector<std::string> labelers;
  std::vector<Measure> measures;
  std::vector<EvaluationEntry> entries;
};

/// AUROC and rejection accuracy per (dataset, labeler, measure), plus the
/// unweighted mean over datasets. `overrides` replaces or adds labels by id.
/// Throws EvaluationError on id mismatches, unlabeled records or duplicated
/// (id, measure) rows.
EvaluationReport evaluate(std::vector<DatasetResults> datasets, const LabelTable& overrides, double keep_fraction);

/// Long form: dataset,labeler,measure,n,auroc,rejection_accuracy.
void write_report_csv(const EvaluationReport& report, std::ostream& out);
/// Text tables, measures as rows and dataset/labeler pairs as columns.
void write_report_table(const EvaluationReport& report, std::ostream& out);

}  // namespace seqscore
