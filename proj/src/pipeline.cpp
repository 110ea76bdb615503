#include "seqscore/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>

#include <json.hpp>

#include "seqscore/errors.hpp"

namespace seqscore {

namespace {

using nlohmann::json;

template <typename Body>
void parallel_records(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ClusterStrategy with_context(const ClusterStrategy& strategy, const std::string& question) {
  if (const auto* e = std::get_if<EntailmentMatch>(&strategy)) return EntailmentMatch{e->oracle, question};
  return strategy;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::map<std::string, bool> record_labels(const GenerationRecord& record, const F1Config& f1) {
  std::map<std::string, bool> labels;
  if (!record.gold_answers.empty()) {
    labels[kF1Labeler] = is_correct_f1(record.reference.text, record.gold_answers, f1);
  }
  for (const auto& [name, v] : record.external_labels) labels[name] = v;
  return labels;
}

std::vector<std::vector<std::size_t>> cluster_records(const std::vector<GenerationRecord>& records,
                                                      const ClusterStrategy& strategy) {
  std::vector<std::vector<std::size_t>> out(records.size());
  parallel_records(records.size(), [&](std::size_t i) {
    const auto& rec = records[i];
    if (rec.samples.empty()) return;
    out[i] = cluster(rec.sample_texts(), with_context(strategy, rec.question));
  });
  return out;
}

std::vector<ResultRow> score_records(const std::vector<GenerationRecord>& records, const ScoreOptions& options) {
  if (options.measures.empty()) throw ConfigError("no measures requested");
  bool want_clusters = false;
  bool want_samples = false;
  for (Measure m : options.measures) {
    want_clusters = want_clusters || needs_clusters(m);
    want_samples = want_samples || needs_samples(m);
  }
  if (want_samples) {
    for (const auto& rec : records) {
      if (rec.samples.empty()) {
        for (Measure m : options.measures) {
          if (needs_samples(m)) {
            throw ConfigError(std::string(to_string(m)) + " requested but record '" + rec.id + "' has no samples");
          }
        }
      }
    }
  }

  std::vector<std::vector<ResultRow>> per_record(records.size());
  parallel_records(records.size(), [&](std::size_t i) {
    const auto& rec = records[i];
    const auto labels = record_labels(rec, options.f1);
    const ScoredSequence reference = rec.reference_sequence();
    std::optional<SampleSet> set;
    if (want_samples) {
      set.emplace();
      set->samples = rec.sample_sequences();
      if (want_clusters) set->cluster_ids = cluster(rec.sample_texts(), with_context(options.strategy, rec.question));
    }
    for (Measure m : options.measures) {
      const auto score = compute_measure(m, &reference, set ? &*set : nullptr);
      per_record[i].push_back({rec.id, m, score.value, labels});
    }
  });

  std::vector<ResultRow> rows;
  for (auto& r : per_record) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  return rows;
}

void write_cluster_assignments(const std::vector<GenerationRecord>& records,
                               const std::vector<std::vector<std::size_t>>& clusters, std::ostream& out) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << json{{"id", records[i].id}, {"clusters", clusters.at(i)}}.dump() << '\n';
  }
}

LabelTable read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open labels file " + path.string());
  LabelTable table;
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
    if (!j.contains("id") || !j["id"].is_string()) throw ParseError(lineno, "id", "expected a string");
    if (!j.contains("labels") || !j["labels"].is_object()) throw ParseError(lineno, "labels", "expected an object");
    auto& entry = table[j["id"].get<std::string>()];
    for (const auto& [name, v] : j["labels"].items()) {
      if (!v.is_boolean()) throw ParseError(lineno, "labels." + name, "expected a boolean");
      entry[name] = v.get<bool>();
    }
  }
  return table;
}

EvaluationReport evaluate(std::vector<DatasetResults> datasets, const LabelTable& overrides, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw InputError("keep fraction must be in (0, 1]");
  if (datasets.empty()) throw EvaluationError("no results to evaluate");

  std::set<std::string> known_ids;
  for (auto& ds : datasets) {
    for (auto& row : ds.rows) {
      known_ids.insert(row.id);
      if (const auto it = overrides.find(row.id); it != overrides.end()) {
        for (const auto& [name, v] : it->second) row.labels[name] = v;
      }
    }
  }
  for (const auto& [id, _] : overrides) {
    if (!known_ids.count(id)) throw EvaluationError("label for unknown record id '" + id + "'");
  }

  EvaluationReport report;
  report.keep_fraction = keep_fraction;
  std::set<std::string> labelers;
  std::set<Measure> measures;
  for (const auto& ds : datasets) {
    report.datasets.push_back(ds.name);
    std::set<std::pair<std::string, Measure>> seen;
    for (const auto& row : ds.rows) {
      if (row.labels.empty()) {
        throw EvaluationError("record '" + row.id + "' in dataset '" + ds.name + "' has no correctness label");
      }
      if (!seen.insert({row.id, row.measure}).second) {
        throw EvaluationError("duplicate " + std::string(to_string(row.measure)) + " score for record '" + row.id +
                              "' in dataset '" + ds.name + "'");
      }
      measures.insert(row.measure);
      for (const auto& [name, _] : row.labels) labelers.insert(name);
    }
  }
  report.labelers.assign(labelers.begin(), labelers.end());
  for (Measure m : kAllMeasures) {
    if (measures.count(m)) report.measures.push_back(m);
  }

  for (const auto& ds : datasets) {
    for (const auto& labeler : report.labelers) {
      for (Measure m : report.measures) {
        std::vector<LabeledScore> items;
        for (const auto& row : ds.rows) {
          if (row.measure != m) continue;
          const auto it = row.labels.find(labeler);
          if (it != row.labels.end()) items.push_back({row.value, it->second});
        }
        if (items.empty()) continue;
        double auc = 0.0;
        try {
          auc = auroc(items);
        } catch (const EvaluationError& e) {
          throw EvaluationError("dataset '" + ds.name + "', labeler '" + labeler + "', " +
                                std::string(to_string(m)) + ": " + e.what());
        }
        report.entries.push_back({ds.name, labeler, m, items.size(), auc, rejection_accuracy(items, keep_fraction)});
      }
    }
  }

  for (const auto& labeler : report.labelers) {
    for (Measure m : report.measures) {
      double auc = 0.0, acc = 0.0;
      std::size_t k = 0, n = 0;
      for (const auto& e : report.entries) {
        if (e.labeler != labeler || e.measure != m || e.dataset == "mean") continue;
        auc += e.auroc;
        acc += e.rejection_accuracy;
        n += e.n;
        ++k;
      }
      if (k == 0) continue;
      report.entries.push_back({"mean", labeler, m, n, auc / static_cast<double>(k), acc / static_cast<double>(k)});
    }
  }
  return report;
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
  out << "dataset,labeler,measure,n,auroc,rejection_accuracy\n";
  for (const auto& e : report.entries) {
    out << csv_escape(e.dataset) << ',' << csv_escape(e.labeler) << ',' << to_string(e.measure) << ',' << e.n << ','
        << fmt(e.auroc) << ',' << fmt(e.rejection_accuracy) << '\n';
  }
}

void write_report_table(const EvaluationReport& report, std::ostream& out) {
  std::vector<std::string> columns = report.datasets;
  columns.push_back("mean");
  const auto lookup = [&](const std::string& ds, const std::string& labeler, Measure m) -> const EvaluationEntry* {
    for (const auto& e : report.entries) {
      if (e.dataset == ds && e.labeler == labeler && e.measure == m) return &e;
    }
    return nullptr;
  };
  const auto table = [&](const std::string& title, auto value) {
    out << title << '\n' << std::left << std::setw(8) << "measure";
    for (const auto& ds : columns) {
      for (const auto& l : report.labelers) out << "  " << std::setw(16) << (ds + "/" + l);
    }
    out << '\n';
    for (Measure m : report.measures) {
      out << std::setw(8) << to_string(m);
      for (const auto& ds : columns) {
        for (const auto& l : report.labelers) {
          const auto* e = lookup(ds, l, m);
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.3f", e ? value(*e) : 0.0);
          out << "  " << std::setw(16) << (e ? buf : "-");
        }
      }
      out << '\n';
    }
  };
  table("AUROC", [](const EvaluationEntry& e) { return e.auroc; });
  out << '\n';
  char title[64];
  std::snprintf(title, sizeof title, "Rejection accuracy (keep %.0f%%)", report.keep_fraction * 100.0);
  table(title, [](const EvaluationEntry& e) { return e.rejection_accuracy; });
}

}  // namespace seqscore
